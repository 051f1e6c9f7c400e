#ifndef ADENET_CORE_OPS_CONV_HPP
#define ADENET_CORE_OPS_CONV_HPP

#include "adenet/core/ops.hpp"

namespace adenet {

// ---- 1-D convolution ----------------------------------------------------------
// x[Ci,T], w[Co,Ci/groups,k] -> y[Co,To]. Direct loops; every 1-D conv in the
// model is either tiny (k<=15) or cheap relative to the matmuls around it.

template <class S>
Var<S> conv1d(const Var<S>& x, const Var<S>& w, const Var<S>& b, int64_t stride,
              int64_t pad_l, int64_t pad_r, int64_t dilation = 1,
              int64_t groups = 1) {
  check(x->value.rank() == 2 && w->value.rank() == 3, ErrorKind::kShape,
        "conv1d: bad ranks");
  const int64_t ci = x->value.dim(0), t_in = x->value.dim(1);
  const int64_t co = w->value.dim(0), cig = w->value.dim(1), k = w->value.dim(2);
  check(ci == cig * groups && co % groups == 0, ErrorKind::kShape,
        "conv1d: channel/group mismatch");
  const int64_t span = (k - 1) * dilation + 1;
  const int64_t t_out = (t_in + pad_l + pad_r - span) / stride + 1;
  check(t_out >= 1, ErrorKind::kLength, "conv1d: input too short");
  if (b) check(b->value.numel() == co, ErrorKind::kShape, "conv1d: bias size");

  const int64_t cog = co / groups;
  Tensor<S> out({co, t_out});
#pragma omp parallel for schedule(static) if (co >= 4)
  for (int64_t oc = 0; oc < co; ++oc) {
    const int64_t grp = oc / cog;
    S* yrow = out.ptr() + oc * t_out;
    const S bias = b ? b->value[oc] : S(0);
    for (int64_t t = 0; t < t_out; ++t) yrow[t] = bias;
    for (int64_t icg = 0; icg < cig; ++icg) {
      const S* xrow = x->value.ptr() + (grp * cig + icg) * t_in;
      const S* wrow = w->value.ptr() + (oc * cig + icg) * k;
      for (int64_t kk = 0; kk < k; ++kk) {
        const S wv = wrow[kk];
        const int64_t off = kk * dilation - pad_l;
        int64_t t0 = off < 0 ? (-off + stride - 1) / stride : 0;
        int64_t t1 = off >= t_in ? 0 : (t_in - 1 - off) / stride + 1;
        if (t1 > t_out) t1 = t_out;
        for (int64_t t = t0; t < t1; ++t) yrow[t] += wv * xrow[t * stride + off];
      }
    }
  }
  std::vector<Var<S>> parents =
      b ? std::vector<Var<S>>{x, w, b} : std::vector<Var<S>>{x, w};
  return make_node<S>(
      std::move(out), std::move(parents),
      [ci, t_in, co, cig, k, stride, pad_l, dilation, groups, t_out](Node<S>& nd) {
        auto& px = nd.parents[0];
        auto& pw = nd.parents[1];
        Var<S> pb = nd.parents.size() > 2 ? nd.parents[2] : nullptr;
        const int64_t cog = co / groups;
        if (pb && pb->requires_grad) {
          pb->ensure_grad();
          for (int64_t oc = 0; oc < co; ++oc) {
            S acc(0);
            const S* g = nd.grad.ptr() + oc * t_out;
            for (int64_t t = 0; t < t_out; ++t) acc += g[t];
            pb->grad[oc] += acc;
          }
        }
        if (pw->requires_grad) {
          pw->ensure_grad();
#pragma omp parallel for schedule(static) if (co >= 4)
          for (int64_t oc = 0; oc < co; ++oc) {
            const int64_t grp = oc / cog;
            const S* g = nd.grad.ptr() + oc * t_out;
            for (int64_t icg = 0; icg < cig; ++icg) {
              const S* xrow = px->value.ptr() + (grp * cig + icg) * t_in;
              S* wg = pw->grad.ptr() + (oc * cig + icg) * k;
              for (int64_t kk = 0; kk < k; ++kk) {
                const int64_t off = kk * dilation - pad_l;
                int64_t t0 = off < 0 ? (-off + stride - 1) / stride : 0;
                int64_t t1 = off >= t_in ? 0 : (t_in - 1 - off) / stride + 1;
                if (t1 > t_out) t1 = t_out;
                if (t1 <= t0) continue;
                if (stride == 1) {
                  wg[kk] += S(vdot(g + t0, xrow + t0 + off, t1 - t0));
                } else {
                  S acc(0);
                  for (int64_t t = t0; t < t1; ++t)
                    acc += g[t] * xrow[t * stride + off];
                  wg[kk] += acc;
                }
              }
            }
          }
        }
        if (px->requires_grad) {
          px->ensure_grad();
#pragma omp parallel for schedule(static) if (ci >= 4)
          for (int64_t ic = 0; ic < ci; ++ic) {
            const int64_t grp = ic / cig;
            const int64_t icg = ic % cig;
            S* gx = px->grad.ptr() + ic * t_in;
            for (int64_t ocg = 0; ocg < cog; ++ocg) {
              const int64_t oc = grp * cog + ocg;
              const S* g = nd.grad.ptr() + oc * t_out;
              const S* wrow = pw->value.ptr() + (oc * cig + icg) * k;
              for (int64_t kk = 0; kk < k; ++kk) {
                const S wv = wrow[kk];
                const int64_t off = kk * dilation - pad_l;
                int64_t t0 = off < 0 ? (-off + stride - 1) / stride : 0;
                int64_t t1 = off >= t_in ? 0 : (t_in - 1 - off) / stride + 1;
                if (t1 > t_out) t1 = t_out;
                for (int64_t t = t0; t < t1; ++t)
                  gx[t * stride + off] += g[t] * wv;
              }
            }
          }
        }
      });
}

// x[Ci,T], w[Ci,Co,k], stride -> y[Co,(T-1)*stride+k]
template <class S>
Var<S> conv_transpose1d(const Var<S>& x, const Var<S>& w, const Var<S>& b,
                        int64_t stride) {
  check(x->value.rank() == 2 && w->value.rank() == 3, ErrorKind::kShape,
        "conv_transpose1d: bad ranks");
  const int64_t ci = x->value.dim(0), t_in = x->value.dim(1);
  check(w->value.dim(0) == ci, ErrorKind::kShape, "conv_transpose1d: channels");
  const int64_t co = w->value.dim(1), k = w->value.dim(2);
  const int64_t t_out = (t_in - 1) * stride + k;
  if (b) check(b->value.numel() == co, ErrorKind::kShape, "bias size");

  Tensor<S> out({co, t_out});
#pragma omp parallel for schedule(static) if (co >= 4)
  for (int64_t oc = 0; oc < co; ++oc) {
    S* yrow = out.ptr() + oc * t_out;
    const S bias = b ? b->value[oc] : S(0);
    for (int64_t t = 0; t < t_out; ++t) yrow[t] = bias;
    for (int64_t ic = 0; ic < ci; ++ic) {
      const S* xrow = x->value.ptr() + ic * t_in;
      const S* wrow = w->value.ptr() + (ic * co + oc) * k;
      for (int64_t t = 0; t < t_in; ++t) {
        const S xv = xrow[t];
        S* base = yrow + t * stride;
        for (int64_t kk = 0; kk < k; ++kk) base[kk] += xv * wrow[kk];
      }
    }
  }
  std::vector<Var<S>> parents =
      b ? std::vector<Var<S>>{x, w, b} : std::vector<Var<S>>{x, w};
  return make_node<S>(
      std::move(out), std::move(parents),
      [ci, t_in, co, k, stride, t_out](Node<S>& nd) {
        auto& px = nd.parents[0];
        auto& pw = nd.parents[1];
        Var<S> pb = nd.parents.size() > 2 ? nd.parents[2] : nullptr;
        if (pb && pb->requires_grad) {
          pb->ensure_grad();
          for (int64_t oc = 0; oc < co; ++oc) {
            S acc(0);
            const S* g = nd.grad.ptr() + oc * t_out;
            for (int64_t t = 0; t < t_out; ++t) acc += g[t];
            pb->grad[oc] += acc;
          }
        }
        if (px->requires_grad) {
          px->ensure_grad();
#pragma omp parallel for schedule(static) if (ci >= 4)
          for (int64_t ic = 0; ic < ci; ++ic) {
            S* gx = px->grad.ptr() + ic * t_in;
            for (int64_t oc = 0; oc < co; ++oc) {
              const S* g = nd.grad.ptr() + oc * t_out;
              const S* wrow = pw->value.ptr() + (ic * co + oc) * k;
              for (int64_t t = 0; t < t_in; ++t) {
                const S* base = g + t * stride;
                S acc(0);
                for (int64_t kk = 0; kk < k; ++kk) acc += base[kk] * wrow[kk];
                gx[t] += acc;
              }
            }
          }
        }
        if (pw->requires_grad) {
          pw->ensure_grad();
          for (int64_t ic = 0; ic < ci; ++ic) {
            const S* xrow = px->value.ptr() + ic * t_in;
            for (int64_t oc = 0; oc < co; ++oc) {
              const S* g = nd.grad.ptr() + oc * t_out;
              S* wg = pw->grad.ptr() + (ic * co + oc) * k;
              for (int64_t t = 0; t < t_in; ++t) {
                const S xv = xrow[t];
                const S* base = g + t * stride;
                for (int64_t kk = 0; kk < k; ++kk) wg[kk] += xv * base[kk];
              }
            }
          }
        }
      });
}

// ---- 2-D convolution (im2col + matmul) ----------------------------------------
// x[N,Ci,H,W], w[Co,Ci,kh,kw] -> y[N,Co,Ho,Wo]

namespace detail {

// Batched im2col: cols[Ci*kh*kw, N*Ho*Wo], column index = n*Ho*Wo + patch.
// Parallel over kernel rows; every cols element has exactly one writer.
template <class S>
void im2col_2d(const S* x, S* cols, int64_t n, int64_t ci, int64_t h, int64_t w,
               int64_t kh, int64_t kw, int64_t sh, int64_t sw, int64_t ph,
               int64_t pw, int64_t ho, int64_t wo) {
  const int64_t patch = ho * wo;
  const int64_t kdim = ci * kh * kw;
#pragma omp parallel for schedule(static) if (kdim >= 8)
  for (int64_t row = 0; row < kdim; ++row) {
    const int64_t c = row / (kh * kw);
    const int64_t ki = (row / kw) % kh;
    const int64_t kj = row % kw;
    S* dst0 = cols + row * n * patch;
    for (int64_t in = 0; in < n; ++in) {
      const S* xc = x + (in * ci + c) * h * w;
      S* dst = dst0 + in * patch;
      for (int64_t oi = 0; oi < ho; ++oi) {
        const int64_t ii = oi * sh + ki - ph;
        if (ii < 0 || ii >= h) {
          for (int64_t oj = 0; oj < wo; ++oj) dst[oi * wo + oj] = S(0);
          continue;
        }
        const S* src = xc + ii * w;
        const int64_t base = kj - pw;
        if (sw == 1 && base >= 0 && base + wo <= w) {
          std::copy_n(src + base, wo, dst + oi * wo);
        } else {
          for (int64_t oj = 0; oj < wo; ++oj) {
            const int64_t jj = oj * sw + base;
            dst[oi * wo + oj] = (jj >= 0 && jj < w) ? src[jj] : S(0);
          }
        }
      }
    }
  }
}

// Scatter-add of dcols back onto dx; parallel over input channels (each dx
// element is owned by one channel row).
template <class S>
void col2im_2d(const S* cols, S* gx, int64_t n, int64_t ci, int64_t h, int64_t w,
               int64_t kh, int64_t kw, int64_t sh, int64_t sw, int64_t ph,
               int64_t pw, int64_t ho, int64_t wo) {
  const int64_t patch = ho * wo;
#pragma omp parallel for schedule(static) if (ci >= 2)
  for (int64_t c = 0; c < ci; ++c)
    for (int64_t ki = 0; ki < kh; ++ki)
      for (int64_t kj = 0; kj < kw; ++kj) {
        const S* src0 = cols + ((c * kh + ki) * kw + kj) * n * patch;
        for (int64_t in = 0; in < n; ++in) {
          const S* src = src0 + in * patch;
          S* gxc = gx + (in * ci + c) * h * w;
          for (int64_t oi = 0; oi < ho; ++oi) {
            const int64_t ii = oi * sh + ki - ph;
            if (ii < 0 || ii >= h) continue;
            S* dst = gxc + ii * w;
            for (int64_t oj = 0; oj < wo; ++oj) {
              const int64_t jj = oj * sw + kj - pw;
              if (jj >= 0 && jj < w) dst[jj] += src[oi * wo + oj];
            }
          }
        }
      }
}

// [Co, N*patch] -> [N, Co, patch]
template <class S>
void split_batch(const S* src, S* dst, int64_t n, int64_t co, int64_t patch) {
  for (int64_t oc = 0; oc < co; ++oc)
    for (int64_t in = 0; in < n; ++in)
      std::copy_n(src + (oc * n + in) * patch, patch,
                  dst + (in * co + oc) * patch);
}

// [N, Co, patch] -> [Co, N*patch]
template <class S>
void merge_batch(const S* src, S* dst, int64_t n, int64_t co, int64_t patch) {
  for (int64_t in = 0; in < n; ++in)
    for (int64_t oc = 0; oc < co; ++oc)
      std::copy_n(src + (in * co + oc) * patch, patch,
                  dst + (oc * n + in) * patch);
}

}  // namespace detail

template <class S>
Var<S> conv2d(const Var<S>& x, const Var<S>& w, const Var<S>& b, int64_t sh,
              int64_t sw, int64_t ph, int64_t pw) {
  check(x->value.rank() == 4 && w->value.rank() == 4, ErrorKind::kShape,
        "conv2d: bad ranks");
  const int64_t n = x->value.dim(0), ci = x->value.dim(1), h = x->value.dim(2),
                wd = x->value.dim(3);
  const int64_t co = w->value.dim(0), kh = w->value.dim(2), kw = w->value.dim(3);
  check(w->value.dim(1) == ci, ErrorKind::kShape, "conv2d: channel mismatch");
  const int64_t ho = (h + 2 * ph - kh) / sh + 1;
  const int64_t wo = (wd + 2 * pw - kw) / sw + 1;
  check(ho >= 1 && wo >= 1, ErrorKind::kShape, "conv2d: output collapses");
  if (b) check(b->value.numel() == co, ErrorKind::kShape, "conv2d: bias size");

  const int64_t kdim = ci * kh * kw, patch = ho * wo;
  Tensor<S> out({n, co, ho, wo});
  {
    typename Tensor<S>::Storage cols(size_t(kdim * n * patch));
    detail::im2col_2d(x->value.ptr(), cols.data(), n, ci, h, wd, kh, kw, sh, sw,
                      ph, pw, ho, wo);
    typename Tensor<S>::Storage merged(size_t(co * n * patch));
    matmul_nn(w->value.ptr(), cols.data(), merged.data(), co, kdim, n * patch);
    detail::split_batch(merged.data(), out.ptr(), n, co, patch);
  }
  if (b) {
    for (int64_t in = 0; in < n; ++in)
      for (int64_t oc = 0; oc < co; ++oc) {
        S* dst = out.ptr() + (in * co + oc) * patch;
        const S bias = b->value[oc];
        for (int64_t p = 0; p < patch; ++p) dst[p] += bias;
      }
  }
  std::vector<Var<S>> parents =
      b ? std::vector<Var<S>>{x, w, b} : std::vector<Var<S>>{x, w};
  return make_node<S>(
      std::move(out), std::move(parents),
      [n, ci, h, wd, co, kh, kw, sh, sw, ph, pw, ho, wo](Node<S>& nd) {
        auto& px = nd.parents[0];
        auto& pw2 = nd.parents[1];
        Var<S> pb = nd.parents.size() > 2 ? nd.parents[2] : nullptr;
        const int64_t kdim = ci * kh * kw, patch = ho * wo;
        if (pb && pb->requires_grad) {
          pb->ensure_grad();
          for (int64_t in = 0; in < n; ++in)
            for (int64_t oc = 0; oc < co; ++oc) {
              const S* g = nd.grad.ptr() + (in * co + oc) * patch;
              S acc(0);
              for (int64_t p = 0; p < patch; ++p) acc += g[p];
              pb->grad[oc] += acc;
            }
        }
        typename Tensor<S>::Storage gmerged(size_t(co * n * patch));
        detail::merge_batch(nd.grad.ptr(), gmerged.data(), n, co, patch);
        if (pw2->requires_grad) {
          pw2->ensure_grad();
          typename Tensor<S>::Storage cols(size_t(kdim * n * patch));
          detail::im2col_2d(px->value.ptr(), cols.data(), n, ci, h, wd, kh, kw,
                            sh, sw, ph, pw, ho, wo);
          typename Tensor<S>::Storage colsT(size_t(kdim * n * patch));
          transpose_mat(cols.data(), colsT.data(), kdim, n * patch);
          // dW += dY * cols^T
          matmul_nn(gmerged.data(), colsT.data(), pw2->grad.ptr(), co, n * patch,
                    kdim, true);
        }
        if (px->requires_grad) {
          px->ensure_grad();
          typename Tensor<S>::Storage wt(size_t(kdim * co));
          transpose_mat(pw2->value.ptr(), wt.data(), co, kdim);
          typename Tensor<S>::Storage dcols(size_t(kdim * n * patch));
          matmul_nn(wt.data(), gmerged.data(), dcols.data(), kdim, co, n * patch);
          detail::col2im_2d(dcols.data(), px->grad.ptr(), n, ci, h, wd, kh, kw,
                            sh, sw, ph, pw, ho, wo);
        }
      });
}

// ---- 3-D convolution, single clip: x[Ci,T,H,W], w[Co,Ci,kt,kh,kw] ------------

template <class S>
Var<S> conv3d(const Var<S>& x, const Var<S>& w, const Var<S>& b, int64_t st,
              int64_t sh, int64_t sw, int64_t pt, int64_t ph, int64_t pw) {
  check(x->value.rank() == 4 && w->value.rank() == 5, ErrorKind::kShape,
        "conv3d: bad ranks");
  const int64_t ci = x->value.dim(0), td = x->value.dim(1), h = x->value.dim(2),
                wd = x->value.dim(3);
  const int64_t co = w->value.dim(0), kt = w->value.dim(2), kh = w->value.dim(3),
                kw = w->value.dim(4);
  check(w->value.dim(1) == ci, ErrorKind::kShape, "conv3d: channel mismatch");
  const int64_t to = (td + 2 * pt - kt) / st + 1;
  const int64_t ho = (h + 2 * ph - kh) / sh + 1;
  const int64_t wo = (wd + 2 * pw - kw) / sw + 1;
  if (b) check(b->value.numel() == co, ErrorKind::kShape, "conv3d: bias size");

  const int64_t kdim = ci * kt * kh * kw;
  const int64_t patch = to * ho * wo;
  auto fill_cols = [=](const S* xp, S* cols) {
    const int64_t kdim3 = ci * kt * kh * kw;
#pragma omp parallel for schedule(static) if (kdim3 >= 8)
    for (int64_t row = 0; row < kdim3; ++row) {
      const int64_t c = row / (kt * kh * kw);
      const int64_t q = (row / (kh * kw)) % kt;
      const int64_t ki = (row / kw) % kh;
      const int64_t kj = row % kw;
      S* dst = cols + row * patch;
      for (int64_t ot = 0; ot < to; ++ot) {
        const int64_t it = ot * st + q - pt;
        for (int64_t oi = 0; oi < ho; ++oi) {
          const int64_t ii = oi * sh + ki - ph;
          S* drow = dst + (ot * ho + oi) * wo;
          if (it < 0 || it >= td || ii < 0 || ii >= h) {
            for (int64_t oj = 0; oj < wo; ++oj) drow[oj] = S(0);
            continue;
          }
          const S* src = xp + ((c * td + it) * h + ii) * wd;
          for (int64_t oj = 0; oj < wo; ++oj) {
            const int64_t jj = oj * sw + kj - pw;
            drow[oj] = (jj >= 0 && jj < wd) ? src[jj] : S(0);
          }
        }
      }
    }
  };
  Tensor<S> out({co, to, ho, wo});
  {
    typename Tensor<S>::Storage cols(size_t(kdim * patch));
    fill_cols(x->value.ptr(), cols.data());
    matmul_nn(w->value.ptr(), cols.data(), out.ptr(), co, kdim, patch);
  }
  if (b)
    for (int64_t oc = 0; oc < co; ++oc) {
      S* dst = out.ptr() + oc * patch;
      for (int64_t p = 0; p < patch; ++p) dst[p] += b->value[oc];
    }
  std::vector<Var<S>> parents =
      b ? std::vector<Var<S>>{x, w, b} : std::vector<Var<S>>{x, w};
  return make_node<S>(
      std::move(out), std::move(parents),
      [=](Node<S>& nd) {
        auto& px = nd.parents[0];
        auto& pw2 = nd.parents[1];
        Var<S> pb = nd.parents.size() > 2 ? nd.parents[2] : nullptr;
        if (pb && pb->requires_grad) {
          pb->ensure_grad();
          for (int64_t oc = 0; oc < co; ++oc) {
            const S* g = nd.grad.ptr() + oc * patch;
            S acc(0);
            for (int64_t p = 0; p < patch; ++p) acc += g[p];
            pb->grad[oc] += acc;
          }
        }
        if (pw2->requires_grad) {
          pw2->ensure_grad();
          typename Tensor<S>::Storage cols(size_t(kdim * patch));
          fill_cols(px->value.ptr(), cols.data());
          typename Tensor<S>::Storage colsT(size_t(kdim * patch));
          transpose_mat(cols.data(), colsT.data(), kdim, patch);
          matmul_nn(nd.grad.ptr(), colsT.data(), pw2->grad.ptr(), co, patch,
                    kdim, true);
        }
        if (px->requires_grad) {
          px->ensure_grad();
          typename Tensor<S>::Storage wt(size_t(kdim * co));
          transpose_mat(pw2->value.ptr(), wt.data(), co, kdim);
          typename Tensor<S>::Storage dcols(size_t(kdim * patch));
          matmul_nn(wt.data(), nd.grad.ptr(), dcols.data(), kdim, co, patch);
          // scatter
          for (int64_t c = 0; c < ci; ++c)
            for (int64_t q = 0; q < kt; ++q)
              for (int64_t ki = 0; ki < kh; ++ki)
                for (int64_t kj = 0; kj < kw; ++kj) {
                  const S* src =
                      dcols.data() + (((c * kt + q) * kh + ki) * kw + kj) * patch;
                  for (int64_t ot = 0; ot < to; ++ot) {
                    const int64_t it = ot * st + q - pt;
                    if (it < 0 || it >= td) continue;
                    for (int64_t oi = 0; oi < ho; ++oi) {
                      const int64_t ii = oi * sh + ki - ph;
                      if (ii < 0 || ii >= h) continue;
                      S* dst = px->grad.ptr() + ((c * td + it) * h + ii) * wd;
                      const S* srow = src + (ot * ho + oi) * wo;
                      for (int64_t oj = 0; oj < wo; ++oj) {
                        const int64_t jj = oj * sw + kj - pw;
                        if (jj >= 0 && jj < wd) dst[jj] += srow[oj];
                      }
                    }
                  }
                }
        }
      });
}

// ---- pooling ------------------------------------------------------------------

// x[N,C,H,W], window == stride
template <class S>
Var<S> max_pool2d(const Var<S>& x, int64_t win) {
  check(x->value.rank() == 4, ErrorKind::kShape, "max_pool2d: rank != 4");
  const int64_t n = x->value.dim(0), c = x->value.dim(1), h = x->value.dim(2),
                w = x->value.dim(3);
  const int64_t ho = h / win, wo = w / win;
  check(ho >= 1 && wo >= 1, ErrorKind::kShape, "max_pool2d: window too large");
  Tensor<S> out({n, c, ho, wo});
  auto argmax = std::make_shared<std::vector<int64_t>>(size_t(out.numel()));
  for (int64_t nc = 0; nc < n * c; ++nc) {
    const S* src = x->value.ptr() + nc * h * w;
    S* dst = out.ptr() + nc * ho * wo;
    int64_t* am = argmax->data() + nc * ho * wo;
    for (int64_t oi = 0; oi < ho; ++oi)
      for (int64_t oj = 0; oj < wo; ++oj) {
        int64_t best = (oi * win) * w + oj * win;
        S bv = src[best];
        for (int64_t ki = 0; ki < win; ++ki)
          for (int64_t kj = 0; kj < win; ++kj) {
            const int64_t idx = (oi * win + ki) * w + oj * win + kj;
            if (src[idx] > bv) {
              bv = src[idx];
              best = idx;
            }
          }
        dst[oi * wo + oj] = bv;
        am[oi * wo + oj] = best;
      }
  }
  return make_node<S>(std::move(out), {x}, [n, c, h, w, ho, wo, argmax](Node<S>& nd) {
    auto& px = nd.parents[0];
    px->ensure_grad();
    for (int64_t nc = 0; nc < n * c; ++nc) {
      const S* g = nd.grad.ptr() + nc * ho * wo;
      const int64_t* am = argmax->data() + nc * ho * wo;
      S* gx = px->grad.ptr() + nc * h * w;
      for (int64_t p = 0; p < ho * wo; ++p) gx[am[p]] += g[p];
    }
  });
}

// x[C,T] -> [C,T/win], window == stride, first-max tie rule
template <class S>
Var<S> max_pool_time(const Var<S>& x, int64_t win) {
  check(x->value.rank() == 2, ErrorKind::kShape, "max_pool_time: rank != 2");
  const int64_t c = x->value.dim(0), t = x->value.dim(1);
  check(t % win == 0, ErrorKind::kAlignment,
        "max_pool_time: length not divisible by window");
  const int64_t to = t / win;
  Tensor<S> out({c, to});
  auto argmax = std::make_shared<std::vector<int64_t>>(size_t(c * to));
  for (int64_t ch = 0; ch < c; ++ch) {
    const S* src = x->value.ptr() + ch * t;
    for (int64_t o = 0; o < to; ++o) {
      int64_t best = o * win;
      S bv = src[best];
      for (int64_t kk = 1; kk < win; ++kk)
        if (src[o * win + kk] > bv) {
          bv = src[o * win + kk];
          best = o * win + kk;
        }
      out[ch * to + o] = bv;
      (*argmax)[ch * to + o] = best;
    }
  }
  return make_node<S>(std::move(out), {x}, [c, t, to, argmax](Node<S>& nd) {
    auto& px = nd.parents[0];
    px->ensure_grad();
    for (int64_t ch = 0; ch < c; ++ch)
      for (int64_t o = 0; o < to; ++o)
        px->grad[ch * t + (*argmax)[ch * to + o]] += nd.grad[ch * to + o];
  });
}

// x[C,T] -> [C,T/win]
template <class S>
Var<S> avg_pool_time(const Var<S>& x, int64_t win) {
  check(x->value.rank() == 2, ErrorKind::kShape, "avg_pool_time: rank != 2");
  const int64_t c = x->value.dim(0), t = x->value.dim(1);
  check(t % win == 0, ErrorKind::kAlignment,
        "avg_pool_time: length not divisible by window");
  const int64_t to = t / win;
  Tensor<S> out({c, to});
  for (int64_t ch = 0; ch < c; ++ch)
    for (int64_t o = 0; o < to; ++o) {
      S acc(0);
      const S* src = x->value.ptr() + ch * t + o * win;
      for (int64_t kk = 0; kk < win; ++kk) acc += src[kk];
      out[ch * to + o] = acc / S(win);
    }
  return make_node<S>(std::move(out), {x}, [c, t, to, win](Node<S>& nd) {
    auto& px = nd.parents[0];
    px->ensure_grad();
    for (int64_t ch = 0; ch < c; ++ch)
      for (int64_t o = 0; o < to; ++o) {
        const S g = nd.grad[ch * to + o] / S(win);
        S* gx = px->grad.ptr() + ch * t + o * win;
        for (int64_t kk = 0; kk < win; ++kk) gx[kk] += g;
      }
  });
}

// x[N,C,H,W] -> [N,C]
template <class S>
Var<S> global_avg_pool_nchw(const Var<S>& x) {
  check(x->value.rank() == 4, ErrorKind::kShape, "global_avg_pool: rank != 4");
  const int64_t n = x->value.dim(0), c = x->value.dim(1);
  const int64_t hw = x->value.dim(2) * x->value.dim(3);
  Tensor<S> out({n, c});
  for (int64_t nc = 0; nc < n * c; ++nc) {
    const S* src = x->value.ptr() + nc * hw;
    S acc(0);
    for (int64_t p = 0; p < hw; ++p) acc += src[p];
    out[nc] = acc / S(hw);
  }
  return make_node<S>(std::move(out), {x}, [n, c, hw](Node<S>& nd) {
    auto& px = nd.parents[0];
    px->ensure_grad();
    for (int64_t nc = 0; nc < n * c; ++nc) {
      const S g = nd.grad[nc] / S(hw);
      S* gx = px->grad.ptr() + nc * hw;
      for (int64_t p = 0; p < hw; ++p) gx[p] += g;
    }
  });
}

// x[N,C,H,W] scaled per (n,c) by gate[N,C]; squeeze-excitation reweighting
template <class S>
Var<S> mul_gate_nchw(const Var<S>& x, const Var<S>& gate) {
  check(x->value.rank() == 4 && gate->value.rank() == 2 &&
            gate->value.dim(0) == x->value.dim(0) &&
            gate->value.dim(1) == x->value.dim(1),
        ErrorKind::kShape, "mul_gate_nchw: bad shapes");
  const int64_t n = x->value.dim(0), c = x->value.dim(1);
  const int64_t hw = x->value.dim(2) * x->value.dim(3);
  Tensor<S> out(x->value.shape);
  for (int64_t nc = 0; nc < n * c; ++nc) {
    const S g = gate->value[nc];
    const S* src = x->value.ptr() + nc * hw;
    S* dst = out.ptr() + nc * hw;
    for (int64_t p = 0; p < hw; ++p) dst[p] = src[p] * g;
  }
  return make_node<S>(std::move(out), {x, gate}, [n, c, hw](Node<S>& nd) {
    auto& px = nd.parents[0];
    auto& pg = nd.parents[1];
    if (px->requires_grad) {
      px->ensure_grad();
      for (int64_t nc = 0; nc < n * c; ++nc) {
        const S g = pg->value[nc];
        const S* gr = nd.grad.ptr() + nc * hw;
        S* gx = px->grad.ptr() + nc * hw;
        for (int64_t p = 0; p < hw; ++p) gx[p] += gr[p] * g;
      }
    }
    if (pg->requires_grad) {
      pg->ensure_grad();
      for (int64_t nc = 0; nc < n * c; ++nc) {
        const S* gr = nd.grad.ptr() + nc * hw;
        const S* xv = px->value.ptr() + nc * hw;
        S acc(0);
        for (int64_t p = 0; p < hw; ++p) acc += gr[p] * xv[p];
        pg->grad[nc] += acc;
      }
    }
  });
}

// swap the first two axes of a rank-4 tensor: [A,B,H,W] -> [B,A,H,W]
template <class S>
Var<S> transpose_01(const Var<S>& x) {
  check(x->value.rank() == 4, ErrorKind::kShape, "transpose_01: rank != 4");
  const int64_t a = x->value.dim(0), b = x->value.dim(1);
  const int64_t hw = x->value.dim(2) * x->value.dim(3);
  Tensor<S> out({b, a, x->value.dim(2), x->value.dim(3)});
  for (int64_t i = 0; i < a; ++i)
    for (int64_t j = 0; j < b; ++j)
      std::copy_n(x->value.ptr() + (i * b + j) * hw, hw,
                  out.ptr() + (j * a + i) * hw);
  return make_node<S>(std::move(out), {x}, [a, b, hw](Node<S>& nd) {
    auto& px = nd.parents[0];
    px->ensure_grad();
    for (int64_t i = 0; i < a; ++i)
      for (int64_t j = 0; j < b; ++j) {
        const S* g = nd.grad.ptr() + (j * a + i) * hw;
        S* gx = px->grad.ptr() + (i * b + j) * hw;
        for (int64_t p = 0; p < hw; ++p) gx[p] += g[p];
      }
  });
}

// mean over the last axis: [..., L] -> [...]
template <class S>
Var<S> mean_last(const Var<S>& x) {
  check(x->value.rank() >= 2, ErrorKind::kShape, "mean_last: rank < 2");
  const int64_t l = x->value.shape.back();
  Shape osh(x->value.shape.begin(), x->value.shape.end() - 1);
  const int64_t rows = shape_numel(osh);
  Tensor<S> out(osh);
  for (int64_t i = 0; i < rows; ++i) {
    const S* src = x->value.ptr() + i * l;
    S acc(0);
    for (int64_t j = 0; j < l; ++j) acc += src[j];
    out[i] = acc / S(l);
  }
  return make_node<S>(std::move(out), {x}, [rows, l](Node<S>& nd) {
    auto& px = nd.parents[0];
    px->ensure_grad();
    for (int64_t i = 0; i < rows; ++i) {
      const S g = nd.grad[i] / S(l);
      S* gx = px->grad.ptr() + i * l;
      for (int64_t j = 0; j < l; ++j) gx[j] += g;
    }
  });
}

// Linear time interpolation [T,C] -> [T*scale,C]; sample centers aligned, ends
// replicated. A constant sequence maps to itself exactly.
template <class S>
Var<S> upsample_time(const Var<S>& x, int64_t scale) {
  check(x->value.rank() == 2, ErrorKind::kShape, "upsample_time: rank != 2");
  const int64_t t = x->value.dim(0), c = x->value.dim(1);
  const int64_t to = t * scale;
  auto lo = std::make_shared<std::vector<int64_t>>(size_t(to));
  auto w1 = std::make_shared<std::vector<S>>(size_t(to));
  for (int64_t j = 0; j < to; ++j) {
    double p = (double(j) + 0.5) / double(scale) - 0.5;
    if (p < 0) p = 0;
    if (p > double(t - 1)) p = double(t - 1);
    const int64_t i0 = int64_t(p);
    (*lo)[j] = std::min(i0, t - 1);
    (*w1)[j] = S(p - double(i0));
  }
  Tensor<S> out({to, c});
  for (int64_t j = 0; j < to; ++j) {
    const int64_t i0 = (*lo)[j];
    const int64_t i1 = std::min(i0 + 1, t - 1);
    const S a = S(1) - (*w1)[j], bw = (*w1)[j];
    const S* r0 = x->value.ptr() + i0 * c;
    const S* r1 = x->value.ptr() + i1 * c;
    S* dst = out.ptr() + j * c;
    for (int64_t ch = 0; ch < c; ++ch) dst[ch] = a * r0[ch] + bw * r1[ch];
  }
  return make_node<S>(std::move(out), {x}, [t, c, to, lo, w1](Node<S>& nd) {
    auto& px = nd.parents[0];
    px->ensure_grad();
    for (int64_t j = 0; j < to; ++j) {
      const int64_t i0 = (*lo)[j];
      const int64_t i1 = std::min(i0 + 1, t - 1);
      const S a = S(1) - (*w1)[j], bw = (*w1)[j];
      const S* g = nd.grad.ptr() + j * c;
      S* g0 = px->grad.ptr() + i0 * c;
      S* g1 = px->grad.ptr() + i1 * c;
      for (int64_t ch = 0; ch < c; ++ch) {
        g0[ch] += a * g[ch];
        g1[ch] += bw * g[ch];
      }
    }
  });
}

// ---- replicate padding ----------------------------------------------------------

// Pads along dim0 by repeating the first/last slice (any rank >= 1).
template <class S>
Var<S> replicate_pad_dim0(const Var<S>& x, int64_t left, int64_t right) {
  const int64_t t = x->value.dim(0);
  const int64_t block = x->value.numel() / t;
  Shape osh = x->value.shape;
  osh[0] = t + left + right;
  Tensor<S> out(osh);
  for (int64_t i = 0; i < osh[0]; ++i) {
    const int64_t src = std::min(std::max<int64_t>(i - left, 0), t - 1);
    std::copy_n(x->value.ptr() + src * block, block, out.ptr() + i * block);
  }
  return make_node<S>(std::move(out), {x}, [t, block, left](Node<S>& nd) {
    auto& px = nd.parents[0];
    px->ensure_grad();
    const int64_t to = nd.value.dim(0);
    for (int64_t i = 0; i < to; ++i) {
      const int64_t src = std::min(std::max<int64_t>(i - left, 0), t - 1);
      const S* g = nd.grad.ptr() + i * block;
      S* gx = px->grad.ptr() + src * block;
      for (int64_t j = 0; j < block; ++j) gx[j] += g[j];
    }
  });
}

// Pads a [C,T] map along time by repeating the edge columns.
template <class S>
Var<S> replicate_pad_time(const Var<S>& x, int64_t left, int64_t right) {
  check(x->value.rank() == 2, ErrorKind::kShape, "replicate_pad_time: rank != 2");
  const int64_t c = x->value.dim(0), t = x->value.dim(1);
  const int64_t to = t + left + right;
  Tensor<S> out({c, to});
  for (int64_t ch = 0; ch < c; ++ch) {
    const S* src = x->value.ptr() + ch * t;
    S* dst = out.ptr() + ch * to;
    for (int64_t i = 0; i < to; ++i)
      dst[i] = src[std::min(std::max<int64_t>(i - left, 0), t - 1)];
  }
  return make_node<S>(std::move(out), {x}, [c, t, to, left](Node<S>& nd) {
    auto& px = nd.parents[0];
    px->ensure_grad();
    for (int64_t ch = 0; ch < c; ++ch) {
      const S* g = nd.grad.ptr() + ch * to;
      S* gx = px->grad.ptr() + ch * t;
      for (int64_t i = 0; i < to; ++i)
        gx[std::min(std::max<int64_t>(i - left, 0), t - 1)] += g[i];
    }
  });
}

// ---- batch norm ----------------------------------------------------------------
// Channel-major variant: x[C,M] with statistics over M. Running stats are plain
// buffers owned by the layer; they are read in eval mode and updated in train
// mode.

template <class S>
Var<S> batch_norm_cm(const Var<S>& x, const Var<S>& gamma, const Var<S>& beta,
                     Tensor<S>& running_mean, Tensor<S>& running_var,
                     bool training, double momentum, double eps) {
  check(x->value.rank() == 2, ErrorKind::kShape, "batch_norm_cm: rank != 2");
  const int64_t c = x->value.dim(0), m = x->value.dim(1);
  check(gamma->value.numel() == c && beta->value.numel() == c &&
            running_mean.numel() == c && running_var.numel() == c,
        ErrorKind::kShape, "batch_norm_cm: channel mismatch");

  Tensor<S> out({c, m});
  auto xhat = std::make_shared<Tensor<S>>(Shape{c, m});
  auto inv_std = std::make_shared<Tensor<S>>(Shape{c});
  for (int64_t ch = 0; ch < c; ++ch) {
    const S* src = x->value.ptr() + ch * m;
    double mean, var;
    if (training) {
      mean = vsum(src, m) / double(m);
      var = vvar_sum(src, m, mean) / double(m);
      running_mean[ch] = S((1.0 - momentum) * double(running_mean[ch]) +
                           momentum * mean);
      running_var[ch] =
          S((1.0 - momentum) * double(running_var[ch]) + momentum * var);
    } else {
      mean = double(running_mean[ch]);
      var = double(running_var[ch]);
    }
    const S is = S(1.0 / std::sqrt(var + eps));
    (*inv_std)[ch] = is;
    S* xh = xhat->ptr() + ch * m;
    S* dst = out.ptr() + ch * m;
    const S gam = gamma->value[ch], bet = beta->value[ch];
    for (int64_t i = 0; i < m; ++i) {
      xh[i] = (src[i] - S(mean)) * is;
      dst[i] = gam * xh[i] + bet;
    }
  }
  return make_node<S>(
      std::move(out), {x, gamma, beta},
      [c, m, xhat, inv_std, training](Node<S>& nd) {
        auto& px = nd.parents[0];
        auto& pg = nd.parents[1];
        auto& pb = nd.parents[2];
        for (int64_t ch = 0; ch < c; ++ch) {
          const S* g = nd.grad.ptr() + ch * m;
          const S* xh = xhat->ptr() + ch * m;
          if (pg->requires_grad) {
            pg->ensure_grad();
            pg->grad[ch] += S(vdot(g, xh, m));
          }
          if (pb->requires_grad) {
            pb->ensure_grad();
            pb->grad[ch] += S(vsum(g, m));
          }
          if (px->requires_grad) {
            px->ensure_grad();
            const S gam = pg->value[ch];
            const S is = (*inv_std)[ch];
            S* gx = px->grad.ptr() + ch * m;
            if (training) {
              const double m1 = double(gam) * vsum(g, m) / double(m);
              const double m2 = double(gam) * vdot(g, xh, m) / double(m);
              for (int64_t i = 0; i < m; ++i) {
                const double dxh = double(g[i]) * double(gam);
                gx[i] += S(dxh - m1 - double(xh[i]) * m2) * is;
              }
            } else {
              for (int64_t i = 0; i < m; ++i) gx[i] += g[i] * gam * is;
            }
          }
        }
      });
}

// NCHW variant: statistics per channel over N*H*W.
template <class S>
Var<S> batch_norm_nchw(const Var<S>& x, const Var<S>& gamma, const Var<S>& beta,
                       Tensor<S>& running_mean, Tensor<S>& running_var,
                       bool training, double momentum, double eps) {
  check(x->value.rank() == 4, ErrorKind::kShape, "batch_norm_nchw: rank != 4");
  const int64_t n = x->value.dim(0), c = x->value.dim(1);
  const int64_t hw = x->value.dim(2) * x->value.dim(3);
  const int64_t m = n * hw;
  check(gamma->value.numel() == c && beta->value.numel() == c,
        ErrorKind::kShape, "batch_norm_nchw: channel mismatch");

  Tensor<S> out(x->value.shape);
  auto xhat = std::make_shared<Tensor<S>>(x->value.shape);
  auto inv_std = std::make_shared<Tensor<S>>(Shape{c});
  auto mean_t = std::make_shared<Tensor<S>>(Shape{c});
  for (int64_t ch = 0; ch < c; ++ch) {
    double mean, var;
    if (training) {
      mean = 0;
      for (int64_t in = 0; in < n; ++in)
        mean += vsum(x->value.ptr() + (in * c + ch) * hw, hw);
      mean /= double(m);
      var = 0;
      for (int64_t in = 0; in < n; ++in)
        var += vvar_sum(x->value.ptr() + (in * c + ch) * hw, hw, mean);
      var /= double(m);
      running_mean[ch] =
          S((1.0 - momentum) * double(running_mean[ch]) + momentum * mean);
      running_var[ch] =
          S((1.0 - momentum) * double(running_var[ch]) + momentum * var);
    } else {
      mean = double(running_mean[ch]);
      var = double(running_var[ch]);
    }
    (*mean_t)[ch] = S(mean);
    (*inv_std)[ch] = S(1.0 / std::sqrt(var + eps));
  }
#pragma omp parallel for schedule(static) if (n >= 4)
  for (int64_t in = 0; in < n; ++in)
    for (int64_t ch = 0; ch < c; ++ch) {
      const S* src = x->value.ptr() + (in * c + ch) * hw;
      S* xh = xhat->ptr() + (in * c + ch) * hw;
      S* dst = out.ptr() + (in * c + ch) * hw;
      const S mu = (*mean_t)[ch], is = (*inv_std)[ch];
      const S gam = gamma->value[ch], bet = beta->value[ch];
      for (int64_t p = 0; p < hw; ++p) {
        xh[p] = (src[p] - mu) * is;
        dst[p] = gam * xh[p] + bet;
      }
    }
  return make_node<S>(
      std::move(out), {x, gamma, beta},
      [n, c, hw, m, xhat, inv_std, training](Node<S>& nd) {
        auto& px = nd.parents[0];
        auto& pg = nd.parents[1];
        auto& pb = nd.parents[2];
        for (int64_t ch = 0; ch < c; ++ch) {
          if (pg->requires_grad || pb->requires_grad) {
            S accg(0), accb(0);
            for (int64_t in = 0; in < n; ++in) {
              const S* g = nd.grad.ptr() + (in * c + ch) * hw;
              const S* xh = xhat->ptr() + (in * c + ch) * hw;
              accg += S(vdot(g, xh, hw));
              accb += S(vsum(g, hw));
            }
            if (pg->requires_grad) {
              pg->ensure_grad();
              pg->grad[ch] += accg;
            }
            if (pb->requires_grad) {
              pb->ensure_grad();
              pb->grad[ch] += accb;
            }
          }
          if (px->requires_grad) {
            px->ensure_grad();
            const S gam = pg->value[ch];
            const S is = (*inv_std)[ch];
            if (training) {
              double m1 = 0, m2 = 0;
              for (int64_t in = 0; in < n; ++in) {
                const S* g = nd.grad.ptr() + (in * c + ch) * hw;
                const S* xh = xhat->ptr() + (in * c + ch) * hw;
                m1 += vsum(g, hw);
                m2 += vdot(g, xh, hw);
              }
              m1 *= double(gam) / double(m);
              m2 *= double(gam) / double(m);
              for (int64_t in = 0; in < n; ++in) {
                const S* g = nd.grad.ptr() + (in * c + ch) * hw;
                const S* xh = xhat->ptr() + (in * c + ch) * hw;
                S* gx = px->grad.ptr() + (in * c + ch) * hw;
                for (int64_t p = 0; p < hw; ++p) {
                  const double dxh = double(g[p]) * double(gam);
                  gx[p] += S(dxh - m1 - double(xh[p]) * m2) * is;
                }
              }
            } else {
              for (int64_t in = 0; in < n; ++in) {
                const S* g = nd.grad.ptr() + (in * c + ch) * hw;
                S* gx = px->grad.ptr() + (in * c + ch) * hw;
                for (int64_t p = 0; p < hw; ++p) gx[p] += g[p] * gam * is;
              }
            }
          }
        }
      });
}

}  // namespace adenet

#endif  // ADENET_CORE_OPS_CONV_HPP
