#ifndef ADENET_CORE_OPS_HPP
#define ADENET_CORE_OPS_HPP

#include <cmath>
#include <vector>

#include "adenet/core/autograd.hpp"
#include "adenet/core/fastmath.hpp"
#include "adenet/core/matmul.hpp"

namespace adenet {

template <class S>
inline bool wants_grad(const Var<S>& p) {
  return p && p->requires_grad;
}

template <class S>
inline void check_same_shape(const Var<S>& a, const Var<S>& b, const char* op) {
  check(a->value.shape == b->value.shape, ErrorKind::kShape,
        std::string(op) + ": shape mismatch " + shape_str(a->value.shape) +
            " vs " + shape_str(b->value.shape));
}

// ---- elementwise -----------------------------------------------------------

template <class S>
Var<S> add(const Var<S>& a, const Var<S>& b) {
  check_same_shape(a, b, "add");
  Tensor<S> out(a->value.shape);
  const int64_t n = out.numel();
#pragma omp parallel for schedule(static) if (n >= 65536)
  for (int64_t i = 0; i < n; ++i) out[i] = a->value[i] + b->value[i];
  return make_node<S>(std::move(out), {a, b}, [](Node<S>& nd) {
    for (int p = 0; p < 2; ++p) {
      auto& par = nd.parents[p];
      if (!par->requires_grad) continue;
      par->ensure_grad();
      for (int64_t i = 0; i < nd.grad.numel(); ++i) par->grad[i] += nd.grad[i];
    }
  });
}

template <class S>
Var<S> sub(const Var<S>& a, const Var<S>& b) {
  check_same_shape(a, b, "sub");
  Tensor<S> out(a->value.shape);
  for (int64_t i = 0; i < out.numel(); ++i) out[i] = a->value[i] - b->value[i];
  return make_node<S>(std::move(out), {a, b}, [](Node<S>& nd) {
    auto& pa = nd.parents[0];
    auto& pb = nd.parents[1];
    if (pa->requires_grad) {
      pa->ensure_grad();
      for (int64_t i = 0; i < nd.grad.numel(); ++i) pa->grad[i] += nd.grad[i];
    }
    if (pb->requires_grad) {
      pb->ensure_grad();
      for (int64_t i = 0; i < nd.grad.numel(); ++i) pb->grad[i] -= nd.grad[i];
    }
  });
}

template <class S>
Var<S> mul(const Var<S>& a, const Var<S>& b) {
  check_same_shape(a, b, "mul");
  Tensor<S> out(a->value.shape);
  const int64_t n_mul = out.numel();
#pragma omp parallel for schedule(static) if (n_mul >= 65536)
  for (int64_t i = 0; i < n_mul; ++i) out[i] = a->value[i] * b->value[i];
  return make_node<S>(std::move(out), {a, b}, [](Node<S>& nd) {
    auto& pa = nd.parents[0];
    auto& pb = nd.parents[1];
    if (pa->requires_grad) {
      pa->ensure_grad();
      for (int64_t i = 0; i < nd.grad.numel(); ++i)
        pa->grad[i] += nd.grad[i] * pb->value[i];
    }
    if (pb->requires_grad) {
      pb->ensure_grad();
      for (int64_t i = 0; i < nd.grad.numel(); ++i)
        pb->grad[i] += nd.grad[i] * pa->value[i];
    }
  });
}

template <class S>
Var<S> div(const Var<S>& a, const Var<S>& b) {
  check_same_shape(a, b, "div");
  Tensor<S> out(a->value.shape);
  for (int64_t i = 0; i < out.numel(); ++i) out[i] = a->value[i] / b->value[i];
  return make_node<S>(std::move(out), {a, b}, [](Node<S>& nd) {
    auto& pa = nd.parents[0];
    auto& pb = nd.parents[1];
    if (pa->requires_grad) {
      pa->ensure_grad();
      for (int64_t i = 0; i < nd.grad.numel(); ++i)
        pa->grad[i] += nd.grad[i] / pb->value[i];
    }
    if (pb->requires_grad) {
      pb->ensure_grad();
      for (int64_t i = 0; i < nd.grad.numel(); ++i)
        pb->grad[i] -= nd.grad[i] * pa->value[i] / (pb->value[i] * pb->value[i]);
    }
  });
}

template <class S>
Var<S> add_scalar(const Var<S>& a, double c) {
  Tensor<S> out(a->value.shape);
  for (int64_t i = 0; i < out.numel(); ++i) out[i] = a->value[i] + S(c);
  return make_node<S>(std::move(out), {a}, [](Node<S>& nd) {
    auto& pa = nd.parents[0];
    pa->ensure_grad();
    for (int64_t i = 0; i < nd.grad.numel(); ++i) pa->grad[i] += nd.grad[i];
  });
}

template <class S>
Var<S> mul_scalar(const Var<S>& a, double c) {
  Tensor<S> out(a->value.shape);
  for (int64_t i = 0; i < out.numel(); ++i) out[i] = a->value[i] * S(c);
  return make_node<S>(std::move(out), {a}, [c](Node<S>& nd) {
    auto& pa = nd.parents[0];
    pa->ensure_grad();
    for (int64_t i = 0; i < nd.grad.numel(); ++i)
      pa->grad[i] += nd.grad[i] * S(c);
  });
}

template <class S>
Var<S> relu(const Var<S>& a) {
  Tensor<S> out(a->value.shape);
  for (int64_t i = 0; i < out.numel(); ++i)
    out[i] = a->value[i] > S(0) ? a->value[i] : S(0);
  return make_node<S>(std::move(out), {a}, [](Node<S>& nd) {
    auto& pa = nd.parents[0];
    pa->ensure_grad();
    for (int64_t i = 0; i < nd.grad.numel(); ++i)
      if (nd.value[i] > S(0)) pa->grad[i] += nd.grad[i];
  });
}

template <class S>
Var<S> sigmoid(const Var<S>& a) {
  Tensor<S> out(a->value.shape);
  const int64_t n_sig = out.numel();
#pragma omp parallel for schedule(static) if (n_sig >= 65536)
  for (int64_t i = 0; i < n_sig; ++i) {
    const S x = a->value[i];
    if (x >= S(0)) {
      out[i] = S(1) / (S(1) + fast_exp(-x));
    } else {
      const S e = fast_exp(x);
      out[i] = e / (S(1) + e);
    }
  }
  return make_node<S>(std::move(out), {a}, [](Node<S>& nd) {
    auto& pa = nd.parents[0];
    pa->ensure_grad();
    for (int64_t i = 0; i < nd.grad.numel(); ++i) {
      const S y = nd.value[i];
      pa->grad[i] += nd.grad[i] * y * (S(1) - y);
    }
  });
}

template <class S>
Var<S> tanh_act(const Var<S>& a) {
  Tensor<S> out(a->value.shape);
  for (int64_t i = 0; i < out.numel(); ++i) out[i] = std::tanh(a->value[i]);
  return make_node<S>(std::move(out), {a}, [](Node<S>& nd) {
    auto& pa = nd.parents[0];
    pa->ensure_grad();
    for (int64_t i = 0; i < nd.grad.numel(); ++i) {
      const S y = nd.value[i];
      pa->grad[i] += nd.grad[i] * (S(1) - y * y);
    }
  });
}

// y = x * sigmoid(x)
template <class S>
Var<S> swish(const Var<S>& a) {
  return mul(a, sigmoid(a));
}

// log(max(x, floor)); zero slope below the floor
template <class S>
Var<S> log_clamped(const Var<S>& a, double floor_v) {
  Tensor<S> out(a->value.shape);
  for (int64_t i = 0; i < out.numel(); ++i)
    out[i] = S(std::log(std::max(double(a->value[i]), floor_v)));
  return make_node<S>(std::move(out), {a}, [floor_v](Node<S>& nd) {
    auto& pa = nd.parents[0];
    pa->ensure_grad();
    for (int64_t i = 0; i < nd.grad.numel(); ++i)
      if (double(pa->value[i]) > floor_v)
        pa->grad[i] += nd.grad[i] / pa->value[i];
  });
}

template <class S>
Var<S> log_nat(const Var<S>& a) {
  Tensor<S> out(a->value.shape);
  for (int64_t i = 0; i < out.numel(); ++i) out[i] = S(std::log(double(a->value[i])));
  return make_node<S>(std::move(out), {a}, [](Node<S>& nd) {
    auto& pa = nd.parents[0];
    pa->ensure_grad();
    for (int64_t i = 0; i < nd.grad.numel(); ++i)
      pa->grad[i] += nd.grad[i] / pa->value[i];
  });
}

template <class S>
Var<S> sqrt_op(const Var<S>& a) {
  Tensor<S> out(a->value.shape);
  for (int64_t i = 0; i < out.numel(); ++i) out[i] = S(std::sqrt(double(a->value[i])));
  return make_node<S>(std::move(out), {a}, [](Node<S>& nd) {
    auto& pa = nd.parents[0];
    pa->ensure_grad();
    for (int64_t i = 0; i < nd.grad.numel(); ++i)
      pa->grad[i] += nd.grad[i] * S(0.5) / nd.value[i];
  });
}

// ---- reductions / broadcast -------------------------------------------------

template <class S>
Var<S> sum_all(const Var<S>& a) {
  Tensor<S> out({1});
  out[0] = S(vsum(a->value.ptr(), a->value.numel()));
  return make_node<S>(std::move(out), {a}, [](Node<S>& nd) {
    auto& pa = nd.parents[0];
    pa->ensure_grad();
    const S g = nd.grad[0];
    for (int64_t i = 0; i < pa->grad.numel(); ++i) pa->grad[i] += g;
  });
}

template <class S>
Var<S> mean_all(const Var<S>& a) {
  return mul_scalar(sum_all(a), 1.0 / double(a->value.numel()));
}

// [1] -> [n]
template <class S>
Var<S> expand(const Var<S>& s, int64_t n) {
  check(s->value.numel() == 1, ErrorKind::kShape, "expand: source not scalar");
  Tensor<S> out({n});
  for (int64_t i = 0; i < n; ++i) out[i] = s->value[0];
  return make_node<S>(std::move(out), {s}, [](Node<S>& nd) {
    auto& pa = nd.parents[0];
    pa->ensure_grad();
    S acc(0);
    for (int64_t i = 0; i < nd.grad.numel(); ++i) acc += nd.grad[i];
    pa->grad[0] += acc;
  });
}

// ---- shape ------------------------------------------------------------------

template <class S>
Var<S> reshape(const Var<S>& a, Shape sh) {
  check(shape_numel(sh) == a->value.numel(), ErrorKind::kShape,
        "reshape: numel mismatch");
  Tensor<S> out(std::move(sh), a->value.data);
  return make_node<S>(std::move(out), {a}, [](Node<S>& nd) {
    auto& pa = nd.parents[0];
    pa->ensure_grad();
    for (int64_t i = 0; i < nd.grad.numel(); ++i) pa->grad[i] += nd.grad[i];
  });
}

template <class S>
Var<S> transpose2d(const Var<S>& a) {
  check(a->value.rank() == 2, ErrorKind::kShape, "transpose2d: rank != 2");
  const int64_t m = a->value.dim(0), n = a->value.dim(1);
  Tensor<S> out({n, m});
  transpose_mat(a->value.ptr(), out.ptr(), m, n);
  return make_node<S>(std::move(out), {a}, [m, n](Node<S>& nd) {
    auto& pa = nd.parents[0];
    pa->ensure_grad();
    for (int64_t j = 0; j < n; ++j)
      for (int64_t i = 0; i < m; ++i) pa->grad[i * n + j] += nd.grad[j * m + i];
  });
}

// columns [c0, c1) of a 2-D tensor
template <class S>
Var<S> slice_cols(const Var<S>& a, int64_t c0, int64_t c1) {
  check(a->value.rank() == 2 && c0 >= 0 && c1 <= a->value.dim(1) && c0 < c1,
        ErrorKind::kShape, "slice_cols: bad range");
  const int64_t rows = a->value.dim(0), cols = a->value.dim(1), w = c1 - c0;
  Tensor<S> out({rows, w});
  for (int64_t i = 0; i < rows; ++i)
    for (int64_t j = 0; j < w; ++j) out[i * w + j] = a->value[i * cols + c0 + j];
  return make_node<S>(std::move(out), {a}, [rows, cols, w, c0](Node<S>& nd) {
    auto& pa = nd.parents[0];
    pa->ensure_grad();
    for (int64_t i = 0; i < rows; ++i)
      for (int64_t j = 0; j < w; ++j)
        pa->grad[i * cols + c0 + j] += nd.grad[i * w + j];
  });
}

template <class S>
Var<S> concat_cols(const std::vector<Var<S>>& xs) {
  check(!xs.empty(), ErrorKind::kShape, "concat_cols: empty");
  const int64_t rows = xs[0]->value.dim(0);
  int64_t total = 0;
  for (const auto& x : xs) {
    check(x->value.rank() == 2 && x->value.dim(0) == rows, ErrorKind::kShape,
          "concat_cols: row mismatch");
    total += x->value.dim(1);
  }
  Tensor<S> out({rows, total});
  int64_t off = 0;
  for (const auto& x : xs) {
    const int64_t w = x->value.dim(1);
    for (int64_t i = 0; i < rows; ++i)
      for (int64_t j = 0; j < w; ++j)
        out[i * total + off + j] = x->value[i * w + j];
    off += w;
  }
  std::vector<Var<S>> parents(xs.begin(), xs.end());
  return make_node<S>(std::move(out), std::move(parents),
                      [rows, total](Node<S>& nd) {
                        int64_t off = 0;
                        for (auto& pa : nd.parents) {
                          const int64_t w = pa->value.dim(1);
                          if (pa->requires_grad) {
                            pa->ensure_grad();
                            for (int64_t i = 0; i < rows; ++i)
                              for (int64_t j = 0; j < w; ++j)
                                pa->grad[i * w + j] += nd.grad[i * total + off + j];
                          }
                          off += w;
                        }
                      });
}

// stack along dim0 for channel-major [C,T] feature maps
template <class S>
Var<S> concat_rows(const std::vector<Var<S>>& xs) {
  check(!xs.empty(), ErrorKind::kShape, "concat_rows: empty");
  const int64_t cols = xs[0]->value.dim(1);
  int64_t total = 0;
  for (const auto& x : xs) {
    check(x->value.rank() == 2 && x->value.dim(1) == cols, ErrorKind::kShape,
          "concat_rows: col mismatch");
    total += x->value.dim(0);
  }
  Tensor<S> out({total, cols});
  int64_t off = 0;
  for (const auto& x : xs) {
    std::copy(x->value.data.begin(), x->value.data.end(),
              out.data.begin() + off * cols);
    off += x->value.dim(0);
  }
  std::vector<Var<S>> parents(xs.begin(), xs.end());
  return make_node<S>(std::move(out), std::move(parents), [cols](Node<S>& nd) {
    int64_t off = 0;
    for (auto& pa : nd.parents) {
      const int64_t r = pa->value.dim(0);
      if (pa->requires_grad) {
        pa->ensure_grad();
        for (int64_t i = 0; i < r * cols; ++i)
          pa->grad[i] += nd.grad[off * cols + i];
      }
      off += r;
    }
  });
}

// ---- broadcast over rows ----------------------------------------------------

// x[T,C] + b[C]
template <class S>
Var<S> add_rowvec(const Var<S>& x, const Var<S>& b) {
  check(x->value.rank() == 2 && b->value.numel() == x->value.dim(1),
        ErrorKind::kShape, "add_rowvec: bad shapes");
  const int64_t rows = x->value.dim(0), cols = x->value.dim(1);
  Tensor<S> out(x->value.shape);
  for (int64_t i = 0; i < rows; ++i)
    for (int64_t j = 0; j < cols; ++j)
      out[i * cols + j] = x->value[i * cols + j] + b->value[j];
  return make_node<S>(std::move(out), {x, b}, [rows, cols](Node<S>& nd) {
    auto& px = nd.parents[0];
    auto& pb = nd.parents[1];
    if (px->requires_grad) {
      px->ensure_grad();
      for (int64_t i = 0; i < rows * cols; ++i) px->grad[i] += nd.grad[i];
    }
    if (pb->requires_grad) {
      pb->ensure_grad();
      for (int64_t i = 0; i < rows; ++i)
        for (int64_t j = 0; j < cols; ++j) pb->grad[j] += nd.grad[i * cols + j];
    }
  });
}

// x[T,C] * w[C]
template <class S>
Var<S> mul_rowvec(const Var<S>& x, const Var<S>& w) {
  check(x->value.rank() == 2 && w->value.numel() == x->value.dim(1),
        ErrorKind::kShape, "mul_rowvec: bad shapes");
  const int64_t rows = x->value.dim(0), cols = x->value.dim(1);
  Tensor<S> out(x->value.shape);
  for (int64_t i = 0; i < rows; ++i)
    for (int64_t j = 0; j < cols; ++j)
      out[i * cols + j] = x->value[i * cols + j] * w->value[j];
  return make_node<S>(std::move(out), {x, w}, [rows, cols](Node<S>& nd) {
    auto& px = nd.parents[0];
    auto& pw = nd.parents[1];
    if (px->requires_grad) {
      px->ensure_grad();
      for (int64_t i = 0; i < rows; ++i)
        for (int64_t j = 0; j < cols; ++j)
          px->grad[i * cols + j] += nd.grad[i * cols + j] * pw->value[j];
    }
    if (pw->requires_grad) {
      pw->ensure_grad();
      for (int64_t i = 0; i < rows; ++i)
        for (int64_t j = 0; j < cols; ++j)
          pw->grad[j] += nd.grad[i * cols + j] * px->value[i * cols + j];
    }
  });
}

// ---- matmul -----------------------------------------------------------------

template <class S>
Var<S> matmul(const Var<S>& a, const Var<S>& b) {
  check(a->value.rank() == 2 && b->value.rank() == 2 &&
            a->value.dim(1) == b->value.dim(0),
        ErrorKind::kShape,
        "matmul: incompatible " + shape_str(a->value.shape) + " x " +
            shape_str(b->value.shape));
  const int64_t m = a->value.dim(0), k = a->value.dim(1), n = b->value.dim(1);
  Tensor<S> out({m, n});
  matmul_nn(a->value.ptr(), b->value.ptr(), out.ptr(), m, k, n);
  return make_node<S>(std::move(out), {a, b}, [m, k, n](Node<S>& nd) {
    auto& pa = nd.parents[0];
    auto& pb = nd.parents[1];
    if (pa->requires_grad) {
      pa->ensure_grad();
      // dA = dC * B^T
      Tensor<S> bt({n, k});
      transpose_mat(pb->value.ptr(), bt.ptr(), k, n);
      matmul_nn(nd.grad.ptr(), bt.ptr(), pa->grad.ptr(), m, n, k, true);
    }
    if (pb->requires_grad) {
      pb->ensure_grad();
      // dB = A^T * dC
      Tensor<S> at({k, m});
      transpose_mat(pa->value.ptr(), at.ptr(), m, k);
      matmul_nn(at.ptr(), nd.grad.ptr(), pb->grad.ptr(), k, m, n, true);
    }
  });
}

// ---- softmax ----------------------------------------------------------------

template <class S>
Var<S> softmax_rows(const Var<S>& x) {
  check(x->value.rank() == 2, ErrorKind::kShape, "softmax_rows: rank != 2");
  const int64_t rows = x->value.dim(0), cols = x->value.dim(1);
  Tensor<S> out(x->value.shape);
#pragma omp parallel for schedule(static) if (rows >= 64)
  for (int64_t i = 0; i < rows; ++i) {
    const S* xi = x->value.ptr() + i * cols;
    S* yi = out.ptr() + i * cols;
    S mx = xi[0];
    for (int64_t j = 1; j < cols; ++j) mx = std::max(mx, xi[j]);
    for (int64_t j = 0; j < cols; ++j) yi[j] = fast_exp(xi[j] - mx);
    const S inv = S(1.0 / vsum(yi, cols));
    for (int64_t j = 0; j < cols; ++j) yi[j] *= inv;
  }
  return make_node<S>(std::move(out), {x}, [rows, cols](Node<S>& nd) {
    auto& px = nd.parents[0];
    px->ensure_grad();
#pragma omp parallel for schedule(static) if (rows >= 64)
    for (int64_t i = 0; i < rows; ++i) {
      const S* y = nd.value.ptr() + i * cols;
      const S* g = nd.grad.ptr() + i * cols;
      const S dot = S(vdot(g, y, cols));
      S* gx = px->grad.ptr() + i * cols;
      for (int64_t j = 0; j < cols; ++j) gx[j] += (g[j] - dot) * y[j];
    }
  });
}

// ---- normalization core -----------------------------------------------------

// y = gamma * ((x - mean)/sqrt(var + eps) + t) + beta, statistics per row over
// the channel axis. `t` may be null; plain layer norm is exactly this op with
// t == 0, which is what makes the MLN/LN reduction bit-identical.
template <class S>
Var<S> norm_affine(const Var<S>& x, const Var<S>& t, const Var<S>& gamma,
                   const Var<S>& beta, double eps) {
  check(x->value.rank() == 2, ErrorKind::kShape, "norm_affine: rank != 2");
  const int64_t rows = x->value.dim(0), cols = x->value.dim(1);
  check(gamma->value.numel() == cols && beta->value.numel() == cols,
        ErrorKind::kShape, "norm_affine: gain/bias size");
  if (t) check_same_shape(x, t, "norm_affine");

  auto xhat = std::make_shared<Tensor<S>>(Shape{rows, cols});
  auto inv_std = std::make_shared<Tensor<S>>(Shape{rows});
  Tensor<S> out({rows, cols});
  for (int64_t i = 0; i < rows; ++i) {
    const S* xi = x->value.ptr() + i * cols;
    const double mean = vsum(xi, cols) / double(cols);
    const double var = vvar_sum(xi, cols, mean) / double(cols);
    const S is = S(1.0 / std::sqrt(var + eps));
    (*inv_std)[i] = is;
    S* xh = xhat->ptr() + i * cols;
    S* yo = out.ptr() + i * cols;
    for (int64_t j = 0; j < cols; ++j) {
      xh[j] = (xi[j] - S(mean)) * is;
      const S shifted = t ? xh[j] + t->value[i * cols + j] : xh[j] + S(0);
      yo[j] = gamma->value[j] * shifted + beta->value[j];
    }
  }
  std::vector<Var<S>> parents = t ? std::vector<Var<S>>{x, gamma, beta, t}
                                  : std::vector<Var<S>>{x, gamma, beta};
  const bool has_t = (t != nullptr);
  return make_node<S>(
      std::move(out), std::move(parents),
      [rows, cols, xhat, inv_std, has_t](Node<S>& nd) {
        auto& px = nd.parents[0];
        auto& pg = nd.parents[1];
        auto& pb = nd.parents[2];
        Var<S> pt = has_t ? nd.parents[3] : nullptr;
        for (int64_t i = 0; i < rows; ++i) {
          const S* g = nd.grad.ptr() + i * cols;
          const S* xh = xhat->ptr() + i * cols;
          if (pg->requires_grad) {
            pg->ensure_grad();
            for (int64_t j = 0; j < cols; ++j) {
              const S shifted =
                  has_t ? xh[j] + pt->value[i * cols + j] : xh[j];
              pg->grad[j] += g[j] * shifted;
            }
          }
          if (pb->requires_grad) {
            pb->ensure_grad();
            for (int64_t j = 0; j < cols; ++j) pb->grad[j] += g[j];
          }
          if (pt && pt->requires_grad) {
            pt->ensure_grad();
            for (int64_t j = 0; j < cols; ++j)
              pt->grad[i * cols + j] += g[j] * pg->value[j];
          }
          if (px->requires_grad) {
            px->ensure_grad();
            // dxhat = g * gamma; dx = (dxhat - mean(dxhat) - xhat*mean(dxhat*xhat)) * inv_std
            double m1 = vdot(g, pg->value.ptr(), cols) / double(cols);
            double m2 = vdot3(g, pg->value.ptr(), xh, cols) / double(cols);
            S* gx = px->grad.ptr() + i * cols;
            const S is = (*inv_std)[i];
            for (int64_t j = 0; j < cols; ++j) {
              const double dxh = double(g[j]) * double(pg->value[j]);
              gx[j] += S((dxh - m1 - double(xh[j]) * m2)) * is;
            }
          }
        }
      });
}

template <class S>
Var<S> layer_norm(const Var<S>& x, const Var<S>& gamma, const Var<S>& beta,
                  double eps) {
  return norm_affine<S>(x, nullptr, gamma, beta, eps);
}

}  // namespace adenet

#endif  // ADENET_CORE_OPS_HPP
