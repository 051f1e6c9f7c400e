#ifndef ADENET_NN_ATTENTION_HPP
#define ADENET_NN_ATTENTION_HPP

#include "adenet/nn/layers.hpp"

namespace adenet {

// Optional global probe over attention rows; when attached, every attention
// call reports max |row_sum - 1| of its softmax outputs.
struct AttentionProbe {
  int64_t rows = 0;
  double max_row_sum_dev = 0.0;
};
inline AttentionProbe*& attention_probe() {
  static AttentionProbe* p = nullptr;
  return p;
}

namespace detail {
template <class S>
void probe_rows(const Tensor<S>& probs) {
  AttentionProbe* p = attention_probe();
  if (!p) return;
  const int64_t rows = probs.dim(0), cols = probs.dim(1);
  for (int64_t i = 0; i < rows; ++i) {
    double s = 0;
    for (int64_t j = 0; j < cols; ++j) s += double(probs[i * cols + j]);
    p->max_row_sum_dev = std::max(p->max_row_sum_dev, std::abs(s - 1.0));
  }
  p->rows += rows;
}
}  // namespace detail

// Scaled dot-product attention over pre-projected q/k/v, multi-head, heads
// concatenated. q,k,v are [T,d]; head dim d/heads.
template <class S>
Var<S> attend(const Var<S>& q, const Var<S>& k, const Var<S>& v, int64_t heads) {
  const int64_t d = q->value.dim(1);
  check(d % heads == 0, ErrorKind::kConfig, "attend: d not divisible by heads");
  check(q->value.dim(0) == k->value.dim(0) && k->value.dim(0) == v->value.dim(0),
        ErrorKind::kShape, "attend: length mismatch");
  const int64_t dh = d / heads;
  const double scale = 1.0 / std::sqrt(double(dh));
  std::vector<Var<S>> ctx;
  ctx.reserve(size_t(heads));
  for (int64_t h = 0; h < heads; ++h) {
    // scaling the (small) query block avoids an extra T x T pass
    auto qh = mul_scalar(slice_cols(q, h * dh, (h + 1) * dh), scale);
    auto kh = slice_cols(k, h * dh, (h + 1) * dh);
    auto vh = slice_cols(v, h * dh, (h + 1) * dh);
    auto probs = softmax_rows(matmul(qh, transpose2d(kh)));
    detail::probe_rows(probs->value);
    ctx.push_back(matmul(probs, vh));
  }
  return concat_cols(ctx);
}

template <class S>
struct MultiHeadSelfAttention {
  Var<S> wq, wk, wv;
  Linear<S> out;
  int64_t heads = 8;

  MultiHeadSelfAttention() = default;
  MultiHeadSelfAttention(ParamSet<S>& ps, const std::string& prefix, int64_t d,
                         int64_t heads_)
      : heads(heads_) {
    wq = ps.fan_in_uniform(prefix + ".wq", {d, d}, d);
    wk = ps.fan_in_uniform(prefix + ".wk", {d, d}, d);
    wv = ps.fan_in_uniform(prefix + ".wv", {d, d}, d);
    out = Linear<S>(ps, prefix + ".out", d, d);
  }
  Var<S> forward(const Var<S>& x) const {
    return out.forward(
        attend(matmul(x, wq), matmul(x, wk), matmul(x, wv), heads));
  }
};

enum class CmaVariant { kAsPrinted, kConventional };

// Cross-modal attention. In the "as printed" form the attention matrix is
// built from one modality's queries AND keys while the values come from the
// other stream; the conventional form crosses keys and values together.
template <class S>
struct CrossModalAttention {
  Var<S> wa1, wa2, wa3;  // audio q,k,v projections
  Var<S> wv1, wv2, wv3;  // visual q,k,v projections
  Linear<S> out_a, out_v;
  int64_t heads = 8;
  CmaVariant variant = CmaVariant::kAsPrinted;

  CrossModalAttention() = default;
  CrossModalAttention(ParamSet<S>& ps, const std::string& prefix, int64_t d,
                      int64_t heads_, CmaVariant variant_)
      : heads(heads_), variant(variant_) {
    wa1 = ps.fan_in_uniform(prefix + ".wa1", {d, d}, d);
    wa2 = ps.fan_in_uniform(prefix + ".wa2", {d, d}, d);
    wa3 = ps.fan_in_uniform(prefix + ".wa3", {d, d}, d);
    wv1 = ps.fan_in_uniform(prefix + ".wv1", {d, d}, d);
    wv2 = ps.fan_in_uniform(prefix + ".wv2", {d, d}, d);
    wv3 = ps.fan_in_uniform(prefix + ".wv3", {d, d}, d);
    out_a = Linear<S>(ps, prefix + ".out_a", d, d);
    out_v = Linear<S>(ps, prefix + ".out_v", d, d);
  }

  std::pair<Var<S>, Var<S>> forward(const Var<S>& fa, const Var<S>& fv) const {
    check(fa->value.dim(0) == fv->value.dim(0), ErrorKind::kShape,
          "cross_modal_attention: stream length mismatch");
    auto qa = matmul(fa, wa1);
    auto ka = matmul(fa, wa2);
    auto va = matmul(fa, wa3);
    auto qv = matmul(fv, wv1);
    auto kv = matmul(fv, wv2);
    auto vv = matmul(fv, wv3);
    Var<S> fa_out, fv_out;
    if (variant == CmaVariant::kAsPrinted) {
      fa_out = attend(qa, ka, vv, heads);
      fv_out = attend(qv, kv, va, heads);
    } else {
      fa_out = attend(qa, kv, vv, heads);
      fv_out = attend(qv, ka, va, heads);
    }
    return {out_a.forward(fa_out), out_v.forward(fv_out)};
  }
};

}  // namespace adenet

#endif  // ADENET_NN_ATTENTION_HPP
