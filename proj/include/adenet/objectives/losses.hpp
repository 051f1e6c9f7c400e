#ifndef ADENET_OBJECTIVES_LOSSES_HPP
#define ADENET_OBJECTIVES_LOSSES_HPP

#include "adenet/core/ops.hpp"

namespace adenet {

struct LossWeights {
  double lambda1 = 1.0;  // enhancement
  double lambda2 = 1.0;  // detection
};

// -SI-SDR in dB. Both signals are zero-meaned, the estimate is projected onto
// the reference, and the loss is -20*log10(|s_target| / (|e_noise| + eps)).
// Scale-invariant in the estimate.
template <class S>
Var<S> si_sdr_loss(const Var<S>& est, const Var<S>& ref, double eps = 1e-8) {
  check(est->value.rank() == 1 && ref->value.rank() == 1 &&
            est->value.numel() == ref->value.numel(),
        ErrorKind::kShape, "si_sdr_loss: length mismatch");
  const int64_t n = est->value.numel();
  {
    double mean = 0;
    for (int64_t i = 0; i < n; ++i) mean += double(ref->value[i]);
    mean /= double(n);
    bool all_zero = true;
    for (int64_t i = 0; i < n; ++i)
      if (double(ref->value[i]) != mean) {
        all_zero = false;
        break;
      }
    check(!all_zero, ErrorKind::kDegenerate,
          "si_sdr_loss: reference is zero after mean removal");
  }
  auto est0 = sub(est, expand(mean_all(est), n));
  auto ref0 = sub(ref, expand(mean_all(ref), n));
  auto dot = sum_all(mul(est0, ref0));
  auto ref_en = add_scalar(sum_all(mul(ref0, ref0)), eps);
  auto alpha = div(dot, ref_en);
  auto s_target = mul(expand(alpha, n), ref0);
  auto e_noise = sub(est0, s_target);
  auto s_norm = sqrt_op(sum_all(mul(s_target, s_target)));
  auto e_norm = add_scalar(sqrt_op(sum_all(mul(e_noise, e_noise))), eps);
  // -20*log10(x) = -20/ln(10) * ln(x)
  return mul_scalar(log_nat(div(s_norm, e_norm)), -20.0 / std::log(10.0));
}

// Frame-level binary cross-entropy, logs clamped at 1e-12.
template <class S>
Var<S> asd_loss(const Var<S>& pred, const std::vector<int>& gt) {
  check(pred->value.rank() == 1 && pred->value.numel() == int64_t(gt.size()),
        ErrorKind::kLength, "asd_loss: length mismatch");
  const int64_t n = pred->value.numel();
  Tensor<S> pos({n}), neg({n});
  for (int64_t i = 0; i < n; ++i) {
    check(gt[size_t(i)] == 0 || gt[size_t(i)] == 1, ErrorKind::kConfig,
          "asd_loss: labels must be 0/1");
    pos[i] = S(gt[size_t(i)]);
    neg[i] = S(1 - gt[size_t(i)]);
  }
  auto lp = log_clamped(pred, 1e-12);
  auto ln1p = log_clamped(add_scalar(mul_scalar(pred, -1.0), 1.0), 1e-12);
  auto terms = add(mul(constant(std::move(pos)), lp),
                   mul(constant(std::move(neg)), ln1p));
  return mul_scalar(mean_all(terms), -1.0);
}

// L = lambda1 * L_se + lambda2 * L_asd. l_se may be null (silent-target clip).
template <class S>
Var<S> total_loss(const Var<S>& l_se, const Var<S>& l_asd, const LossWeights& w) {
  check(w.lambda1 >= 0 && w.lambda2 >= 0, ErrorKind::kConfig,
        "total_loss: negative weights");
  auto asd_term = mul_scalar(l_asd, w.lambda2);
  if (!l_se) return asd_term;
  return add(mul_scalar(l_se, w.lambda1), asd_term);
}

}  // namespace adenet

#endif  // ADENET_OBJECTIVES_LOSSES_HPP
