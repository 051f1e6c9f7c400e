#include <cstring>

#include "testutil.hpp"

#include "adenet/xmodal/cross_modal_conformer.hpp"

using namespace adenet;
using namespace adenet::testutil;

namespace {

Var<double> ln_simple(const Var<double>& x, double eps = 1e-12) {
  const int64_t c = x->value.dim(1);
  auto g = constant(Tensor<double>::full({c}, 1.0));
  auto b = constant(Tensor<double>::zeros({c}));
  return norm_affine<double>(x, nullptr, g, b, eps);
}

}  // namespace

TEST_CASE("layer_norm worked examples") {
  {
    // constant row -> zeros (eps guards the zero variance)
    auto x = constant(Tensor<double>::full({1, 5}, 3.7));
    auto y = ln_simple(x, 1e-5);
    for (const auto& v : y->value.data) CHECK(std::abs(v) < 1e-9);
  }
  {
    // x = [1,3] -> [-1,1] as eps -> 0
    Tensor<double> t({1, 2});
    t[0] = 1;
    t[1] = 3;
    auto y = ln_simple(constant(t), 1e-12);
    CHECK(y->value[0] == doctest::Approx(-1.0).epsilon(1e-6));
    CHECK(y->value[1] == doctest::Approx(1.0).epsilon(1e-6));
  }
  {
    // gamma = 0 -> output == beta
    auto x = constant(rand_t({3, 4}, 31));
    auto g = constant(Tensor<double>::zeros({4}));
    Tensor<double> bv({4});
    for (int i = 0; i < 4; ++i) bv[i] = 0.25 * i;
    auto y = norm_affine<double>(x, nullptr, g, constant(bv), 1e-5);
    for (int64_t r = 0; r < 3; ++r)
      for (int64_t c = 0; c < 4; ++c) CHECK(y->value.at(r, c) == bv[c]);
  }
}

TEST_CASE("mln with f == 0 equals layer_norm bit for bit") {
  ParamSet<double> ps(32);
  Mln<double> mln(ps, "mln", 6);
  LayerNorm<double> ln(ps, "ln", 6);
  // share the same gain/bias values
  Rng rng(33);
  for (int64_t i = 0; i < 6; ++i) {
    const double g = rng.uniform(0.5, 1.5), b = rng.uniform(-0.5, 0.5);
    mln.gamma->value[i] = g;
    ln.gamma->value[i] = g;
    mln.beta->value[i] = b;
    ln.beta->value[i] = b;
  }
  auto x = constant(rand_t({7, 6}, 34));
  auto y = constant(rand_t({7, 6}, 35));
  auto a = mln.forward(x, y);
  auto b = ln.forward(x);
  REQUIRE(a->value.numel() == b->value.numel());
  CHECK(std::memcmp(a->value.ptr(), b->value.ptr(),
                    size_t(a->value.numel()) * sizeof(double)) == 0);
}

TEST_CASE("mln constraint term is tanh-bounded and saturates") {
  ParamSet<double> ps(36);
  Mln<double> mln(ps, "mln", 4);
  for (auto& v : mln.f_weight->value.data) v = 2.0;
  auto x = constant(rand_t({5, 4}, 37));
  auto y = constant(rand_t({5, 4}, 38, -10, 10));
  auto t = tanh_act(add_rowvec(mul_rowvec(y, mln.f_weight), mln.f_bias));
  for (const auto& v : t->value.data) {
    CHECK(v > -1.0);
    CHECK(v < 1.0);
  }
  // constant x, gamma=1, beta=0, huge f_bias -> output saturates to 1
  for (auto& v : mln.f_weight->value.data) v = 0.0;
  for (auto& v : mln.f_bias->value.data) v = 50.0;
  auto xc = constant(Tensor<double>::full({5, 4}, 2.0));
  auto out = mln.forward(xc, y);
  for (const auto& v : out->value.data)
    CHECK(v == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("cross-modal attention: single-step softmax and value routing") {
  ParamSet<double> ps(40);
  CrossModalAttention<double> cma(ps, "cma", 8, 2, CmaVariant::kAsPrinted);
  auto fa = constant(rand_t({1, 8}, 41));
  auto fv = constant(rand_t({1, 8}, 42));
  auto [oa, ov] = cma.forward(fa, fv);
  // with T == 1 the softmax row is [1], so the output is the projected value
  auto vv = matmul(fv, cma.wv3);
  auto expect_a = cma.out_a.forward(vv);
  for (int64_t i = 0; i < 8; ++i)
    CHECK(oa->value[i] == doctest::Approx(expect_a->value[i]).epsilon(1e-12));
  auto va = matmul(fa, cma.wa3);
  auto expect_v = cma.out_v.forward(va);
  for (int64_t i = 0; i < 8; ++i)
    CHECK(ov->value[i] == doctest::Approx(expect_v->value[i]).epsilon(1e-12));

  auto bad = constant(rand_t({2, 8}, 43));
  CHECK_THROWS_AS(cma.forward(fa, bad), Error);
}

TEST_CASE("attention rows are stochastic; saturated logits pick one key") {
  AttentionProbe probe;
  attention_probe() = &probe;
  ParamSet<double> ps(44);
  MultiHeadSelfAttention<double> attn(ps, "attn", 8, 2);
  for (int trial = 0; trial < 20; ++trial) {
    auto x = constant(rand_t({11, 8}, 100 + uint64_t(trial)));
    attn.forward(x);
  }
  attention_probe() = nullptr;
  CHECK(probe.rows == 20 * 2 * 11);
  CHECK(probe.max_row_sum_dev < 1e-6);

  // saturation: q/k engineered so key j dominates by +1000 logits
  const int64_t t = 5, dh = 4;
  Tensor<double> q({t, dh}), k({t, dh}), v({t, dh});
  Rng rng(45);
  for (auto& x : v.data) x = rng.uniform(-1, 1);
  for (int64_t i = 0; i < t; ++i)
    for (int64_t j = 0; j < dh; ++j) {
      q.at(i, j) = 1000.0;
      k.at(i, j) = i == 2 ? 1.0 : 0.0;  // key 2 dominates
    }
  auto out = attend(constant(q), constant(k), constant(v), 1);
  for (int64_t i = 0; i < t; ++i)
    for (int64_t j = 0; j < dh; ++j)
      CHECK(std::abs(out->value.at(i, j) - v.at(2, j)) < 1e-3);
}

TEST_CASE("conformer block: shape preservation and stability") {
  ParamSet<double> ps(46);
  ConformerBlock<double> block(ps, "block", 16, 2);
  for (int64_t t : {1, 7, 800}) {
    auto x = constant(rand_t({t, 16}, 47 + uint64_t(t)));
    auto y = block.forward(x, false);
    CHECK(y->value.shape == Shape{t, 16});
  }
  Rng rng(48);
  for (int probe = 0; probe < 1000; ++probe) {
    auto x = constant(Tensor<double>::uniform({6, 16}, rng, -1, 1));
    CHECK(block.forward(x, false)->value.all_finite());
  }
  auto bad = constant(rand_t({4, 8}, 49));
  CHECK_THROWS_AS(block.forward(bad, false), Error);
}

TEST_CASE("conformer block with zeroed sublayers reduces to its final norm") {
  ParamSet<double> ps(50);
  ConformerBlock<double> block(ps, "block", 8, 2);
  // zero every linear/conv weight and bias; keep norm gains at 1
  for (auto& [name, v] : ps.params()) {
    if (name.find(".ln_") != std::string::npos) continue;
    if (name.find(".bn.") != std::string::npos) continue;
    std::fill(v->value.data.begin(), v->value.data.end(), 0.0);
  }
  auto x = constant(rand_t({9, 8}, 51));
  auto y = block.forward(x, /*training=*/true);
  auto expect = ln_simple(x, 1e-5);
  for (int64_t i = 0; i < y->value.numel(); ++i)
    CHECK(y->value[i] == doctest::Approx(expect->value[i]).epsilon(1e-9));
}

TEST_CASE("conv module interior is shift equivariant") {
  ParamSet<double> ps(52);
  ConvModule<double> conv(ps, "conv", 8);
  auto base = rand_t({40, 8}, 53);
  Tensor<double> shifted({40, 8});
  for (int64_t t = 1; t < 40; ++t)
    for (int64_t c = 0; c < 8; ++c) shifted.at(t, c) = base.at(t - 1, c);
  for (int64_t c = 0; c < 8; ++c) shifted.at(0, c) = rand_t({1, 8}, 54)[c];
  NoGradGuard ng;
  auto y0 = conv.forward(constant(base), /*training=*/false);
  auto y1 = conv.forward(constant(shifted), /*training=*/false);
  // interior: positions far enough from both ends to clear the kernel (15)
  for (int64_t t = 9; t < 31; ++t)
    for (int64_t c = 0; c < 8; ++c)
      CHECK(std::abs(y1->value.at(t, c) - y0->value.at(t - 1, c)) < 1e-5);
}

TEST_CASE("cross-modal conformer: positions, shapes, toggling") {
  const int64_t d = 8, heads = 2, t = 6;
  auto xa = rand_t({t, d}, 60);
  auto xv = rand_t({t, d}, 61);

  ParamSet<double> ps_none(62);
  CrossModalConformer<double> none(ps_none, "xm", d, heads, MlnPosition::kNone,
                                   CmaVariant::kAsPrinted, false);
  CHECK_FALSE(ps_none.has_param_containing(".mln_"));
  auto out_none = none.forward(constant(xa), constant(xv), false);
  CHECK(out_none.out_a->value.shape == Shape{t, d});
  CHECK(out_none.out_v->value.shape == Shape{t, d});

  for (auto pos : {MlnPosition::kFfn1, MlnPosition::kCma, MlnPosition::kConv,
                   MlnPosition::kFfn2, MlnPosition::kFinal}) {
    ParamSet<double> ps(63);
    CrossModalConformer<double> xm(ps, "xm", d, heads, pos,
                                   CmaVariant::kAsPrinted, false);
    CHECK(ps.has_param_containing(".mln_"));
    auto out = xm.forward(constant(xa), constant(xv), false);
    CHECK(out.out_a->value.shape == Shape{t, d});

    // with nonzero f weights the MLN position matters
    for (auto& [name, v] : ps.params())
      if (name.find(".f_weight") != std::string::npos)
        for (auto& x : v->value.data) x = 0.8;
    auto out2 = xm.forward(constant(xa), constant(xv), false);
    double l2 = 0;
    for (int64_t i = 0; i < out.out_a->value.numel(); ++i) {
      const double dd = out.out_a->value[i] - out2.out_a->value[i];
      l2 += dd * dd;
    }
    CHECK(l2 > 0.0);
  }

  // no_cmc swaps the shared CMA for per-stream self-attention
  ParamSet<double> ps_nc(64);
  CrossModalConformer<double> nc(ps_nc, "xm", d, heads, MlnPosition::kFinal,
                                 CmaVariant::kAsPrinted, true);
  CHECK(ps_nc.has_param_containing(".self_attn_"));
  CHECK_FALSE(ps_nc.has_param_containing(".cma."));
  auto out_nc = nc.forward(constant(xa), constant(xv), false);
  CHECK(out_nc.out_a->value.all_finite());
}

TEST_CASE("cross-modal conformer gradient check (d=8, heads=2, T=6)") {
  ParamSet<double> ps(65);
  CrossModalConformer<double> xm(ps, "xm", 8, 2, MlnPosition::kFinal,
                                 CmaVariant::kAsPrinted, false);
  // make the MLN constraint path active
  for (auto& [name, v] : ps.params())
    if (name.find(".f_weight") != std::string::npos)
      for (auto& x : v->value.data) x = 0.3;
  auto xa = leaf(rand_t({6, 8}, 66));
  auto xv = leaf(rand_t({6, 8}, 67));
  auto build = [&] {
    auto out = xm.forward(xa, xv, /*training=*/true);
    return add(project(out.out_a, 68), project(out.out_v, 69));
  };
  gradcheck({xa, xv}, build, 1e-5, 1e-4);
  // spot-check a few parameter tensors via directional differences
  for (const char* name :
       {"xm.cma.wa1", "xm.ffn1_a.lin1.weight", "xm.conv_v.dw.weight",
        "xm.mln_a.f_weight", "xm.mln_v.weight"}) {
    const double err = directional_grad_err(ps.params(), build, name, 1234);
    CHECK(err < 1e-4);
  }
}
