#include "testutil.hpp"

#include "adenet/context/context_net.hpp"

using namespace adenet;
using namespace adenet::testutil;

namespace {

ContextNetConfig tiny_ctx(ContextVariant variant, int64_t blocks = 1) {
  ContextNetConfig c;
  c.num_blocks = blocks;
  c.c_se = 8;
  c.heads = 2;
  c.variant = variant;
  return c;
}

}  // namespace

TEST_CASE("separate_context preserves shape") {
  ParamSet<double> ps(70);
  ContextNet<double> net(ps, "context", tiny_ctx(ContextVariant::kConformer, 2));
  NoGradGuard ng;
  for (int64_t ta : {1, 37, 800}) {
    auto fe = constant(rand_t({8, ta}, 71 + uint64_t(ta)));
    auto out = net.forward(fe, false);
    CHECK(out->value.shape == Shape{8, ta});
  }
}

TEST_CASE("tcn variant owns no attention parameters") {
  ParamSet<double> ps(72);
  ContextNet<double> net(ps, "context", tiny_ctx(ContextVariant::kTcn, 4));
  CHECK_FALSE(ps.has_param_containing("attn"));
  CHECK(ps.has_param_containing("tcn"));
  ParamSet<double> ps2(72);
  ContextNet<double> net2(ps2, "context", tiny_ctx(ContextVariant::kConformer, 4));
  CHECK(ps2.has_param_containing("attn"));
}

TEST_CASE("receptive field: conformer is global, a tcn stack is bounded") {
  const int64_t ta = 128;
  NoGradGuard ng;
  auto base = rand_t({8, ta}, 73);
  auto perturbed = base;
  perturbed.at(0, 0) += 0.5;

  {
    ParamSet<double> ps(74);
    ContextNet<double> net(ps, "ctx", tiny_ctx(ContextVariant::kConformer, 1));
    auto y0 = net.forward(constant(base), false);
    auto y1 = net.forward(constant(perturbed), false);
    double far_change = 0;
    for (int64_t c = 0; c < 8; ++c)
      far_change += std::abs(y1->value.at(c, ta - 1) - y0->value.at(c, ta - 1));
    CHECK(far_change > 0.0);  // attention carries the perturbation everywhere
  }
  {
    ParamSet<double> ps(75);
    ContextNet<double> net(ps, "ctx", tiny_ctx(ContextVariant::kTcn, 4));
    auto y0 = net.forward(constant(base), false);
    auto y1 = net.forward(constant(perturbed), false);
    // dilations 1,2,4,8 with kernel 3: receptive field radius is 30
    for (int64_t t = 40; t < ta; ++t)
      for (int64_t c = 0; c < 8; ++c)
        CHECK(y1->value.at(c, t) == y0->value.at(c, t));
    double near_change = 0;
    for (int64_t c = 0; c < 8; ++c)
      near_change += std::abs(y1->value.at(c, 0) - y0->value.at(c, 0));
    CHECK(near_change > 0.0);
  }
}

TEST_CASE("context net outputs stay finite and gradients check out") {
  ParamSet<double> ps(76);
  ContextNet<double> net(ps, "ctx", tiny_ctx(ContextVariant::kConformer, 1));
  Rng rng(77);
  {
    NoGradGuard ng;
    for (int probe = 0; probe < 1000; ++probe) {
      auto fe = constant(Tensor<double>::uniform({8, 12}, rng, -1, 1));
      CHECK(net.forward(fe, false)->value.all_finite());
    }
  }
  auto fe = leaf(rand_t({8, 10}, 78));
  gradcheck({fe}, [&] { return project(net.forward(fe, true), 79); }, 1e-5,
            1e-4);

  ContextNetConfig bad;
  bad.num_blocks = 0;
  CHECK_THROWS_AS(ContextNet<double>(ps, "bad", bad), Error);
}
