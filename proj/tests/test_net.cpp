#include <cmath>
#include <limits>
#include <vector>

#include "doctest.h"
#include "kpinn/net.hpp"
#include "kpinn/rng.hpp"

using namespace kpinn;

TEST_CASE("parameter layout and closed-form count") {
  CHECK(param_count(4, 64) == 12737);
  CHECK(param_count(1, 1) == 2 + 1 + 1 + 1);  // 2->1->1
  for (auto [d, w] : {std::pair{1, 1}, {2, 3}, {4, 64}, {4, 128}, {8, 256}}) {
    const ParamLayout lay{d, w};
    CHECK(lay.size() == param_count(d, w));
    // offsets tile the flat vector exactly
    std::size_t off = 0;
    for (int l = 0; l < lay.layer_count(); ++l) {
      CHECK(lay.weight_offset(l) == off);
      off += static_cast<std::size_t>(lay.out_dim(l)) * lay.in_dim(l);
      CHECK(lay.bias_offset(l) == off);
      off += lay.out_dim(l);
    }
    CHECK(off == lay.size());
  }
}

TEST_CASE("config validation") {
  CHECK_THROWS_AS((NetConfig{0, 64}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((NetConfig{4, 0}.validate()), std::invalid_argument);
  CHECK_NOTHROW((NetConfig{1, 1}.validate()));
}

TEST_CASE("initialization: deterministic, zero biases, scheme bounds") {
  const NetConfig tanh_cfg{3, 16, Activation::kTanh, 42};
  const ParamSet a = init_params(tanh_cfg);
  const ParamSet b = init_params(tanh_cfg);
  CHECK(a.values == b.values);

  const ParamSet c = init_params(NetConfig{3, 16, Activation::kTanh, 43});
  CHECK(a.values != c.values);

  const ParamLayout lay = layout_for(tanh_cfg);
  for (int l = 0; l < lay.layer_count(); ++l) {
    for (double bias : a.bias(l)) CHECK(bias == 0.0);
    const double bound = std::sqrt(6.0 / (lay.in_dim(l) + lay.out_dim(l)));
    for (double w : a.weight(l)) {
      CHECK(std::abs(w) <= bound);
    }
  }

  // He-normal draws are unbounded but should have roughly the right scale
  const ParamSet r = init_params(NetConfig{3, 64, Activation::kRelu, 7});
  double sq = 0.0;
  const auto w1 = r.weight(1);  // 64x64, in=64
  for (double w : w1) sq += w * w;
  const double var = sq / static_cast<double>(w1.size());
  CHECK(var == doctest::Approx(2.0 / 64).epsilon(0.25));

  CHECK(std::string(init_scheme_name(Activation::kTanh)) == "glorot-uniform");
  CHECK(std::string(init_scheme_name(Activation::kSin)) == "glorot-uniform");
  CHECK(std::string(init_scheme_name(Activation::kRelu)) == "he-normal");
}

TEST_CASE("forward pass against a hand net") {
  // 2 -> 1 -> 1, tanh: u = 3*tanh(theta + 2t + 0.5) - 1
  NetConfig cfg{1, 1, Activation::kTanh, 0};
  ParamSet ps{layout_for(cfg), {1.0, 2.0, 0.5, 3.0, -1.0}};
  const double theta = 0.3, t = 0.7;
  const double expect = 3.0 * std::tanh(theta + 2 * t + 0.5) - 1.0;
  CHECK(forward(ps, cfg, theta, t) == doctest::Approx(expect).epsilon(1e-14));

  cfg.activation = Activation::kSin;
  CHECK(forward(ps, cfg, theta, t) ==
        doctest::Approx(3.0 * std::sin(theta + 2 * t + 0.5) - 1.0).epsilon(1e-14));

  cfg.activation = Activation::kRelu;
  CHECK(forward(ps, cfg, theta, t) == doctest::Approx(3.0 * (theta + 2 * t + 0.5) - 1.0));
  // kink side: negative pre-activation clamps to the bias
  CHECK(forward(ps, cfg, -5.0, 0.0) == doctest::Approx(-1.0));
}

TEST_CASE("batch forward agrees with the scalar path") {
  for (Activation act : {Activation::kTanh, Activation::kSin, Activation::kRelu}) {
    for (int width : {12, 16}) {  // 12 exercises vector remainder lanes
      const NetConfig cfg{3, width, act, 11};
      const ParamSet ps = init_params(cfg);
      SplitMix64 rng(5);
      std::vector<std::pair<double, double>> pts(37);
      for (auto& [th, t] : pts) {
        th = rng.uniform(0.0, kTwoPi);
        t = rng.uniform(0.0, 1.0);
      }
      const std::vector<double> batch = forward_batch(ps, cfg, pts);
      REQUIRE(batch.size() == pts.size());
      for (std::size_t i = 0; i < pts.size(); ++i) {
        CHECK(batch[i] ==
              doctest::Approx(forward(ps, cfg, pts[i].first, pts[i].second)).epsilon(1e-13));
      }
    }
  }
}

TEST_CASE("non-finite parameters are reported with the failing layer") {
  const NetConfig cfg{2, 4, Activation::kTanh, 3};
  ParamSet ps = init_params(cfg);
  // inject into the output layer: it has no activation, so the inf reaches
  // the finiteness check intact
  ps.values[ps.layout.weight_offset(2)] = std::numeric_limits<double>::infinity();
  try {
    forward(ps, cfg, 1.0, 0.5);
    FAIL("expected NonFiniteError");
  } catch (const NonFiniteError& e) {
    CHECK(e.layer() == 2);
  }

  std::vector<std::pair<double, double>> pts{{1.0, 0.5}};
  CHECK_THROWS_AS(forward_batch(ps, cfg, pts), NonFiniteError);

  // an inf weight in a hidden layer is saturated away by tanh (inf and NaN
  // pre-activations clamp to the |x| <= 19 plateau), so the forward pass
  // stays finite and no error is raised
  ParamSet hidden = init_params(cfg);
  hidden.values[hidden.layout.weight_offset(1)] = std::numeric_limits<double>::infinity();
  CHECK(std::isfinite(forward(hidden, cfg, 1.0, 0.5)));
  CHECK(std::isfinite(forward_batch(hidden, cfg, pts)[0]));
}

TEST_CASE("fast_tanh tracks std::tanh to a few ulp") {
  double worst = 0.0;
  for (int i = 0; i <= 20000; ++i) {
    const double x = -25.0 + 50.0 * i / 20000.0;
    worst = std::max(worst, std::abs(fast_tanh(x) - std::tanh(x)));
  }
  CHECK(worst < 5e-16);
  CHECK(fast_tanh(0.0) == 0.0);
  // saturates one ulp below +-1; constant past the |x|=19 clamp
  CHECK(fast_tanh(25.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(fast_tanh(100.0) == fast_tanh(25.0));
  CHECK(fast_tanh(-25.0) == -fast_tanh(25.0));
  CHECK(fast_tanh(-3.0) == -fast_tanh(3.0));
}

TEST_CASE("exp_pos tracks std::exp on its domain") {
  double worst = 0.0;
  for (int i = 0; i <= 4500; ++i) {
    const double y = 45.0 * i / 4500.0;
    worst = std::max(worst, std::abs(detail::exp_pos(y) - std::exp(y)) / std::exp(y));
  }
  CHECK(worst < 1e-14);
}
