#include <doctest.h>

#include <cmath>
#include <random>

#include "archopt/loss.hpp"

using namespace archopt;

TEST_CASE("loss terms match the reference coefficients on a worked example") {
  const ScalingLawCoefficients c = reference_coefficients();
  const ArchitectureConfig a(16, 1024, 4.0, 1.0, 1.0);
  const LossBreakdown b = predict_loss_breakdown(a, c);

  // Hand-computed: 9.96/16^1.63, 0.031*1/(4^0.17 * 1024^-0.33),
  // 500/(4^0.17 * 1024^0.97), 0.20/1024^0.05, 2.53.
  CHECK(b.depth_term == doctest::Approx(9.96 / std::pow(16.0, 1.63)).epsilon(1e-12));
  CHECK(b.sparsity_term ==
        doctest::Approx(0.031 / (std::pow(4.0, 0.17) * std::pow(1024.0, -0.33))).epsilon(1e-12));
  CHECK(b.capacity_term ==
        doctest::Approx(500.0 / (std::pow(4.0, 0.17) * std::pow(1024.0, 0.97))).epsilon(1e-12));
  CHECK(b.kv_term == doctest::Approx(0.20 / std::pow(1024.0, 0.05)).epsilon(1e-12));
  CHECK(b.irreducible == doctest::Approx(2.53));
  CHECK(b.total() == doctest::Approx(3.4961).epsilon(1e-4));
  CHECK(predict_loss(a, c) == doctest::Approx(b.total()).epsilon(1e-15));
}

TEST_CASE("analytic loss gradient matches finite differences") {
  const ScalingLawCoefficients c = reference_coefficients();
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    const double l = 2.0 + 60.0 * u(rng), d = 512.0 + 4096.0 * u(rng);
    const double r = 0.2 + 10.0 * u(rng), rho = 0.05 + 0.9 * u(rng), gqa = 1.0 + 15.0 * u(rng);
    const ArchitectureConfig a(l, d, r, rho, gqa);
    const LossGradient g = loss_gradient(a, c);

    auto fd = [&](auto f, double x) {
      const double h = x * 1e-6;
      return (f(x + h) - f(x - h)) / (2.0 * h);
    };
    auto rel = [](double got, double want) {
      return std::abs(got - want) / std::max(std::abs(want), 1e-12);
    };
    CHECK(rel(g.d_layers, fd([&](double x) { return predict_loss({x, d, r, rho, gqa}, c); },
                             l)) < 1e-6);
    CHECK(rel(g.d_width, fd([&](double x) { return predict_loss({l, x, r, rho, gqa}, c); }, d)) <
          1e-6);
    CHECK(rel(g.d_ffn_ratio,
              fd([&](double x) { return predict_loss({l, d, x, rho, gqa}, c); }, r)) < 1e-6);
    CHECK(rel(g.d_activation_rate,
              fd([&](double x) { return predict_loss({l, d, r, x, gqa}, c); }, rho)) < 1e-6);
    CHECK(rel(g.d_gqa, fd([&](double x) { return predict_loss({l, d, r, rho, x}, c); }, gqa)) <
          1e-6);
  }
}

TEST_CASE("aggregate width-term gradient shorthand") {
  const ScalingLawCoefficients c = reference_coefficients();
  const double want =
      c.kappa_rho * std::pow(0.25, c.alpha_rho) * std::pow(1024.0, c.beta_2 - c.beta_1) +
      c.kappa_d;
  CHECK(aggregate_loss_gradient(c, 0.25, 1024.0) == doctest::Approx(want).epsilon(1e-14));
}

TEST_CASE("loss is monotone where the law says it should be") {
  const ScalingLawCoefficients c = reference_coefficients();
  // Deeper is better; denser (higher rho) is worse at fixed everything else.
  CHECK(predict_loss({32, 1024, 4, 0.5, 4}, c) < predict_loss({16, 1024, 4, 0.5, 4}, c));
  CHECK(predict_loss({16, 1024, 4, 0.9, 4}, c) > predict_loss({16, 1024, 4, 0.2, 4}, c));
  // Larger gqa shrinks the KV dimension, raising the KV term.
  CHECK(predict_loss({16, 1024, 4, 0.5, 8}, c) > predict_loss({16, 1024, 4, 0.5, 1}, c));
}

TEST_CASE("coefficient validation") {
  ScalingLawCoefficients c = reference_coefficients();
  CHECK_NOTHROW(c.validate());
  CHECK(c.supports_memory_regime());
  c.kappa_l = -1.0;
  CHECK_THROWS_AS(c.validate(), ValidationError);
}
