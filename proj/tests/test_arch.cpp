#include <doctest.h>

#include <cmath>
#include <random>

#include "archopt/arch.hpp"

using namespace archopt;

namespace {

ArchitectureConfig random_arch(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double l = 1.0 + 63.0 * u(rng);
  const double d = 256.0 + 7936.0 * u(rng);
  const double r = 0.1 + 12.0 * u(rng);
  const double rho = 0.03 + 0.97 * u(rng);
  const double gqa = 1.0 + 31.0 * u(rng);
  return ArchitectureConfig(l, d, r, rho, gqa);
}

// Central finite difference in one coordinate of (l, d, r, rho, gqa).
template <typename F>
double fd(F f, double x, double h) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

}  // namespace

TEST_CASE("cost coefficient identities") {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 10000; ++i) {
    const ArchitectureConfig a = random_arch(rng);
    CHECK(xi_flops(a) == doctest::Approx(2.0 * xi_weights_decode(a)).epsilon(1e-14));
    const ArchitectureConfig dense(a.layers(), a.width(), a.ffn_ratio(), 1.0, a.gqa());
    CHECK(xi_weights_all(dense) == xi_weights_decode(dense));
    CHECK(xi_weights_all(a) >= xi_weights_decode(a));
    CHECK(attn_coefficient(a) == doctest::Approx(2.0 + 2.0 / a.gqa()).epsilon(1e-15));
  }
}

TEST_CASE("kv correction and effective decode coefficient") {
  HardwareSpec hw;
  hw.peak_flops = 1e13;
  hw.bandwidth_bytes_per_s = 5e10;
  hw.memory_budget_bytes = 4e9;
  WorkloadSpec wl{1, 1024, 16};
  const ArchitectureConfig a(16, 1024, 4.0, 1.0, 1.0);
  const double s_bar = 1024.0 + 17.0 / 2.0;
  CHECK(wl.average_context() == doctest::Approx(s_bar).epsilon(1e-15));
  const double delta = 2.0 * s_bar * hw.bytes_kv / (a.gqa() * a.width() * hw.bytes_weight);
  CHECK(kv_correction(a, wl, hw) == doctest::Approx(delta).epsilon(1e-14));
  CHECK(xi_weights_effective(a, wl, hw) ==
        doctest::Approx(xi_weights_decode(a) + delta).epsilon(1e-14));
}

TEST_CASE("average context equals the mean decode context length") {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> s_in(0, 8192), s_out(1, 1024);
  for (int i = 0; i < 50; ++i) {
    WorkloadSpec wl{1, s_in(rng), s_out(rng)};
    double sum = 0.0;
    for (int t = 1; t <= wl.seq_out; ++t) sum += wl.seq_in + t;
    CHECK(wl.average_context() == doctest::Approx(sum / wl.seq_out).epsilon(1e-14));
  }
}

TEST_CASE("analytic coefficient partials match finite differences") {
  std::mt19937_64 rng(23);
  HardwareSpec hw;
  hw.peak_flops = 1e13;
  hw.bandwidth_bytes_per_s = 5e10;
  hw.memory_budget_bytes = 4e9;
  WorkloadSpec wl{1, 1024, 16};

  for (int i = 0; i < 100; ++i) {
    const ArchitectureConfig a = random_arch(rng);
    const CoefficientPartials p = coefficient_partials(a, wl, hw);
    const double l = a.layers(), d = a.width(), r = a.ffn_ratio();
    const double rho = a.activation_rate(), gqa = a.gqa();
    auto at = [&](double dd, double rr, double rrho, double ggqa) {
      return ArchitectureConfig(l, dd, rr, rrho, ggqa);
    };
    const double hr = r * 1e-5, hg = gqa * 1e-5, hrho = rho * 1e-5, hd = d * 1e-5;

    auto rel = [](double got, double want) {
      return std::abs(got - want) / std::max(std::abs(want), 1e-12);
    };
    CHECK(rel(p.dxiF_dr, fd([&](double x) { return xi_flops(at(d, x, rho, gqa)); }, r, hr)) <
          1e-6);
    CHECK(rel(p.dxiF_dgqa,
              fd([&](double x) { return xi_flops(at(d, r, rho, x)); }, gqa, hg)) < 1e-6);
    CHECK(rel(p.dxiWdec_dr,
              fd([&](double x) { return xi_weights_decode(at(d, x, rho, gqa)); }, r, hr)) < 1e-6);
    CHECK(rel(p.dxiWdec_dgqa,
              fd([&](double x) { return xi_weights_decode(at(d, r, rho, x)); }, gqa, hg)) < 1e-6);
    CHECK(rel(p.dxiWall_dr,
              fd([&](double x) { return xi_weights_all(at(d, x, rho, gqa)); }, r, hr)) < 1e-6);
    CHECK(rel(p.dxiWall_dgqa,
              fd([&](double x) { return xi_weights_all(at(d, r, rho, x)); }, gqa, hg)) < 1e-6);
    CHECK(rel(p.dxiWall_drho,
              fd([&](double x) { return xi_weights_all(at(d, r, x, gqa)); }, rho, hrho)) < 1e-6);
    CHECK(rel(p.dxiWeff_dr, fd([&](double x) { return xi_weights_effective(at(d, x, rho, gqa),
                                                                           wl, hw); },
                               r, hr)) < 1e-6);
    CHECK(rel(p.dxiWeff_dgqa,
              fd([&](double x) { return xi_weights_effective(at(d, r, rho, x), wl, hw); }, gqa,
                 hg)) < 1e-6);
    CHECK(rel(p.dxiWeff_dd,
              fd([&](double x) { return xi_weights_effective(at(x, r, rho, gqa), wl, hw); }, d,
                 hd)) < 1e-6);
  }
}

TEST_CASE("architecture invariants are enforced at construction") {
  CHECK_THROWS_AS(ArchitectureConfig(16, 1024, 4.0, 0.0, 1.0), ValidationError);
  CHECK_THROWS_AS(ArchitectureConfig(16, 1024, 4.0, 1.5, 1.0), ValidationError);
  CHECK_THROWS_AS(ArchitectureConfig(0, 1024, 4.0, 1.0, 1.0), ValidationError);
  CHECK_THROWS_AS(ArchitectureConfig(16, -5, 4.0, 1.0, 1.0), ValidationError);
  CHECK_THROWS_AS(ArchitectureConfig(16, 1024, 4.0, 1.0, 0.5), ValidationError);
  const ArchitectureConfig ok = ArchitectureConfig::discrete(16, 1024, 4, 64, 8, 2, 4.0);
  CHECK(ok.gqa() == doctest::Approx(4.0));
  CHECK(ok.activation_rate() == doctest::Approx(0.25));
  CHECK(ok.kv_width() == doctest::Approx(256.0));
}
