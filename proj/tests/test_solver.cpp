#include <doctest.h>

#include <cmath>
#include <random>

#include "archopt/solver.hpp"

using namespace archopt;

namespace {

TheoryInputs base_inputs() {
  TheoryInputs in;
  in.coeffs = reference_coefficients();
  in.hardware.peak_flops = 1e13;
  in.hardware.bandwidth_bytes_per_s = 5e10;
  in.hardware.memory_budget_bytes = 4e9;
  in.workload = WorkloadSpec{1, 1024, 16};
  return in;
}

Budgets decode_budget(double m_bar_d, double memory) {
  Budgets b;
  b.m_bar_d = m_bar_d;
  b.memory_budget = memory;
  return b;
}

}  // namespace

TEST_CASE("case names round-trip") {
  for (Case c : {Case::d1, Case::d2, Case::d3, Case::p1, Case::p2, Case::p3}) {
    const auto back = case_from_name(case_name(c));
    REQUIRE(back.has_value());
    CHECK(*back == c);
  }
  CHECK(!case_from_name("q7").has_value());
}

TEST_CASE("latency-only optima sit at the sparsity floor") {
  TheoryInputs in = base_inputs();
  in.budgets = decode_budget(0.4e9, 1e12);  // memory effectively unbounded
  const OptimalSolution sol = solve_case(Case::d1, in);
  CHECK(sol.arch.activation_rate() == doctest::Approx(in.rho_min).epsilon(1e-12));
  CHECK(loss_gradient(sol.arch, in.coeffs).d_activation_rate > 0.0);
  CHECK(sol.regime == RegimeLabel::decode_latency_only);
  REQUIRE(sol.multipliers.mu_latency.has_value());
  CHECK(*sol.multipliers.mu_latency > 0.0);
  // The decode budget is saturated.
  REQUIRE(sol.slacks.decode.has_value());
  CHECK(std::abs(*sol.slacks.decode) < 1e-9);
}

TEST_CASE("memory-only solution and the width-sparsity slope") {
  TheoryInputs in = base_inputs();
  in.budgets.memory_budget = 4e9;
  const OptimalSolution d2 = solve_case(Case::d2, in);
  const OptimalSolution p2 = solve_case(Case::p2, in);
  // The memory case is phase-agnostic: both labels resolve to the same math.
  CHECK(d2.arch.width() == p2.arch.width());
  CHECK(d2.arch.layers() == p2.arch.layers());
  CHECK(d2.arch.activation_rate() == p2.arch.activation_rate());
  CHECK(d2.predicted_loss == p2.predicted_loss);
  REQUIRE(d2.slacks.memory.has_value());
  CHECK(std::abs(*d2.slacks.memory) < 1e-9);

  const ScalingLawCoefficients c = in.coeffs;
  const double want_slope = (c.beta_1 - c.beta_2) / c.alpha_rho;
  // log rho* is linear in log d with slope (beta_1 - beta_2)/alpha_rho.
  const double r1 = memory_optimal_rho_unclamped(c, 768.0);
  const double r2 = memory_optimal_rho_unclamped(c, 3072.0);
  const double slope = (std::log(r2) - std::log(r1)) / (std::log(3072.0) - std::log(768.0));
  CHECK(slope == doctest::Approx(want_slope).epsilon(1e-10));
  CHECK(want_slope == doctest::Approx(-1.193).epsilon(1e-3));
}

TEST_CASE("memory case requires alpha_rho > alpha_r") {
  TheoryInputs in = base_inputs();
  in.budgets.memory_budget = 4e9;
  in.coeffs.alpha_rho = 0.1;  // below alpha_r = 0.17
  CHECK_THROWS_AS(solve_case(Case::d2, in), InfeasibleError);
}

TEST_CASE("dual decode case matches its simplified zero-KV limit") {
  TheoryInputs in = base_inputs();
  in.hardware.bytes_kv = 1e-9;  // drives the KV correction term to ~0
  in.budgets = decode_budget(1.2e9, 4e9);
  const OptimalSolution sol = solve_case(Case::d3, in);
  REQUIRE(sol.slacks.decode.has_value());
  REQUIRE(sol.slacks.memory.has_value());
  CHECK(std::abs(*sol.slacks.decode) < 1e-8);
  CHECK(std::abs(*sol.slacks.memory) < 1e-8);
  // With delta -> 0: rho* -> 3 eta r / (alpha_attn (1 - eta) + 3 r).
  const double eta = 1.2e9 / 4e9;
  const double r = sol.arch.ffn_ratio();
  const double a_attn = 2.0 + 2.0 / sol.arch.gqa();
  const double want = 3.0 * eta * r / (a_attn * (1.0 - eta) + 3.0 * r);
  CHECK(sol.arch.activation_rate() == doctest::Approx(want).epsilon(1e-6));
}

TEST_CASE("prefill/memory dual case enforces its validity window") {
  TheoryInputs in = base_inputs();
  in.budgets.f_bar_p = 8e9;  // eta_p = 2, so eta_p * b_w = 4 >= 2
  in.budgets.memory_budget = 4e9;
  CHECK_THROWS_AS(solve_case(Case::p3, in), InfeasibleError);
  in.budgets.f_bar_p = 2e9;  // eta_p * b_w = 1 < 2
  const OptimalSolution sol = solve_case(Case::p3, in);
  CHECK(sol.regime == RegimeLabel::prefill_plus_memory);
  REQUIRE(sol.slacks.prefill.has_value());
  CHECK(std::abs(*sol.slacks.prefill) < 1e-8);
}

TEST_CASE("interior solutions satisfy stationarity") {
  TheoryInputs in = base_inputs();
  in.budgets = decode_budget(0.5e9, 1e12);
  const OptimalSolution sol = solve_case(Case::d1, in);
  for (const auto& [var, resid] : sol.stationarity) {
    INFO("variable ", var);
    CHECK(std::abs(resid) < 1e-6);
  }
}

TEST_CASE("auto dispatch follows the active-set classification") {
  TheoryInputs mem = base_inputs();
  mem.workload.seq_out = 10;
  // Decode budget far looser than memory: the memory constraint is the one
  // that binds at the optimum.
  mem.budgets = decode_budget(12e9, 4e9);
  const OptimalSolution sol = solve_auto(mem);
  CHECK(sol.case_id == Case::d2);
  CHECK(sol.regime == RegimeLabel::memory_only);
  const RegimeReport rep = classify_regime_active_set(mem);
  CHECK(rep.label == RegimeLabel::memory_only);
  CHECK(rep.method == RegimeMethod::active_set);

  TheoryInputs lat = base_inputs();
  lat.budgets = decode_budget(0.4e9, 1e12);
  CHECK(solve_auto(lat).case_id == Case::d1);

  TheoryInputs none = base_inputs();
  none.budgets = Budgets{};
  CHECK_THROWS_AS(solve_auto(none), InfeasibleError);
}

TEST_CASE("width policies agree where they should") {
  TheoryInputs in = base_inputs();
  in.budgets = decode_budget(0.5e9, 1e12);
  in.width_mode = WidthMode::fixed;
  in.fixed_width = 1024.0;
  const OptimalSolution fixed = solve_case(Case::d1, in);
  CHECK(fixed.arch.width() == 1024.0);

  in.width_mode = WidthMode::sweep;
  const OptimalSolution swept = solve_case(Case::d1, in);
  CHECK(swept.predicted_loss <= fixed.predicted_loss + 1e-12);

  in.width_mode = WidthMode::continuous;
  const OptimalSolution cont = solve_case(Case::d1, in);
  CHECK(cont.predicted_loss <= swept.predicted_loss + 1e-9);
}

TEST_CASE("oracle agrees with one closed-form solution") {
  TheoryInputs in = base_inputs();
  in.budgets = decode_budget(0.5e9, 1e12);
  in.width_mode = WidthMode::fixed;
  in.fixed_width = 1024.0;
  const OptimalSolution sol = solve_case(Case::d1, in);
  const OracleResult oracle = numerical_oracle(Case::d1, in);
  CHECK(oracle.evaluated > 0);
  CHECK(sol.predicted_loss <= oracle.loss * (1.0 + 1e-3));
}
