#include <doctest.h>

#include "archopt/regimes.hpp"
#include "archopt/roofline.hpp"

using namespace archopt;

namespace {

HardwareSpec edge_hw() {
  HardwareSpec hw;
  hw.peak_flops = 1e13;
  hw.bandwidth_bytes_per_s = 5e10;
  hw.memory_budget_bytes = 4e9;
  return hw;
}

}  // namespace

TEST_CASE("budget normalization on the 10 TOPS / 50 GB/s / 4 GB example") {
  const HardwareSpec hw = edge_hw();
  WorkloadSpec wl{1, 1024, 10};
  LatencyTargets t;
  t.t_decode = 0.1;
  const Budgets b = normalize_budgets(hw, wl, t);
  REQUIRE(b.m_bar_d.has_value());
  CHECK(*b.m_bar_d == doctest::Approx(0.5e9).epsilon(1e-12));
  REQUIRE(b.eta().has_value());
  CHECK(*b.eta() == doctest::Approx(0.125).epsilon(1e-12));
  CHECK(!b.f_bar_p.has_value());

  const RegimeReport rep = classify_regime(b);
  CHECK(rep.label == RegimeLabel::memory_only);
  CHECK(rep.method == RegimeMethod::ratio_heuristic);
}

TEST_CASE("prefill budget normalization") {
  const HardwareSpec hw = edge_hw();
  WorkloadSpec wl{1, 1024, 16};
  LatencyTargets t;
  t.t_prefill = 0.2;
  const Budgets b = normalize_budgets(hw, wl, t);
  REQUIRE(b.f_bar_p.has_value());
  CHECK(*b.f_bar_p == doctest::Approx(0.2 * 1e13 / 1024.0).epsilon(1e-12));
}

TEST_CASE("a total target splits into phase targets that sum back") {
  const HardwareSpec hw = edge_hw();
  WorkloadSpec wl{1, 1024, 16};
  LatencyTargets t;
  t.t_total = 0.5;
  const Budgets b = normalize_budgets(hw, wl, t);
  REQUIRE(b.f_bar_p.has_value());
  REQUIRE(b.m_bar_d.has_value());
  const double t_pre = *b.f_bar_p * wl.batch * wl.seq_in / hw.peak_flops;
  const double t_dec = *b.m_bar_d * wl.seq_out / hw.bandwidth_bytes_per_s;
  CHECK(t_pre + t_dec == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("conflicting or empty targets are rejected") {
  const HardwareSpec hw = edge_hw();
  WorkloadSpec wl{1, 1024, 16};
  LatencyTargets both;
  both.t_total = 0.5;
  both.t_decode = 0.1;
  CHECK_THROWS_AS(normalize_budgets(hw, wl, both), ValidationError);
  // No targets at all is fine while a memory budget exists; it alone is used.
  const Budgets b = normalize_budgets(hw, wl, LatencyTargets{});
  CHECK(b.memory_budget.has_value());
  CHECK(classify_regime(b).label == RegimeLabel::memory_only);
}

TEST_CASE("constraint slacks are signed and relative") {
  const HardwareSpec hw = edge_hw();
  WorkloadSpec wl{1, 1024, 16};
  Budgets b;
  b.memory_budget = hw.memory_budget_bytes;
  const ArchitectureConfig small(4, 768, 4.0, 1.0, 4.0);
  const ArchitectureConfig huge(64, 8192, 8.0, 1.0, 1.0);
  const ConstraintSlacks s_ok = check_constraints(small, b, wl, hw);
  const ConstraintSlacks s_bad = check_constraints(huge, b, wl, hw);
  REQUIRE(s_ok.memory.has_value());
  CHECK(*s_ok.memory > 0.0);
  CHECK(*s_bad.memory < 0.0);
  CHECK(!s_ok.prefill.has_value());
  // The slack formula is (budget - used)/budget with used = memory_footprint.
  const double used = memory_footprint(small, hw);
  CHECK(*s_ok.memory ==
        doctest::Approx((hw.memory_budget_bytes - used) / hw.memory_budget_bytes)
            .epsilon(1e-14));
}

TEST_CASE("ratio heuristic thresholds") {
  Budgets b;
  b.memory_budget = 4e9;
  b.m_bar_d = 0.4e9;  // eta = 0.1 < 0.5
  CHECK(classify_regime(b).label == RegimeLabel::memory_only);
  b.m_bar_d = 12e9;  // eta = 3 > 2
  CHECK(classify_regime(b).label == RegimeLabel::decode_latency_only);
  b.m_bar_d = 4e9;  // eta = 1, between thresholds
  CHECK(classify_regime(b).label == RegimeLabel::decode_plus_memory);
  Budgets lat_only;
  lat_only.f_bar_p = 1e12;
  CHECK(classify_regime(lat_only).label == RegimeLabel::prefill_latency_only);
}
