#include <doctest.h>

#include <algorithm>
#include <random>
#include <vector>

#include "archopt/json_io.hpp"
#include "archopt/pareto.hpp"

using namespace archopt;

namespace {

HardwareSpec edge_hw() {
  HardwareSpec hw;
  hw.peak_flops = 1e13;
  hw.bandwidth_bytes_per_s = 5e10;
  hw.memory_budget_bytes = 4e9;
  return hw;
}

ParetoPoint pt(double loss, double latency, double memory = 1.0) {
  ParetoPoint p{ArchitectureConfig(4, 768, 4.0, 1.0, 1.0), loss, latency, memory,
                Objective::decode, "fp16"};
  return p;
}

// Quadratic-time reference frontier.
std::vector<ParetoPoint> brute_force_frontier(const std::vector<ParetoPoint>& pts) {
  std::vector<ParetoPoint> out;
  for (const auto& a : pts) {
    bool dominated = false;
    for (const auto& b : pts)
      if (dominates(b, a)) {
        dominated = true;
        break;
      }
    if (!dominated) out.push_back(a);
  }
  return out;
}

}  // namespace

TEST_CASE("dominance relation") {
  CHECK(dominates(pt(1.0, 1.0), pt(2.0, 2.0)));
  CHECK(dominates(pt(1.0, 1.0), pt(1.0, 2.0)));
  CHECK(dominates(pt(1.0, 1.0), pt(2.0, 1.0)));
  CHECK(!dominates(pt(1.0, 1.0), pt(1.0, 1.0)));  // needs one strict inequality
  CHECK(!dominates(pt(1.0, 2.0), pt(2.0, 1.0)));
  CHECK(!dominates(pt(2.0, 1.0), pt(1.0, 2.0)));
  ParetoPoint other = pt(0.5, 0.5);
  other.objective = Objective::prefill;
  CHECK_THROWS_AS(dominates(other, pt(1.0, 1.0)), ValidationError);
}

TEST_CASE("frontier equals the brute-force non-dominated set") {
  std::mt19937_64 rng(59);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<ParetoPoint> pts;
  for (int i = 0; i < 300; ++i) pts.push_back(pt(2.5 + u(rng), 0.01 + u(rng)));
  const Frontier f = build_frontier(pts);
  auto want = brute_force_frontier(pts);
  std::sort(want.begin(), want.end(),
            [](const ParetoPoint& a, const ParetoPoint& b) { return a.latency < b.latency; });
  REQUIRE(f.points.size() == want.size());
  for (std::size_t i = 0; i < want.size(); ++i) {
    CHECK(f.points[i].loss == want[i].loss);
    CHECK(f.points[i].latency == want[i].latency);
  }
  // Frontier invariant: latency ascending, loss strictly descending.
  for (std::size_t i = 1; i < f.points.size(); ++i) {
    CHECK(f.points[i].latency > f.points[i - 1].latency);
    CHECK(f.points[i].loss < f.points[i - 1].loss);
  }
}

TEST_CASE("duplicate (loss, latency) pairs keep the smaller memory") {
  std::vector<ParetoPoint> pts{pt(3.0, 0.5, 9.0), pt(3.0, 0.5, 2.0)};
  const Frontier f = build_frontier(pts);
  REQUIRE(f.points.size() == 1);
  CHECK(f.points[0].memory == 2.0);
}

TEST_CASE("hypervolume of a single point is the dominated rectangle") {
  const std::vector<ParetoPoint> one{pt(3.0, 0.5)};
  CHECK(frontier_hypervolume(one, 1.0, 4.0) == doctest::Approx(0.5 * 1.0).epsilon(1e-12));
  CHECK(frontier_hypervolume({}, 1.0, 4.0) == 0.0);
}

TEST_CASE("adaptive search reproduces exhaustive enumeration") {
  const SearchSpace space = default_search_space();
  const ScalingLawCoefficients c = reference_coefficients();
  const HardwareSpec hw = edge_hw();
  const WorkloadSpec wl{1, 1024, 16};

  ParetoOptions adaptive;
  adaptive.seed = 0;
  ParetoOptions exhaustive;
  exhaustive.enumerate = true;

  const Frontier a = search_pareto(space, c, hw, wl, Objective::decode, fp16_preset(), adaptive);
  const Frontier b =
      search_pareto(space, c, hw, wl, Objective::decode, fp16_preset(), exhaustive);
  REQUIRE(a.points.size() == b.points.size());
  for (std::size_t i = 0; i < a.points.size(); ++i) {
    CHECK(a.points[i].loss == b.points[i].loss);
    CHECK(a.points[i].latency == b.points[i].latency);
    CHECK(a.points[i].arch.width() == b.points[i].arch.width());
  }
}

TEST_CASE("same seed gives a byte-identical frontier CSV") {
  const SearchSpace space = default_search_space();
  const ScalingLawCoefficients c = reference_coefficients();
  const HardwareSpec hw = edge_hw();
  const WorkloadSpec wl{1, 1024, 16};
  ParetoOptions opt;
  opt.seed = 7;
  const Frontier a = search_pareto(space, c, hw, wl, Objective::total, int8_preset(), opt);
  const Frontier b = search_pareto(space, c, hw, wl, Objective::total, int8_preset(), opt);
  CHECK(frontier_to_csv(a) == frontier_to_csv(b));
  CHECK(a.hypervolume == b.hypervolume);
}

TEST_CASE("memory-infeasible configurations never appear") {
  const SearchSpace space = default_search_space();
  const ScalingLawCoefficients c = reference_coefficients();
  HardwareSpec hw = edge_hw();
  hw.memory_budget_bytes = 2e9;  // tight budget excludes the big sparse configs
  const WorkloadSpec wl{1, 1024, 16};
  ParetoOptions opt;
  opt.enumerate = true;
  const Frontier f = search_pareto(space, c, hw, wl, Objective::decode, fp16_preset(), opt);
  CHECK(!f.points.empty());
  for (const auto& p : f.points) CHECK(p.memory <= hw.memory_budget_bytes);
}

TEST_CASE("objective selects the latency that is ranked") {
  const ScalingLawCoefficients c = reference_coefficients();
  const HardwareSpec hw = edge_hw();
  const WorkloadSpec wl{1, 1024, 16};
  const ArchitectureConfig a(16, 1024, 4.0, 1.0, 4.0);
  const ParetoPoint pre = evaluate_point(a, c, hw, wl, Objective::prefill, "fp16");
  const ParetoPoint dec = evaluate_point(a, c, hw, wl, Objective::decode, "fp16");
  const ParetoPoint tot = evaluate_point(a, c, hw, wl, Objective::total, "fp16");
  CHECK(tot.latency == doctest::Approx(pre.latency + dec.latency).epsilon(1e-12));
  CHECK(pre.loss == dec.loss);
}
