#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "archopt/loss.hpp"
#include "archopt/roofline.hpp"
#include "archopt/search_space.hpp"

namespace archopt {

enum class Objective { prefill, decode, total };

const char* objective_name(Objective o);
Objective objective_from_name(const std::string& name);

struct ParetoPoint {
  ArchitectureConfig arch;
  double loss = 0.0;     // nats
  double latency = 0.0;  // seconds, per the chosen objective
  double memory = 0.0;   // bytes
  Objective objective = Objective::decode;
  std::string precision;
};

// Weak dominance with at least one strict inequality, on (loss, latency).
bool dominates(const ParetoPoint& a, const ParetoPoint& b);

struct Frontier {
  std::vector<ParetoPoint> points;  // latency ascending, loss strictly decreasing
  std::vector<int> samples_per_round;
  int dominated_count = 0;
  int rounds = 0;
  double hypervolume = 0.0;
};

// Maximal non-dominated subset. At most one point is kept per exact
// (loss, latency) pair: smaller memory wins, then lexicographically smaller
// architecture.
Frontier build_frontier(std::vector<ParetoPoint> points);

// Area dominated by the frontier up to the reference point (2D hypervolume).
double frontier_hypervolume(const std::vector<ParetoPoint>& frontier, double ref_latency,
                            double ref_loss);

struct ParetoOptions {
  std::uint64_t seed = 0;
  int initial = 2000;   // Latin-hypercube seed size
  int gap_k = 8;        // samples per large frontier gap
  int max_rounds = 20;
  double hypervolume_tol = 1e-4;  // relative change stopping threshold
  bool enumerate = false;         // exhaustive evaluation (oracle mode)
  LatencyMode latency_mode = LatencyMode::dominant;
};

// Evaluates one grid configuration under the given objective.
ParetoPoint evaluate_point(const ArchitectureConfig& arch, const ScalingLawCoefficients& coeffs,
                           const HardwareSpec& hardware, const WorkloadSpec& workload,
                           Objective objective, const std::string& precision_tag,
                           LatencyMode mode = LatencyMode::dominant);

// Adaptive frontier search: Latin-hypercube seeding, then rounds of gap
// sampling, 1-step grid neighbors of frontier points, and exploration of
// not-yet-evaluated configurations, until the frontier stabilizes.
// Configurations violating the hardware memory budget are filtered out.
// Deterministic given the seed.
Frontier search_pareto(const SearchSpace& space, const ScalingLawCoefficients& coeffs,
                       const HardwareSpec& hardware, const WorkloadSpec& workload,
                       Objective objective, const PrecisionPreset& precision,
                       const ParetoOptions& options = {});

}  // namespace archopt
