#pragma once

#include <map>
#include <optional>
#include <vector>

#include "archopt/loss.hpp"
#include "archopt/regimes.hpp"

namespace archopt {

// Constraint cases: D = decode-phase, P = prefill-phase;
// 1 = latency-only, 2 = memory-only, 3 = latency + memory (dual).
enum class Case { d1, d2, d3, p1, p2, p3 };

const char* case_name(Case c);
std::optional<Case> case_from_name(const std::string& name);

struct BoundsBox {
  double l_min = 1.0, l_max = 256.0;
  double d_min = 256.0, d_max = 8192.0;
  double r_min = 0.05, r_max = 16.0;
  double gqa_min = 1.0, gqa_max = 64.0;
};

enum class WidthMode { sweep, fixed, continuous };

struct TheoryInputs {
  ScalingLawCoefficients coeffs;
  Budgets budgets;
  HardwareSpec hardware;
  WorkloadSpec workload;
  double rho_min = 1.0 / 16.0;  // largest expert pool in the default grid
  BoundsBox bounds;
  WidthMode width_mode = WidthMode::sweep;
  double fixed_width = 1024.0;
  std::vector<double> width_grid;  // empty => default grid

  void validate() const;
};

std::vector<double> default_width_grid();

struct Multipliers {
  std::optional<double> mu_latency;  // mu_T
  std::optional<double> mu_memory;   // mu_M
};

struct OptimalSolution {
  ArchitectureConfig arch;
  Case case_id;
  RegimeLabel regime = RegimeLabel::unconstrained;
  double predicted_loss = 0.0;
  Multipliers multipliers;
  // Stationarity residual per free variable, normalized by the loss-gradient
  // norm; variables at a bound are excluded.
  std::map<std::string, double> stationarity;
  ConstraintSlacks slacks;  // relative; active constraints should be ~0
  int fixed_point_iters = 0;
  std::vector<std::string> clamped;  // variables clipped to the bounds box
};

// Solves one constraint case at the inputs' width policy. Width is swept over
// the grid (or optimized by golden section / held fixed) and the remaining
// variables come from the case's stationarity conditions, with the implicit
// xi coupling resolved by damped fixed point (single-constraint cases) or a
// multi-start Newton solve on the (r, gqa) residuals (dual cases).
OptimalSolution solve_case(Case c, const TheoryInputs& inputs);

// Classifies the regime via the active-set test and dispatches to the
// matching case.
OptimalSolution solve_auto(const TheoryInputs& inputs);

// Authoritative regime classification: solve each single-constraint case and
// test the omitted constraint's slack.
RegimeReport classify_regime_active_set(const TheoryInputs& inputs);

// Memory-constrained activation rate before clamping to [rho_min, 1];
// exposed for the width-sparsity slope diagnostics.
double memory_optimal_rho_unclamped(const ScalingLawCoefficients& coeffs, double width);

struct OracleResult {
  ArchitectureConfig arch;
  double loss = 0.0;
  int evaluated = 0;
};

struct OracleOptions {
  int points_per_axis = 17;
  int refine_rounds = 3;
  double shrink = 4.0;
};

// Brute-force verification oracle: constrained grid minimization of the loss
// over the bounds box with the case's equality constraints enforced by
// construction (depth saturates the active budget; dual cases derive rho from
// constraint compatibility), followed by local grid refinement. Deterministic.
OracleResult numerical_oracle(Case c, const TheoryInputs& inputs,
                              const OracleOptions& options = {});

}  // namespace archopt
