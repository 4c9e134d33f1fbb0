#pragma once

#include <cstdint>
#include <vector>

#include "archopt/loss.hpp"

namespace archopt {

struct TrainingRunRecord {
  ArchitectureConfig arch;
  double observed_loss = 0.0;
};

struct FitOptions {
  std::uint64_t seed = 0;
  double holdout_fraction = 0.2;  // 0 disables the validation split
  int multistarts = 16;
  int max_iterations = 500;
  double sse_tolerance = 1e-12;  // relative SSE decrease
};

struct FitReport {
  double train_r2 = 0.0;
  bool has_validation = false;
  double validation_r2 = 0.0;
  double sse = 0.0;
  int iterations = 0;
  int best_start = 0;
  bool converged = false;
  int n_train = 0;
  int n_holdout = 0;
  std::vector<double> residuals;  // training residuals at the solution
};

struct FitResult {
  ScalingLawCoefficients coeffs;
  FitReport report;
};

// Nonlinear least-squares fit of the 11 loss-law parameters.
// Levenberg-Marquardt over log-parameterized kappas with bounded exponents,
// 16 deterministic multi-starts (reference preset + Latin-hypercube draws).
// Throws ValidationError when the dataset cannot identify the model and
// ConvergenceError (carrying the best iterate in the message) on stall.
FitResult fit_scaling_law(const std::vector<TrainingRunRecord>& records,
                          const FitOptions& options = {});

}  // namespace archopt
