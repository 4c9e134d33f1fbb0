#include <doctest.h>

#include <random>
#include <vector>

#include "archopt/fit.hpp"
#include "archopt/search_space.hpp"

using namespace archopt;

namespace {

// Deterministic subsample of the default grid with synthetic losses.
std::vector<TrainingRunRecord> synthetic_records(int n, double noise_sigma, std::uint64_t seed) {
  const SearchSpace space = default_search_space();
  const std::size_t stride = space.size() / static_cast<std::size_t>(n);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, noise_sigma);
  const ScalingLawCoefficients truth = reference_coefficients();
  std::vector<TrainingRunRecord> records;
  for (int i = 0; i < n; ++i) {
    const ArchitectureConfig arch = space.at(static_cast<std::size_t>(i) * stride);
    double loss = predict_loss(arch, truth);
    if (noise_sigma > 0.0) loss += noise(rng);
    records.push_back({arch, loss});
  }
  return records;
}

}  // namespace

TEST_CASE("noiseless synthetic data is recovered essentially exactly") {
  const auto records = synthetic_records(60, 0.0, 1);
  FitOptions opt;
  opt.holdout_fraction = 0.0;
  opt.multistarts = 1;  // the reference start alone must nail noiseless data
  const FitResult result = fit_scaling_law(records, opt);
  CHECK(result.report.sse < 1e-10);
  CHECK(result.report.train_r2 > 0.999999);
  CHECK(!result.report.has_validation);
  CHECK(result.coeffs.source == "fit");
  CHECK(result.coeffs.fitted_on == 60);
}

TEST_CASE("noisy synthetic data generalizes to the holdout split") {
  const auto records = synthetic_records(120, 0.01, 2);
  FitOptions opt;
  opt.multistarts = 4;
  const FitResult result = fit_scaling_law(records, opt);
  CHECK(result.report.has_validation);
  CHECK(result.report.validation_r2 > 0.95);
  CHECK(result.report.n_train + result.report.n_holdout == 120);
}

TEST_CASE("fit is deterministic given the seed") {
  const auto records = synthetic_records(60, 0.01, 3);
  FitOptions opt;
  opt.multistarts = 3;
  const FitResult a = fit_scaling_law(records, opt);
  const FitResult b = fit_scaling_law(records, opt);
  CHECK(a.coeffs.kappa_l == b.coeffs.kappa_l);
  CHECK(a.coeffs.alpha_l == b.coeffs.alpha_l);
  CHECK(a.report.sse == b.report.sse);
}

TEST_CASE("degenerate datasets are rejected") {
  auto records = synthetic_records(60, 0.0, 4);
  records.erase(records.begin() + 11, records.end());
  CHECK_THROWS_AS(fit_scaling_law(records), ValidationError);

  // All rows identical in every swept axis.
  std::vector<TrainingRunRecord> flat;
  for (int i = 0; i < 20; ++i)
    flat.push_back({ArchitectureConfig(16, 1024, 4.0, 1.0, 1.0), 3.5});
  CHECK_THROWS_AS(fit_scaling_law(flat), ValidationError);
}
