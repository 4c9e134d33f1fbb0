#include "archopt/fit.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

namespace archopt {

namespace {

constexpr int kNumParams = 11;

// Parameter layout: [0..3] log kappas, [4..7] alpha exponents, [8..9] betas, [10] L_inf.
struct Bounds {
  std::array<double, kNumParams> lo;
  std::array<double, kNumParams> hi;
};

Bounds parameter_bounds() {
  Bounds b;
  for (int i = 0; i < 4; ++i) {
    b.lo[i] = std::log(1e-8);
    b.hi[i] = std::log(1e8);
  }
  for (int i = 4; i < 10; ++i) {
    b.lo[i] = -3.0;
    b.hi[i] = 3.0;
  }
  b.lo[10] = 0.0;
  b.hi[10] = 10.0;
  return b;
}

using ParamVec = Eigen::Matrix<double, kNumParams, 1>;

ParamVec clamp_to_bounds(ParamVec p, const Bounds& b) {
  for (int i = 0; i < kNumParams; ++i) p[i] = std::clamp(p[i], b.lo[i], b.hi[i]);
  return p;
}

ScalingLawCoefficients to_coeffs(const ParamVec& p) {
  ScalingLawCoefficients c;
  c.kappa_l = std::exp(p[0]);
  c.kappa_rho = std::exp(p[1]);
  c.kappa_d = std::exp(p[2]);
  c.kappa_m = std::exp(p[3]);
  c.alpha_l = p[4];
  c.alpha_rho = p[5];
  c.alpha_r = p[6];
  c.alpha_m = p[7];
  c.beta_1 = p[8];
  c.beta_2 = p[9];
  c.L_inf = p[10];
  return c;
}

ParamVec from_coeffs(const ScalingLawCoefficients& c) {
  ParamVec p;
  p << std::log(c.kappa_l), std::log(c.kappa_rho), std::log(c.kappa_d), std::log(c.kappa_m),
      c.alpha_l, c.alpha_rho, c.alpha_r, c.alpha_m, c.beta_1, c.beta_2, c.L_inf;
  return p;
}

Eigen::VectorXd residuals_at(const ParamVec& p, const std::vector<TrainingRunRecord>& recs) {
  const ScalingLawCoefficients c = to_coeffs(p);
  Eigen::VectorXd r(static_cast<Eigen::Index>(recs.size()));
  for (std::size_t i = 0; i < recs.size(); ++i)
    r[static_cast<Eigen::Index>(i)] = predict_loss(recs[i].arch, c) - recs[i].observed_loss;
  return r;
}

Eigen::MatrixXd numerical_jacobian(const ParamVec& p, const std::vector<TrainingRunRecord>& recs,
                                   const Bounds& bounds) {
  Eigen::MatrixXd jac(static_cast<Eigen::Index>(recs.size()), kNumParams);
  for (int j = 0; j < kNumParams; ++j) {
    const double h = 1e-6 * std::max(1.0, std::abs(p[j]));
    ParamVec hi = p, lo = p;
    hi[j] = std::min(p[j] + h, bounds.hi[j]);
    lo[j] = std::max(p[j] - h, bounds.lo[j]);
    const double span = hi[j] - lo[j];
    jac.col(j) = (residuals_at(hi, recs) - residuals_at(lo, recs)) / span;
  }
  return jac;
}

struct LocalFit {
  ParamVec p;
  double sse = 0.0;
  int iterations = 0;
  bool converged = false;
};

LocalFit levenberg_marquardt(ParamVec p, const std::vector<TrainingRunRecord>& recs,
                             const FitOptions& opt, const Bounds& bounds) {
  p = clamp_to_bounds(p, bounds);
  Eigen::VectorXd res = residuals_at(p, recs);
  double sse = res.squaredNorm();
  double lambda = 1e-3;
  LocalFit out{p, sse, 0, false};

  for (int iter = 0; iter < opt.max_iterations; ++iter) {
    out.iterations = iter + 1;
    const Eigen::MatrixXd jac = numerical_jacobian(p, recs, bounds);
    const Eigen::MatrixXd jtj = jac.transpose() * jac;
    const Eigen::VectorXd jtr = jac.transpose() * res;

    bool accepted = false;
    for (int inner = 0; inner < 25 && !accepted; ++inner) {
      Eigen::MatrixXd damped = jtj;
      damped.diagonal() += lambda * jtj.diagonal().cwiseMax(1e-12);
      const ParamVec step = damped.ldlt().solve(-jtr);
      const ParamVec trial = clamp_to_bounds(p + step, bounds);
      const Eigen::VectorXd trial_res = residuals_at(trial, recs);
      const double trial_sse = trial_res.squaredNorm();
      if (std::isfinite(trial_sse) && trial_sse <= sse) {
        const double rel_drop = (sse - trial_sse) / std::max(sse, 1e-300);
        p = trial;
        res = trial_res;
        sse = trial_sse;
        lambda = std::max(lambda / 3.0, 1e-12);
        accepted = true;
        if (rel_drop < opt.sse_tolerance) {
          out.p = p;
          out.sse = sse;
          out.converged = true;
          return out;
        }
      } else {
        lambda *= 10.0;
      }
    }
    if (!accepted) {
      // No productive step at any damping level: treat as converged to a
      // stationary point of the damped model.
      out.p = p;
      out.sse = sse;
      out.converged = true;
      return out;
    }
  }
  out.p = p;
  out.sse = sse;
  return out;
}

double r_squared(const ScalingLawCoefficients& c, const std::vector<TrainingRunRecord>& recs) {
  if (recs.empty()) return 0.0;
  double mean = 0.0;
  for (const auto& rec : recs) mean += rec.observed_loss;
  mean /= static_cast<double>(recs.size());
  double sse = 0.0, sst = 0.0;
  for (const auto& rec : recs) {
    const double e = predict_loss(rec.arch, c) - rec.observed_loss;
    sse += e * e;
    const double t = rec.observed_loss - mean;
    sst += t * t;
  }
  if (sst <= 0.0) return sse <= 0.0 ? 1.0 : 0.0;
  return 1.0 - sse / sst;
}

void check_dataset(const std::vector<TrainingRunRecord>& records) {
  if (records.size() < 12)
    throw ValidationError("insufficient data: need at least 12 training records");
  std::set<double> depths, widths, rhos, ratios, gqas;
  for (const auto& rec : records) {
    if (!(rec.observed_loss > 0.0)) throw ValidationError("observed_loss must be > 0");
    depths.insert(rec.arch.layers());
    widths.insert(rec.arch.width());
    rhos.insert(rec.arch.activation_rate());
    ratios.insert(rec.arch.ffn_ratio());
    gqas.insert(rec.arch.gqa());
  }
  if (depths.size() < 2) throw ValidationError("insufficient data: need >= 2 distinct depths");
  if (widths.size() < 2) throw ValidationError("insufficient data: need >= 2 distinct widths");
  if (rhos.size() < 2 && ratios.size() < 2 && gqas.size() < 2)
    throw ValidationError(
        "insufficient data: need >= 2 distinct values in one of activation_rate, ffn_ratio, gqa");
}

}  // namespace

FitResult fit_scaling_law(const std::vector<TrainingRunRecord>& records, const FitOptions& opt) {
  check_dataset(records);
  const Bounds bounds = parameter_bounds();

  // Deterministic holdout split.
  std::vector<std::size_t> order(records.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(opt.seed ^ 0x9e3779b97f4a7c15ull);
  std::shuffle(order.begin(), order.end(), rng);
  const auto n_holdout = static_cast<std::size_t>(
      std::llround(opt.holdout_fraction * static_cast<double>(records.size())));
  std::vector<TrainingRunRecord> holdout, train;
  for (std::size_t i = 0; i < order.size(); ++i)
    (i < n_holdout ? holdout : train).push_back(records[order[i]]);
  if (train.size() < 12)
    throw ValidationError("insufficient data: fewer than 12 records after holdout split");

  // Multi-start initializations: reference preset first, then Latin-hypercube
  // draws over the bound box.
  std::vector<ParamVec> starts;
  starts.push_back(clamp_to_bounds(from_coeffs(reference_coefficients()), bounds));
  const int n_random = std::max(0, opt.multistarts - 1);
  std::mt19937_64 start_rng(opt.seed);
  std::array<std::vector<int>, kNumParams> strata;
  for (int j = 0; j < kNumParams; ++j) {
    strata[j].resize(static_cast<std::size_t>(n_random));
    std::iota(strata[j].begin(), strata[j].end(), 0);
    std::shuffle(strata[j].begin(), strata[j].end(), start_rng);
  }
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int s = 0; s < n_random; ++s) {
    ParamVec p;
    for (int j = 0; j < kNumParams; ++j) {
      const double u = (strata[j][static_cast<std::size_t>(s)] + unit(start_rng)) / n_random;
      // Draw kappas from a narrower box than the hard bounds; extreme kappas
      // produce degenerate residuals that stall the optimizer immediately.
      double lo = bounds.lo[j], hi = bounds.hi[j];
      if (j < 4) {
        lo = std::log(1e-3);
        hi = std::log(1e3);
      }
      p[j] = lo + u * (hi - lo);
    }
    starts.push_back(p);
  }

  LocalFit best;
  best.sse = std::numeric_limits<double>::infinity();
  int best_start = -1;
  for (std::size_t s = 0; s < starts.size(); ++s) {
    const LocalFit fit = levenberg_marquardt(starts[s], train, opt, bounds);
    if (fit.sse < best.sse) {
      best = fit;
      best_start = static_cast<int>(s);
    }
  }

  const ScalingLawCoefficients coeffs_raw = to_coeffs(best.p);
  if (!std::isfinite(best.sse)) {
    std::ostringstream msg;
    msg << "fit did not converge; best SSE=" << best.sse;
    throw ConvergenceError(msg.str());
  }

  ScalingLawCoefficients coeffs = coeffs_raw;
  coeffs.source = "fit";
  coeffs.fitted_on = static_cast<int>(train.size());

  FitReport report;
  report.sse = best.sse;
  report.iterations = best.iterations;
  report.best_start = best_start;
  report.converged = best.converged;
  report.n_train = static_cast<int>(train.size());
  report.n_holdout = static_cast<int>(holdout.size());
  report.train_r2 = r_squared(coeffs, train);
  if (!holdout.empty()) {
    report.has_validation = true;
    report.validation_r2 = r_squared(coeffs, holdout);
  }
  const Eigen::VectorXd res = residuals_at(best.p, train);
  report.residuals.assign(res.data(), res.data() + res.size());
  return FitResult{coeffs, report};
}

}  // namespace archopt
