#pragma once

#include <string>

#include "archopt/arch.hpp"

namespace archopt {

// The 11 fitted parameters of the parametric loss law
//   L = kappa_l/l^alpha_l + kappa_rho*rho^alpha_rho/(r^alpha_r d^beta_1)
//     + kappa_d/(r^alpha_r d^beta_2) + kappa_m/d_m^alpha_m + L_inf
// with d_m = d/gqa.
struct ScalingLawCoefficients {
  double kappa_l = 0.0;
  double kappa_rho = 0.0;
  double kappa_d = 0.0;
  double kappa_m = 0.0;
  double alpha_l = 0.0;
  double alpha_rho = 0.0;
  double alpha_r = 0.0;
  double alpha_m = 0.0;
  double beta_1 = 0.0;
  double beta_2 = 0.0;
  double L_inf = 0.0;

  std::string source;
  int fitted_on = 0;

  void validate() const;

  // The memory-constrained closed form for rho* needs alpha_rho > alpha_r.
  bool supports_memory_regime() const { return alpha_rho > alpha_r; }
};

// Built-in coefficient preset fitted on the 10B-token training sweep.
ScalingLawCoefficients reference_coefficients();

struct LossBreakdown {
  double depth_term = 0.0;
  double sparsity_term = 0.0;
  double capacity_term = 0.0;
  double kv_term = 0.0;
  double irreducible = 0.0;
  double total() const {
    return depth_term + sparsity_term + capacity_term + kv_term + irreducible;
  }
};

double predict_loss(const ArchitectureConfig& arch, const ScalingLawCoefficients& coeffs);
LossBreakdown predict_loss_breakdown(const ArchitectureConfig& arch,
                                     const ScalingLawCoefficients& coeffs);

// Analytic gradient of the predicted loss with respect to (l, d, r, gqa, rho).
struct LossGradient {
  double d_layers = 0.0;
  double d_width = 0.0;
  double d_ffn_ratio = 0.0;
  double d_gqa = 0.0;
  double d_activation_rate = 0.0;
};

LossGradient loss_gradient(const ArchitectureConfig& arch, const ScalingLawCoefficients& coeffs);

// Aggregate loss gradient shorthand D~ = kappa_rho*rho^alpha_rho*d^(beta_2-beta_1) + kappa_d.
double aggregate_loss_gradient(const ScalingLawCoefficients& coeffs, double rho, double width);

}  // namespace archopt
