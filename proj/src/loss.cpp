#include "archopt/loss.hpp"

#include <cmath>

namespace archopt {

void ScalingLawCoefficients::validate() const {
  auto pos = [](double x) { return std::isfinite(x) && x > 0.0; };
  if (!pos(kappa_l) || !pos(kappa_rho) || !pos(kappa_d) || !pos(kappa_m))
    throw ValidationError("kappa coefficients must be > 0");
  if (!std::isfinite(L_inf) || L_inf < 0.0) throw ValidationError("L_inf must be >= 0");
  for (double e : {alpha_l, alpha_rho, alpha_r, alpha_m, beta_1, beta_2})
    if (!std::isfinite(e)) throw ValidationError("exponents must be finite");
}

ScalingLawCoefficients reference_coefficients() {
  ScalingLawCoefficients c;
  c.kappa_l = 9.96;
  c.alpha_l = 1.63;
  c.kappa_rho = 0.031;
  c.alpha_rho = 1.09;
  c.beta_1 = -0.33;
  c.kappa_d = 500.0;
  c.beta_2 = 0.97;
  c.alpha_r = 0.17;
  c.kappa_m = 0.20;
  c.alpha_m = 0.05;
  c.L_inf = 2.53;
  c.source = "reference";
  c.fitted_on = 170;
  return c;
}

LossBreakdown predict_loss_breakdown(const ArchitectureConfig& arch,
                                     const ScalingLawCoefficients& coeffs) {
  const double l = arch.layers();
  const double d = arch.width();
  const double r = arch.ffn_ratio();
  const double rho = arch.activation_rate();
  const double d_m = arch.kv_width();
  if (r <= 0.0) throw ValidationError("predict_loss requires ffn_ratio > 0");

  LossBreakdown b;
  b.depth_term = coeffs.kappa_l / std::pow(l, coeffs.alpha_l);
  b.sparsity_term = coeffs.kappa_rho * std::pow(rho, coeffs.alpha_rho) /
                    (std::pow(r, coeffs.alpha_r) * std::pow(d, coeffs.beta_1));
  b.capacity_term = coeffs.kappa_d / (std::pow(r, coeffs.alpha_r) * std::pow(d, coeffs.beta_2));
  b.kv_term = coeffs.kappa_m / std::pow(d_m, coeffs.alpha_m);
  b.irreducible = coeffs.L_inf;
  return b;
}

double predict_loss(const ArchitectureConfig& arch, const ScalingLawCoefficients& coeffs) {
  return predict_loss_breakdown(arch, coeffs).total();
}

double aggregate_loss_gradient(const ScalingLawCoefficients& coeffs, double rho, double width) {
  return coeffs.kappa_rho * std::pow(rho, coeffs.alpha_rho) *
             std::pow(width, coeffs.beta_2 - coeffs.beta_1) +
         coeffs.kappa_d;
}

LossGradient loss_gradient(const ArchitectureConfig& arch, const ScalingLawCoefficients& c) {
  const double l = arch.layers();
  const double d = arch.width();
  const double r = arch.ffn_ratio();
  const double rho = arch.activation_rate();
  const double gqa = arch.gqa();

  const double r_pow = std::pow(r, c.alpha_r);
  const double rho_pow = std::pow(rho, c.alpha_rho);

  LossGradient g;
  g.d_layers = -c.alpha_l * c.kappa_l / std::pow(l, c.alpha_l + 1.0);
  g.d_activation_rate =
      c.alpha_rho * c.kappa_rho * std::pow(rho, c.alpha_rho - 1.0) /
      (r_pow * std::pow(d, c.beta_1));
  g.d_ffn_ratio = -c.alpha_r * aggregate_loss_gradient(c, rho, d) /
                  (std::pow(r, c.alpha_r + 1.0) * std::pow(d, c.beta_2));
  // kv term written as kappa_m * gqa^alpha_m / d^alpha_m.
  g.d_gqa = c.alpha_m * c.kappa_m * std::pow(gqa, c.alpha_m - 1.0) / std::pow(d, c.alpha_m);
  g.d_width = -c.beta_1 * c.kappa_rho * rho_pow / (r_pow * std::pow(d, c.beta_1 + 1.0)) -
              c.beta_2 * c.kappa_d / (r_pow * std::pow(d, c.beta_2 + 1.0)) -
              c.alpha_m * c.kappa_m * std::pow(gqa, c.alpha_m) / std::pow(d, c.alpha_m + 1.0);
  return g;
}

}  // namespace archopt
