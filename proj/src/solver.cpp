#include "archopt/solver.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

namespace archopt {

namespace {

constexpr double kFixedPointTol = 1e-10;
constexpr int kFixedPointCap = 10000;
constexpr double kDamping = 0.5;

struct Point {
  double l = 0.0, d = 0.0, r = 0.0, gqa = 0.0, rho = 0.0;
};

ArchitectureConfig to_arch(const Point& p) {
  return ArchitectureConfig(p.l, p.d, p.r, p.rho, p.gqa);
}

double loss_at(const Point& p, const ScalingLawCoefficients& c) {
  return predict_loss(to_arch(p), c);
}

bool lex_less(const Point& a, const Point& b) {
  const std::array<double, 5> ta{a.l, a.d, a.r, a.gqa, a.rho};
  const std::array<double, 5> tb{b.l, b.d, b.r, b.gqa, b.rho};
  return ta < tb;
}

double require_budget(const std::optional<double>& budget, const char* what) {
  if (!budget) throw InfeasibleError(std::string("case requires a ") + what + " budget");
  return *budget;
}

// Decode latency constraint coefficient Gamma = xi_W^dec*d^2*b_w + 2*S_bar*d*b_kv/gqa.
double gamma_of(double d, double r, double gqa, double s_bar, const HardwareSpec& hw) {
  return (2.0 + 2.0 / gqa + 3.0 * r) * d * d * hw.bytes_weight +
         2.0 * s_bar * d * hw.bytes_kv / gqa;
}

struct WidthSolution {
  Point p;
  Multipliers mu;
  int iters = 0;
  std::vector<std::string> clamped;
  bool converged = true;
};

void clamp_var(double& x, double lo, double hi) { x = std::clamp(x, lo, hi); }

void record_depth_clamp(WidthSolution& ws, const BoundsBox& box) {
  if (ws.p.l < box.l_min || ws.p.l > box.l_max) {
    ws.clamped.push_back("layers");
    clamp_var(ws.p.l, box.l_min, box.l_max);
  }
}

// --- Single-constraint cases: damped fixed point over (r, gqa). ---

WidthSolution solve_d1_width(double d, const TheoryInputs& in) {
  const auto& c = in.coeffs;
  const double m_bar = require_budget(in.budgets.m_bar_d, "decode latency");
  const double s_bar = in.workload.average_context();
  const double bw = in.hardware.bytes_weight;
  const double bkv = in.hardware.bytes_kv;
  const double rho = in.rho_min;
  const double dt = aggregate_loss_gradient(c, rho, d);

  WidthSolution ws;
  double r = std::clamp(4.0, in.bounds.r_min, in.bounds.r_max);
  double gqa = std::clamp(4.0, in.bounds.gqa_min, in.bounds.gqa_max);
  int iters = 0;
  bool converged = false;
  for (; iters < kFixedPointCap; ++iters) {
    const double gamma = gamma_of(d, r, gqa, s_bar, in.hardware);
    // mu_T * l from the depth stationarity with l saturating the constraint.
    const double mul = c.alpha_l * c.kappa_l * std::pow(gamma, c.alpha_l - 1.0) /
                       std::pow(m_bar, c.alpha_l);
    const double r_t = std::pow(
        c.alpha_r * dt / (3.0 * mul * std::pow(d, c.beta_2 + 2.0) * bw), 1.0 / (c.alpha_r + 1.0));
    const double gqa_t =
        std::pow(2.0 * mul * std::pow(d, c.alpha_m) * (d * d * bw + s_bar * d * bkv) /
                     (c.alpha_m * c.kappa_m),
                 1.0 / (c.alpha_m + 1.0));
    double r_new = (1.0 - kDamping) * r + kDamping * r_t;
    double gqa_new = (1.0 - kDamping) * gqa + kDamping * gqa_t;
    clamp_var(r_new, in.bounds.r_min, in.bounds.r_max);
    clamp_var(gqa_new, in.bounds.gqa_min, in.bounds.gqa_max);
    const bool done = std::abs(r_new - r) <= kFixedPointTol * std::max(1.0, std::abs(r)) &&
                      std::abs(gqa_new - gqa) <= kFixedPointTol * std::max(1.0, std::abs(gqa));
    r = r_new;
    gqa = gqa_new;
    if (done) {
      converged = true;
      break;
    }
  }
  ws.iters = iters;
  ws.converged = converged;
  if (r <= in.bounds.r_min || r >= in.bounds.r_max) ws.clamped.push_back("ffn_ratio");
  if (gqa <= in.bounds.gqa_min || gqa >= in.bounds.gqa_max) ws.clamped.push_back("gqa");

  const double gamma = gamma_of(d, r, gqa, s_bar, in.hardware);
  ws.p = Point{m_bar / gamma, d, r, gqa, rho};
  record_depth_clamp(ws, in.bounds);
  const double mul =
      c.alpha_l * c.kappa_l * std::pow(gamma, c.alpha_l - 1.0) / std::pow(m_bar, c.alpha_l);
  ws.mu.mu_latency = mul / ws.p.l;
  return ws;
}

WidthSolution solve_p1_width(double d, const TheoryInputs& in) {
  const auto& c = in.coeffs;
  const double f_bar = require_budget(in.budgets.f_bar_p, "prefill latency");
  const double rho = in.rho_min;
  const double dt = aggregate_loss_gradient(c, rho, d);

  WidthSolution ws;
  double r = std::clamp(4.0, in.bounds.r_min, in.bounds.r_max);
  double gqa = std::clamp(4.0, in.bounds.gqa_min, in.bounds.gqa_max);
  int iters = 0;
  bool converged = false;
  for (; iters < kFixedPointCap; ++iters) {
    const double xi_f = 4.0 + 4.0 / gqa + 6.0 * r;
    const double mul = c.alpha_l * c.kappa_l * std::pow(xi_f, c.alpha_l - 1.0) *
                       std::pow(d, 2.0 * (c.alpha_l - 1.0)) / std::pow(f_bar, c.alpha_l);
    const double r_t = std::pow(c.alpha_r * dt / (6.0 * mul * std::pow(d, c.beta_2 + 2.0)),
                                1.0 / (c.alpha_r + 1.0));
    const double gqa_t = std::pow(
        4.0 * mul * std::pow(d, c.alpha_m + 2.0) / (c.alpha_m * c.kappa_m),
        1.0 / (c.alpha_m + 1.0));
    double r_new = (1.0 - kDamping) * r + kDamping * r_t;
    double gqa_new = (1.0 - kDamping) * gqa + kDamping * gqa_t;
    clamp_var(r_new, in.bounds.r_min, in.bounds.r_max);
    clamp_var(gqa_new, in.bounds.gqa_min, in.bounds.gqa_max);
    const bool done = std::abs(r_new - r) <= kFixedPointTol * std::max(1.0, std::abs(r)) &&
                      std::abs(gqa_new - gqa) <= kFixedPointTol * std::max(1.0, std::abs(gqa));
    r = r_new;
    gqa = gqa_new;
    if (done) {
      converged = true;
      break;
    }
  }
  ws.iters = iters;
  ws.converged = converged;
  if (r <= in.bounds.r_min || r >= in.bounds.r_max) ws.clamped.push_back("ffn_ratio");
  if (gqa <= in.bounds.gqa_min || gqa >= in.bounds.gqa_max) ws.clamped.push_back("gqa");

  const double xi_f = 4.0 + 4.0 / gqa + 6.0 * r;
  ws.p = Point{f_bar / (xi_f * d * d), d, r, gqa, rho};
  record_depth_clamp(ws, in.bounds);
  const double mul = c.alpha_l * c.kappa_l * std::pow(xi_f, c.alpha_l - 1.0) *
                     std::pow(d, 2.0 * (c.alpha_l - 1.0)) / std::pow(f_bar, c.alpha_l);
  ws.mu.mu_latency = mul / ws.p.l;
  return ws;
}

WidthSolution solve_d2_width(double d, const TheoryInputs& in) {
  const auto& c = in.coeffs;
  const double m = require_budget(in.budgets.memory_budget, "memory");
  if (!c.supports_memory_regime())
    throw InfeasibleError("memory-constrained activation rate requires alpha_rho > alpha_r");
  const double bw = in.hardware.bytes_weight;

  WidthSolution ws;
  const double rho_u = memory_optimal_rho_unclamped(c, d);
  double rho = std::clamp(rho_u, in.rho_min, 1.0);
  if (rho != rho_u) ws.clamped.push_back("activation_rate");
  const double dt = aggregate_loss_gradient(c, rho, d);

  double r = std::clamp(4.0, in.bounds.r_min, in.bounds.r_max);
  double gqa = std::clamp(4.0, in.bounds.gqa_min, in.bounds.gqa_max);
  int iters = 0;
  bool converged = false;
  for (; iters < kFixedPointCap; ++iters) {
    const double xi_all = 2.0 + 2.0 / gqa + 3.0 * r / rho;
    const double mul = c.alpha_l * c.kappa_l * std::pow(xi_all, c.alpha_l - 1.0) *
                       std::pow(d, 2.0 * (c.alpha_l - 1.0)) * std::pow(bw, c.alpha_l - 1.0) /
                       std::pow(m, c.alpha_l);
    const double r_t =
        std::pow(c.alpha_r * dt * rho / (3.0 * mul * std::pow(d, c.beta_2 + 2.0) * bw),
                 1.0 / (c.alpha_r + 1.0));
    const double gqa_t = std::pow(
        2.0 * mul * std::pow(d, c.alpha_m + 2.0) * bw / (c.alpha_m * c.kappa_m),
        1.0 / (c.alpha_m + 1.0));
    double r_new = (1.0 - kDamping) * r + kDamping * r_t;
    double gqa_new = (1.0 - kDamping) * gqa + kDamping * gqa_t;
    clamp_var(r_new, in.bounds.r_min, in.bounds.r_max);
    clamp_var(gqa_new, in.bounds.gqa_min, in.bounds.gqa_max);
    const bool done = std::abs(r_new - r) <= kFixedPointTol * std::max(1.0, std::abs(r)) &&
                      std::abs(gqa_new - gqa) <= kFixedPointTol * std::max(1.0, std::abs(gqa));
    r = r_new;
    gqa = gqa_new;
    if (done) {
      converged = true;
      break;
    }
  }
  ws.iters = iters;
  ws.converged = converged;
  if (r <= in.bounds.r_min || r >= in.bounds.r_max) ws.clamped.push_back("ffn_ratio");
  if (gqa <= in.bounds.gqa_min || gqa >= in.bounds.gqa_max) ws.clamped.push_back("gqa");

  const double xi_all = 2.0 + 2.0 / gqa + 3.0 * r / rho;
  ws.p = Point{m / (xi_all * d * d * bw), d, r, gqa, rho};
  record_depth_clamp(ws, in.bounds);
  const double mul = c.alpha_l * c.kappa_l * std::pow(xi_all, c.alpha_l - 1.0) *
                     std::pow(d, 2.0 * (c.alpha_l - 1.0)) * std::pow(bw, c.alpha_l - 1.0) /
                     std::pow(m, c.alpha_l);
  ws.mu.mu_memory = mul / ws.p.l;
  return ws;
}

// --- Dual cases: (r, gqa) Newton on the stationarity residuals, with rho and
// l determined by constraint compatibility and the multipliers solved from the
// depth and activation-rate stationarity conditions. ---

struct DualEval {
  Point p;
  double res_r = 0.0, res_gqa = 0.0;
  double mu_t = 0.0, mu_m = 0.0;
  bool rho_clamped = false;
};

DualEval eval_dual(Case cs, double d, double r, double gqa, const TheoryInputs& in) {
  const auto& c = in.coeffs;
  const double m = require_budget(in.budgets.memory_budget, "memory");
  const double bw = in.hardware.bytes_weight;
  const double bkv = in.hardware.bytes_kv;
  const double s_bar = in.workload.average_context();
  const double attn = 2.0 + 2.0 / gqa;

  DualEval ev;
  double rho_u, l;
  if (cs == Case::d3) {
    const double m_bar = require_budget(in.budgets.m_bar_d, "decode latency");
    const double eta = m_bar / m;
    const double delta = 2.0 * s_bar * bkv / (gqa * d * bw);
    const double s = attn + 3.0 * r;
    const double xi_all = (s + std::sqrt(s * s + 4.0 * eta * delta)) / (2.0 * eta);
    rho_u = 3.0 * r / (xi_all - attn);
    ev.p.rho = std::clamp(rho_u, in.rho_min, 1.0);
    l = m / ((attn + 3.0 * r / ev.p.rho) * d * d * bw);
  } else {
    const double f_bar = require_budget(in.budgets.f_bar_p, "prefill latency");
    const double eta_p = f_bar / m;
    if (eta_p * bw >= 2.0)
      throw InfeasibleError("prefill/memory dual case is invalid when eta_p * b_w >= 2");
    rho_u = 3.0 * eta_p * bw * r / (attn * (2.0 - eta_p * bw) + 6.0 * r);
    ev.p.rho = std::clamp(rho_u, in.rho_min, 1.0);
    const double xi_f = 4.0 + 4.0 / gqa + 6.0 * r;
    l = f_bar / (xi_f * d * d);
  }
  ev.rho_clamped = ev.p.rho != rho_u;
  ev.p.l = l;
  ev.p.d = d;
  ev.p.r = r;
  ev.p.gqa = gqa;

  const LossGradient g = loss_gradient(to_arch(ev.p), c);
  const double rho = ev.p.rho;
  const double xi_all = attn + 3.0 * r / rho;
  // Memory multiplier from the activation-rate stationarity
  // (dLoss/drho = mu_M * 3*l*r*d^2*b_w / rho^2).
  ev.mu_m = g.d_activation_rate * rho * rho / (3.0 * l * r * d * d * bw);
  // Latency multiplier from the depth stationarity.
  double dgt_dl, dgt_dr, dgt_dgqa;
  if (cs == Case::d3) {
    dgt_dl = gamma_of(d, r, gqa, s_bar, in.hardware);
    dgt_dr = 3.0 * l * d * d * bw;
    dgt_dgqa = -(2.0 * l * d * d * bw + 2.0 * l * s_bar * d * bkv) / (gqa * gqa);
  } else {
    dgt_dl = (4.0 + 4.0 / gqa + 6.0 * r) * d * d;
    dgt_dr = 6.0 * l * d * d;
    dgt_dgqa = -4.0 * l * d * d / (gqa * gqa);
  }
  ev.mu_t = (-g.d_layers - ev.mu_m * xi_all * d * d * bw) / dgt_dl;

  ev.res_r = g.d_ffn_ratio + ev.mu_t * dgt_dr + ev.mu_m * 3.0 * l * d * d * bw / rho;
  ev.res_gqa = g.d_gqa + ev.mu_t * dgt_dgqa + ev.mu_m * (-2.0 * l * d * d * bw / (gqa * gqa));
  return ev;
}

WidthSolution solve_dual_width(Case cs, double d, const TheoryInputs& in) {
  // Residuals are normalized by the corresponding loss-gradient components so
  // the convergence test is scale-free.
  auto scaled_norm = [&](const DualEval& ev) {
    const LossGradient g = loss_gradient(to_arch(ev.p), in.coeffs);
    const double sr = ev.res_r / std::max(1e-300, std::abs(g.d_ffn_ratio) + std::abs(g.d_gqa));
    const double sg = ev.res_gqa / std::max(1e-300, std::abs(g.d_ffn_ratio) + std::abs(g.d_gqa));
    return std::hypot(sr, sg);
  };

  const std::array<std::pair<double, double>, 8> starts{{{4.0, 4.0},
                                                         {1.0, 2.0},
                                                         {8.0, 8.0},
                                                         {0.5, 1.5},
                                                         {2.0, 16.0},
                                                         {12.0, 2.0},
                                                         {0.2, 4.0},
                                                         {6.0, 32.0}}};
  WidthSolution best;
  double best_norm = std::numeric_limits<double>::infinity();
  double best_loss = std::numeric_limits<double>::infinity();
  int total_iters = 0;

  for (const auto& [r0, g0] : starts) {
    double lr = std::log(std::clamp(r0, in.bounds.r_min, in.bounds.r_max));
    double lg = std::log(std::clamp(g0, in.bounds.gqa_min, in.bounds.gqa_max));
    DualEval ev = eval_dual(cs, d, std::exp(lr), std::exp(lg), in);
    double norm = scaled_norm(ev);
    bool converged = false;
    for (int iter = 0; iter < 200; ++iter) {
      ++total_iters;
      if (norm < 1e-11) {
        converged = true;
        break;
      }
      // Numerical Jacobian of (res_r, res_gqa) in (log r, log gqa).
      const double h = 1e-6;
      const DualEval er = eval_dual(cs, d, std::exp(lr + h), std::exp(lg), in);
      const DualEval eg = eval_dual(cs, d, std::exp(lr), std::exp(lg + h), in);
      const double j11 = (er.res_r - ev.res_r) / h, j12 = (eg.res_r - ev.res_r) / h;
      const double j21 = (er.res_gqa - ev.res_gqa) / h, j22 = (eg.res_gqa - ev.res_gqa) / h;
      const double det = j11 * j22 - j12 * j21;
      if (!std::isfinite(det) || std::abs(det) < 1e-300) break;
      double step_r = -(j22 * ev.res_r - j12 * ev.res_gqa) / det;
      double step_g = -(-j21 * ev.res_r + j11 * ev.res_gqa) / det;
      // Damped step with halving until the residual norm decreases.
      double t = 1.0;
      bool improved = false;
      for (int back = 0; back < 30; ++back, t *= 0.5) {
        const double nlr = std::clamp(lr + t * step_r, std::log(in.bounds.r_min),
                                      std::log(in.bounds.r_max));
        const double nlg = std::clamp(lg + t * step_g, std::log(in.bounds.gqa_min),
                                      std::log(in.bounds.gqa_max));
        const DualEval trial = eval_dual(cs, d, std::exp(nlr), std::exp(nlg), in);
        const double tn = scaled_norm(trial);
        if (std::isfinite(tn) && tn < norm) {
          lr = nlr;
          lg = nlg;
          ev = trial;
          norm = tn;
          improved = true;
          break;
        }
      }
      if (!improved) break;
    }
    const double loss = loss_at(ev.p, in.coeffs);
    const bool better = converged
                            ? (best_norm >= 1e-11 || loss < best_loss ||
                               (loss == best_loss && lex_less(ev.p, best.p)))
                            : (best_norm >= 1e-11 && norm < best_norm);
    if (better) {
      best.p = ev.p;
      best.mu.mu_latency = ev.mu_t;
      best.mu.mu_memory = ev.mu_m;
      best.converged = converged;
      best.clamped.clear();
      if (ev.rho_clamped) best.clamped.push_back("activation_rate");
      if (ev.p.r <= in.bounds.r_min || ev.p.r >= in.bounds.r_max)
        best.clamped.push_back("ffn_ratio");
      if (ev.p.gqa <= in.bounds.gqa_min || ev.p.gqa >= in.bounds.gqa_max)
        best.clamped.push_back("gqa");
      best_norm = converged ? 0.0 : norm;
      best_loss = loss;
    }
  }
  best.iters = total_iters;
  record_depth_clamp(best, in.bounds);
  if (!std::isfinite(best_loss))
    throw ConvergenceError("dual-case stationarity solve did not converge");
  return best;
}

WidthSolution solve_width(Case cs, double d, const TheoryInputs& in) {
  switch (cs) {
    case Case::d1: return solve_d1_width(d, in);
    case Case::p1: return solve_p1_width(d, in);
    case Case::d2:
    case Case::p2: return solve_d2_width(d, in);
    case Case::d3:
    case Case::p3: return solve_dual_width(cs, d, in);
  }
  throw ValidationError("unknown case");
}

RegimeLabel case_regime(Case cs) {
  switch (cs) {
    case Case::d1: return RegimeLabel::decode_latency_only;
    case Case::p1: return RegimeLabel::prefill_latency_only;
    case Case::d2:
    case Case::p2: return RegimeLabel::memory_only;
    case Case::d3: return RegimeLabel::decode_plus_memory;
    case Case::p3: return RegimeLabel::prefill_plus_memory;
  }
  return RegimeLabel::unconstrained;
}

// Stationarity residuals of the Lagrangian at the solution, per free
// variable, normalized by the loss-gradient norm over the same variables.
std::map<std::string, double> stationarity_residuals(Case cs, const WidthSolution& ws,
                                                     const TheoryInputs& in) {
  const Point& p = ws.p;
  const LossGradient g = loss_gradient(to_arch(p), in.coeffs);
  const double bw = in.hardware.bytes_weight;
  const double bkv = in.hardware.bytes_kv;
  const double s_bar = in.workload.average_context();
  const double mu_t = ws.mu.mu_latency.value_or(0.0);
  const double mu_m = ws.mu.mu_memory.value_or(0.0);
  const double xi_all = 2.0 + 2.0 / p.gqa + 3.0 * p.r / p.rho;

  // Constraint partials for the case's active constraints.
  double lat_l = 0.0, lat_r = 0.0, lat_gqa = 0.0;
  const bool has_lat = cs == Case::d1 || cs == Case::p1 || cs == Case::d3 || cs == Case::p3;
  if (cs == Case::d1 || cs == Case::d3) {
    lat_l = gamma_of(p.d, p.r, p.gqa, s_bar, in.hardware);
    lat_r = 3.0 * p.l * p.d * p.d * bw;
    lat_gqa = -(2.0 * p.l * p.d * p.d * bw + 2.0 * p.l * s_bar * p.d * bkv) / (p.gqa * p.gqa);
  } else if (cs == Case::p1 || cs == Case::p3) {
    lat_l = (4.0 + 4.0 / p.gqa + 6.0 * p.r) * p.d * p.d;
    lat_r = 6.0 * p.l * p.d * p.d;
    lat_gqa = -4.0 * p.l * p.d * p.d / (p.gqa * p.gqa);
  }
  const bool has_mem = cs == Case::d2 || cs == Case::p2 || cs == Case::d3 || cs == Case::p3;
  const double mem_l = xi_all * p.d * p.d * bw;
  const double mem_r = 3.0 * p.l * p.d * p.d * bw / p.rho;
  const double mem_gqa = -2.0 * p.l * p.d * p.d * bw / (p.gqa * p.gqa);
  const double mem_rho = -3.0 * p.l * p.r * p.d * p.d * bw / (p.rho * p.rho);

  auto is_clamped = [&](const char* name) {
    return std::find(ws.clamped.begin(), ws.clamped.end(), name) != ws.clamped.end();
  };

  std::map<std::string, double> raw;
  if (!is_clamped("layers"))
    raw["layers"] = g.d_layers + (has_lat ? mu_t * lat_l : 0.0) + (has_mem ? mu_m * mem_l : 0.0);
  if (!is_clamped("ffn_ratio"))
    raw["ffn_ratio"] =
        g.d_ffn_ratio + (has_lat ? mu_t * lat_r : 0.0) + (has_mem ? mu_m * mem_r : 0.0);
  if (!is_clamped("gqa"))
    raw["gqa"] = g.d_gqa + (has_lat ? mu_t * lat_gqa : 0.0) + (has_mem ? mu_m * mem_gqa : 0.0);
  // rho sits at its lower bound in the latency-only cases (maximal sparsity),
  // where the bound multiplier absorbs the positive gradient.
  const bool rho_free = (cs == Case::d2 || cs == Case::p2 || cs == Case::d3 || cs == Case::p3) &&
                        !is_clamped("activation_rate");
  if (rho_free) raw["activation_rate"] = g.d_activation_rate + mu_m * mem_rho;

  double grad_norm = 0.0;
  for (double v : {g.d_layers, g.d_ffn_ratio, g.d_gqa, g.d_activation_rate}) grad_norm += v * v;
  grad_norm = std::sqrt(grad_norm);
  for (auto& [k, v] : raw) v /= std::max(grad_norm, 1e-300);
  return raw;
}

OptimalSolution finalize(Case cs, const WidthSolution& ws, const TheoryInputs& in) {
  OptimalSolution sol{to_arch(ws.p), cs};
  sol.regime = case_regime(cs);
  sol.predicted_loss = loss_at(ws.p, in.coeffs);
  sol.multipliers = ws.mu;
  sol.fixed_point_iters = ws.iters;
  sol.clamped = ws.clamped;
  sol.stationarity = stationarity_residuals(cs, ws, in);
  sol.slacks = check_constraints(sol.arch, in.budgets, in.workload, in.hardware);
  if (!ws.converged)
    throw ConvergenceError("stationarity iteration did not converge for case " +
                           std::string(case_name(cs)));
  return sol;
}

double golden_section_width(Case cs, const TheoryInputs& in, double lo, double hi) {
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  auto f = [&](double d) { return loss_at(solve_width(cs, d, in).p, in.coeffs); };
  double a = std::log(lo), b = std::log(hi);
  double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
  double f1 = f(std::exp(x1)), f2 = f(std::exp(x2));
  for (int i = 0; i < 200 && (b - a) > 1e-8; ++i) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - phi * (b - a);
      f1 = f(std::exp(x1));
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + phi * (b - a);
      f2 = f(std::exp(x2));
    }
  }
  return std::exp((a + b) / 2.0);
}

}  // namespace

const char* case_name(Case c) {
  switch (c) {
    case Case::d1: return "d1";
    case Case::d2: return "d2";
    case Case::d3: return "d3";
    case Case::p1: return "p1";
    case Case::p2: return "p2";
    case Case::p3: return "p3";
  }
  return "unknown";
}

std::optional<Case> case_from_name(const std::string& name) {
  if (name == "d1") return Case::d1;
  if (name == "d2") return Case::d2;
  if (name == "d3") return Case::d3;
  if (name == "p1") return Case::p1;
  if (name == "p2") return Case::p2;
  if (name == "p3") return Case::p3;
  return std::nullopt;
}

std::vector<double> default_width_grid() {
  return {768, 1024, 1280, 1536, 1792, 2048, 2304, 2560, 3072};
}

void TheoryInputs::validate() const {
  coeffs.validate();
  hardware.validate();
  workload.validate();
  if (!(rho_min > 0.0 && rho_min <= 1.0)) throw ValidationError("rho_min must be in (0, 1]");
  if (!(bounds.l_min >= 1.0 && bounds.l_max >= bounds.l_min && bounds.d_min > 0.0 &&
        bounds.d_max >= bounds.d_min && bounds.r_min > 0.0 && bounds.r_max >= bounds.r_min &&
        bounds.gqa_min >= 1.0 && bounds.gqa_max >= bounds.gqa_min))
    throw ValidationError("bounds box is empty or invalid");
}

double memory_optimal_rho_unclamped(const ScalingLawCoefficients& c, double width) {
  if (!c.supports_memory_regime())
    throw InfeasibleError("memory-constrained activation rate requires alpha_rho > alpha_r");
  return std::pow(c.alpha_r * c.kappa_d / ((c.alpha_rho - c.alpha_r) * c.kappa_rho),
                  1.0 / c.alpha_rho) *
         std::pow(width, (c.beta_1 - c.beta_2) / c.alpha_rho);
}

OptimalSolution solve_case(Case cs, const TheoryInputs& inputs) {
  inputs.validate();
  switch (inputs.width_mode) {
    case WidthMode::fixed: {
      if (inputs.fixed_width < inputs.bounds.d_min || inputs.fixed_width > inputs.bounds.d_max)
        throw ValidationError("fixed width lies outside the bounds box");
      return finalize(cs, solve_width(cs, inputs.fixed_width, inputs), inputs);
    }
    case WidthMode::sweep: {
      std::vector<double> grid =
          inputs.width_grid.empty() ? default_width_grid() : inputs.width_grid;
      std::optional<WidthSolution> best;
      double best_loss = std::numeric_limits<double>::infinity();
      for (double d : grid) {
        if (d < inputs.bounds.d_min || d > inputs.bounds.d_max) continue;
        WidthSolution ws = solve_width(cs, d, inputs);
        const double loss = loss_at(ws.p, inputs.coeffs);
        if (!best || loss < best_loss || (loss == best_loss && lex_less(ws.p, best->p))) {
          best = std::move(ws);
          best_loss = loss;
        }
      }
      if (!best) throw InfeasibleError("no width in the grid lies inside the bounds box");
      return finalize(cs, *best, inputs);
    }
    case WidthMode::continuous: {
      const double d =
          golden_section_width(cs, inputs, inputs.bounds.d_min, inputs.bounds.d_max);
      return finalize(cs, solve_width(cs, d, inputs), inputs);
    }
  }
  throw ValidationError("unknown width mode");
}

RegimeReport classify_regime_active_set(const TheoryInputs& inputs) {
  RegimeReport report = classify_regime(inputs.budgets);
  report.method = RegimeMethod::active_set;

  const bool has_dec = inputs.budgets.m_bar_d.has_value();
  const bool has_pre = inputs.budgets.f_bar_p.has_value();
  const bool has_mem = inputs.budgets.memory_budget.has_value();
  if (!has_dec && !has_pre) {
    report.label = has_mem ? RegimeLabel::memory_only : RegimeLabel::unconstrained;
    return report;
  }
  bool decode_binding = has_dec;
  if (has_dec && has_pre && report.eta && report.eta_p)
    decode_binding = *report.eta <= *report.eta_p;
  const Case lat_case = decode_binding ? Case::d1 : Case::p1;
  if (!has_mem) {
    report.label = case_regime(lat_case);
    return report;
  }

  constexpr double kSlackTol = -1e-9;
  // Latency-only optimum feasible w.r.t. memory => latency constraint alone is
  // active. Otherwise, memory-only optimum feasible w.r.t. latency => memory
  // alone. Otherwise both bind.
  try {
    const OptimalSolution lat = solve_case(lat_case, inputs);
    report.slacks = lat.slacks;
    if (lat.slacks.memory && *lat.slacks.memory >= kSlackTol) {
      report.label = case_regime(lat_case);
      return report;
    }
  } catch (const Error&) {
    // fall through to the memory test
  }
  try {
    const OptimalSolution mem = solve_case(Case::d2, inputs);
    report.slacks = mem.slacks;
    const std::optional<double> lat_slack =
        decode_binding ? mem.slacks.decode : mem.slacks.prefill;
    if (lat_slack && *lat_slack >= kSlackTol) {
      report.label = RegimeLabel::memory_only;
      return report;
    }
  } catch (const Error&) {
    // fall through to the dual label
  }
  report.label =
      decode_binding ? RegimeLabel::decode_plus_memory : RegimeLabel::prefill_plus_memory;
  return report;
}

OptimalSolution solve_auto(const TheoryInputs& inputs) {
  const RegimeReport report = classify_regime_active_set(inputs);
  Case cs;
  switch (report.label) {
    case RegimeLabel::decode_latency_only: cs = Case::d1; break;
    case RegimeLabel::prefill_latency_only: cs = Case::p1; break;
    case RegimeLabel::memory_only: cs = Case::d2; break;
    case RegimeLabel::decode_plus_memory: cs = Case::d3; break;
    case RegimeLabel::prefill_plus_memory: cs = Case::p3; break;
    default:
      throw InfeasibleError("no constraint budgets given; nothing to optimize");
  }
  OptimalSolution sol = solve_case(cs, inputs);
  sol.regime = report.label;
  return sol;
}

namespace {

std::vector<double> log_axis(double lo, double hi, int n) {
  std::vector<double> v;
  v.reserve(static_cast<std::size_t>(n));
  if (hi <= lo || n == 1) {
    v.push_back(lo);
    return v;
  }
  const double la = std::log(lo), lb = std::log(hi);
  for (int i = 0; i < n; ++i)
    v.push_back(std::exp(la + (lb - la) * i / (n - 1)));
  return v;
}

}  // namespace

OracleResult numerical_oracle(Case cs, const TheoryInputs& inputs,
                              const OracleOptions& options) {
  inputs.validate();
  const auto& box = inputs.bounds;
  const bool dual = cs == Case::d3 || cs == Case::p3;
  const bool memory_case = cs == Case::d2 || cs == Case::p2;
  const double bw = inputs.hardware.bytes_weight;
  const double s_bar = inputs.workload.average_context();

  // Width axis: mirror the width policy of the closed-form solver.
  std::vector<double> d_axis;
  bool refine_d = false;
  if (inputs.width_mode == WidthMode::fixed) {
    d_axis = {inputs.fixed_width};
  } else if (inputs.width_mode == WidthMode::sweep) {
    for (double d : inputs.width_grid.empty() ? default_width_grid() : inputs.width_grid)
      if (d >= box.d_min && d <= box.d_max) d_axis.push_back(d);
  } else {
    d_axis = log_axis(box.d_min, box.d_max, options.points_per_axis);
    refine_d = true;
  }
  if (d_axis.empty()) throw InfeasibleError("empty width axis");

  struct Range {
    double lo, hi;
  };
  Range r_range{box.r_min, box.r_max};
  Range gqa_range{box.gqa_min, box.gqa_max};
  Range rho_range{inputs.rho_min, 1.0};
  Range d_range{box.d_min, box.d_max};

  std::optional<Point> best;
  double best_loss = std::numeric_limits<double>::infinity();
  int evaluated = 0;

  auto consider = [&](double d, double r, double gqa, double rho_grid) {
    Point p;
    p.d = d;
    p.r = r;
    p.gqa = gqa;
    if (dual) {
      DualEval ev;
      try {
        ev = eval_dual(cs, d, r, gqa, inputs);
      } catch (const Error&) {
        return;
      }
      // Both equality constraints only hold when rho is interior.
      if (ev.rho_clamped) return;
      p = ev.p;
    } else {
      p.rho = rho_grid;
      if (cs == Case::d1) {
        p.l = *inputs.budgets.m_bar_d / gamma_of(d, r, gqa, s_bar, inputs.hardware);
      } else if (cs == Case::p1) {
        p.l = *inputs.budgets.f_bar_p / ((4.0 + 4.0 / gqa + 6.0 * r) * d * d);
      } else {
        p.l = *inputs.budgets.memory_budget / ((2.0 + 2.0 / gqa + 3.0 * r / rho_grid) * d * d * bw);
      }
    }
    if (p.l < box.l_min || p.l > box.l_max) return;
    // Inactive budgets must still be respected as inequalities.
    const ConstraintSlacks s =
        check_constraints(to_arch(p), inputs.budgets, inputs.workload, inputs.hardware);
    constexpr double kTol = -1e-9;
    if (!memory_case && !dual && s.memory && *s.memory < kTol) return;
    if ((memory_case || cs == Case::p1 || cs == Case::p3) && s.decode && *s.decode < kTol) return;
    if ((memory_case || cs == Case::d1 || cs == Case::d3) && s.prefill && *s.prefill < kTol)
      return;
    ++evaluated;
    const double loss = loss_at(p, inputs.coeffs);
    if (loss < best_loss || (loss == best_loss && best && lex_less(p, *best))) {
      best = p;
      best_loss = loss;
    }
  };

  // Pre-pin the budget lookups needed below.
  if (cs == Case::d1) require_budget(inputs.budgets.m_bar_d, "decode latency");
  if (cs == Case::p1) require_budget(inputs.budgets.f_bar_p, "prefill latency");
  if (memory_case) require_budget(inputs.budgets.memory_budget, "memory");
  if (memory_case && !inputs.coeffs.supports_memory_regime()) {
    // The oracle itself does not need the closed form; proceed.
  }

  for (int round = 0; round <= options.refine_rounds; ++round) {
    const auto r_axis = log_axis(r_range.lo, r_range.hi, options.points_per_axis);
    const auto gqa_axis = log_axis(gqa_range.lo, gqa_range.hi, options.points_per_axis);
    const auto rho_axis =
        dual ? std::vector<double>{1.0}
             : log_axis(rho_range.lo, rho_range.hi, options.points_per_axis);
    const auto d_vals = refine_d && round > 0
                            ? log_axis(d_range.lo, d_range.hi, options.points_per_axis)
                            : d_axis;
    for (double d : d_vals)
      for (double r : r_axis)
        for (double gqa : gqa_axis)
          for (double rho : rho_axis) consider(d, r, gqa, rho);

    if (!best) throw InfeasibleError("oracle found no feasible point");
    if (round == options.refine_rounds) break;
    // Shrink each refined axis range (in log space) around the incumbent.
    auto shrink = [&](Range& rg, double center, double glo, double ghi) {
      const double half = (std::log(rg.hi) - std::log(rg.lo)) / (2.0 * options.shrink);
      rg.lo = std::max(glo, std::exp(std::log(center) - half));
      rg.hi = std::min(ghi, std::exp(std::log(center) + half));
    };
    shrink(r_range, best->r, box.r_min, box.r_max);
    shrink(gqa_range, best->gqa, box.gqa_min, box.gqa_max);
    if (!dual) shrink(rho_range, best->rho, inputs.rho_min, 1.0);
    if (refine_d) shrink(d_range, best->d, box.d_min, box.d_max);
  }

  return OracleResult{to_arch(*best), best_loss, evaluated};
}

}  // namespace archopt
