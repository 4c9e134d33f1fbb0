#pragma once

#include <optional>
#include <string>

#include "archopt/arch.hpp"

namespace archopt {

// Latency targets in seconds. A total-latency target is split into phase
// targets using a reference architecture (see normalize_budgets).
struct LatencyTargets {
  std::optional<double> t_prefill;
  std::optional<double> t_decode;
  std::optional<double> t_total;
};

// Normalized constraint budgets:
//   F_bar_p = T_pre * pi_H / (B * S_in)   (FLOPs per token, prefill)
//   M_bar_d = T_dec * beta_H / S_out      (bytes per generated token, decode)
struct Budgets {
  std::optional<double> f_bar_p;
  std::optional<double> m_bar_d;
  std::optional<double> memory_budget;

  std::optional<double> eta() const {
    if (m_bar_d && memory_budget) return *m_bar_d / *memory_budget;
    return std::nullopt;
  }
  std::optional<double> eta_p() const {
    if (f_bar_p && memory_budget) return *f_bar_p / *memory_budget;
    return std::nullopt;
  }
};

Budgets normalize_budgets(const HardwareSpec& hardware, const WorkloadSpec& workload,
                          const LatencyTargets& targets);

// Signed relative slack per constraint: (budget - used) / budget.
// Positive means satisfied; absent when the budget is absent.
struct ConstraintSlacks {
  std::optional<double> prefill;
  std::optional<double> decode;
  std::optional<double> memory;
};

ConstraintSlacks check_constraints(const ArchitectureConfig& arch, const Budgets& budgets,
                                   const WorkloadSpec& workload, const HardwareSpec& hardware);

enum class RegimeLabel {
  prefill_latency_only,
  decode_latency_only,
  memory_only,
  prefill_plus_memory,
  decode_plus_memory,
  unconstrained,
  infeasible,
};

const char* regime_label_name(RegimeLabel label);

enum class RegimeMethod { ratio_heuristic, active_set };

struct RegimeThresholds {
  double memory_below = 0.5;  // ratio below this => memory-constrained
  double latency_above = 2.0;  // ratio above this => latency-constrained
};

struct RegimeReport {
  RegimeLabel label = RegimeLabel::unconstrained;
  RegimeMethod method = RegimeMethod::ratio_heuristic;
  std::optional<double> eta;
  std::optional<double> eta_p;
  ConstraintSlacks slacks;  // populated by the active-set method
};

// Fast classification from the budget ratios alone. The active-set method
// (solver module) is authoritative; this matches it on clear-cut instances.
// When both latency budgets are present, the phase with the smaller ratio
// (tighter relative to memory) is taken as binding.
RegimeReport classify_regime(const Budgets& budgets, const RegimeThresholds& thresholds = {});

}  // namespace archopt
