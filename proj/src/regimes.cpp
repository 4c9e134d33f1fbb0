#include "archopt/regimes.hpp"

#include <cmath>

#include "archopt/roofline.hpp"

namespace archopt {

namespace {

// Reference point used to split a total-latency target into phase targets:
// mid-range dense config from the default search grids.
ArchitectureConfig reference_architecture() {
  return ArchitectureConfig(16, 1536, 4.0, 1.0, 4.0);
}

}  // namespace

Budgets normalize_budgets(const HardwareSpec& hardware, const WorkloadSpec& workload,
                          const LatencyTargets& targets) {
  hardware.validate();
  workload.validate();
  if (!targets.t_prefill && !targets.t_decode && !targets.t_total &&
      !(hardware.memory_budget_bytes > 0.0))
    throw ValidationError("need at least one latency target or a memory budget");

  double t_pre = targets.t_prefill.value_or(0.0);
  double t_dec = targets.t_decode.value_or(0.0);
  if (targets.t_total) {
    if (targets.t_prefill || targets.t_decode)
      throw ValidationError("give either a total latency target or per-phase targets, not both");
    // Split proportionally to the dominant-mode phase latencies of the
    // reference architecture.
    const ArchitectureConfig ref = reference_architecture();
    const double pre = prefill_latency(ref, workload, hardware, PrefillMode::dominant);
    const double dec = decode_latency(ref, workload, hardware, DecodeMode::closed_form);
    if (pre + dec <= 0.0) throw ValidationError("workload produces no latency to split");
    t_pre = *targets.t_total * pre / (pre + dec);
    t_dec = *targets.t_total * dec / (pre + dec);
  }
  for (double t : {t_pre, t_dec})
    if (!(std::isfinite(t) && t >= 0.0)) throw ValidationError("latency targets must be >= 0");

  Budgets b;
  if (t_pre > 0.0) {
    if (workload.seq_in < 1)
      throw ValidationError("prefill latency target requires seq_in >= 1");
    b.f_bar_p = t_pre * hardware.peak_flops / (workload.batch * workload.seq_in);
  }
  if (t_dec > 0.0) {
    if (workload.seq_out < 1)
      throw ValidationError("decode latency target requires seq_out >= 1");
    b.m_bar_d = t_dec * hardware.bandwidth_bytes_per_s / workload.seq_out;
  }
  if (hardware.memory_budget_bytes > 0.0) b.memory_budget = hardware.memory_budget_bytes;
  return b;
}

ConstraintSlacks check_constraints(const ArchitectureConfig& arch, const Budgets& budgets,
                                   const WorkloadSpec& workload, const HardwareSpec& hardware) {
  const double l = arch.layers();
  const double d = arch.width();
  ConstraintSlacks s;
  if (budgets.f_bar_p) {
    const double used = l * xi_flops(arch) * d * d;
    s.prefill = (*budgets.f_bar_p - used) / *budgets.f_bar_p;
  }
  if (budgets.m_bar_d) {
    const double used = l * xi_weights_decode(arch) * d * d * hardware.bytes_weight +
                        2.0 * l * workload.average_context() * d * hardware.bytes_kv / arch.gqa();
    s.decode = (*budgets.m_bar_d - used) / *budgets.m_bar_d;
  }
  if (budgets.memory_budget) {
    const double used = l * xi_weights_all(arch) * d * d * hardware.bytes_weight;
    s.memory = (*budgets.memory_budget - used) / *budgets.memory_budget;
  }
  return s;
}

const char* regime_label_name(RegimeLabel label) {
  switch (label) {
    case RegimeLabel::prefill_latency_only: return "prefill_latency_only";
    case RegimeLabel::decode_latency_only: return "decode_latency_only";
    case RegimeLabel::memory_only: return "memory_only";
    case RegimeLabel::prefill_plus_memory: return "prefill_plus_memory";
    case RegimeLabel::decode_plus_memory: return "decode_plus_memory";
    case RegimeLabel::unconstrained: return "unconstrained";
    case RegimeLabel::infeasible: return "infeasible";
  }
  return "unknown";
}

RegimeReport classify_regime(const Budgets& budgets, const RegimeThresholds& thresholds) {
  RegimeReport report;
  report.method = RegimeMethod::ratio_heuristic;
  report.eta = budgets.eta();
  report.eta_p = budgets.eta_p();

  const bool has_dec = budgets.m_bar_d.has_value();
  const bool has_pre = budgets.f_bar_p.has_value();
  const bool has_mem = budgets.memory_budget.has_value();
  if (!has_dec && !has_pre) {
    report.label = has_mem ? RegimeLabel::memory_only : RegimeLabel::unconstrained;
    return report;
  }
  if (!has_mem) {
    // Latency budgets only. With both phases present, the decode budget is
    // taken as binding (it is the memory-bound phase).
    report.label = has_dec ? RegimeLabel::decode_latency_only
                           : RegimeLabel::prefill_latency_only;
    return report;
  }

  // Binding phase: smaller ratio against the memory budget. Note eta_p is in
  // FLOPs/byte, so it is only compared against eta when both exist.
  bool decode_binding = has_dec;
  if (has_dec && has_pre) decode_binding = *report.eta <= *report.eta_p;
  const double ratio = decode_binding ? *report.eta : *report.eta_p;

  if (ratio < thresholds.memory_below) {
    report.label = RegimeLabel::memory_only;
  } else if (ratio > thresholds.latency_above) {
    report.label = decode_binding ? RegimeLabel::decode_latency_only
                                  : RegimeLabel::prefill_latency_only;
  } else {
    report.label = decode_binding ? RegimeLabel::decode_plus_memory
                                  : RegimeLabel::prefill_plus_memory;
  }
  return report;
}

}  // namespace archopt
