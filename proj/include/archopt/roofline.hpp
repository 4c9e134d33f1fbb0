#pragma once

#include <string>
#include <vector>

#include "archopt/arch.hpp"

namespace archopt {

enum class OpKind {
  q_proj,
  k_proj,
  v_proj,
  o_proj,
  qk_matmul,
  softmax,
  sv_matmul,
  ffn_gate,
  ffn_up,
  ffn_down,
};

const char* op_kind_name(OpKind kind);

enum class Phase { prefill, decode };

// Per-layer cost of one operator at one phase (decode: one step).
struct OperatorCost {
  OpKind op;
  double flops = 0.0;
  double bytes_weights = 0.0;
  double bytes_activations = 0.0;
  double bytes_kv = 0.0;
  double latency = 0.0;  // max(flops/pi_H, total_bytes/beta_H)

  double total_bytes() const { return bytes_weights + bytes_activations + bytes_kv; }
};

struct PhaseBreakdown {
  Phase phase;
  int decode_step = 0;  // 0 for prefill or aggregated decode
  std::vector<OperatorCost> per_layer;
  double layer_latency = 0.0;
  double total_latency = 0.0;  // layer latency scaled by depth (and steps if aggregated)
  double total_flops = 0.0;
  double total_bytes = 0.0;
};

// max(flops/pi_H, bytes/beta_H)
double roofline_latency(double flops, double bytes, const HardwareSpec& hardware);

// Per-layer operator costs. Decode requires a step index t in [1, seq_out];
// the context at step t is seq_in + t.
std::vector<OperatorCost> per_operator_costs(const ArchitectureConfig& arch,
                                             const WorkloadSpec& workload,
                                             const HardwareSpec& hardware, Phase phase,
                                             int decode_step = 0);

PhaseBreakdown prefill_breakdown(const ArchitectureConfig& arch, const WorkloadSpec& workload,
                                 const HardwareSpec& hardware);
PhaseBreakdown decode_step_breakdown(const ArchitectureConfig& arch, const WorkloadSpec& workload,
                                     const HardwareSpec& hardware, int decode_step);
// Sums operator costs over all decode steps.
PhaseBreakdown decode_total_breakdown(const ArchitectureConfig& arch, const WorkloadSpec& workload,
                                      const HardwareSpec& hardware);

enum class PrefillMode { dominant, full };
enum class DecodeMode { closed_form, per_step, full };
enum class LatencyMode { dominant, full };

// Dominant mode: l * B * S_in * d^2 * xi_F / pi_H. Full mode sums
// per-operator roofline latencies including attention scores and softmax.
double prefill_latency(const ArchitectureConfig& arch, const WorkloadSpec& workload,
                       const HardwareSpec& hardware, PrefillMode mode = PrefillMode::dominant);

// closed_form: (l*S_out/beta_H) * [xi_W^dec d^2 b_w + 2*S_bar*d*b_kv*B/gqa].
// per_step: explicit sum of memory-bound step latencies.
// full: per-operator roofline max, summed over steps.
double decode_latency(const ArchitectureConfig& arch, const WorkloadSpec& workload,
                      const HardwareSpec& hardware, DecodeMode mode = DecodeMode::closed_form);

double total_latency(const ArchitectureConfig& arch, const WorkloadSpec& workload,
                     const HardwareSpec& hardware, LatencyMode mode = LatencyMode::dominant);

// Model storage: l * xi_W^all * d^2 * b_w. Workload independent.
double memory_footprint(const ArchitectureConfig& arch, const HardwareSpec& hardware);

}  // namespace archopt
