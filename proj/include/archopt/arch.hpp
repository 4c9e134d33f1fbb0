#pragma once

#include <optional>

#include "archopt/errors.hpp"

namespace archopt {

// Discrete attention head layout. gqa = n_heads / n_kv_heads, width = n_heads * head_dim.
struct HeadStructure {
  int n_heads = 0;
  int n_kv_heads = 0;
  int head_dim = 0;
};

// Discrete expert layout. activation_rate = active / total,
// effective ffn_ratio = active * expansion_per_expert.
struct MoEStructure {
  int experts_total = 0;
  int experts_active = 0;
  double expansion_per_expert = 0.0;
};

// Decision vector (l, d, r, rho, gqa) with optional discrete structure.
// Immutable after construction; all invariants are checked in the constructor
// so downstream evaluation code is branch-free.
class ArchitectureConfig {
public:
  ArchitectureConfig(double layers, double width, double ffn_ratio, double activation_rate,
                     double gqa_ratio, std::optional<HeadStructure> heads = std::nullopt,
                     std::optional<MoEStructure> moe = std::nullopt);

  // Discrete construction path used by the grid search. gqa and rho are derived
  // from the head/expert structure.
  static ArchitectureConfig discrete(int layers, int width, int n_kv_heads, int head_dim,
                                     int experts_total, int experts_active,
                                     double ffn_ratio_effective);

  double layers() const { return layers_; }
  double width() const { return width_; }
  double ffn_ratio() const { return ffn_ratio_; }
  double activation_rate() const { return activation_rate_; }
  double gqa() const { return gqa_; }
  // KV dimension d_m = d / gqa.
  double kv_width() const { return width_ / gqa_; }

  const std::optional<HeadStructure>& heads() const { return heads_; }
  const std::optional<MoEStructure>& moe() const { return moe_; }

private:
  double layers_;
  double width_;
  double ffn_ratio_;
  double activation_rate_;
  double gqa_;
  std::optional<HeadStructure> heads_;
  std::optional<MoEStructure> moe_;
};

// Hardware roofline parameters and byte widths. Units: FLOP/s, bytes/s, bytes.
struct HardwareSpec {
  double peak_flops = 0.0;
  double bandwidth_bytes_per_s = 0.0;
  double memory_budget_bytes = 0.0;
  double bytes_weight = 2.0;
  double bytes_activation = 2.0;
  double bytes_kv = 2.0;

  void validate() const;
};

// Inference workload: batch size plus input/output token counts.
struct WorkloadSpec {
  int batch = 1;
  int seq_in = 0;
  int seq_out = 0;

  void validate() const;

  // Average decode context length S_bar = S_in + (S_out + 1)/2.
  double average_context() const { return seq_in + (seq_out + 1) / 2.0; }
};

// Normalized per-layer cost coefficients.
double xi_flops(const ArchitectureConfig& arch);        // 4 + 4/gqa + 6r
double xi_weights_decode(const ArchitectureConfig& arch);  // 2 + 2/gqa + 3r
double xi_weights_all(const ArchitectureConfig& arch);     // 2 + 2/gqa + 3r/rho

// KV-cache correction delta = 2*S_bar*b_kv / (gqa*d*b_w).
double kv_correction(const ArchitectureConfig& arch, const WorkloadSpec& workload,
                     const HardwareSpec& hardware);

// Effective decode coefficient xi_W^dec + delta.
double xi_weights_effective(const ArchitectureConfig& arch, const WorkloadSpec& workload,
                            const HardwareSpec& hardware);

// Attention-only part of the weight coefficients: 2 + 2/gqa.
double attn_coefficient(const ArchitectureConfig& arch);

// Analytic partial derivatives of the four xi coefficients with respect to
// (r, gqa, rho, d). Entries not listed are identically zero.
struct CoefficientPartials {
  double dxiF_dr = 0.0;
  double dxiF_dgqa = 0.0;
  double dxiWdec_dr = 0.0;
  double dxiWdec_dgqa = 0.0;
  double dxiWeff_dr = 0.0;
  double dxiWeff_dgqa = 0.0;
  double dxiWeff_dd = 0.0;
  double dxiWall_dr = 0.0;
  double dxiWall_dgqa = 0.0;
  double dxiWall_drho = 0.0;
};

CoefficientPartials coefficient_partials(const ArchitectureConfig& arch,
                                         const WorkloadSpec& workload,
                                         const HardwareSpec& hardware);

}  // namespace archopt
