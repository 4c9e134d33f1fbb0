#include "archopt/arch.hpp"

#include <cmath>

namespace archopt {

namespace {

void require(bool ok, const char* msg) {
  if (!ok) throw ValidationError(msg);
}

bool finite_positive(double x) { return std::isfinite(x) && x > 0.0; }

}  // namespace

ArchitectureConfig::ArchitectureConfig(double layers, double width, double ffn_ratio,
                                       double activation_rate, double gqa_ratio,
                                       std::optional<HeadStructure> heads,
                                       std::optional<MoEStructure> moe)
    : layers_(layers),
      width_(width),
      ffn_ratio_(ffn_ratio),
      activation_rate_(activation_rate),
      gqa_(gqa_ratio),
      heads_(std::move(heads)),
      moe_(std::move(moe)) {
  require(finite_positive(layers_) && layers_ >= 1.0, "layers must be >= 1");
  require(finite_positive(width_) && width_ >= 1.0, "width must be >= 1");
  require(std::isfinite(ffn_ratio_) && ffn_ratio_ >= 0.0, "ffn_ratio must be >= 0");
  require(finite_positive(activation_rate_) && activation_rate_ <= 1.0,
          "activation_rate must be in (0, 1]");
  require(finite_positive(gqa_) && gqa_ >= 1.0, "gqa must be >= 1");

  if (heads_) {
    const auto& h = *heads_;
    require(h.n_heads >= 1 && h.n_kv_heads >= 1 && h.head_dim >= 1,
            "head structure entries must be >= 1");
    const double gqa_from_heads = static_cast<double>(h.n_heads) / h.n_kv_heads;
    require(std::abs(gqa_ - gqa_from_heads) <= 1e-9 * gqa_from_heads,
            "gqa must equal n_heads / n_kv_heads");
    require(std::abs(width_ - static_cast<double>(h.n_heads) * h.head_dim) <= 1e-9 * width_,
            "width must equal n_heads * head_dim");
  }
  if (moe_) {
    const auto& m = *moe_;
    require(m.experts_total >= 1 && m.experts_active >= 1, "expert counts must be >= 1");
    require(m.experts_active <= m.experts_total, "experts_active must be <= experts_total");
    require(m.expansion_per_expert > 0.0, "expansion_per_expert must be > 0");
    const double rho_from_moe = static_cast<double>(m.experts_active) / m.experts_total;
    require(std::abs(activation_rate_ - rho_from_moe) <= 1e-9,
            "activation_rate must equal experts_active / experts_total");
    const double r_from_moe = m.experts_active * m.expansion_per_expert;
    require(std::abs(ffn_ratio_ - r_from_moe) <= 1e-9 * std::max(1.0, r_from_moe),
            "ffn_ratio must equal experts_active * expansion_per_expert");
  }
}

ArchitectureConfig ArchitectureConfig::discrete(int layers, int width, int n_kv_heads,
                                                int head_dim, int experts_total,
                                                int experts_active,
                                                double ffn_ratio_effective) {
  require(head_dim >= 1 && width >= 1 && width % head_dim == 0,
          "width must be a positive multiple of head_dim");
  const int n_heads = width / head_dim;
  require(n_kv_heads >= 1 && n_kv_heads <= n_heads, "n_kv_heads must be in [1, n_heads]");
  require(experts_active >= 1, "experts_active must be >= 1");
  HeadStructure heads{n_heads, n_kv_heads, head_dim};
  MoEStructure moe{experts_total, experts_active, ffn_ratio_effective / experts_active};
  const double gqa = static_cast<double>(n_heads) / n_kv_heads;
  const double rho = static_cast<double>(experts_active) / experts_total;
  return ArchitectureConfig(layers, width, ffn_ratio_effective, rho, gqa, heads, moe);
}

void HardwareSpec::validate() const {
  require(finite_positive(peak_flops), "peak_flops must be > 0");
  require(finite_positive(bandwidth_bytes_per_s), "bandwidth_bytes_per_s must be > 0");
  require(finite_positive(memory_budget_bytes), "memory_budget_bytes must be > 0");
  require(finite_positive(bytes_weight), "bytes_weight must be > 0");
  require(finite_positive(bytes_activation), "bytes_activation must be > 0");
  require(finite_positive(bytes_kv), "bytes_kv must be > 0");
}

void WorkloadSpec::validate() const {
  require(batch >= 1, "batch must be >= 1");
  require(seq_in >= 0 && seq_out >= 0, "sequence lengths must be >= 0");
  require(seq_in + seq_out >= 1, "seq_in + seq_out must be >= 1");
}

double xi_flops(const ArchitectureConfig& arch) {
  return 4.0 + 4.0 / arch.gqa() + 6.0 * arch.ffn_ratio();
}

double xi_weights_decode(const ArchitectureConfig& arch) {
  return 2.0 + 2.0 / arch.gqa() + 3.0 * arch.ffn_ratio();
}

double xi_weights_all(const ArchitectureConfig& arch) {
  return 2.0 + 2.0 / arch.gqa() + 3.0 * arch.ffn_ratio() / arch.activation_rate();
}

double attn_coefficient(const ArchitectureConfig& arch) { return 2.0 + 2.0 / arch.gqa(); }

double kv_correction(const ArchitectureConfig& arch, const WorkloadSpec& workload,
                     const HardwareSpec& hardware) {
  return 2.0 * workload.average_context() * hardware.bytes_kv /
         (arch.gqa() * arch.width() * hardware.bytes_weight);
}

double xi_weights_effective(const ArchitectureConfig& arch, const WorkloadSpec& workload,
                            const HardwareSpec& hardware) {
  return xi_weights_decode(arch) + kv_correction(arch, workload, hardware);
}

CoefficientPartials coefficient_partials(const ArchitectureConfig& arch,
                                         const WorkloadSpec& workload,
                                         const HardwareSpec& hardware) {
  const double gqa = arch.gqa();
  const double rho = arch.activation_rate();
  const double r = arch.ffn_ratio();
  const double d = arch.width();
  const double s_bar = workload.average_context();
  const double bw = hardware.bytes_weight;
  const double bkv = hardware.bytes_kv;

  CoefficientPartials p;
  p.dxiF_dr = 6.0;
  p.dxiF_dgqa = -4.0 / (gqa * gqa);
  p.dxiWdec_dr = 3.0;
  p.dxiWdec_dgqa = -2.0 / (gqa * gqa);
  p.dxiWeff_dr = 3.0;
  p.dxiWeff_dgqa = -2.0 / (gqa * gqa) - 2.0 * s_bar * bkv / (gqa * gqa * d * bw);
  p.dxiWeff_dd = -2.0 * s_bar * bkv / (gqa * d * d * bw);
  p.dxiWall_dr = 3.0 / rho;
  p.dxiWall_dgqa = -2.0 / (gqa * gqa);
  p.dxiWall_drho = -3.0 * r / (rho * rho);
  return p;
}

}  // namespace archopt
