#include "archopt/roofline.hpp"

#include <cmath>

namespace archopt {

namespace {

int query_heads(const ArchitectureConfig& arch) {
  if (arch.heads()) return arch.heads()->n_heads;
  // Continuous configs carry no head structure; assume 64-wide heads.
  return std::max(1, static_cast<int>(std::lround(arch.width() / 64.0)));
}

OperatorCost finish(OperatorCost cost, const HardwareSpec& hw) {
  cost.latency = roofline_latency(cost.flops, cost.total_bytes(), hw);
  return cost;
}

}  // namespace

const char* op_kind_name(OpKind kind) {
  switch (kind) {
    case OpKind::q_proj: return "q_proj";
    case OpKind::k_proj: return "k_proj";
    case OpKind::v_proj: return "v_proj";
    case OpKind::o_proj: return "o_proj";
    case OpKind::qk_matmul: return "qk_matmul";
    case OpKind::softmax: return "softmax";
    case OpKind::sv_matmul: return "sv_matmul";
    case OpKind::ffn_gate: return "ffn_gate";
    case OpKind::ffn_up: return "ffn_up";
    case OpKind::ffn_down: return "ffn_down";
  }
  return "unknown";
}

double roofline_latency(double flops, double bytes, const HardwareSpec& hardware) {
  return std::max(flops / hardware.peak_flops, bytes / hardware.bandwidth_bytes_per_s);
}

std::vector<OperatorCost> per_operator_costs(const ArchitectureConfig& arch,
                                             const WorkloadSpec& workload,
                                             const HardwareSpec& hw, Phase phase,
                                             int decode_step) {
  const double B = workload.batch;
  const double d = arch.width();
  const double gqa = arch.gqa();
  const double d_m = arch.kv_width();
  const double r = arch.ffn_ratio();
  const double nh = query_heads(arch);
  const double bw = hw.bytes_weight;
  const double ba = hw.bytes_activation;
  const double bkv = hw.bytes_kv;

  std::vector<OperatorCost> ops;
  ops.reserve(10);

  if (phase == Phase::prefill) {
    const double S = workload.seq_in;

    OperatorCost q{OpKind::q_proj};
    q.flops = 2.0 * B * S * d * d;
    q.bytes_weights = d * d * bw;
    q.bytes_activations = 2.0 * B * S * d * ba;  // load input + store output
    ops.push_back(finish(q, hw));

    for (OpKind kind : {OpKind::k_proj, OpKind::v_proj}) {
      OperatorCost kv{kind};
      kv.flops = 2.0 * B * S * d * d / gqa;
      kv.bytes_weights = d * d * bw / gqa;
      kv.bytes_kv = B * S * d * bkv / gqa;  // cache store
      ops.push_back(finish(kv, hw));
    }

    OperatorCost o{OpKind::o_proj};
    o.flops = 2.0 * B * S * d * d;
    o.bytes_weights = d * d * bw;
    o.bytes_activations = 2.0 * B * S * d * ba;
    ops.push_back(finish(o, hw));

    OperatorCost qk{OpKind::qk_matmul};
    qk.flops = 2.0 * B * S * S * d;
    qk.bytes_activations = B * S * d * ba + B * nh * S * S * ba;  // load Q + store scores
    qk.bytes_kv = B * S * d_m * bkv;                              // load K cache
    ops.push_back(finish(qk, hw));

    OperatorCost sm{OpKind::softmax};
    sm.flops = 5.0 * B * nh * S * S;
    sm.bytes_activations = 2.0 * B * nh * S * S * ba;
    ops.push_back(finish(sm, hw));

    OperatorCost sv{OpKind::sv_matmul};
    sv.flops = 2.0 * B * S * S * d;
    sv.bytes_activations = B * nh * S * S * ba + B * S * d * ba;  // load scores + store out
    sv.bytes_kv = B * S * d_m * bkv;                              // load V cache
    ops.push_back(finish(sv, hw));

    for (OpKind kind : {OpKind::ffn_gate, OpKind::ffn_up, OpKind::ffn_down}) {
      OperatorCost ffn{kind};
      ffn.flops = 2.0 * B * S * r * d * d;
      ffn.bytes_weights = r * d * d * bw;  // activated experts only
      ops.push_back(finish(ffn, hw));
    }
    return ops;
  }

  if (decode_step < 1 || decode_step > workload.seq_out)
    throw ValidationError("decode step must be in [1, seq_out]");
  const double S = workload.seq_in + decode_step;  // context at this step

  OperatorCost q{OpKind::q_proj};
  q.flops = 2.0 * B * d * d;
  q.bytes_weights = d * d * bw;
  q.bytes_activations = 2.0 * B * d * ba;
  ops.push_back(finish(q, hw));

  for (OpKind kind : {OpKind::k_proj, OpKind::v_proj}) {
    OperatorCost kv{kind};
    kv.flops = 2.0 * B * d * d / gqa;
    kv.bytes_weights = d * d * bw / gqa;
    kv.bytes_kv = B * d * bkv / gqa;  // cache store for the new token
    ops.push_back(finish(kv, hw));
  }

  OperatorCost o{OpKind::o_proj};
  o.flops = 2.0 * B * d * d;
  o.bytes_weights = d * d * bw;
  o.bytes_activations = 2.0 * B * d * ba;
  ops.push_back(finish(o, hw));

  OperatorCost qk{OpKind::qk_matmul};
  qk.flops = 2.0 * B * S * d;
  qk.bytes_activations = B * d * ba + B * nh * S * ba;
  qk.bytes_kv = B * S * d_m * bkv;
  ops.push_back(finish(qk, hw));

  OperatorCost sm{OpKind::softmax};
  sm.flops = 5.0 * B * nh * S;
  sm.bytes_activations = 2.0 * B * nh * S * ba;
  ops.push_back(finish(sm, hw));

  OperatorCost sv{OpKind::sv_matmul};
  sv.flops = 2.0 * B * S * d;
  sv.bytes_activations = B * nh * S * ba + B * d * ba;
  sv.bytes_kv = B * S * d_m * bkv;
  ops.push_back(finish(sv, hw));

  for (OpKind kind : {OpKind::ffn_gate, OpKind::ffn_up, OpKind::ffn_down}) {
    OperatorCost ffn{kind};
    ffn.flops = 2.0 * B * r * d * d;
    ffn.bytes_weights = r * d * d * bw;
    ops.push_back(finish(ffn, hw));
  }
  return ops;
}

namespace {

PhaseBreakdown summarize(Phase phase, int step, std::vector<OperatorCost> ops, double depth) {
  PhaseBreakdown b;
  b.phase = phase;
  b.decode_step = step;
  b.per_layer = std::move(ops);
  for (const auto& op : b.per_layer) {
    b.layer_latency += op.latency;
    b.total_flops += op.flops;
    b.total_bytes += op.total_bytes();
  }
  b.total_latency = depth * b.layer_latency;
  b.total_flops *= depth;
  b.total_bytes *= depth;
  return b;
}

}  // namespace

PhaseBreakdown prefill_breakdown(const ArchitectureConfig& arch, const WorkloadSpec& workload,
                                 const HardwareSpec& hardware) {
  return summarize(Phase::prefill, 0,
                   per_operator_costs(arch, workload, hardware, Phase::prefill), arch.layers());
}

PhaseBreakdown decode_step_breakdown(const ArchitectureConfig& arch, const WorkloadSpec& workload,
                                     const HardwareSpec& hardware, int decode_step) {
  return summarize(Phase::decode, decode_step,
                   per_operator_costs(arch, workload, hardware, Phase::decode, decode_step),
                   arch.layers());
}

PhaseBreakdown decode_total_breakdown(const ArchitectureConfig& arch, const WorkloadSpec& workload,
                                      const HardwareSpec& hardware) {
  std::vector<OperatorCost> total;
  for (int t = 1; t <= workload.seq_out; ++t) {
    auto step = per_operator_costs(arch, workload, hardware, Phase::decode, t);
    if (total.empty()) {
      total = std::move(step);
    } else {
      for (std::size_t i = 0; i < total.size(); ++i) {
        total[i].flops += step[i].flops;
        total[i].bytes_weights += step[i].bytes_weights;
        total[i].bytes_activations += step[i].bytes_activations;
        total[i].bytes_kv += step[i].bytes_kv;
        total[i].latency += step[i].latency;
      }
    }
  }
  return summarize(Phase::decode, 0, std::move(total), arch.layers());
}

double prefill_latency(const ArchitectureConfig& arch, const WorkloadSpec& workload,
                       const HardwareSpec& hardware, PrefillMode mode) {
  if (workload.seq_in == 0) return 0.0;
  if (mode == PrefillMode::dominant) {
    return arch.layers() * workload.batch * workload.seq_in * arch.width() * arch.width() *
           xi_flops(arch) / hardware.peak_flops;
  }
  return prefill_breakdown(arch, workload, hardware).total_latency;
}

double decode_latency(const ArchitectureConfig& arch, const WorkloadSpec& workload,
                      const HardwareSpec& hardware, DecodeMode mode) {
  if (workload.seq_out == 0) return 0.0;
  const double l = arch.layers();
  const double d = arch.width();
  const double bw = hardware.bytes_weight;
  const double bkv = hardware.bytes_kv;
  const double beta = hardware.bandwidth_bytes_per_s;
  const double B = workload.batch;

  switch (mode) {
    case DecodeMode::closed_form: {
      // Weights are loaded once per step regardless of batch; KV traffic
      // scales with batch.
      const double weight_bytes = xi_weights_decode(arch) * d * d * bw;
      const double kv_bytes = 2.0 * workload.average_context() * d * bkv * B / arch.gqa();
      return l * workload.seq_out * (weight_bytes + kv_bytes) / beta;
    }
    case DecodeMode::per_step: {
      const double weight_bytes = xi_weights_decode(arch) * d * d * bw;
      double total = 0.0;
      for (int t = 1; t <= workload.seq_out; ++t) {
        const double kv_bytes = 2.0 * (workload.seq_in + t) * d * bkv * B / arch.gqa();
        total += l * (weight_bytes + kv_bytes) / beta;
      }
      return total;
    }
    case DecodeMode::full:
      return decode_total_breakdown(arch, workload, hardware).total_latency;
  }
  return 0.0;
}

double total_latency(const ArchitectureConfig& arch, const WorkloadSpec& workload,
                     const HardwareSpec& hardware, LatencyMode mode) {
  if (mode == LatencyMode::dominant) {
    return prefill_latency(arch, workload, hardware, PrefillMode::dominant) +
           decode_latency(arch, workload, hardware, DecodeMode::closed_form);
  }
  return prefill_latency(arch, workload, hardware, PrefillMode::full) +
         decode_latency(arch, workload, hardware, DecodeMode::full);
}

double memory_footprint(const ArchitectureConfig& arch, const HardwareSpec& hardware) {
  return arch.layers() * xi_weights_all(arch) * arch.width() * arch.width() *
         hardware.bytes_weight;
}

}  // namespace archopt
