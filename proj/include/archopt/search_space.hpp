#pragma once

#include <string>
#include <utility>
#include <vector>

#include "archopt/arch.hpp"

namespace archopt {

// Byte widths for a named quantization level.
struct PrecisionPreset {
  std::string name;
  double bytes_weight = 2.0;
  double bytes_activation = 2.0;
  double bytes_kv = 2.0;
};

PrecisionPreset fp16_preset();
PrecisionPreset int8_preset();
PrecisionPreset precision_from_name(const std::string& name);

// Applies the preset's byte widths to a hardware spec.
HardwareSpec with_precision(HardwareSpec hardware, const PrecisionPreset& preset);

// Discrete architecture grid. n_kv option 0 stands for "as many KV heads as
// query heads" (multi-head attention, gqa = 1).
struct SearchSpace {
  std::vector<int> depths;
  std::vector<int> widths;
  std::vector<std::pair<int, int>> moe;  // (experts_total, experts_active)
  std::vector<int> n_kv_options;
  std::vector<double> ffn_ratios;  // effective ratio across activated experts
  int head_dim = 64;

  std::size_t size() const {
    return depths.size() * widths.size() * moe.size() * n_kv_options.size() *
           ffn_ratios.size();
  }
  void validate() const;

  // Builds the config at a flat index in row-major (depth, width, moe, n_kv,
  // ratio) order.
  ArchitectureConfig at(std::size_t flat_index) const;
  std::vector<ArchitectureConfig> enumerate() const;
};

SearchSpace default_search_space();

// Maps a continuous configuration to the nearest grid configuration
// (log-space distance per axis); ties break toward the smaller parameter
// count.
ArchitectureConfig snap_to_grid(const ArchitectureConfig& theta, const SearchSpace& space);

}  // namespace archopt
