#include "archopt/search_space.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace archopt {

PrecisionPreset fp16_preset() { return {"fp16", 2.0, 2.0, 2.0}; }
PrecisionPreset int8_preset() { return {"int8", 1.0, 1.0, 1.0}; }

PrecisionPreset precision_from_name(const std::string& name) {
  if (name == "fp16") return fp16_preset();
  if (name == "int8") return int8_preset();
  throw ValidationError("unknown precision preset: " + name + " (expected fp16 or int8)");
}

HardwareSpec with_precision(HardwareSpec hardware, const PrecisionPreset& preset) {
  hardware.bytes_weight = preset.bytes_weight;
  hardware.bytes_activation = preset.bytes_activation;
  hardware.bytes_kv = preset.bytes_kv;
  return hardware;
}

void SearchSpace::validate() const {
  if (depths.empty() || widths.empty() || moe.empty() || n_kv_options.empty() ||
      ffn_ratios.empty())
    throw ValidationError("search space grids must be non-empty");
  if (head_dim < 1) throw ValidationError("head_dim must be >= 1");
  for (int w : widths)
    if (w % head_dim != 0)
      throw ValidationError("every grid width must be a multiple of head_dim");
  for (const auto& [e, k] : moe)
    if (k < 1 || e < k) throw ValidationError("MoE pairs need 1 <= active <= total");
}

ArchitectureConfig SearchSpace::at(std::size_t idx) const {
  const std::size_t nr = ffn_ratios.size();
  const std::size_t nk = n_kv_options.size();
  const std::size_t nm = moe.size();
  const std::size_t nw = widths.size();
  const double ratio = ffn_ratios[idx % nr];
  idx /= nr;
  const int nkv_opt = n_kv_options[idx % nk];
  idx /= nk;
  const auto [experts, active] = moe[idx % nm];
  idx /= nm;
  const int width = widths[idx % nw];
  idx /= nw;
  const int depth = depths[idx];
  const int n_heads = width / head_dim;
  const int n_kv = nkv_opt == 0 ? n_heads : std::min(nkv_opt, n_heads);
  return ArchitectureConfig::discrete(depth, width, n_kv, head_dim, experts, active, ratio);
}

std::vector<ArchitectureConfig> SearchSpace::enumerate() const {
  validate();
  std::vector<ArchitectureConfig> out;
  out.reserve(size());
  for (std::size_t i = 0; i < size(); ++i) out.push_back(at(i));
  return out;
}

SearchSpace default_search_space() {
  SearchSpace s;
  s.depths = {4, 8, 12, 16, 20, 24, 28, 32};
  s.widths = {768, 1024, 1280, 1536, 1792, 2048, 2304, 2560, 3072};
  s.moe = {{1, 1}, {8, 1}, {8, 2}, {16, 1}, {16, 2}};
  s.n_kv_options = {1, 2, 4, 8, 0};  // 0 => n_kv = n_heads
  s.ffn_ratios = {4.0};
  s.head_dim = 64;
  return s;
}

namespace {

// Nearest grid value in log space; on a tie, prefer_small picks the smaller
// candidate (fewer parameters), otherwise the larger.
template <typename T, typename Get>
T nearest(const std::vector<T>& grid, double target, bool prefer_small, Get value) {
  T best = grid.front();
  double best_dist = std::numeric_limits<double>::infinity();
  for (const T& cand : grid) {
    const double v = value(cand);
    const double dist = std::abs(std::log(v) - std::log(std::max(target, 1e-12)));
    const bool tie = std::abs(dist - best_dist) <= 1e-12;
    const bool closer = dist < best_dist - 1e-12;
    const bool wins_tie = tie && (prefer_small ? value(cand) < value(best)
                                               : value(cand) > value(best));
    if (closer || wins_tie) {
      best = cand;
      best_dist = dist;
    }
  }
  return best;
}

}  // namespace

ArchitectureConfig snap_to_grid(const ArchitectureConfig& theta, const SearchSpace& space) {
  space.validate();
  const int depth =
      nearest(space.depths, theta.layers(), true, [](int x) { return double(x); });
  const int width =
      nearest(space.widths, theta.width(), true, [](int x) { return double(x); });
  const double ratio =
      nearest(space.ffn_ratios, theta.ffn_ratio(), true, [](double x) { return x; });
  // Activation rate: larger rho means a smaller expert pool, hence fewer
  // stored parameters — prefer it on ties.
  const auto [experts, active] = nearest(
      space.moe, theta.activation_rate(), false,
      [](const std::pair<int, int>& ek) { return double(ek.second) / ek.first; });
  const int n_heads = width / space.head_dim;
  std::vector<int> kv_candidates;
  for (int opt : space.n_kv_options) kv_candidates.push_back(opt == 0 ? n_heads : std::min(opt, n_heads));
  // Larger gqa (fewer KV heads) shrinks attention parameters — prefer on ties.
  const int n_kv = nearest(kv_candidates, double(n_heads) / theta.gqa(), true,
                           [](int x) { return double(x); });
  return ArchitectureConfig::discrete(depth, width, n_kv, space.head_dim, experts, active, ratio);
}

}  // namespace archopt
