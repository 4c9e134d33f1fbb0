#include "archopt/pareto.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <set>

namespace archopt {

const char* objective_name(Objective o) {
  switch (o) {
    case Objective::prefill: return "prefill";
    case Objective::decode: return "decode";
    case Objective::total: return "total";
  }
  return "unknown";
}

Objective objective_from_name(const std::string& name) {
  if (name == "prefill") return Objective::prefill;
  if (name == "decode") return Objective::decode;
  if (name == "total") return Objective::total;
  throw ValidationError("unknown objective: " + name + " (expected prefill, decode, or total)");
}

bool dominates(const ParetoPoint& a, const ParetoPoint& b) {
  if (a.objective != b.objective || a.precision != b.precision)
    throw ValidationError("dominance is only defined for matching objective and precision");
  return a.loss <= b.loss && a.latency <= b.latency &&
         (a.loss < b.loss || a.latency < b.latency);
}

ParetoPoint evaluate_point(const ArchitectureConfig& arch, const ScalingLawCoefficients& coeffs,
                           const HardwareSpec& hardware, const WorkloadSpec& workload,
                           Objective objective, const std::string& precision_tag,
                           LatencyMode mode) {
  double latency = 0.0;
  switch (objective) {
    case Objective::prefill:
      latency = prefill_latency(arch, workload, hardware,
                                mode == LatencyMode::full ? PrefillMode::full
                                                          : PrefillMode::dominant);
      break;
    case Objective::decode:
      latency = decode_latency(arch, workload, hardware,
                               mode == LatencyMode::full ? DecodeMode::full
                                                         : DecodeMode::closed_form);
      break;
    case Objective::total:
      latency = total_latency(arch, workload, hardware, mode);
      break;
  }
  return ParetoPoint{arch,      predict_loss(arch, coeffs), latency,
                     memory_footprint(arch, hardware), objective, precision_tag};
}

namespace {

// Sort key used for deterministic tie handling.
std::array<double, 5> theta_key(const ArchitectureConfig& a) {
  return {a.layers(), a.width(), a.ffn_ratio(), a.gqa(), a.activation_rate()};
}

bool point_order(const ParetoPoint& a, const ParetoPoint& b) {
  if (a.latency != b.latency) return a.latency < b.latency;
  if (a.loss != b.loss) return a.loss < b.loss;
  if (a.memory != b.memory) return a.memory < b.memory;
  return theta_key(a.arch) < theta_key(b.arch);
}

}  // namespace

double frontier_hypervolume(const std::vector<ParetoPoint>& frontier, double ref_latency,
                            double ref_loss) {
  double hv = 0.0;
  double prev_loss = ref_loss;
  for (const auto& p : frontier) {
    if (p.latency > ref_latency || p.loss > prev_loss) continue;
    hv += (ref_latency - p.latency) * (prev_loss - p.loss);
    prev_loss = p.loss;
  }
  return hv;
}

Frontier build_frontier(std::vector<ParetoPoint> points) {
  if (points.empty()) throw ValidationError("cannot build a frontier from zero points");
  for (const auto& p : points)
    if (!(std::isfinite(p.loss) && std::isfinite(p.latency)))
      throw ValidationError("frontier points must have finite loss and latency");

  double ref_lat = 0.0, ref_loss = 0.0;
  for (const auto& p : points) {
    ref_lat = std::max(ref_lat, p.latency);
    ref_loss = std::max(ref_loss, p.loss);
  }
  std::sort(points.begin(), points.end(), point_order);

  Frontier f;
  double min_loss = std::numeric_limits<double>::infinity();
  for (auto& p : points) {
    // Sorted by latency then loss: a point survives only if it strictly
    // improves the best loss seen so far (exact duplicates keep the first,
    // which has the smaller memory / lexicographic key).
    if (p.loss < min_loss) {
      min_loss = p.loss;
      f.points.push_back(std::move(p));
    }
  }
  f.dominated_count = static_cast<int>(points.size() - f.points.size());
  f.hypervolume = frontier_hypervolume(f.points, ref_lat, ref_loss);
  return f;
}

namespace {

struct Evaluated {
  std::size_t index;
  ParetoPoint point;
  bool feasible;
};

class SearchState {
public:
  SearchState(const SearchSpace& space, const ScalingLawCoefficients& coeffs,
              const HardwareSpec& hw, const WorkloadSpec& wl, Objective obj,
              const std::string& tag, const ParetoOptions& opt)
      : space_(space), coeffs_(coeffs), hw_(hw), wl_(wl), obj_(obj), tag_(tag), opt_(opt) {
    const std::size_t n = space.size();
    seen_.assign(n, false);
    remaining_.resize(n);
    std::iota(remaining_.begin(), remaining_.end(), std::size_t{0});
  }

  // Evaluates any not-yet-seen indices in the batch; returns how many were new.
  int evaluate_batch(const std::vector<std::size_t>& batch) {
    std::vector<std::size_t> fresh;
    for (std::size_t idx : batch) {
      if (idx >= seen_.size() || seen_[idx]) continue;
      seen_[idx] = true;
      fresh.push_back(idx);
    }
    for (std::size_t idx : fresh) {
      const ArchitectureConfig arch = space_.at(idx);
      ParetoPoint pt = evaluate_point(arch, coeffs_, hw_, wl_, obj_, tag_, opt_.latency_mode);
      const bool feasible =
          !(hw_.memory_budget_bytes > 0.0 && pt.memory > hw_.memory_budget_bytes);
      if (feasible) {
        ref_lat_ = std::max(ref_lat_, pt.latency);
        ref_loss_ = std::max(ref_loss_, pt.loss);
        feasible_.push_back(Evaluated{idx, std::move(pt), true});
      }
    }
    return static_cast<int>(fresh.size());
  }

  // Draws up to k unseen indices, without replacement, deterministically.
  std::vector<std::size_t> draw_unseen(int k, std::mt19937_64& rng) {
    std::vector<std::size_t> out;
    // Compact the remaining pool lazily.
    remaining_.erase(std::remove_if(remaining_.begin(), remaining_.end(),
                                    [&](std::size_t i) { return seen_[i]; }),
                     remaining_.end());
    for (int i = 0; i < k && !remaining_.empty(); ++i) {
      std::uniform_int_distribution<std::size_t> pick(0, remaining_.size() - 1);
      const std::size_t j = pick(rng);
      out.push_back(remaining_[j]);
      std::swap(remaining_[j], remaining_.back());
      remaining_.pop_back();
    }
    return out;
  }

  std::vector<ParetoPoint> feasible_points() const {
    std::vector<ParetoPoint> pts;
    pts.reserve(feasible_.size());
    for (const auto& e : feasible_) pts.push_back(e.point);
    return pts;
  }

  std::size_t index_of_frontier_point(const ParetoPoint& p) const {
    for (const auto& e : feasible_)
      if (e.point.latency == p.latency && e.point.loss == p.loss &&
          e.point.memory == p.memory && theta_key(e.point.arch) == theta_key(p.arch))
        return e.index;
    return seen_.size();
  }

  double ref_lat() const { return ref_lat_; }
  double ref_loss() const { return ref_loss_; }
  std::size_t feasible_count() const { return feasible_.size(); }

private:
  const SearchSpace& space_;
  const ScalingLawCoefficients& coeffs_;
  const HardwareSpec& hw_;
  const WorkloadSpec& wl_;
  Objective obj_;
  std::string tag_;
  ParetoOptions opt_;
  std::vector<bool> seen_;
  std::vector<std::size_t> remaining_;
  std::vector<Evaluated> feasible_;
  double ref_lat_ = 0.0;
  double ref_loss_ = 0.0;
};

// Flat index <-> per-axis coordinates (row-major depth, width, moe, n_kv, ratio).
std::array<std::size_t, 5> axis_sizes(const SearchSpace& s) {
  return {s.depths.size(), s.widths.size(), s.moe.size(), s.n_kv_options.size(),
          s.ffn_ratios.size()};
}

std::array<std::size_t, 5> to_coords(const SearchSpace& s, std::size_t idx) {
  const auto n = axis_sizes(s);
  std::array<std::size_t, 5> c{};
  c[4] = idx % n[4];
  idx /= n[4];
  c[3] = idx % n[3];
  idx /= n[3];
  c[2] = idx % n[2];
  idx /= n[2];
  c[1] = idx % n[1];
  idx /= n[1];
  c[0] = idx;
  return c;
}

std::size_t from_coords(const SearchSpace& s, const std::array<std::size_t, 5>& c) {
  const auto n = axis_sizes(s);
  return (((c[0] * n[1] + c[1]) * n[2] + c[2]) * n[3] + c[3]) * n[4] + c[4];
}

std::vector<std::size_t> latin_hypercube(const SearchSpace& space, int n_samples,
                                         std::mt19937_64& rng) {
  const auto sizes = axis_sizes(space);
  std::array<std::vector<int>, 5> strata;
  for (std::size_t a = 0; a < 5; ++a) {
    strata[a].resize(static_cast<std::size_t>(n_samples));
    std::iota(strata[a].begin(), strata[a].end(), 0);
    std::shuffle(strata[a].begin(), strata[a].end(), rng);
  }
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::set<std::size_t> used;
  std::vector<std::size_t> out;
  for (int s = 0; s < n_samples; ++s) {
    std::size_t idx = 0;
    bool fresh = false;
    for (int attempt = 0; attempt < 10 && !fresh; ++attempt) {
      std::array<std::size_t, 5> c{};
      for (std::size_t a = 0; a < 5; ++a) {
        const double u = (strata[a][static_cast<std::size_t>(s)] + unit(rng)) / n_samples;
        c[a] = std::min(static_cast<std::size_t>(u * sizes[a]), sizes[a] - 1);
      }
      idx = from_coords(space, c);
      fresh = used.insert(idx).second;
    }
    if (fresh) out.push_back(idx);
  }
  return out;
}

}  // namespace

Frontier search_pareto(const SearchSpace& space, const ScalingLawCoefficients& coeffs,
                       const HardwareSpec& hardware, const WorkloadSpec& workload,
                       Objective objective, const PrecisionPreset& precision,
                       const ParetoOptions& options) {
  space.validate();
  coeffs.validate();
  workload.validate();
  const HardwareSpec hw = with_precision(hardware, precision);
  hw.validate();

  SearchState state(space, coeffs, hw, workload, objective, precision.name, options);

  if (options.enumerate) {
    std::vector<std::size_t> all(space.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    state.evaluate_batch(all);
    if (state.feasible_count() == 0)
      throw InfeasibleError("no configuration fits the memory budget");
    Frontier f = build_frontier(state.feasible_points());
    f.hypervolume = frontier_hypervolume(f.points, state.ref_lat(), state.ref_loss());
    f.rounds = 1;
    f.samples_per_round = {static_cast<int>(space.size())};
    f.dominated_count = static_cast<int>(state.feasible_count() - f.points.size());
    return f;
  }

  std::mt19937_64 rng(options.seed);
  Frontier frontier;
  double prev_hv = 0.0;
  std::vector<int> per_round;

  // Seeding round: Latin-hypercube over the grid.
  {
    const int n0 = std::max(1, options.initial);
    per_round.push_back(state.evaluate_batch(latin_hypercube(space, n0, rng)));
  }

  const auto sizes = axis_sizes(space);
  int rounds = 1;
  for (; rounds <= options.max_rounds; ++rounds) {
    if (state.feasible_count() == 0) {
      // Keep sampling until something fits or the space is exhausted.
      const auto extra = state.draw_unseen(options.initial, rng);
      if (extra.empty()) throw InfeasibleError("no configuration fits the memory budget");
      per_round.push_back(state.evaluate_batch(extra));
      continue;
    }
    Frontier current = build_frontier(state.feasible_points());
    const double hv =
        frontier_hypervolume(current.points, state.ref_lat(), state.ref_loss());
    const bool grew = current.points.size() != frontier.points.size() ||
                      !std::equal(current.points.begin(), current.points.end(),
                                  frontier.points.begin(),
                                  [](const ParetoPoint& a, const ParetoPoint& b) {
                                    return a.latency == b.latency && a.loss == b.loss;
                                  });
    const double hv_change = std::abs(hv - prev_hv) / std::max(hv, 1e-300);
    frontier = std::move(current);
    frontier.hypervolume = hv;
    if (rounds > 1 && (!grew || hv_change < options.hypervolume_tol)) break;
    prev_hv = hv;

    std::vector<std::size_t> batch;

    // Gap sampling: for each latency gap above the median, draw candidates
    // whose latency falls inside the gap.
    if (frontier.points.size() >= 3) {
      std::vector<double> gaps;
      for (std::size_t i = 0; i + 1 < frontier.points.size(); ++i)
        gaps.push_back(frontier.points[i + 1].latency - frontier.points[i].latency);
      std::vector<double> sorted = gaps;
      std::sort(sorted.begin(), sorted.end());
      const double median = sorted[sorted.size() / 2];
      for (std::size_t i = 0; i + 1 < frontier.points.size(); ++i) {
        if (gaps[i] <= median) continue;
        const double lo = frontier.points[i].latency;
        const double hi = frontier.points[i + 1].latency;
        int found = 0;
        std::uniform_int_distribution<std::size_t> pick(0, space.size() - 1);
        for (int attempt = 0; attempt < 32 * options.gap_k && found < options.gap_k;
             ++attempt) {
          const std::size_t idx = pick(rng);
          const ParetoPoint cand = evaluate_point(space.at(idx), coeffs, hw, workload,
                                                  objective, precision.name,
                                                  options.latency_mode);
          if (cand.latency > lo && cand.latency < hi) {
            batch.push_back(idx);
            ++found;
          }
        }
      }
    }

    // 1-step grid neighbors of every frontier point.
    for (const auto& p : frontier.points) {
      const std::size_t idx = state.index_of_frontier_point(p);
      if (idx >= space.size()) continue;
      const auto c = to_coords(space, idx);
      for (std::size_t a = 0; a < 5; ++a) {
        for (int step : {-1, 1}) {
          const long long nc = static_cast<long long>(c[a]) + step;
          if (nc < 0 || nc >= static_cast<long long>(sizes[a])) continue;
          auto c2 = c;
          c2[a] = static_cast<std::size_t>(nc);
          batch.push_back(from_coords(space, c2));
        }
      }
    }

    // Exploration: unseen configurations, without replacement.
    const auto explore = state.draw_unseen(options.initial, rng);
    batch.insert(batch.end(), explore.begin(), explore.end());

    per_round.push_back(state.evaluate_batch(batch));
  }

  if (state.feasible_count() == 0)
    throw InfeasibleError("no configuration fits the memory budget");
  // Fold any evaluations from the final round into the reported frontier.
  frontier = build_frontier(state.feasible_points());
  frontier.hypervolume =
      frontier_hypervolume(frontier.points, state.ref_lat(), state.ref_loss());
  frontier.rounds = std::min(rounds, options.max_rounds);
  frontier.samples_per_round = per_round;
  frontier.dominated_count =
      static_cast<int>(state.feasible_count() - frontier.points.size());
  return frontier;
}

}  // namespace archopt
