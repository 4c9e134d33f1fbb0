#include "archopt/json_io.hpp"

#include <cmath>
#include <sstream>

namespace archopt {

namespace {

// Field access with schema-error reporting.
const json& need(const json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end()) throw ParseError(std::string("missing required field: ") + key);
  return *it;
}

double need_num(const json& j, const char* key) {
  const json& v = need(j, key);
  if (!v.is_number()) throw ParseError(std::string("field must be a number: ") + key);
  return v.get<double>();
}

int need_int(const json& j, const char* key) {
  const json& v = need(j, key);
  if (!v.is_number_integer()) throw ParseError(std::string("field must be an integer: ") + key);
  return v.get<int>();
}

double opt_num(const json& j, const char* key, double fallback) {
  const auto it = j.find(key);
  if (it == j.end()) return fallback;
  if (!it->is_number()) throw ParseError(std::string("field must be a number: ") + key);
  return it->get<double>();
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

json parse_json(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(e.what());
  }
}

ArchitectureConfig arch_from_json(const json& j) {
  if (!j.is_object()) throw ParseError("architecture must be a JSON object");
  const double layers = need_num(j, "layers");
  const double width = need_num(j, "width");
  const double ffn_ratio = need_num(j, "ffn_ratio");
  const double rho = opt_num(j, "activation_rate", 1.0);
  const double gqa = opt_num(j, "gqa", 1.0);
  std::optional<HeadStructure> heads;
  if (j.contains("n_heads") || j.contains("n_kv_heads") || j.contains("head_dim"))
    heads = HeadStructure{need_int(j, "n_heads"), need_int(j, "n_kv_heads"),
                          need_int(j, "head_dim")};
  std::optional<MoEStructure> moe;
  if (j.contains("experts_total") || j.contains("experts_active")) {
    const int total = need_int(j, "experts_total");
    const int active = need_int(j, "experts_active");
    if (active < 1) throw ValidationError("experts_active must be >= 1");
    moe = MoEStructure{total, active, ffn_ratio / active};
  }
  return ArchitectureConfig(layers, width, ffn_ratio, rho, gqa, heads, moe);
}

json arch_to_json(const ArchitectureConfig& a) {
  json j{{"layers", a.layers()},
         {"width", a.width()},
         {"ffn_ratio", a.ffn_ratio()},
         {"activation_rate", a.activation_rate()},
         {"gqa", a.gqa()}};
  if (a.heads()) {
    j["n_heads"] = a.heads()->n_heads;
    j["n_kv_heads"] = a.heads()->n_kv_heads;
    j["head_dim"] = a.heads()->head_dim;
  }
  if (a.moe()) {
    j["experts_total"] = a.moe()->experts_total;
    j["experts_active"] = a.moe()->experts_active;
  }
  return j;
}

HardwareSpec hardware_from_json(const json& j) {
  if (!j.is_object()) throw ParseError("hardware must be a JSON object");
  HardwareSpec hw;
  hw.peak_flops = need_num(j, "peak_flops");
  hw.bandwidth_bytes_per_s = need_num(j, "bandwidth_bytes_per_s");
  hw.memory_budget_bytes = need_num(j, "memory_budget_bytes");
  hw.bytes_weight = opt_num(j, "bytes_weight", 2.0);
  hw.bytes_activation = opt_num(j, "bytes_activation", 2.0);
  hw.bytes_kv = opt_num(j, "bytes_kv", 2.0);
  hw.validate();
  return hw;
}

json hardware_to_json(const HardwareSpec& hw) {
  return json{{"peak_flops", hw.peak_flops},
              {"bandwidth_bytes_per_s", hw.bandwidth_bytes_per_s},
              {"memory_budget_bytes", hw.memory_budget_bytes},
              {"bytes_weight", hw.bytes_weight},
              {"bytes_activation", hw.bytes_activation},
              {"bytes_kv", hw.bytes_kv}};
}

WorkloadSpec workload_from_json(const json& j) {
  if (!j.is_object()) throw ParseError("workload must be a JSON object");
  WorkloadSpec wl;
  wl.batch = j.contains("batch") ? need_int(j, "batch") : 1;
  wl.seq_in = need_int(j, "seq_in");
  wl.seq_out = need_int(j, "seq_out");
  wl.validate();
  return wl;
}

json workload_to_json(const WorkloadSpec& wl) {
  return json{{"batch", wl.batch}, {"seq_in", wl.seq_in}, {"seq_out", wl.seq_out}};
}

ScalingLawCoefficients coeffs_from_json(const json& j) {
  if (j.is_string()) {
    const std::string name = j.get<std::string>();
    if (name == "reference") return reference_coefficients();
    throw ParseError("unknown coefficient preset: " + name);
  }
  if (!j.is_object()) throw ParseError("coefficients must be a JSON object or preset name");
  ScalingLawCoefficients c;
  c.kappa_l = need_num(j, "kappa_l");
  c.kappa_rho = need_num(j, "kappa_rho");
  c.kappa_d = need_num(j, "kappa_d");
  c.kappa_m = need_num(j, "kappa_m");
  c.alpha_l = need_num(j, "alpha_l");
  c.alpha_rho = need_num(j, "alpha_rho");
  c.alpha_r = need_num(j, "alpha_r");
  c.alpha_m = need_num(j, "alpha_m");
  c.beta_1 = need_num(j, "beta_1");
  c.beta_2 = need_num(j, "beta_2");
  c.L_inf = need_num(j, "L_inf");
  c.source = j.value("source", std::string("user"));
  c.fitted_on = j.value("fitted_on", 0);
  c.validate();
  return c;
}

json coeffs_to_json(const ScalingLawCoefficients& c) {
  return json{{"kappa_l", c.kappa_l},   {"kappa_rho", c.kappa_rho},
              {"kappa_d", c.kappa_d},   {"kappa_m", c.kappa_m},
              {"alpha_l", c.alpha_l},   {"alpha_rho", c.alpha_rho},
              {"alpha_r", c.alpha_r},   {"alpha_m", c.alpha_m},
              {"beta_1", c.beta_1},     {"beta_2", c.beta_2},
              {"L_inf", c.L_inf},       {"source", c.source},
              {"fitted_on", c.fitted_on}};
}

SearchSpace search_space_from_json(const json& j) {
  if (!j.is_object()) throw ParseError("search space must be a JSON object");
  SearchSpace s = default_search_space();
  if (j.contains("depths")) s.depths = j.at("depths").get<std::vector<int>>();
  if (j.contains("widths")) s.widths = j.at("widths").get<std::vector<int>>();
  if (j.contains("moe")) {
    s.moe.clear();
    for (const auto& pair : j.at("moe")) {
      if (!pair.is_array() || pair.size() != 2)
        throw ParseError("moe entries must be [experts_total, experts_active] pairs");
      s.moe.emplace_back(pair[0].get<int>(), pair[1].get<int>());
    }
  }
  if (j.contains("n_kv")) s.n_kv_options = j.at("n_kv").get<std::vector<int>>();
  if (j.contains("ffn_ratios")) s.ffn_ratios = j.at("ffn_ratios").get<std::vector<double>>();
  if (j.contains("head_dim")) s.head_dim = j.at("head_dim").get<int>();
  s.validate();
  return s;
}

json search_space_to_json(const SearchSpace& s) {
  json moe = json::array();
  for (const auto& [e, k] : s.moe) moe.push_back({e, k});
  return json{{"depths", s.depths},   {"widths", s.widths},
              {"moe", moe},           {"n_kv", s.n_kv_options},
              {"ffn_ratios", s.ffn_ratios}, {"head_dim", s.head_dim}};
}

std::vector<TrainingRunRecord> records_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty training records file");
  // Tolerate a UTF-8 BOM and trailing carriage returns.
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line = line.substr(3);
  auto strip = [](std::string s) {
    while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.pop_back();
    return s;
  };
  if (strip(line) != "layers,width,ffn_ratio,activation_rate,gqa,loss")
    throw ParseError(
        "training records must start with header: layers,width,ffn_ratio,activation_rate,gqa,loss");

  std::vector<TrainingRunRecord> records;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip(line);
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string cell;
    std::vector<double> vals;
    while (std::getline(row, cell, ',')) {
      try {
        vals.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw ParseError("line " + std::to_string(line_no) + ": cannot parse value '" + cell +
                         "'");
      }
    }
    if (vals.size() != 6)
      throw ParseError("line " + std::to_string(line_no) + ": expected 6 columns, got " +
                       std::to_string(vals.size()));
    records.push_back(TrainingRunRecord{
        ArchitectureConfig(vals[0], vals[1], vals[2], vals[3], vals[4]), vals[5]});
  }
  return records;
}

std::string records_to_csv(const std::vector<TrainingRunRecord>& records) {
  std::ostringstream out;
  out << "layers,width,ffn_ratio,activation_rate,gqa,loss\n";
  for (const auto& rec : records) {
    const auto& a = rec.arch;
    out << fmt(a.layers()) << ',' << fmt(a.width()) << ',' << fmt(a.ffn_ratio()) << ','
        << fmt(a.activation_rate()) << ',' << fmt(a.gqa()) << ',' << fmt(rec.observed_loss)
        << '\n';
  }
  return out.str();
}

json fit_report_to_json(const FitReport& r) {
  json j{{"train_r2", r.train_r2}, {"sse", r.sse},
         {"iterations", r.iterations}, {"best_start", r.best_start},
         {"converged", r.converged},   {"n_train", r.n_train},
         {"n_holdout", r.n_holdout}};
  if (r.has_validation)
    j["validation_r2"] = r.validation_r2;
  else
    j["validation_r2"] = nullptr;
  return j;
}

json breakdown_to_json(const PhaseBreakdown& b) {
  json rows = json::array();
  const char* phase = b.phase == Phase::prefill ? "prefill" : "decode";
  for (const auto& op : b.per_layer)
    rows.push_back(json{{"op", op_kind_name(op.op)},
                        {"phase", phase},
                        {"flops", op.flops},
                        {"bytes_w", op.bytes_weights},
                        {"bytes_a", op.bytes_activations},
                        {"bytes_kv", op.bytes_kv},
                        {"latency_s", op.latency}});
  return json{{"phase", phase},
              {"decode_step", b.decode_step},
              {"per_layer", rows},
              {"layer_latency_s", b.layer_latency},
              {"total_latency_s", b.total_latency},
              {"total_flops", b.total_flops},
              {"total_bytes", b.total_bytes}};
}

std::string breakdown_to_csv(const std::vector<PhaseBreakdown>& phases) {
  std::ostringstream out;
  out << "op,phase,flops,bytes_w,bytes_a,bytes_kv,latency_s\n";
  for (const auto& b : phases) {
    const char* phase = b.phase == Phase::prefill ? "prefill" : "decode";
    for (const auto& op : b.per_layer)
      out << op_kind_name(op.op) << ',' << phase << ',' << fmt(op.flops) << ','
          << fmt(op.bytes_weights) << ',' << fmt(op.bytes_activations) << ','
          << fmt(op.bytes_kv) << ',' << fmt(op.latency) << '\n';
    out << "total," << phase << ',' << fmt(b.total_flops) << ",,," << ','
        << fmt(b.total_latency) << '\n';
  }
  return out.str();
}

json budgets_to_json(const Budgets& b) {
  json j;
  j["f_bar_p"] = b.f_bar_p ? json(*b.f_bar_p) : json(nullptr);
  j["m_bar_d"] = b.m_bar_d ? json(*b.m_bar_d) : json(nullptr);
  j["memory_budget"] = b.memory_budget ? json(*b.memory_budget) : json(nullptr);
  j["eta"] = b.eta() ? json(*b.eta()) : json(nullptr);
  j["eta_p"] = b.eta_p() ? json(*b.eta_p()) : json(nullptr);
  return j;
}

json slacks_to_json(const ConstraintSlacks& s) {
  json j;
  j["prefill"] = s.prefill ? json(*s.prefill) : json(nullptr);
  j["decode"] = s.decode ? json(*s.decode) : json(nullptr);
  j["memory"] = s.memory ? json(*s.memory) : json(nullptr);
  return j;
}

json regime_report_to_json(const RegimeReport& r) {
  return json{{"eta", r.eta ? json(*r.eta) : json(nullptr)},
              {"eta_p", r.eta_p ? json(*r.eta_p) : json(nullptr)},
              {"label", regime_label_name(r.label)},
              {"method", r.method == RegimeMethod::active_set ? "active_set" : "ratio_heuristic"},
              {"slacks", slacks_to_json(r.slacks)}};
}

json solution_to_json(const OptimalSolution& sol, const ArchitectureConfig& snapped,
                      double loss_snapped) {
  json mult;
  mult["mu_latency"] =
      sol.multipliers.mu_latency ? json(*sol.multipliers.mu_latency) : json(nullptr);
  mult["mu_memory"] =
      sol.multipliers.mu_memory ? json(*sol.multipliers.mu_memory) : json(nullptr);
  return json{{"case", case_name(sol.case_id)},
              {"regime", regime_label_name(sol.regime)},
              {"theta", arch_to_json(sol.arch)},
              {"theta_snapped", arch_to_json(snapped)},
              {"loss", sol.predicted_loss},
              {"loss_snapped", loss_snapped},
              {"multipliers", mult},
              {"residuals",
               {{"stationarity", sol.stationarity}, {"slacks", slacks_to_json(sol.slacks)}}},
              {"fixed_point_iters", sol.fixed_point_iters},
              {"clamped", sol.clamped}};
}

json frontier_to_json(const Frontier& f) {
  json pts = json::array();
  for (const auto& p : f.points) {
    json e = arch_to_json(p.arch);
    pts.push_back(json{{"arch", e},
                       {"loss", p.loss},
                       {"latency_s", p.latency},
                       {"memory_bytes", p.memory},
                       {"objective", objective_name(p.objective)},
                       {"precision", p.precision}});
  }
  return json{{"points", pts},
              {"rounds", f.rounds},
              {"samples_per_round", f.samples_per_round},
              {"dominated_count", f.dominated_count},
              {"hypervolume", f.hypervolume}};
}

std::string frontier_to_csv(const Frontier& f) {
  std::ostringstream out;
  out << "latency_s,loss,memory_bytes,layers,width,ffn_ratio,experts_total,experts_active,gqa,"
         "precision\n";
  for (const auto& p : f.points) {
    const auto& a = p.arch;
    const int total = a.moe() ? a.moe()->experts_total : 1;
    const int active = a.moe() ? a.moe()->experts_active : 1;
    out << fmt(p.latency) << ',' << fmt(p.loss) << ',' << fmt(p.memory) << ','
        << fmt(a.layers()) << ',' << fmt(a.width()) << ',' << fmt(a.ffn_ratio()) << ','
        << total << ',' << active << ',' << fmt(a.gqa()) << ',' << p.precision << '\n';
  }
  return out.str();
}

std::string frontier_to_xy(const Frontier& f) {
  std::ostringstream out;
  out << "latency_s,loss\n";
  for (const auto& p : f.points) out << fmt(p.latency) << ',' << fmt(p.loss) << '\n';
  return out.str();
}

}  // namespace archopt
