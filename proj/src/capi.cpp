#include "archopt.h"

#include <cstring>
#include <new>
#include <string>

#include "archopt/json_io.hpp"

using namespace archopt;

struct archopt_session {
  std::string last_error;
};

namespace {

char* dup_string(const std::string& s) {
  char* out = new (std::nothrow) char[s.size() + 1];
  if (!out) return nullptr;
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

template <typename Fn>
archopt_status run(archopt_session* session, char** out_json, Fn&& fn) {
  if (!session) return ARCHOPT_INTERNAL;
  session->last_error.clear();
  if (out_json) *out_json = nullptr;
  try {
    const json result = fn();
    if (out_json) {
      *out_json = dup_string(result.dump(2));
      if (!*out_json) {
        session->last_error = "out of memory";
        return ARCHOPT_INTERNAL;
      }
    }
    return ARCHOPT_OK;
  } catch (const Error& e) {
    session->last_error = e.what();
    return static_cast<archopt_status>(static_cast<int>(e.status()));
  } catch (const std::exception& e) {
    session->last_error = e.what();
    return ARCHOPT_INTERNAL;
  }
}

json parse_arg(const char* text, const char* what) {
  if (!text) throw ParseError(std::string("missing ") + what);
  return parse_json(text);
}

ScalingLawCoefficients coeffs_arg(const char* coeffs_json) {
  if (!coeffs_json) return reference_coefficients();
  return coeffs_from_json(parse_json(coeffs_json));
}

LatencyTargets targets_from_json(const json& j) {
  LatencyTargets t;
  if (j.is_null()) return t;
  if (!j.is_object()) throw ParseError("targets must be a JSON object");
  if (j.contains("t_prefill")) t.t_prefill = j.at("t_prefill").get<double>();
  if (j.contains("t_decode")) t.t_decode = j.at("t_decode").get<double>();
  if (j.contains("t_total")) t.t_total = j.at("t_total").get<double>();
  return t;
}

}  // namespace

extern "C" {

archopt_session* archopt_session_new(void) { return new (std::nothrow) archopt_session; }

void archopt_session_free(archopt_session* session) { delete session; }

const char* archopt_last_error(const archopt_session* session) {
  return session ? session->last_error.c_str() : "null session";
}

const char* archopt_version(void) { return "0.1.0"; }

void archopt_string_free(char* str) { delete[] str; }

archopt_status archopt_predict_loss(archopt_session* session, const char* arch_json,
                                    const char* coeffs_json, char** out_json) {
  return run(session, out_json, [&] {
    const ArchitectureConfig arch = arch_from_json(parse_arg(arch_json, "architecture"));
    const ScalingLawCoefficients coeffs = coeffs_arg(coeffs_json);
    coeffs.validate();
    const LossBreakdown b = predict_loss_breakdown(arch, coeffs);
    return json{{"loss", b.total()},
                {"terms",
                 {{"depth", b.depth_term},
                  {"sparsity", b.sparsity_term},
                  {"capacity", b.capacity_term},
                  {"kv", b.kv_term},
                  {"irreducible", b.irreducible}}}};
  });
}

archopt_status archopt_predict_latency(archopt_session* session, const char* arch_json,
                                       const char* hardware_json, const char* workload_json,
                                       const char* options_json, char** out_json) {
  return run(session, out_json, [&] {
    const ArchitectureConfig arch = arch_from_json(parse_arg(arch_json, "architecture"));
    const HardwareSpec hw = hardware_from_json(parse_arg(hardware_json, "hardware"));
    const WorkloadSpec wl = workload_from_json(parse_arg(workload_json, "workload"));
    LatencyMode mode = LatencyMode::dominant;
    if (options_json) {
      const json opt = parse_json(options_json);
      const std::string m = opt.value("mode", std::string("dominant"));
      if (m == "full")
        mode = LatencyMode::full;
      else if (m != "dominant" && m != "closed-form")
        throw ValidationError("mode must be dominant|closed-form|full");
    }

    json out;
    out["mode"] = mode == LatencyMode::full ? "full" : "dominant";
    std::vector<PhaseBreakdown> phases;
    if (wl.seq_in > 0) {
      const PhaseBreakdown pre = prefill_breakdown(arch, wl, hw);
      out["prefill"] = breakdown_to_json(pre);
      phases.push_back(pre);
    } else {
      out["prefill"] = nullptr;
    }
    if (wl.seq_out > 0) {
      const PhaseBreakdown dec = decode_total_breakdown(arch, wl, hw);
      out["decode"] = breakdown_to_json(dec);
      phases.push_back(dec);
    } else {
      out["decode"] = nullptr;
    }
    const double pre_s = prefill_latency(
        arch, wl, hw, mode == LatencyMode::full ? PrefillMode::full : PrefillMode::dominant);
    const double dec_s = decode_latency(
        arch, wl, hw, mode == LatencyMode::full ? DecodeMode::full : DecodeMode::closed_form);
    out["latency"] =
        json{{"prefill_s", pre_s}, {"decode_s", dec_s}, {"total_s", pre_s + dec_s}};
    out["memory_bytes"] = memory_footprint(arch, hw);
    out["csv"] = breakdown_to_csv(phases);
    return out;
  });
}

archopt_status archopt_solve(archopt_session* session, const char* request_json,
                             char** out_json) {
  return run(session, out_json, [&] {
    const json req = parse_arg(request_json, "request");
    if (!req.is_object()) throw ParseError("request must be a JSON object");

    TheoryInputs inputs;
    inputs.coeffs = req.contains("coeffs") ? coeffs_from_json(req.at("coeffs"))
                                           : reference_coefficients();
    inputs.hardware = hardware_from_json(req.at("hardware"));
    inputs.workload = workload_from_json(req.at("workload"));
    inputs.budgets = normalize_budgets(inputs.hardware, inputs.workload,
                                       targets_from_json(req.value("targets", json())));
    if (req.contains("rho_min")) inputs.rho_min = req.at("rho_min").get<double>();
    if (req.contains("width")) {
      const json& w = req.at("width");
      const std::string mode = w.value("mode", std::string("sweep"));
      if (mode == "sweep")
        inputs.width_mode = WidthMode::sweep;
      else if (mode == "fixed")
        inputs.width_mode = WidthMode::fixed;
      else if (mode == "continuous")
        inputs.width_mode = WidthMode::continuous;
      else
        throw ValidationError("width mode must be sweep|fixed|continuous");
      if (w.contains("value")) inputs.fixed_width = w.at("value").get<double>();
      if (w.contains("grid")) inputs.width_grid = w.at("grid").get<std::vector<double>>();
    }

    const std::string case_str = req.value("case", std::string("auto"));
    OptimalSolution sol = [&] {
      if (case_str == "auto") return solve_auto(inputs);
      const auto cs = case_from_name(case_str);
      if (!cs) throw ValidationError("unknown case: " + case_str);
      return solve_case(*cs, inputs);
    }();

    const SearchSpace space = default_search_space();
    const ArchitectureConfig snapped = snap_to_grid(sol.arch, space);
    const double loss_snapped = predict_loss(snapped, inputs.coeffs);
    json out = solution_to_json(sol, snapped, loss_snapped);
    RegimeReport report = classify_regime(inputs.budgets);
    if (case_str == "auto") report = classify_regime_active_set(inputs);
    out["regime_report"] = regime_report_to_json(report);
    out["budgets"] = budgets_to_json(inputs.budgets);

    if (req.value("verify", false)) {
      const OracleResult oracle = numerical_oracle(sol.case_id, inputs);
      out["oracle"] = json{
          {"loss", oracle.loss},
          {"theta", arch_to_json(oracle.arch)},
          {"evaluated", oracle.evaluated},
          {"loss_gap_rel", (sol.predicted_loss - oracle.loss) / oracle.loss}};
    }
    return out;
  });
}

archopt_status archopt_pareto(archopt_session* session, const char* request_json,
                              char** out_json) {
  return run(session, out_json, [&] {
    const json req = parse_arg(request_json, "request");
    if (!req.is_object()) throw ParseError("request must be a JSON object");

    const ScalingLawCoefficients coeffs = req.contains("coeffs")
                                              ? coeffs_from_json(req.at("coeffs"))
                                              : reference_coefficients();
    const HardwareSpec hw = hardware_from_json(req.at("hardware"));
    const WorkloadSpec wl = workload_from_json(req.at("workload"));
    const SearchSpace space = req.contains("space") && !req.at("space").is_null()
                                  ? search_space_from_json(req.at("space"))
                                  : default_search_space();
    const Objective objective =
        objective_from_name(req.value("objective", std::string("decode")));
    const PrecisionPreset precision =
        precision_from_name(req.value("precision", std::string("fp16")));

    ParetoOptions opt;
    if (req.contains("options")) {
      const json& o = req.at("options");
      opt.seed = o.value("seed", opt.seed);
      opt.initial = o.value("initial", opt.initial);
      opt.gap_k = o.value("gap_k", opt.gap_k);
      opt.max_rounds = o.value("max_rounds", opt.max_rounds);
      opt.hypervolume_tol = o.value("hypervolume_tol", opt.hypervolume_tol);
      opt.enumerate = o.value("enumerate", opt.enumerate);
      if (o.value("mode", std::string("dominant")) == "full")
        opt.latency_mode = LatencyMode::full;
    }

    const Frontier f = search_pareto(space, coeffs, hw, wl, objective, precision, opt);
    json out = frontier_to_json(f);
    out["csv"] = frontier_to_csv(f);
    out["xy"] = frontier_to_xy(f);
    return out;
  });
}

archopt_status archopt_fit(archopt_session* session, const char* records_csv,
                           const char* options_json, char** out_json) {
  return run(session, out_json, [&] {
    if (!records_csv) throw ParseError("missing training records");
    const std::vector<TrainingRunRecord> records = records_from_csv(records_csv);
    FitOptions opt;
    if (options_json) {
      const json o = parse_json(options_json);
      opt.seed = o.value("seed", opt.seed);
      opt.holdout_fraction = o.value("holdout_fraction", opt.holdout_fraction);
      opt.multistarts = o.value("multistarts", opt.multistarts);
      opt.max_iterations = o.value("max_iterations", opt.max_iterations);
    }
    const FitResult result = fit_scaling_law(records, opt);
    return json{{"coeffs", coeffs_to_json(result.coeffs)},
                {"report", fit_report_to_json(result.report)}};
  });
}

}  // extern "C"
