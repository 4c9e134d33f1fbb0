// Command-line front end. All computation goes through the C API in
// archopt.h; this file only parses flags, reads/writes files, and converts
// human units at the boundary.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "archopt.h"
#include "archopt/units.hpp"

namespace {

using nlohmann::json;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw archopt::ParseError("cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_output(const std::string& out_path, const std::string& data) {
  if (out_path.empty()) {
    std::cout << data;
    if (!data.empty() && data.back() != '\n') std::cout << '\n';
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw archopt::ValidationError("cannot write file: " + out_path);
  out << data;
  std::cerr << "wrote " << out_path << "\n";
}

// Hardware assembled from a JSON file, direct flags, or both (flags win).
struct HardwareFlags {
  std::string file;
  std::string peak_flops, bandwidth, memory;
  std::string precision;  // "", "fp16", "int8"

  void attach(CLI::App* cmd) {
    cmd->add_option("--hardware", file, "hardware spec JSON file");
    cmd->add_option("--peak-flops", peak_flops, "peak compute, e.g. 10TOPS");
    cmd->add_option("--bandwidth", bandwidth, "memory bandwidth, e.g. 50GB/s");
    cmd->add_option("--memory", memory, "memory budget, e.g. 4GB");
    cmd->add_option("--precision", precision, "byte-width preset: fp16|int8")
        ->check(CLI::IsMember({"fp16", "int8"}));
  }

  json build() const {
    json hw = json::object();
    if (!file.empty()) hw = json::parse(read_file(file));
    if (!peak_flops.empty()) hw["peak_flops"] = archopt::units::parse_flops(peak_flops);
    if (!bandwidth.empty())
      hw["bandwidth_bytes_per_s"] = archopt::units::parse_bandwidth(bandwidth);
    if (!memory.empty()) hw["memory_budget_bytes"] = archopt::units::parse_bytes(memory);
    if (!precision.empty()) {
      const double b = precision == "int8" ? 1.0 : 2.0;
      hw["bytes_weight"] = b;
      hw["bytes_activation"] = b;
      hw["bytes_kv"] = b;
    }
    if (!hw.contains("peak_flops") || !hw.contains("bandwidth_bytes_per_s") ||
        !hw.contains("memory_budget_bytes"))
      throw archopt::ValidationError(
          "hardware requires peak_flops, bandwidth and memory (via --hardware file or flags)");
    return hw;
  }
};

struct WorkloadFlags {
  std::string file;
  int batch = -1, seq_in = -1, seq_out = -1;

  void attach(CLI::App* cmd) {
    cmd->add_option("--workload", file, "workload spec JSON file");
    cmd->add_option("--batch", batch, "batch size");
    cmd->add_option("--seq-in", seq_in, "input (prefill) tokens");
    cmd->add_option("--seq-out", seq_out, "generated (decode) tokens");
  }

  json build() const {
    json wl = json::object();
    if (!file.empty()) wl = json::parse(read_file(file));
    if (batch >= 0) wl["batch"] = batch;
    if (seq_in >= 0) wl["seq_in"] = seq_in;
    if (seq_out >= 0) wl["seq_out"] = seq_out;
    if (!wl.contains("batch")) wl["batch"] = 1;
    if (!wl.contains("seq_in") || !wl.contains("seq_out"))
      throw archopt::ValidationError(
          "workload requires seq_in and seq_out (via --workload file or flags)");
    return wl;
  }
};

json load_coeffs(const std::string& path_or_preset) {
  if (path_or_preset.empty() || path_or_preset == "reference") return json("reference");
  return json::parse(read_file(path_or_preset));
}

struct ApiCall {
  archopt_session* session;
  int run(archopt_status status, char* out, const std::string& out_path,
          const std::string& field = "") {
    if (status != ARCHOPT_OK) {
      std::cerr << "error: " << archopt_last_error(session) << "\n";
      return static_cast<int>(status);
    }
    std::string data = out ? out : "";
    archopt_string_free(out);
    if (!field.empty()) {
      const json j = json::parse(data);
      data = j.at(field).is_string() ? j.at(field).get<std::string>() : j.at(field).dump(2);
    }
    write_output(out_path, data);
    return 0;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hardware-aware architecture analysis: loss prediction, roofline latency, "
               "constrained optimal design, and Pareto frontiers"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "worker thread cap (0 = auto)");

  std::string arch_path, coeffs_path, out_path, format = "json";
  std::uint64_t seed = 0;

  // predict-loss
  auto* loss_cmd = app.add_subcommand("predict-loss", "Predict validation loss for an architecture");
  loss_cmd->add_option("--arch", arch_path, "architecture JSON file")->required();
  loss_cmd->add_option("--coeffs", coeffs_path, "coefficients JSON file or 'reference'");
  loss_cmd->add_option("--out", out_path, "output path (default stdout)");

  // predict-latency
  auto* lat_cmd = app.add_subcommand("predict-latency", "Roofline latency and memory report");
  std::string lat_arch, lat_mode = "dominant", lat_out, lat_format = "json", lat_objective;
  HardwareFlags lat_hw;
  WorkloadFlags lat_wl;
  lat_cmd->add_option("--arch", lat_arch, "architecture JSON file")->required();
  lat_hw.attach(lat_cmd);
  lat_wl.attach(lat_cmd);
  lat_cmd->add_option("--mode", lat_mode, "latency model: dominant|closed-form|full")
      ->check(CLI::IsMember({"dominant", "closed-form", "full"}));
  lat_cmd->add_option("--objective", lat_objective, "phase of interest: prefill|decode|total")
      ->check(CLI::IsMember({"prefill", "decode", "total"}));
  lat_cmd->add_option("--format", lat_format, "json|csv")->check(CLI::IsMember({"json", "csv"}));
  lat_cmd->add_option("--out", lat_out, "output path (default stdout)");

  // solve
  auto* solve_cmd = app.add_subcommand("solve", "Closed-form optimal architecture under constraints");
  std::string solve_case = "auto", solve_coeffs, solve_out;
  std::string t_prefill, t_decode, t_total;
  std::string width_mode = "sweep";
  double width_value = 1024.0, rho_min = -1.0;
  bool verify = false;
  HardwareFlags solve_hw;
  WorkloadFlags solve_wl;
  solve_cmd->add_option("--case", solve_case, "auto|d1|d2|d3|p1|p2|p3")
      ->check(CLI::IsMember({"auto", "d1", "d2", "d3", "p1", "p2", "p3"}));
  solve_hw.attach(solve_cmd);
  solve_wl.attach(solve_cmd);
  solve_cmd->add_option("--coeffs", solve_coeffs, "coefficients JSON file or 'reference'");
  solve_cmd->add_option("--t-prefill", t_prefill, "prefill latency target, e.g. 100ms");
  solve_cmd->add_option("--t-decode", t_decode, "decode latency target, e.g. 100ms");
  solve_cmd->add_option("--t-total", t_total, "end-to-end latency target, e.g. 200ms");
  solve_cmd->add_option("--rho-min", rho_min, "lower bound on the activation rate");
  solve_cmd->add_option("--width-mode", width_mode, "sweep|fixed|continuous")
      ->check(CLI::IsMember({"sweep", "fixed", "continuous"}));
  solve_cmd->add_option("--width", width_value, "width for --width-mode fixed");
  solve_cmd->add_flag("--verify", verify, "cross-check against the numerical oracle");
  solve_cmd->add_option("--out", solve_out, "output path (default stdout)");

  // pareto
  auto* pareto_cmd = app.add_subcommand("pareto", "Loss-latency Pareto frontier over the design grid");
  std::string space_path, pareto_coeffs, pareto_objective = "decode";
  std::string pareto_out, pareto_format = "json";
  int initial = 2000;
  bool enumerate = false, xy = false;
  std::string pareto_mode = "dominant";
  HardwareFlags pareto_hw;
  WorkloadFlags pareto_wl;
  pareto_cmd->add_option("--space", space_path, "search-space JSON file (default grid if absent)");
  pareto_hw.attach(pareto_cmd);
  pareto_wl.attach(pareto_cmd);
  pareto_cmd->add_option("--coeffs", pareto_coeffs, "coefficients JSON file or 'reference'");
  pareto_cmd->add_option("--objective", pareto_objective, "prefill|decode|total")
      ->check(CLI::IsMember({"prefill", "decode", "total"}));
  pareto_cmd->add_option("--seed", seed, "sampling seed");
  pareto_cmd->add_option("--initial", initial, "Latin-hypercube seed size");
  pareto_cmd->add_flag("--enumerate", enumerate, "exhaustive evaluation instead of adaptive search");
  pareto_cmd->add_flag("--xy", xy, "emit the two-column latency,loss extract");
  pareto_cmd->add_option("--mode", pareto_mode, "latency model: dominant|full")
      ->check(CLI::IsMember({"dominant", "full"}));
  pareto_cmd->add_option("--format", pareto_format, "json|csv")
      ->check(CLI::IsMember({"json", "csv"}));
  pareto_cmd->add_option("--out", pareto_out, "output path (default stdout)");

  // fit
  auto* fit_cmd = app.add_subcommand("fit", "Fit loss-law coefficients to training runs");
  std::string runs_path, fit_out;
  double holdout = 0.2;
  std::uint64_t fit_seed = 0;
  int multistarts = 16;
  fit_cmd->add_option("--runs", runs_path, "training records CSV")->required();
  fit_cmd->add_option("--holdout", holdout, "validation fraction (0 disables)");
  fit_cmd->add_option("--seed", fit_seed, "multistart seed");
  fit_cmd->add_option("--multistarts", multistarts, "number of fit restarts");
  fit_cmd->add_option("--out", fit_out, "output path (default stdout)");

  CLI11_PARSE(app, argc, argv);

  archopt_session* session = archopt_session_new();
  if (!session) {
    std::cerr << "error: cannot create session\n";
    return 1;
  }
  ApiCall api{session};
  int rc = 0;
  try {
    if (*loss_cmd) {
      const std::string arch = read_file(arch_path);
      const std::string coeffs = load_coeffs(coeffs_path).dump();
      char* out = nullptr;
      const archopt_status status = archopt_predict_loss(session, arch.c_str(), coeffs.c_str(), &out);
      rc = api.run(status, out, out_path);
    } else if (*lat_cmd) {
      const std::string arch = read_file(lat_arch);
      const std::string hw = lat_hw.build().dump();
      const std::string wl = lat_wl.build().dump();
      const std::string opts = json{{"mode", lat_mode}}.dump();
      if (!lat_objective.empty()) std::cerr << "objective: " << lat_objective << "\n";
      char* out = nullptr;
      const archopt_status status = archopt_predict_latency(session, arch.c_str(), hw.c_str(),
                                                            wl.c_str(), opts.c_str(), &out);
      rc = api.run(status, out, lat_out, lat_format == "csv" ? "csv" : "");
    } else if (*solve_cmd) {
      json req;
      req["coeffs"] = load_coeffs(solve_coeffs);
      req["hardware"] = solve_hw.build();
      req["workload"] = solve_wl.build();
      json targets = json::object();
      if (!t_prefill.empty()) targets["t_prefill"] = archopt::units::parse_seconds(t_prefill);
      if (!t_decode.empty()) targets["t_decode"] = archopt::units::parse_seconds(t_decode);
      if (!t_total.empty()) targets["t_total"] = archopt::units::parse_seconds(t_total);
      req["targets"] = targets;
      req["case"] = solve_case;
      if (rho_min > 0) req["rho_min"] = rho_min;
      req["width"] = json{{"mode", width_mode}, {"value", width_value}};
      req["verify"] = verify;
      char* out = nullptr;
      const archopt_status status = archopt_solve(session, req.dump().c_str(), &out);
      if (status == ARCHOPT_OK && verify && out) {
        const json result = json::parse(out);
        std::cerr << "regime: " << result.at("regime").get<std::string>()
                  << "  oracle loss gap: " << result.at("oracle").at("loss_gap_rel").get<double>()
                  << "\n";
      }
      rc = api.run(status, out, solve_out);
    } else if (*pareto_cmd) {
      json req;
      req["coeffs"] = load_coeffs(pareto_coeffs);
      req["hardware"] = pareto_hw.build();
      req["workload"] = pareto_wl.build();
      if (!space_path.empty()) req["space"] = json::parse(read_file(space_path));
      req["objective"] = pareto_objective;
      req["precision"] = pareto_hw.precision.empty() ? "fp16" : pareto_hw.precision;
      req["options"] = json{{"seed", seed},
                            {"initial", initial},
                            {"enumerate", enumerate},
                            {"mode", pareto_mode}};
      char* out = nullptr;
      const archopt_status status = archopt_pareto(session, req.dump().c_str(), &out);
      std::string field;
      if (xy)
        field = "xy";
      else if (pareto_format == "csv")
        field = "csv";
      rc = api.run(status, out, pareto_out, field);
    } else if (*fit_cmd) {
      const std::string runs = read_file(runs_path);
      const std::string opts = json{{"seed", fit_seed},
                                    {"holdout_fraction", holdout},
                                    {"multistarts", multistarts}}
                                   .dump();
      char* out = nullptr;
      const archopt_status status = archopt_fit(session, runs.c_str(), opts.c_str(), &out);
      rc = api.run(status, out, fit_out);
    }
  } catch (const archopt::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    rc = static_cast<int>(e.status());
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    rc = 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    rc = 1;
  }
  archopt_session_free(session);
  return rc;
}
