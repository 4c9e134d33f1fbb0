#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "archopt/fit.hpp"
#include "archopt/pareto.hpp"
#include "archopt/regimes.hpp"
#include "archopt/roofline.hpp"
#include "archopt/solver.hpp"

namespace archopt {

using json = nlohmann::json;

// Wraps nlohmann parsing so syntax errors surface as ParseError with the
// byte-offset diagnostics.
json parse_json(const std::string& text);

ArchitectureConfig arch_from_json(const json& j);
json arch_to_json(const ArchitectureConfig& arch);

HardwareSpec hardware_from_json(const json& j);
json hardware_to_json(const HardwareSpec& hw);

WorkloadSpec workload_from_json(const json& j);
json workload_to_json(const WorkloadSpec& wl);

// Accepts either the preset name "reference" or a full coefficient object.
ScalingLawCoefficients coeffs_from_json(const json& j);
json coeffs_to_json(const ScalingLawCoefficients& c);

SearchSpace search_space_from_json(const json& j);
json search_space_to_json(const SearchSpace& s);

// Training records CSV: header `layers,width,ffn_ratio,activation_rate,gqa,loss`.
std::vector<TrainingRunRecord> records_from_csv(const std::string& text);
std::string records_to_csv(const std::vector<TrainingRunRecord>& records);

json fit_report_to_json(const FitReport& report);

json breakdown_to_json(const PhaseBreakdown& b);
std::string breakdown_to_csv(const std::vector<PhaseBreakdown>& phases);

json budgets_to_json(const Budgets& b);
json regime_report_to_json(const RegimeReport& r);
json slacks_to_json(const ConstraintSlacks& s);

json solution_to_json(const OptimalSolution& sol, const ArchitectureConfig& snapped,
                      double loss_snapped);

json frontier_to_json(const Frontier& f);
// Columns: latency_s,loss,memory_bytes,layers,width,ffn_ratio,experts_total,
// experts_active,gqa,precision.
std::string frontier_to_csv(const Frontier& f);
// Two-column latency,loss extract for plotting.
std::string frontier_to_xy(const Frontier& f);

}  // namespace archopt
