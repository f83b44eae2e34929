#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "vrp/demand_pricing.hpp"
#include "vrp/dispatch_calibration.hpp"
#include "vrp/equilibrium.hpp"
#include "vrp/policy_oracle.hpp"
#include "vrp/revenue_sharing.hpp"
#include "vrp/trajectory.hpp"

namespace vrp {

using json = nlohmann::ordered_json;

void to_json(json& j, const GridCurve& c);
void to_json(json& j, const CostSpec& c);
void to_json(json& j, const GridModel& m);
void to_json(json& j, const DemandModel& d);
void to_json(json& j, const PeriodSolution& s);
void to_json(json& j, const SharingSolution& s);
void to_json(json& j, const ExpansionSolution& s);
void to_json(json& j, const EquilibriumResult& r);
void to_json(json& j, const PeriodRecord& r);
void to_json(json& j, const Trajectory& t);
void to_json(json& j, const ReachabilityCertificate& c);
void to_json(json& j, const DominanceReport& r);
void to_json(json& j, const PropertyCheck& c);
void to_json(json& j, const ConditionReport& r);
void to_json(json& j, const KktResiduals& k);
void to_json(json& j, const CalibrationOutput& c);

/// Parsers report the JSON path of the offending field, e.g. "grid.emissions.kind".
GridCurve grid_curve_from_json(const json& j, const std::string& where);
CostSpec cost_spec_from_json(const json& j, const std::string& where);
GridModel grid_model_from_json(const json& j, const std::string& where = "grid");

/// Reads a whole JSON file; syntax errors carry line and column.
json read_json_file(const std::string& path);
void write_json_file(const json& j, const std::string& path);

/// Fixed column order: t,Q,p,q,gamma,R,phase,e
inline constexpr const char* kTrajectoryCsvHeader = "t,Q,p,q,gamma,R,phase,e";

std::string trajectory_csv(const Trajectory& t);
void write_trajectory_csv(const Trajectory& t, const std::string& path);

/// Rebuilds the CSV columns; flags and termination are not part of the CSV.
std::vector<PeriodRecord> read_trajectory_csv(const std::string& path);

/// One "t,<column>" file per panel: Q, renewable share, e, p*, q*, gamma*.
/// Renewable share needs the grid's mean load and is NaN without it.
std::vector<std::string> write_plot_files(const Trajectory& t, const GridModel& model,
                                          double wind_cf, const std::string& dir);

}  // namespace vrp
