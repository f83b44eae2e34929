#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "vrp/serialization.hpp"

namespace vrp {

inline constexpr int kScenarioSchemaVersion = 1;

enum class OutputFormat { Csv, Json };

OutputFormat parse_output_format(const std::string& s);
std::string to_string(OutputFormat f);

struct VerifySettings {
    int condition_samples = 1001;
    int reachability_samples = 500;
    int action_grid_size = 5;
    int enumeration_horizon = 3;
    std::int64_t max_policies = 100000;
    std::uint64_t seed = 0;
    int price_scan_points = 1000000;
    int root_scan_points = 100000;
    int kkt_samples = 50;
};

struct Scenario {
    int schema_version = kScenarioSchemaVersion;
    std::string name;
    std::string source_path;
    GridModel grid;
    DemandModel demand;
    SimulationConfig simulation;
    double wind_cf = 0.35;
    OutputFormat format = OutputFormat::Csv;
    std::string out_dir = "out";
    ReachabilityPins pins;
    VerifySettings verify;
    std::optional<CalibrationOutput> calibration;
};

/// Loads and validates a scenario. The grid block may be inline ("grid"),
/// a separate GridModel file ("grid_file") or a dispatch calibration
/// ("calibration"). Relative paths resolve against the scenario directory.
/// Errors name the file, the approximate line and the JSON path.
Scenario load_scenario(const std::string& path);

Scenario scenario_from_json(const json& j, const std::string& source_path,
                            const std::string& text = {});

/// p [M$/GW/yr] -> p / (8.76 cf) [$/MWh].
double convert_price_units(double p_capacity, double wind_cf);
/// p [$/MWh] -> p * 8.76 cf [M$/GW/yr].
double convert_price_units_inverse(double p_energy, double wind_cf);

}  // namespace vrp
