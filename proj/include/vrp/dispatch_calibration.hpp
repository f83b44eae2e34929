#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vrp/grid_model.hpp"

namespace vrp {

struct GeneratorUnit {
    double capacity_gw = 0.0;
    double marginal_cost = 0.0;  // $/MWh
    double emission_rate = 0.0;  // ton-CO2/MWh
};

/// Thermal fleet held in merit order (ascending marginal cost, stable).
class FleetSpec {
public:
    explicit FleetSpec(std::vector<GeneratorUnit> units);

    const std::vector<GeneratorUnit>& units() const noexcept { return units_; }
    double total_capacity() const noexcept { return total_capacity_; }

private:
    std::vector<GeneratorUnit> units_;
    double total_capacity_ = 0.0;
};

struct HourlyProfiles {
    std::vector<double> load;     // GW
    std::vector<double> wind_cf;  // per-unit output in [0, 1]

    std::size_t hours() const noexcept { return load.size(); }
    double mean_cf() const;
    double mean_load() const;
    /// Throws Validation on unequal lengths, nonpositive load or cf outside [0, 1].
    void validate() const;
};

struct DispatchRecord {
    std::size_t n_units = 0;
    std::vector<double> wind_served;  // GW per hour
    std::vector<double> curtailment;
    std::vector<double> thermal;
    std::vector<double> price;        // $/MWh, 0 when wind serves all load
    std::vector<double> emissions;    // GWh * ton/MWh per hour
    std::vector<int> marginal_unit;   // index into the merit order, -1 if none
    std::vector<double> unit_output;  // hour-major, n_units per hour

    double output(std::size_t hour, std::size_t unit) const {
        return unit_output[hour * n_units + unit];
    }
    double total_emissions() const;
    double total_wind_served() const;
};

/// Single-bus merit-order dispatch at installed wind capacity q_wind.
/// Throws Shortage naming the first hour whose residual load exceeds the fleet.
DispatchRecord merit_order_dispatch(const FleetSpec& fleet, const HourlyProfiles& profiles,
                                    double q_wind);

struct CalibrationSample {
    double q = 0.0;
    double e = 0.0;
    double f = 0.0;
    double pi = 0.0;
};

struct CalibrationOutput {
    std::vector<CalibrationSample> raw;      // straight from dispatch
    std::vector<CalibrationSample> samples;  // after isotonic correction of e and pi
    bool isotonic_e_applied = false;
    bool isotonic_pi_applied = false;
    double wind_cf = 0.0;
    double mean_load_gw = 0.0;

    GridCurve emissions_curve() const;
    GridCurve delivered_curve() const;
    GridCurve energy_value_curve() const;

    GridModel to_grid_model(const CostSpec& cost_renewable, const CostSpec& cost_system,
                            double invest_cost) const;
};

/// Nonincreasing least-squares fit (pool adjacent violators, equal weights).
std::vector<double> isotonic_nonincreasing(const std::vector<double>& values);

CalibrationOutput calibrate_grid(const FleetSpec& fleet, const HourlyProfiles& profiles,
                                 const std::vector<double>& q_grid, double wind_cf);

/// Uniform grid of n points on [0, q_max].
std::vector<double> uniform_q_grid(double q_max, int n);

FleetSpec default_fleet();

/// Load: seasonal and diurnal sinusoids plus noise. Wind: diurnal and seasonal
/// pattern plus AR(1) noise, shifted so the clipped mean equals mean_cf.
HourlyProfiles synthetic_profiles(std::size_t hours = 8760, std::uint64_t seed = 7,
                                  double mean_cf = 0.35);

FleetSpec read_fleet_csv(const std::string& path);
HourlyProfiles read_profiles_csv(const std::string& path);
void write_fleet_csv(const FleetSpec& fleet, const std::string& path);
void write_profiles_csv(const HourlyProfiles& profiles, const std::string& path);

}  // namespace vrp
