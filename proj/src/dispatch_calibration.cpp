#include "vrp/dispatch_calibration.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <numeric>
#include <random>

#include "csv_util.hpp"

namespace vrp {

FleetSpec::FleetSpec(std::vector<GeneratorUnit> units) : units_(std::move(units)) {
    if (units_.empty()) fail(ErrorKind::Validation, "fleet has no units");
    for (std::size_t i = 0; i < units_.size(); ++i) {
        const GeneratorUnit& u = units_[i];
        const std::string where = "fleet unit " + std::to_string(i) + ": ";
        if (!(u.capacity_gw > 0.0)) fail(ErrorKind::Validation, where + "capacity must be > 0");
        if (!(u.marginal_cost >= 0.0)) fail(ErrorKind::Validation, where + "marginal cost must be >= 0");
        if (!(u.emission_rate >= 0.0)) fail(ErrorKind::Validation, where + "emission rate must be >= 0");
        total_capacity_ += u.capacity_gw;
    }
    std::stable_sort(units_.begin(), units_.end(), [](const GeneratorUnit& a, const GeneratorUnit& b) {
        return a.marginal_cost < b.marginal_cost;
    });
}

double HourlyProfiles::mean_cf() const {
    if (wind_cf.empty()) return 0.0;
    return std::accumulate(wind_cf.begin(), wind_cf.end(), 0.0) / static_cast<double>(wind_cf.size());
}

double HourlyProfiles::mean_load() const {
    if (load.empty()) return 0.0;
    return std::accumulate(load.begin(), load.end(), 0.0) / static_cast<double>(load.size());
}

void HourlyProfiles::validate() const {
    if (load.empty()) fail(ErrorKind::Validation, "profiles are empty");
    if (load.size() != wind_cf.size()) {
        fail(ErrorKind::Validation, "load and wind_cf profiles differ in length");
    }
    for (std::size_t h = 0; h < load.size(); ++h) {
        if (!(load[h] > 0.0)) {
            fail(ErrorKind::Validation, "hour " + std::to_string(h) + ": load must be > 0");
        }
        if (!(wind_cf[h] >= 0.0 && wind_cf[h] <= 1.0)) {
            fail(ErrorKind::Validation, "hour " + std::to_string(h) + ": wind_cf outside [0, 1]");
        }
    }
}

double DispatchRecord::total_emissions() const {
    return std::accumulate(emissions.begin(), emissions.end(), 0.0);
}

double DispatchRecord::total_wind_served() const {
    return std::accumulate(wind_served.begin(), wind_served.end(), 0.0);
}

DispatchRecord merit_order_dispatch(const FleetSpec& fleet, const HourlyProfiles& profiles,
                                    double q_wind) {
    profiles.validate();
    if (!(q_wind >= 0.0)) fail(ErrorKind::Argument, "wind capacity must be nonnegative");
    const auto& units = fleet.units();
    const std::size_t hours = profiles.hours();
    const std::size_t nu = units.size();

    DispatchRecord rec;
    rec.n_units = nu;
    rec.wind_served.resize(hours);
    rec.curtailment.resize(hours);
    rec.thermal.resize(hours);
    rec.price.resize(hours);
    rec.emissions.resize(hours);
    rec.marginal_unit.assign(hours, -1);
    rec.unit_output.assign(hours * nu, 0.0);

    for (std::size_t h = 0; h < hours; ++h) {
        const double load = profiles.load[h];
        const double avail = q_wind * profiles.wind_cf[h];
        const double wind = std::min(avail, load);
        rec.wind_served[h] = wind;
        rec.curtailment[h] = std::max(0.0, avail - load);
        const double residual = load - wind;
        if (residual > fleet.total_capacity()) {
            fail(ErrorKind::Shortage, "hour " + std::to_string(h) + ": residual load " +
                                          std::to_string(residual) + " GW exceeds fleet capacity");
        }
        double remaining = residual;
        double thermal = 0.0;
        double emis = 0.0;
        for (std::size_t u = 0; u < nu && remaining > 0.0; ++u) {
            const double g = std::min(units[u].capacity_gw, remaining);
            rec.unit_output[h * nu + u] = g;
            remaining -= g;
            thermal += g;
            emis += g * units[u].emission_rate;
            rec.marginal_unit[h] = static_cast<int>(u);
        }
        rec.thermal[h] = thermal;
        rec.emissions[h] = emis;
        rec.price[h] = rec.marginal_unit[h] >= 0 ? units[rec.marginal_unit[h]].marginal_cost : 0.0;
    }
    return rec;
}

std::vector<double> isotonic_nonincreasing(const std::vector<double>& values) {
    // Blocks of (sum, count); merge while a later block mean exceeds an earlier one.
    std::vector<double> sums;
    std::vector<std::size_t> counts;
    for (double v : values) {
        sums.push_back(v);
        counts.push_back(1);
        while (sums.size() > 1) {
            const std::size_t n = sums.size();
            const double prev = sums[n - 2] / static_cast<double>(counts[n - 2]);
            const double last = sums[n - 1] / static_cast<double>(counts[n - 1]);
            if (last <= prev) break;
            sums[n - 2] += sums[n - 1];
            counts[n - 2] += counts[n - 1];
            sums.pop_back();
            counts.pop_back();
        }
    }
    std::vector<double> out;
    out.reserve(values.size());
    for (std::size_t b = 0; b < sums.size(); ++b) {
        out.insert(out.end(), counts[b], sums[b] / static_cast<double>(counts[b]));
    }
    return out;
}

namespace {

bool has_increase(const std::vector<double>& v) {
    for (std::size_t i = 1; i < v.size(); ++i) {
        if (v[i] > v[i - 1]) return true;
    }
    return false;
}

GridCurve table_of(const std::vector<CalibrationSample>& s, double CalibrationSample::*field) {
    std::vector<Knot> knots;
    knots.reserve(s.size());
    for (const auto& x : s) knots.push_back({x.q, x.*field});
    return GridCurve::tabulated(std::move(knots));
}

}  // namespace

CalibrationOutput calibrate_grid(const FleetSpec& fleet, const HourlyProfiles& profiles,
                                 const std::vector<double>& q_grid, double wind_cf) {
    if (!(wind_cf > 0.0 && wind_cf <= 1.0)) fail(ErrorKind::Argument, "wind_cf must lie in (0, 1]");
    if (q_grid.size() < 2) fail(ErrorKind::Argument, "calibration grid needs at least 2 points");
    for (std::size_t i = 0; i < q_grid.size(); ++i) {
        if (!(q_grid[i] >= 0.0)) fail(ErrorKind::Argument, "calibration grid must be nonnegative");
        if (i > 0 && !(q_grid[i] > q_grid[i - 1])) {
            fail(ErrorKind::Argument, "calibration grid must be strictly increasing");
        }
    }
    profiles.validate();

    const double hours = static_cast<double>(profiles.hours());
    const double total_load = std::accumulate(profiles.load.begin(), profiles.load.end(), 0.0);
    const double to_capacity_price = 8.76 * wind_cf;

    CalibrationOutput out;
    out.wind_cf = wind_cf;
    out.mean_load_gw = total_load / hours;
    for (double q : q_grid) {
        const DispatchRecord rec = merit_order_dispatch(fleet, profiles, q);
        CalibrationSample s;
        s.q = q;
        s.e = rec.total_emissions() / total_load;
        const double served = rec.total_wind_served();
        s.f = served / (hours * wind_cf);
        // Output-weighted price; with nothing served, weight by the wind shape.
        const std::vector<double>& w = served > 0.0 ? rec.wind_served : profiles.wind_cf;
        double num = 0.0;
        double den = 0.0;
        for (std::size_t h = 0; h < rec.price.size(); ++h) {
            num += w[h] * rec.price[h];
            den += w[h];
        }
        const double avg = den > 0.0 ? num / den : 0.0;
        s.pi = avg * to_capacity_price;
        out.raw.push_back(s);
    }

    out.samples = out.raw;
    std::vector<double> e, pi;
    for (const auto& s : out.raw) {
        e.push_back(s.e);
        pi.push_back(s.pi);
    }
    if (has_increase(e)) {
        out.isotonic_e_applied = true;
        e = isotonic_nonincreasing(e);
    }
    if (has_increase(pi)) {
        out.isotonic_pi_applied = true;
        pi = isotonic_nonincreasing(pi);
    }
    for (std::size_t i = 0; i < out.samples.size(); ++i) {
        out.samples[i].e = e[i];
        out.samples[i].pi = pi[i];
    }
    return out;
}

GridCurve CalibrationOutput::emissions_curve() const { return table_of(samples, &CalibrationSample::e); }
GridCurve CalibrationOutput::delivered_curve() const { return table_of(samples, &CalibrationSample::f); }
GridCurve CalibrationOutput::energy_value_curve() const {
    return table_of(samples, &CalibrationSample::pi);
}

GridModel CalibrationOutput::to_grid_model(const CostSpec& cost_renewable,
                                           const CostSpec& cost_system,
                                           double invest_cost) const {
    if (samples.size() < 2) fail(ErrorKind::Validation, "calibration output has fewer than 2 samples");
    GridModel model(emissions_curve(), delivered_curve(), energy_value_curve(), cost_renewable,
                    cost_system, invest_cost, Interval{samples.front().q, samples.back().q});
    return model.with_mean_load(mean_load_gw);
}

std::vector<double> uniform_q_grid(double q_max, int n) {
    if (n < 2 || !(q_max > 0.0)) fail(ErrorKind::Argument, "grid needs n >= 2 and q_max > 0");
    std::vector<double> out(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) out[i] = i == n - 1 ? q_max : q_max * i / (n - 1);
    return out;
}

FleetSpec default_fleet() {
    return FleetSpec({
        {3.0, 8.0, 0.00},    // nuclear / hydro baseload
        {2.5, 22.0, 0.95},   // coal
        {3.5, 32.0, 0.40},   // combined-cycle gas
        {2.0, 55.0, 0.55},   // steam gas
        {1.5, 110.0, 0.80},  // oil peakers
    });
}

HourlyProfiles synthetic_profiles(std::size_t hours, std::uint64_t seed, double mean_cf) {
    if (hours < 1) fail(ErrorKind::Argument, "profiles need at least one hour");
    if (!(mean_cf > 0.0 && mean_cf < 1.0)) fail(ErrorKind::Argument, "mean_cf must lie in (0, 1)");
    constexpr double two_pi = 2.0 * std::numbers::pi;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);

    HourlyProfiles p;
    p.load.resize(hours);
    p.wind_cf.resize(hours);
    for (std::size_t h = 0; h < hours; ++h) {
        const double day = static_cast<double>(h % 24);
        const double doy = static_cast<double>(h) / 24.0;
        const double load = 6.0 + 1.0 * std::cos(two_pi * (doy - 200.0) / 365.0) +
                            1.5 * std::sin(two_pi * (day - 9.0) / 24.0) + 0.3 * normal(rng);
        p.load[h] = std::max(2.5, load);
    }
    double ar = 0.0;
    std::vector<double> raw(hours);
    for (std::size_t h = 0; h < hours; ++h) {
        if (h > 0) ar = 0.95 * ar + 0.3 * normal(rng);
        const double day = static_cast<double>(h % 24);
        const double doy = static_cast<double>(h) / 24.0;
        raw[h] = mean_cf + 0.08 * std::cos(two_pi * day / 24.0) +
                 0.08 * std::cos(two_pi * doy / 365.0) + 0.15 * ar;
    }
    const auto clipped_mean = [&] {
        double s = 0.0;
        for (double v : raw) s += std::clamp(v, 0.0, 1.0);
        return s / static_cast<double>(hours);
    };
    for (int it = 0; it < 100; ++it) {
        const double gap = mean_cf - clipped_mean();
        if (std::fabs(gap) < 1e-12) break;
        for (double& v : raw) v += gap;
    }
    for (std::size_t h = 0; h < hours; ++h) p.wind_cf[h] = std::clamp(raw[h], 0.0, 1.0);
    return p;
}

FleetSpec read_fleet_csv(const std::string& path) {
    const csv::Table t = csv::read(path);
    const std::size_t c_cap = t.column("capacity_gw");
    const std::size_t c_mc = t.column("mc_usd_per_mwh");
    const std::size_t c_er = t.column("er_ton_per_mwh");
    std::vector<GeneratorUnit> units;
    for (const auto& row : t.rows) {
        GeneratorUnit u{t.number(row, c_cap), t.number(row, c_mc), t.number(row, c_er)};
        if (!(u.capacity_gw > 0.0) || u.marginal_cost < 0.0 || u.emission_rate < 0.0) {
            t.error(row.line, "capacity must be > 0, cost and emission rate >= 0");
        }
        units.push_back(u);
    }
    if (units.empty()) t.error(t.header_line, "fleet file has no units");
    return FleetSpec(std::move(units));
}

HourlyProfiles read_profiles_csv(const std::string& path) {
    const csv::Table t = csv::read(path);
    const std::size_t c_hour = t.column("hour");
    const std::size_t c_load = t.column("load_gw");
    const std::size_t c_cf = t.column("wind_cf");
    HourlyProfiles p;
    for (const auto& row : t.rows) {
        const double hour = t.number(row, c_hour);
        if (hour != static_cast<double>(p.load.size())) {
            t.error(row.line, "hours must be consecutive from 0");
        }
        const double load = t.number(row, c_load);
        const double cf = t.number(row, c_cf);
        if (!(load > 0.0)) t.error(row.line, "load_gw must be > 0");
        if (!(cf >= 0.0 && cf <= 1.0)) t.error(row.line, "wind_cf must lie in [0, 1]");
        p.load.push_back(load);
        p.wind_cf.push_back(cf);
    }
    if (p.load.empty()) t.error(t.header_line, "profile file has no rows");
    return p;
}

void write_fleet_csv(const FleetSpec& fleet, const std::string& path) {
    std::ofstream out(path);
    if (!out) fail(ErrorKind::Parse, path + ": cannot open for writing");
    out << std::setprecision(17) << "capacity_gw,mc_usd_per_mwh,er_ton_per_mwh\n";
    for (const auto& u : fleet.units()) {
        out << u.capacity_gw << ',' << u.marginal_cost << ',' << u.emission_rate << '\n';
    }
}

void write_profiles_csv(const HourlyProfiles& profiles, const std::string& path) {
    std::ofstream out(path);
    if (!out) fail(ErrorKind::Parse, path + ": cannot open for writing");
    out << std::setprecision(17) << "hour,load_gw,wind_cf\n";
    for (std::size_t h = 0; h < profiles.hours(); ++h) {
        out << h << ',' << profiles.load[h] << ',' << profiles.wind_cf[h] << '\n';
    }
}

}  // namespace vrp
