#include "vrp/scenario.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace vrp {

namespace fs = std::filesystem;

OutputFormat parse_output_format(const std::string& s) {
    if (s == "csv") return OutputFormat::Csv;
    if (s == "json") return OutputFormat::Json;
    fail(ErrorKind::Validation, "unknown output format '" + s + "' (expected csv or json)");
}

std::string to_string(OutputFormat f) { return f == OutputFormat::Csv ? "csv" : "json"; }

double convert_price_units(double p_capacity, double wind_cf) {
    if (!(wind_cf > 0.0 && wind_cf <= 1.0)) fail(ErrorKind::Argument, "wind_cf must lie in (0, 1]");
    return p_capacity / (8.76 * wind_cf);
}

double convert_price_units_inverse(double p_energy, double wind_cf) {
    if (!(wind_cf > 0.0 && wind_cf <= 1.0)) fail(ErrorKind::Argument, "wind_cf must lie in (0, 1]");
    return p_energy * 8.76 * wind_cf;
}

namespace {

// Best-effort line of a dotted JSON path in the source text: each key is
// searched for after the previous one. Returns 0 when not found.
int locate_line(const std::string& text, const std::string& dotted) {
    if (text.empty()) return 0;
    std::size_t pos = 0;
    std::size_t found = std::string::npos;
    std::stringstream ss(dotted);
    std::string key;
    while (std::getline(ss, key, '.')) {
        const auto br = key.find('[');
        if (br != std::string::npos) key = key.substr(0, br);
        if (key.empty()) continue;
        const auto at = text.find("\"" + key + "\"", pos);
        if (at == std::string::npos) break;
        found = at;
        pos = at + key.size() + 2;
    }
    if (found == std::string::npos) return 0;
    int line = 1;
    for (std::size_t i = 0; i < found; ++i) {
        if (text[i] == '\n') ++line;
    }
    return line;
}

struct Ctx {
    std::string file;
    std::string text;
    fs::path dir;

    [[noreturn]] void error(ErrorKind kind, const std::string& where, const std::string& msg) const {
        const int line = locate_line(text, where);
        std::string prefix = file;
        if (line > 0) prefix += ":" + std::to_string(line);
        fail(kind, prefix + ": " + where + ": " + msg);
    }

    const json* find(const json& j, const std::string& key) const {
        const auto it = j.find(key);
        return it == j.end() ? nullptr : &*it;
    }

    const json& need(const json& j, const std::string& key, const std::string& where) const {
        if (!j.is_object()) error(ErrorKind::Parse, where, "expected an object");
        const json* v = find(j, key);
        if (!v) error(ErrorKind::Parse, where, "missing field '" + key + "'");
        return *v;
    }

    double num(const json& j, const std::string& where) const {
        if (!j.is_number()) error(ErrorKind::Parse, where, "expected a number");
        return j.get<double>();
    }

    double num_or(const json& obj, const std::string& key, const std::string& where,
                  double fallback) const {
        const json* v = find(obj, key);
        return v ? num(*v, where + "." + key) : fallback;
    }

    std::int64_t integer_or(const json& obj, const std::string& key, const std::string& where,
                            std::int64_t fallback) const {
        const json* v = find(obj, key);
        if (!v) return fallback;
        if (!v->is_number_integer()) error(ErrorKind::Parse, where + "." + key, "expected an integer");
        return v->get<std::int64_t>();
    }

    std::string str_or(const json& obj, const std::string& key, const std::string& where,
                       const std::string& fallback) const {
        const json* v = find(obj, key);
        if (!v) return fallback;
        if (!v->is_string()) error(ErrorKind::Parse, where + "." + key, "expected a string");
        return v->get<std::string>();
    }

    std::string resolve(const std::string& p) const {
        const fs::path path(p);
        return path.is_absolute() ? p : (dir / path).string();
    }

    // Re-anchors errors raised by lower-level parsers to this file.
    template <class F>
    auto guard(const std::string& where, F&& f) const -> decltype(f()) {
        try {
            return f();
        } catch (const Error& e) {
            error(e.kind(), where, e.what());
        }
    }
};

CalibrationOutput run_calibration(const Ctx& cx, const json& c, double wind_cf) {
    const std::string w = "calibration";
    const std::string source = cx.str_or(c, "source", w, "synthetic");
    const double q_max = cx.num_or(c, "q_max", w, 10.0);
    const std::int64_t n_q = cx.integer_or(c, "n_q", w, 41);
    if (n_q < 2) cx.error(ErrorKind::Validation, w + ".n_q", "need at least 2 capacity samples");

    const FleetSpec fleet = cx.find(c, "fleet_csv")
                                ? cx.guard(w + ".fleet_csv", [&] {
                                      return read_fleet_csv(cx.resolve(cx.str_or(c, "fleet_csv", w, "")));
                                  })
                                : default_fleet();
    HourlyProfiles profiles;
    if (source == "synthetic") {
        const std::int64_t hours = cx.integer_or(c, "hours", w, 8760);
        const std::int64_t seed = cx.integer_or(c, "seed", w, 7);
        if (hours < 1) cx.error(ErrorKind::Validation, w + ".hours", "must be >= 1");
        profiles = synthetic_profiles(static_cast<std::size_t>(hours),
                                      static_cast<std::uint64_t>(seed), wind_cf);
    } else if (source == "csv") {
        const std::string p = cx.str_or(c, "profiles_csv", w, "");
        if (p.empty()) cx.error(ErrorKind::Parse, w, "csv source needs 'profiles_csv'");
        profiles = cx.guard(w + ".profiles_csv", [&] { return read_profiles_csv(cx.resolve(p)); });
    } else {
        cx.error(ErrorKind::Validation, w + ".source", "expected 'synthetic' or 'csv'");
    }
    if (std::fabs(profiles.mean_cf() - wind_cf) > 1e-3) {
        cx.error(ErrorKind::Validation, w,
                 "mean of the wind_cf profile (" + std::to_string(profiles.mean_cf()) +
                     ") differs from wind_cf by more than 1e-3");
    }
    return cx.guard(w, [&] {
        return calibrate_grid(fleet, profiles, uniform_q_grid(q_max, static_cast<int>(n_q)), wind_cf);
    });
}

}  // namespace

Scenario scenario_from_json(const json& j, const std::string& source_path, const std::string& text) {
    Ctx cx{source_path, text, fs::path(source_path).parent_path()};
    if (!j.is_object()) cx.error(ErrorKind::Parse, "(root)", "scenario must be a JSON object");

    const std::int64_t version = cx.integer_or(j, "schema_version", "", -1);
    if (version < 0) cx.error(ErrorKind::Parse, "schema_version", "missing field 'schema_version'");
    if (version != kScenarioSchemaVersion) {
        cx.error(ErrorKind::Validation, "schema_version",
                 "unsupported version " + std::to_string(version));
    }

    const double wind_cf = cx.num(cx.need(j, "wind_cf", "(root)"), "wind_cf");
    if (!(wind_cf > 0.0 && wind_cf <= 1.0)) {
        cx.error(ErrorKind::Validation, "wind_cf", "must lie in (0, 1]");
    }

    std::optional<CalibrationOutput> calibration;
    const int grid_sources = (cx.find(j, "grid") ? 1 : 0) + (cx.find(j, "grid_file") ? 1 : 0) +
                             (cx.find(j, "calibration") ? 1 : 0);
    if (grid_sources != 1) {
        cx.error(ErrorKind::Validation, "(root)",
                 "exactly one of 'grid', 'grid_file' or 'calibration' is required");
    }
    const GridModel grid = [&]() -> GridModel {
        if (const json* g = cx.find(j, "grid")) {
            return cx.guard("grid", [&] { return grid_model_from_json(*g, "grid"); });
        }
        if (cx.find(j, "grid_file")) {
            const std::string p = cx.resolve(cx.str_or(j, "grid_file", "", ""));
            return cx.guard("grid_file", [&] { return grid_model_from_json(read_json_file(p), p); });
        }
        const json& c = *cx.find(j, "calibration");
        calibration = run_calibration(cx, c, wind_cf);
        const CostSpec cr = cx.guard("calibration.cost_renewable", [&] {
            return cost_spec_from_json(cx.need(c, "cost_renewable", "calibration"),
                                       "calibration.cost_renewable");
        });
        const CostSpec cs = cx.guard("calibration.cost_system", [&] {
            return cost_spec_from_json(cx.need(c, "cost_system", "calibration"),
                                       "calibration.cost_system");
        });
        const double k = cx.num(cx.need(c, "invest_cost", "calibration"), "calibration.invest_cost");
        return cx.guard("calibration", [&] { return calibration->to_grid_model(cr, cs, k); });
    }();

    const json& d = cx.need(j, "demand", "(root)");
    const std::string dkind = cx.str_or(d, "kind", "demand", "exponential");
    if (dkind != "exponential") {
        cx.error(ErrorKind::Validation, "demand.kind",
                 "only exponential demand can be declared in a scenario");
    }
    const DemandModel demand = cx.guard("demand", [&] {
        return DemandModel::exponential(cx.num(cx.need(d, "M", "demand"), "demand.M"),
                                        cx.num(cx.need(d, "epsilon", "demand"), "demand.epsilon"));
    });

    SimulationConfig sim;
    if (const json* s = cx.find(j, "simulation")) {
        sim.q_init = cx.num_or(*s, "Q_init", "simulation", sim.q_init);
        sim.horizon = static_cast<int>(cx.integer_or(*s, "horizon", "simulation", 100));
        if (const json* b = cx.find(*s, "stop_at_Qstar")) {
            if (!b->is_boolean()) cx.error(ErrorKind::Parse, "simulation.stop_at_Qstar", "expected a boolean");
            sim.stop_at_qstar = b->get<bool>();
        }
        sim.period_label = cx.str_or(*s, "period_label", "simulation", sim.period_label);
    } else {
        sim.horizon = 100;
    }
    if (sim.horizon < 1) cx.error(ErrorKind::Validation, "simulation.horizon", "must be >= 1");
    if (!grid.domain().contains(sim.q_init) || sim.q_init < 0.0) {
        cx.error(ErrorKind::Validation, "simulation.Q_init", "must be >= 0 and inside the grid domain");
    }

    OutputFormat format = OutputFormat::Csv;
    std::string out_dir = "out";
    if (const json* o = cx.find(j, "output")) {
        try {
            format = parse_output_format(cx.str_or(*o, "format", "output", "csv"));
        } catch (const Error& e) {
            cx.error(ErrorKind::Validation, "output.format", e.what());
        }
        out_dir = cx.str_or(*o, "dir", "output", out_dir);
    }

    ReachabilityPins pins;
    VerifySettings verify;
    if (const json* r = cx.find(j, "reachability")) {
        if (cx.find(*r, "max_abs_de")) pins.max_abs_de = cx.num_or(*r, "max_abs_de", "reachability", 0.0);
        if (cx.find(*r, "max_abs_dC")) pins.max_abs_dc = cx.num_or(*r, "max_abs_dC", "reachability", 0.0);
        verify.reachability_samples = static_cast<int>(
            cx.integer_or(*r, "n_samples", "reachability", verify.reachability_samples));
    }
    if (const json* v = cx.find(j, "verify")) {
        const std::string w = "verify";
        verify.condition_samples = static_cast<int>(cx.integer_or(*v, "condition_samples", w, verify.condition_samples));
        verify.action_grid_size = static_cast<int>(cx.integer_or(*v, "action_grid", w, verify.action_grid_size));
        verify.enumeration_horizon = static_cast<int>(cx.integer_or(*v, "horizon", w, verify.enumeration_horizon));
        verify.max_policies = cx.integer_or(*v, "max_policies", w, verify.max_policies);
        verify.seed = static_cast<std::uint64_t>(cx.integer_or(*v, "seed", w, 0));
        verify.price_scan_points = static_cast<int>(cx.integer_or(*v, "price_scan_points", w, verify.price_scan_points));
        verify.root_scan_points = static_cast<int>(cx.integer_or(*v, "root_scan_points", w, verify.root_scan_points));
        verify.kkt_samples = static_cast<int>(cx.integer_or(*v, "kkt_samples", w, verify.kkt_samples));
    }
    if (verify.condition_samples < 3) cx.error(ErrorKind::Validation, "verify.condition_samples", "must be >= 3");
    if (verify.reachability_samples < 2) cx.error(ErrorKind::Validation, "reachability.n_samples", "must be >= 2");

    return Scenario{
        .schema_version = static_cast<int>(version),
        .name = cx.str_or(j, "name", "", fs::path(source_path).stem().string()),
        .source_path = source_path,
        .grid = grid,
        .demand = demand,
        .simulation = sim,
        .wind_cf = wind_cf,
        .format = format,
        .out_dir = out_dir,
        .pins = pins,
        .verify = verify,
        .calibration = calibration,
    };
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::Parse, path + ": cannot open scenario file");
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    const json j = read_json_file(path);
    return scenario_from_json(j, path, text);
}

}  // namespace vrp
