#include "vrp/serialization.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "csv_util.hpp"

namespace vrp {

namespace {

std::string kind_name(CurveKind k) {
    switch (k) {
        case CurveKind::Polynomial: return "polynomial";
        case CurveKind::ExponentialDecay: return "exponential_decay";
        case CurveKind::Tabulated: return "tabulated";
    }
    return "polynomial";
}

// NaN and infinities become null.
json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

[[noreturn]] void bad(const std::string& where, const std::string& msg) {
    fail(ErrorKind::Parse, where + ": " + msg);
}

const json& field(const json& j, const std::string& key, const std::string& where) {
    if (!j.is_object()) bad(where, "expected an object");
    const auto it = j.find(key);
    if (it == j.end()) bad(where, "missing field '" + key + "'");
    return *it;
}

double number(const json& j, const std::string& where) {
    if (!j.is_number()) bad(where, "expected a number");
    return j.get<double>();
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

void to_json(json& j, const GridCurve& c) {
    j = json::object();
    j["kind"] = kind_name(c.kind());
    if (c.kind() == CurveKind::Tabulated) {
        json table = json::array();
        for (const Knot& k : c.knots()) table.push_back({k.q, k.value});
        j["table"] = std::move(table);
    } else {
        j["coefficients"] = c.coefficients();
        if (c.kind() == CurveKind::Polynomial) j["intercept"] = c.intercept();
    }
}

void to_json(json& j, const CostSpec& c) { j = {{"alpha", c.alpha}, {"beta", c.beta}}; }

void to_json(json& j, const GridModel& m) {
    j = json::object();
    j["emissions"] = m.emissions_curve();
    j["delivered"] = m.delivered_curve();
    j["energy_value"] = m.energy_value_curve();
    j["cost_renewable"] = m.cost_renewable_spec();
    j["cost_system"] = m.cost_system_spec();
    j["invest_cost"] = m.invest_cost();
    j["domain"] = {m.domain().lo, m.domain().hi};
    if (m.mean_load_gw()) j["mean_load_gw"] = *m.mean_load_gw();
}

void to_json(json& j, const DemandModel& d) {
    j = {{"kind", d.kind() == DemandKind::Exponential ? "exponential" : "generic"},
         {"M", d.market_size()},
         {"epsilon", d.epsilon()}};
}

void to_json(json& j, const PeriodSolution& s) {
    j = json::object();
    j["price"] = num(s.price);
    j["expansion"] = num(s.expansion);
    j["share"] = num(s.share);
    j["revenue"] = num(s.revenue);
    j["deliverability_binding"] = s.deliverability_binding;
    j["financial_binding"] = s.financial_binding;
    j["phase"] = to_string(s.phase);
}

void to_json(json& j, const SharingSolution& s) {
    j = {{"gamma_star", num(s.gamma_star)},
         {"operator_budget_residual", num(s.operator_budget_residual)},
         {"generator_budget_residual", num(s.generator_budget_residual)},
         {"equivalent_to_integrated", s.equivalent_to_integrated}};
}

void to_json(json& j, const ExpansionSolution& s) {
    j = {{"expansion", num(s.expansion)},
         {"status", to_string(s.status)},
         {"price", num(s.price)},
         {"revenue", num(s.revenue)},
         {"cost", num(s.cost)},
         {"deliverability_binding", s.deliverability_binding}};
}

void to_json(json& j, const EquilibriumResult& r) {
    j = {{"Q_star", num(r.q_star)},
         {"Q_dagger", num(r.q_dagger)},
         {"e_at_Qstar", num(r.e_at_qstar)},
         {"residual", num(r.residual)},
         {"tolerance", num(r.tolerance)},
         {"bracket", {num(r.bracket.lo), num(r.bracket.hi)}},
         {"iterations", r.iterations},
         {"domain_capped", r.domain_capped},
         {"cost_monotone_beyond_threshold", r.cost_monotone_beyond_threshold},
         {"converged", r.converged()}};
}

void to_json(json& j, const PeriodRecord& r) {
    j = {{"t", r.t}, {"Q", num(r.q_state)}, {"e", num(r.emissions)}, {"solution", r.solution}};
}

void to_json(json& j, const Trajectory& t) {
    j = json::object();
    j["termination"] = to_string(t.termination);
    if (!t.note.empty()) j["note"] = t.note;
    j["Q_star"] = t.q_star ? num(*t.q_star) : json(nullptr);
    j["final_state"] = num(t.final_state);
    j["cumulative_expansion"] = num(t.cumulative_expansion);
    j["cumulative_emission_index"] = num(t.cumulative_emission_index);
    j["records"] = t.records;
}

void to_json(json& j, const ReachabilityCertificate& c) {
    j = {{"holds", c.holds},
         {"min_margin", num(c.min_margin)},
         {"worst_Q", num(c.worst_q)},
         {"bound_formula_value", num(c.bound_formula_value)},
         {"min_primitive_margin", num(c.min_primitive_margin)},
         {"min_sampled_slope", num(c.min_sampled_slope)},
         {"max_abs_de", num(c.max_abs_de)},
         {"max_abs_dC", num(c.max_abs_dc)},
         {"n_samples", c.n_samples},
         {"Q_from", num(c.q_from)},
         {"Q_star", num(c.q_star)}};
    if (!c.note.empty()) j["note"] = c.note;
}

void to_json(json& j, const DominanceReport& r) {
    j = {{"n_policies", r.n_policies},
         {"sampled", r.sampled},
         {"seed", r.seed},
         {"horizon", r.horizon},
         {"action_grid_size", r.action_grid_size},
         {"infeasible_policies", r.infeasible_policies},
         {"dominance_violations", r.dominance_violations},
         {"hitting_time_violations", r.hitting_time_violations},
         {"emission_violations", r.emission_violations},
         {"worst_state_gap", num(r.worst_state_gap)},
         {"worst_hitting_time_gap", num(r.worst_hitting_time_gap)},
         {"worst_emission_gap", num(r.worst_emission_gap)},
         {"myopic_hitting_time", r.myopic_hitting_time},
         {"certificate_holds", r.certificate_holds ? json(*r.certificate_holds) : json(nullptr)}};
}

void to_json(json& j, const PropertyCheck& c) {
    j = {{"name", c.name},
         {"passed", c.passed},
         {"first_violation_Q", c.first_violation_q ? num(*c.first_violation_q) : json(nullptr)},
         {"worst_violation", num(c.worst_violation)}};
}

void to_json(json& j, const ConditionReport& r) {
    j = json::object();
    j["n_samples"] = r.n_samples;
    j["all_passed"] = r.all_passed();
    json checks = json::array();
    for (const PropertyCheck* c : r.checks()) checks.push_back(*c);
    j["checks"] = std::move(checks);
}

void to_json(json& j, const KktResiduals& k) {
    j = {{"lambda", num(k.lambda)},
         {"mu", num(k.mu)},
         {"theta", num(k.theta)},
         {"nu", num(k.nu)},
         {"eta", num(k.eta)},
         {"alpha", num(k.alpha)},
         {"beta", num(k.beta)},
         {"stationarity_p", num(k.stationarity_p)},
         {"stationarity_q", num(k.stationarity_q)},
         {"stationarity_gamma", num(k.stationarity_gamma)},
         {"comp_slackness", k.comp_slackness},
         {"max_abs_residual", num(k.max_abs_residual)},
         {"certified", k.certified()}};
}

void to_json(json& j, const CalibrationOutput& c) {
    const auto rows = [](const std::vector<CalibrationSample>& s) {
        json a = json::array();
        for (const auto& x : s) a.push_back({{"Q", x.q}, {"e", x.e}, {"f", x.f}, {"pi", x.pi}});
        return a;
    };
    j = {{"wind_cf", c.wind_cf},
         {"mean_load_gw", c.mean_load_gw},
         {"isotonic_e_applied", c.isotonic_e_applied},
         {"isotonic_pi_applied", c.isotonic_pi_applied},
         {"samples", rows(c.samples)},
         {"raw_samples", rows(c.raw)}};
}

GridCurve grid_curve_from_json(const json& j, const std::string& where) {
    const json& kind = field(j, "kind", where);
    if (!kind.is_string()) bad(where + ".kind", "expected a string");
    const std::string k = kind.get<std::string>();
    try {
        if (k == "tabulated") {
            const json& table = field(j, "table", where);
            if (!table.is_array()) bad(where + ".table", "expected an array of [Q, value] pairs");
            std::vector<Knot> knots;
            for (std::size_t i = 0; i < table.size(); ++i) {
                const std::string w = where + ".table[" + std::to_string(i) + "]";
                const json& pair = table[i];
                if (!pair.is_array() || pair.size() != 2) bad(w, "expected [Q, value]");
                knots.push_back({number(pair[0], w), number(pair[1], w)});
            }
            return GridCurve::tabulated(std::move(knots));
        }
        const json& coeffs = field(j, "coefficients", where);
        if (!coeffs.is_array()) bad(where + ".coefficients", "expected an array");
        std::vector<double> c;
        for (std::size_t i = 0; i < coeffs.size(); ++i) {
            c.push_back(number(coeffs[i], where + ".coefficients[" + std::to_string(i) + "]"));
        }
        if (k == "polynomial") {
            const double intercept =
                j.contains("intercept") ? number(j["intercept"], where + ".intercept") : 0.0;
            return GridCurve::polynomial(std::move(c), intercept);
        }
        if (k == "exponential_decay") {
            if (c.size() < 2 || c.size() > 3) {
                bad(where + ".coefficients", "exponential_decay takes [a, b] or [a, b, c]");
            }
            return GridCurve::exponential_decay(c[0], c[1], c.size() == 3 ? c[2] : 0.0);
        }
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::Parse) throw;
        fail(e.kind(), where + ": " + e.what());
    }
    bad(where + ".kind", "unknown curve kind '" + k + "'");
}

CostSpec cost_spec_from_json(const json& j, const std::string& where) {
    CostSpec c{number(field(j, "alpha", where), where + ".alpha"),
               number(field(j, "beta", where), where + ".beta")};
    if (c.alpha < 0.0 || c.beta < 0.0) {
        fail(ErrorKind::Validation, where + ": alpha and beta must be >= 0");
    }
    return c;
}

GridModel grid_model_from_json(const json& j, const std::string& where) {
    const json& dom = field(j, "domain", where);
    if (!dom.is_array() || dom.size() != 2) bad(where + ".domain", "expected [Q_min, Q_max]");
    const Interval domain{number(dom[0], where + ".domain[0]"), number(dom[1], where + ".domain[1]")};
    try {
        GridModel m(grid_curve_from_json(field(j, "emissions", where), where + ".emissions"),
                    grid_curve_from_json(field(j, "delivered", where), where + ".delivered"),
                    grid_curve_from_json(field(j, "energy_value", where), where + ".energy_value"),
                    cost_spec_from_json(field(j, "cost_renewable", where), where + ".cost_renewable"),
                    cost_spec_from_json(field(j, "cost_system", where), where + ".cost_system"),
                    number(field(j, "invest_cost", where), where + ".invest_cost"), domain);
        if (j.contains("mean_load_gw")) {
            m = m.with_mean_load(number(j["mean_load_gw"], where + ".mean_load_gw"));
        }
        return m;
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::Parse || e.kind() == ErrorKind::Validation) throw;
        fail(ErrorKind::Validation, where + ": " + e.what());
    }
}

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::Parse, path + ": cannot open file");
    try {
        return json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        // Recover line/column from the byte offset.
        std::ifstream again(path);
        std::string text((std::istreambuf_iterator<char>(again)), std::istreambuf_iterator<char>());
        std::size_t line = 1, col = 1;
        for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        fail(ErrorKind::Parse, path + ":" + std::to_string(line) + ":" + std::to_string(col) +
                                   ": JSON syntax error: " + e.what());
    }
}

void write_json_file(const json& j, const std::string& path) {
    std::ofstream out(path);
    if (!out) fail(ErrorKind::Parse, path + ": cannot open for writing");
    out << j.dump(2) << '\n';
}

std::string trajectory_csv(const Trajectory& t) {
    std::ostringstream out;
    out << kTrajectoryCsvHeader << '\n';
    for (const auto& r : t.records) {
        const PeriodSolution& s = r.solution;
        out << r.t << ',' << fmt(r.q_state) << ',' << fmt(s.price) << ',' << fmt(s.expansion) << ','
            << fmt(s.share) << ',' << fmt(s.revenue) << ',' << phase_number(s.phase) << ','
            << fmt(r.emissions) << '\n';
    }
    return out.str();
}

void write_trajectory_csv(const Trajectory& t, const std::string& path) {
    std::ofstream out(path);
    if (!out) fail(ErrorKind::Parse, path + ": cannot open for writing");
    out << trajectory_csv(t);
}

std::vector<PeriodRecord> read_trajectory_csv(const std::string& path) {
    const csv::Table t = csv::read(path);
    const std::size_t c_t = t.column("t"), c_q = t.column("Q"), c_p = t.column("p"),
                      c_x = t.column("q"), c_g = t.column("gamma"), c_r = t.column("R"),
                      c_ph = t.column("phase"), c_e = t.column("e");
    std::vector<PeriodRecord> out;
    for (const auto& row : t.rows) {
        PeriodRecord r;
        r.t = static_cast<int>(t.number(row, c_t));
        r.q_state = t.number(row, c_q);
        r.solution.price = t.number(row, c_p);
        r.solution.expansion = t.number(row, c_x);
        r.solution.share = t.number(row, c_g);
        r.solution.revenue = t.number(row, c_r);
        const double ph = t.number(row, c_ph);
        if (ph == 1) r.solution.phase = Phase::Phase1;
        else if (ph == 2) r.solution.phase = Phase::Phase2;
        else if (ph == 3) r.solution.phase = Phase::Phase3;
        else if (ph == 0) r.solution.phase = Phase::Infeasible;
        else t.error(row.line, "phase must be 0, 1, 2 or 3");
        r.emissions = t.number(row, c_e);
        out.push_back(r);
    }
    return out;
}

std::vector<std::string> write_plot_files(const Trajectory& t, const GridModel& model,
                                          double wind_cf, const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    struct Panel {
        const char* file;
        const char* column;
        double (*value)(const PeriodRecord&, const GridModel&, double);
    };
    static const Panel panels[] = {
        {"plot_capacity.csv", "Q_gw", [](const PeriodRecord& r, const GridModel&, double) { return r.q_state; }},
        {"plot_renewable_share.csv", "renewable_pct",
         [](const PeriodRecord& r, const GridModel& m, double cf) {
             if (!m.mean_load_gw()) return std::nan("");
             return 100.0 * m.delivered(r.q_state) * cf / *m.mean_load_gw();
         }},
        {"plot_emissions.csv", "e_ton_per_mwh", [](const PeriodRecord& r, const GridModel&, double) { return r.emissions; }},
        {"plot_price.csv", "p_star", [](const PeriodRecord& r, const GridModel&, double) { return r.solution.price; }},
        {"plot_expansion.csv", "q_star_gw", [](const PeriodRecord& r, const GridModel&, double) { return r.solution.expansion; }},
        {"plot_share.csv", "gamma_star", [](const PeriodRecord& r, const GridModel&, double) { return r.solution.share; }},
    };
    std::vector<std::string> written;
    for (const Panel& p : panels) {
        const std::string path = (fs::path(dir) / p.file).string();
        std::ofstream out(path);
        if (!out) fail(ErrorKind::Parse, path + ": cannot open for writing");
        out << "t," << p.column << '\n';
        for (const auto& r : t.records) out << r.t << ',' << fmt(p.value(r, model, wind_cf)) << '\n';
        written.push_back(path);
    }
    return written;
}

}  // namespace vrp
