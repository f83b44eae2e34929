#include "vrp/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <ostream>

#include <CLI11.hpp>
#include <spdlog/sinks/ostream_sink.h>
#include <spdlog/spdlog.h>

#include "vrp/scenario.hpp"

namespace vrp {

namespace fs = std::filesystem;

int exit_code_for(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::Singularity:
        case ErrorKind::NoSellableCredits:
        case ErrorKind::NoRevenue:
        case ErrorKind::InfeasibleSharing:
        case ErrorKind::ThresholdUnreachable:
        case ErrorKind::InfeasibleAtThreshold:
        case ErrorKind::Shortage:
            return kExitInfeasible;
        case ErrorKind::Domain:
        case ErrorKind::Argument:
        case ErrorKind::Configuration:
        case ErrorKind::Parse:
        case ErrorKind::Validation:
            return kExitValidation;
    }
    return kExitValidation;
}

namespace {

struct Options {
    std::string command;
    std::string scenario;
    std::string out_dir;
    std::string format;
    std::optional<double> q;
    std::optional<int> samples;
    std::optional<std::uint64_t> seed;
    std::optional<int> horizon;
    std::optional<int> q_grid;
    std::string fleet_csv;
    std::string profiles_csv;
};

std::shared_ptr<spdlog::logger> make_logger(std::ostream& err) {
    auto sink = std::make_shared<spdlog::sinks::ostream_sink_mt>(err);
    auto log = std::make_shared<spdlog::logger>("vrp", sink);
    log->set_pattern("[%l] %v");
    const char* env = std::getenv("VRP_LOG_LEVEL");
    log->set_level(env ? spdlog::level::from_str(env) : spdlog::level::warn);
    return log;
}

void emit(const json& j, const Options& o, const std::string& file, std::ostream& out) {
    out << j.dump(2) << '\n';
    if (!o.out_dir.empty()) {
        fs::create_directories(o.out_dir);
        write_json_file(j, (fs::path(o.out_dir) / file).string());
    }
}

void warn_conditions(const Scenario& sc, spdlog::logger& log) {
    const ConditionReport rep = validate_grid_conditions(sc.grid, sc.verify.condition_samples);
    for (const PropertyCheck* c : rep.checks()) {
        if (!c->passed) {
            log.warn("grid condition {} fails near Q = {}", c->name, c->first_violation_q.value_or(0.0));
        }
    }
}

int cmd_price(const Scenario& sc, const Options& o, std::ostream& out) {
    const double q = o.q.value_or(sc.simulation.q_init);
    const ExpansionSolution es = optimal_expansion(sc.demand, sc.grid, q);
    const PeriodSolution ps = solve_integrated_period(sc.demand, sc.grid, q);
    json j;
    j["Q"] = q;
    j["solution"] = ps;
    j["expansion"] = es;
    j["price_usd_per_mwh"] = convert_price_units(es.price, sc.wind_cf);
    j["e"] = sc.grid.emissions(q);
    j["f"] = sc.grid.delivered(q);
    j["C"] = cost_integrated(sc.grid, q);
    emit(j, o, "price.json", out);
    return es.status == ExpansionStatus::Infeasible || !ps.feasible() ? kExitInfeasible : kExitOk;
}

int cmd_share(const Scenario& sc, const Options& o, std::ostream& out) {
    const double q = o.q.value_or(sc.simulation.q_init);
    const SeparatedPeriod sp = solve_separated_period(sc.demand, sc.grid, q);
    const PeriodSolution integrated = solve_integrated_period(sc.demand, sc.grid, q);
    json j;
    j["Q"] = q;
    j["solution"] = sp.period;
    j["sharing"] = sp.sharing;
    j["integrated_expansion"] = integrated.expansion;
    j["C1"] = sp.period.feasible() ? cost_operator(sc.grid, q, sp.period.expansion)
                                   : std::numeric_limits<double>::quiet_NaN();
    j["C2"] = cost_generator(sc.grid, q);
    emit(j, o, "share.json", out);
    return sp.period.feasible() ? kExitOk : kExitInfeasible;
}

int cmd_limit(const Scenario& sc, const Options& o, std::ostream& out) {
    const EquilibriumResult r = solve_long_run_limit(sc.demand, sc.grid);
    json j = r;
    j["nonvanishing_emissions"] = check_nonvanishing_emissions(r);
    emit(j, o, "limit.json", out);
    return kExitOk;
}

int cmd_simulate(const Scenario& sc, const Options& o, std::ostream& out, spdlog::logger& log) {
    SimulationConfig cfg = sc.simulation;
    if (o.horizon) cfg.horizon = *o.horizon;
    const Trajectory tr = simulate_myopic(sc.demand, sc.grid, cfg);
    const std::string dir = o.out_dir.empty() ? sc.out_dir : o.out_dir;
    fs::create_directories(dir);
    const OutputFormat fmt = o.format.empty() ? sc.format : parse_output_format(o.format);
    std::vector<std::string> files;
    if (fmt == OutputFormat::Csv) {
        const std::string p = (fs::path(dir) / "trajectory.csv").string();
        write_trajectory_csv(tr, p);
        files.push_back(p);
    } else {
        const std::string p = (fs::path(dir) / "trajectory.json").string();
        write_json_file(json(tr), p);
        files.push_back(p);
    }
    for (auto& f : write_plot_files(tr, sc.grid, sc.wind_cf, dir)) files.push_back(f);
    log.info("wrote {} files to {}", files.size(), dir);

    json j;
    j["termination"] = to_string(tr.termination);
    if (!tr.note.empty()) j["note"] = tr.note;
    j["periods"] = tr.records.size();
    j["Q_star"] = tr.q_star ? json(*tr.q_star) : json(nullptr);
    j["final_state"] = tr.final_state;
    j["cumulative_expansion"] = tr.cumulative_expansion;
    j["files"] = files;
    out << j.dump(2) << '\n';
    return tr.termination == Termination::Infeasible ? kExitInfeasible : kExitOk;
}

json kkt_summary(const Scenario& sc, double q_star, int n) {
    double worst_int = 0.0;
    double worst_share = 0.0;
    int tested = 0;
    int certified = 0;
    const double lo = std::min(sc.simulation.q_init, q_star);
    for (int i = 0; i < n; ++i) {
        const double q = lo + (q_star - lo) * i / std::max(1, n);
        const PeriodSolution s = solve_integrated_period(sc.demand, sc.grid, q);
        if (!s.feasible() || !(s.expansion > 0.0)) continue;
        ++tested;
        const KktResiduals a = kkt_residuals(sc.demand, sc.grid, q, s, KktProblem::Integrated);
        worst_int = std::max(worst_int, a.max_abs_residual);
        bool ok = a.certified();
        const SeparatedPeriod sp = solve_separated_period(sc.demand, sc.grid, q);
        if (sp.period.feasible() && sp.period.share > kPhaseTolerance) {
            const KktResiduals b =
                kkt_residuals(sc.demand, sc.grid, q, sp.period, KktProblem::RevenueSharing);
            worst_share = std::max(worst_share, b.max_abs_residual);
            ok = ok && b.certified();
        }
        if (ok) ++certified;
    }
    return {{"tested", tested},
            {"certified", certified},
            {"max_abs_residual_integrated", worst_int},
            {"max_abs_residual_sharing", worst_share},
            {"passed", tested == certified}};
}

json price_oracle_summary(const Scenario& sc, double q_star, int points) {
    const double lo = std::min(sc.simulation.q_init, q_star);
    double worst_steps = 0.0;
    double worst_rev_gap = 0.0;
    constexpr int kStates = 5;
    for (int i = 0; i < kStates; ++i) {
        const double q = lo + (q_star - lo) * i / (kStates - 1);
        const PriceSolution ps = optimal_price(sc.demand, sc.grid, q);
        const PriceScan scan = dense_scan_price(sc.demand, sc.grid, q, points);
        const double r = revenue(sc.demand, ps.price, sc.grid.emissions(q));
        worst_steps = std::max(worst_steps, std::fabs(ps.price - scan.price) / scan.step);
        worst_rev_gap = std::max(worst_rev_gap, (scan.revenue - r) / std::max(1.0, scan.revenue));
    }
    return {{"states", kStates},
            {"points", points},
            {"max_price_gap_in_steps", worst_steps},
            {"max_relative_revenue_shortfall", worst_rev_gap},
            {"passed", worst_steps <= 1.0 && worst_rev_gap <= 1e-6}};
}

int cmd_verify(const Scenario& sc, const Options& o, std::ostream& out) {
    const VerifySettings& v = sc.verify;
    const ConditionReport cond =
        validate_grid_conditions(sc.grid, o.samples.value_or(v.condition_samples));
    const EquilibriumResult eq = solve_long_run_limit(sc.demand, sc.grid);
    const ReachabilityCertificate cert = certify_monotone_reachability(
        sc.demand, sc.grid, sc.simulation.q_init, v.reachability_samples, sc.pins);

    EnumerationConfig ecfg;
    ecfg.action_grid_size = o.q_grid.value_or(v.action_grid_size);
    ecfg.horizon = o.horizon.value_or(v.enumeration_horizon);
    ecfg.max_policies = v.max_policies;
    ecfg.seed = o.seed.value_or(v.seed);
    ecfg.allow_sampling = true;
    const DominanceReport dom = enumerate_and_compare(sc.demand, sc.grid, sc.simulation, ecfg);

    const RootScan roots = dense_scan_equilibrium(sc.demand, sc.grid, v.root_scan_points);
    const bool root_ok = roots.found && eq.q_star >= roots.bracket.lo - 1e-9 &&
                         eq.q_star <= roots.bracket.hi + 1e-9;

    json j;
    j["conditions"] = cond;
    j["equilibrium"] = eq;
    j["reachability"] = cert;
    j["dominance"] = dom;
    j["kkt"] = kkt_summary(sc, eq.q_star, v.kkt_samples);
    j["price_oracle"] = price_oracle_summary(sc, eq.q_star, v.price_scan_points);
    j["root_oracle"] = {{"bracket", {roots.bracket.lo, roots.bracket.hi}},
                        {"sign_changes", roots.sign_changes},
                        {"contains_Q_star", root_ok}};
    const bool passed = cond.all_passed() && eq.converged() && cert.holds && dom.clean() &&
                        j["kkt"]["passed"].get<bool>() && j["price_oracle"]["passed"].get<bool>() &&
                        root_ok;
    j["passed"] = passed;
    emit(j, o, "verify.json", out);
    return passed ? kExitOk : kExitVerification;
}

int cmd_calibrate(const Options& o, std::ostream& out) {
    // Re-reads the scenario so flag overrides can replace the calibration inputs.
    json j = read_json_file(o.scenario);
    if (!j.contains("calibration")) {
        fail(ErrorKind::Validation, o.scenario + ": calibrate needs a 'calibration' block");
    }
    json& c = j["calibration"];
    if (!o.fleet_csv.empty()) c["fleet_csv"] = fs::absolute(o.fleet_csv).string();
    if (!o.profiles_csv.empty()) {
        c["source"] = "csv";
        c["profiles_csv"] = fs::absolute(o.profiles_csv).string();
    }
    if (o.q_grid) c["n_q"] = *o.q_grid;
    if (o.seed) c["seed"] = *o.seed;
    const Scenario sc = scenario_from_json(j, o.scenario);
    json grid = sc.grid;
    if (o.out_dir.empty()) {
        out << grid.dump(2) << '\n';
    } else {
        fs::create_directories(o.out_dir);
        write_json_file(grid, (fs::path(o.out_dir) / "grid.json").string());
        write_json_file(json(*sc.calibration), (fs::path(o.out_dir) / "calibration.json").string());
        out << json({{"grid", (fs::path(o.out_dir) / "grid.json").string()},
                     {"isotonic_e_applied", sc.calibration->isotonic_e_applied},
                     {"isotonic_pi_applied", sc.calibration->isotonic_pi_applied}})
                   .dump(2)
            << '\n';
    }
    return kExitOk;
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    auto log = make_logger(err);
    CLI::App app{"Voluntary renewable program planner", "vrp"};
    app.require_subcommand(1);
    Options o;

    const auto common = [&](CLI::App* sub) {
        sub->add_option("--scenario", o.scenario, "Scenario JSON file")->required();
        sub->add_option("--out", o.out_dir, "Output directory");
        sub->add_option("--format", o.format, "Output format for simulate")
            ->check(CLI::IsMember({"csv", "json"}));
        sub->add_option("--samples", o.samples, "Grid-condition samples")->check(CLI::PositiveNumber);
        sub->add_option("--seed", o.seed, "Seed for sampled enumeration or synthetic profiles");
        sub->add_option("--horizon", o.horizon, "Simulation or enumeration horizon")
            ->check(CLI::PositiveNumber);
        sub->add_option("--q-grid", o.q_grid,
                        "Enumeration action grid size (verify) or capacity samples (calibrate)")
            ->check(CLI::Range(2, 1000000));
    };
    CLI::App* price = app.add_subcommand("price", "Optimal price and expansion at Q");
    CLI::App* share = app.add_subcommand("share", "Revenue-sharing solution at Q");
    CLI::App* limit = app.add_subcommand("limit", "Long-run capacity limit Q*");
    CLI::App* simulate = app.add_subcommand("simulate", "Myopic expansion trajectory");
    CLI::App* verify = app.add_subcommand("verify", "Conditions, certificates and oracle checks");
    CLI::App* calibrate = app.add_subcommand("calibrate", "Grid curves from merit-order dispatch");
    for (CLI::App* s : {price, share, limit, simulate, verify, calibrate}) common(s);
    price->add_option("Q", o.q, "Installed capacity [GW] (default: Q_init)");
    share->add_option("Q", o.q, "Installed capacity [GW] (default: Q_init)");
    calibrate->add_option("--fleet", o.fleet_csv, "Fleet CSV");
    calibrate->add_option("--profiles", o.profiles_csv, "Hourly profile CSV");

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitValidation;
    }

    try {
        if (calibrate->parsed()) return cmd_calibrate(o, out);
        const Scenario sc = load_scenario(o.scenario);
        log->debug("loaded scenario '{}' (schema {})", sc.name, sc.schema_version);
        if (verify->parsed()) return cmd_verify(sc, o, out);
        warn_conditions(sc, *log);
        if (price->parsed()) return cmd_price(sc, o, out);
        if (share->parsed()) return cmd_share(sc, o, out);
        if (limit->parsed()) return cmd_limit(sc, o, out);
        if (simulate->parsed()) return cmd_simulate(sc, o, out, *log);
    } catch (const Error& e) {
        log->error("{}", e.what());
        return exit_code_for(e.kind());
    } catch (const std::exception& e) {
        log->error("{}", e.what());
        return kExitValidation;
    }
    return kExitValidation;
}

}  // namespace vrp
