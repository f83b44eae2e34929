#include "vrp/policy_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace vrp {

namespace {

struct PathSummary {
    std::vector<double> states;  // Q_0..Q_H, held at the fixed point after early stop
    int hitting_time = -1;
    bool feasible = true;
};

PathSummary summarize(const Trajectory& tr, int horizon, std::optional<double> q_star,
                      double hit_band) {
    PathSummary s;
    s.feasible = tr.termination != Termination::Infeasible;
    s.states = tr.states();
    // A ReachedQstar record repeats its state; the recorded final state
    // equals the last record state in that case.
    s.states.resize(static_cast<std::size_t>(horizon) + 1, tr.final_state);
    if (q_star) {
        for (std::size_t t = 0; t < s.states.size(); ++t) {
            if (*q_star - s.states[t] <= hit_band) {
                s.hitting_time = static_cast<int>(t);
                break;
            }
        }
    }
    return s;
}

double emission_sum(const GridModel& model, const std::vector<double>& states, int upto) {
    double sum = 0.0;
    for (int t = 0; t <= upto && t < static_cast<int>(states.size()); ++t) {
        sum += model.emissions(states[t]);
    }
    return sum;
}

}  // namespace

DominanceReport enumerate_and_compare(const DemandModel& dm, const GridModel& model,
                                      const SimulationConfig& cfg,
                                      const EnumerationConfig& ecfg) {
    if (ecfg.action_grid_size < 2) fail(ErrorKind::Configuration, "action grid size must be >= 2");
    if (ecfg.horizon < 1) fail(ErrorKind::Configuration, "enumeration horizon must be >= 1");
    if (ecfg.max_policies < 1) fail(ErrorKind::Configuration, "max_policies must be >= 1");

    const int g = ecfg.action_grid_size;
    const int h = ecfg.horizon;
    SimulationConfig sim = cfg;
    sim.horizon = h;
    sim.stop_at_qstar = true;
    const std::optional<double> q_star = solve_long_run_limit(dm, model).q_star;

    // Total policy count g^h, saturating at max_policies + 1.
    std::int64_t total = 1;
    for (int i = 0; i < h && total <= ecfg.max_policies; ++i) total *= g;

    DominanceReport rep;
    rep.horizon = h;
    rep.action_grid_size = g;
    rep.seed = ecfg.seed;
    rep.sampled = total > ecfg.max_policies;
    if (rep.sampled && !ecfg.allow_sampling) {
        fail(ErrorKind::Configuration,
             "policy count exceeds max_policies; enable sampling or shrink the grid");
    }

    try {
        rep.certificate_holds =
            certify_monotone_reachability(dm, model, cfg.q_init, 200).holds;
    } catch (const Error&) {
        rep.certificate_holds = false;
    }

    const Trajectory myo = simulate_myopic(dm, model, sim);
    const PathSummary ms = summarize(myo, h, q_star, ecfg.hit_band);
    rep.myopic_hitting_time = ms.hitting_time;
    const int emission_upto = ms.hitting_time >= 0 ? ms.hitting_time : h;
    const double e_myo = emission_sum(model, ms.states, emission_upto);

    std::mt19937_64 rng(ecfg.seed);
    std::uniform_int_distribution<int> pick(0, g - 1);
    const std::int64_t n = rep.sampled ? ecfg.max_policies : total;
    std::vector<int> seq(static_cast<std::size_t>(h), 0);
    rep.worst_state_gap = -std::numeric_limits<double>::infinity();
    rep.worst_hitting_time_gap = -std::numeric_limits<double>::infinity();
    rep.worst_emission_gap = -std::numeric_limits<double>::infinity();

    for (std::int64_t idx = 0; idx < n; ++idx) {
        if (rep.sampled) {
            for (int& v : seq) v = pick(rng);
        } else {
            std::int64_t rem = idx;
            for (int t = 0; t < h; ++t) {
                seq[t] = static_cast<int>(rem % g);
                rem /= g;
            }
        }
        const Policy policy = [&](int t, double q) {
            const ExpansionSolution es = optimal_expansion(dm, model, q);
            double room = es.status == ExpansionStatus::Infeasible ? 0.0 : es.expansion;
            room = std::min(room, std::max(0.0, *q_star - q));
            const double frac = static_cast<double>(seq[t]) / (g - 1);
            return PolicyDecision{es.price, frac * room};
        };
        const Trajectory tr = simulate_policy(dm, model, sim, policy, q_star);
        ++rep.n_policies;
        const PathSummary ps = summarize(tr, h, q_star, ecfg.hit_band);
        if (!ps.feasible) {
            ++rep.infeasible_policies;
            continue;
        }

        bool dominated = true;
        for (int t = 0; t <= h; ++t) {
            const double gap = ps.states[t] - ms.states[t];
            rep.worst_state_gap = std::max(rep.worst_state_gap, gap);
            if (gap > 1e-9 * std::max(1.0, std::fabs(ms.states[t]))) dominated = false;
        }
        if (!dominated) ++rep.dominance_violations;

        const int t_pol = ps.hitting_time >= 0 ? ps.hitting_time : h + 1;
        const int t_myo = ms.hitting_time >= 0 ? ms.hitting_time : h + 1;
        rep.worst_hitting_time_gap =
            std::max(rep.worst_hitting_time_gap, static_cast<double>(t_myo - t_pol));
        if (t_myo > t_pol) ++rep.hitting_time_violations;

        const double e_pol = emission_sum(model, ps.states, emission_upto);
        const double egap = e_myo - e_pol;
        rep.worst_emission_gap = std::max(rep.worst_emission_gap, egap);
        if (egap > 1e-9 * std::max(1.0, std::fabs(e_pol))) ++rep.emission_violations;
    }
    return rep;
}

PriceScan dense_scan_price(const DemandModel& dm, const GridModel& model, double q, int n_points) {
    if (n_points < 2) fail(ErrorKind::Argument, "price scan needs at least 2 points");
    const double e_q = model.emissions(q);
    const double f_q = model.delivered(q);
    const double base = e_q / dm.epsilon();
    PriceScan out;
    out.cap = std::max(10.0 * base, f_q > 0.0 ? 2.0 * base * std::log(dm.market_size() / f_q) : 0.0);
    out.step = out.cap / (n_points - 1);
    const double m = dm.market_size();
    const double scale = dm.epsilon() / e_q;
    for (int i = 0; i < n_points; ++i) {
        const double p = i == n_points - 1 ? out.cap : out.step * i;
        const double d = m * std::exp(-scale * p);
        if (d > f_q) continue;
        const double r = p * d;
        if (!out.found || r > out.revenue) {
            out.found = true;
            out.price = p;
            out.revenue = r;
        }
    }
    return out;
}

RootScan dense_scan_equilibrium(const DemandModel& dm, const GridModel& model, int n_points) {
    if (n_points < 2) fail(ErrorKind::Argument, "root scan needs at least 2 points");
    RootScan out;
    out.q_dagger = find_deliverability_threshold(dm, model);
    const double lo = out.q_dagger;
    const double hi = model.domain().hi;
    const auto gap = [&](double q) { return equilibrium_gap(dm, model, q); };

    double prev_q = lo;
    double prev = gap(lo);
    if (std::fabs(prev) <= equilibrium_tolerance(cost_integrated(model, lo))) {
        out.found = true;
        out.degenerate = true;
        out.bracket = {lo, lo};
    }
    for (int i = 1; i < n_points; ++i) {
        const double q = i == n_points - 1 ? hi : lo + (hi - lo) * i / (n_points - 1);
        const double v = gap(q);
        if ((prev > 0.0 && v <= 0.0) || (prev < 0.0 && v >= 0.0)) {
            ++out.sign_changes;
            if (!out.found) {
                out.found = true;
                out.bracket = {prev_q, q};
            }
        }
        prev_q = q;
        prev = v;
    }
    return out;
}

}  // namespace vrp
