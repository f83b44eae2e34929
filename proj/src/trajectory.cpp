#include "vrp/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "vrp/revenue_sharing.hpp"

namespace vrp {

std::string to_string(Termination t) {
    switch (t) {
        case Termination::HorizonEnd: return "HorizonEnd";
        case Termination::ReachedQstar: return "ReachedQstar";
        case Termination::Infeasible: return "Infeasible";
    }
    return "Infeasible";
}

std::vector<double> Trajectory::states() const {
    std::vector<double> out;
    out.reserve(records.size() + 1);
    for (const auto& r : records) out.push_back(r.q_state);
    out.push_back(final_state);
    return out;
}

ExpansionSolution max_feasible_expansion(const DemandModel& dm, const GridModel& model, double q) {
    return optimal_expansion(dm, model, q);
}

double reach_map(const DemandModel& dm, const GridModel& model, double q) {
    const ExpansionSolution es = max_feasible_expansion(dm, model, q);
    if (es.status == ExpansionStatus::Infeasible) {
        fail(ErrorKind::Validation, "reach map undefined: period is infeasible (R* < C)");
    }
    return q + es.expansion;
}

double reachability_bound(double market_size, double epsilon, double invest_cost,
                          double max_abs_de, double max_abs_dc) noexcept {
    const double scale = market_size / (std::numbers::e * epsilon);
    return 1.0 + (-scale * max_abs_de - max_abs_dc) / invest_cost;
}

namespace {

double optimal_revenue_at(const DemandModel& dm, const GridModel& model, double q) {
    const double e_q = model.emissions(q);
    return revenue(dm, optimal_price_for(dm, e_q, model.delivered(q)).price, e_q);
}

}  // namespace

ReachabilityCertificate certify_monotone_reachability(const DemandModel& dm,
                                                      const GridModel& model, double q_from,
                                                      int n_samples,
                                                      const ReachabilityPins& pins) {
    if (n_samples < 2) fail(ErrorKind::Argument, "certificate needs at least 2 samples");
    const EquilibriumResult eq = solve_long_run_limit(dm, model);
    const double k = model.invest_cost();
    const double h = default_derivative_step(model);
    const Interval dom = model.domain();
    const double lo = std::min(q_from, eq.q_star);
    const double hi = eq.q_star;

    ReachabilityCertificate cert;
    cert.n_samples = n_samples;
    cert.q_from = lo;
    cert.q_star = hi;
    cert.min_primitive_margin = std::numeric_limits<double>::infinity();
    cert.min_sampled_slope = std::numeric_limits<double>::infinity();

    const auto rstar = [&](double q) { return optimal_revenue_at(dm, model, q); };
    const auto cost = [&](double q) { return cost_integrated(model, q); };
    const auto emis = [&](double q) { return model.emissions(q); };

    const int n = hi > lo ? n_samples : 0;
    std::vector<double> qs(n + 1), ss(n + 1);
    bool feasible = true;
    double worst = std::numeric_limits<double>::infinity();
    const auto track = [&](double value, double q) {
        if (value < worst) {
            worst = value;
            cert.worst_q = q;
        }
    };
    for (int i = 0; i <= n; ++i) {
        const double q = n == 0 ? lo : (i == n ? hi : lo + (hi - lo) * i / n);
        qs[i] = q;
        const double r = rstar(q);
        const double c = cost(q);
        if (r - c < -equilibrium_tolerance(c)) {
            feasible = false;
            if (cert.note.empty()) cert.note = "infeasible state inside [Q_from, Q*]";
        }
        ss[i] = q + std::max(0.0, (r - c) / k);

        const double de = numeric_derivative(emis, dom, q, h).value;
        const double dc = numeric_derivative(cost, dom, q, h).value;
        cert.max_abs_de = std::max(cert.max_abs_de, std::fabs(de));
        cert.max_abs_dc = std::max(cert.max_abs_dc, std::fabs(dc));
        // The interval is half-open at Q*.
        if (i < n || n == 0) {
            const double dr = numeric_derivative(rstar, dom, q, h).value;
            const double margin = 1.0 + (dr - dc) / k;
            cert.min_primitive_margin = std::min(cert.min_primitive_margin, margin);
            track(margin, q);
        }
    }
    for (int i = 0; i < n; ++i) {
        const double slope = (ss[i + 1] - ss[i]) / (qs[i + 1] - qs[i]);
        cert.min_sampled_slope = std::min(cert.min_sampled_slope, slope);
        track(slope, qs[i]);
    }
    if (n == 0) cert.min_sampled_slope = 1.0;
    cert.min_margin = std::min(cert.min_primitive_margin, cert.min_sampled_slope);

    const double de_used = pins.max_abs_de.value_or(cert.max_abs_de);
    const double dc_used = pins.max_abs_dc.value_or(cert.max_abs_dc);
    cert.max_abs_de = de_used;
    cert.max_abs_dc = dc_used;
    cert.bound_formula_value =
        reachability_bound(dm.market_size(), dm.epsilon(), k, de_used, dc_used);
    cert.holds = feasible && cert.min_margin >= -kReachabilityTolerance;
    return cert;
}

Policy myopic_policy(const DemandModel& dm, const GridModel& model, std::optional<double> q_star) {
    return [dm, model, q_star](int, double q) {
        const ExpansionSolution es = optimal_expansion(dm, model, q);
        double x = es.status == ExpansionStatus::Infeasible ? 0.0 : es.expansion;
        if (q_star) x = std::min(x, std::max(0.0, *q_star - q));
        return PolicyDecision{es.price, x};
    };
}

namespace {

struct Evaluated {
    bool ok = false;
    std::string why;
    PeriodSolution solution;
};

// Checks a decision against deliverability, the integrated budget and the
// no-overbuild cap, then fills in the share and phase telemetry.
Evaluated evaluate_decision(const DemandModel& dm, const GridModel& model, double q,
                            const PolicyDecision& d, std::optional<double> cap) {
    Evaluated out;
    if (!std::isfinite(d.price) || !std::isfinite(d.expansion)) {
        out.why = "non-finite decision";
        return out;
    }
    if (d.price < 0.0 || d.expansion < 0.0) {
        out.why = "negative price or expansion";
        return out;
    }
    const double e_q = model.emissions(q);
    const double f_q = model.delivered(q);
    const double dem = demand(dm, d.price, e_q);
    const double r = d.price * dem;
    const double c = cost_integrated(model, q);
    const double k = model.invest_cost();
    const double tol = equilibrium_tolerance(c);

    if (dem - f_q > 1e-9 * std::max(1.0, f_q)) {
        out.why = "demand exceeds deliverable renewable output";
        return out;
    }
    const double slack = r - c - k * d.expansion;
    if (slack < -tol) {
        out.why = "revenue does not cover cost plus investment";
        return out;
    }
    if (cap && d.expansion > *cap - q + kQstarReachTolerance) {
        out.why = "expansion exceeds the no-overbuild cap Q* - Q";
        return out;
    }

    const double c2 = cost_generator(model, q);
    double gamma = 0.0;
    if (r > 0.0) {
        gamma = std::max(0.0, c2 / r);
    } else if (c2 > 0.0) {
        out.why = "no revenue to share with a generator shortfall";
        return out;
    }
    if (gamma >= 1.0) {
        out.why = "required revenue share gamma* >= 1";
        return out;
    }

    PeriodSolution& s = out.solution;
    s.price = d.price;
    s.expansion = d.expansion;
    s.share = gamma;
    s.revenue = r;
    s.deliverability_binding = std::fabs(dem - f_q) <= 1e-9 * std::max(1.0, f_q);
    s.financial_binding = std::fabs(slack) <= tol;
    s.phase = classify_phase(gamma, d.expansion, true);
    out.ok = true;
    return out;
}

void append(Trajectory& tr, int t, double q, double e_q, const PeriodSolution& s) {
    tr.records.push_back({t, q, e_q, s});
    tr.cumulative_expansion += s.expansion;
    tr.cumulative_emission_index += e_q;
}

}  // namespace

Trajectory simulate_policy(const DemandModel& dm, const GridModel& model,
                           const SimulationConfig& cfg, const Policy& policy,
                           std::optional<double> q_star) {
    if (cfg.horizon < 1) fail(ErrorKind::Validation, "horizon must be >= 1");
    if (cfg.q_init < 0.0) fail(ErrorKind::Validation, "Q_init must be nonnegative");
    model.require_in_domain(cfg.q_init);
    if (!policy) fail(ErrorKind::Argument, "policy is empty");

    Trajectory tr;
    tr.q_star = q_star;
    double q = cfg.q_init;
    tr.termination = Termination::HorizonEnd;
    for (int t = 0; t < cfg.horizon; ++t) {
        try {
            const double e_q = model.emissions(q);
            if (cfg.stop_at_qstar && q_star) {
                const ExpansionSolution es = optimal_expansion(dm, model, q);
                const bool at_limit = *q_star - q <= kQstarReachTolerance ||
                                      es.status == ExpansionStatus::Equilibrium;
                if (at_limit) {
                    const Evaluated ev =
                        evaluate_decision(dm, model, q, {es.price, 0.0}, q_star);
                    if (!ev.ok) {
                        tr.termination = Termination::Infeasible;
                        tr.note = ev.why;
                        break;
                    }
                    append(tr, t, q, e_q, ev.solution);
                    tr.termination = Termination::ReachedQstar;
                    break;
                }
            }
            const PolicyDecision d = policy(t, q);
            const Evaluated ev = evaluate_decision(dm, model, q, d, q_star);
            if (!ev.ok) {
                tr.termination = Termination::Infeasible;
                tr.note = "period " + std::to_string(t) + ": " + ev.why;
                break;
            }
            append(tr, t, q, e_q, ev.solution);
            q = q + d.expansion;
        } catch (const Error& err) {
            tr.termination = Termination::Infeasible;
            tr.note = "period " + std::to_string(t) + ": " + err.what();
            break;
        }
    }
    tr.final_state = q;
    return tr;
}

namespace {

std::optional<double> resolve_qstar(const DemandModel& dm, const GridModel& model,
                                    const SimulationConfig& cfg) {
    if (cfg.stop_at_qstar) return solve_long_run_limit(dm, model).q_star;
    try {
        return solve_long_run_limit(dm, model).q_star;
    } catch (const Error&) {
        return std::nullopt;
    }
}

}  // namespace

Trajectory simulate_policy(const DemandModel& dm, const GridModel& model,
                           const SimulationConfig& cfg, const Policy& policy) {
    return simulate_policy(dm, model, cfg, policy, resolve_qstar(dm, model, cfg));
}

Trajectory simulate_myopic(const DemandModel& dm, const GridModel& model,
                           const SimulationConfig& cfg) {
    const std::optional<double> q_star = resolve_qstar(dm, model, cfg);
    return simulate_policy(dm, model, cfg, myopic_policy(dm, model, q_star), q_star);
}

}  // namespace vrp
