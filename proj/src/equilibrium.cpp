#include "vrp/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace vrp {

double unconstrained_revenue(const DemandModel& dm, double e_q) noexcept {
    return dm.market_size() / (std::numbers::e * dm.epsilon()) * e_q;
}

double equilibrium_gap(const DemandModel& dm, const GridModel& model, double q) {
    return unconstrained_revenue(dm, model.emissions(q)) - cost_integrated(model, q);
}

double find_deliverability_threshold(const DemandModel& dm, const GridModel& model) {
    const double target = dm.market_size() * std::exp(-1.0);
    const Interval dom = model.domain();
    if (model.delivered(dom.lo) >= target) return dom.lo;
    if (model.delivered(dom.hi) < target) {
        fail(ErrorKind::ThresholdUnreachable,
             "f(Q_max) < M exp(-1): deliverability binds on the whole domain");
    }
    double lo = dom.lo;
    double hi = dom.hi;
    const double width_tol = 1e-13 * std::max(1.0, std::fabs(dom.hi));
    for (int it = 0; it < 200 && hi - lo > width_tol; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (model.delivered(mid) >= target) hi = mid;
        else lo = mid;
    }
    return hi;
}

EquilibriumResult solve_long_run_limit(const DemandModel& dm, const GridModel& model,
                                       const EquilibriumOptions& options) {
    const Interval dom = model.domain();
    EquilibriumResult out;
    out.q_dagger = find_deliverability_threshold(dm, model);

    const auto tol_at = [&](double q) {
        return equilibrium_tolerance(cost_integrated(model, q), options.rel_tol);
    };
    const auto finish = [&](double q) {
        out.q_star = q;
        out.e_at_qstar = model.emissions(q);
        out.residual = std::fabs(equilibrium_gap(dm, model, q));
        out.tolerance = tol_at(q);
        return out;
    };

    {
        const int n = std::max(2, options.monotonicity_samples);
        double prev = cost_integrated(model, out.q_dagger);
        for (int i = 1; i <= n && out.cost_monotone_beyond_threshold; ++i) {
            const double q = out.q_dagger + (dom.hi - out.q_dagger) * i / n;
            const double c = cost_integrated(model, q);
            if (c < prev - kMonotoneTolerance * std::max(1.0, std::fabs(prev))) {
                out.cost_monotone_beyond_threshold = false;
            }
            prev = c;
        }
    }

    double lo = out.q_dagger;
    const double f_lo = equilibrium_gap(dm, model, lo);
    if (std::fabs(f_lo) <= tol_at(lo)) {
        out.bracket = {lo, lo};
        return finish(lo);
    }
    if (f_lo < 0.0) {
        fail(ErrorKind::InfeasibleAtThreshold,
             "revenue cannot cover cost at the deliverability threshold (F(Q_dagger) < 0)");
    }

    double hi = std::min(2.0 * lo + 1.0, dom.hi);
    while (equilibrium_gap(dm, model, hi) > 0.0) {
        if (hi >= dom.hi) {
            out.domain_capped = true;
            out.bracket = {lo, dom.hi};
            return finish(dom.hi);
        }
        lo = hi;
        hi = std::min(2.0 * hi, dom.hi);
    }
    out.bracket = {lo, hi};

    double a = lo;
    double b = hi;
    double best = hi;
    for (int it = 0; it < options.max_iterations; ++it) {
        const double mid = 0.5 * (a + b);
        const double fm = equilibrium_gap(dm, model, mid);
        out.iterations = it + 1;
        best = mid;
        if (std::fabs(fm) <= tol_at(mid)) break;
        if (fm > 0.0) a = mid;
        else b = mid;
        if (b - a <= options.width_rel_tol * hi) {
            best = std::fabs(equilibrium_gap(dm, model, a)) <= std::fabs(equilibrium_gap(dm, model, b))
                       ? a
                       : b;
            break;
        }
    }
    return finish(best);
}

bool check_nonvanishing_emissions(const EquilibriumResult& result) noexcept {
    return result.e_at_qstar > 1e-12;
}

double check_k_independence(const DemandModel& dm, const GridModel& model,
                            const std::vector<double>& k_values) {
    if (k_values.empty()) fail(ErrorKind::Argument, "k_values must not be empty");
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (double k : k_values) {
        if (!(k > 0.0)) fail(ErrorKind::Argument, "k values must be positive");
        const double q = solve_long_run_limit(dm, model.with_invest_cost(k)).q_star;
        lo = std::min(lo, q);
        hi = std::max(hi, q);
    }
    return (hi - lo) / std::max({std::fabs(lo), std::fabs(hi), 1e-300});
}

}  // namespace vrp
