#include "vrp/demand_pricing.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace vrp {

DemandModel::DemandModel(double m, double eps, DemandKind kind)
    : market_size_(m), epsilon_(eps), kind_(kind) {
    if (!(m > 0.0) || !std::isfinite(m)) fail(ErrorKind::Validation, "market size M must be > 0");
    if (!(eps > 0.0) || !std::isfinite(eps)) fail(ErrorKind::Validation, "epsilon must be > 0");
}

DemandModel DemandModel::exponential(double market_size, double epsilon) {
    return DemandModel(market_size, epsilon, DemandKind::Exponential);
}

DemandModel DemandModel::generic(double market_size, double epsilon, GenericRevenue revenue) {
    if (!revenue.revenue) fail(ErrorKind::Argument, "generic demand needs a revenue function");
    DemandModel dm(market_size, epsilon, DemandKind::Generic);
    dm.generic_ = std::move(revenue);
    return dm;
}

std::string to_string(Phase phase) {
    switch (phase) {
        case Phase::Phase1: return "Phase1";
        case Phase::Phase2: return "Phase2";
        case Phase::Phase3: return "Phase3";
        case Phase::Infeasible: return "Infeasible";
    }
    return "Infeasible";
}

int phase_number(Phase phase) noexcept {
    switch (phase) {
        case Phase::Phase1: return 1;
        case Phase::Phase2: return 2;
        case Phase::Phase3: return 3;
        case Phase::Infeasible: return 0;
    }
    return 0;
}

std::string to_string(ExpansionStatus status) {
    switch (status) {
        case ExpansionStatus::Expanding: return "Expanding";
        case ExpansionStatus::Equilibrium: return "Equilibrium";
        case ExpansionStatus::Infeasible: return "Infeasible";
    }
    return "Infeasible";
}

PeriodSolution PeriodSolution::infeasible() {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    PeriodSolution s;
    s.price = s.expansion = s.share = s.revenue = nan;
    s.phase = Phase::Infeasible;
    return s;
}

namespace {

void require_exponential(const DemandModel& dm, const char* what) {
    if (dm.kind() != DemandKind::Exponential) {
        fail(ErrorKind::Argument, std::string(what) + " requires exponential demand");
    }
}

void require_intensity(double e_q) {
    if (!(e_q > 0.0)) {
        fail(ErrorKind::Singularity,
             "emissions intensity e(Q) <= 0: net-zero grid, VRP demand is undefined");
    }
}

}  // namespace

double demand(const DemandModel& dm, double price, double e_q) {
    require_exponential(dm, "demand");
    if (!(price >= 0.0)) fail(ErrorKind::Argument, "price must be nonnegative");
    require_intensity(e_q);
    return dm.market_size() * std::exp(-dm.epsilon() * price / e_q);
}

double revenue(const DemandModel& dm, double price, double e_q) {
    if (dm.kind() == DemandKind::Generic) {
        if (!(price >= 0.0)) fail(ErrorKind::Argument, "price must be nonnegative");
        return dm.generic_revenue()->revenue(price);
    }
    return price * demand(dm, price, e_q);
}

double revenue_slope(const DemandModel& dm, double price, double e_q) {
    return demand(dm, price, e_q) * (1.0 - dm.epsilon() * price / e_q);
}

PriceSolution optimal_price_for(const DemandModel& dm, double e_q, double f_q) {
    require_exponential(dm, "optimal_price");
    require_intensity(e_q);
    if (!(f_q > 0.0)) {
        fail(ErrorKind::NoSellableCredits, "delivered renewable output f(Q) <= 0: no credits to sell");
    }
    const double interior = e_q / dm.epsilon();
    const double demand_at_interior = dm.market_size() * std::exp(-1.0);
    if (demand_at_interior <= f_q) return {interior, false};
    return {interior * std::log(dm.market_size() / f_q), true};
}

PriceSolution optimal_price(const DemandModel& dm, const GridModel& model, double q) {
    return optimal_price_for(dm, model.emissions(q), model.delivered(q));
}

ExpansionSolution optimal_expansion(const DemandModel& dm, const GridModel& model, double q,
                                    double rel_tol) {
    const double e_q = model.emissions(q);
    const PriceSolution ps = optimal_price_for(dm, e_q, model.delivered(q));
    ExpansionSolution out;
    out.price = ps.price;
    out.deliverability_binding = ps.deliverability_binding;
    out.revenue = revenue(dm, ps.price, e_q);
    out.cost = cost_integrated(model, q);
    const double gap = out.revenue - out.cost;
    const double tol = equilibrium_tolerance(out.cost, rel_tol);
    if (std::fabs(gap) <= tol) {
        out.status = ExpansionStatus::Equilibrium;
        out.expansion = 0.0;
    } else if (gap > 0.0) {
        out.status = ExpansionStatus::Expanding;
        out.expansion = gap / model.invest_cost();
    } else {
        out.status = ExpansionStatus::Infeasible;
        out.expansion = 0.0;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Generic revenue maximization

namespace {

constexpr double kInvPhi = 0.6180339887498949;  // 1 / golden ratio

RevenueMaximum golden_section_max(const RevenueFn& r, double a, double b, double rel_tol) {
    const double tol = rel_tol * std::max({1.0, std::fabs(a), std::fabs(b)});
    double c = b - kInvPhi * (b - a);
    double d = a + kInvPhi * (b - a);
    double rc = r(c);
    double rd = r(d);
    for (int it = 0; it < 200 && (b - a) > tol; ++it) {
        if (rc >= rd) {
            b = d;
            d = c;
            rd = rc;
            c = b - kInvPhi * (b - a);
            rc = r(c);
        } else {
            a = c;
            c = d;
            rc = rd;
            d = a + kInvPhi * (b - a);
            rd = r(d);
        }
    }
    return rc >= rd ? RevenueMaximum{c, rc} : RevenueMaximum{d, rd};
}

// Finite cutoff for [lo, inf): widen until a whole doubling band is
// negligible relative to the best revenue seen.
double truncate_tail(const RevenueFn& r, double lo) {
    double best = std::max(0.0, r(lo));
    double span = std::max(1.0, std::fabs(lo));
    for (int it = 0; it < 128; ++it) {
        double band_max = 0.0;
        constexpr int kProbes = 16;
        for (int j = 1; j <= kProbes; ++j) {
            const double x = lo + span * (0.5 + 0.5 * j / kProbes);
            band_max = std::max(band_max, std::fabs(r(x)));
        }
        best = std::max(best, band_max);
        if (best > 0.0 && band_max <= 1e-12 * best) return lo + span;
        span *= 2.0;
    }
    return lo + span;
}

void consider(RevenueMaximum& best, bool& have, double p, double rv) {
    if (!have || rv > best.revenue || (rv == best.revenue && p < best.price)) {
        best = {p, rv};
        have = true;
    }
}

}  // namespace

RevenueMaximum maximize_revenue_generic(const RevenueFn& revenue_fn,
                                        const std::vector<PriceInterval>& feasible,
                                        const RevenueSearchOptions& options) {
    if (!revenue_fn) fail(ErrorKind::Argument, "revenue function is empty");
    std::vector<PriceInterval> bounded;
    for (const PriceInterval& iv : feasible) {
        if (std::isnan(iv.lo) || std::isnan(iv.hi) || iv.lo < 0.0 || iv.hi < iv.lo ||
            !std::isfinite(iv.lo)) {
            continue;
        }
        bounded.push_back({iv.lo, std::isfinite(iv.hi) ? iv.hi : truncate_tail(revenue_fn, iv.lo)});
    }
    if (bounded.empty()) fail(ErrorKind::Argument, "feasible price set is empty");
    std::sort(bounded.begin(), bounded.end(),
              [](const PriceInterval& a, const PriceInterval& b) { return a.lo < b.lo; });

    double total = 0.0;
    for (const auto& iv : bounded) total += iv.hi - iv.lo;
    const int budget = std::max(1, options.coarse_brackets);

    RevenueMaximum best{};
    bool have = false;
    for (const auto& iv : bounded) {
        const double len = iv.hi - iv.lo;
        if (len <= 0.0) {
            consider(best, have, iv.lo, revenue_fn(iv.lo));
            continue;
        }
        const int cells =
            std::max(1, static_cast<int>(std::ceil(budget * (total > 0.0 ? len / total : 1.0))));
        std::vector<double> ps(cells + 1), rs(cells + 1);
        for (int i = 0; i <= cells; ++i) {
            ps[i] = i == cells ? iv.hi : iv.lo + len * i / cells;
            rs[i] = revenue_fn(ps[i]);
            consider(best, have, ps[i], rs[i]);
        }
        for (int i = 0; i <= cells; ++i) {
            const bool left_ok = i == 0 || rs[i] >= rs[i - 1];
            const bool right_ok = i == cells || rs[i] >= rs[i + 1];
            if (!left_ok || !right_ok) continue;
            const double a = ps[std::max(0, i - 1)];
            const double b = ps[std::min(cells, i + 1)];
            const RevenueMaximum local = golden_section_max(revenue_fn, a, b, options.rel_tol);
            consider(best, have, local.price, local.revenue);
        }
    }
    return best;
}

RevenueMaximum maximize_revenue_generic(const DemandModel& dm, const RevenueSearchOptions& options) {
    if (dm.kind() != DemandKind::Generic || !dm.generic_revenue()) {
        fail(ErrorKind::Argument, "demand model has no generic revenue curve");
    }
    return maximize_revenue_generic(dm.generic_revenue()->revenue, dm.generic_revenue()->feasible,
                                    options);
}

// ---------------------------------------------------------------------------
// KKT residuals

namespace {

constexpr double kBindingRelTol = 1e-9;
constexpr double kZeroTol = 1e-12;

}  // namespace

KktResiduals kkt_residuals(const DemandModel& dm, const GridModel& model, double q,
                           const PeriodSolution& solution, KktProblem problem) {
    KktResiduals out;
    const double e = model.emissions(q);
    const double f = model.delivered(q);
    const double k = model.invest_cost();
    const double eps = dm.epsilon();
    const double p = solution.price;
    const double x = solution.expansion;
    const double gamma = problem == KktProblem::RevenueSharing ? solution.share : 0.0;

    const double d = demand(dm, std::max(0.0, p), e);
    const double r = p * d;
    const double r_p = d * (1.0 - eps * p / e);

    const double s_deliver = std::max(1.0, f);
    double h_deliver = d - f;
    double h_budget = 0.0;     // operator / integrated budget, <= 0 when feasible
    double h_generator = 0.0;  // sharing only
    double s_budget = 0.0;
    if (problem == KktProblem::Integrated) {
        const double c = cost_integrated(model, q);
        h_budget = c + k * x - r;
        s_budget = std::max({1.0, std::fabs(r), std::fabs(c)});
    } else {
        const double c1 = model.cost_system(q) + k * x;
        const double c2 = cost_generator(model, q);
        h_budget = c1 - (1.0 - gamma) * r;
        h_generator = c2 - gamma * r;
        s_budget = std::max({1.0, std::fabs(r), std::fabs(c1), std::fabs(c2)});
    }

    // nu, mu from the q-stationarity 1 - mu k + nu = 0.
    if (x > kZeroTol || std::fabs(h_budget) <= kBindingRelTol * s_budget) {
        out.mu = 1.0 / k;
        out.nu = 0.0;
    } else {
        out.mu = 0.0;
        out.nu = 0.0;
    }

    if (problem == KktProblem::RevenueSharing) {
        out.beta = 0.0;
        if (gamma > kZeroTol) {
            out.alpha = 0.0;
            out.theta = out.mu;
        } else {
            out.theta = 0.0;
            out.alpha = std::max(0.0, (out.mu - out.theta) * r);
        }
    }

    // Weight of R_p in the price stationarity.
    const double weight = problem == KktProblem::Integrated
                              ? out.mu
                              : out.mu * (1.0 - gamma) + out.theta * gamma;
    const bool deliver_binding = std::fabs(h_deliver) <= kBindingRelTol * s_deliver;
    out.lambda = deliver_binding ? std::max(0.0, weight * (p - e / eps)) : 0.0;
    out.eta = 0.0;
    if (p <= kZeroTol) out.eta = std::max(0.0, -(out.lambda * eps / e * d + weight * r_p));

    const double grad_p = out.lambda * eps / e * d + weight * r_p + out.eta;
    const double p_scale = weight * d;
    out.stationarity_p = p_scale > 0.0 ? grad_p / p_scale : grad_p;
    out.stationarity_q = 1.0 - out.mu * k + out.nu;
    if (problem == KktProblem::RevenueSharing) {
        const double grad_g = -out.mu * r + out.theta * r + out.alpha - out.beta;
        const double g_scale = out.mu * r;
        out.stationarity_gamma = g_scale > 0.0 ? grad_g / g_scale : grad_g;
    }

    out.comp_slackness.push_back(out.lambda * k * h_deliver / s_deliver);
    out.comp_slackness.push_back(out.mu * k * h_budget / s_budget);
    out.comp_slackness.push_back(out.nu * x);
    out.comp_slackness.push_back(out.eta * k * p / s_budget);
    out.primal_infeasibility.push_back(std::max(0.0, h_deliver) / s_deliver);
    out.primal_infeasibility.push_back(std::max(0.0, h_budget) / s_budget);
    out.primal_infeasibility.push_back(std::max(0.0, -x));
    out.primal_infeasibility.push_back(std::max(0.0, -p));
    if (problem == KktProblem::RevenueSharing) {
        out.comp_slackness.push_back(out.theta * k * h_generator / s_budget);
        out.comp_slackness.push_back(out.alpha * k * gamma / s_budget);
        out.comp_slackness.push_back(out.beta * (gamma - 1.0));
        out.primal_infeasibility.push_back(std::max(0.0, h_generator) / s_budget);
        out.primal_infeasibility.push_back(std::max(0.0, -gamma));
        out.primal_infeasibility.push_back(std::max(0.0, gamma - 1.0));
    }

    double worst = std::max({std::fabs(out.stationarity_p), std::fabs(out.stationarity_q),
                             std::fabs(out.stationarity_gamma)});
    for (double v : out.comp_slackness) worst = std::max(worst, std::fabs(v));
    for (double v : out.primal_infeasibility) worst = std::max(worst, v);
    if (std::isnan(worst)) worst = std::numeric_limits<double>::infinity();
    out.max_abs_residual = worst;
    return out;
}

}  // namespace vrp
