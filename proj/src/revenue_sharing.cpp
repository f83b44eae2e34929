#include "vrp/revenue_sharing.hpp"

#include <algorithm>
#include <cmath>

namespace vrp {

namespace {

struct PeriodPrimitives {
    PriceSolution price;
    double revenue;
    double cost_system;
    double cost_generator;
};

PeriodPrimitives primitives(const DemandModel& dm, const GridModel& model, double q) {
    const double e_q = model.emissions(q);
    const PriceSolution ps = optimal_price_for(dm, e_q, model.delivered(q));
    return {ps, revenue(dm, ps.price, e_q), model.cost_system(q), cost_generator(model, q)};
}

double share_from(double revenue_star, double c2) {
    if (!(revenue_star > 0.0)) fail(ErrorKind::NoRevenue, "optimal revenue R* is not positive");
    const double gamma = std::max(0.0, c2 / revenue_star);
    if (gamma >= 1.0) {
        fail(ErrorKind::InfeasibleSharing,
             "required revenue share gamma* >= 1: operator would retain no revenue");
    }
    return gamma;
}

}  // namespace

double optimal_share(const DemandModel& dm, const GridModel& model, double q) {
    const PeriodPrimitives pp = primitives(dm, model, q);
    return share_from(pp.revenue, pp.cost_generator);
}

double expansion_given_share_raw(double revenue_star, double cost_system, double invest_cost,
                                 double gamma) {
    return ((1.0 - gamma) * revenue_star - cost_system) / invest_cost;
}

double expansion_given_share(const DemandModel& dm, const GridModel& model, double q,
                             double gamma) {
    if (!(gamma >= 0.0 && gamma < 1.0)) fail(ErrorKind::Argument, "gamma must lie in [0, 1)");
    const PeriodPrimitives pp = primitives(dm, model, q);
    return std::max(
        0.0, expansion_given_share_raw(pp.revenue, pp.cost_system, model.invest_cost(), gamma));
}

Phase classify_phase(double gamma, double q, bool feasible) {
    if (!feasible || std::isnan(gamma) || std::isnan(q)) return Phase::Infeasible;
    const bool expanding = q > kPhaseTolerance;
    if (expanding) return std::fabs(gamma) <= kPhaseTolerance ? Phase::Phase1 : Phase::Phase2;
    return std::fabs(q) <= kPhaseTolerance ? Phase::Phase3 : Phase::Infeasible;
}

PeriodSolution solve_integrated_period(const DemandModel& dm, const GridModel& model, double q) {
    const ExpansionSolution es = optimal_expansion(dm, model, q);
    if (es.status == ExpansionStatus::Infeasible) return PeriodSolution::infeasible();
    PeriodSolution s;
    s.price = es.price;
    s.expansion = es.expansion;
    s.revenue = es.revenue;
    s.deliverability_binding = es.deliverability_binding;
    s.financial_binding = true;
    try {
        s.share = share_from(es.revenue, cost_generator(model, q));
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::InfeasibleSharing && e.kind() != ErrorKind::NoRevenue) throw;
        return PeriodSolution::infeasible();
    }
    s.phase = classify_phase(s.share, s.expansion, true);
    return s;
}

SeparatedPeriod solve_separated_period(const DemandModel& dm, const GridModel& model, double q) {
    const PeriodPrimitives pp = primitives(dm, model, q);
    const double k = model.invest_cost();
    const double gamma = share_from(pp.revenue, pp.cost_generator);

    const double raw = expansion_given_share_raw(pp.revenue, pp.cost_system, k, gamma);
    const double scale = std::max(1.0, std::fabs(pp.revenue));
    // Operator shortfall beyond tolerance means even q = 0 is unaffordable.
    const bool feasible = raw * k >= -equilibrium_tolerance(scale);
    double x = std::max(0.0, raw);
    if (feasible && raw * k <= equilibrium_tolerance(scale)) x = 0.0;

    SeparatedPeriod out;
    out.sharing.gamma_star = gamma;
    out.sharing.operator_budget_residual = (1.0 - gamma) * pp.revenue - (pp.cost_system + k * x);
    out.sharing.generator_budget_residual = gamma * pp.revenue - pp.cost_generator;

    if (!feasible) {
        out.period = PeriodSolution::infeasible();
        out.sharing.equivalent_to_integrated = false;
        return out;
    }

    out.period.price = pp.price.price;
    out.period.expansion = x;
    out.period.share = gamma;
    out.period.revenue = pp.revenue;
    out.period.deliverability_binding = pp.price.deliverability_binding;
    out.period.financial_binding =
        std::fabs(out.sharing.operator_budget_residual) <= kAggregationRelTol * scale;
    out.period.phase = classify_phase(gamma, x, true);

    if (gamma > kPhaseTolerance && x > kPhaseTolerance) {
        const double aggregate = cost_operator(model, q, x) + pp.cost_generator;
        out.sharing.equivalent_to_integrated =
            std::fabs(aggregate - pp.revenue) <= kAggregationRelTol * scale;
    } else {
        // gamma* = 0 coincides with the integrated benchmark only when C_2 = 0.
        out.sharing.equivalent_to_integrated =
            x <= kPhaseTolerance ||
            std::fabs(pp.cost_generator) <= kAggregationRelTol * scale;
    }
    return out;
}

}  // namespace vrp
