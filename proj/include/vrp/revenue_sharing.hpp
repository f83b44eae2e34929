#pragma once

#include "vrp/demand_pricing.hpp"

namespace vrp {

// Separated accounts: the operator keeps (1 - gamma) R and funds C_S + k q;
// the generator receives gamma R and covers C_R - f pi.

struct SharingSolution {
    double gamma_star = 0.0;
    double operator_budget_residual = 0.0;   // (1 - gamma) R - C_1, >= 0 when feasible
    double generator_budget_residual = 0.0;  // gamma R - C_2, >= 0 when feasible
    bool equivalent_to_integrated = false;
};

inline constexpr double kPhaseTolerance = 1e-9;
inline constexpr double kAggregationRelTol = 1e-8;

/// gamma* = max{0, C_2 / R*}. Throws NoRevenue when R* <= 0 and
/// InfeasibleSharing when gamma* >= 1.
double optimal_share(const DemandModel& dm, const GridModel& model, double q);

/// q(gamma) = max{0, ((1 - gamma) R* - C_S) / k} for gamma in [0, 1).
double expansion_given_share(const DemandModel& dm, const GridModel& model, double q,
                             double gamma);

/// Unclamped affine form ((1 - gamma) R* - C_S) / k.
double expansion_given_share_raw(double revenue_star, double cost_system, double invest_cost,
                                 double gamma);

struct SeparatedPeriod {
    PeriodSolution period;
    SharingSolution sharing;
};

SeparatedPeriod solve_separated_period(const DemandModel& dm, const GridModel& model, double q);

Phase classify_phase(double gamma, double q, bool feasible);

/// Integrated benchmark (p*, q*) with gamma* and phase attached. A period
/// whose required share reaches 1 is reported Infeasible.
PeriodSolution solve_integrated_period(const DemandModel& dm, const GridModel& model, double q);

}  // namespace vrp
