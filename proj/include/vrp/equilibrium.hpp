#pragma once

#include <vector>

#include "vrp/demand_pricing.hpp"

namespace vrp {

struct EquilibriumResult {
    double q_star = 0.0;
    double q_dagger = 0.0;
    double e_at_qstar = 0.0;
    double residual = 0.0;  // |F(Q*)|
    double tolerance = 0.0; // 1e-8 * max(1, |C(Q*)|)
    Interval bracket;
    int iterations = 0;
    bool domain_capped = false;
    // C nondecreasing on samples of [Q_dagger, Q_max]; uniqueness needs it.
    bool cost_monotone_beyond_threshold = true;

    bool converged() const noexcept { return !domain_capped && residual <= tolerance; }
};

/// Long-run revenue in the non-binding regime, (M / (exp(1) eps)) e(Q).
double unconstrained_revenue(const DemandModel& dm, double e_q) noexcept;

/// F(Q) = (M / (exp(1) eps)) e(Q) - C(Q).
double equilibrium_gap(const DemandModel& dm, const GridModel& model, double q);

/// Smallest Q in the domain with f(Q) >= M exp(-1).
double find_deliverability_threshold(const DemandModel& dm, const GridModel& model);

struct EquilibriumOptions {
    double rel_tol = kEquilibriumRelTol;
    double width_rel_tol = 1e-10;
    int max_iterations = 200;
    int monotonicity_samples = 512;
};

EquilibriumResult solve_long_run_limit(const DemandModel& dm, const GridModel& model,
                                       const EquilibriumOptions& options = {});

bool check_nonvanishing_emissions(const EquilibriumResult& result) noexcept;

/// Max relative spread of Q* when the model is re-solved with each k.
double check_k_independence(const DemandModel& dm, const GridModel& model,
                            const std::vector<double>& k_values);

}  // namespace vrp
