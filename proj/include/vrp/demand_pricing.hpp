#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "vrp/grid_model.hpp"

namespace vrp {

/// Closed price interval; `hi` may be +infinity.
struct PriceInterval {
    double lo = 0.0;
    double hi = std::numeric_limits<double>::infinity();
};

using RevenueFn = std::function<double(double)>;

/// A user-supplied revenue curve p -> R(p) and the feasible price set it is
/// maximized over. Must be continuous and vanish as p -> infinity.
struct GenericRevenue {
    RevenueFn revenue;
    std::vector<PriceInterval> feasible;
};

enum class DemandKind { Exponential, Generic };

/// VRP demand D(x) = M exp(-eps x) in the effective price x = p / e(Q), or a
/// generic revenue curve.
class DemandModel {
public:
    static DemandModel exponential(double market_size, double epsilon);
    static DemandModel generic(double market_size, double epsilon, GenericRevenue revenue);

    double market_size() const noexcept { return market_size_; }
    double epsilon() const noexcept { return epsilon_; }
    DemandKind kind() const noexcept { return kind_; }
    const std::optional<GenericRevenue>& generic_revenue() const noexcept { return generic_; }

private:
    DemandModel(double m, double eps, DemandKind kind);

    double market_size_;
    double epsilon_;
    DemandKind kind_;
    std::optional<GenericRevenue> generic_;
};

enum class Phase { Phase1, Phase2, Phase3, Infeasible };

std::string to_string(Phase phase);
/// Integer label used in CSV output: 1, 2, 3; 0 for Infeasible.
int phase_number(Phase phase) noexcept;

/// Optimal single-period decision. Infeasible solutions carry NaN numerics.
struct PeriodSolution {
    double price = 0.0;      // p*, M$/GW/yr
    double expansion = 0.0;  // q*, GW
    double share = 0.0;      // gamma*
    double revenue = 0.0;    // R*, M$/yr
    bool deliverability_binding = false;
    bool financial_binding = false;
    Phase phase = Phase::Infeasible;

    static PeriodSolution infeasible();
    bool feasible() const noexcept { return phase != Phase::Infeasible; }
};

/// D = M exp(-eps p / e_Q). Throws Singularity when e_Q <= 0.
double demand(const DemandModel& dm, double price, double e_q);

/// R = p D(p / e_Q); generic models evaluate their own revenue curve.
double revenue(const DemandModel& dm, double price, double e_q);

/// dR/dp = D (1 - eps p / e_Q) for exponential demand.
double revenue_slope(const DemandModel& dm, double price, double e_q);

struct PriceSolution {
    double price = 0.0;
    bool deliverability_binding = false;
};

/// Two-regime closed form: p* = e/eps when M/exp(1) <= f, else (e/eps) ln(M/f).
PriceSolution optimal_price(const DemandModel& dm, const GridModel& model, double q);

/// Same closed form on raw primitives e(Q), f(Q).
PriceSolution optimal_price_for(const DemandModel& dm, double e_q, double f_q);

enum class ExpansionStatus { Expanding, Equilibrium, Infeasible };

std::string to_string(ExpansionStatus status);

struct ExpansionSolution {
    double expansion = 0.0;
    ExpansionStatus status = ExpansionStatus::Infeasible;
    double price = 0.0;
    double revenue = 0.0;
    double cost = 0.0;  // C(Q)
    bool deliverability_binding = false;
};

inline constexpr double kEquilibriumRelTol = 1e-8;

/// Tolerance used to decide R* == C: rel_tol * max(1, |C|).
inline double equilibrium_tolerance(double cost, double rel_tol = kEquilibriumRelTol) {
    return rel_tol * std::max(1.0, std::fabs(cost));
}

/// q* = max{0, (R* - C(Q)) / k} with the binding integrated financial constraint.
ExpansionSolution optimal_expansion(const DemandModel& dm, const GridModel& model, double q,
                                    double rel_tol = kEquilibriumRelTol);

struct RevenueMaximum {
    double price = 0.0;
    double revenue = 0.0;
};

struct RevenueSearchOptions {
    int coarse_brackets = 256;
    double rel_tol = 1e-12;  // golden-section termination, relative to the bracket scale
};

/// Global maximizer of a continuous revenue curve over a union of closed
/// intervals: coarse scan, then golden-section refinement of every local
/// peak bracket. Ties resolve to the smallest price.
RevenueMaximum maximize_revenue_generic(const RevenueFn& revenue,
                                        const std::vector<PriceInterval>& feasible,
                                        const RevenueSearchOptions& options = {});

/// Uses the generic revenue curve stored in a Generic demand model.
RevenueMaximum maximize_revenue_generic(const DemandModel& dm,
                                        const RevenueSearchOptions& options = {});

enum class KktProblem { Integrated, RevenueSharing };

/// Reconstructed multipliers and scaled residuals of the single-period KKT system.
///
/// Stationarity residuals are divided by the natural scale of each equation
/// (mu*D for the price equation, mu*R for the share equation); complementary
/// slackness and primal residuals are scaled by max(1, f) for deliverability
/// and max(1, |R|, |C|) for the budget constraints.
struct KktResiduals {
    double lambda = 0.0;  // deliverability
    double mu = 0.0;      // (operator) financial constraint
    double theta = 0.0;   // generator viability (sharing only)
    double nu = 0.0;      // q >= 0
    double eta = 0.0;     // p >= 0
    double alpha = 0.0;   // gamma >= 0 (sharing only)
    double beta = 0.0;    // gamma <= 1 (sharing only)
    double stationarity_p = 0.0;
    double stationarity_q = 0.0;
    double stationarity_gamma = 0.0;
    std::vector<double> comp_slackness;
    std::vector<double> primal_infeasibility;
    double max_abs_residual = 0.0;

    bool certified(double tol = 1e-6) const noexcept { return max_abs_residual <= tol; }
};

KktResiduals kkt_residuals(const DemandModel& dm, const GridModel& model, double q,
                           const PeriodSolution& solution, KktProblem problem);

}  // namespace vrp
