#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "vrp/demand_pricing.hpp"
#include "vrp/equilibrium.hpp"

namespace vrp {

struct SimulationConfig {
    double q_init = 0.0;
    int horizon = 1;
    bool stop_at_qstar = true;
    std::string period_label = "year";
};

enum class Termination { HorizonEnd, ReachedQstar, Infeasible };

std::string to_string(Termination t);

struct PeriodRecord {
    int t = 0;
    double q_state = 0.0;  // Q_t
    double emissions = 0.0;  // e(Q_t)
    PeriodSolution solution;
};

struct Trajectory {
    std::vector<PeriodRecord> records;
    Termination termination = Termination::HorizonEnd;
    double cumulative_expansion = 0.0;
    double cumulative_emission_index = 0.0;  // sum_t e(Q_t) over records
    double final_state = 0.0;                // Q after the last recorded period
    std::optional<double> q_star;
    std::string note;  // reason for Infeasible termination

    /// Q_0, ..., Q_T including the final state.
    std::vector<double> states() const;
};

struct PolicyDecision {
    double price = 0.0;
    double expansion = 0.0;
};

/// Per-period rule (t, Q_t) -> (p_t, q_t).
using Policy = std::function<PolicyDecision(int, double)>;

inline constexpr double kQstarReachTolerance = 1e-9;

/// q_bar(Q) = max{0, (R* - C) / k}; status Infeasible when R* < C.
ExpansionSolution max_feasible_expansion(const DemandModel& dm, const GridModel& model, double q);

/// S(Q) = Q + q_bar(Q). Throws Validation on an infeasible state.
double reach_map(const DemandModel& dm, const GridModel& model, double q);

/// 1 + (1/k) (-(M / (exp(1) eps)) max|e'| - max|C'|)
double reachability_bound(double market_size, double epsilon, double invest_cost,
                          double max_abs_de, double max_abs_dc) noexcept;

struct ReachabilityPins {
    std::optional<double> max_abs_de;
    std::optional<double> max_abs_dc;
};

struct ReachabilityCertificate {
    bool holds = false;
    double min_margin = 0.0;  // min of primitive margin and sampled S slope
    double worst_q = 0.0;
    double bound_formula_value = 0.0;
    double min_primitive_margin = 0.0;
    double min_sampled_slope = 0.0;
    double max_abs_de = 0.0;  // used in the bound (pinned or sampled)
    double max_abs_dc = 0.0;
    int n_samples = 0;
    double q_from = 0.0;
    double q_star = 0.0;
    std::string note;
};

inline constexpr double kReachabilityTolerance = 1e-9;

/// Samples [q_from, Q*] and evaluates 1 + (R*'(Q) - C'(Q)) / k and the
/// discrete slope of S. Holds iff both are >= -1e-9 everywhere.
ReachabilityCertificate certify_monotone_reachability(const DemandModel& dm,
                                                      const GridModel& model, double q_from,
                                                      int n_samples,
                                                      const ReachabilityPins& pins = {});

/// Myopic rule q = min{q_bar(Q), Q* - Q} at the optimal price.
Policy myopic_policy(const DemandModel& dm, const GridModel& model,
                     std::optional<double> q_star);

/// Runs an arbitrary policy, rejecting decisions that violate deliverability,
/// the integrated budget or the no-overbuild cap.
Trajectory simulate_policy(const DemandModel& dm, const GridModel& model,
                           const SimulationConfig& cfg, const Policy& policy);

/// Same as above with Q* already solved (nullopt disables the cap).
Trajectory simulate_policy(const DemandModel& dm, const GridModel& model,
                           const SimulationConfig& cfg, const Policy& policy,
                           std::optional<double> q_star);

Trajectory simulate_myopic(const DemandModel& dm, const GridModel& model,
                           const SimulationConfig& cfg);

}  // namespace vrp
