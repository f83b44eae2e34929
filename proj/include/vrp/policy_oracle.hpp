#pragma once

#include <cstdint>
#include <optional>

#include "vrp/trajectory.hpp"

namespace vrp {

struct EnumerationConfig {
    int action_grid_size = 5;    // g: fractions {0, 1/(g-1), ..., 1}
    int horizon = 3;
    std::int64_t max_policies = 100000;
    std::uint64_t seed = 0;
    bool allow_sampling = false;
    // A state counts as having hit Q* when Q* - Q <= hit_band.
    double hit_band = kQstarReachTolerance;
};

struct DominanceReport {
    std::int64_t n_policies = 0;
    bool sampled = false;
    std::uint64_t seed = 0;
    int horizon = 0;
    int action_grid_size = 0;
    std::int64_t infeasible_policies = 0;
    std::int64_t dominance_violations = 0;
    std::int64_t hitting_time_violations = 0;
    std::int64_t emission_violations = 0;
    double worst_state_gap = 0.0;      // max_t (Q_t^policy - Q_t^myopic)
    double worst_hitting_time_gap = 0.0;  // max (T^myopic - T^policy), <= 0 expected
    double worst_emission_gap = 0.0;   // max (E^myopic - E^policy), <= 0 expected
    int myopic_hitting_time = -1;      // -1 when Q* is not hit within the horizon
    std::optional<bool> certificate_holds;

    bool clean() const noexcept {
        return dominance_violations == 0 && hitting_time_violations == 0 &&
               emission_violations == 0;
    }
};

/// Enumerates every sequence of state-dependent action fractions of
/// min{q_bar(Q_t), Q* - Q_t} (or a seeded random subset) and compares each
/// trajectory against the myopic one. The report also carries the
/// monotone-reachability certificate from cfg.q_init, since dominance is only
/// guaranteed when it holds.
DominanceReport enumerate_and_compare(const DemandModel& dm, const GridModel& model,
                                      const SimulationConfig& cfg,
                                      const EnumerationConfig& ecfg);

struct PriceScan {
    double price = 0.0;
    double revenue = 0.0;
    double step = 0.0;
    double cap = 0.0;
    bool found = false;  // some grid point satisfied D <= f
};

/// Best revenue on a uniform grid of [0, max(10 e/eps, 2 (e/eps) ln(M/f))]
/// subject to D <= f.
PriceScan dense_scan_price(const DemandModel& dm, const GridModel& model, double q, int n_points);

struct RootScan {
    Interval bracket;
    bool found = false;
    bool degenerate = false;  // F(Q_dagger) = 0
    int sign_changes = 0;
    double q_dagger = 0.0;
};

/// Scans F(Q) on [Q_dagger, Q_max] for the first sign change.
RootScan dense_scan_equilibrium(const DemandModel& dm, const GridModel& model, int n_points);

}  // namespace vrp
