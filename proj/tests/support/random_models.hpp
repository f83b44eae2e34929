#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "vrp/demand_pricing.hpp"
#include "vrp/grid_model.hpp"

namespace vrp::testing {

// Randomized exponential-demand models with smooth primitives:
//   e  = a exp(-b Q)
//   f  = F (1 - exp(-c Q))
//   pi = p0 exp(-d Q)
// plus quadratic costs and a domain of [0, 30].
struct RandomCase {
    DemandModel demand;
    GridModel grid;
    std::uint64_t draw = 0;
};

// f(0) = 0 leaves nothing to sell at Q = 0, so random runs start here.
inline constexpr double kStartState = 0.5;

enum class Filter {
    Accepted,   // passes validate_grid_conditions
    Hypotheses, // accepted, Q_dagger exists and F(Q_dagger) >= 0
    Solvable,   // hypotheses hold, the limit converges and kStartState is feasible
    Certified,  // solvable and monotone reachability holds from kStartState
};

RandomCase draw_case(std::mt19937_64& rng, std::uint64_t draw);

/// First n draws from `seed` that pass the filter.
std::vector<RandomCase> random_cases(int n, std::uint64_t seed, Filter filter);

/// Smooth exponential-curve grid with explicit parameters.
GridModel smooth_grid(double a, double b, double big_f, double c, double p0, double d,
                      CostSpec cost_renewable, CostSpec cost_system, double k,
                      double q_max = 30.0);

}  // namespace vrp::testing
