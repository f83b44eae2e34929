#include <doctest.h>

#include <cmath>

#include "random_models.hpp"
#include "vrp/scenario.hpp"
#include "vrp/trajectory.hpp"

using namespace vrp;

namespace {

constexpr double kE = 0.3;
constexpr double kEps = 0.0045;

struct Fixed {
    DemandModel dm;
    GridModel grid;
};

// Constant e and f; C(Q) = c0 + c1 Q through pi = -c0 / f.
Fixed linear_cost_case(double r_star, double c0, double c1, double k = 1000.0) {
    const double m = r_star * kEps * std::exp(1.0) / kE;
    const double f = 10.0 * m;
    GridModel g(GridCurve::constant(kE), GridCurve::constant(f), GridCurve::constant(-c0 / f),
                CostSpec{0.0, 0.0}, CostSpec{c1, 0.0}, k, Interval{0.0, 10.0});
    return {DemandModel::exponential(m, kEps), g};
}

const Scenario& baseline() {
    static const Scenario sc = load_scenario(VRP_SOURCE_DIR "/scenarios/baseline.json");
    return sc;
}

}  // namespace

TEST_CASE("maximal feasible expansion") {
    const Fixed a = linear_cost_case(200.0, 100.0, 0.0);
    CHECK(max_feasible_expansion(a.dm, a.grid, 1.0).expansion ==
          doctest::Approx(0.1).epsilon(1e-12));
    const Fixed eq = linear_cost_case(200.0, 200.0, 0.0);
    CHECK(max_feasible_expansion(eq.dm, eq.grid, 1.0).expansion == 0.0);
}

TEST_CASE("maximal expansion agrees with a 2-D grid search") {
    const Scenario& sc = baseline();
    const testing::RandomCase rc = testing::random_cases(1, 101, testing::Filter::Solvable)[0];
    struct Probe {
        const DemandModel* dm;
        const GridModel* grid;
        double q;
    };
    const std::vector<Probe> probes{{&sc.demand, &sc.grid, 0.5},
                                    {&sc.demand, &sc.grid, 5.0},
                                    {&rc.demand, &rc.grid, testing::kStartState},
                                    {&rc.demand, &rc.grid, 8.0}};
    for (const Probe& pr : probes) {
        const ExpansionSolution es = max_feasible_expansion(*pr.dm, *pr.grid, pr.q);
        if (es.status != ExpansionStatus::Expanding) continue;
        const double e = pr.grid->emissions(pr.q);
        const double f = pr.grid->delivered(pr.q);
        const double c = cost_integrated(*pr.grid, pr.q);
        const double k = pr.grid->invest_cost();
        const double m = pr.dm->market_size();
        const double p_cap = 3.0 * es.price;
        const double q_cap = 2.0 * es.expansion;
        constexpr int kN = 2000;
        double best = -1.0;
        for (int i = 0; i < kN; ++i) {
            const double p = p_cap * i / (kN - 1);
            const double d = m * std::exp(-pr.dm->epsilon() * p / e);
            if (d > f) continue;
            const double budget = p * d - c;
            for (int j = kN - 1; j >= 0; --j) {
                const double q = q_cap * j / (kN - 1);
                if (budget - k * q >= 0.0) {
                    best = std::max(best, q);
                    break;
                }
            }
        }
        const double q_step = q_cap / (kN - 1);
        const double p_step = p_cap / (kN - 1);
        CHECK(best <= es.expansion + 1e-12);
        CHECK(es.expansion - best <= q_step + 10.0 * m * p_step / k);
    }
}

TEST_CASE("reach map") {
    const Fixed eq = linear_cost_case(200.0, 200.0, 0.0);
    CHECK(reach_map(eq.dm, eq.grid, 2.0) == 2.0);
    const Fixed a = linear_cost_case(200.0, 100.0, 0.0);
    CHECK(reach_map(a.dm, a.grid, 1.0) == doctest::Approx(1.1).epsilon(1e-12));
    const Fixed bad = linear_cost_case(50.0, 100.0, 0.0);
    CHECK_THROWS_AS(reach_map(bad.dm, bad.grid, 1.0), Error);

    const Scenario& sc = baseline();
    const double q_star = solve_long_run_limit(sc.demand, sc.grid).q_star;
    const double lo = sc.simulation.q_init;
    double prev = reach_map(sc.demand, sc.grid, lo);
    for (int i = 1; i < 500; ++i) {
        const double s = reach_map(sc.demand, sc.grid, lo + (q_star - lo) * i / 499.0);
        CHECK(s >= prev);
        prev = s;
    }
    const ReachabilityCertificate cert =
        certify_monotone_reachability(sc.demand, sc.grid, lo, 500);
    CHECK(cert.holds);
}

TEST_CASE("reachability bound") {
    CHECK(reachability_bound(10.0, 0.0045, 1000.0, 0.1, 150.0) ==
          doctest::Approx(0.768).epsilon(0.001 / 0.768));
    CHECK(reachability_bound(10.0, 0.0045, 1000.0, 0.0, 0.0) == 1.0);

    const Scenario& sc = baseline();
    const ReachabilityCertificate pinned =
        certify_monotone_reachability(sc.demand, sc.grid, 0.5, 200, sc.pins);
    CHECK(std::fabs(pinned.bound_formula_value - 0.768) <= 0.001);
    CHECK(pinned.bound_formula_value > 0.0);
    CHECK(pinned.min_margin >= pinned.bound_formula_value);

    const Fixed flat = linear_cost_case(200.0, 100.0, 10.0);
    const ReachabilityCertificate cf = certify_monotone_reachability(flat.dm, flat.grid, 0.0, 50);
    CHECK(cf.bound_formula_value == doctest::Approx(1.0 - 10.0 / 1000.0).epsilon(1e-6));
    CHECK(cf.holds);
}

TEST_CASE("steep cost defeats the certificate") {
    // C' = 2000 with k = 1000 makes S decrease.
    const Fixed adv = linear_cost_case(200.0, 0.0, 2000.0);
    const ReachabilityCertificate c = certify_monotone_reachability(adv.dm, adv.grid, 0.0, 100);
    CHECK(c.bound_formula_value < 0.0);
    CHECK_FALSE(c.holds);
    CHECK(c.min_sampled_slope == doctest::Approx(-1.0).epsilon(1e-6));
    const double s0 = reach_map(adv.dm, adv.grid, 0.0);
    const double s1 = reach_map(adv.dm, adv.grid, 0.05);
    CHECK(s1 < s0);
}

TEST_CASE("simulation from the limit stops at once") {
    const Scenario& sc = baseline();
    const double q_star = solve_long_run_limit(sc.demand, sc.grid).q_star;
    SimulationConfig cfg{q_star, 50, true, "year"};
    const Trajectory tr = simulate_myopic(sc.demand, sc.grid, cfg);
    REQUIRE(tr.records.size() == 1);
    CHECK(tr.records[0].solution.expansion == 0.0);
    CHECK(tr.termination == Termination::ReachedQstar);
    CHECK(tr.final_state == q_star);
}

TEST_CASE("two periods by hand") {
    // R* = 200 and C = 100 + 50 Q, so Q* = 2.
    const Fixed a = linear_cost_case(200.0, 100.0, 50.0);
    const Trajectory tr = simulate_myopic(a.dm, a.grid, SimulationConfig{0.0, 2, true, "year"});
    REQUIRE(tr.records.size() == 2);
    const double q1 = 0.0 + (200.0 - 100.0) / 1000.0;
    const double q2 = q1 + (200.0 - (100.0 + 50.0 * q1)) / 1000.0;
    CHECK(tr.records[1].q_state == doctest::Approx(q1).epsilon(1e-12));
    CHECK(tr.final_state == doctest::Approx(q2).epsilon(1e-12));
    CHECK(tr.termination == Termination::HorizonEnd);
    CHECK(tr.cumulative_expansion == doctest::Approx(q2).epsilon(1e-12));
}

TEST_CASE("arbitrary policies") {
    const Scenario& sc = baseline();
    const double q_star = solve_long_run_limit(sc.demand, sc.grid).q_star;
    SimulationConfig cfg = sc.simulation;
    cfg.horizon = 30;

    const Policy idle = [&](int, double q) {
        return PolicyDecision{optimal_price(sc.demand, sc.grid, q).price, 0.0};
    };
    const Trajectory flat = simulate_policy(sc.demand, sc.grid, cfg, idle);
    CHECK(flat.termination == Termination::HorizonEnd);
    for (double s : flat.states()) CHECK(s == cfg.q_init);

    const Policy half = [&](int, double q) {
        const ExpansionSolution es = max_feasible_expansion(sc.demand, sc.grid, q);
        return PolicyDecision{es.price, 0.5 * std::min(es.expansion, q_star - q)};
    };
    const Trajectory h = simulate_policy(sc.demand, sc.grid, cfg, half);
    const Trajectory m = simulate_myopic(sc.demand, sc.grid, cfg);
    const auto hs = h.states();
    const auto ms = m.states();
    for (std::size_t t = 0; t < std::min(hs.size(), ms.size()); ++t) CHECK(hs[t] <= ms[t]);

    const Policy greedy = [&](int, double q) {
        const ExpansionSolution es = max_feasible_expansion(sc.demand, sc.grid, q);
        return PolicyDecision{es.price, 2.0 * es.expansion};
    };
    const Trajectory over = simulate_policy(sc.demand, sc.grid, cfg, greedy);
    CHECK(over.termination == Termination::Infeasible);
    CHECK(over.records.empty());
    CHECK(over.note.find("revenue does not cover") != std::string::npos);

    const Policy cheap = [&](int, double) { return PolicyDecision{0.0, 0.0}; };
    const Trajectory flood = simulate_policy(sc.demand, sc.grid, cfg, cheap);
    CHECK(flood.termination == Termination::Infeasible);
    CHECK(flood.note.find("deliverable") != std::string::npos);

    // Myopic at an infeasible start truncates instead of clamping.
    const Fixed poor = linear_cost_case(50.0, 100.0, 0.0);
    const Trajectory none =
        simulate_myopic(poor.dm, poor.grid, SimulationConfig{0.0, 5, false, "year"});
    CHECK(none.termination == Termination::Infeasible);
    CHECK(none.records.empty());

    CHECK_THROWS_AS(simulate_policy(sc.demand, sc.grid, SimulationConfig{0.5, 0, true, "y"}, idle),
                    Error);
    CHECK_THROWS_AS(simulate_policy(sc.demand, sc.grid, SimulationConfig{-1.0, 3, true, "y"}, idle),
                    Error);
}

TEST_CASE("myopic paths on certified random models") {
    for (const auto& rc : testing::random_cases(30, 111, testing::Filter::Certified)) {
        const EquilibriumResult eq = solve_long_run_limit(rc.demand, rc.grid);
        const Trajectory tr =
            simulate_myopic(rc.demand, rc.grid, SimulationConfig{testing::kStartState, 2000, true, "year"});
        CHECK(tr.termination == Termination::ReachedQstar);
        double prev_price = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < tr.records.size(); ++i) {
            const PeriodRecord& r = tr.records[i];
            const double next = i + 1 < tr.records.size() ? tr.records[i + 1].q_state
                                                          : tr.final_state;
            CHECK(next == r.q_state + r.solution.expansion);
            CHECK(next >= r.q_state);
            CHECK(next <= eq.q_star + kQstarReachTolerance);
            CHECK(r.solution.price <= prev_price * (1.0 + 1e-12));
            prev_price = r.solution.price;
        }
    }
}
