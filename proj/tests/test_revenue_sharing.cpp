#include <doctest.h>

#include <cmath>
#include <random>

#include "random_models.hpp"
#include "vrp/equilibrium.hpp"
#include "vrp/revenue_sharing.hpp"

using namespace vrp;

namespace {

constexpr double kE = 0.3;
constexpr double kEps = 0.0045;

struct Fixed {
    DemandModel dm;
    GridModel grid;
};

// Constant primitives at Q = 1 with unconstrained R*, C_S and C_2 as given.
Fixed fixed_case(double r_star, double cs, double c2, double k = 1000.0) {
    const double m = r_star * kEps * std::exp(1.0) / kE;
    const double f = 10.0 * m;
    const double pi = c2 < 0.0 ? -c2 / f : 0.0;
    GridModel g(GridCurve::constant(kE), GridCurve::constant(f), GridCurve::constant(pi),
                CostSpec{std::max(c2, 0.0), 0.0}, CostSpec{cs, 0.0}, k, Interval{0.0, 10.0});
    return {DemandModel::exponential(m, kEps), g};
}

template <class Fn>
void require_error(ErrorKind kind, Fn&& fn) {
    try {
        fn();
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.kind() == kind);
    }
}

}  // namespace

TEST_CASE("optimal share") {
    const Fixed surplus = fixed_case(200.0, 10.0, -10.0);
    CHECK(cost_generator(surplus.grid, 1.0) == doctest::Approx(-10.0).epsilon(1e-12));
    CHECK(optimal_share(surplus.dm, surplus.grid, 1.0) == 0.0);

    const Fixed quarter = fixed_case(200.0, 10.0, 50.0);
    CHECK(optimal_share(quarter.dm, quarter.grid, 1.0) == doctest::Approx(0.25).epsilon(1e-13));

    const Fixed over = fixed_case(200.0, 10.0, 250.0);
    require_error(ErrorKind::InfeasibleSharing, [&] { optimal_share(over.dm, over.grid, 1.0); });
    const SeparatedPeriod dummy{};
    CHECK_FALSE(dummy.period.feasible());
    require_error(ErrorKind::InfeasibleSharing,
                  [&] { solve_separated_period(over.dm, over.grid, 1.0); });
    CHECK_FALSE(solve_integrated_period(over.dm, over.grid, 1.0).feasible());
}

TEST_CASE("expansion under a given share") {
    const Fixed a = fixed_case(200.0, 20.0, 0.0);
    CHECK(expansion_given_share(a.dm, a.grid, 1.0, 0.0) ==
          doctest::Approx((200.0 - 20.0) / 1000.0).epsilon(1e-12));
    CHECK(expansion_given_share(a.dm, a.grid, 1.0, 0.25) == doctest::Approx(0.13).epsilon(1e-12));
    CHECK(expansion_given_share_raw(200.0, 20.0, 1000.0, 0.25) ==
          doctest::Approx(0.13).epsilon(1e-14));
    CHECK(expansion_given_share(a.dm, a.grid, 1.0, 0.95) == 0.0);
    require_error(ErrorKind::Argument, [&] { expansion_given_share(a.dm, a.grid, 1.0, 1.0); });
    require_error(ErrorKind::Argument, [&] { expansion_given_share(a.dm, a.grid, 1.0, -0.1); });

    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> ug(0.0, 1.0);
    for (int i = 0; i < 100; ++i) {
        double g1 = ug(rng) * 0.999;
        double g2 = ug(rng) * 0.999;
        if (g1 > g2) std::swap(g1, g2);
        CHECK(expansion_given_share(a.dm, a.grid, 1.0, g1) >=
              expansion_given_share(a.dm, a.grid, 1.0, g2));
        // Affine before clamping.
        const double r1 = expansion_given_share_raw(200.0, 20.0, 1000.0, g1);
        const double r2 = expansion_given_share_raw(200.0, 20.0, 1000.0, g2);
        const double mid = expansion_given_share_raw(200.0, 20.0, 1000.0, 0.5 * (g1 + g2));
        CHECK(mid == doctest::Approx(0.5 * (r1 + r2)).epsilon(1e-12));
    }
}

TEST_CASE("separated period") {
    const Fixed interior = fixed_case(200.0, 20.0, 50.0);
    const SeparatedPeriod sp = solve_separated_period(interior.dm, interior.grid, 1.0);
    const ExpansionSolution es = optimal_expansion(interior.dm, interior.grid, 1.0);
    CHECK(std::fabs(sp.period.expansion - es.expansion) <= 1e-9);
    CHECK(sp.period.phase == Phase::Phase2);
    CHECK(sp.sharing.equivalent_to_integrated);

    // Generator surplus stays with the generator.
    const Fixed surplus = fixed_case(200.0, 20.0, -30.0);
    const SeparatedPeriod ss = solve_separated_period(surplus.dm, surplus.grid, 1.0);
    const ExpansionSolution ei = optimal_expansion(surplus.dm, surplus.grid, 1.0);
    CHECK(ss.period.share == 0.0);
    CHECK(ss.period.expansion == doctest::Approx(0.18).epsilon(1e-12));
    CHECK(ei.expansion == doctest::Approx(0.21).epsilon(1e-12));
    CHECK(ss.period.expansion < ei.expansion);
    CHECK(ss.sharing.operator_budget_residual == doctest::Approx(0.0));
    CHECK(ss.sharing.generator_budget_residual >= 0.0);
    CHECK_FALSE(ss.sharing.equivalent_to_integrated);

    const Fixed eq = fixed_case(200.0, 150.0, 50.0);
    const SeparatedPeriod se = solve_separated_period(eq.dm, eq.grid, 1.0);
    CHECK(se.period.expansion == 0.0);
    CHECK(se.period.phase == Phase::Phase3);
}

TEST_CASE("phase labels") {
    CHECK(classify_phase(0.0, 0.1, true) == Phase::Phase1);
    CHECK(classify_phase(0.3, 0.05, true) == Phase::Phase2);
    CHECK(classify_phase(0.4, 0.0, true) == Phase::Phase3);
    CHECK(classify_phase(0.4, 0.1, false) == Phase::Infeasible);
    CHECK(classify_phase(NAN, 0.1, true) == Phase::Infeasible);
    CHECK(classify_phase(0.0, -1.0, true) == Phase::Infeasible);

    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1e-8, 1.0);
    for (int i = 0; i < 1000; ++i) {
        const double g = std::max(0.0, u(rng));
        const double q = std::max(0.0, u(rng));
        const Phase p = classify_phase(g, q, true);
        const int n = (p == Phase::Phase1) + (p == Phase::Phase2) + (p == Phase::Phase3) +
                      (p == Phase::Infeasible);
        CHECK(n == 1);
        if (p == Phase::Phase3) CHECK(q <= kPhaseTolerance);
    }
}

TEST_CASE("interior sharing matches the integrated benchmark on random models") {
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    int interior = 0;
    for (const auto& rc : testing::random_cases(100, 71, testing::Filter::Solvable)) {
        const double q_star = solve_long_run_limit(rc.demand, rc.grid).q_star;
        for (int rep = 0; rep < 5; ++rep) {
            const double q = testing::kStartState + (q_star - testing::kStartState) * u01(rng);
            SeparatedPeriod sp;
            try {
                sp = solve_separated_period(rc.demand, rc.grid, q);
            } catch (const Error&) {
                continue;
            }
            if (!sp.period.feasible()) continue;
            CHECK(sp.sharing.operator_budget_residual >= -1e-8 * std::max(1.0, sp.period.revenue));
            CHECK(sp.sharing.generator_budget_residual >= -1e-8 * std::max(1.0, sp.period.revenue));
            CHECK(sp.period.share < 1.0);
            if (!(sp.period.share > kPhaseTolerance && sp.period.expansion > kPhaseTolerance)) continue;
            ++interior;
            const PeriodSolution in = solve_integrated_period(rc.demand, rc.grid, q);
            CHECK(std::fabs(sp.period.price - in.price) <= 1e-8 * std::max(1.0, in.price));
            CHECK(std::fabs(sp.period.expansion - in.expansion) <= 1e-8);
            const double c1 = cost_operator(rc.grid, q, sp.period.expansion);
            const double c2 = cost_generator(rc.grid, q);
            CHECK(std::fabs(c1 + c2 - sp.period.revenue) <= 1e-8 * std::max(1.0, sp.period.revenue));
            CHECK(sp.sharing.equivalent_to_integrated);

            const KktResiduals k =
                kkt_residuals(rc.demand, rc.grid, q, sp.period, KktProblem::RevenueSharing);
            CHECK(k.certified());
            CHECK(k.theta >= 0.0);
        }
    }
    CHECK(interior > 20);
}

TEST_CASE("generator surplus leaves the separated operator less room than the integrated plan") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> uq(0.0, 30.0);
    for (const auto& rc : testing::random_cases(200, 81, testing::Filter::Accepted)) {
        const double q = uq(rng);
        if (!(cost_generator(rc.grid, q) < 0.0)) continue;
        const SeparatedPeriod sp = solve_separated_period(rc.demand, rc.grid, q);
        const ExpansionSolution es = optimal_expansion(rc.demand, rc.grid, q);
        if (!sp.period.feasible() || es.status == ExpansionStatus::Infeasible) continue;
        CHECK(sp.period.share == 0.0);
        CHECK(sp.period.expansion <= es.expansion + 1e-12);
    }
}
