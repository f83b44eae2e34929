#include <doctest.h>

#include <cmath>
#include <random>

#include "random_models.hpp"
#include "vrp/policy_oracle.hpp"
#include "vrp/revenue_sharing.hpp"

using namespace vrp;

namespace {

constexpr double kE = 0.3;
constexpr double kEps = 0.0045;

// Constant primitives at Q = 1 chosen so the unconstrained R* and C hit
// the requested values.
struct Fixed {
    DemandModel dm;
    GridModel grid;
};

Fixed fixed_case(double r_star, double c, double k) {
    const double m = r_star * kEps * std::exp(1.0) / kE;
    GridModel g(GridCurve::constant(kE), GridCurve::constant(10.0 * m), GridCurve::constant(0.0),
                CostSpec{0.0, 0.0}, CostSpec{c, 0.0}, k, Interval{0.0, 10.0});
    return {DemandModel::exponential(m, kEps), g};
}

GridModel const_grid(double e, double f, double k = 1000.0) {
    return GridModel(GridCurve::constant(e), GridCurve::constant(f), GridCurve::constant(0.0),
                     CostSpec{1.0, 0.0}, CostSpec{1.0, 0.0}, k, Interval{0.0, 10.0});
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

TEST_CASE("demand curve") {
    const DemandModel dm = DemandModel::exponential(10.0, kEps);
    CHECK(demand(dm, 0.0, kE) == 10.0);
    const double p = kE / kEps * std::log(1.0 / 0.33);
    CHECK(demand(dm, p, kE) == doctest::Approx(3.3).epsilon(1e-12));
    CHECK(demand(dm, 1e6, kE) < 1e-12 * 10.0);

    require_error(ErrorKind::Singularity, [&] { demand(dm, 1.0, 0.0); });
    require_error(ErrorKind::Argument, [&] { demand(dm, -1.0, kE); });
    require_error(ErrorKind::Validation, [] { DemandModel::exponential(0.0, kEps); });
    require_error(ErrorKind::Validation, [] { DemandModel::exponential(10.0, -1.0); });
}

TEST_CASE("revenue curve and its grid maximum") {
    const DemandModel dm = DemandModel::exponential(10.0, kEps);
    CHECK(revenue(dm, 0.0, kE) == 0.0);
    const double pu = kE / kEps;
    CHECK(revenue(dm, pu, kE) == doctest::Approx(pu * 10.0 * std::exp(-1.0)).epsilon(1e-14));
    CHECK(std::fabs(revenue_slope(dm, pu, kE)) < 1e-12);

    double best_p = 0.0;
    double best_r = -1.0;
    const int n = static_cast<int>(10.0 * pu / 1e-3);
    for (int i = 0; i <= n; ++i) {
        const double p = i * 1e-3;
        const double r = p * 10.0 * std::exp(-kEps * p / kE);
        if (r > best_r) {
            best_r = r;
            best_p = p;
        }
    }
    CHECK(std::fabs(best_p - pu) <= 2e-3);
}

TEST_CASE("closed-form optimal price") {
    const DemandModel dm = DemandModel::exponential(10.0, kEps);
    const PriceSolution open = optimal_price_for(dm, kE, 5.0);
    CHECK(open.price == doctest::Approx(66.6666666667).epsilon(1e-10));
    CHECK_FALSE(open.deliverability_binding);

    const PriceSolution bind = optimal_price_for(dm, kE, 2.0);
    CHECK(bind.price == doctest::Approx(kE / kEps * std::log(5.0)).epsilon(1e-14));
    CHECK(bind.price == doctest::Approx(107.29).epsilon(1e-4));
    CHECK(bind.deliverability_binding);
    CHECK(demand(dm, bind.price, kE) == doctest::Approx(2.0).epsilon(1e-12));

    require_error(ErrorKind::NoSellableCredits, [&] { optimal_price_for(dm, kE, 0.0); });
    require_error(ErrorKind::Singularity, [&] { optimal_price_for(dm, 0.0, 1.0); });
}

TEST_CASE("regimes agree where f crosses M/e") {
    const DemandModel dm = DemandModel::exponential(10.0, kEps);
    const double f0 = 10.0 * std::exp(-1.0);
    const double below = optimal_price_for(dm, kE, f0 * (1.0 - 1e-13)).price;
    const double at = optimal_price_for(dm, kE, f0).price;
    CHECK(std::fabs(below - at) <= 1e-9 * at);
}

TEST_CASE("price is proportional to emissions within a regime") {
    for (const auto& rc : testing::random_cases(100, 31, testing::Filter::Accepted)) {
        const double q1 = 1.0 + 10.0 * static_cast<double>(rc.draw % 7) / 7.0;
        const double q2 = q1 + 3.0;
        const PriceSolution a = optimal_price(rc.demand, rc.grid, q1);
        const PriceSolution b = optimal_price(rc.demand, rc.grid, q2);
        if (a.deliverability_binding || b.deliverability_binding) continue;
        const double ratio = rc.grid.emissions(q1) / rc.grid.emissions(q2);
        CHECK(std::fabs(a.price / b.price - ratio) <= 1e-9 * ratio);
        CHECK(a.price >= b.price);
    }
}

TEST_CASE("closed form beats a feasible price grid on random models") {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> uq(0.0, 30.0);
    for (const auto& rc : testing::random_cases(1000, 41, testing::Filter::Accepted)) {
        const double q = uq(rng);
        if (!(rc.grid.delivered(q) > 0.0)) continue;
        const PriceSolution ps = optimal_price(rc.demand, rc.grid, q);
        const PriceScan scan = dense_scan_price(rc.demand, rc.grid, q, 20000);
        REQUIRE(scan.found);
        const double r = revenue(rc.demand, ps.price, rc.grid.emissions(q));
        CHECK(r >= scan.revenue * (1.0 - 1e-6));
        CHECK(demand(rc.demand, ps.price, rc.grid.emissions(q)) <=
              rc.grid.delivered(q) * (1.0 + 1e-12));
        CHECK(std::fabs(ps.price - scan.price) <= 1e-3 * ps.price + scan.step);
    }
}

TEST_CASE("optimal expansion") {
    const Fixed a = fixed_case(200.0, 100.0, 1000.0);
    const ExpansionSolution s = optimal_expansion(a.dm, a.grid, 1.0);
    CHECK(s.revenue == doctest::Approx(200.0).epsilon(1e-13));
    CHECK(s.expansion == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(s.status == ExpansionStatus::Expanding);

    const Fixed b = fixed_case(100.0, 100.0, 1000.0);
    const ExpansionSolution sb = optimal_expansion(b.dm, b.grid, 1.0);
    CHECK(sb.expansion == 0.0);
    CHECK(sb.status == ExpansionStatus::Equilibrium);

    const Fixed c = fixed_case(50.0, 100.0, 1000.0);
    CHECK(optimal_expansion(c.dm, c.grid, 1.0).status == ExpansionStatus::Infeasible);
}

TEST_CASE("expansion exhausts the budget") {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> uq(0.0, 30.0);
    for (const auto& rc : testing::random_cases(200, 51, testing::Filter::Accepted)) {
        const double q = uq(rng);
        const ExpansionSolution s = optimal_expansion(rc.demand, rc.grid, q);
        if (s.status != ExpansionStatus::Expanding) continue;
        const double lhs = s.cost + rc.grid.invest_cost() * s.expansion;
        CHECK(std::fabs(lhs - s.revenue) <= 1e-9 * std::max(1.0, s.revenue));
    }
}

TEST_CASE("generic revenue maximizer") {
    const DemandModel dm = DemandModel::exponential(10.0, kEps);
    const RevenueFn exp_rev = [&](double p) { return revenue(dm, p, kE); };
    const RevenueMaximum open = maximize_revenue_generic(exp_rev, {{0.0, INFINITY}});
    CHECK(open.price == doctest::Approx(optimal_price_for(dm, kE, 100.0).price).epsilon(1e-6));

    const double pu = kE / kEps;
    const RevenueMaximum tail = maximize_revenue_generic(exp_rev, {{2.0 * pu, INFINITY}});
    CHECK(tail.price == doctest::Approx(2.0 * pu).epsilon(1e-12));

    const RevenueFn bimodal = [](double p) { return p * std::exp(-p) * (1.0 + 0.5 * std::sin(p)); };
    const RevenueMaximum got = maximize_revenue_generic(bimodal, {{0.0, 20.0}});
    double best_p = 0.0;
    double best_r = -1.0;
    constexpr int kN = 10000000;
    for (int i = 0; i <= kN; ++i) {
        const double p = 20.0 * i / kN;
        const double r = bimodal(p);
        if (r > best_r) {
            best_r = r;
            best_p = p;
        }
    }
    CHECK(std::fabs(got.price - best_p) <= 20.0 / kN * 2.0);
    CHECK(got.revenue >= best_r);

    // Two disjoint intervals: the second holds the larger peak.
    const RevenueFn two = [](double p) {
        return std::exp(-(p - 1.0) * (p - 1.0)) + 2.0 * std::exp(-(p - 8.0) * (p - 8.0));
    };
    const RevenueMaximum split = maximize_revenue_generic(two, {{0.0, 3.0}, {6.0, 10.0}});
    CHECK(split.price == doctest::Approx(8.0).epsilon(1e-6));

    // Flat revenue resolves to the smallest price.
    const RevenueMaximum flat = maximize_revenue_generic([](double) { return 1.0; }, {{2.0, 5.0}});
    CHECK(flat.price == 2.0);

    require_error(ErrorKind::Argument,
                  [&] { maximize_revenue_generic(exp_rev, std::vector<PriceInterval>{}); });

    const DemandModel gen = DemandModel::generic(1.0, 1.0, {bimodal, {{0.0, 20.0}}});
    CHECK(maximize_revenue_generic(gen).price == doctest::Approx(got.price).epsilon(1e-12));
}

TEST_CASE("KKT residuals of closed-form solutions") {
    const DemandModel dm = DemandModel::exponential(10.0, kEps);

    const GridModel open = const_grid(kE, 8.0);
    const PeriodSolution so = solve_integrated_period(dm, open, 1.0);
    REQUIRE(so.expansion > 0.0);
    const KktResiduals ko = kkt_residuals(dm, open, 1.0, so, KktProblem::Integrated);
    CHECK(ko.lambda == 0.0);
    CHECK(ko.mu == doctest::Approx(1.0 / 1000.0).epsilon(1e-15));
    CHECK(ko.max_abs_residual <= 1e-9);

    const GridModel bind = const_grid(kE, 2.0);
    const PeriodSolution sb = solve_integrated_period(dm, bind, 1.0);
    REQUIRE(sb.deliverability_binding);
    const KktResiduals kb = kkt_residuals(dm, bind, 1.0, sb, KktProblem::Integrated);
    CHECK(kb.lambda == doctest::Approx((sb.price - kE / kEps) / 1000.0).epsilon(1e-12));
    CHECK(kb.lambda > 0.0);
    CHECK(kb.max_abs_residual <= 1e-9);

    PeriodSolution off = so;
    off.price *= 1.01;
    const KktResiduals kp = kkt_residuals(dm, open, 1.0, off, KktProblem::Integrated);
    CHECK(std::fabs(kp.stationarity_p) > 1e-3);
    CHECK_FALSE(kp.certified());
}

TEST_CASE("KKT certification on random models") {
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> uq(0.0, 30.0);
    int tested = 0;
    for (const auto& rc : testing::random_cases(200, 61, testing::Filter::Accepted)) {
        const double q = uq(rng);
        const PeriodSolution s = solve_integrated_period(rc.demand, rc.grid, q);
        if (!s.feasible() || !(s.expansion > 0.0)) continue;
        ++tested;
        const KktResiduals k = kkt_residuals(rc.demand, rc.grid, q, s, KktProblem::Integrated);
        CHECK(k.certified());
        CHECK(k.lambda >= 0.0);
        CHECK(k.mu >= 0.0);
        CHECK(k.nu >= 0.0);
        CHECK(k.eta >= 0.0);
    }
    CHECK(tested > 20);
}
