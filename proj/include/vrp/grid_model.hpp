#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "vrp/errors.hpp"

namespace vrp {

/// Closed capacity interval [lo, hi] in GW.
struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    bool contains(double q, double slack = 0.0) const noexcept {
        return q >= lo - slack && q <= hi + slack;
    }
    double width() const noexcept { return hi - lo; }
};

enum class CurveKind { Polynomial, ExponentialDecay, Tabulated };

struct Knot {
    double q = 0.0;
    double value = 0.0;
};

/**
 * A scalar function of renewable capacity Q.
 *
 * Polynomial:       intercept + sum_i c_i * Q^(i+1)
 * ExponentialDecay: a * exp(-b * Q) + c, coefficients (a, b[, c])
 * Tabulated:        piecewise-linear through knots with strictly increasing Q
 *
 * Piecewise-linear interpolation keeps knot-wise monotonicity and concavity,
 * which a cubic spline would not.
 */
class GridCurve {
public:
    static GridCurve polynomial(std::vector<double> coefficients, double intercept = 0.0);
    static GridCurve exponential_decay(double scale, double rate, double offset = 0.0);
    static GridCurve tabulated(std::vector<Knot> knots);
    static GridCurve constant(double value);

    /// Throws ErrorKind::Domain for tabulated curves outside their knot range.
    double operator()(double q) const;

    CurveKind kind() const noexcept { return kind_; }
    const std::vector<double>& coefficients() const noexcept { return coefficients_; }
    double intercept() const noexcept { return intercept_; }
    const std::vector<Knot>& knots() const noexcept { return knots_; }

private:
    GridCurve() = default;

    CurveKind kind_ = CurveKind::Polynomial;
    std::vector<double> coefficients_;
    double intercept_ = 0.0;
    std::vector<Knot> knots_;
};

/// Quadratic cost alpha*Q + beta*Q^2 [M$/yr]; alpha, beta >= 0.
struct CostSpec {
    double alpha = 0.0;
    double beta = 0.0;

    double operator()(double q) const noexcept { return alpha * q + beta * q * q; }
    double derivative(double q) const noexcept { return alpha + 2.0 * beta * q; }
};

/**
 * Immutable bundle of grid primitives.
 *
 * Units: capacity GW, money M$, rates per period (year). f(Q) is in GW
 * capacity-equivalent so the deliverability constraint D <= f compares like
 * units; pi(Q) is in M$/GW per year.
 */
class GridModel {
public:
    GridModel(GridCurve emissions, GridCurve delivered, GridCurve energy_value,
              CostSpec cost_renewable, CostSpec cost_system, double invest_cost,
              Interval domain);

    double emissions(double q) const;      // e(Q), ton-CO2/MWh
    double delivered(double q) const;      // f(Q), GW capacity-equivalent
    double energy_value(double q) const;   // pi(Q), M$/GW/yr
    double cost_renewable(double q) const; // C_R(Q)
    double cost_system(double q) const;    // C_S(Q)

    const GridCurve& emissions_curve() const noexcept { return emissions_; }
    const GridCurve& delivered_curve() const noexcept { return delivered_; }
    const GridCurve& energy_value_curve() const noexcept { return energy_value_; }
    const CostSpec& cost_renewable_spec() const noexcept { return cost_renewable_; }
    const CostSpec& cost_system_spec() const noexcept { return cost_system_; }
    double invest_cost() const noexcept { return invest_cost_; }
    const Interval& domain() const noexcept { return domain_; }

    /// Average load [GW] of the system the curves were calibrated on, if known.
    const std::optional<double>& mean_load_gw() const noexcept { return mean_load_gw_; }

    GridModel with_invest_cost(double k) const;
    GridModel with_mean_load(double mean_load_gw) const;

    /// Throws ErrorKind::Domain when q is outside the declared domain.
    void require_in_domain(double q) const;

private:
    GridCurve emissions_;
    GridCurve delivered_;
    GridCurve energy_value_;
    CostSpec cost_renewable_;
    CostSpec cost_system_;
    double invest_cost_;
    Interval domain_;
    std::optional<double> mean_load_gw_;
};

double eval_curve(const GridCurve& curve, double q);

/// C(Q) = C_S(Q) + C_R(Q) - f(Q) pi(Q); negative when wholesale revenue exceeds cost.
double cost_integrated(const GridModel& model, double q);

/// C_1(Q, q) = C_S(Q) + k q, the operator-side aggregate.
double cost_operator(const GridModel& model, double q_state, double expansion);

/// C_2(Q) = C_R(Q) - f(Q) pi(Q), the generator-side net cost.
double cost_generator(const GridModel& model, double q);

struct Derivative {
    double value = 0.0;
    bool one_sided = false;
};

/// Central difference (v(Q+h) - v(Q-h)) / 2h inside `domain`, one-sided at the edges.
Derivative numeric_derivative(const std::function<double(double)>& fn, const Interval& domain,
                              double q, double h);

/// Default finite-difference step 1e-4 * (Q_max - Q_min).
double default_derivative_step(const GridModel& model) noexcept;

struct PropertyCheck {
    std::string name;
    bool passed = true;
    std::optional<double> first_violation_q;
    double worst_violation = 0.0;
};

struct ConditionReport {
    int n_samples = 0;
    PropertyCheck e_positive{"e_positive", true, std::nullopt, 0.0};
    PropertyCheck e_nonincreasing{"e_nonincreasing", true, std::nullopt, 0.0};
    PropertyCheck f_zero_at_origin{"f_zero_at_origin", true, std::nullopt, 0.0};
    PropertyCheck f_nondecreasing{"f_nondecreasing", true, std::nullopt, 0.0};
    PropertyCheck f_concave{"f_concave", true, std::nullopt, 0.0};
    PropertyCheck pi_nonincreasing{"pi_nonincreasing", true, std::nullopt, 0.0};

    bool all_passed() const noexcept;
    std::vector<const PropertyCheck*> checks() const;
};

inline constexpr double kMonotoneTolerance = 1e-9;
inline constexpr double kOriginTolerance = 1e-6;

/// Samples every curve on a uniform grid of the domain and checks the
/// structural conditions: e > 0 and nonincreasing; f(0) ~ 0, nondecreasing,
/// concave; pi nonincreasing.
ConditionReport validate_grid_conditions(const GridModel& model, int n_samples);

}  // namespace vrp
