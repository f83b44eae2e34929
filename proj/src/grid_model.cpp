#include "vrp/grid_model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace vrp {

std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::Domain: return "domain";
        case ErrorKind::Argument: return "argument";
        case ErrorKind::Singularity: return "singularity";
        case ErrorKind::NoSellableCredits: return "no-sellable-credits";
        case ErrorKind::NoRevenue: return "no-revenue";
        case ErrorKind::InfeasibleSharing: return "infeasible-sharing";
        case ErrorKind::ThresholdUnreachable: return "threshold-unreachable";
        case ErrorKind::InfeasibleAtThreshold: return "infeasible-at-threshold";
        case ErrorKind::Shortage: return "shortage";
        case ErrorKind::Configuration: return "configuration";
        case ErrorKind::Parse: return "parse";
        case ErrorKind::Validation: return "validation";
    }
    return "unknown";
}

namespace {

double domain_slack(double a, double b) {
    return 1e-12 * std::max({1.0, std::fabs(a), std::fabs(b)});
}

std::string fmt_q(double q) {
    std::ostringstream os;
    os.precision(10);
    os << q;
    return os.str();
}

}  // namespace

GridCurve GridCurve::polynomial(std::vector<double> coefficients, double intercept) {
    for (double c : coefficients) {
        if (!std::isfinite(c)) fail(ErrorKind::Argument, "polynomial coefficient is not finite");
    }
    if (!std::isfinite(intercept)) fail(ErrorKind::Argument, "polynomial intercept is not finite");
    GridCurve curve;
    curve.kind_ = CurveKind::Polynomial;
    curve.coefficients_ = std::move(coefficients);
    curve.intercept_ = intercept;
    return curve;
}

GridCurve GridCurve::exponential_decay(double scale, double rate, double offset) {
    if (!std::isfinite(scale) || !std::isfinite(rate) || !std::isfinite(offset)) {
        fail(ErrorKind::Argument, "exponential-decay coefficient is not finite");
    }
    GridCurve curve;
    curve.kind_ = CurveKind::ExponentialDecay;
    curve.coefficients_ = {scale, rate, offset};
    return curve;
}

GridCurve GridCurve::tabulated(std::vector<Knot> knots) {
    if (knots.size() < 2) {
        fail(ErrorKind::Argument, "tabulated curve needs at least 2 points, got " +
                                      std::to_string(knots.size()));
    }
    for (std::size_t i = 0; i < knots.size(); ++i) {
        if (!std::isfinite(knots[i].q) || !std::isfinite(knots[i].value)) {
            fail(ErrorKind::Argument, "tabulated curve has a non-finite entry at index " +
                                          std::to_string(i));
        }
        if (i > 0 && !(knots[i].q > knots[i - 1].q)) {
            fail(ErrorKind::Argument, "tabulated Q values must be strictly increasing (index " +
                                          std::to_string(i) + ")");
        }
    }
    GridCurve curve;
    curve.kind_ = CurveKind::Tabulated;
    curve.knots_ = std::move(knots);
    return curve;
}

GridCurve GridCurve::constant(double value) { return polynomial({}, value); }

double GridCurve::operator()(double q) const {
    switch (kind_) {
        case CurveKind::Polynomial: {
            // Horner on Q * (c0 + c1 Q + c2 Q^2 + ...)
            double acc = 0.0;
            for (auto it = coefficients_.rbegin(); it != coefficients_.rend(); ++it) {
                acc = acc * q + *it;
            }
            return intercept_ + acc * q;
        }
        case CurveKind::ExponentialDecay:
            return coefficients_[0] * std::exp(-coefficients_[1] * q) + coefficients_[2];
        case CurveKind::Tabulated: {
            const double lo = knots_.front().q;
            const double hi = knots_.back().q;
            const double slack = domain_slack(lo, hi);
            if (q < lo - slack || q > hi + slack || std::isnan(q)) {
                fail(ErrorKind::Domain, "Q=" + fmt_q(q) + " outside tabulated range [" +
                                            fmt_q(lo) + ", " + fmt_q(hi) + "]");
            }
            if (q <= lo) return knots_.front().value;
            if (q >= hi) return knots_.back().value;
            auto upper = std::upper_bound(knots_.begin(), knots_.end(), q,
                                          [](double x, const Knot& k) { return x < k.q; });
            const Knot& b = *upper;
            const Knot& a = *(upper - 1);
            if (q == a.q) return a.value;
            const double w = (q - a.q) / (b.q - a.q);
            return a.value + w * (b.value - a.value);
        }
    }
    return 0.0;
}

GridModel::GridModel(GridCurve emissions, GridCurve delivered, GridCurve energy_value,
                     CostSpec cost_renewable, CostSpec cost_system, double invest_cost,
                     Interval domain)
    : emissions_(std::move(emissions)),
      delivered_(std::move(delivered)),
      energy_value_(std::move(energy_value)),
      cost_renewable_(cost_renewable),
      cost_system_(cost_system),
      invest_cost_(invest_cost),
      domain_(domain) {
    if (!(invest_cost_ > 0.0) || !std::isfinite(invest_cost_)) {
        fail(ErrorKind::Validation, "invest_cost k must be positive");
    }
    if (!std::isfinite(domain_.lo) || !std::isfinite(domain_.hi) || domain_.lo < 0.0 ||
        !(domain_.lo < domain_.hi)) {
        fail(ErrorKind::Validation, "domain must satisfy 0 <= Q_min < Q_max");
    }
    for (const CostSpec* c : {&cost_renewable_, &cost_system_}) {
        if (c->alpha < 0.0 || c->beta < 0.0 || !std::isfinite(c->alpha) ||
            !std::isfinite(c->beta)) {
            fail(ErrorKind::Validation, "cost coefficients alpha, beta must be finite and >= 0");
        }
    }
    const std::pair<const GridCurve*, const char*> curves[] = {
        {&emissions_, "emissions"}, {&delivered_, "delivered"}, {&energy_value_, "energy_value"}};
    for (const auto& [curve, name] : curves) {
        if (curve->kind() != CurveKind::Tabulated) continue;
        const Interval span{curve->knots().front().q, curve->knots().back().q};
        const double slack = domain_slack(domain_.lo, domain_.hi);
        if (!span.contains(domain_.lo, slack) || !span.contains(domain_.hi, slack)) {
            fail(ErrorKind::Validation, std::string(name) + " table does not cover the domain [" +
                                            fmt_q(domain_.lo) + ", " + fmt_q(domain_.hi) + "]");
        }
    }
}

void GridModel::require_in_domain(double q) const {
    if (std::isnan(q) || !domain_.contains(q, domain_slack(domain_.lo, domain_.hi))) {
        fail(ErrorKind::Domain, "Q=" + fmt_q(q) + " outside model domain [" + fmt_q(domain_.lo) +
                                    ", " + fmt_q(domain_.hi) + "]");
    }
}

double GridModel::emissions(double q) const {
    require_in_domain(q);
    return emissions_(q);
}

double GridModel::delivered(double q) const {
    require_in_domain(q);
    return delivered_(q);
}

double GridModel::energy_value(double q) const {
    require_in_domain(q);
    return energy_value_(q);
}

double GridModel::cost_renewable(double q) const {
    require_in_domain(q);
    return cost_renewable_(q);
}

double GridModel::cost_system(double q) const {
    require_in_domain(q);
    return cost_system_(q);
}

GridModel GridModel::with_invest_cost(double k) const {
    GridModel copy(emissions_, delivered_, energy_value_, cost_renewable_, cost_system_, k,
                   domain_);
    copy.mean_load_gw_ = mean_load_gw_;
    return copy;
}

GridModel GridModel::with_mean_load(double mean_load_gw) const {
    if (!(mean_load_gw > 0.0)) fail(ErrorKind::Validation, "mean_load_gw must be positive");
    GridModel copy = *this;
    copy.mean_load_gw_ = mean_load_gw;
    return copy;
}

double eval_curve(const GridCurve& curve, double q) { return curve(q); }

double cost_integrated(const GridModel& model, double q) {
    return model.cost_system(q) + model.cost_renewable(q) -
           model.delivered(q) * model.energy_value(q);
}

double cost_operator(const GridModel& model, double q_state, double expansion) {
    if (!(expansion >= 0.0)) {
        fail(ErrorKind::Argument, "expansion q must be nonnegative, got " + fmt_q(expansion));
    }
    return model.cost_system(q_state) + model.invest_cost() * expansion;
}

double cost_generator(const GridModel& model, double q) {
    return model.cost_renewable(q) - model.delivered(q) * model.energy_value(q);
}

Derivative numeric_derivative(const std::function<double(double)>& fn, const Interval& domain,
                              double q, double h) {
    if (!(h > 0.0) || !std::isfinite(h)) fail(ErrorKind::Argument, "derivative step must be > 0");
    const double slack = domain_slack(domain.lo, domain.hi);
    if (!domain.contains(q, slack)) {
        fail(ErrorKind::Domain, "derivative point Q=" + fmt_q(q) + " outside domain");
    }
    const bool left_ok = q - h >= domain.lo - slack;
    const bool right_ok = q + h <= domain.hi + slack;
    if (left_ok && right_ok) return {(fn(q + h) - fn(q - h)) / (2.0 * h), false};
    if (right_ok) return {(fn(q + h) - fn(q)) / h, true};
    if (left_ok) return {(fn(q) - fn(q - h)) / h, true};
    fail(ErrorKind::Domain, "derivative step " + fmt_q(h) + " exceeds the domain width");
}

double default_derivative_step(const GridModel& model) noexcept {
    return 1e-4 * model.domain().width();
}

bool ConditionReport::all_passed() const noexcept {
    return e_positive.passed && e_nonincreasing.passed && f_zero_at_origin.passed &&
           f_nondecreasing.passed && f_concave.passed && pi_nonincreasing.passed;
}

std::vector<const PropertyCheck*> ConditionReport::checks() const {
    return {&e_positive, &e_nonincreasing, &f_zero_at_origin,
            &f_nondecreasing, &f_concave, &pi_nonincreasing};
}

namespace {

void record_violation(PropertyCheck& check, double q, double amount) {
    if (check.passed) check.first_violation_q = q;
    check.passed = false;
    check.worst_violation = std::max(check.worst_violation, amount);
}

double scale_of(const std::vector<double>& v) {
    double s = 1.0;
    for (double x : v) s = std::max(s, std::fabs(x));
    return s;
}

}  // namespace

ConditionReport validate_grid_conditions(const GridModel& model, int n_samples) {
    if (n_samples < 3) fail(ErrorKind::Argument, "validate_grid_conditions needs n_samples >= 3");
    ConditionReport report;
    report.n_samples = n_samples;

    const Interval& dom = model.domain();
    std::vector<double> qs(n_samples), e(n_samples), f(n_samples), pi(n_samples);
    for (int i = 0; i < n_samples; ++i) {
        qs[i] = i + 1 == n_samples ? dom.hi : dom.lo + dom.width() * i / (n_samples - 1);
        e[i] = model.emissions(qs[i]);
        f[i] = model.delivered(qs[i]);
        pi[i] = model.energy_value(qs[i]);
    }
    const double tol_e = kMonotoneTolerance * scale_of(e);
    const double tol_f = kMonotoneTolerance * scale_of(f);
    const double tol_pi = kMonotoneTolerance * scale_of(pi);

    // e > 0 over the interior; the right edge may touch zero.
    for (int i = 0; i + 1 < n_samples; ++i) {
        if (!(e[i] > 0.0)) record_violation(report.e_positive, qs[i], -e[i]);
    }
    if (dom.lo <= 0.0) {
        const double f0 = model.delivered(0.0);
        if (std::fabs(f0) > kOriginTolerance) {
            record_violation(report.f_zero_at_origin, 0.0, std::fabs(f0));
        }
    }
    for (int i = 1; i < n_samples; ++i) {
        if (e[i] > e[i - 1] + tol_e) record_violation(report.e_nonincreasing, qs[i], e[i] - e[i - 1]);
        if (f[i] < f[i - 1] - tol_f) record_violation(report.f_nondecreasing, qs[i], f[i - 1] - f[i]);
        if (pi[i] > pi[i - 1] + tol_pi) {
            record_violation(report.pi_nonincreasing, qs[i], pi[i] - pi[i - 1]);
        }
    }
    for (int i = 1; i + 1 < n_samples; ++i) {
        const double second = f[i + 1] - 2.0 * f[i] + f[i - 1];
        if (second > tol_f) record_violation(report.f_concave, qs[i], second);
    }
    return report;
}

}  // namespace vrp
