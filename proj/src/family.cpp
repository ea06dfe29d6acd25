#include "entlab/family.hpp"

#include "entlab/error.hpp"

#include <boost/math/distributions/extreme_value.hpp>
#include <boost/math/distributions/gamma.hpp>
#include <boost/math/distributions/laplace.hpp>
#include <boost/math/distributions/logistic.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/special_functions/bessel.hpp>

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace entlab {

namespace bm = boost::math;

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

double sgn(double x) { return (x > 0.0) - (x < 0.0); }

// Root of a monotone increasing function on [lo, hi] by bisection.
template <class F>
double bisect_increasing(F&& f, double target, double lo, double hi) {
    for (int it = 0; it < 200 && hi - lo > 1e-15 * (1.0 + std::abs(lo) + std::abs(hi)); ++it) {
        const double mid = 0.5 * (lo + hi);
        if (f(mid) < target)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

// Smoothed Laplace pieces: density exp(-c sqrt(a^2 + x^2)) / Z.
double sl_upper_tail(double x, double a, double c, double log_norm) {
    auto g = [&](double u) { return std::exp(-c * std::sqrt(a * a + u * u) - log_norm); };
    if (x >= 0.0) {
        bm::quadrature::exp_sinh<double> integrator;
        return integrator.integrate([&](double u) { return g(x + u); });
    }
    return 1.0 - sl_upper_tail(-x, a, c, log_norm);
}

} // namespace

std::string_view to_string(FamilyKind kind) {
    switch (kind) {
    case FamilyKind::gaussian: return "gaussian";
    case FamilyKind::logistic: return "logistic";
    case FamilyKind::gumbel: return "gumbel";
    case FamilyKind::gamma: return "gamma";
    case FamilyKind::smoothed_laplace: return "smoothed_laplace";
    case FamilyKind::uniform: return "uniform";
    case FamilyKind::laplace: return "laplace";
    case FamilyKind::gaussian_mixture: return "gaussian_mixture";
    }
    return "unknown";
}

FamilyKind family_kind_from_string(std::string_view name) {
    for (auto k : {FamilyKind::gaussian, FamilyKind::logistic, FamilyKind::gumbel,
                   FamilyKind::gamma, FamilyKind::smoothed_laplace, FamilyKind::uniform,
                   FamilyKind::laplace, FamilyKind::gaussian_mixture})
        if (to_string(k) == name) return k;
    throw DomainError("unknown family '" + std::string(name) + "'");
}

FamilySpec FamilySpec::gaussian(double mean, double variance) {
    return {FamilyKind::gaussian, mean, variance};
}
FamilySpec FamilySpec::logistic(double scale) { return {FamilyKind::logistic, scale, 0.0}; }
FamilySpec FamilySpec::gumbel(double beta) { return {FamilyKind::gumbel, beta, 0.0}; }
FamilySpec FamilySpec::gamma(double shape) { return {FamilyKind::gamma, shape, 0.0}; }
FamilySpec FamilySpec::smoothed_laplace(double a, double c) {
    return {FamilyKind::smoothed_laplace, a, c};
}
FamilySpec FamilySpec::uniform(double lo, double hi) { return {FamilyKind::uniform, lo, hi}; }
FamilySpec FamilySpec::laplace(double b) { return {FamilyKind::laplace, b, 0.0}; }
FamilySpec FamilySpec::gaussian_mixture(double separation, double sd) {
    return {FamilyKind::gaussian_mixture, separation, sd};
}

void FamilySpec::validate() const {
    auto require = [&](bool ok, const char* what) {
        if (!ok || !std::isfinite(a) || !std::isfinite(b))
            throw DomainError(std::string(to_string(kind)) + ": " + what);
    };
    switch (kind) {
    case FamilyKind::gaussian: require(b > 0.0, "variance must be > 0"); break;
    case FamilyKind::logistic: require(a > 0.0, "scale must be > 0"); break;
    case FamilyKind::gumbel: require(a > 0.0, "beta must be > 0"); break;
    case FamilyKind::gamma:
        require(a >= 1.0, "shape must be >= 1 (log-concavity)");
        require(a <= 1e4, "shape must be <= 1e4");
        break;
    case FamilyKind::smoothed_laplace:
        require(a > 0.0 && b > 0.0, "a and c must be > 0");
        require(a * b < 500.0, "a * c must be < 500");
        break;
    case FamilyKind::uniform: require(b > a, "requires lo < hi"); break;
    case FamilyKind::laplace: require(a > 0.0, "b must be > 0"); break;
    case FamilyKind::gaussian_mixture: require(a >= 0.0 && b > 0.0, "needs separation >= 0, sd > 0"); break;
    }
}

Capability FamilySpec::capability() const {
    switch (kind) {
    case FamilyKind::uniform: return {true, false, false, false};
    case FamilyKind::laplace: return {true, true, false, false};
    // psi' ~ (k-1)/x and psi'' ~ (k-1)/x^2 near 0: E[psi'^2] < inf iff k > 2,
    // E[psi''^2] < inf iff k > 4.
    case FamilyKind::gamma: return {true, a > 2.0, a > 4.0, false};
    default: return {true, true, true, true};
    }
}

bool FamilySpec::log_concave() const {
    if (kind == FamilyKind::gaussian_mixture) return a <= b;
    return true;
}

std::string FamilySpec::describe() const {
    std::ostringstream os;
    os << to_string(kind) << '(';
    switch (kind) {
    case FamilyKind::gaussian: os << "mean=" << a << ", var=" << b; break;
    case FamilyKind::logistic: os << "scale=" << a; break;
    case FamilyKind::gumbel: os << "beta=" << a; break;
    case FamilyKind::gamma: os << "shape=" << a; break;
    case FamilyKind::smoothed_laplace: os << "a=" << a << ", c=" << b; break;
    case FamilyKind::uniform: os << "lo=" << a << ", hi=" << b; break;
    case FamilyKind::laplace: os << "b=" << a; break;
    case FamilyKind::gaussian_mixture: os << "sep=" << a << ", sd=" << b; break;
    }
    os << ')';
    return os.str();
}

Family::Family(const FamilySpec& spec) : spec_(spec), lo_(-inf), hi_(inf) {
    spec_.validate();
    const double a = spec_.a;
    const double b = spec_.b;
    switch (spec_.kind) {
    case FamilyKind::gaussian:
        mean_ = a;
        variance_ = b;
        break;
    case FamilyKind::logistic:
        variance_ = a * a * std::numbers::pi * std::numbers::pi / 3.0;
        break;
    case FamilyKind::gumbel:
        mean_ = std::numbers::egamma * a;
        variance_ = std::numbers::pi * std::numbers::pi * a * a / 6.0;
        break;
    case FamilyKind::gamma:
        lo_ = 0.0;
        mean_ = a;
        variance_ = a;
        log_norm_ = std::lgamma(a);
        break;
    case FamilyKind::smoothed_laplace: {
        const double z = a * b;
        log_norm_ = std::log(2.0 * a) + std::log(bm::cyl_bessel_k(1, z));
        // symmetric hyperbolic law: Var = a K_2(ac) / (c K_1(ac))
        variance_ = a * bm::cyl_bessel_k(2, z) / (b * bm::cyl_bessel_k(1, z));
        break;
    }
    case FamilyKind::uniform:
        lo_ = a;
        hi_ = b;
        mean_ = 0.5 * (a + b);
        variance_ = (b - a) * (b - a) / 12.0;
        break;
    case FamilyKind::laplace: variance_ = 2.0 * a * a; break;
    case FamilyKind::gaussian_mixture: variance_ = a * a + b * b; break;
    }
}

double Family::psi1(double x) const {
    const double a = spec_.a;
    const double b = spec_.b;
    switch (spec_.kind) {
    case FamilyKind::gaussian: return (x - a) / b;
    case FamilyKind::logistic: return std::tanh(x / (2.0 * a)) / a;
    case FamilyKind::gumbel: return (1.0 - std::exp(-x / a)) / a;
    case FamilyKind::gamma: return x > 0.0 ? 1.0 - (a - 1.0) / x : -inf;
    case FamilyKind::smoothed_laplace: return b * x / std::sqrt(a * a + x * x);
    case FamilyKind::uniform: return 0.0;
    case FamilyKind::laplace: return sgn(x) / a;
    case FamilyKind::gaussian_mixture: return (x - a * std::tanh(a * x / (b * b))) / (b * b);
    }
    return 0.0;
}

double Family::psi2(double x) const {
    const double a = spec_.a;
    const double b = spec_.b;
    switch (spec_.kind) {
    case FamilyKind::gaussian: return 1.0 / b;
    case FamilyKind::logistic: {
        const double s = 1.0 / std::cosh(x / (2.0 * a));
        return s * s / (2.0 * a * a);
    }
    case FamilyKind::gumbel: return std::exp(-x / a) / (a * a);
    case FamilyKind::gamma: return x > 0.0 ? (a - 1.0) / (x * x) : inf;
    case FamilyKind::smoothed_laplace: {
        const double r2 = a * a + x * x;
        return b * a * a / (r2 * std::sqrt(r2));
    }
    case FamilyKind::uniform: return 0.0;
    case FamilyKind::laplace: return 0.0;
    case FamilyKind::gaussian_mixture: {
        const double s2 = b * b;
        const double sech = 1.0 / std::cosh(a * x / s2);
        return (1.0 - a * a / s2 * sech * sech) / s2;
    }
    }
    return 0.0;
}

double Family::pdf(double x) const {
    const double a = spec_.a;
    const double b = spec_.b;
    switch (spec_.kind) {
    case FamilyKind::gaussian: return bm::pdf(bm::normal(a, std::sqrt(b)), x);
    case FamilyKind::logistic: {
        const double e = std::exp(-std::abs(x) / a);
        return e / (a * (1.0 + e) * (1.0 + e));
    }
    case FamilyKind::gumbel: {
        const double z = x / a;
        if (z < -700.0) return 0.0;
        return std::exp(-(z + std::exp(-z))) / a;
    }
    case FamilyKind::gamma:
        if (x <= 0.0) return (x == 0.0 && a == 1.0) ? 1.0 : 0.0;
        return std::exp((a - 1.0) * std::log(x) - x - log_norm_);
    case FamilyKind::smoothed_laplace: return std::exp(-b * std::sqrt(a * a + x * x) - log_norm_);
    case FamilyKind::uniform: return (x >= a && x <= b) ? 1.0 / (b - a) : 0.0;
    case FamilyKind::laplace: return std::exp(-std::abs(x) / a) / (2.0 * a);
    case FamilyKind::gaussian_mixture: {
        const bm::normal n1(-a, b);
        const bm::normal n2(a, b);
        return 0.5 * (bm::pdf(n1, x) + bm::pdf(n2, x));
    }
    }
    return 0.0;
}

double Family::dpdf(double x) const {
    if (spec_.kind == FamilyKind::uniform) return 0.0;
    if (spec_.kind == FamilyKind::gamma && x <= 0.0) {
        // right limits at the edge: f ~ x^(k-1) / Gamma(k)
        if (x == 0.0 && spec_.a == 2.0) return 1.0;
        return 0.0;
    }
    const double f = pdf(x);
    if (f == 0.0) return 0.0;
    return -psi1(x) * f;
}

double Family::d2pdf(double x) const {
    if (spec_.kind == FamilyKind::uniform) return 0.0;
    if (spec_.kind == FamilyKind::gamma && x <= 0.0) {
        if (x == 0.0 && spec_.a == 3.0) return 1.0;
        return 0.0;
    }
    const double f = pdf(x);
    if (f == 0.0) return 0.0;
    const double p1 = psi1(x);
    return (p1 * p1 - psi2(x)) * f;
}

double Family::cdf(double x) const {
    const double a = spec_.a;
    const double b = spec_.b;
    switch (spec_.kind) {
    case FamilyKind::gaussian: return bm::cdf(bm::normal(a, std::sqrt(b)), x);
    case FamilyKind::logistic: return bm::cdf(bm::logistic(0.0, a), x);
    case FamilyKind::gumbel: return bm::cdf(bm::extreme_value(0.0, a), x);
    case FamilyKind::gamma: return x <= 0.0 ? 0.0 : bm::cdf(bm::gamma_distribution<>(a, 1.0), x);
    case FamilyKind::smoothed_laplace: return 1.0 - sl_upper_tail(x, a, b, log_norm_);
    case FamilyKind::uniform:
        if (x <= a) return 0.0;
        if (x >= b) return 1.0;
        return (x - a) / (b - a);
    case FamilyKind::laplace: return bm::cdf(bm::laplace(0.0, a), x);
    case FamilyKind::gaussian_mixture:
        return 0.5 * (bm::cdf(bm::normal(-a, b), x) + bm::cdf(bm::normal(a, b), x));
    }
    return 0.0;
}

double Family::quantile(double p) const {
    if (!(p > 0.0 && p < 1.0)) throw DomainError("quantile level must lie in (0, 1)");
    const double a = spec_.a;
    const double b = spec_.b;
    switch (spec_.kind) {
    case FamilyKind::gaussian: return bm::quantile(bm::normal(a, std::sqrt(b)), p);
    case FamilyKind::logistic: return bm::quantile(bm::logistic(0.0, a), p);
    case FamilyKind::gumbel: return bm::quantile(bm::extreme_value(0.0, a), p);
    case FamilyKind::gamma: return bm::quantile(bm::gamma_distribution<>(a, 1.0), p);
    case FamilyKind::smoothed_laplace: {
        // symmetric; solve the upper tail in log space. Tail <= exp(-c x) / (c Z).
        const double q = std::min(p, 1.0 - p);
        if (q == 0.5) return 0.0;
        const double hi = std::max(1.0, (-std::log(q) - log_norm_ - std::log(b)) / b + a) + 1.0;
        const double x = bisect_increasing(
            [&](double t) { return -std::log(sl_upper_tail(t, a, b, log_norm_)); }, -std::log(q),
            0.0, hi);
        return p < 0.5 ? -x : x;
    }
    case FamilyKind::uniform: return a + p * (b - a);
    case FamilyKind::laplace: return bm::quantile(bm::laplace(0.0, a), p);
    case FamilyKind::gaussian_mixture: {
        const double lo = bm::quantile(bm::normal(-a, b), p);
        const double hi = bm::quantile(bm::normal(a, b), p);
        if (p < 1e-3 || p > 1.0 - 1e-3) {
            // work with the smaller tail for relative accuracy
            if (p < 0.5)
                return bisect_increasing([&](double t) { return std::log(cdf(t)); }, std::log(p), lo, hi);
            auto upper = [&](double t) {
                return -std::log(0.5 * (bm::cdf(bm::complement(bm::normal(-a, b), t)) +
                                        bm::cdf(bm::complement(bm::normal(a, b), t))));
            };
            return bisect_increasing(upper, -std::log1p(-p), lo, hi);
        }
        return bisect_increasing([&](double t) { return cdf(t); }, p, lo, hi);
    }
    }
    return 0.0;
}

AnalyticDensity::AnalyticDensity(Family family, double loc, double scale)
    : family_(std::move(family)), loc_(loc), scale_(scale) {
    if (!(scale > 0.0) || !std::isfinite(scale) || !std::isfinite(loc))
        throw DomainError("analytic density scale must be finite and > 0");
}

AnalyticDensity AnalyticDensity::affine(double shift, double factor) const {
    return AnalyticDensity(family_, shift + factor * loc_, factor * scale_);
}

double AnalyticDensity::pdf(double x) const { return family_.pdf((x - loc_) / scale_) / scale_; }
double AnalyticDensity::dpdf(double x) const {
    return family_.dpdf((x - loc_) / scale_) / (scale_ * scale_);
}
double AnalyticDensity::d2pdf(double x) const {
    return family_.d2pdf((x - loc_) / scale_) / (scale_ * scale_ * scale_);
}
double AnalyticDensity::psi1(double x) const { return family_.psi1((x - loc_) / scale_) / scale_; }
double AnalyticDensity::psi2(double x) const {
    return family_.psi2((x - loc_) / scale_) / (scale_ * scale_);
}
double AnalyticDensity::cdf(double x) const { return family_.cdf((x - loc_) / scale_); }
double AnalyticDensity::quantile(double p) const { return loc_ + scale_ * family_.quantile(p); }
double AnalyticDensity::support_lo() const { return loc_ + scale_ * family_.support_lo(); }
double AnalyticDensity::support_hi() const { return loc_ + scale_ * family_.support_hi(); }
double AnalyticDensity::mean() const { return loc_ + scale_ * family_.mean(); }
double AnalyticDensity::variance() const { return scale_ * scale_ * family_.variance(); }

} // namespace entlab
