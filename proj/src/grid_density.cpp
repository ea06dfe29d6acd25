#include "entlab/grid_density.hpp"

#include "entlab/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

namespace entlab {

namespace {

constexpr double nan = std::numeric_limits<double>::quiet_NaN();

// Quintic Hermite polynomial on a unit cell matching value, first and second
// derivative at both ends (derivatives already scaled by the spacing).
std::array<double, 6> quintic(double f0, double g0, double k0, double f1, double g1, double k1) {
    const double c0 = f0;
    const double c1 = g0;
    const double c2 = 0.5 * k0;
    const double A = f1 - c0 - c1 - c2;
    const double B = g1 - c1 - 2.0 * c2;
    const double C = k1 - 2.0 * c2;
    return {c0, c1, c2, 10.0 * A - 4.0 * B + 0.5 * C, -15.0 * A + 7.0 * B - C,
            6.0 * A - 3.0 * B + 0.5 * C};
}

std::string format_affine(const std::string& label, double shift, double factor) {
    std::ostringstream os;
    os << label << " * " << factor;
    if (shift != 0.0) os << (shift > 0 ? " + " : " - ") << std::abs(shift);
    return os.str();
}

} // namespace

GridDensity::GridDensity(Grid grid, std::vector<double> values, std::vector<double> d1,
                         std::vector<double> d2, double tail_mass_bound, Capability capability,
                         bool log_concave, Sides bounded, std::string label,
                         std::optional<AnalyticDensity> analytic,
                         std::vector<std::size_t> kinks)
    : grid_(grid), values_(std::move(values)), d1_(std::move(d1)), d2_(std::move(d2)),
      tail_(tail_mass_bound), capability_(capability), log_concave_(log_concave),
      bounded_(bounded), label_(std::move(label)), analytic_(std::move(analytic)),
      kinks_(std::move(kinks)) {
    const std::size_t n = grid_.count();
    if (values_.size() != n) throw DomainError("density values do not match the grid");
    if (!(d1_.empty() && d2_.empty()) && (d1_.size() != n || d2_.size() != n))
        throw DomainError("density derivative jets do not match the grid");
    for (double v : values_) {
        if (!(v >= 0.0) || !std::isfinite(v))
            throw NumericalError("density values must be finite and nonnegative (" + label_ + ")");
        max_value_ = std::max(max_value_, v);
    }
    if (!(tail_ >= 0.0)) throw DomainError("tail mass bound must be >= 0");
    const double m = mass();
    if (m < 1.0 - 10.0 * tol::tail - tail_ || m > 1.0 + 10.0 * tol::tail)
        throw NumericalError("density '" + label_ + "' is not normalized: mass " +
                             std::to_string(m));
}

double GridDensity::mass() const { return integrate_value(grid_, values_, kinks_); }

GridDensity GridDensity::relabeled(std::string label) const {
    GridDensity copy = *this;
    copy.label_ = std::move(label);
    return copy;
}

GridDensity build_density(const FamilySpec& spec, const GridHint& hint) {
    spec.validate();
    if (!(hint.coverage > 0.0 && hint.coverage <= 1e-6))
        throw DomainError("coverage quantile must lie in (0, 1e-6]");
    const AnalyticDensity ad{Family(spec)};
    const bool bounded_lo = std::isfinite(ad.support_lo());
    const bool bounded_hi = std::isfinite(ad.support_hi());
    double lo = bounded_lo ? ad.support_lo() : ad.quantile(hint.coverage);
    double hi = bounded_hi ? ad.support_hi() : ad.quantile(1.0 - hint.coverage);
    // laplace has a kink at its center 0, which must land on the middle node
    std::size_t count = hint.count;
    if (spec.kind == FamilyKind::laplace) {
        if (count % 2 == 0) ++count;
        hi = std::max(-lo, hi);
        lo = -hi;
    }
    const Grid grid = Grid::spanning(lo, hi, count);

    std::vector<double> f(grid.count());
    std::vector<double> d1(grid.count());
    std::vector<double> d2(grid.count());
    for (std::size_t i = 0; i < grid.count(); ++i) {
        // clamp so rounding never pushes a bounded end node off the support
        const double x = std::clamp(grid.node(i), lo, hi);
        f[i] = ad.pdf(x);
        d1[i] = ad.dpdf(x);
        d2[i] = ad.d2pdf(x);
    }
    double tail = 0.0;
    if (!bounded_lo) tail += ad.cdf(lo);
    if (!bounded_hi) tail += 1.0 - ad.cdf(hi);
    std::vector<std::size_t> kinks;
    if (spec.kind == FamilyKind::laplace) kinks.push_back((count - 1) / 2);
    return GridDensity(grid, std::move(f), std::move(d1), std::move(d2), std::max(tail, 0.0),
                       spec.capability(), spec.log_concave(), {bounded_lo, bounded_hi},
                       spec.describe(), ad, std::move(kinks));
}

GridDensity affine(const GridDensity& d, double shift, double factor) {
    if (!(factor > 0.0) || !std::isfinite(factor) || !std::isfinite(shift))
        throw DomainError("affine map needs a finite factor > 0");
    const std::size_t n = d.grid().count();
    std::vector<double> f(n);
    std::vector<double> d1;
    std::vector<double> d2;
    for (std::size_t i = 0; i < n; ++i) f[i] = d.values()[i] / factor;
    if (d.has_jets()) {
        d1.resize(n);
        d2.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            d1[i] = d.first_derivative()[i] / (factor * factor);
            d2[i] = d.second_derivative()[i] / (factor * factor * factor);
        }
    }
    std::optional<AnalyticDensity> ad;
    if (d.analytic()) ad = d.analytic()->affine(shift, factor);
    return GridDensity(d.grid().affine(shift, factor), std::move(f), std::move(d1), std::move(d2),
                       d.tail_mass_bound(), d.capability(), d.log_concave(), d.bounded(),
                       format_affine(d.label(), shift, factor), std::move(ad),
                       {d.kinks().begin(), d.kinks().end()});
}

Moments moments(const GridDensity& d) {
    const Grid& g = d.grid();
    const auto f = d.values();
    std::vector<double> buf(g.count());
    const auto k = d.kinks();
    const Estimate m0 = integrate(g, f, k);
    for (std::size_t i = 0; i < g.count(); ++i) buf[i] = g.node(i) * f[i];
    const Estimate m1 = integrate(g, buf, k);
    const double mean = m1.value / m0.value;
    for (std::size_t i = 0; i < g.count(); ++i) {
        const double c = g.node(i) - mean;
        buf[i] = c * c * f[i];
    }
    const Estimate m2 = integrate(g, buf, k);
    const double var = m2.value / m0.value;
    if (!std::isfinite(mean) || !std::isfinite(var))
        throw NumericalError("non-finite moments for '" + d.label() + "'");
    const double err = (m1.err + std::abs(mean) * m0.err + m2.err + var * m0.err) / m0.value;
    return {mean, var, err};
}

bool is_isotropic(const GridDensity& d, double tolerance) {
    const Moments m = moments(d);
    return std::abs(m.mean) <= tolerance && std::abs(m.variance - 1.0) <= tolerance;
}

GridDensity isotropize(const GridDensity& d) {
    double mean = 0.0;
    double var = 0.0;
    if (d.analytic()) {
        mean = d.analytic()->mean();
        var = d.analytic()->variance();
    } else {
        const Moments m = moments(d);
        mean = m.mean;
        var = m.variance;
    }
    if (!(var > 0.0) || !std::isfinite(var) || !std::isfinite(mean))
        throw DomainError("cannot isotropize '" + d.label() + "': variance is zero or not finite");
    const double s = std::sqrt(var);
    GridDensity out = affine(d, -mean / s, 1.0 / s);
    return out.relabeled("iso " + d.label());
}

Potential potential_of(const GridDensity& d) {
    const Grid& g = d.grid();
    const std::size_t n = g.count();
    const auto f = d.values();
    const double floor = tol::density_floor * d.max_value();
    const double h = g.spacing();

    Potential p{g, std::vector<double>(n), std::vector<double>(n, 0.0),
                std::vector<double>(n, 0.0), std::vector<bool>(n, false),
                std::vector<double>(n, 0.0), std::vector<double>(n, 0.0), false};
    for (std::size_t i = 0; i < n; ++i) {
        p.valid_mask[i] = f[i] > 0.0 && f[i] >= floor;
        p.psi[i] = -std::log(std::max(f[i], floor));
    }

    auto ok = [&](std::size_t i) { return p.valid_mask[i]; };
    for (std::size_t i = 0; i < n; ++i) {
        if (!ok(i)) continue;
        if (i > 0 && i + 1 < n && ok(i - 1) && ok(i + 1)) {
            p.psi1_fd[i] = (p.psi[i + 1] - p.psi[i - 1]) / (2.0 * h);
            p.psi2_fd[i] = (p.psi[i + 1] - 2.0 * p.psi[i] + p.psi[i - 1]) / (h * h);
        } else if (i + 3 < n && ok(i + 1) && ok(i + 2) && ok(i + 3)) {
            p.psi1_fd[i] = (-3.0 * p.psi[i] + 4.0 * p.psi[i + 1] - p.psi[i + 2]) / (2.0 * h);
            p.psi2_fd[i] =
                (2.0 * p.psi[i] - 5.0 * p.psi[i + 1] + 4.0 * p.psi[i + 2] - p.psi[i + 3]) / (h * h);
        } else if (i >= 3 && ok(i - 1) && ok(i - 2) && ok(i - 3)) {
            p.psi1_fd[i] = (3.0 * p.psi[i] - 4.0 * p.psi[i - 1] + p.psi[i - 2]) / (2.0 * h);
            p.psi2_fd[i] =
                (2.0 * p.psi[i] - 5.0 * p.psi[i - 1] + 4.0 * p.psi[i - 2] - p.psi[i - 3]) / (h * h);
        }
    }

    if (d.analytic()) {
        p.from_closed_form = true;
        for (std::size_t i = 0; i < n; ++i) {
            if (!ok(i)) continue;
            p.psi1[i] = d.analytic()->psi1(g.node(i));
            p.psi2[i] = d.analytic()->psi2(g.node(i));
        }
    } else if (d.has_jets()) {
        const auto d1 = d.first_derivative();
        const auto d2 = d.second_derivative();
        for (std::size_t i = 0; i < n; ++i) {
            if (!ok(i)) continue;
            const double r = d1[i] / f[i];
            p.psi1[i] = -r;
            p.psi2[i] = r * r - d2[i] / f[i];
        }
    } else {
        p.psi1 = p.psi1_fd;
        p.psi2 = p.psi2_fd;
    }
    // kink nodes take left limits (the psi'' point mass there is not a value)
    for (std::size_t k : d.kinks()) {
        if (!ok(k) || k < 3 || !(ok(k - 1) && ok(k - 2) && ok(k - 3))) continue;
        p.psi1_fd[k] = (3.0 * p.psi[k] - 4.0 * p.psi[k - 1] + p.psi[k - 2]) / (2.0 * h);
        p.psi2_fd[k] = (2.0 * p.psi[k] - 5.0 * p.psi[k - 1] + 4.0 * p.psi[k - 2] - p.psi[k - 3]) / (h * h);
        if (d.analytic()) {
            p.psi1[k] = d.analytic()->psi1(g.node(k) - 1e-6 * h);
            p.psi2[k] = d.analytic()->psi2(g.node(k) - 1e-6 * h);
        } else {
            p.psi1[k] = p.psi1_fd[k];
            p.psi2[k] = p.psi2_fd[k];
        }
    }
    return p;
}

LogConcavity check_log_concave(const Potential& p, double tolerance) {
    LogConcavity out;
    out.worst = std::numeric_limits<double>::infinity();
    const std::size_t n = p.grid.count();
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (!(p.valid_mask[i - 1] && p.valid_mask[i] && p.valid_mask[i + 1])) continue;
        if (p.psi2[i] < out.worst) {
            out.worst = p.psi2[i];
            out.argmin = i;
        }
    }
    out.log_concave = out.worst >= -tolerance;
    return out;
}

DensityEvaluator::DensityEvaluator(const GridDensity& d)
    : d_(&d), floor_(tol::density_floor * d.max_value()) {
    if (d.analytic()) return;
    const Grid& g = d.grid();
    const std::size_t n = g.count();
    const auto f = d.values();
    cumulative_.assign(n, 0.0);
    if (d.has_jets()) {
        for (std::size_t i = 0; i + 1 < n; ++i) cumulative_[i + 1] = cumulative_[i] + cell_integral(i, 1.0);
    } else {
        cumulative_ = cumulative_trapezoid(g, f);
        log_values_.resize(n);
        for (std::size_t i = 0; i < n; ++i)
            log_values_[i] = f[i] > floor_ ? std::log(f[i]) : -std::numeric_limits<double>::infinity();
    }
}

double DensityEvaluator::cell_integral(std::size_t i, double s) const {
    const Grid& g = d_->grid();
    const double h = g.spacing();
    const auto f = d_->values();
    const auto d1 = d_->first_derivative();
    const auto d2 = d_->second_derivative();
    const auto c = quintic(f[i], h * d1[i], h * h * d2[i], f[i + 1], h * d1[i + 1], h * h * d2[i + 1]);
    double acc = 0.0;
    double sp = s;
    for (std::size_t k = 0; k < 6; ++k) {
        acc += c[k] * sp / static_cast<double>(k + 1);
        sp *= s;
    }
    return h * acc;
}

Jet DensityEvaluator::jet(double x) const {
    if (d_->analytic()) {
        const auto& a = *d_->analytic();
        return {a.pdf(x), a.dpdf(x), a.d2pdf(x)};
    }
    const Grid& g = d_->grid();
    if (!(x >= g.front() && x <= g.back())) return {};
    const double h = g.spacing();
    const std::size_t n = g.count();
    double u = (x - g.front()) / h;
    std::size_t i = std::min(static_cast<std::size_t>(u), n - 2);
    const double s = u - static_cast<double>(i);
    const auto f = d_->values();

    if (d_->has_jets()) {
        const auto d1 = d_->first_derivative();
        const auto d2 = d_->second_derivative();
        const auto c =
            quintic(f[i], h * d1[i], h * h * d2[i], f[i + 1], h * d1[i + 1], h * h * d2[i + 1]);
        const double v = c[0] + s * (c[1] + s * (c[2] + s * (c[3] + s * (c[4] + s * c[5]))));
        const double dv =
            c[1] + s * (2.0 * c[2] + s * (3.0 * c[3] + s * (4.0 * c[4] + s * 5.0 * c[5])));
        const double ddv = 2.0 * c[2] + s * (6.0 * c[3] + s * (12.0 * c[4] + s * 20.0 * c[5]));
        return {std::max(v, 0.0), dv / h, ddv / (h * h)};
    }

    // Catmull-Rom on log f where the four supporting nodes are positive.
    const auto& L = log_values_;
    if (i >= 1 && i + 2 < n && std::isfinite(L[i - 1]) && std::isfinite(L[i]) &&
        std::isfinite(L[i + 1]) && std::isfinite(L[i + 2])) {
        const double p0 = L[i - 1], p1 = L[i], p2 = L[i + 1], p3 = L[i + 2];
        const double a0 = p1;
        const double a1 = 0.5 * (p2 - p0);
        const double a2 = p0 - 2.5 * p1 + 2.0 * p2 - 0.5 * p3;
        const double a3 = 0.5 * (p3 - p0) + 1.5 * (p1 - p2);
        const double q = a0 + s * (a1 + s * (a2 + s * a3));
        const double dq = (a1 + s * (2.0 * a2 + s * 3.0 * a3)) / h;
        const double ddq = (2.0 * a2 + 6.0 * a3 * s) / (h * h);
        const double v = std::exp(q);
        return {v, v * dq, v * (dq * dq + ddq)};
    }
    const double v = (1.0 - s) * f[i] + s * f[i + 1];
    return {v, (f[i + 1] - f[i]) / h, 0.0};
}

double DensityEvaluator::value(double x) const {
    if (d_->analytic()) return d_->analytic()->pdf(x);
    return jet(x).f;
}

double DensityEvaluator::cdf(double x) const {
    if (d_->analytic()) return d_->analytic()->cdf(x);
    const Grid& g = d_->grid();
    if (x <= g.front()) return 0.0;
    if (x >= g.back()) return cumulative_.back();
    const double h = g.spacing();
    const double u = (x - g.front()) / h;
    const std::size_t i = std::min(static_cast<std::size_t>(u), g.count() - 2);
    const double s = u - static_cast<double>(i);
    if (d_->has_jets()) return cumulative_[i] + cell_integral(i, s);
    const auto f = d_->values();
    return cumulative_[i] + h * s * (f[i] + 0.5 * s * (f[i + 1] - f[i]));
}

double DensityEvaluator::psi2(double x) const {
    if (d_->analytic()) return d_->analytic()->psi2(x);
    const Jet j = jet(x);
    if (!(j.f > 0.0)) return nan;
    const double r = j.d1 / j.f;
    return r * r - j.d2 / j.f;
}

std::vector<double> sample_on(const GridDensity& d, const Grid& grid) {
    const DensityEvaluator ev(d);
    std::vector<double> out(grid.count());
    for (std::size_t i = 0; i < grid.count(); ++i) out[i] = ev.value(grid.node(i));
    return out;
}

GridDensity refine(const GridDensity& d) {
    const Grid fine = Grid::spanning(d.grid().front(), d.grid().back(), 2 * d.grid().count() - 1);
    const DensityEvaluator ev(d);
    const std::size_t n = fine.count();
    std::vector<double> f(n);
    std::vector<double> d1;
    std::vector<double> d2;
    if (d.has_jets()) {
        d1.resize(n);
        d2.resize(n);
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (i % 2 == 0 && !d.analytic()) {
            f[i] = d.values()[i / 2];
            if (d.has_jets()) {
                d1[i] = d.first_derivative()[i / 2];
                d2[i] = d.second_derivative()[i / 2];
            }
            continue;
        }
        const Jet j = ev.jet(fine.node(i));
        f[i] = j.f;
        if (d.has_jets()) {
            d1[i] = j.d1;
            d2[i] = j.d2;
        }
    }
    std::vector<std::size_t> kinks;
    for (std::size_t k : d.kinks()) kinks.push_back(2 * k);
    // keep the exact support-boundary values of bounded sides
    if (d.analytic()) {
        f.front() = d.values().front();
        f.back() = d.values().back();
    }
    return GridDensity(fine, std::move(f), std::move(d1), std::move(d2), d.tail_mass_bound(),
                       d.capability(), d.log_concave(), d.bounded(), d.label(), d.analytic(),
                       std::move(kinks));
}

namespace {

struct CommonSamples {
    Grid grid;
    std::vector<double> a;
    std::vector<double> b;
};

CommonSamples common_samples(const GridDensity& a, const GridDensity& b) {
    const double lo = std::min(a.grid().front(), b.grid().front());
    const double hi = std::max(a.grid().back(), b.grid().back());
    const std::size_t n = 2 * std::max(a.grid().count(), b.grid().count()) - 1;
    const Grid g = Grid::spanning(lo, hi, n);
    return {g, sample_on(a, g), sample_on(b, g)};
}

} // namespace

double l1_distance(const GridDensity& a, const GridDensity& b) {
    const auto s = common_samples(a, b);
    std::vector<double> diff(s.grid.count());
    for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = std::abs(s.a[i] - s.b[i]);
    return integrate_value(s.grid, diff);
}

double sup_distance(const GridDensity& a, const GridDensity& b) {
    const auto s = common_samples(a, b);
    double m = 0.0;
    for (std::size_t i = 0; i < s.a.size(); ++i) m = std::max(m, std::abs(s.a[i] - s.b[i]));
    return m;
}

} // namespace entlab
