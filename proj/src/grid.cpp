#include "entlab/grid.hpp"

#include "entlab/error.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <string>

namespace entlab {

Grid::Grid(double origin, double spacing, std::size_t count)
    : origin_(origin), spacing_(spacing), count_(count) {
    if (!(spacing > 0.0) || !std::isfinite(spacing) || !std::isfinite(origin))
        throw DomainError("grid spacing must be finite and > 0");
    if (count < min_count)
        throw DomainError("grid needs at least " + std::to_string(min_count) + " nodes, got " +
                          std::to_string(count));
}

Grid Grid::spanning(double lo, double hi, std::size_t count) {
    if (!(hi > lo)) throw DomainError("grid span must satisfy lo < hi");
    if (count < min_count)
        throw DomainError("grid needs at least " + std::to_string(min_count) + " nodes");
    return Grid(lo, (hi - lo) / static_cast<double>(count - 1), count);
}

std::vector<double> Grid::nodes() const {
    std::vector<double> x(count_);
    for (std::size_t i = 0; i < count_; ++i) x[i] = node(i);
    return x;
}

Grid Grid::affine(double shift, double scale) const {
    if (!(scale > 0.0)) throw DomainError("affine scale must be > 0");
    return Grid(shift + scale * origin_, scale * spacing_, count_);
}

namespace {

constexpr std::array<double, 5> gregory6 = {95.0 / 288.0, 317.0 / 240.0, 23.0 / 30.0,
                                            793.0 / 720.0, 157.0 / 160.0};
constexpr std::array<double, 3> gregory4 = {3.0 / 8.0, 7.0 / 6.0, 23.0 / 24.0};

template <std::size_t N>
void apply_ends(std::vector<double>& w, const std::array<double, N>& ends) {
    const std::size_t n = w.size();
    for (std::size_t i = 0; i < N; ++i) {
        w[i] = ends[i];
        w[n - 1 - i] = ends[i];
    }
}

std::vector<double> segment_weights(std::size_t count, double spacing) {
    std::vector<double> w(count, 1.0);
    if (count >= 10)
        apply_ends(w, gregory6);
    else if (count >= 6)
        apply_ends(w, gregory4);
    else if (count >= 2) {
        w.front() = 0.5;
        w.back() = 0.5;
    }
    for (auto& v : w) v *= spacing;
    return w;
}

// Weighted sum over nodes first, first + stride, ..., last (inclusive).
double strided_sum(std::span<const double> g, std::size_t last, std::size_t stride, double h,
                   double* abs_sum) {
    const std::size_t m = last / stride + 1;
    const auto w = segment_weights(m, h * static_cast<double>(stride));
    double s = 0.0;
    double a = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
        const double term = w[j] * g[j * stride];
        s += term;
        a += std::abs(term);
    }
    if (abs_sum) *abs_sum = a;
    return s;
}

Estimate segment_integral(std::span<const double> g, double h) {
    const std::size_t n = g.size();
    double abs_sum = 0.0;
    const double fine = strided_sum(g, n - 1, 1, h, &abs_sum);

    // Coarse rule on the even-indexed nodes; when the node count is even the
    // last fine interval is closed with the 4-point Adams-Moulton panel.
    const std::size_t last_even = (n - 1) % 2 == 0 ? n - 1 : n - 2;
    double coarse = strided_sum(g, last_even, 2, h, nullptr);
    if (last_even != n - 1)
        coarse += h / 24.0 * (g[n - 4] - 5.0 * g[n - 3] + 19.0 * g[n - 2] + 9.0 * g[n - 1]);

    const double roundoff =
        static_cast<double>(n) * std::numeric_limits<double>::epsilon() * abs_sum;
    if (!std::isfinite(fine)) throw NumericalError("non-finite integrand in quadrature");
    return {fine, std::abs(fine - coarse) + roundoff};
}

// Segment boundaries [0, b1, ..., n - 1]; each segment keeps >= 8 nodes.
std::vector<std::size_t> segments(std::size_t count, std::span<const std::size_t> breaks) {
    std::vector<std::size_t> s{0};
    for (std::size_t b : breaks) {
        if (b < s.back() + 7 || b + 7 > count - 1)
            throw DomainError("quadrature breaks must be increasing interior nodes at least 7 apart");
        s.push_back(b);
    }
    s.push_back(count - 1);
    return s;
}

} // namespace

std::vector<double> quadrature_weights(std::size_t count, double spacing,
                                       std::span<const std::size_t> breaks) {
    if (breaks.empty()) return segment_weights(count, spacing);
    const auto s = segments(count, breaks);
    std::vector<double> w(count, 0.0);
    for (std::size_t k = 0; k + 1 < s.size(); ++k) {
        const auto part = segment_weights(s[k + 1] - s[k] + 1, spacing);
        for (std::size_t j = 0; j < part.size(); ++j) w[s[k] + j] += part[j];
    }
    return w;
}

double integrate_value(const Grid& grid, std::span<const double> integrand,
                       std::span<const std::size_t> breaks) {
    if (breaks.empty()) return strided_sum(integrand, grid.count() - 1, 1, grid.spacing(), nullptr);
    const auto w = quadrature_weights(grid.count(), grid.spacing(), breaks);
    double s = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) s += w[i] * integrand[i];
    return s;
}

Estimate integrate(const Grid& grid, std::span<const double> g,
                   std::span<const std::size_t> breaks) {
    if (g.size() != grid.count()) throw DomainError("integrand does not match the grid");
    const auto s = segments(grid.count(), breaks);
    Estimate total;
    for (std::size_t k = 0; k + 1 < s.size(); ++k) {
        const Estimate e = segment_integral(g.subspan(s[k], s[k + 1] - s[k] + 1), grid.spacing());
        total.value += e.value;
        total.err += e.err;
    }
    return total;
}

std::vector<double> cumulative_trapezoid(const Grid& grid, std::span<const double> values) {
    std::vector<double> c(grid.count(), 0.0);
    const double h = grid.spacing();
    for (std::size_t i = 1; i < grid.count(); ++i)
        c[i] = c[i - 1] + 0.5 * h * (values[i - 1] + values[i]);
    return c;
}

} // namespace entlab
