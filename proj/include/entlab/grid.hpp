#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace entlab {

/// Uniform 1-D grid: nodes origin + i * spacing for i in [0, count).
class Grid {
public:
    static constexpr std::size_t min_count = 16;

    Grid(double origin, double spacing, std::size_t count);

    /// Grid with `count` nodes whose first and last nodes are exactly lo and hi.
    static Grid spanning(double lo, double hi, std::size_t count);

    double origin() const noexcept { return origin_; }
    double spacing() const noexcept { return spacing_; }
    std::size_t count() const noexcept { return count_; }
    double node(std::size_t i) const noexcept { return origin_ + spacing_ * static_cast<double>(i); }
    double front() const noexcept { return origin_; }
    double back() const noexcept { return node(count_ - 1); }
    double length() const noexcept { return back() - front(); }

    std::vector<double> nodes() const;

    /// Pushforward of the nodes under x -> shift + scale * x (scale > 0).
    Grid affine(double shift, double scale) const;

    bool operator==(const Grid&) const = default;

private:
    double origin_;
    double spacing_;
    std::size_t count_;
};

/// A quadrature value with its error estimate.
struct Estimate {
    double value = 0.0;
    double err = 0.0;
};

/// Composite trapezoid weights with Gregory end corrections (exact for
/// polynomials of degree <= 5 when count >= 10), scaled by the spacing.
/// `breaks` lists interior node indices where the integrand may have a kink;
/// the rule is then applied on each segment separately.
std::vector<double> quadrature_weights(std::size_t count, double spacing,
                                       std::span<const std::size_t> breaks = {});

/// Integral of sampled values over the grid with a Richardson-style error
/// estimate: |Q_h - Q_2h| from the stride-2 subgrid, plus a summation
/// round-off floor. Segments between breaks are integrated separately.
Estimate integrate(const Grid& grid, std::span<const double> integrand,
                   std::span<const std::size_t> breaks = {});

/// Weighted sum without an error estimate.
double integrate_value(const Grid& grid, std::span<const double> integrand,
                       std::span<const std::size_t> breaks = {});

/// Running integral from the left end, trapezoid rule.
std::vector<double> cumulative_trapezoid(const Grid& grid, std::span<const double> values);

} // namespace entlab
