#pragma once

#include "entlab/family.hpp"
#include "entlab/grid.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace entlab {

/// Module tolerances shared by every density operation.
namespace tol {
inline constexpr double tail = 1e-9;           // truncated mass allowed outside a grid
inline constexpr double density_floor = 1e-15; // nodes below floor * max(f) are masked
inline constexpr double moment = 1e-7;         // isotropy tolerance on mean and variance
inline constexpr double coverage = 1e-10;      // default analytic quantile coverage
inline constexpr std::size_t resolution = 4096;
} // namespace tol

/// Resolution and tail coverage requested from build_density.
struct GridHint {
    std::size_t count = tol::resolution;
    double coverage = tol::coverage;
};

/// A normalized nonnegative density sampled on a uniform grid.
///
/// Optionally carries the first two derivatives at the nodes ("jets") and,
/// for built-in families, the closed form it was sampled from. A bounded
/// side means the grid end is the exact support boundary, where the
/// density may jump.
class GridDensity {
public:
    struct Sides {
        bool left = false;
        bool right = false;
    };

    GridDensity(Grid grid, std::vector<double> values, std::vector<double> d1,
                std::vector<double> d2, double tail_mass_bound, Capability capability,
                bool log_concave, Sides bounded, std::string label,
                std::optional<AnalyticDensity> analytic = std::nullopt,
                std::vector<std::size_t> kinks = {});

    const Grid& grid() const noexcept { return grid_; }
    std::span<const double> values() const noexcept { return values_; }
    bool has_jets() const noexcept { return !d1_.empty(); }
    std::span<const double> first_derivative() const noexcept { return d1_; }
    std::span<const double> second_derivative() const noexcept { return d2_; }
    double tail_mass_bound() const noexcept { return tail_; }
    const Capability& capability() const noexcept { return capability_; }
    bool log_concave() const noexcept { return log_concave_; }
    Sides bounded() const noexcept { return bounded_; }
    const std::string& label() const noexcept { return label_; }
    const std::optional<AnalyticDensity>& analytic() const noexcept { return analytic_; }
    /// Interior nodes where f' jumps; quadratures split there.
    std::span<const std::size_t> kinks() const noexcept { return kinks_; }
    double max_value() const noexcept { return max_value_; }
    double mass() const;

    GridDensity relabeled(std::string label) const;

private:
    Grid grid_;
    std::vector<double> values_;
    std::vector<double> d1_;
    std::vector<double> d2_;
    double tail_;
    Capability capability_;
    bool log_concave_;
    Sides bounded_;
    std::string label_;
    std::optional<AnalyticDensity> analytic_;
    std::vector<std::size_t> kinks_;
    double max_value_ = 0.0;
};

/// Samples a built-in family on a grid covering its [eps, 1 - eps] quantiles
/// (finite support ends are used exactly).
GridDensity build_density(const FamilySpec& spec, const GridHint& hint = {});

/// Density of shift + factor * X, exact: the grid is mapped, not resampled.
GridDensity affine(const GridDensity& d, double shift, double factor);

/// Density of s * X.
inline GridDensity scale(const GridDensity& d, double s) { return affine(d, 0.0, s); }

struct Moments {
    double mean = 0.0;
    double variance = 0.0;
    double err = 0.0;
};

Moments moments(const GridDensity& d);

bool is_isotropic(const GridDensity& d, double tolerance = tol::moment);

/// Affine pushforward (x - m) / s to mean 0 and variance 1.
GridDensity isotropize(const GridDensity& d);

/// psi = -log f and its derivatives on the grid of a density.
struct Potential {
    Grid grid;
    std::vector<double> psi;
    std::vector<double> psi1;
    std::vector<double> psi2;
    std::vector<bool> valid_mask;
    // central-difference versions kept for cross-checking the primary path
    std::vector<double> psi1_fd;
    std::vector<double> psi2_fd;
    bool from_closed_form = false;
};

Potential potential_of(const GridDensity& d);

struct LogConcavity {
    bool log_concave = true;
    std::size_t argmin = 0;
    double worst = 0.0; // min psi'' over interior valid nodes
};

LogConcavity check_log_concave(const Potential& p, double tolerance = 1e-6);

/// Value and first two derivatives of a density at an arbitrary point.
struct Jet {
    double f = 0.0;
    double d1 = 0.0;
    double d2 = 0.0;
};

/// Pointwise evaluation of a grid density: the closed form when available,
/// quintic Hermite interpolation of the jets otherwise, and Catmull-Rom
/// interpolation of log f for densities without jets. Zero outside the grid.
class DensityEvaluator {
public:
    explicit DensityEvaluator(const GridDensity& d);

    double value(double x) const;
    Jet jet(double x) const;
    double cdf(double x) const;
    /// psi'' = (f'/f)^2 - f''/f; NaN where f == 0.
    double psi2(double x) const;

private:
    const GridDensity* d_;
    std::vector<double> cumulative_;
    std::vector<double> log_values_;
    double floor_;

    double cell_integral(std::size_t i, double s) const;
};

/// Values of d sampled at the nodes of another grid.
std::vector<double> sample_on(const GridDensity& d, const Grid& grid);

/// Same support with 2N - 1 nodes (midpoints inserted).
GridDensity refine(const GridDensity& d);

/// Integral of |f - g| and sup |f - g| on a grid covering both supports.
double l1_distance(const GridDensity& a, const GridDensity& b);
double sup_distance(const GridDensity& a, const GridDensity& b);

} // namespace entlab
