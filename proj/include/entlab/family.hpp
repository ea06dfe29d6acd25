#pragma once

#include <string>
#include <string_view>

namespace entlab {

enum class FamilyKind {
    gaussian,
    logistic,
    gumbel,
    gamma,
    smoothed_laplace,
    uniform,
    laplace,
    gaussian_mixture, // two-bump negative control, not log-concave
};

std::string_view to_string(FamilyKind kind);
FamilyKind family_kind_from_string(std::string_view name);

/// Which functionals are finite for a density, and whether its density is
/// smooth on the whole line (no jumps or kinks at support edges).
struct Capability {
    bool entropy = true;
    bool fisher = true;
    bool k = true;
    bool smooth = true;

    bool operator==(const Capability&) const = default;
};

/// A built-in family with its parameters. Construct through the named
/// factories; validate() rejects unsupported parameter ranges.
struct FamilySpec {
    FamilyKind kind = FamilyKind::gaussian;
    double a = 0.0; // mean | scale | beta | shape | a | lo | b | separation
    double b = 1.0; // variance | - | - | - | c | hi | - | sd

    static FamilySpec gaussian(double mean, double variance);
    static FamilySpec logistic(double scale);
    static FamilySpec gumbel(double beta);
    static FamilySpec gamma(double shape);
    /// psi(x) = c * sqrt(a^2 + x^2) + const
    static FamilySpec smoothed_laplace(double a, double c = 1.0);
    static FamilySpec uniform(double lo, double hi);
    static FamilySpec laplace(double b);
    /// Equal-weight mixture of N(-separation, sd^2) and N(+separation, sd^2).
    static FamilySpec gaussian_mixture(double separation, double sd);

    void validate() const;
    Capability capability() const;
    bool log_concave() const;
    std::string describe() const;
};

/// Closed-form density of a family: pdf, its first two derivatives, the
/// log-density derivatives psi' and psi'' (psi = -log f), CDF and quantiles.
class Family {
public:
    explicit Family(const FamilySpec& spec);

    const FamilySpec& spec() const noexcept { return spec_; }

    double pdf(double x) const;
    double dpdf(double x) const;
    double d2pdf(double x) const;
    double psi1(double x) const;
    double psi2(double x) const;
    double cdf(double x) const;
    double quantile(double p) const;

    double support_lo() const noexcept { return lo_; }
    double support_hi() const noexcept { return hi_; }
    double mean() const noexcept { return mean_; }
    double variance() const noexcept { return variance_; }

private:
    FamilySpec spec_;
    double lo_;
    double hi_;
    double mean_ = 0.0;
    double variance_ = 1.0;
    double log_norm_ = 0.0; // log of the normalizing constant where needed
};

/// Law of loc + scale * Y with Y drawn from a family.
class AnalyticDensity {
public:
    AnalyticDensity(Family family, double loc = 0.0, double scale = 1.0);

    const Family& family() const noexcept { return family_; }
    double loc() const noexcept { return loc_; }
    double scale() const noexcept { return scale_; }

    /// Pushforward under x -> shift + factor * x.
    AnalyticDensity affine(double shift, double factor) const;

    double pdf(double x) const;
    double dpdf(double x) const;
    double d2pdf(double x) const;
    double psi1(double x) const;
    double psi2(double x) const;
    double cdf(double x) const;
    double quantile(double p) const;
    double support_lo() const;
    double support_hi() const;
    double mean() const;
    double variance() const;

private:
    Family family_;
    double loc_;
    double scale_;
};

} // namespace entlab
