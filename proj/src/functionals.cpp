#include "entlab/functionals.hpp"

#include "entlab/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace entlab {

namespace {

constexpr double nan = std::numeric_limits<double>::quiet_NaN();

// Per-node quantities shared by the functionals.
struct Samples {
    std::vector<double> f;
    std::vector<double> df; // f' (analytic, jets, or central differences)
    std::vector<bool> valid;
};

std::vector<double> central_difference(const Grid& g, std::span<const double> v) {
    const std::size_t n = v.size();
    const double h = g.spacing();
    std::vector<double> out(n);
    for (std::size_t i = 1; i + 1 < n; ++i) out[i] = (v[i + 1] - v[i - 1]) / (2.0 * h);
    out[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h);
    out[n - 1] = (3.0 * v[n - 1] - 4.0 * v[n - 2] + v[n - 3]) / (2.0 * h);
    return out;
}

Samples samples_of(const GridDensity& d) {
    const Grid& g = d.grid();
    const std::size_t n = g.count();
    Samples s{{d.values().begin(), d.values().end()}, {}, std::vector<bool>(n)};
    const double floor = tol::density_floor * d.max_value();
    for (std::size_t i = 0; i < n; ++i) s.valid[i] = s.f[i] > 0.0 && s.f[i] >= floor;
    if (d.analytic()) {
        s.df.resize(n);
        for (std::size_t i = 0; i < n; ++i) s.df[i] = d.analytic()->dpdf(g.node(i));
    } else if (d.has_jets()) {
        s.df.assign(d.first_derivative().begin(), d.first_derivative().end());
    } else {
        s.df = central_difference(g, s.f);
    }
    // Kink nodes take the left derivative. The built-in kinks are symmetric,
    // so every integrand here has equal one-sided limits there.
    const double h = g.spacing();
    for (std::size_t k : d.kinks()) {
        if (d.analytic())
            s.df[k] = d.analytic()->dpdf(g.node(k) - 1e-6 * h);
        else if (k >= 2)
            s.df[k] = (3.0 * s.f[k] - 4.0 * s.f[k - 1] + s.f[k - 2]) / (2.0 * h);
    }
    return s;
}

// Integral of f * g over the valid nodes, where g is given per node.
template <class G>
Estimate integrate_weighted(const GridDensity& d, const std::vector<bool>& valid, G&& g) {
    const auto f = d.values();
    std::vector<double> integrand(f.size(), 0.0);
    for (std::size_t i = 0; i < f.size(); ++i)
        if (valid[i]) integrand[i] = f[i] * g(i);
    const Estimate e = integrate(d.grid(), integrand, d.kinks());
    if (!std::isfinite(e.value)) throw NumericalError("functional integrand is not finite");
    return e;
}

// Tail mass outside the grid times the scale of g at the nearest valid node
// of each truncated (unbounded) end, with a factor 2 for the growth of g
// beyond the cut.
template <class G>
double truncation(const GridDensity& d, const std::vector<bool>& valid, G&& g) {
    if (d.tail_mass_bound() == 0.0) return 0.0;
    double m = 0.0;
    const std::size_t n = valid.size();
    if (!d.bounded().left)
        for (std::size_t i = 0; i < n; ++i)
            if (valid[i]) {
                m = std::max(m, std::abs(g(i)));
                break;
            }
    if (!d.bounded().right)
        for (std::size_t i = n; i-- > 0;)
            if (valid[i]) {
                m = std::max(m, std::abs(g(i)));
                break;
            }
    return 2.0 * d.tail_mass_bound() * m;
}

void require_isotropic(const GridDensity& d, const char* what) {
    if (!is_isotropic(d))
        throw DomainError(std::string(what) + ": input '" + d.label() +
                          "' is not isotropic (mean 0 and variance 1 within 1e-7); isotropize it first");
}

std::string rule_for(const GridDensity& d, const std::string& functional) {
    if (!d.analytic())
        return "density has no smooth jets (both convolution factors were rough); "
               "evolve it by OU for a short time first";
    const FamilySpec& spec = d.analytic()->family().spec();
    switch (spec.kind) {
    case FamilyKind::uniform:
        return "uniform jumps at its support edges, so only entropy and the Poincare "
               "constant are finite; evolve it by OU for a short time first";
    case FamilyKind::laplace:
        return "laplace has psi'' concentrated at 0, so K is undefined; use smoothed_laplace";
    case FamilyKind::gamma:
        return functional == "fisher" ? "gamma needs shape > 2 for finite Fisher information"
                                      : "gamma needs shape > 4 for finite K";
    default: return "not supported by this family";
    }
}

struct Parts {
    Estimate value;
    double trunc;
};

Parts entropy_parts(const GridDensity& d) {
    const Samples s = samples_of(d);
    auto g = [&](std::size_t i) { return -std::log(s.f[i]); };
    std::vector<bool> positive(s.f.size());
    for (std::size_t i = 0; i < s.f.size(); ++i) positive[i] = s.f[i] > 0.0;
    return {integrate_weighted(d, positive, g), truncation(d, s.valid, g)};
}

Parts fisher_parts(const GridDensity& d) {
    require_capability(d, "fisher");
    const Samples s = samples_of(d);
    const std::size_t n = s.f.size();
    // (sqrt f)' from f' where f' is trusted, else by differencing sqrt f
    std::vector<double> root(n);
    for (std::size_t i = 0; i < n; ++i) root[i] = std::sqrt(s.f[i]);
    std::vector<double> droot(n);
    if (d.analytic() || d.has_jets()) {
        for (std::size_t i = 0; i < n; ++i) droot[i] = s.valid[i] ? s.df[i] / (2.0 * root[i]) : 0.0;
    } else {
        droot = central_difference(d.grid(), root);
    }
    std::vector<double> integrand(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        if (s.valid[i]) integrand[i] = 4.0 * droot[i] * droot[i];
    const Estimate e = integrate(d.grid(), integrand, d.kinks());
    if (!std::isfinite(e.value)) throw NumericalError("Fisher integrand is not finite");
    auto score2 = [&](std::size_t i) {
        const double r = s.df[i] / s.f[i];
        return r * r;
    };
    return {e, truncation(d, s.valid, score2)};
}

Parts rel_entropy_parts(const GridDensity& d) {
    require_isotropic(d, "rel_entropy_gauss");
    const Samples s = samples_of(d);
    const double half_log_2pi = 0.5 * std::log(2.0 * std::numbers::pi);
    const Grid& grid = d.grid();
    auto g = [&](std::size_t i) {
        const double x = grid.node(i);
        return std::log(s.f[i]) + 0.5 * x * x + half_log_2pi;
    };
    std::vector<bool> positive(s.f.size());
    for (std::size_t i = 0; i < s.f.size(); ++i) positive[i] = s.f[i] > 0.0;
    return {integrate_weighted(d, positive, g), truncation(d, s.valid, g)};
}

Parts rel_fisher_parts(const GridDensity& d) {
    require_isotropic(d, "rel_fisher_gauss");
    require_capability(d, "fisher");
    const Potential p = potential_of(d);
    const Grid& grid = d.grid();
    auto g = [&](std::size_t i) {
        const double r = p.psi1[i] - grid.node(i);
        return r * r;
    };
    return {integrate_weighted(d, p.valid_mask, g), truncation(d, p.valid_mask, g)};
}

Parts k_lebesgue_parts(const GridDensity& d) {
    require_capability(d, "k");
    const Potential p = potential_of(d);
    auto g = [&](std::size_t i) { return p.psi2[i] * p.psi2[i]; };
    Estimate e = integrate_weighted(d, p.valid_mask, g);

    const auto f = d.values();
    const auto w = quadrature_weights(f.size(), d.grid().spacing(), d.kinks());
    double masked_mass = 0.0;
    double sup = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        if (p.valid_mask[i])
            sup = std::max(sup, g(i));
        else
            masked_mass += std::abs(w[i]) * f[i];
    }
    e.err += masked_mass * sup;
    return {e, truncation(d, p.valid_mask, g)};
}

Parts k_gauss_parts(const GridDensity& d) {
    require_isotropic(d, "k_gauss");
    require_capability(d, "k");
    const Potential p = potential_of(d);
    auto g = [&](std::size_t i) {
        const double r = p.psi2[i] - 1.0;
        return r * r;
    };
    return {integrate_weighted(d, p.valid_mask, g), truncation(d, p.valid_mask, g)};
}

} // namespace

void require_capability(const GridDensity& d, const std::string& functional) {
    const Capability& c = d.capability();
    const bool ok = functional == "fisher" ? c.fisher : functional == "k" ? c.k : c.entropy;
    if (!ok)
        throw CapabilityError("'" + d.label() + "' does not support " + functional + ": " +
                              rule_for(d, functional));
}

double gaussian_entropy() { return 0.5 * std::log(2.0 * std::numbers::pi * std::numbers::e); }

Estimate entropy_lebesgue(const GridDensity& d) { return entropy_parts(d).value; }
Estimate fisher_lebesgue(const GridDensity& d) { return fisher_parts(d).value; }
Estimate rel_entropy_gauss(const GridDensity& d) { return rel_entropy_parts(d).value; }
Estimate rel_fisher_gauss(const GridDensity& d) { return rel_fisher_parts(d).value; }
Estimate k_lebesgue(const GridDensity& d) { return k_lebesgue_parts(d).value; }
Estimate k_gauss(const GridDensity& d) { return k_gauss_parts(d).value; }

Estimate fisher_ratio_form(const GridDensity& d) {
    require_capability(d, "fisher");
    const Samples s = samples_of(d);
    return integrate_weighted(d, s.valid, [&](std::size_t i) {
        const double r = s.df[i] / s.f[i];
        return r * r;
    });
}

FunctionalReport compute_functionals(const GridDensity& d) {
    FunctionalReport r;
    const Capability& cap = d.capability();
    r.isotropic = is_isotropic(d);

    auto store = [](const Parts& p, double& value, double& err, double& trunc, bool& finite) {
        value = p.value.value;
        err = p.value.err;
        trunc = p.trunc;
        finite = true;
    };
    auto blank = [](double& value, double& err, double& trunc, bool& finite) {
        value = err = trunc = nan;
        finite = false;
    };

    store(entropy_parts(d), r.ent_L, r.err.ent_L, r.trunc.ent_L, r.finite.ent_L);
    if (cap.fisher)
        store(fisher_parts(d), r.fisher_L, r.err.fisher_L, r.trunc.fisher_L, r.finite.fisher_L);
    else
        blank(r.fisher_L, r.err.fisher_L, r.trunc.fisher_L, r.finite.fisher_L);
    if (cap.k)
        store(k_lebesgue_parts(d), r.k_L, r.err.k_L, r.trunc.k_L, r.finite.k_L);
    else
        blank(r.k_L, r.err.k_L, r.trunc.k_L, r.finite.k_L);

    if (r.isotropic) {
        store(rel_entropy_parts(d), r.rel_entropy, r.err.rel_entropy, r.trunc.rel_entropy,
              r.finite.rel_entropy);
    } else {
        blank(r.rel_entropy, r.err.rel_entropy, r.trunc.rel_entropy, r.finite.rel_entropy);
    }
    if (r.isotropic && cap.fisher)
        store(rel_fisher_parts(d), r.rel_fisher, r.err.rel_fisher, r.trunc.rel_fisher,
              r.finite.rel_fisher);
    else
        blank(r.rel_fisher, r.err.rel_fisher, r.trunc.rel_fisher, r.finite.rel_fisher);
    if (r.isotropic && cap.k)
        store(k_gauss_parts(d), r.k_gauss, r.err.k_gauss, r.trunc.k_gauss, r.finite.k_gauss);
    else
        blank(r.k_gauss, r.err.k_gauss, r.trunc.k_gauss, r.finite.k_gauss);

    r.finite.m_gauss = r.finite.k_gauss && r.finite.rel_fisher;
    r.m_gauss = r.k_gauss + 2.0 * r.rel_fisher;
    r.err.m_gauss = r.err.k_gauss + 2.0 * r.err.rel_fisher;
    r.trunc.m_gauss = r.trunc.k_gauss + 2.0 * r.trunc.rel_fisher;

    auto budget = [&](double FunctionalReport::Fields<double>::*field) {
        return r.err.*field + r.trunc.*field;
    };
    using F = FunctionalReport::Fields<double>;
    r.entropy_identity = r.rel_entropy - (gaussian_entropy() - r.ent_L);
    r.entropy_identity_err = budget(&F::rel_entropy) + budget(&F::ent_L);
    r.fisher_identity = r.rel_fisher - (r.fisher_L - 1.0);
    r.fisher_identity_err = budget(&F::rel_fisher) + budget(&F::fisher_L);
    r.k_identity = r.k_gauss - (r.k_L - 2.0 * r.fisher_L + 1.0);
    r.k_identity_err = budget(&F::k_gauss) + budget(&F::k_L) + 2.0 * budget(&F::fisher_L);
    r.k_identity_resolved = !r.finite.k_gauss || std::abs(r.k_identity) <= 10.0 * r.k_identity_err;
    return r;
}

PinskerReport pinsker_check(const GridDensity& d) {
    const Parts D = rel_entropy_parts(d);
    const Grid& g = d.grid();
    const auto f = d.values();
    const double c = 1.0 / std::sqrt(2.0 * std::numbers::pi);
    std::vector<double> diff(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double x = g.node(i);
        diff[i] = std::abs(f[i] - c * std::exp(-0.5 * x * x));
    }
    const Estimate inside = integrate(g, diff, d.kinks());
    // Gaussian mass outside the grid, where f vanishes
    const double outside = 0.5 * std::erfc(-g.front() / std::numbers::sqrt2) +
                           0.5 * std::erfc(g.back() / std::numbers::sqrt2);
    PinskerReport r;
    r.l1 = inside.value + outside;
    r.lhs = r.l1 * r.l1;
    r.rhs_standard = 2.0 * D.value.value;
    r.rhs_half = 0.5 * D.value.value;
    r.err = 2.0 * r.l1 * (inside.err + d.tail_mass_bound()) + 2.0 * (D.value.err + D.trunc);
    r.standard_holds = r.lhs <= r.rhs_standard + 10.0 * r.err;
    r.half_holds = r.lhs <= r.rhs_half + 10.0 * r.err;
    return r;
}

} // namespace entlab
