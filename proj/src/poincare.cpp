#include "entlab/poincare.hpp"

#include "entlab/error.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace entlab {

namespace {

// Weighted forms restricted to the contiguous block of trusted nodes:
// edge weights e_i ~ int_{x_i}^{x_{i+1}} f / h^2 and lumped masses m_i.
struct Forms {
    std::size_t first = 0;
    std::vector<double> edge;
    std::vector<double> mass;
};

Forms forms_of(const GridDensity& d) {
    const auto f = d.values();
    const double floor = tol::density_floor * d.max_value();
    std::size_t lo = 0;
    std::size_t hi = f.size() - 1;
    while (lo < hi && !(f[lo] >= floor && f[lo] > 0.0)) ++lo;
    while (hi > lo && !(f[hi] >= floor && f[hi] > 0.0)) --hi;
    if (hi - lo + 1 < Grid::min_count) throw NumericalError("too few trusted nodes for the Poincare estimate");
    const double h = d.grid().spacing();
    Forms out;
    out.first = lo;
    const std::size_t n = hi - lo + 1;
    out.mass.resize(n);
    out.edge.resize(n - 1);
    for (std::size_t j = 0; j < n; ++j) {
        const double w = (j == 0 || j + 1 == n) ? 0.5 * h : h;
        out.mass[j] = w * f[lo + j];
    }
    for (std::size_t j = 0; j + 1 < n; ++j) out.edge[j] = 0.5 * (f[lo + j] + f[lo + j + 1]) / h;
    return out;
}

struct Gap {
    double gap;
    double residual;
};

Gap spectral_gap(const GridDensity& d) {
    const Forms F = forms_of(d);
    const std::size_t n = F.mass.size();
    // T = M^{-1/2} S M^{-1/2}
    std::vector<double> diag(n, 0.0);
    std::vector<double> off(n - 1);
    for (std::size_t j = 0; j + 1 < n; ++j) {
        diag[j] += F.edge[j] / F.mass[j];
        diag[j + 1] += F.edge[j] / F.mass[j + 1];
        off[j] = -F.edge[j] / std::sqrt(F.mass[j] * F.mass[j + 1]);
    }
    double norm = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        double row = std::abs(diag[j]);
        if (j > 0) row += std::abs(off[j - 1]);
        if (j + 1 < n) row += std::abs(off[j]);
        norm = std::max(norm, row);
    }

    std::vector<double> dwork = diag;
    std::vector<double> ework(off);
    ework.push_back(0.0);
    std::vector<double> w(n);
    std::vector<double> z(2 * n);
    std::vector<lapack_int> support(4);
    lapack_int found = 0;
    const lapack_int N = static_cast<lapack_int>(n);
    const lapack_int info = LAPACKE_dstevr(LAPACK_COL_MAJOR, 'V', 'I', N, dwork.data(), ework.data(),
                                           0.0, 0.0, 1, 2, 0.0, &found, w.data(), z.data(), N,
                                           support.data());
    if (info != 0 || found != 2) {
        std::ostringstream os;
        os << "tridiagonal eigensolve failed (info " << info << ", found " << found << ")";
        throw NumericalError(os.str());
    }
    const double mu = w[1];
    const double* y = z.data() + n;
    double res = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        double ty = diag[j] * y[j];
        if (j > 0) ty += off[j - 1] * y[j - 1];
        if (j + 1 < n) ty += off[j] * y[j + 1];
        res = std::max(res, std::abs(ty - mu * y[j]));
    }
    res /= norm;
    if (!(mu > 0.0)) {
        std::ostringstream os;
        os << "no positive spectral gap for '" << d.label() << "' (mu " << mu << ", residual "
           << res << ")";
        throw NumericalError(os.str());
    }
    return {mu, res};
}

} // namespace

PoincareEstimate poincare_constant(const GridDensity& d, bool with_refinement) {
    PoincareEstimate est;
    if (!d.log_concave() || !check_log_concave(potential_of(d)).log_concave)
        est.warnings.push_back("density is not log-concave; the spectral gap may be tiny");
    const Gap g = spectral_gap(d);
    est.gap = g.gap;
    est.c = 1.0 / g.gap;
    est.residual = g.residual;
    if (with_refinement) {
        const Gap fine = spectral_gap(refine(d));
        est.refinement_ratio = (1.0 / fine.gap) / est.c;
    }
    return est;
}

double rayleigh_quotient(const GridDensity& d, std::span<const double> g) {
    if (g.size() != d.grid().count()) throw DomainError("test function does not match the grid");
    const Forms F = forms_of(d);
    const std::size_t n = F.mass.size();
    double total = 0.0;
    double mean = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        total += F.mass[j];
        mean += F.mass[j] * g[F.first + j];
    }
    mean /= total;
    double var = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        const double c = g[F.first + j] - mean;
        var += F.mass[j] * c * c;
    }
    double dirichlet = 0.0;
    for (std::size_t j = 0; j + 1 < n; ++j) {
        const double dg = g[F.first + j + 1] - g[F.first + j];
        dirichlet += F.edge[j] * dg * dg;
    }
    if (!(var > 0.0)) throw DomainError("test function is constant on the support");
    return dirichlet / var;
}

MixtureBound mixture_bound_check(const GridDensity& dx, const GridDensity& dy, double lambda,
                                 const ConvolutionOptions& options) {
    MixtureBound r;
    r.c_x = poincare_constant(dx, false).c;
    r.c_y = poincare_constant(dy, false).c;
    // sqrt(lambda) X + sqrt(1 - lambda) Y
    r.c_mix = poincare_constant(rescaled_convolve(dy, dx, lambda, options), false).c;
    r.margin = lambda * r.c_x + (1.0 - lambda) * r.c_y - r.c_mix;
    return r;
}

DecayReport ou_decay_check(const GridDensity& d, std::span<const double> t_grid,
                           const ConvolutionOptions& options) {
    DecayReport r;
    r.c0 = poincare_constant(d, false).c;
    r.worst_margin = std::numeric_limits<double>::infinity();
    for (double t : t_grid) {
        DecayPoint p;
        p.t = t;
        p.c_t = poincare_constant(ou_evolve(d, t, options), false).c;
        const double e = std::exp(-2.0 * t);
        p.monotone_margin = r.c0 - p.c_t;
        p.sharp_margin = e * r.c0 + (1.0 - e) - p.c_t;
        r.worst_margin = std::min({r.worst_margin, p.monotone_margin, p.sharp_margin});
        r.points.push_back(p);
    }
    return r;
}

} // namespace entlab
