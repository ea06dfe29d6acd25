#include "entlab/deficits.hpp"

#include "entlab/error.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace entlab {

namespace {

constexpr double nan = std::numeric_limits<double>::quiet_NaN();

// Relative accuracy of convolution output values and jets (observed sup
// errors are near 1e-10 of the peak).
constexpr double jet_accuracy = 1e-9;

using F = FunctionalReport::Fields<double>;

double budget(const FunctionalReport& r, double F::*field) { return r.err.*field + r.trunc.*field; }

double poincare_c(const GridDensity& d) { return poincare_constant(d, false).c; }

// Expectation weights p_i = w_i f_i on trusted nodes, normalized to 1.
std::vector<double> expectation_weights(const GridDensity& d, const std::vector<bool>& valid) {
    const auto f = d.values();
    const auto w = quadrature_weights(f.size(), d.grid().spacing(), d.kinks());
    std::vector<double> p(f.size(), 0.0);
    double total = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i)
        if (valid[i]) {
            p[i] = w[i] * f[i];
            total += p[i];
        }
    for (auto& v : p) v /= total;
    return p;
}

// E[g(X)] with g given per node over trusted nodes.
Estimate expect(const GridDensity& d, const std::vector<bool>& valid, const std::vector<double>& g) {
    const auto f = d.values();
    std::vector<double> integrand(f.size(), 0.0);
    for (std::size_t i = 0; i < f.size(); ++i)
        if (valid[i]) integrand[i] = f[i] * g[i];
    return integrate(d.grid(), integrand, d.kinks());
}

// Floor for comparisons of quantities that agree exactly (Gaussian inputs).
double roundoff(double lhs, double rhs) {
    return 1e-12 * std::max({1.0, std::abs(lhs), std::abs(rhs)});
}

std::string pair_subject(const GridDensity& d0, const GridDensity& d1, double lambda) {
    std::ostringstream os;
    os << d0.label() << " | " << d1.label() << " | lambda=" << lambda;
    return os.str();
}

std::string at(const char* what, double v) {
    std::ostringstream os;
    os << what << v;
    return os.str();
}

void require_interior(double lambda, const char* what) {
    if (!(lambda > 0.0 && lambda < 1.0))
        throw DomainError(std::string(what) + ": lambda must lie strictly inside (0, 1)");
}

} // namespace

std::string_view to_string(DeficitKind kind) {
    return kind == DeficitKind::entropy ? "entropy" : "information";
}

std::string_view to_string(LemmaId id) {
    switch (id) {
    case LemmaId::conditional_hessian: return "conditional_hessian";
    case LemmaId::klebesgue: return "klebesgue";
    case LemmaId::lemma_l: return "lemma_l";
    case LemmaId::lemma_l2: return "lemma_l2";
    case LemmaId::debruijn: return "debruijn";
    case LemmaId::last_lemma: return "last_lemma";
    case LemmaId::flow_integral: return "flow_integral";
    case LemmaId::bbn: return "bbn";
    }
    return "?";
}

void LemmaReport::inequality(std::string name, double lhs, double rhs, double err, bool asserted) {
    LemmaCheck c{std::move(name), lhs, rhs, lhs - rhs, 10.0 * err + roundoff(lhs, rhs), asserted, true};
    c.pass = c.margin >= -c.tolerance;
    if (asserted) {
        worst_margin = checks.empty() ? c.margin : std::min(worst_margin, c.margin);
        pass = pass && c.pass;
    }
    checks.push_back(std::move(c));
}

void LemmaReport::equality(std::string name, double lhs, double rhs, double tolerance,
                           bool asserted) {
    LemmaCheck c{std::move(name), lhs, rhs, -std::abs(lhs - rhs), tolerance, asserted, true};
    c.pass = c.margin >= -c.tolerance;
    if (asserted) {
        worst_margin = checks.empty() ? c.margin : std::min(worst_margin, c.margin);
        pass = pass && c.pass;
    }
    checks.push_back(std::move(c));
}

bool log_concave_isotropic(const GridDensity& d) {
    return d.log_concave() && check_log_concave(potential_of(d)).log_concave && is_isotropic(d);
}

DeficitReport entropy_deficit(const GridDensity& d0, const GridDensity& d1, double lambda,
                              const DeficitOptions& options) {
    const GridDensity x = rescaled_convolve(d0, d1, lambda, options.convolution);
    const FunctionalReport r0 = compute_functionals(d0);
    const FunctionalReport r1 = compute_functionals(d1);
    const FunctionalReport rl = compute_functionals(x);
    DeficitReport out;
    out.kind = DeficitKind::entropy;
    out.lambda = lambda;
    out.deficit = rl.ent_L - (1.0 - lambda) * r0.ent_L - lambda * r1.ent_L;
    out.err = budget(rl, &F::ent_L) + (1.0 - lambda) * budget(r0, &F::ent_L) +
              lambda * budget(r1, &F::ent_L);
    out.c0 = poincare_c(d0);
    out.c1 = poincare_c(d1);
    if (r0.finite.rel_entropy && r1.finite.rel_entropy) {
        const double k = lambda * (1.0 - lambda) / (4.0 * std::max(out.c0, out.c1));
        out.bound = k * (r0.rel_entropy + r1.rel_entropy);
        out.err += k * (budget(r0, &F::rel_entropy) + budget(r1, &F::rel_entropy));
    } else {
        out.bound = nan;
    }
    out.margin = out.deficit - out.bound;
    out.bound_asserted = std::isfinite(out.bound) && log_concave_isotropic(d0) && log_concave_isotropic(d1);
    out.deficit_ok = out.deficit >= -out.err;
    out.bound_ok = !out.bound_asserted || out.margin >= -10.0 * out.err;
    return out;
}

DeficitReport info_deficit(const GridDensity& d0_in, const GridDensity& d1_in, double lambda,
                           const DeficitOptions& options) {
    const bool smooth0 = d0_in.capability().fisher;
    const bool smooth1 = d1_in.capability().fisher;
    const GridDensity d0 = smooth0 ? d0_in : ou_evolve(d0_in, options.smoothing_time, options.convolution);
    const GridDensity d1 = smooth1 ? d1_in : ou_evolve(d1_in, options.smoothing_time, options.convolution);
    const GridDensity x = rescaled_convolve(d0, d1, lambda, options.convolution);
    require_capability(x, "fisher");
    const FunctionalReport r0 = compute_functionals(d0);
    const FunctionalReport r1 = compute_functionals(d1);
    const FunctionalReport rl = compute_functionals(x);
    DeficitReport out;
    out.kind = DeficitKind::information;
    out.lambda = lambda;
    out.smoothing_time = (smooth0 && smooth1) ? 0.0 : options.smoothing_time;
    out.deficit = (1.0 - lambda) * r0.fisher_L + lambda * r1.fisher_L - rl.fisher_L;
    out.err = budget(rl, &F::fisher_L) + (1.0 - lambda) * budget(r0, &F::fisher_L) +
              lambda * budget(r1, &F::fisher_L);
    out.c0 = poincare_c(d0);
    out.c1 = poincare_c(d1);
    if (r0.finite.rel_fisher && r1.finite.rel_fisher) {
        const double k = lambda * (1.0 - lambda) / (4.0 * std::max(out.c0, out.c1));
        out.bound = k * (r0.rel_fisher + r1.rel_fisher);
        out.err += k * (budget(r0, &F::rel_fisher) + budget(r1, &F::rel_fisher));
    } else {
        out.bound = nan;
    }
    out.margin = out.deficit - out.bound;
    out.bound_asserted = std::isfinite(out.bound) && log_concave_isotropic(d0) && log_concave_isotropic(d1);
    out.deficit_ok = out.deficit >= -out.err;
    out.bound_ok = !out.bound_asserted || out.margin >= -10.0 * out.err;
    return out;
}

LemmaReport lemma_conditional_hessian(const GridDensity& d0, const GridDensity& d1, double lambda,
                                      std::span<const double> z_nodes,
                                      const DeficitOptions& options) {
    require_interior(lambda, "lemma_conditional_hessian");
    if (!d0.capability().smooth || !d1.capability().smooth)
        throw CapabilityError("lemma_conditional_hessian needs smooth inputs (psi'' must exist)");
    const double a = std::sqrt(1.0 - lambda);
    const double b = std::sqrt(lambda);
    const GridDensity x = rescaled_convolve(d0, d1, lambda, options.convolution);
    const DensityEvaluator evx(x);

    // trusted band of z: the [1e-6, 1 - 1e-6] quantiles of X_lambda
    const auto cum = cumulative_trapezoid(x.grid(), x.values());
    auto quantile = [&](double q) {
        const double target = q * cum.back();
        const auto it = std::lower_bound(cum.begin(), cum.end(), target);
        return x.grid().node(static_cast<std::size_t>(std::min<std::ptrdiff_t>(
            it - cum.begin(), static_cast<std::ptrdiff_t>(cum.size() - 1))));
    };
    const double zlo = quantile(1e-6);
    const double zhi = quantile(1.0 - 1e-6);

    // integrate over the variable whose conditional factor is better resolved
    const bool over_x0 = d0.grid().spacing() * a / b <= d1.grid().spacing() * b / a;
    const GridDensity& base = over_x0 ? d0 : d1;
    const GridDensity& other = over_x0 ? d1 : d0;
    const double ca = over_x0 ? a : b; // coefficient of the base variable
    const double cb = over_x0 ? b : a;
    const double wb = over_x0 ? 1.0 - lambda : lambda;
    const double wo = over_x0 ? lambda : 1.0 - lambda;
    const Potential pb = potential_of(base);
    const DensityEvaluator evo(other);
    const auto fb = base.values();
    const std::size_t n = fb.size();

    LemmaReport rep;
    rep.id = LemmaId::conditional_hessian;
    rep.subject = pair_subject(d0, d1, lambda);
    std::vector<double> num(n);
    std::vector<double> den(n);
    for (double z : z_nodes) {
        for (std::size_t i = 0; i < n; ++i) {
            num[i] = den[i] = 0.0;
            if (!pb.valid_mask[i]) continue;
            const double y = (z - ca * base.grid().node(i)) / cb;
            const double fo = evo.value(y);
            if (!(fo > 0.0)) continue;
            const double p2o = evo.psi2(y);
            if (!std::isfinite(p2o)) continue;
            den[i] = fb[i] * fo;
            num[i] = den[i] * (wb * pb.psi2[i] + wo * p2o);
        }
        const Estimate N = integrate(base.grid(), num, base.kinks());
        const Estimate D = integrate(base.grid(), den, base.kinks());
        const bool trusted = z >= zlo && z <= zhi && D.value > 0.0;
        const double rhs = D.value > 0.0 ? N.value / D.value : nan;
        const double lhs = evx.psi2(z);
        double err = D.value > 0.0 ? (N.err + std::abs(rhs) * D.err) / D.value : 0.0;
        // the convolved jets carry an absolute error of order jet_accuracy * max f,
        // which psi'' divides by powers of f(z)
        const Jet j = evx.jet(z);
        if (j.f > 0.0) {
            const double delta = jet_accuracy * x.max_value();
            const double r1 = std::abs(j.d1) / j.f;
            err += delta / j.f * (1.0 + 2.0 * r1 + 2.0 * r1 * r1 + std::abs(j.d2) / j.f);
        }
        // inequality reads rhs >= lhs
        rep.inequality(at("z=", z), rhs, lhs, err + 1e-9 * (1.0 + std::abs(lhs)),
                       trusted && std::isfinite(lhs) && std::isfinite(rhs));
    }
    return rep;
}

LemmaReport lemma_klebesgue(const GridDensity& d0, const GridDensity& d1, double lambda,
                            const DeficitOptions& options) {
    require_capability(d0, "k");
    require_capability(d1, "k");
    const GridDensity x = rescaled_convolve(d0, d1, lambda, options.convolution);
    const FunctionalReport r0 = compute_functionals(d0);
    const FunctionalReport r1 = compute_functionals(d1);
    const FunctionalReport rl = compute_functionals(x);
    const Potential p0 = potential_of(d0);
    const Potential p1 = potential_of(d1);
    const Estimate eb = expect(d0, p0.valid_mask, p0.psi2);
    const Estimate ea = expect(d1, p1.valid_mask, p1.psi2);

    const double l = lambda * (1.0 - lambda);
    const double lhs = (1.0 - lambda) * r0.k_L + lambda * r1.k_L - rl.k_L;
    const double expansion = r1.k_L - 2.0 * ea.value * eb.value + r0.k_L;
    const double rhs = l * expansion;
    const double err = (1.0 - lambda) * budget(r0, &F::k_L) + lambda * budget(r1, &F::k_L) +
                       budget(rl, &F::k_L) +
                       l * (budget(r0, &F::k_L) + budget(r1, &F::k_L) +
                            2.0 * (std::abs(ea.value) * eb.err + std::abs(eb.value) * ea.err));

    // the same expectation by the 2-D product quadrature
    const auto q0 = expectation_weights(d0, p0.valid_mask);
    const auto q1 = expectation_weights(d1, p1.valid_mask);
    const double direct = kernels::pair_expectation(
        options.convolution.policy, q0, q1, [&](std::size_t i, std::size_t j) {
            const double diff = p1.psi2[j] - p0.psi2[i];
            return diff * diff;
        });
    const double e_a2 = kernels::pair_expectation_serial(
        std::span<const double>(q0), std::span<const double>(q1),
        [&](std::size_t, std::size_t j) { return p1.psi2[j] * p1.psi2[j]; });
    (void)e_a2;

    LemmaReport rep;
    rep.id = LemmaId::klebesgue;
    rep.subject = pair_subject(d0, d1, lambda);
    rep.inequality("K_L deficit >= l(1-l) E[(psi1''-psi0'')^2]", lhs, rhs, err);
    rep.equality("expansion = product quadrature", expansion, direct,
                 10.0 * (budget(r0, &F::k_L) + budget(r1, &F::k_L)) + 1e-10 * (1.0 + expansion));
    return rep;
}

LemmaReport lemma_l_and_l2(const GridDensity& d0, const GridDensity& d1, double lambda,
                           const DeficitOptions& options) {
    require_capability(d0, "k");
    require_capability(d1, "k");
    if (!is_isotropic(d0) || !is_isotropic(d1))
        throw DomainError("lemma_l_and_l2 needs isotropic inputs");
    const GridDensity x = rescaled_convolve(d0, d1, lambda, options.convolution);
    const FunctionalReport r0 = compute_functionals(d0);
    const FunctionalReport r1 = compute_functionals(d1);
    const FunctionalReport rl = compute_functionals(x);
    const double c0 = poincare_c(d0);
    const double c1 = poincare_c(d1);
    const Potential p0 = potential_of(d0);
    const Potential p1 = potential_of(d1);
    const std::size_t n0 = p0.psi.size();
    const std::size_t n1 = p1.psi.size();

    // Gaussian-reference derivatives phi = psi - x^2/2
    std::vector<double> phi1_0(n0), phi2_0(n0), phi1_1(n1), phi2_1(n1);
    for (std::size_t i = 0; i < n0; ++i) {
        phi1_0[i] = p0.psi1[i] - d0.grid().node(i);
        phi2_0[i] = p0.psi2[i] - 1.0;
    }
    for (std::size_t j = 0; j < n1; ++j) {
        phi1_1[j] = p1.psi1[j] - d1.grid().node(j);
        phi2_1[j] = p1.psi2[j] - 1.0;
    }
    const Estimate e0 = expect(d0, p0.valid_mask, phi2_0);
    const Estimate e1 = expect(d1, p1.valid_mask, phi2_1);

    const double l = lambda * (1.0 - lambda);
    const double lhs = (1.0 - lambda) * r0.m_gauss + lambda * r1.m_gauss - rl.m_gauss;
    const double expansion = r1.k_gauss - 2.0 * e1.value * e0.value + r0.k_gauss;
    const double rhs_l = l * expansion;
    const double c = std::max(c0, c1);
    const double sum = r0.rel_fisher + r0.k_gauss + r1.rel_fisher + r1.k_gauss;
    const double rhs_l2 = l / (2.0 * c) * sum;

    const double m_err = (1.0 - lambda) * budget(r0, &F::m_gauss) +
                         lambda * budget(r1, &F::m_gauss) + budget(rl, &F::m_gauss);
    const double k_err = budget(r0, &F::k_gauss) + budget(r1, &F::k_gauss) +
                         2.0 * (std::abs(e1.value) * e0.err + std::abs(e0.value) * e1.err);
    const double sum_err = budget(r0, &F::rel_fisher) + budget(r0, &F::k_gauss) +
                           budget(r1, &F::rel_fisher) + budget(r1, &F::k_gauss);

    // E[(phi_0'(X0) - phi_1''(X1) X0)^2] = I0 + K1 and the mirror identity
    const auto q0 = expectation_weights(d0, p0.valid_mask);
    const auto q1 = expectation_weights(d1, p1.valid_mask);
    const auto policy = options.convolution.policy;
    const double step01 = kernels::pair_expectation(policy, q0, q1, [&](std::size_t i, std::size_t j) {
        const double v = phi1_0[i] - phi2_1[j] * d0.grid().node(i);
        return v * v;
    });
    const double step10 = kernels::pair_expectation(policy, q0, q1, [&](std::size_t i, std::size_t j) {
        const double v = phi1_1[j] - phi2_0[i] * d1.grid().node(j);
        return v * v;
    });
    const double id01 = r0.rel_fisher + r1.k_gauss;
    const double id10 = r1.rel_fisher + r0.k_gauss;
    // the identities use E[phi'] = 0 and E[phi' X] = 0, which hold up to the
    // isotropy tolerance
    const double tol01 = 10.0 * (budget(r0, &F::rel_fisher) + budget(r1, &F::k_gauss) +
                                 (r1.k_gauss + 2.0 * std::abs(e1.value)) * tol::moment);
    const double tol10 = 10.0 * (budget(r1, &F::rel_fisher) + budget(r0, &F::k_gauss) +
                                 (r0.k_gauss + 2.0 * std::abs(e0.value)) * tol::moment);

    LemmaReport rep;
    rep.id = LemmaId::lemma_l;
    rep.subject = pair_subject(d0, d1, lambda);
    rep.inequality("M deficit >= l(1-l) E[(phi1''-phi0'')^2]", lhs, rhs_l, m_err + l * k_err);
    rep.inequality("M deficit >= l(1-l)/(2c) (I0+K0+I1+K1)", lhs, rhs_l2, m_err + l / (2.0 * c) * sum_err);
    rep.inequality("exact rhs >= Poincare rhs", rhs_l, rhs_l2, l * k_err + l / (2.0 * c) * sum_err);
    rep.equality("E[(phi0'-phi1'' X0)^2] = I0 + K1", step01, id01, tol01);
    rep.equality("E[(phi1'-phi0'' X1)^2] = I1 + K0", step10, id10, tol10);
    rep.inequality("E[(phi0''-phi1'')^2] >= (I0 + K1)/c0", expansion, id01 / c0, k_err + tol01 / 10.0 / c0);
    rep.inequality("E[(phi0''-phi1'')^2] >= (I1 + K0)/c1", expansion, id10 / c1, k_err + tol10 / 10.0 / c1);
    return rep;
}

namespace {

struct FlowState {
    FunctionalReport r;
};

FunctionalReport at_time(const GridDensity& d, double t, const ConvolutionOptions& conv) {
    return compute_functionals(ou_evolve(d, t, conv));
}

} // namespace

DebruijnReport debruijn_check(const GridDensity& d, std::span<const double> t_grid, double h,
                              const DeficitOptions& options) {
    if (!is_isotropic(d)) throw DomainError("debruijn_check needs an isotropic density");
    if (!(h > 0.0)) throw DomainError("debruijn_check step must be > 0");
    ConvolutionOptions conv = options.convolution;
    conv.coverage = std::min(conv.coverage, options.derivative_coverage);
    DebruijnReport out;
    out.lemma.id = LemmaId::debruijn;
    out.lemma.subject = d.label();
    // Lebesgue forms: dEnt/dt = I_L - 1 and dI_L/dt = 2 I_L - 2 K_L hold along
    // the flow whatever the variance, so the small variance loss from tail
    // truncation does not bias the comparison. For an isotropic law I_L - 1,
    // K_L - 2 I_L + 1 and K_L - 1 are the relative I, K and M.
    auto info_of = [](const FunctionalReport& r) { return r.fisher_L - 1.0; };
    const bool info0_finite = d.capability().fisher;
    const double info0 = info0_finite ? info_of(compute_functionals(d)) : nan;

    for (double t : t_grid) {
        if (!(t >= h)) throw DomainError("debruijn_check needs t >= h (t = 0 is excluded)");
        DebruijnPoint p;
        p.t = t;
        const FunctionalReport rc = at_time(d, t, conv);
        p.info = info_of(rc);
        p.k = rc.k_L - 2.0 * rc.fisher_L + 1.0;
        p.m = rc.k_L - 1.0;
        double noise_ent[2];
        double noise_info[2];
        for (int s = 0; s < 2; ++s) {
            const double step = s == 0 ? h : 0.5 * h;
            const FunctionalReport rp = at_time(d, t + step, conv);
            const FunctionalReport rm = at_time(d, t - step, conv);
            p.dent[s] = (rp.ent_L - rm.ent_L) / (2.0 * step);
            p.dinfo[s] = (info_of(rp) - info_of(rm)) / (2.0 * step);
            p.dexp[s] = std::exp(2.0 * t) *
                        (std::exp(-2.0 * (t + step)) * info_of(rp) -
                         std::exp(-2.0 * (t - step)) * info_of(rm)) /
                        (2.0 * step);
            // truncation bias moves smoothly with t and cancels in the
            // difference; only the quadrature error is noise here
            noise_ent[s] = (rp.err.ent_L + rm.err.ent_L) / (2.0 * step);
            noise_info[s] = (rp.err.fisher_L + rm.err.fisher_L) / (2.0 * step);
        }
        const double dinfo_exact = -2.0 * p.info - 2.0 * p.k;
        const double dexp_exact = -2.0 * p.m;
        const double ent_mis[2] = {p.dent[0] - p.info, p.dent[1] - p.info};
        const double info_mis[2] = {p.dinfo[0] - dinfo_exact, p.dinfo[1] - dinfo_exact};
        p.ent_ratio = ent_mis[0] / ent_mis[1];
        p.info_ratio = info_mis[0] / info_mis[1];
        p.decay_rhs = info0_finite ? std::exp(-2.0 * t) * info0 : nan;
        out.points.push_back(p);

        // the step-h/2 difference is within |D_h - D_h/2| / 3 of the
        // derivative; allow that Richardson estimate twice over plus noise
        const double fd_ent = 2.0 * std::abs(p.dent[0] - p.dent[1]) / 3.0;
        const double fd_info = 2.0 * std::abs(p.dinfo[0] - p.dinfo[1]) / 3.0;
        const double fd_exp = 2.0 * std::abs(p.dexp[0] - p.dexp[1]) / 3.0;
        const double i_budget = budget(rc, &F::fisher_L);
        const double k_budget = budget(rc, &F::k_L);
        auto& rep = out.lemma;
        rep.equality(at("dEnt/dt = I at t=", t), p.dent[1], p.info,
                     fd_ent + noise_ent[1] + 10.0 * i_budget);
        rep.equality(at("dI/dt = -2I - 2K at t=", t), p.dinfo[1], dinfo_exact,
                     fd_info + noise_info[1] + 20.0 * (i_budget + k_budget));
        rep.equality(at("exp(2t) d/dt(exp(-2t) I) = -2M at t=", t), p.dexp[1], dexp_exact,
                     fd_exp + noise_info[1] + 20.0 * (i_budget + k_budget));
        // second order is visible only when the step-h mismatch clears the noise
        const bool ent_resolved = std::abs(ent_mis[0]) > 100.0 * (noise_ent[1] + rc.err.fisher_L);
        const bool info_resolved =
            std::abs(info_mis[0]) > 100.0 * (noise_info[1] + rc.err.fisher_L + rc.err.k_L);
        rep.inequality(at("entropy mismatch ratio >= 3.5 at t=", t), p.ent_ratio, 3.5, 0.0, ent_resolved);
        rep.inequality(at("entropy mismatch ratio <= 4.5 at t=", t), 4.5, p.ent_ratio, 0.0, ent_resolved);
        rep.inequality(at("info mismatch ratio >= 3.5 at t=", t), p.info_ratio, 3.5, 0.0, info_resolved);
        rep.inequality(at("info mismatch ratio <= 4.5 at t=", t), 4.5, p.info_ratio, 0.0, info_resolved);
        rep.inequality(at("I(X_t) <= exp(-2t) I(X_0) at t=", t), p.decay_rhs, p.info, i_budget,
                       info0_finite);
    }
    return out;
}

LemmaReport last_lemma_check(const GridDensity& d0, const GridDensity& d1, double lambda,
                             std::span<const double> t_grid, double h,
                             const DeficitOptions& options) {
    require_interior(lambda, "last_lemma_check");
    const auto& conv = options.convolution;
    const GridDensity x = rescaled_convolve(d0, d1, lambda, conv);
    const double c = std::max(poincare_c(d0), poincare_c(d1));
    const double l = lambda * (1.0 - lambda);

    struct Values {
        double g;   // exp(-2t) delta_I(t)
        double s;   // I0 + I1
        double err; // budget of g
        double serr;
    };
    auto values = [&](double t) {
        const FunctionalReport a = at_time(d0, t, conv);
        const FunctionalReport b = at_time(d1, t, conv);
        const FunctionalReport m = at_time(x, t, conv);
        const double e = std::exp(-2.0 * t);
        Values v;
        v.g = e * ((1.0 - lambda) * a.rel_fisher + lambda * b.rel_fisher - m.rel_fisher);
        v.s = a.rel_fisher + b.rel_fisher;
        v.err = e * ((1.0 - lambda) * budget(a, &F::rel_fisher) + lambda * budget(b, &F::rel_fisher) +
                     budget(m, &F::rel_fisher));
        v.serr = budget(a, &F::rel_fisher) + budget(b, &F::rel_fisher);
        return v;
    };

    LemmaReport rep;
    rep.id = LemmaId::last_lemma;
    rep.subject = pair_subject(d0, d1, lambda);
    for (double t : t_grid) {
        if (!(t >= h)) throw DomainError("last_lemma_check needs t >= h");
        double dg[2];
        double ds[2];
        double noise = 0.0;
        for (int s = 0; s < 2; ++s) {
            const double step = s == 0 ? h : 0.5 * h;
            const Values p = values(t + step);
            const Values m = values(t - step);
            dg[s] = (p.g - m.g) / (2.0 * step);
            ds[s] = (p.s - m.s) / (2.0 * step);
            if (s == 1) noise = (p.err + m.err) / (2.0 * step) + l / (2.0 * c) * std::exp(-2.0 * t) * (p.serr + m.serr) / (2.0 * step);
        }
        const double lhs = -dg[1];
        const double rhs = -l / (2.0 * c) * std::exp(-2.0 * t) * ds[1];
        const double fd = std::abs(dg[0] - dg[1]) / 3.0 + l / (2.0 * c) * std::exp(-2.0 * t) * std::abs(ds[0] - ds[1]) / 3.0;
        rep.inequality(at("t=", t), lhs, rhs, fd + noise);
    }
    return rep;
}

FlowIntegral flow_integral_check(const GridDensity& d0, const GridDensity& d1, double lambda,
                                 const DeficitOptions& options) {
    require_interior(lambda, "flow_integral_check");
    require_capability(d0, "fisher");
    require_capability(d1, "fisher");
    const auto& conv = options.convolution;
    const GridDensity x = rescaled_convolve(d0, d1, lambda, conv);
    const double c = std::max(poincare_c(d0), poincare_c(d1));
    const double kb = lambda * (1.0 - lambda) / (4.0 * c);

    FlowIntegral out;
    const double T = out.t_max;
    const FunctionalReport a0 = compute_functionals(d0);
    const FunctionalReport b0 = compute_functionals(d1);
    const FunctionalReport m0 = compute_functionals(x);
    out.info_deficit = (1.0 - lambda) * a0.rel_fisher + lambda * b0.rel_fisher - m0.rel_fisher;
    out.entropy_deficit = m0.ent_L - (1.0 - lambda) * a0.ent_L - lambda * b0.ent_L;
    out.entropy_bound = kb * (a0.rel_entropy + b0.rel_entropy);
    out.info_tail_bound = std::exp(-2.0 * T) * out.info_deficit;

    struct Integrands {
        double info;  // 2 exp(-2t) [(1-l) M0 + l M1 - M_l]
        double ent;   // delta_I(t)
        double bound; // kb (I0 + I1)(t)
        double info_err;
        double ent_err;
        double bound_err;
    };
    auto integrands = [&](double t) {
        const FunctionalReport a = at_time(d0, t, conv);
        const FunctionalReport b = at_time(d1, t, conv);
        const FunctionalReport m = at_time(x, t, conv);
        const double e = 2.0 * std::exp(-2.0 * t);
        return Integrands{
            e * ((1.0 - lambda) * a.m_gauss + lambda * b.m_gauss - m.m_gauss),
            (1.0 - lambda) * a.rel_fisher + lambda * b.rel_fisher - m.rel_fisher,
            kb * (a.rel_fisher + b.rel_fisher),
            e * ((1.0 - lambda) * budget(a, &F::m_gauss) + lambda * budget(b, &F::m_gauss) +
                 budget(m, &F::m_gauss)),
            (1.0 - lambda) * budget(a, &F::rel_fisher) + lambda * budget(b, &F::rel_fisher) +
                budget(m, &F::rel_fisher),
            kb * (budget(a, &F::rel_fisher) + budget(b, &F::rel_fisher))};
    };

    // graded panels: the integrands vary on the scale of t near 0
    static constexpr double panels[] = {0.0, 1e-3, 4e-3, 0.015, 0.05, 0.15, 0.35, 0.7,
                                        1.2, 2.0,  3.5,  6.0,   10.0};
    using rule = boost::math::quadrature::gauss<double, 8>;
    const auto& xs = rule::abscissa();
    const auto& ws = rule::weights();
    Integrands sum{0.0, 0.0, 0.0, 0.0, 0.0, 0.0};
    for (std::size_t k = 0; k + 1 < std::size(panels); ++k) {
        const double mid = 0.5 * (panels[k] + panels[k + 1]);
        const double half = 0.5 * (panels[k + 1] - panels[k]);
        for (std::size_t j = 0; j < xs.size(); ++j) {
            for (double sgn : {-1.0, 1.0}) {
                if (xs[j] == 0.0 && sgn > 0.0) continue;
                const Integrands v = integrands(mid + sgn * half * xs[j]);
                sum.info += half * ws[j] * v.info;
                sum.ent += half * ws[j] * v.ent;
                sum.bound += half * ws[j] * v.bound;
                sum.info_err += half * ws[j] * v.info_err;
                sum.ent_err += half * ws[j] * v.ent_err;
                sum.bound_err += half * ws[j] * v.bound_err;
            }
        }
    }
    // exact tails at T: the integrands are derivatives of these quantities
    const FunctionalReport aT = at_time(d0, T, conv);
    const FunctionalReport bT = at_time(d1, T, conv);
    const FunctionalReport mT = at_time(x, T, conv);
    out.info_from_lemma = sum.info + std::exp(-2.0 * T) * ((1.0 - lambda) * aT.rel_fisher +
                                                           lambda * bT.rel_fisher - mT.rel_fisher);
    out.entropy_from_flow = sum.ent + (mT.ent_L - (1.0 - lambda) * aT.ent_L - lambda * bT.ent_L);
    out.entropy_bound_from_flow = sum.bound + kb * (aT.rel_entropy + bT.rel_entropy);

    // 1% relative, with an absolute floor of 10x the quadrature budget for
    // deficits that vanish (Gaussian pairs)
    auto ent_err = [&](const FunctionalReport& a, const FunctionalReport& b, const FunctionalReport& m) {
        return (1.0 - lambda) * budget(a, &F::ent_L) + lambda * budget(b, &F::ent_L) + budget(m, &F::ent_L);
    };
    auto info_err = [&](const FunctionalReport& a, const FunctionalReport& b, const FunctionalReport& m) {
        return (1.0 - lambda) * budget(a, &F::rel_fisher) + lambda * budget(b, &F::rel_fisher) +
               budget(m, &F::rel_fisher);
    };
    const double e_info = info_err(a0, b0, m0) + info_err(aT, bT, mT) + sum.info_err;
    const double e_ent = ent_err(a0, b0, m0) + ent_err(aT, bT, mT) + sum.ent_err;
    const double e_bound = kb * (budget(a0, &F::rel_entropy) + budget(b0, &F::rel_entropy) +
                                 budget(aT, &F::rel_entropy) + budget(bT, &F::rel_entropy)) +
                           sum.bound_err;
    auto& rep = out.lemma;
    rep.id = LemmaId::flow_integral;
    rep.subject = pair_subject(d0, d1, lambda);
    rep.equality("info deficit = integral of the M deficit", out.info_from_lemma, out.info_deficit,
                 0.01 * std::abs(out.info_deficit) + 10.0 * e_info);
    rep.equality("entropy deficit = integral of the info deficit", out.entropy_from_flow, out.entropy_deficit,
                 0.01 * std::abs(out.entropy_deficit) + 10.0 * e_ent);
    rep.equality("entropy bound = integral of the info bound", out.entropy_bound_from_flow, out.entropy_bound,
                 0.01 * std::abs(out.entropy_bound) + 10.0 * e_bound);
    return out;
}

LemmaReport bbn_1d_check(const GridDensity& d, const DeficitOptions& options) {
    const GridDensity s = rescaled_convolve(d, d, 0.5, options.convolution);
    const FunctionalReport r = compute_functionals(d);
    const FunctionalReport rs = compute_functionals(s);
    const double c = poincare_c(d);
    const double lhs = rs.ent_L - r.ent_L;
    const double rhs = (gaussian_entropy() - r.ent_L) / (2.0 * (1.0 + c));
    const double err = budget(rs, &F::ent_L) + budget(r, &F::ent_L) * (1.0 + 1.0 / (2.0 * (1.0 + c)));
    LemmaReport rep;
    rep.id = LemmaId::bbn;
    rep.subject = d.label();
    rep.inequality("Ent((X1+X2)/sqrt2) - Ent(X) >= (Ent(G) - Ent(X)) / (2(1+c))", lhs, rhs, err,
                   log_concave_isotropic(d));
    return rep;
}

} // namespace entlab
