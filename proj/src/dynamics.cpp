#include "entlab/dynamics.hpp"

#include "entlab/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace entlab {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();
constexpr std::size_t max_nodes = std::size_t{1} << 17;
constexpr std::size_t max_lattice = std::size_t{1} << 23;
constexpr double nodes_per_feature = 8.0;
constexpr double min_integrated_intervals = 64.0;
constexpr double min_nodes_per_sd = 32.0;

// A density scaled by a positive factor, in the coordinates of the sum.
struct Factor {
    const GridDensity* d;
    double factor;
    double lo() const { return factor * d->grid().front(); }
    double hi() const { return factor * d->grid().back(); }
    bool smooth() const { return d->capability().smooth; }
    // 0 for rough factors: their jumps and kinks have no length scale
    double scale() const { return smooth() ? factor * feature_scale(*d) : 0.0; }
};

struct Layout {
    Factor integrated;
    Factor evaluated;
    bool swapped;
    bool cell_mode;
};

Layout choose_roles(const GridDensity& d0, const GridDensity& d1, double a, double b) {
    const Factor f0{&d0, a};
    const Factor f1{&d1, b};
    const bool s0 = f0.smooth();
    const bool s1 = f1.smooth();
    if (!s0 && !s1) {
        // jumps at support ends are resolved exactly on the integrated side
        const auto ends = [](const GridDensity& d) { return int(d.bounded().left) + int(d.bounded().right); };
        if (ends(d1) > ends(d0)) return {f1, f0, true, true};
        return {f0, f1, false, true};
    }
    if (!s1) return {f1, f0, true, false};
    if (!s0) return {f0, f1, false, false};
    // both smooth: evaluate the closed form when only one side has it
    if (d0.analytic() && !d1.analytic()) return {f1, f0, true, false};
    return {f0, f1, false, false};
}

std::size_t checked_count(double span, double h) {
    const double n = std::ceil(span / h - 1e-9) + 1.0;
    if (!(n < static_cast<double>(max_nodes)))
        throw DomainError("convolution needs more than 2^17 nodes; lambda or t too close to 0");
    return std::max<std::size_t>(static_cast<std::size_t>(n), Grid::min_count);
}

struct Sampling {
    Grid grid;
    bool clamp; // a bounded support end sits on a node
    std::vector<std::size_t> breaks;
};

// Sampling grid for the integrated factor with spacing at most h_target.
// Bounded support ends land exactly on nodes; otherwise the first kink does.
Sampling integrated_sampling(const Factor& A, double h_target) {
    const auto sides = A.d->bounded();
    const double lo = A.lo();
    const double hi = A.hi();
    // long-tailed factors need the bulk resolved, not just the range
    const double sd = A.factor * std::sqrt(moments(*A.d).variance);
    const double h_max = std::min({h_target, (hi - lo) / min_integrated_intervals, sd / min_nodes_per_sd});
    if (sides.left && sides.right) return {Grid::spanning(lo, hi, checked_count(hi - lo, h_max)), true, {}};
    const std::size_t m = checked_count(hi - lo, h_max);
    if (sides.left) return {Grid(lo, h_max, m), true, {}};
    if (sides.right) return {Grid(hi - h_max * static_cast<double>(m - 1), h_max, m), true, {}};
    if (A.d->kinks().empty()) return {Grid(lo, h_max, m), false, {}};
    const double kink = A.factor * A.d->grid().node(A.d->kinks().front());
    const auto below = static_cast<std::size_t>(std::ceil((kink - lo) / h_max));
    const auto above = static_cast<std::size_t>(std::ceil((hi - kink) / h_max));
    const Grid g(kink - h_max * static_cast<double>(below), h_max, std::max(below + above + 1, Grid::min_count));
    std::vector<std::size_t> breaks;
    if (below >= 7 && above >= 7) breaks.push_back(below);
    return {g, false, breaks};
}

struct RawOutput {
    std::vector<double> f;
    std::vector<double> d1;
    std::vector<double> d2;
};

// Direct evaluation of the convolution at the nodes of `out_grid`, whose
// spacing is `stride` times the integrated spacing.
RawOutput convolve_on(const Layout& L, const Sampling& S, const Grid& out_grid, std::size_t stride,
                      bool with_jets, kernels::Policy policy) {
    const Grid& ug = S.grid;
    const std::size_t nA = ug.count();
    const std::size_t nZ = out_grid.count();
    const double h = ug.spacing();
    const double a = L.integrated.factor;
    const double b = L.evaluated.factor;
    const DensityEvaluator evA(*L.integrated.d);
    const DensityEvaluator evB(*L.evaluated.d);
    const double dA_lo = L.integrated.d->grid().front();
    const double dA_hi = L.integrated.d->grid().back();

    std::vector<double> w(nA);
    const auto qw = quadrature_weights(nA, h, S.breaks);
    // Cell mode: on the interval owned by node i (a half cell at a bounded
    // end) the integrated factor is replaced by the line alpha + beta (u - u_i)
    // with the same mass and first moment. Piecewise-flat factors stay exact;
    // elsewhere the error is O(h^2) pointwise and O(h^4) in the moments.
    std::vector<double> wb;
    double end_p[2] = {-0.5 * h, -0.5 * h};
    double end_q[2] = {0.5 * h, 0.5 * h};
    bool half_end[2] = {false, false};
    if (L.cell_mode) {
        half_end[0] = S.clamp && L.integrated.d->bounded().left;
        half_end[1] = S.clamp && L.integrated.d->bounded().right;
        if (half_end[0]) end_p[0] = 0.0;
        if (half_end[1]) end_q[1] = 0.0;
        wb.assign(nA, 0.0);
        for (std::size_t i = 0; i < nA; ++i) {
            const double u = ug.node(i);
            const double p = i == 0 ? end_p[0] : -0.5 * h;
            const double q = i + 1 == nA ? end_q[1] : 0.5 * h;
            const double F0 = evA.cdf((u + p) / a);
            auto G = [&](double x) { return evA.cdf((u + x) / a) - F0; };
            const double m = G(q);
            // int x dG = q m - int G, by Simpson on [p, 0] and [0, q]; ends and
            // kinks of the factor sit on nodes
            const double g0 = G(0.0);
            const double intG = -p / 6.0 * (4.0 * G(0.5 * p) + g0) + q / 6.0 * (g0 + 4.0 * G(0.5 * q) + m);
            const double mu = q * m - intG;
            const double s1 = q - p;
            const double s2 = 0.5 * (q * q - p * p);
            const double s3 = (q * q * q - p * p * p) / 3.0;
            const double det = s1 * s3 - s2 * s2;
            w[i] = (m * s3 - mu * s2) / det;
            wb[i] = (mu * s1 - m * s2) / det;
        }
    }
    for (std::size_t i = 0; i < nA && !L.cell_mode; ++i) {
        double x = ug.node(i) / a;
        if (S.clamp) x = std::clamp(x, dA_lo, dA_hi);
        w[i] = qw[i] * evA.value(x) / a;
    }

    const double delta = out_grid.origin() - ug.origin();
    const std::size_t nL = nA + stride * (nZ - 1);
    auto offset = [&](std::size_t m) {
        return delta + (static_cast<double>(m) - static_cast<double>(nA - 1)) * h;
    };

    RawOutput out;
    out.f.assign(nZ, 0.0);
    if (!L.cell_mode && stride >= nA) {
        // Windows of consecutive outputs do not overlap, so the lattice has
        // no shared points: evaluate each window directly.
        if (nA * nZ > 4 * max_lattice) throw DomainError("convolution needs more than 2^25 kernel evaluations");
        if (with_jets) {
            out.d1.assign(nZ, 0.0);
            out.d2.assign(nZ, 0.0);
        }
        const bool par = policy == kernels::Policy::parallel;
#pragma omp parallel for schedule(static) if (par)
        for (std::size_t k = 0; k < nZ; ++k) {
            double f = 0.0, d1 = 0.0, d2 = 0.0;
            for (std::size_t i = 0; i < nA; ++i) {
                const double v = offset(k * stride + nA - 1 - i) / b;
                if (with_jets) {
                    const Jet j = evB.jet(v);
                    f += w[i] * j.f;
                    d1 += w[i] * j.d1;
                    d2 += w[i] * j.d2;
                } else {
                    f += w[i] * evB.value(v);
                }
            }
            out.f[k] = std::max(f / b, 0.0);
            if (with_jets) {
                out.d1[k] = d1 / (b * b);
                out.d2[k] = d2 / (b * b * b);
            }
        }
        return out;
    }
    if (nL > max_lattice) throw DomainError("convolution lattice exceeds 2^23 points");
    if (L.cell_mode) {
        // P(v) = int_cell f_B(v - x) dx and Q(v) = int_cell x f_B(v - x) dx over
        // x in [-h/2, h/2], from the CDF on a quarter-cell lattice
        std::vector<double> F(4 * (nL - 1) + 5);
        const double v0 = offset(0) - 0.5 * h;
        for (std::size_t j = 0; j < F.size(); ++j)
            F[j] = evB.cdf((v0 + 0.25 * h * static_cast<double>(j)) / b);
        std::vector<double> P(nL);
        std::vector<double> Q(nL);
        for (std::size_t m = 0; m < nL; ++m) {
            const double* f = &F[4 * m];
            P[m] = f[4] - f[0];
            const double intG = h / 12.0 * (4.0 * (f[1] - f[0]) + 2.0 * (f[2] - f[0]) + 4.0 * (f[3] - f[0]) + P[m]);
            Q[m] = -0.5 * h * P[m] + intG;
        }
        // half-cell ends are added directly below
        std::vector<double> wa = w;
        std::vector<double> wq = wb;
        if (half_end[0]) wa[0] = wq[0] = 0.0;
        if (half_end[1]) wa[nA - 1] = wq[nA - 1] = 0.0;
        std::vector<double> fq(nZ, 0.0);
        kernels::toeplitz_apply(policy, wa, P, out.f, stride);
        kernels::toeplitz_apply(policy, wq, Q, fq, stride);
        for (std::size_t k = 0; k < nZ; ++k) {
            double v = out.f[k] + fq[k];
            for (int e = 0; e < 2; ++e) {
                if (!half_end[e]) continue;
                const std::size_t i = e == 0 ? 0 : nA - 1;
                const double p = end_p[e];
                const double q = end_q[e];
                // x in [p, q], s = z - u_i - x runs over [vz - q, vz - p]
                const double vz = out_grid.node(k) - ug.node(i);
                const double Fa = evB.cdf((vz - q) / b);
                const double Fm = evB.cdf((vz - 0.5 * (p + q)) / b);
                const double Fb = evB.cdf((vz - p) / b);
                const double pm = Fb - Fa;
                // int x f_B(vz - x) dx = int (vz - s) dF(s) = (vz - (vz - p)) pm + int G
                const double intG = (q - p) / 6.0 * (4.0 * (Fm - Fa) + pm);
                v += w[i] * pm + wb[i] * (p * pm + intG);
            }
            out.f[k] = std::max(v, 0.0);
        }
        return out;
    }

    std::vector<double> lat(nL);
    std::vector<double> lat1;
    std::vector<double> lat2;
    if (with_jets) {
        lat1.resize(nL);
        lat2.resize(nL);
    }
    for (std::size_t m = 0; m < nL; ++m) {
        const double v = offset(m) / b;
        if (with_jets) {
            const Jet j = evB.jet(v);
            lat[m] = j.f / b;
            lat1[m] = j.d1 / (b * b);
            lat2[m] = j.d2 / (b * b * b);
        } else {
            lat[m] = evB.value(v) / b;
        }
    }
    kernels::toeplitz_apply(policy, w, lat, out.f, stride);
    for (auto& v : out.f) v = std::max(v, 0.0);
    if (with_jets) {
        out.d1.assign(nZ, 0.0);
        out.d2.assign(nZ, 0.0);
        kernels::toeplitz_apply(policy, w, lat1, out.d1, stride);
        kernels::toeplitz_apply(policy, w, lat2, out.d2, stride);
    }
    return out;
}

// Continuous quantile of a sampled density by linear interpolation of the
// trapezoid cumulative.
double interpolated_quantile(const Grid& g, const std::vector<double>& cum, double target) {
    const auto it = std::lower_bound(cum.begin(), cum.end(), target);
    if (it == cum.begin()) return g.front();
    if (it == cum.end()) return g.back();
    const std::size_t k = static_cast<std::size_t>(it - cum.begin());
    const double c0 = cum[k - 1];
    const double c1 = cum[k];
    const double s = c1 > c0 ? (target - c0) / (c1 - c0) : 0.0;
    return g.node(k - 1) + s * g.spacing();
}

struct Spacings {
    double output; // limit from the output's own features
    double integrated;
};

Spacings spacing_limits(const Layout& L) {
    if (L.cell_mode) return {inf, inf};
    const double sA = L.integrated.scale();
    const double sB = L.evaluated.scale();
    // the output is at least as smooth as its smoother factor; the
    // quadrature must resolve both
    const double out = std::max(sA, sB) / nodes_per_feature;
    double in = sB / nodes_per_feature;
    if (L.integrated.smooth()) in = std::min(in, sA / nodes_per_feature);
    return {out, in};
}

struct Discretization {
    Sampling sampling;
    std::size_t stride;
};

Discretization discretize(const Layout& L, double H_target, double hA_target) {
    const Sampling S = integrated_sampling(L.integrated, std::min(hA_target, H_target));
    const double hA = S.grid.spacing();
    const auto stride =
        static_cast<std::size_t>(std::max(1.0, std::floor(H_target / hA * (1.0 + 1e-12))));
    return {S, stride};
}

struct FullPlan {
    ConvolutionPlan plan;
    Sampling sampling;
};

FullPlan make_plan(const GridDensity& d0, const GridDensity& d1, double lambda,
                   const ConvolutionOptions& options);

} // namespace

double feature_scale(const GridDensity& d) {
    const Potential p = potential_of(d);
    const auto f = d.values();
    const double cut = 1e-6 * d.max_value();
    double m = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i)
        if (p.valid_mask[i] && f[i] >= cut && std::isfinite(p.psi2[i])) m = std::max(m, p.psi2[i]);
    return m > 0.0 ? 1.0 / std::sqrt(m) : inf;
}

ConvolutionPlan plan_convolution(const GridDensity& d0, const GridDensity& d1, double lambda,
                                 const ConvolutionOptions& options) {
    return make_plan(d0, d1, lambda, options).plan;
}

namespace {

FullPlan make_plan(const GridDensity& d0, const GridDensity& d1, double lambda,
                   const ConvolutionOptions& options) {
    if (!(lambda >= 0.0 && lambda <= 1.0))
        throw DomainError("lambda must lie in [0, 1], got " + std::to_string(lambda));
    if (!(options.coverage > 0.0 && options.coverage <= 1e-6))
        throw DomainError("coverage quantile must lie in (0, 1e-6]");
    if (lambda == 0.0 || lambda == 1.0) {
        const GridDensity& d = lambda == 0.0 ? d0 : d1;
        return {{lambda, d.grid(), d.grid(), 1, lambda == 1.0, false, 0.0}, {d.grid(), false, {}}};
    }
    const double a = std::sqrt(1.0 - lambda);
    const double b = std::sqrt(lambda);
    const Layout L = choose_roles(d0, d1, a, b);
    std::size_t N = options.resolution != 0 ? options.resolution
                                            : std::max(d0.grid().count(), d1.grid().count());
    // rough pairs give kinks between nodes, where moments converge only at O(H^2)
    if (L.cell_mode) N *= 2;
    const Spacings lim = spacing_limits(L);

    const double full_lo = L.integrated.lo() + L.evaluated.lo();
    const double full_hi = L.integrated.hi() + L.evaluated.hi();
    const bool out_bounded_lo = L.integrated.d->bounded().left && L.evaluated.d->bounded().left;
    const bool out_bounded_hi = L.integrated.d->bounded().right && L.evaluated.d->bounded().right;

    // Pass 1: coarse values on the full range to locate the output quantiles.
    double zlo = full_lo;
    double zhi = full_hi;
    double truncated = 0.0;
    if (!(out_bounded_lo && out_bounded_hi)) {
        const double Hc = std::min((full_hi - full_lo) / 512.0, 2.0 * lim.output);
        const Discretization D = discretize(L, Hc, 2.0 * lim.integrated);
        const double H = D.sampling.grid.spacing() * static_cast<double>(D.stride);
        const Grid coarse(full_lo, H, checked_count(full_hi - full_lo, H));
        const RawOutput raw = convolve_on(L, D.sampling, coarse, D.stride, false, options.policy);
        const auto cum = cumulative_trapezoid(coarse, raw.f);
        const double total = cum.back();
        const double eps = 0.5 * options.coverage * total;
        if (!out_bounded_lo) zlo = std::max(full_lo, interpolated_quantile(coarse, cum, eps));
        if (!out_bounded_hi) zhi = std::min(full_hi, interpolated_quantile(coarse, cum, total - eps));
        truncated = options.coverage;
    }

    const double H_target = std::min((zhi - zlo) / static_cast<double>(N - 1), lim.output);
    const Discretization D = discretize(L, H_target, lim.integrated);
    const double H = D.sampling.grid.spacing() * static_cast<double>(D.stride);
    if (out_bounded_lo) zlo = full_lo;
    const Grid target(zlo, H, checked_count(zhi - zlo, H));
    return {{lambda, target, D.sampling.grid, D.stride, L.swapped, L.cell_mode, truncated},
            D.sampling};
}

} // namespace

GridDensity rescaled_convolve(const GridDensity& d0, const GridDensity& d1, double lambda,
                              const ConvolutionOptions& options) {
    const FullPlan full = make_plan(d0, d1, lambda, options);
    const ConvolutionPlan& plan = full.plan;
    if (lambda == 0.0) return d0;
    if (lambda == 1.0) return d1;

    const double a = std::sqrt(1.0 - lambda);
    const double b = std::sqrt(lambda);
    const Layout L = choose_roles(d0, d1, a, b);
    const bool jets = !plan.cell_mode;
    RawOutput raw = convolve_on(L, full.sampling, plan.target_grid, plan.stride, jets, options.policy);

    // Kinked outputs (cell mode) integrate only to O(h^2) and Richardson
    // misses kinks between nodes, so the drift budget there adds the
    // trapezoid bound H^2/8 int |f''| from second differences.
    const Estimate q = integrate(plan.target_grid, raw.f);
    const double mass = q.value;
    double kink_budget = 0.0;
    if (plan.cell_mode) {
        for (std::size_t k = 1; k + 1 < raw.f.size(); ++k)
            kink_budget += std::abs(raw.f[k + 1] - 2.0 * raw.f[k] + raw.f[k - 1]);
        kink_budget *= plan.target_grid.spacing() / 8.0;
    }
    const double inputs_tail = d0.tail_mass_bound() + d1.tail_mass_bound();
    const double drift = std::abs(1.0 - mass);
    if (!(drift <= 10.0 * tol::tail + inputs_tail + plan.truncated_mass + 10.0 * q.err + kink_budget)) {
        std::ostringstream os;
        os << "rescaled convolution lost mass " << drift
           << " (grid too coarse or coverage too small)";
        throw NumericalError(os.str());
    }
    for (auto& v : raw.f) v /= mass;
    for (auto& v : raw.d1) v /= mass;
    for (auto& v : raw.d2) v /= mass;

    const bool out_lo = L.integrated.d->bounded().left && L.evaluated.d->bounded().left;
    const bool out_hi = L.integrated.d->bounded().right && L.evaluated.d->bounded().right &&
                        std::abs(plan.target_grid.back() - (L.integrated.hi() + L.evaluated.hi())) <=
                            1e-9 * plan.target_grid.spacing() * plan.target_grid.count();
    Capability cap;
    if (plan.cell_mode) cap = {true, false, false, false};

    std::ostringstream label;
    label << "conv(" << lambda << "; " << d0.label() << ", " << d1.label() << ")";
    return GridDensity(plan.target_grid, std::move(raw.f), std::move(raw.d1), std::move(raw.d2),
                       inputs_tail + plan.truncated_mass, cap, d0.log_concave() && d1.log_concave(),
                       {out_lo, out_hi}, label.str());
}

GridDensity ou_evolve(const GridDensity& d, double t, const ConvolutionOptions& options) {
    if (!(t >= 0.0) || !std::isfinite(t)) throw DomainError("OU time must be finite and >= 0");
    if (t == 0.0) return d;
    const GridDensity gauss =
        build_density(FamilySpec::gaussian(0.0, 1.0), {d.grid().count(), tol::coverage});
    const double lambda = -std::expm1(-2.0 * t);
    GridDensity out = rescaled_convolve(d, gauss, lambda, options);
    std::ostringstream label;
    label << "ou(" << t << "; " << d.label() << ")";
    return out.relabeled(label.str());
}

double commutation_check(const GridDensity& d0, const GridDensity& d1, double lambda, double t,
                         const ConvolutionOptions& options) {
    const GridDensity left = ou_evolve(rescaled_convolve(d0, d1, lambda, options), t, options);
    const GridDensity right =
        rescaled_convolve(ou_evolve(d0, t, options), ou_evolve(d1, t, options), lambda, options);
    return l1_distance(left, right);
}

} // namespace entlab
