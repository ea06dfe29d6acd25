// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Every tolerance below is pinned here.

#include "entlab/deficits.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

using namespace entlab;

namespace {

namespace pinned {
constexpr double identity_entropy = 1e-6;
constexpr double identity_fisher = 1e-6;
constexpr double identity_k = 1e-5;
constexpr double null_tolerance = 1e-6;
constexpr double theorem_margin = -1e-5;
constexpr double poincare_abs = 1e-3;
constexpr double refinement_lo = 0.999;
constexpr double refinement_hi = 1.001;
constexpr double debruijn_lo = 3.5;
constexpr double debruijn_hi = 4.5;
constexpr double commutation = 1e-6;
constexpr double flow_relative = 0.01;
constexpr double convergence_factor = 4.0;
} // namespace pinned

GridDensity iso(const FamilySpec& s, std::size_t count = 4096) {
    GridHint h;
    h.count = count;
    return isotropize(build_density(s, h));
}

// Collects failure messages; the first few are echoed after the verdict.
struct Outcome {
    std::vector<std::string> failures;
    std::string summary;
    void fail(const std::string& what) { failures.push_back(what); }
    void expect(bool ok, const std::string& what) {
        if (!ok) fail(what);
    }
};

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

struct NamedSpec {
    const char* name;
    FamilySpec spec;
};

std::vector<NamedSpec> families() {
    return {{"gaussian", FamilySpec::gaussian(0, 1)},
            {"logistic", FamilySpec::logistic(1.0)},
            {"gumbel", FamilySpec::gumbel(1.0)},
            {"gamma4", FamilySpec::gamma(4.0)},
            {"gamma6", FamilySpec::gamma(6.0)},
            {"smoothed_laplace", FamilySpec::smoothed_laplace(0.5)},
            {"uniform", FamilySpec::uniform(0.0, 1.0)},
            {"laplace", FamilySpec::laplace(1.0)},
            {"mixture", FamilySpec::gaussian_mixture(3.0, 1.0)}};
}

void identities(Outcome& out) {
    int checked = 0;
    double worst = 0.0;
    for (const auto& f : families()) {
        const FunctionalReport r = compute_functionals(iso(f.spec));
        auto check = [&](const char* which, double residual, double limit) {
            ++checked;
            worst = std::max(worst, std::abs(residual) / limit);
            out.expect(std::abs(residual) <= limit,
                       std::string(f.name) + " " + which + " identity residual " + num(residual));
        };
        check("entropy", r.entropy_identity, pinned::identity_entropy);
        if (r.finite.fisher_L) check("fisher", r.fisher_identity, pinned::identity_fisher);
        if (r.finite.k_L) check("K", r.k_identity, pinned::identity_k);
    }
    out.summary = std::to_string(checked) + " identities, worst residual/limit " + num(worst);
}

void gaussian_null(Outcome& out) {
    const GridDensity g = build_density(FamilySpec::gaussian(0, 1));
    const std::vector<double> z = {-3, -2, -1, 0, 1, 2, 3};
    const double ts[] = {0.25, 0.5, 1.0};
    const double tol = pinned::null_tolerance;
    double worst = 0.0;
    int checked = 0;
    auto near_zero = [&](double v, const std::string& what) {
        ++checked;
        worst = std::max(worst, std::abs(v));
        out.expect(std::abs(v) <= tol, what + " = " + num(v));
    };
    auto lemma = [&](const LemmaReport& r, double lam) {
        for (const auto& c : r.checks)
            if (c.asserted) near_zero(c.margin, std::string(to_string(r.id)) + " " + c.name + " at " + num(lam));
    };
    for (double lam : {0.1, 0.3, 0.5, 0.7, 0.9}) {
        const DeficitReport e = entropy_deficit(g, g, lam);
        const DeficitReport i = info_deficit(g, g, lam);
        near_zero(e.deficit, "entropy deficit at " + num(lam));
        near_zero(i.deficit, "information deficit at " + num(lam));
        near_zero(e.bound, "entropy bound at " + num(lam));
        near_zero(i.bound, "information bound at " + num(lam));
        lemma(lemma_conditional_hessian(g, g, lam, z), lam);
        lemma(lemma_klebesgue(g, g, lam), lam);
        lemma(lemma_l_and_l2(g, g, lam), lam);
        lemma(last_lemma_check(g, g, lam, ts), lam);
    }
    lemma(debruijn_check(g, ts).lemma, 0.0);
    lemma(bbn_1d_check(g), 0.0);
    const FlowIntegral fi = flow_integral_check(g, g, 0.5);
    lemma(fi.lemma, 0.5);
    near_zero(fi.info_from_lemma, "integrated information deficit");
    near_zero(fi.entropy_from_flow, "integrated entropy deficit");
    out.summary = std::to_string(checked) + " quantities, max |value| " + num(worst);
}

struct Pair {
    const char* name;
    GridDensity d0;
    GridDensity d1;
};

std::vector<Pair> theorem_pairs() {
    const GridDensity smoothed_uniform = ou_evolve(iso(FamilySpec::uniform(0.0, 1.0)), 1e-3);
    return {{"uniform_s|logistic", smoothed_uniform, iso(FamilySpec::logistic(1.0))},
            {"logistic|smoothed_laplace", iso(FamilySpec::logistic(1.0)), iso(FamilySpec::smoothed_laplace(0.5))},
            {"gaussian|gamma4", iso(FamilySpec::gaussian(0, 1)), iso(FamilySpec::gamma(4.0))},
            {"gumbel|logistic", iso(FamilySpec::gumbel(1.0)), iso(FamilySpec::logistic(1.0))}};
}

void theorems(Outcome& out) {
    double worst = INFINITY;
    int checked = 0;
    for (const auto& p : theorem_pairs()) {
        for (int k = 1; k <= 9; ++k) {
            const double lam = 0.1 * k;
            for (const DeficitReport& r : {entropy_deficit(p.d0, p.d1, lam), info_deficit(p.d0, p.d1, lam)}) {
                ++checked;
                const std::string what = std::string(p.name) + " " + std::string(to_string(r.kind)) + " at " + num(lam);
                out.expect(r.bound_asserted, what + ": bound not asserted");
                out.expect(r.margin >= pinned::theorem_margin, what + " margin " + num(r.margin));
                worst = std::min(worst, r.margin);
            }
        }
    }
    out.summary = std::to_string(checked) + " deficits, smallest margin " + num(worst);
}

void poincare(Outcome& out) {
    const PoincareEstimate g = poincare_constant(build_density(FamilySpec::gaussian(0, 1)));
    const PoincareEstimate u = poincare_constant(build_density(FamilySpec::uniform(-std::sqrt(3.0), std::sqrt(3.0))));
    const double cu = 12.0 / (M_PI * M_PI);
    out.expect(std::abs(g.c - 1.0) <= pinned::poincare_abs, "gaussian c = " + num(g.c));
    out.expect(std::abs(u.c - cu) <= pinned::poincare_abs, "uniform c = " + num(u.c));
    for (const PoincareEstimate* p : {&g, &u})
        out.expect(p->refinement_ratio >= pinned::refinement_lo && p->refinement_ratio <= pinned::refinement_hi,
                   "refinement ratio " + num(p->refinement_ratio));
    std::ostringstream s;
    s.precision(7);
    s << "gaussian c " << g.c << " (ratio " << g.refinement_ratio << "), uniform c " << u.c << " vs "
      << cu << " (ratio " << u.refinement_ratio << ")";
    out.summary = s.str();
}

void debruijn(Outcome& out) {
    const double ts[] = {0.25, 0.5, 1.0};
    std::ostringstream s;
    for (const auto& [name, spec] : {NamedSpec{"uniform", FamilySpec::uniform(0.0, 1.0)},
                                     NamedSpec{"logistic", FamilySpec::logistic(1.0)}}) {
        const DebruijnReport r = debruijn_check(iso(spec), ts);
        s << name << " ratios";
        for (const auto& p : r.points) {
            s << " " << num(p.ent_ratio);
            out.expect(p.ent_ratio >= pinned::debruijn_lo && p.ent_ratio <= pinned::debruijn_hi,
                       std::string(name) + " entropy derivative ratio " + num(p.ent_ratio) + " at t=" + num(p.t));
        }
        s << "; ";
    }
    out.summary = s.str();
}

void commutation(Outcome& out) {
    struct Combo {
        const char* name;
        FamilySpec a, b;
        double lambda, t;
    };
    const Combo combos[] = {
        {"uniform|logistic", FamilySpec::uniform(0.0, 1.0), FamilySpec::logistic(1.0), 0.5, 0.25},
        {"logistic|smoothed_laplace", FamilySpec::logistic(1.0), FamilySpec::smoothed_laplace(0.5), 0.3, 0.5},
        {"gaussian|gamma4", FamilySpec::gaussian(0, 1), FamilySpec::gamma(4.0), 0.7, 1.0},
        {"gumbel|laplace", FamilySpec::gumbel(1.0), FamilySpec::laplace(1.0), 0.5, 0.1},
    };
    double worst = 0.0;
    for (const auto& c : combos) {
        const double d = commutation_check(iso(c.a), iso(c.b), c.lambda, c.t);
        worst = std::max(worst, d);
        out.expect(d <= pinned::commutation, std::string(c.name) + " L1 " + num(d));
    }
    out.summary = "4 combinations, max L1 " + num(worst);
}

void flow_integral(Outcome& out) {
    std::ostringstream s;
    const std::pair<const char*, std::pair<FamilySpec, FamilySpec>> pairs[] = {
        {"logistic|smoothed_laplace", {FamilySpec::logistic(1.0), FamilySpec::smoothed_laplace(0.5)}},
        {"gumbel|logistic", {FamilySpec::gumbel(1.0), FamilySpec::logistic(1.0)}}};
    for (const auto& [name, specs] : pairs) {
        const FlowIntegral f = flow_integral_check(iso(specs.first), iso(specs.second), 0.5);
        const double rel = std::abs(f.info_from_lemma - f.info_deficit) / std::abs(f.info_deficit);
        out.expect(rel <= pinned::flow_relative, std::string(name) + " relative gap " + num(rel));
        out.expect(f.lemma.pass, std::string(name) + " flow lemma checks");
        s << name << " " << num(f.info_from_lemma) << " vs " << num(f.info_deficit) << " (rel " << num(rel) << "); ";
    }
    out.summary = s.str();
}

void convergence(Outcome& out) {
    int checked = 0;
    double worst = 0.0;
    for (const auto& f : families()) {
        const FunctionalReport a = compute_functionals(iso(f.spec, 2048));
        const FunctionalReport b = compute_functionals(iso(f.spec, 4096));
        auto check = [&](const char* field, bool finite, double va, double vb, double err) {
            if (!finite) return;
            ++checked;
            const double gap = std::abs(va - vb);
            // a few ulps of slack for values that agree to round-off
            const double limit = pinned::convergence_factor * err + 1e-14 * std::max(1.0, std::abs(vb));
            worst = std::max(worst, gap / limit);
            out.expect(gap <= limit, std::string(f.name) + " " + field + " moved " + num(gap) + " vs err " + num(err));
        };
        check("ent_L", a.finite.ent_L, a.ent_L, b.ent_L, a.err.ent_L);
        check("fisher_L", a.finite.fisher_L, a.fisher_L, b.fisher_L, a.err.fisher_L);
        check("rel_entropy", a.finite.rel_entropy, a.rel_entropy, b.rel_entropy, a.err.rel_entropy);
        check("rel_fisher", a.finite.rel_fisher, a.rel_fisher, b.rel_fisher, a.err.rel_fisher);
        check("k_L", a.finite.k_L, a.k_L, b.k_L, a.err.k_L);
        check("k_gauss", a.finite.k_gauss, a.k_gauss, b.k_gauss, a.err.k_gauss);
        check("m_gauss", a.finite.m_gauss, a.m_gauss, b.m_gauss, a.err.m_gauss);
    }
    out.summary = std::to_string(checked) + " functionals, worst gap/limit " + num(worst);
}

void negative_control(Outcome& out) {
    const GridDensity m = iso(FamilySpec::gaussian_mixture(3.0, 1.0));
    const LogConcavity lc = check_log_concave(potential_of(m));
    out.expect(!lc.log_concave, "mixture accepted as log-concave");
    const GridDensity partners[] = {iso(FamilySpec::logistic(1.0)), iso(FamilySpec::gaussian(0, 1)), m};
    int checked = 0;
    for (const auto& p : partners) {
        for (double lam : {0.25, 0.5, 0.75}) {
            const DeficitReport e = entropy_deficit(m, p, lam);
            const DeficitReport i = info_deficit(m, p, lam);
            checked += 2;
            out.expect(!e.bound_asserted && !i.bound_asserted, "bound asserted for " + p.label());
            out.expect(e.deficit >= -e.err, "entropy deficit " + num(e.deficit) + " with " + p.label());
        }
    }
    out.expect(!bbn_1d_check(m).checks.front().asserted, "BBN bound asserted for the mixture");
    out.summary = "min psi'' " + num(lc.worst) + ", " + std::to_string(checked) + " deficits with bounds withheld";
}

} // namespace

int main() {
    const std::pair<const char*, std::function<void(Outcome&)>> criteria[] = {
        {"identities", identities},       {"gaussian null case", gaussian_null},
        {"theorem margins", theorems},    {"Poincare estimator", poincare},
        {"de Bruijn convergence", debruijn}, {"commutation", commutation},
        {"flow integral", flow_integral}, {"resolution convergence", convergence},
        {"negative control", negative_control}};
    int failed = 0;
    int n = 0;
    for (const auto& [name, run] : criteria) {
        ++n;
        Outcome out;
        const auto start = std::chrono::steady_clock::now();
        try {
            run(out);
        } catch (const std::exception& e) {
            out.fail(std::string("exception: ") + e.what());
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const bool pass = out.failures.empty();
        failed += pass ? 0 : 1;
        std::printf("%s %d %s: %s [%.1fs]\n", pass ? "PASS" : "FAIL", n, name, out.summary.c_str(), secs);
        for (std::size_t k = 0; k < out.failures.size() && k < 8; ++k)
            std::printf("    %s\n", out.failures[k].c_str());
        std::fflush(stdout);
    }
    std::printf("%d/%d criteria passed\n", n - failed, n);
    return failed == 0 ? 0 : 1;
}
