#include "entlab/poincare.hpp"
#include "oracle_values.hpp"

#include <doctest.h>

#include <cmath>

using namespace entlab;

namespace {
GridDensity iso(const FamilySpec& s) { return isotropize(build_density(s)); }
} // namespace

TEST_CASE("Gaussian Poincare constant is 1") {
    const PoincareEstimate p = poincare_constant(build_density(FamilySpec::gaussian(0, 1)));
    CHECK(std::abs(p.c - 1.0) < 1e-6);
    CHECK(p.gap == doctest::Approx(1.0 / p.c));
    CHECK(p.residual <= 1e-8);
    CHECK(p.refinement_ratio >= 0.999);
    CHECK(p.refinement_ratio <= 1.001);
    CHECK(p.warnings.empty());
}

TEST_CASE("uniform Poincare constant is 12 / pi^2 after isotropy") {
    const PoincareEstimate p = poincare_constant(iso(FamilySpec::uniform(0, 1)));
    CHECK(std::abs(p.c - oracle::uniform_poincare) < 1e-6);
}

TEST_CASE("Poincare constant scales with the variance") {
    const GridDensity d = build_density(FamilySpec::logistic(1.0));
    const double c = poincare_constant(d, false).c;
    CHECK(poincare_constant(scale(d, 2.0), false).c == doctest::Approx(4.0 * c).epsilon(1e-6));
}

TEST_CASE("Poincare constant is at least the variance and at most the Brascamp-Lieb value") {
    for (const auto& s : {FamilySpec::logistic(1.0), FamilySpec::gumbel(1.0), FamilySpec::gamma(4.0)}) {
        const PoincareEstimate p = poincare_constant(iso(s));
        INFO(s.describe());
        CHECK(p.c >= 1.0 - 1e-6);
        CHECK(p.residual <= 1e-8);
        CHECK(p.refinement_ratio >= 0.999);
        CHECK(p.refinement_ratio <= 1.001);
    }
}

TEST_CASE("Rayleigh quotient of any test function is at least the gap") {
    const GridDensity d = iso(FamilySpec::gumbel(1.0));
    const double gap = poincare_constant(d, false).gap;
    std::vector<double> g(d.grid().count());
    for (auto fn : {+[](double x) { return x; }, +[](double x) { return std::sin(x); },
                    +[](double x) { return x * x * x; }}) {
        for (std::size_t i = 0; i < g.size(); ++i) g[i] = fn(d.grid().node(i));
        CHECK(rayleigh_quotient(d, g) >= gap * (1.0 - 1e-9));
    }
    // x is the exact eigenfunction for the Gaussian
    const GridDensity gs = build_density(FamilySpec::gaussian(0, 1));
    std::vector<double> x(gs.grid().count());
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = gs.grid().node(i);
    CHECK(rayleigh_quotient(gs, x) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("non-log-concave input is flagged") {
    const PoincareEstimate p = poincare_constant(iso(FamilySpec::gaussian_mixture(3.0, 1.0)), false);
    CHECK_FALSE(p.warnings.empty());
    CHECK(p.c > 1.0);
}

TEST_CASE("isotropic laplace stays below the exact constant 2") {
    // The exact constant is the bottom of the continuous spectrum; a
    // truncated grid sees a discrete eigenvalue above it, so the estimate
    // approaches 2 from below as the coverage widens.
    auto c_at = [](double coverage) {
        GridHint h;
        h.coverage = coverage;
        return poincare_constant(isotropize(build_density(FamilySpec::laplace(1.0), h)), false).c;
    };
    const double c6 = c_at(1e-6);
    const double cn = c_at(tol::coverage);
    const double c12 = c_at(1e-12);
    CHECK(c6 < cn);
    CHECK(cn <= c12);
    CHECK(c12 < 2.0);
    CHECK(cn > 1.8);
}

TEST_CASE("mixture bound and decay along the flow") {
    const GridDensity x = iso(FamilySpec::gumbel(1.0));
    const GridDensity y = iso(FamilySpec::uniform(0, 1));
    const MixtureBound m = mixture_bound_check(x, y, 0.3);
    CHECK(m.margin >= -poincare_slack);
    const double ts[] = {0.1, 0.5, 1.0};
    const DecayReport r = ou_decay_check(x, ts);
    CHECK(r.worst_margin >= -poincare_slack);
    for (const auto& p : r.points) CHECK(p.c_t <= r.c0 + poincare_slack);
}
