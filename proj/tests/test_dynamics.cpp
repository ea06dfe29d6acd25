#include "entlab/dynamics.hpp"
#include "entlab/error.hpp"
#include "entlab/functionals.hpp"

#include <doctest.h>

#include <cmath>

using namespace entlab;

namespace {
GridDensity iso(const FamilySpec& s) { return isotropize(build_density(s)); }
} // namespace

TEST_CASE("Gaussian convolution is closed form") {
    const GridDensity a = build_density(FamilySpec::gaussian(1.0, 2.0));
    const GridDensity b = build_density(FamilySpec::gaussian(-2.0, 0.5));
    const double l = 0.3;
    const GridDensity c = rescaled_convolve(a, b, l);
    const double mean = std::sqrt(1 - l) * 1.0 + std::sqrt(l) * -2.0;
    const double var = (1 - l) * 2.0 + l * 0.5;
    const Family exact(FamilySpec::gaussian(mean, var));
    double worst = 0.0;
    for (std::size_t i = 0; i < c.grid().count(); ++i)
        worst = std::max(worst, std::abs(c.values()[i] - exact.pdf(c.grid().node(i))));
    CHECK(worst < 1e-8);
}

TEST_CASE("uniform with itself gives the triangle") {
    const GridDensity u = build_density(FamilySpec::uniform(-1.0, 1.0));
    const GridDensity t = rescaled_convolve(u, u, 0.5);
    const double s = std::sqrt(0.5);
    // density of s (U1 + U2): triangle on [-2s, 2s] with peak 1 / (2 s)
    auto tri = [&](double z) { return std::max(0.0, (2 * s - std::abs(z)) / (4 * s * s)); };
    double worst = 0.0;
    for (std::size_t i = 0; i < t.grid().count(); ++i)
        worst = std::max(worst, std::abs(t.values()[i] - tri(t.grid().node(i))));
    CHECK(worst < 1e-6);
    CHECK(plan_convolution(u, u, 0.5).cell_mode);
    CHECK_FALSE(t.capability().fisher);
}

TEST_CASE("lambda endpoints return the inputs") {
    const GridDensity a = iso(FamilySpec::logistic(1.0));
    const GridDensity b = iso(FamilySpec::gumbel(1.0));
    CHECK(rescaled_convolve(a, b, 0.0).label() == a.label());
    CHECK(rescaled_convolve(a, b, 1.0).label() == b.label());
    CHECK_THROWS_AS(rescaled_convolve(a, b, 1.5), DomainError);
    CHECK_THROWS_AS(rescaled_convolve(a, b, -0.1), DomainError);
}

TEST_CASE("every output is normalized and isotropy is preserved") {
    const GridDensity inputs[] = {iso(FamilySpec::logistic(1.0)), iso(FamilySpec::uniform(0, 1)),
                                  iso(FamilySpec::gamma(4.0)), iso(FamilySpec::laplace(1.0))};
    for (const auto& a : inputs)
        for (const auto& b : inputs)
            for (double l : {0.2, 0.7}) {
                const GridDensity c = rescaled_convolve(a, b, l);
                INFO(c.label());
                CHECK(std::abs(c.mass() - 1.0) <= 10.0 * tol::tail);
                const Moments m = moments(c);
                CHECK(std::abs(m.mean) < tol::moment);
                CHECK(std::abs(m.variance - 1.0) < tol::moment);
            }
}

TEST_CASE("log-concavity is preserved") {
    const GridDensity c = rescaled_convolve(iso(FamilySpec::gumbel(1.0)), iso(FamilySpec::gamma(4.0)), 0.4);
    CHECK(c.log_concave());
    CHECK(check_log_concave(potential_of(c)).log_concave);
    const GridDensity m = rescaled_convolve(iso(FamilySpec::gaussian_mixture(3, 1)), iso(FamilySpec::logistic(1)), 0.4);
    CHECK_FALSE(m.log_concave());
}

TEST_CASE("OU flow: Gaussian is stationary, negative time rejected, t = 0 is identity") {
    const GridDensity g = build_density(FamilySpec::gaussian(0, 1));
    const GridDensity e = ou_evolve(g, 0.7);
    CHECK(sup_distance(g, e) < 1e-9);
    CHECK_THROWS_AS(ou_evolve(g, -1.0), DomainError);
    const GridDensity l = iso(FamilySpec::logistic(1.0));
    CHECK(l1_distance(ou_evolve(l, 0.0), l) == 0.0);
}

TEST_CASE("OU flow of a Gaussian with other moments is closed form") {
    const GridDensity g = build_density(FamilySpec::gaussian(2.0, 3.0));
    const double t = 0.4;
    const GridDensity e = ou_evolve(g, t);
    const double m = std::exp(-t) * 2.0;
    const double v = std::exp(-2 * t) * 3.0 + 1 - std::exp(-2 * t);
    const Family exact(FamilySpec::gaussian(m, v));
    double worst = 0.0;
    for (std::size_t i = 0; i < e.grid().count(); ++i)
        worst = std::max(worst, std::abs(e.values()[i] - exact.pdf(e.grid().node(i))));
    CHECK(worst < 1e-8);
}

TEST_CASE("OU semigroup property") {
    const GridDensity u = iso(FamilySpec::uniform(0, 1));
    const GridDensity a = ou_evolve(ou_evolve(u, 0.2), 0.3);
    const GridDensity b = ou_evolve(u, 0.5);
    CHECK(l1_distance(a, b) < 1e-7);
}

TEST_CASE("OU smooths rough inputs and reaches long times") {
    const GridDensity u = iso(FamilySpec::uniform(0, 1));
    const GridDensity s = ou_evolve(u, 1e-3);
    CHECK(s.capability().fisher);
    CHECK(s.capability().k);
    const GridDensity late = ou_evolve(s, 10.0);
    // D decays at least like exp(-2t)
    const FunctionalReport r = compute_functionals(late);
    CHECK(r.rel_entropy <= std::exp(-20.0) * compute_functionals(s).rel_entropy + r.err.rel_entropy + r.trunc.rel_entropy);
}

TEST_CASE("entropy increases along the flow and under mixing") {
    const GridDensity l = iso(FamilySpec::gumbel(1.0));
    double prev = entropy_lebesgue(l).value;
    for (double t : {0.1, 0.3, 1.0}) {
        const double e = entropy_lebesgue(ou_evolve(l, t)).value;
        CHECK(e > prev);
        prev = e;
    }
}

TEST_CASE("convolution commutes with the flow") {
    const GridDensity u = iso(FamilySpec::uniform(0, 1));
    const GridDensity l = iso(FamilySpec::logistic(1.0));
    CHECK(commutation_check(u, l, 0.5, 0.25) < 1e-6);
    CHECK(commutation_check(l, iso(FamilySpec::gumbel(1.0)), 0.3, 0.5) < 1e-6);
}

TEST_CASE("serial and parallel policies agree") {
    const GridDensity a = iso(FamilySpec::logistic(1.0));
    const GridDensity b = iso(FamilySpec::gamma(4.0));
    ConvolutionOptions s, p;
    s.policy = kernels::Policy::serial;
    p.policy = kernels::Policy::parallel;
    const GridDensity cs = rescaled_convolve(a, b, 0.4, s);
    const GridDensity cp = rescaled_convolve(a, b, 0.4, p);
    CHECK(sup_distance(cs, cp) == 0.0);
}

TEST_CASE("resolution option sets the output node count") {
    ConvolutionOptions o;
    o.resolution = 8192;
    const GridDensity c = rescaled_convolve(iso(FamilySpec::logistic(1)), iso(FamilySpec::gumbel(1)), 0.5, o);
    CHECK(c.grid().count() >= 8192);
    o.coverage = 0.1;
    CHECK_THROWS_AS(rescaled_convolve(iso(FamilySpec::logistic(1)), iso(FamilySpec::gumbel(1)), 0.5, o), DomainError);
}
