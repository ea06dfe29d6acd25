#include "entlab/error.hpp"
#include "entlab/functionals.hpp"
#include "oracle_values.hpp"

#include <doctest.h>

#include <cmath>
#include <string>

using namespace entlab;

namespace {

GridDensity iso(const FamilySpec& s) { return isotropize(build_density(s)); }

void check_against(const GridDensity& d, const oracle::Values& o) {
    const FunctionalReport r = compute_functionals(d);
    INFO(std::string(o.name));
    auto close = [](double value, double expected, double tolerance) {
        if (std::isnan(expected)) return;
        CHECK(std::abs(value - expected) <= tolerance);
    };
    close(r.ent_L, o.ent, 1e-7);
    close(r.rel_entropy, o.D, 1e-7);
    if (r.finite.fisher_L) {
        close(r.fisher_L, o.I_L, 1e-7);
        close(r.rel_fisher, o.I_rel, 1e-7);
    }
    if (r.finite.k_L) {
        close(r.k_L, o.K_L, 1e-6);
        close(r.k_gauss, o.K, 1e-6);
        close(r.m_gauss, o.M, 1e-6);
    }
    CHECK(r.finite.fisher_L == !std::isnan(o.I_L));
    CHECK(r.finite.k_L == !std::isnan(o.K_L));
}

} // namespace

TEST_CASE("functionals match the high-precision oracle") {
    check_against(iso(FamilySpec::logistic(1.0)), oracle::logistic);
    check_against(iso(FamilySpec::gumbel(1.0)), oracle::gumbel);
    check_against(iso(FamilySpec::gamma(4.0)), oracle::gamma4);
    check_against(iso(FamilySpec::gamma(6.0)), oracle::gamma6);
    check_against(iso(FamilySpec::smoothed_laplace(0.5)), oracle::smoothed_laplace);
    check_against(iso(FamilySpec::uniform(0.0, 1.0)), oracle::uniform);
    check_against(iso(FamilySpec::laplace(1.0)), oracle::laplace);
}

TEST_CASE("Gaussian is the null case") {
    const FunctionalReport r = compute_functionals(build_density(FamilySpec::gaussian(0, 1)));
    // the 1e-10 tails carry a few 1e-9 of entropy and information; trunc accounts for it
    CHECK(std::abs(r.ent_L - oracle::half_log_2pie) <= r.err.ent_L + r.trunc.ent_L);
    CHECK(r.trunc.ent_L < 1e-7);
    CHECK(std::abs(r.rel_entropy) < 1e-9);
    CHECK(std::abs(r.rel_fisher) < 1e-9);
    CHECK(std::abs(r.k_gauss) < 1e-9);
    CHECK(std::abs(r.fisher_L - 1.0) <= r.err.fisher_L + r.trunc.fisher_L);
    CHECK(r.trunc.fisher_L < 1e-7);
    CHECK(r.k_L == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("entropy transforms under scaling") {
    const GridDensity d = build_density(FamilySpec::gumbel(1.0));
    const double e = entropy_lebesgue(d).value;
    CHECK(entropy_lebesgue(scale(d, 2.5)).value == doctest::Approx(e + std::log(2.5)).epsilon(1e-9));
    CHECK(fisher_lebesgue(scale(d, 2.5)).value ==
          doctest::Approx(fisher_lebesgue(d).value / 6.25).epsilon(1e-8));
}

TEST_CASE("square-root and ratio forms of Fisher information agree") {
    for (const auto& s : {FamilySpec::logistic(1.0), FamilySpec::gamma(4.0), FamilySpec::gumbel(2.0)}) {
        const GridDensity d = build_density(s);
        INFO(d.label());
        const Estimate a = fisher_lebesgue(d);
        const Estimate b = fisher_ratio_form(d);
        CHECK(std::abs(a.value - b.value) <= 1e-7 * a.value);
    }
}

TEST_CASE("identity residuals are within their budgets") {
    for (const auto& s : {FamilySpec::logistic(1.0), FamilySpec::gumbel(1.0), FamilySpec::gamma(6.0),
                          FamilySpec::smoothed_laplace(0.5)}) {
        const FunctionalReport r = compute_functionals(iso(s));
        INFO(s.describe());
        CHECK(std::abs(r.entropy_identity) <= std::max(1e-9, 10.0 * r.entropy_identity_err));
        CHECK(std::abs(r.fisher_identity) <= std::max(1e-9, 10.0 * r.fisher_identity_err));
        CHECK(std::abs(r.k_identity) <= std::max(1e-8, 10.0 * r.k_identity_err));
        CHECK(r.k_identity_resolved);
    }
}

TEST_CASE("capability errors name the rule") {
    const GridDensity u = iso(FamilySpec::uniform(0, 1));
    CHECK_THROWS_AS(fisher_lebesgue(u), CapabilityError);
    try {
        k_lebesgue(iso(FamilySpec::laplace(1.0)));
        FAIL("expected CapabilityError");
    } catch (const CapabilityError& e) {
        CHECK(std::string(e.what()).find("smoothed_laplace") != std::string::npos);
    }
    CHECK_THROWS_AS(k_lebesgue(iso(FamilySpec::gamma(4.0))), CapabilityError);
    const FunctionalReport r = compute_functionals(u);
    CHECK_FALSE(r.finite.fisher_L);
    CHECK(std::isnan(r.fisher_L));
}

TEST_CASE("relative functionals need isotropic input") {
    const GridDensity d = build_density(FamilySpec::gaussian(1.0, 2.0));
    CHECK_THROWS_AS(rel_entropy_gauss(d), DomainError);
    CHECK_THROWS_AS(rel_fisher_gauss(d), DomainError);
    CHECK_FALSE(compute_functionals(d).finite.rel_entropy);
}

TEST_CASE("relative entropy and Fisher information are nonnegative") {
    for (const auto& s : {FamilySpec::logistic(1.0), FamilySpec::gumbel(1.0), FamilySpec::uniform(0, 1),
                          FamilySpec::gaussian_mixture(3.0, 1.0)}) {
        const FunctionalReport r = compute_functionals(iso(s));
        CHECK(r.rel_entropy >= -r.err.rel_entropy);
        if (r.finite.rel_fisher) CHECK(r.rel_fisher >= -r.err.rel_fisher);
    }
}

TEST_CASE("Pinsker holds in the standard orientation") {
    for (const auto& s : {FamilySpec::logistic(1.0), FamilySpec::uniform(0, 1), FamilySpec::gumbel(1.0)}) {
        const PinskerReport p = pinsker_check(iso(s));
        CHECK(p.standard_holds);
        CHECK(p.lhs <= p.rhs_standard + p.err);
    }
}

TEST_CASE("Richardson error shrinks with resolution") {
    GridHint coarse;
    coarse.count = 2048;
    const GridDensity a = isotropize(build_density(FamilySpec::gumbel(1.0), coarse));
    const GridDensity b = iso(FamilySpec::gumbel(1.0));
    const FunctionalReport ra = compute_functionals(a);
    const FunctionalReport rb = compute_functionals(b);
    CHECK(std::abs(ra.ent_L - rb.ent_L) <= 4.0 * std::max(ra.err.ent_L, 1e-14) + 1e-12);
    CHECK(std::abs(ra.fisher_L - rb.fisher_L) <= 4.0 * std::max(ra.err.fisher_L, 1e-14) + 1e-12);
}
