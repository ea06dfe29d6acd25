#include "entlab/deficits.hpp"
#include "entlab/error.hpp"

#include <doctest.h>

#include <cmath>

using namespace entlab;

namespace {
GridDensity iso(const FamilySpec& s) { return isotropize(build_density(s)); }

void check_report(const LemmaReport& r) {
    INFO(to_string(r.id), " ", r.subject);
    for (const auto& c : r.checks) {
        INFO(c.name, ": lhs ", c.lhs, " rhs ", c.rhs, " margin ", c.margin, " tol ", c.tolerance);
        if (c.asserted) CHECK(c.pass);
    }
    CHECK(r.pass);
}
} // namespace

TEST_CASE("Gaussian pair has zero deficits and bounds") {
    const GridDensity g = build_density(FamilySpec::gaussian(0, 1));
    for (double l : {0.1, 0.5, 0.9}) {
        const DeficitReport e = entropy_deficit(g, g, l);
        const DeficitReport i = info_deficit(g, g, l);
        CHECK(std::abs(e.deficit) <= e.err);
        CHECK(std::abs(i.deficit) <= i.err);
        CHECK(i.err < 1e-6);
        CHECK(std::abs(e.bound) < 1e-8);
        CHECK(std::abs(i.bound) < 1e-8);
        CHECK(e.bound_asserted);
        CHECK(e.pass());
        CHECK(i.pass());
    }
}

TEST_CASE("lambda endpoints give zero deficits") {
    const GridDensity a = iso(FamilySpec::logistic(1.0));
    const GridDensity b = iso(FamilySpec::gumbel(1.0));
    CHECK(std::abs(entropy_deficit(a, b, 0.0).deficit) < 1e-12);
    CHECK(std::abs(info_deficit(a, b, 1.0).deficit) < 1e-12);
}

TEST_CASE("Shannon-Stam and Blachman-Stam with quantitative bounds") {
    const GridDensity l = iso(FamilySpec::logistic(1.0));
    const GridDensity s = iso(FamilySpec::smoothed_laplace(0.5));
    for (double lam : {0.2, 0.5, 0.8}) {
        const DeficitReport e = entropy_deficit(l, s, lam);
        const DeficitReport i = info_deficit(l, s, lam);
        CHECK(e.bound_asserted);
        CHECK(e.deficit > 0.0);
        CHECK(e.margin > 0.0);
        CHECK(i.margin > 0.0);
        CHECK(e.pass());
        CHECK(i.pass());
        // symmetric in the roles of the inputs
        CHECK(entropy_deficit(s, l, 1.0 - lam).deficit == doctest::Approx(e.deficit).epsilon(1e-6));
    }
}

TEST_CASE("uniform is smoothed before the information deficit") {
    const GridDensity u = iso(FamilySpec::uniform(0, 1));
    const GridDensity l = iso(FamilySpec::logistic(1.0));
    const DeficitReport i = info_deficit(u, l, 0.5);
    CHECK(i.smoothing_time == 1e-3);
    CHECK(i.pass());
    CHECK(info_deficit(l, l, 0.5).smoothing_time == 0.0);
}

TEST_CASE("negative control: bounds are not asserted without log-concavity") {
    const GridDensity m = iso(FamilySpec::gaussian_mixture(3.0, 1.0));
    const GridDensity l = iso(FamilySpec::logistic(1.0));
    CHECK_FALSE(log_concave_isotropic(m));
    const DeficitReport e = entropy_deficit(m, l, 0.5);
    CHECK_FALSE(e.bound_asserted);
    CHECK(e.deficit_ok);
    CHECK(e.deficit >= -e.err);
    CHECK_FALSE(bbn_1d_check(m).checks.front().asserted);
}

TEST_CASE("bounds are NaN for non-isotropic inputs") {
    const GridDensity a = build_density(FamilySpec::logistic(2.0));
    const GridDensity b = build_density(FamilySpec::gumbel(1.0));
    const DeficitReport e = entropy_deficit(a, b, 0.5);
    CHECK(std::isnan(e.bound));
    CHECK_FALSE(e.bound_asserted);
    CHECK(e.pass());
}

TEST_CASE("conditional Hessian inequality") {
    const GridDensity a = iso(FamilySpec::logistic(1.0));
    const GridDensity b = iso(FamilySpec::smoothed_laplace(0.5));
    const std::vector<double> z = {-3, -1, 0, 0.5, 2};
    check_report(lemma_conditional_hessian(a, b, 0.3, z));
    check_report(lemma_conditional_hessian(b, a, 0.7, z));
    CHECK_THROWS_AS(lemma_conditional_hessian(a, b, 0.0, z), DomainError);
    CHECK_THROWS_AS(lemma_conditional_hessian(a, iso(FamilySpec::uniform(0, 1)), 0.5, z), CapabilityError);
}

TEST_CASE("K_L lemma and its product-quadrature cross-check") {
    const LemmaReport r = lemma_klebesgue(iso(FamilySpec::logistic(1.0)), iso(FamilySpec::gamma(6.0)), 0.3);
    check_report(r);
    CHECK(r.checks.size() == 2);
    CHECK_THROWS_AS(lemma_klebesgue(iso(FamilySpec::gamma(4.0)), iso(FamilySpec::logistic(1.0)), 0.3),
                    CapabilityError);
}

TEST_CASE("Gaussian-reference Hessian lemmas") {
    check_report(lemma_l_and_l2(iso(FamilySpec::gumbel(1.0)), iso(FamilySpec::logistic(1.0)), 0.5));
    check_report(lemma_l_and_l2(iso(FamilySpec::smoothed_laplace(0.5)), iso(FamilySpec::gamma(6.0)), 0.2));
    CHECK_THROWS_AS(lemma_l_and_l2(build_density(FamilySpec::logistic(2.0)), iso(FamilySpec::logistic(1.0)), 0.5),
                    DomainError);
}

TEST_CASE("de Bruijn identities converge at second order") {
    const double ts[] = {0.25, 0.5, 1.0};
    const DebruijnReport r = debruijn_check(iso(FamilySpec::uniform(0, 1)), ts);
    check_report(r.lemma);
    for (const auto& p : r.points) {
        CHECK(p.ent_ratio > 3.5);
        CHECK(p.ent_ratio < 4.5);
        CHECK(std::isnan(p.decay_rhs)); // I(X_0) is infinite for the uniform
    }
    const double t0[] = {0.005};
    CHECK_THROWS_AS(debruijn_check(iso(FamilySpec::uniform(0, 1)), t0), DomainError);
    CHECK_THROWS_AS(debruijn_check(build_density(FamilySpec::logistic(2.0)), ts), DomainError);
}

TEST_CASE("information decays exponentially along the flow") {
    const double ts[] = {0.25, 1.0};
    const DebruijnReport r = debruijn_check(iso(FamilySpec::gumbel(1.0)), ts);
    check_report(r.lemma);
    for (const auto& p : r.points) CHECK(p.info <= p.decay_rhs);
}

TEST_CASE("pointwise flow inequality") {
    const double ts[] = {0.25, 0.75};
    check_report(last_lemma_check(iso(FamilySpec::logistic(1.0)), iso(FamilySpec::gumbel(1.0)), 0.4, ts));
}

TEST_CASE("one-dimensional BBN bound") {
    for (const auto& s : {FamilySpec::logistic(1.0), FamilySpec::uniform(0, 1), FamilySpec::gamma(4.0)}) {
        const LemmaReport r = bbn_1d_check(iso(s));
        check_report(r);
        CHECK(r.checks.front().asserted);
        CHECK(r.worst_margin > 0.0);
    }
}

TEST_CASE("lemma report bookkeeping") {
    LemmaReport r;
    r.inequality("a", 1.0, 0.5, 0.0);
    r.inequality("b", 0.5, 1.0, 0.0, false);
    CHECK(r.pass);
    CHECK(r.worst_margin == 0.5);
    r.equality("c", 1.0, 1.1, 0.05);
    CHECK_FALSE(r.pass);
    CHECK(r.worst_margin == doctest::Approx(-0.1));
}
