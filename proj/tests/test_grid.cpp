#include "entlab/grid.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace entlab;

TEST_CASE("quadrature is exact for quintics") {
    const Grid g = Grid::spanning(-1.0, 2.0, 41);
    std::vector<double> v(g.count());
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double x = g.node(i);
        v[i] = 1 - 2 * x + 3 * x * x - x * x * x * x + 0.5 * std::pow(x, 5);
    }
    // antiderivative x - x^2 + x^3 - x^5/5 + x^6/12
    auto F = [](double x) { return x - x * x + x * x * x - std::pow(x, 5) / 5 + std::pow(x, 6) / 12; };
    CHECK(integrate_value(g, v) == doctest::Approx(F(2.0) - F(-1.0)).epsilon(1e-13));
}

TEST_CASE("Richardson estimate bounds the error on a smooth integrand") {
    const Grid g = Grid::spanning(0.0, std::numbers::pi, 65);
    std::vector<double> v(g.count());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::sin(g.node(i));
    const Estimate e = integrate(g, v);
    CHECK(std::abs(e.value - 2.0) <= e.err);
    CHECK(e.err < 1e-7);
}

TEST_CASE("breaks restore accuracy across a kink") {
    // |x| on [-1, 1] with the kink on node 20
    const Grid g = Grid::spanning(-1.0, 1.0, 41);
    std::vector<double> v(g.count());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::abs(g.node(i));
    const std::size_t kink[] = {20};
    CHECK(std::abs(integrate_value(g, v, kink) - 1.0) < 1e-14);
    CHECK(std::abs(integrate_value(g, v) - 1.0) > 1e-6);
}

TEST_CASE("breaks closer than the minimum segment are rejected") {
    const Grid g = Grid::spanning(0.0, 1.0, 41);
    std::vector<double> v(g.count(), 1.0);
    const std::size_t close[] = {3};
    CHECK_THROWS(integrate(g, v, close));
}

TEST_CASE("cumulative trapezoid of a constant") {
    const Grid g(0.0, 0.25, 17);
    const std::vector<double> v(g.count(), 2.0);
    const auto c = cumulative_trapezoid(g, v);
    CHECK(c.front() == 0.0);
    CHECK(c.back() == doctest::Approx(8.0));
}

TEST_CASE("spanning grid hits both ends") {
    const Grid g = Grid::spanning(-3.0, 5.0, 101);
    CHECK(g.front() == -3.0);
    CHECK(g.back() == doctest::Approx(5.0).epsilon(1e-15));
    const Grid m = g.affine(1.0, 2.0);
    CHECK(m.front() == doctest::Approx(-5.0));
    CHECK(m.spacing() == doctest::Approx(2.0 * g.spacing()));
}
