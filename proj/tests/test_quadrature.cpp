#include "doctest.h"
#include "errors.hpp"
#include "quadrature.hpp"

#include <cmath>

using namespace chirmt;

namespace {
cplx sum(const QuadratureRule& r, double (*f)(double)) {
    cplx s = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) s += r.weights[i] * f(r.nodes[i]);
    return s;
}
}  // namespace

TEST_CASE("Gauss-Legendre integrates polynomials of degree 2m-1 exactly") {
    for (int m : {1, 2, 5, 16, 64}) {
        QuadratureRule r = gauss_legendre(m);
        for (int k = 0; k < 2 * m; ++k) {
            double s = 0.0;
            for (std::size_t i = 0; i < r.size(); ++i) s += r.weights[i] * std::pow(r.nodes[i], k);
            double exact = k % 2 ? 0.0 : 2.0 / (k + 1);
            CHECK(std::abs(s - exact) < 1e-13);
        }
    }
}

TEST_CASE("Gauss-Hermite moments") {
    QuadratureRule r = gauss_hermite(20);
    // ∫ x^{2k} e^{-x²} = Γ(k + 1/2)
    for (int k = 0; k < 10; ++k) {
        double s = 0.0;
        for (std::size_t i = 0; i < r.size(); ++i) s += r.weights[i] * std::pow(r.nodes[i], 2 * k);
        CHECK(std::abs(s / std::tgamma(k + 0.5) - 1.0) < 1e-12);
    }
}

TEST_CASE("periodic trapezoid is exact on trigonometric polynomials") {
    QuadratureRule r = periodic_trapezoid(16);
    for (int k = 0; k < 16; ++k) {
        cplx s = 0.0;
        for (std::size_t i = 0; i < r.size(); ++i) s += r.weights[i] * std::exp(cplx(0, k * r.nodes[i]));
        CHECK(std::abs(s - (k == 0 ? 1.0 : 0.0)) < 1e-14);
    }
}

TEST_CASE("half-line rule integrates a decaying exponential") {
    CHECK(std::abs(sum(half_line(64), [](double x) { return std::exp(-x); }) - 1.0) < 1e-12);
    CHECK(std::abs(sum(half_line(128), [](double x) { return x * x * std::exp(-x); }) - 2.0) < 1e-10);
}

TEST_CASE("ladder integration converges and reports the node count") {
    LadderConfig cfg;
    cfg.kind = RuleKind::PeriodicTrapezoid;
    cfg.rel_tol = 1e-13;
    // ∮ exp(cos θ) dθ/2π = I0(1)
    IntegrationResult r = integrate([](double t) { return cplx(std::exp(std::cos(t))); }, cfg);
    CHECK(std::abs(r.value - std::cyl_bessel_i(0.0, 1.0)) < 1e-13);
    CHECK(r.nodes >= cfg.start);
}

TEST_CASE("ladder gives up with the best estimate attached") {
    LadderConfig cfg;
    cfg.kind = RuleKind::Legendre;
    cfg.mapping = Mapping::Interval;
    cfg.a = 0.0;
    cfg.b = 1.0;
    cfg.cap = 64;
    cfg.rel_tol = 1e-15;
    try {
        integrate([](double x) { return cplx(std::pow(x, -0.9)); }, cfg);
        FAIL("expected a convergence error");
    } catch (const ConvergenceError& e) {
        CHECK(e.best_re > 0.0);
    }
}

TEST_CASE("two-dimensional tensor ladder") {
    LadderConfig x;
    x.kind = RuleKind::Legendre;
    x.mapping = Mapping::Interval;
    x.a = 0.0;
    x.b = 1.0;
    LadderConfig y;
    y.kind = RuleKind::PeriodicTrapezoid;
    IntegrationResult r = integrate_2d([](double u, double t) { return cplx(u * u * (1.0 + std::cos(t))); }, x, y);
    CHECK(std::abs(r.value - 1.0 / 3.0) < 1e-12);
}
