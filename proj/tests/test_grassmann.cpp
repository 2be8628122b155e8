#include "doctest.h"
#include "errors.hpp"
#include "grassmann.hpp"
#include "rng.hpp"
#include "supermatrix.hpp"

#include <vector>

using namespace chirmt;

namespace {

// Random element with every monomial populated, restricted to one parity
// if requested (0 even, 1 odd, -1 both).
Grassmann random_element(int ngen, Rng& rng, int parity = -1) {
    Grassmann g(ngen);
    for (Mask m = 0; m < (Mask(1) << ngen); ++m) {
        int deg = __builtin_popcount(m);
        if (parity >= 0 && deg % 2 != parity) continue;
        g += Grassmann::monomial(ngen, m, cplx(rng.normal(), rng.normal()));
    }
    return g;
}

SuperMatrix random_supermatrix(Dims d, int ngen, Rng& rng, double diag_shift = 2.0) {
    SuperMatrix m(d, ngen);
    for (int i = 0; i < d.total(); ++i)
        for (int j = 0; j < d.total(); ++j) m(i, j) = random_element(ngen, rng, m.odd_entry(i, j) ? 1 : 0);
    for (int i = 0; i < d.total(); ++i) m(i, i) += Grassmann(ngen, diag_shift);
    return m;
}

double dist(const Grassmann& a, const Grassmann& b) { return (a - b).max_abs(); }

}  // namespace

TEST_CASE("generators anticommute and square to zero") {
    const int n = 4;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            Grassmann a = Grassmann::generator(n, i), b = Grassmann::generator(n, j);
            CHECK((a * b + b * a).is_zero());
        }
    Grassmann e = Grassmann::generator(n, 2);
    CHECK((e * e).is_zero());
}

TEST_CASE("product is associative and distributive on random elements") {
    Rng rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        Grassmann a = random_element(4, rng), b = random_element(4, rng), c = random_element(4, rng);
        CHECK(dist((a * b) * c, a * (b * c)) < 1e-12);
        CHECK(dist(a * (b + c), a * b + a * c) < 1e-12);
    }
}

TEST_CASE("even elements commute, odd elements anticommute") {
    Rng rng(12);
    for (int trial = 0; trial < 10; ++trial) {
        Grassmann e = random_element(5, rng, 0), x = random_element(5, rng);
        CHECK(dist(e * x, x * e) < 1e-12);
        Grassmann o1 = random_element(5, rng, 1), o2 = random_element(5, rng, 1);
        CHECK(dist(o1 * o2, -(o2 * o1)) < 1e-12);
    }
}

TEST_CASE("inverse, exp and log are consistent") {
    Rng rng(13);
    for (int trial = 0; trial < 10; ++trial) {
        Grassmann x = random_element(4, rng, 0) + cplx(3.0, 0.5);
        CHECK(dist(x * x.inverse(), Grassmann(4, 1.0)) < 1e-12);
        CHECK(dist(gexp(glog(x)), x) < 1e-11);
        Grassmann y = random_element(4, rng, 0);
        CHECK(dist(gexp(y) * gexp(-y), Grassmann(4, 1.0)) < 1e-11);
        CHECK(dist(gpow(x, 3), x * x * x) < 1e-10);
        CHECK(dist(gpow(x, cplx(0.5)) * gpow(x, cplx(0.5)), x) < 1e-11);
    }
}

TEST_CASE("inverse of an element with zero body is rejected") {
    Grassmann z = Grassmann::generator(2, 0) * Grassmann::generator(2, 1);
    CHECK_THROWS_AS(z.inverse(), SingularityError);
}

TEST_CASE("Berezin integral: single generator and Gaussian pair") {
    const int n = 2;
    Grassmann eta = Grassmann::generator(n, 0), etab = Grassmann::generator(n, 1);
    CHECK(berezin(eta, {0}).body() == cplx(1.0));
    CHECK(berezin(Grassmann(n, 1.0), {0}).is_zero());
    // The last listed generator is integrated first:
    // ∫dη ∫dη̄ exp(a η̄ η) = a.
    const cplx a(1.5, -0.5);
    Grassmann g = gexp(etab * eta * a);
    CHECK(std::abs(berezin(g, {0, 1}).body() - a) < 1e-14);
    CHECK(std::abs(berezin(g, {1, 0}).body() + a) < 1e-14);
}

TEST_CASE("nilpotency order of a sum of pairs") {
    const int n = 6;
    Grassmann x(n);
    for (int i = 0; i < 3; ++i) x += Grassmann::generator(n, 2 * i) * Grassmann::generator(n, 2 * i + 1);
    CHECK(x.nilpotency_order() == 4);
}

TEST_CASE("lift_scalar reproduces exp on an even element") {
    Rng rng(14);
    Grassmann x = random_element(4, rng, 0);
    std::vector<cplx> d(6, std::exp(x.body()));
    CHECK(dist(lift_scalar(d, x), gexp(x)) < 1e-12);
}

TEST_CASE("str is cyclic and sdet multiplicative on (2|2)") {
    Rng rng(15);
    const Dims d{2, 2};
    for (int trial = 0; trial < 5; ++trial) {
        SuperMatrix a = random_supermatrix(d, 4, rng), b = random_supermatrix(d, 4, rng);
        CHECK(dist(str(a * b), str(b * a)) < 1e-10);
        Grassmann lhs = sdet(a * b), rhs = sdet(a) * sdet(b);
        CHECK(dist(lhs, rhs) < 1e-10 * std::max(1.0, rhs.max_abs()));
    }
}

TEST_CASE("supermatrix inverse and identity") {
    Rng rng(16);
    SuperMatrix a = random_supermatrix({1, 2}, 4, rng, 3.0);
    SuperMatrix p = a * inverse(a);
    SuperMatrix id = SuperMatrix::identity({1, 2}, 4);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) CHECK(dist(p(i, j), id(i, j)) < 1e-11);
    CHECK(dist(sdet(id), Grassmann(4, 1.0)) < 1e-15);
}

TEST_CASE("grading violations are detected") {
    SuperMatrix m({1, 1}, 2);
    m(0, 1) = Grassmann(2, 1.0);  // even entry in an odd block
    CHECK_THROWS_AS(m.check_grading(), StructuralError);
}

TEST_CASE("conjugation is an involution and the adjoint reverses products") {
    Rng rng(17);
    const std::vector<int> conj{1, 0, 3, 2};
    Grassmann x = random_element(4, rng);
    CHECK(dist(conjugate(conjugate(x, conj), conj), x) < 1e-14);
    SuperMatrix a = random_supermatrix({1, 1}, 4, rng), b = random_supermatrix({1, 1}, 4, rng);
    SuperMatrix l = adjoint(a * b, conj), r = adjoint(b, conj) * adjoint(a, conj);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) CHECK(dist(l(i, j), r(i, j)) < 1e-11);
}
