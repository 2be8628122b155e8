#include "doctest.h"
#include "errors.hpp"
#include "superspace.hpp"

#include <cmath>

using namespace chirmt;

namespace {
const DysonIndex kU = DysonIndex::from_beta(2);
SourcePack ferm(cplx s) { return SourcePack::from_squared({}, {s}); }
SourcePack bos(cplx s) { return SourcePack::from_squared({s}, {}); }
SourcePack mixed(cplx s1, cplx s2) { return SourcePack::from_squared({s1}, {s2}); }
}  // namespace

TEST_CASE("coset points carry the right grading") {
    SuperMatrix U = coset_matrix({CosetKind::Mixed, 0.7, 1.2, 1.0});
    CHECK(U.rows() == Dims{1, 1});
    CHECK_NOTHROW(U.check_grading());
    CHECK(std::abs(U(1, 1).body() - std::polar(1.0, 1.2)) < 1e-15);
    CHECK_THROWS_AS(coset_matrix({CosetKind::Bosonic, -1.0, 0.0, 1.0}), InputError);
    CHECK_THROWS_AS(coset_for(2, 0), CapabilityError);
}

TEST_CASE("Gaussian (0|1) at n = 1 is linear in the squared source") {
    for (int nu : {0, 1, 2})
        for (cplx s : {cplx(0, 2), cplx(1, 1), cplx(-0.5, 2)}) {
            SuperResult r = z_super(GaussianClosed{}, kU, 1, nu, ferm(s));
            CHECK(std::abs(r.z_reduced - (double(nu + 1) - s)) < 1e-12);
        }
}

TEST_CASE("(0|1) result does not depend on the contour radius") {
    SuperQuadConfig a, b;
    a.ff_radius = 0.3;
    b.ff_radius = 1.7;
    SourcePack src = ferm(cplx(0.4, 1.3));
    cplx za = z_super(GaussianClosed{}, kU, 3, 1, src, a).z_reduced;
    cplx zb = z_super(GaussianClosed{}, kU, 3, 1, src, b).z_reduced;
    cplx zc = z_super(GaussianClosed{}, kU, 3, 1, src).z_reduced;
    CHECK(std::abs(za - zb) < 1e-10 * std::abs(za));
    CHECK(std::abs(za - zc) < 1e-10 * std::abs(za));
}

TEST_CASE("(0|1) Gaussian stays accurate at large n") {
    // n = 64 with a small source: a poorly placed circle would cancel e^64.
    const cplx s = cplx(0.0, 1.0) * cplx(0.0, 1.0) / (64.0 * 64.0);
    SuperResult r = z_super(GaussianClosed{}, kU, 64, 0, ferm(s));
    CHECK(std::isfinite(r.z_reduced.real()));
    CHECK(r.err_est < 1e-8);
}

TEST_CASE("supersymmetric point gives one for every weight") {
    const cplx s(1.0, 1.0);
    CHECK(std::abs(z_super(GaussianClosed{}, kU, 2, 0, mixed(s, s)).z_reduced - 1.0) < 1e-10);
    CHECK(std::abs(z_super(LorentzClosed{1.0, 8.0}, kU, 2, 0, mixed(s, s)).z_reduced - 1.0) < 1e-10);
    CHECK(std::abs(z_super(NormDependent1D{gaussian_norm(2.0)}, kU, 2, 1, mixed(s, s)).z_reduced - 1.0) < 1e-10);
}

TEST_CASE("(1|0) source on the positive real axis is rejected") {
    CHECK_THROWS_AS(z_super(GaussianClosed{}, kU, 1, 0, bos(cplx(2.0, 0.0))), InputError);
}

TEST_CASE("β other than 2 is outside the coset quadrature") {
    CHECK_THROWS_AS(z_super(GaussianClosed{}, DysonIndex::from_beta(1), 1, 0, ferm(cplx(1, 1))), CapabilityError);
}

TEST_CASE("Lorentz closed form below the bound is a precondition error") {
    CHECK_THROWS_AS(z_super(LorentzClosed{1.0, 7.0}, kU, 4, 0, ferm(cplx(1, 1))), PreconditionError);
    CHECK_NOTHROW(z_super(LorentzClosed{1.0, 9.0}, kU, 4, 0, ferm(cplx(1, 1))));
}

TEST_CASE("norm-dependent Gaussian projection equals the closed Gaussian") {
    for (cplx s : {cplx(0, 2), cplx(1, 1)}) {
        cplx a = z_super(GaussianClosed{}, kU, 2, 1, ferm(s)).z_reduced;
        cplx b = z_super(NormDependent1D{gaussian_norm(2.0)}, kU, 2, 1, ferm(s)).z_reduced;
        CHECK(std::abs(a - b) < 1e-9 * std::abs(a));
    }
}

TEST_CASE("quartic (0|1) weight is a polynomial times the prefactor") {
    QuarticAux q;
    q.alpha = 1.0;
    q.alpha_hat = 0.5;
    CosetContext c{kU, 2, 0, 0, 1};
    // After removing exp(α u² + α̂ u) the H-part is a cubic in u, so its
    // fourth finite difference vanishes.
    auto h = [&](double u) {
        SuperMatrix U = coset_matrix({CosetKind::Fermionic, 1.0, 0.0, u});
        return q_quartic(U, c, q).body() / std::exp(q.alpha * u * u + q.alpha_hat * u);
    };
    const double x0 = 0.2, dx = 0.3;
    cplx d4 = h(x0) - 4.0 * h(x0 + dx) + 6.0 * h(x0 + 2 * dx) - 4.0 * h(x0 + 3 * dx) + h(x0 + 4 * dx);
    CHECK(std::abs(d4) < 1e-9 * std::abs(h(x0)));
    cplx d3 = -h(x0) + 3.0 * h(x0 + dx) - 3.0 * h(x0 + 2 * dx) + h(x0 + 3 * dx);
    CHECK(std::abs(d3) > 1e-6 * std::abs(h(x0)));
}

TEST_CASE("correlated evaluation with C = 1 matches the uncorrelated one") {
    SourcePack src = ferm(cplx(1, 1));
    cplx a = z_super_correlated({1.0, 1.0, 1.0}, 2, 1, src).z_reduced;
    cplx b = z_super(GaussianClosed{}, kU, 2, 1, src).z_reduced;
    CHECK(std::abs(a - b) < 1e-12 * std::abs(b));
}

TEST_CASE("microscopic (0|1) limit equals its Bessel series") {
    for (int nu : {0, 1, 3}) {
        const cplx xi(0.0, 1.3);
        cplx series = 0.0, term = 1.0;
        for (int b = 0; b < 40; ++b) {
            series += term / std::tgamma(b + nu + 1.0);
            term *= -xi * xi / double(b + 1);
        }
        series *= std::tgamma(nu + 1.0);
        CHECK(std::abs(z_micro(CosetKind::Fermionic, nu, {xi}).value - series) < 1e-10 * std::abs(series));
    }
}

TEST_CASE("unquenched value decouples at large mass") {
    SourcePack src = ferm(cplx(1, 1));
    cplx zu = z_unquenched_super(100.0, 2, 1, src).z_reduced;
    cplx zq = z_super(GaussianClosed{}, kU, 2, 1, src).z_reduced;
    CHECK(std::abs(zu - zq) < 1e-3 * std::abs(zq));
}

TEST_CASE("unquenched double contour agrees between radius choices") {
    SourcePack src = ferm(cplx(1, 1));
    SuperQuadConfig a, b;
    a.v_radius = 0.4;
    a.u_radius = 3.0;
    b.v_radius = 0.6;
    b.u_radius = 4.0;
    cplx za = z_unquenched_super(0.8, 2, 0, src, a).z_reduced;
    cplx zb = z_unquenched_super(0.8, 2, 0, src, b).z_reduced;
    CHECK(std::abs(za - zb) < 1e-8 * std::abs(za));
}

TEST_CASE("chiral Lagrangian split is periodic and feeds the partially quenched integral") {
    const double M = 1.5, mu = 0.8;
    const int nu = 1;
    for (double phi : {0.3, 1.9, -2.4}) {
        cplx a = std::exp(chiral_lagrangian_split(phi, M, mu, nu));
        cplx b = std::exp(chiral_lagrangian_split(phi + 2.0 * M_PI, M, mu, nu));
        CHECK(std::abs(a - b) < 1e-10 * std::abs(a));
    }
    MicroResult r = z_unquenched_micro(nu, mu, M);
    CHECK(std::isfinite(std::abs(r.value)));
    CHECK(r.err_est < 1e-8 * std::max(1.0, std::abs(r.value)));
    CHECK_THROWS_AS(chiral_lagrangian_split(0.0, 0.0, mu, nu), InputError);
}
