#include "doctest.h"
#include "errors.hpp"
#include "ordinary_mc.hpp"

#include <cmath>

using namespace chirmt;

namespace {
const DysonIndex kU = DysonIndex::from_beta(2);
}

TEST_CASE("log_det agrees with the Eigen determinant and flags singular input") {
    Rng rng(1);
    Eigen::MatrixXcd A(4, 4);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) A(i, j) = cplx(rng.normal(), rng.normal());
    auto l = log_det(A);
    REQUIRE(l.has_value());
    CHECK(std::abs(l->exp() - A.determinant()) < 1e-12 * std::abs(A.determinant()));
    Eigen::MatrixXcd S = A;
    S.row(2) = S.row(1);
    CHECK_FALSE(log_det(S).has_value());
}

TEST_CASE("SourcePack squares and validates") {
    SourcePack p = SourcePack::from_squared({cplx(1, 1)}, {cplx(0, 2)});
    CHECK(std::abs(p.squared1()[0] - cplx(1, 1)) < 1e-15);
    CHECK(std::abs(p.squared2()[0] - cplx(0, 2)) < 1e-15);
    SourcePack bad;
    bad.kappa1 = {cplx(0.5, 0.0)};
    CHECK_THROWS_AS(bad.validate(), InputError);
}

TEST_CASE("chiral ratio equals prefactor times squared ratio per sample") {
    for (int beta : {1, 2, 4}) {
        DysonIndex d = DysonIndex::from_beta(beta);
        Rng rng(2);
        SourcePack src;
        src.kappa1 = {cplx(0.3, 0.7)};
        src.kappa2 = {cplx(1.1, -0.4), cplx(-0.2, 0.9)};
        for (int t = 0; t < 20; ++t) {
            ChiralSample s = sample_gaussian(d, 2, 1, rng);
            cplx a = char_ratio(s, src).value;
            cplx b = chiral_prefactor(d, 2, 1, src) * squared_ratio(s, src).value;
            CHECK(std::abs(a - b) < 1e-10 * std::abs(a));
        }
    }
}

TEST_CASE("Gaussian (0|1) mean at n = 1 is 1 - s") {
    SourcePack src = SourcePack::from_squared({}, {cplx(0, 2)});
    MCEstimate e = estimate_Z(GaussianSpec{}, kU, 1, 0, src, 200000, 5);
    CHECK(std::abs(e.mean - cplx(1, -2)) < 4.0 * e.std_error);
    CHECK(e.n_samples == 200000);
    CHECK(e.std_error > 0.0);
}

TEST_CASE("estimates are reproducible and independent of the thread count") {
    SourcePack src = SourcePack::from_squared({}, {cplx(1, 1)});
    MCOptions one, two;
    two.threads = 2;
    MCEstimate a = estimate_Z(GaussianSpec{}, kU, 2, 1, src, 20000, 9, one);
    MCEstimate b = estimate_Z(GaussianSpec{}, kU, 2, 1, src, 20000, 9, two);
    MCEstimate c = estimate_Z(GaussianSpec{}, kU, 2, 1, src, 20000, 9, one);
    CHECK(a.mean == b.mean);
    CHECK(a.mean == c.mean);
    CHECK(a.std_error == b.std_error);
}

TEST_CASE("merging two half runs reproduces the full run") {
    SourcePack src = SourcePack::from_squared({}, {cplx(1, 1)});
    MCOptions o;
    o.chunk_size = 1000;
    MCEstimate full = estimate_Z(GaussianSpec{}, kU, 2, 0, src, 8000, 4, o);
    MCOptions first = o, second = o;
    MCEstimate a = estimate_Z(GaussianSpec{}, kU, 2, 0, src, 4000, 4, first);
    second.first_chunk = 4;
    MCEstimate b = estimate_Z(GaussianSpec{}, kU, 2, 0, src, 4000, 4, second);
    MCEstimate m = MCEstimate::merge(a, b);
    CHECK(m.mean == full.mean);
    CHECK(m.std_error == full.std_error);
    CHECK(m.n_samples == full.n_samples);
}

TEST_CASE("Lorentz estimate below the normalizability bound is refused") {
    SourcePack src = SourcePack::from_squared({}, {cplx(1, 1)});
    CHECK_THROWS_AS(estimate_Z(LorentzSpec{1.0, 7.0}, kU, 4, 0, src, 100, 1), PreconditionError);
}

TEST_CASE("unquenched estimator decouples for a heavy flavor") {
    SourcePack src = SourcePack::from_squared({}, {cplx(1, 1)});
    MCEstimate q = estimate_Z(GaussianSpec{}, kU, 2, 0, src, 20000, 3);
    MCEstimate u = estimate_Z_unquenched({50.0}, kU, 2, 0, src, 20000, 3);
    CHECK(std::abs(u.mean - q.mean) < 0.02 * std::abs(q.mean) + 4.0 * q.std_error);
}

TEST_CASE("Wishart histogram integrates to one and counts zero modes") {
    Histogram h = spectral_density(GaussianSpec{}, kU, 3, 1, 2000, 30, 5);
    double total = 0.0;
    for (std::size_t b = 0; b + 1 < h.edges.size(); ++b) total += h.density[b] * (h.edges[b + 1] - h.edges[b]);
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    DensityOptions chiral;
    chiral.of = SpectrumOf::Chiral;
    Histogram c = spectral_density(GaussianSpec{}, kU, 3, 1, 200, 10, 5, chiral);
    CHECK(c.zero_modes == 200);
}

TEST_CASE("microscopic density reference approaches 1/pi") {
    CHECK(microscopic_density_reference(0, 200.0) == doctest::Approx(1.0 / M_PI).epsilon(0.01));
    CHECK(microscopic_density_reference(1, 1e-3) < 1e-3);
}

TEST_CASE("Wishart eigenvalues are ascending and non-negative") {
    Rng rng(6);
    ChiralSample s = sample_gaussian(DysonIndex::from_beta(4), 2, 1, rng);
    std::vector<double> ev = wishart_eigenvalues(s);
    CHECK(ev.size() == 4);
    for (std::size_t i = 0; i < ev.size(); ++i) {
        CHECK(ev[i] >= 0.0);
        if (i) CHECK(ev[i] >= ev[i - 1]);
    }
}
