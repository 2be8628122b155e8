#include "doctest.h"
#include "ensembles.hpp"
#include "errors.hpp"

#include <cmath>

using namespace chirmt;

TEST_CASE("Dyson index bookkeeping") {
    CHECK(DysonIndex::from_beta(1) == DysonIndex{1, 1, 2});
    CHECK(DysonIndex::from_beta(2) == DysonIndex{2, 1, 1});
    CHECK(DysonIndex::from_beta(4) == DysonIndex{4, 2, 1});
    CHECK_THROWS_AS(DysonIndex::from_beta(3), InputError);
}

TEST_CASE("negative index maps to the transposed problem") {
    CHECK(normalize_index(3, -2) == std::pair<int, int>{1, 2});
    CHECK(normalize_index(3, 1) == std::pair<int, int>{3, 1});
    CHECK_THROWS(normalize_index(1, -2));
}

TEST_CASE("Gaussian draws have the expected shape and mean trace") {
    for (int beta : {1, 2, 4}) {
        DysonIndex d = DysonIndex::from_beta(beta);
        Rng rng(3);
        const int n = 3, nu = 1, N = 4000;
        double acc = 0.0;
        for (int i = 0; i < N; ++i) {
            ChiralSample s = sample_gaussian(d, n, nu, rng);
            CHECK(s.W.rows() == d.gamma * n);
            CHECK(s.W.cols() == d.gamma * (n + nu));
            acc += trace_wdw(s);
        }
        // exp(-n tr W†W/γ̃) gives E tr W†W = β n (n+ν) γ̃ / (2n) per real degree of freedom count.
        const double expect = double(beta) * n * (n + nu) * d.gamma_tilde / (2.0 * n);
        CHECK(std::abs(acc / N / expect - 1.0) < 0.03);
    }
}

TEST_CASE("chiral matrix is Hermitean with a ±λ spectrum") {
    Rng rng(4);
    ChiralSample s = sample_gaussian(DysonIndex::from_beta(2), 2, 1, rng);
    Eigen::MatrixXcd H = chiral_matrix(s);
    CHECK((H - H.adjoint()).norm() < 1e-14);
    Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd>(H).eigenvalues();
    CHECK(ev.size() == 5);
    CHECK(std::abs(ev.sum()) < 1e-12);
    int zeros = 0;
    for (int i = 0; i < ev.size(); ++i) zeros += std::abs(ev[i]) < 1e-10;
    CHECK(zeros == 1);
}

TEST_CASE("fixed-trace draws sit on the constraint surface") {
    Rng rng(5);
    for (int beta : {1, 2, 4}) {
        ChiralSample s = sample_fixed_trace(DysonIndex::from_beta(beta), 3, 2, 1.5, rng);
        CHECK(std::abs(trace_wdw(s) - 1.5 * 3) < 1e-12);
    }
}

TEST_CASE("quartic log-density at a scalar point") {
    ChiralSample s;
    s.dyson = DysonIndex::from_beta(2);
    s.n = 1;
    s.nu = 0;
    s.W = Eigen::MatrixXcd::Constant(1, 1, cplx(1.0, 0.0));
    CHECK(std::abs(log_density(QuarticSpec{1.0, -2.0}, s) - 1.0) < 1e-14);
}

TEST_CASE("Lorentz normalizability bound") {
    CHECK(lorentz_min_mu(DysonIndex::from_beta(2), 4, 0, 1) == doctest::Approx(8.0));
    CHECK(lorentz_min_mu(DysonIndex::from_beta(2), 1, 1, 0) == doctest::Approx(2.0));
}

TEST_CASE("correlation: W -> W L† scales the density by the Jacobian exponent") {
    Rng rng(6);
    ChiralSample s = sample_gaussian(DysonIndex::from_beta(2), 2, 1, rng);
    Eigen::MatrixXcd C = Eigen::MatrixXcd::Identity(3, 3);
    C(0, 0) = 2.0;
    Correlated c = apply_correlation(s, C);
    Eigen::MatrixXcd WC = c.sample.W.adjoint() * c.sample.W;
    Eigen::MatrixXcd expect = s.W.adjoint() * s.W;
    // tr of W†W grows only through the C-weighted direction.
    CHECK(WC.trace().real() >= expect.trace().real() - 1e-12);
    CHECK(std::isfinite(c.log_jacobian));
}

TEST_CASE("coordinate round trip respects the β structure") {
    Rng rng(7);
    for (int beta : {1, 2, 4}) {
        ChiralSample s = sample_gaussian(DysonIndex::from_beta(beta), 2, 1, rng);
        std::vector<double> x = to_coords(s);
        ChiralSample t = s;
        t.W.setZero();
        from_coords(x, t);
        CHECK((t.W - s.W).norm() < 1e-15);
    }
}

TEST_CASE("Metropolis chain reproduces the Gaussian mean trace") {
    ChainConfig cfg;
    cfg.burn_in = 2000;
    std::vector<ChiralSample> xs =
        sample_mcmc(GaussianSpec{}, DysonIndex::from_beta(2), 2, 0, cfg, Rng(8), 4000);
    double acc = 0.0;
    for (const auto& s : xs) acc += trace_wdw(s);
    CHECK(std::abs(acc / xs.size() / 2.0 - 1.0) < 0.08);
}

TEST_CASE("integrated autocorrelation of white noise is near one") {
    Rng rng(9);
    std::vector<double> x(20000);
    for (auto& v : x) v = rng.normal();
    CHECK(integrated_autocorrelation(x) == doctest::Approx(1.0).epsilon(0.15));
}
