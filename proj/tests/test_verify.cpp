#include "doctest.h"
#include "errors.hpp"
#include "verify.hpp"

#include <cmath>

using namespace chirmt;

TEST_CASE("stochastic comparison uses the combined error") {
    ComparisonReport r = compare_stochastic("t", "a", cplx(1.0, 0.0), 0.03, "b", cplx(1.1, 0.0), 0.04, 3.0);
    CHECK(r.stochastic);
    CHECK(r.z == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(r.pass);
    ComparisonReport bad = compare_stochastic("t", "a", 1.0, 0.01, "b", 1.1, 0.0, 3.0);
    CHECK_FALSE(bad.pass);
}

TEST_CASE("deterministic comparison is relative") {
    CHECK(compare_deterministic("t", "a", cplx(1e6, 0), "b", cplx(1e6 + 1e-4, 0), 1e-9).pass);
    CHECK_FALSE(compare_deterministic("t", "a", cplx(1, 0), "b", cplx(1 + 1e-6, 0), 1e-9).pass);
}

TEST_CASE("report JSON round trip") {
    ComparisonReport r = compare_stochastic("id-1", "mc", cplx(0.5, -0.25), 0.01, "super", cplx(0.51, -0.24), 0.0);
    r.seed = 99;
    r.note = "half \"quoted\"";
    ComparisonReport back = ComparisonReport::from_json(r.to_json());
    CHECK(back.id == r.id);
    CHECK(back.method_b == "super");
    CHECK(back.value_a == r.value_a);
    CHECK(back.value_b == r.value_b);
    CHECK(back.z == r.z);
    CHECK(back.pass == r.pass);
    CHECK(back.seed == 99);
    CHECK(back.note == r.note);
}

TEST_CASE("Laguerre oracle at n = 1 is linear") {
    for (int nu : {0, 2})
        CHECK(std::abs(oracle_laguerre(1, nu, cplx(0.3, 1.0)) - (double(nu + 1) - cplx(0.3, 1.0))) < 1e-14);
}

TEST_CASE("Stieltjes recurrence reproduces the Laguerre polynomial") {
    for (int n : {1, 2, 4})
        for (int nu : {0, 1, 2}) {
            const cplx s(-0.7, 1.2);
            cplx a = oracle_stieltjes(n, nu, s), b = oracle_laguerre(n, nu, s);
            CHECK(std::abs(a - b) < 1e-9 * std::abs(b));
        }
}

TEST_CASE("bosonic n = 1 oracle at a large source behaves like -1/s") {
    const cplx s(0.0, 1e4);
    CHECK(std::abs(oracle_bosonic_n1(0, s) * s + 1.0) < 1e-3);
    CHECK_THROWS_AS(oracle_bosonic_n1(0, cplx(1.0, 0.0)), InputError);
}

TEST_CASE("superspace agrees with the Laguerre oracle") {
    const DysonIndex d = DysonIndex::from_beta(2);
    for (int n : {2, 3}) {
        const cplx s(0.5, 1.5);
        cplx z = z_super(GaussianClosed{}, d, n, 1, SourcePack::from_squared({}, {s})).z_reduced;
        cplx o = oracle_laguerre(n, 1, s);
        CHECK(std::abs(z - o) < 1e-9 * std::abs(o));
    }
}

TEST_CASE("micro series oracle at ξ = 0 is one") {
    CHECK(std::abs(oracle_micro_series(2, 0.0) - 1.0) < 1e-15);
}

TEST_CASE("identity suite passes") {
    for (const auto& r : identity_suite(7)) {
        INFO(r.id << " " << r.note);
        CHECK(r.pass);
    }
}

TEST_CASE("calibration transfers to other sources") {
    Calibration c = calibrate(0, 1, 2, 0, cplx(0.0, 1.0), {cplx(0.5, 1.0), cplx(-0.3, 2.0)});
    CHECK(c.pass);
    CHECK(c.transfer_error < 1e-8);
}

TEST_CASE("unknown scenario is an input error") {
    CHECK_THROWS(run_scenario("no-such-scenario"));
    CHECK_FALSE(scenario_names().empty());
}
