#include "doctest.h"
#include "chirmt/chirmt.h"

#include <cmath>
#include <cstring>
#include <string>

namespace {
struct Session {
    chirmt_session* s = nullptr;
    Session() { REQUIRE(chirmt_session_create(&s) == CHIRMT_OK); }
    ~Session() { chirmt_session_destroy(s); }
};
}  // namespace

TEST_CASE("session lifecycle and setters") {
    Session h;
    CHECK(chirmt_session_set_threads(h.s, 1) == CHIRMT_OK);
    CHECK(chirmt_session_set_threads(h.s, 0) == CHIRMT_E_INPUT);
    CHECK(std::strlen(chirmt_last_error()) > 0);
    CHECK(chirmt_session_set_rel_tol(h.s, 1e-9) == CHIRMT_OK);
    CHECK(chirmt_session_set_ratio_form(h.s, 0) == CHIRMT_OK);
    CHECK(std::strlen(chirmt_version()) > 0);
    chirmt_session_destroy(nullptr);
}

TEST_CASE("z_super through the C interface") {
    Session h;
    chirmt_complex k2{0.0, 2.0};
    chirmt_problem p{2, 1, 0, 0, 1, nullptr, &k2, 0};
    chirmt_ensemble e{CHIRMT_GAUSSIAN, 0.0, 0.0};
    chirmt_super_result r{};
    REQUIRE(chirmt_z_super(h.s, &p, &e, &r) == CHIRMT_OK);
    // κ = 2i, κ² = -4, so 1 - κ² = 5.
    CHECK(std::abs(r.z_reduced.re - 5.0) < 1e-12);
    CHECK(std::abs(r.z_reduced.im) < 1e-12);
}

TEST_CASE("bad input maps to status codes") {
    Session h;
    chirmt_complex k2{0.0, 2.0};
    chirmt_ensemble e{CHIRMT_GAUSSIAN, 0.0, 0.0};
    chirmt_super_result r{};
    chirmt_problem neg{2, -1, 0, 0, 1, nullptr, &k2, 0};
    CHECK(chirmt_z_super(h.s, &neg, &e, &r) == CHIRMT_E_INPUT);
    chirmt_problem b1{1, 1, 0, 0, 1, nullptr, &k2, 0};
    CHECK(chirmt_z_super(h.s, &b1, &e, &r) == CHIRMT_E_CAPABILITY);
    CHECK(chirmt_z_super(nullptr, &neg, &e, &r) == CHIRMT_E_INPUT);
    chirmt_ensemble lor{CHIRMT_LORENTZ, 1.0, 5.0};
    chirmt_problem p4{2, 4, 0, 0, 1, nullptr, &k2, 0};
    CHECK(chirmt_z_super(h.s, &p4, &lor, &r) == CHIRMT_E_PRECONDITION);
}

TEST_CASE("ordinary Monte Carlo through the C interface") {
    Session h;
    chirmt_complex k2{0.0, 1.0};
    chirmt_problem p{2, 1, 0, 0, 1, nullptr, &k2, 0};
    chirmt_ensemble e{CHIRMT_GAUSSIAN, 0.0, 0.0};
    chirmt_mc_result r{};
    REQUIRE(chirmt_z_ordinary(h.s, &p, &e, 20000, 5, &r) == CHIRMT_OK);
    CHECK(r.n_samples == 20000);
    CHECK(std::abs(r.value.re - 2.0) < 5 * r.std_error + 1e-12);
}

TEST_CASE("verify returns JSON that must be freed") {
    Session h;
    char* json = nullptr;
    int passed = 0;
    REQUIRE(chirmt_verify(h.s, "identities", 7, 0, &json, &passed) == CHIRMT_OK);
    REQUIRE(json != nullptr);
    CHECK(passed == 1);
    CHECK(std::string(json).find('{') != std::string::npos);
    chirmt_free_string(json);
    CHECK(chirmt_verify(h.s, "bogus", 7, 0, &json, &passed) == CHIRMT_E_INPUT);
    CHECK(chirmt_scenario_count() > 0);
    CHECK(chirmt_scenario_name(-1) == nullptr);
}
