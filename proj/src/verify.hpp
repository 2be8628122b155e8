#pragma once

#include "ordinary_mc.hpp"
#include "superspace.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace chirmt {

// One pairwise comparison. Stochastic pairs pass on |z| <= threshold,
// deterministic pairs on rel_err <= tol.
struct ComparisonReport {
    std::string id;
    std::string method_a, method_b;
    cplx value_a = 0.0, value_b = 0.0;
    double err_a = 0.0, err_b = 0.0;
    bool stochastic = false;
    double z = 0.0;
    double rel_err = 0.0;
    double threshold = 3.0;  // σ for stochastic pairs, relative tolerance otherwise
    bool pass = false;
    double runtime_s = 0.0;
    std::uint64_t seed = 0;
    std::string note;

    std::string to_json() const;
    static ComparisonReport from_json(const std::string& s);
};

ComparisonReport compare_stochastic(std::string id, std::string a, cplx va, double ea, std::string b, cplx vb,
                                    double eb, double sigma = 3.0);
ComparisonReport compare_deterministic(std::string id, std::string a, cplx va, std::string b, cplx vb,
                                       double tol = 1e-9);
// Failure entry for a method that threw.
ComparisonReport failed_report(std::string id, std::string what);

// ---- oracles -------------------------------------------------------------

// E det(WW† - s) for the Gaussian ensemble exp(-n tr WW†), β=2, from the
// three-term recurrence of monic Laguerre polynomials.
cplx oracle_laguerre(int n, int nu, cplx s);
// Same polynomial, but with recurrence coefficients obtained from the
// eigenvalue measure x^ν e^{-nx} by the discretized Stieltjes procedure.
cplx oracle_stieltjes(int n, int nu, cplx s);
// E[1/(x - s)] for n = 1 by a 1D quadrature of the eigenvalue density.
cplx oracle_bosonic_n1(int nu, cplx s);
// Power series ν! Σ_b (-ξ²)^b / (b! (b+ν)!) of the fermionic microscopic
// partition function.
cplx oracle_micro_series(int nu, cplx xi);

// Brute-force estimate of the quartic superfunction at scalar û for the
// (0|1) coset: Gaussian draws of the auxiliary rectangular matrix, exact
// Berezin integration over its Grassmann partner. Values at each û share
// the samples; ratios to ref_u are returned with delta-method errors.
struct QuarticBruteForce {
    std::vector<cplx> ratio;
    std::vector<double> err;
};
QuarticBruteForce oracle_quartic_bruteforce(int n, int nu, double alpha, double alpha_hat,
                                            const std::vector<cplx>& u, cplx ref_u, long samples,
                                            std::uint64_t seed);

// ---- calibration -----------------------------------------------------------

struct Calibration {
    cplx constant = 1.0;         // oracle / z_super at the reference source
    double transfer_error = 0.0; // max relative error after calibration at the check sources
    bool pass = false;
};

// Gaussian (0|1) against the monic polynomial, (1|0) against the 1D
// integral (n = 1), (1|1) at the supersymmetric point.
Calibration calibrate(int k1, int k2, int n, int nu, cplx ref_kappa2, const std::vector<cplx>& check_kappa2,
                      double tol = 1e-8);

// ---- suites ----------------------------------------------------------------

struct ScenarioConfig {
    std::uint64_t seed = 1;
    long samples = 100000;
    int threads = 1;
    double sigma = 3.0;
};

struct ScenarioResult {
    std::string name;
    std::vector<ComparisonReport> reports;
    bool pass = false;
    std::string summary;
    double runtime_s = 0.0;

    std::string to_json() const;
};

std::vector<ComparisonReport> identity_suite(std::uint64_t seed);

// Registered scenarios, one per acceptance criterion.
const std::vector<std::string>& scenario_names();
ScenarioResult run_scenario(const std::string& name, const ScenarioConfig& cfg = {});

}  // namespace chirmt
