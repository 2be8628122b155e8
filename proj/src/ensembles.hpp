#pragma once

#include "rng.hpp"

#include <Eigen/Dense>

#include <complex>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace chirmt {

using cplx = std::complex<double>;

struct DysonIndex {
    int beta = 2;
    int gamma = 1;
    int gamma_tilde = 1;

    static DysonIndex from_beta(int beta);
    bool operator==(const DysonIndex&) const = default;
};

// W is stored as a complex matrix in every class: real entries for β=1,
// and the 2x2 complex embedding of quaternions for β=4 (so W is
// γn x γ(n+ν) in all cases).
struct ChiralSample {
    DysonIndex dyson;
    int n = 0;
    int nu = 0;
    Eigen::MatrixXcd W;
};

// Hermitean chiral matrix [[0, W], [W^dag, 0]].
Eigen::MatrixXcd chiral_matrix(const ChiralSample& s);

// A scalar weight p(t) with derivatives deriv(t, k) = p^(k)(t), valid for
// complex t (the superspace side evaluates it off the real axis).
struct NormWeight {
    std::string name;
    std::function<cplx(cplx, int)> deriv;
    double log_p(double t) const;
};

NormWeight gaussian_norm(double scale);                       // exp(-scale t)
NormWeight lorentz_norm(double gamma2, double mu);            // (gamma2 + t)^(-mu)
NormWeight narrow_gaussian_norm(double center, double width); // exp(-(t-center)^2 / (2 width^2))

struct GaussianSpec { double scale = 0.0; };            // 0 means "use n"
struct LorentzSpec { double gamma = 1.0; double mu = 0.0; };
struct QuarticSpec { double alpha = 1.0; double alpha_hat = 0.0; };
struct NormDependentSpec { NormWeight p; };
struct FixedTraceSpec { double c = 1.0; };
struct CorrelatedSpec;

using EnsembleSpec =
    std::variant<GaussianSpec, LorentzSpec, QuarticSpec, NormDependentSpec, FixedTraceSpec, CorrelatedSpec>;

struct CorrelatedSpec {
    std::shared_ptr<EnsembleSpec> base;
    Eigen::MatrixXcd C;  // (n+ν) x (n+ν), positive definite
};

std::string ensemble_name(const EnsembleSpec& spec);
bool has_direct_sampler(const EnsembleSpec& spec);

// Negative index is mapped to the transposed problem: (n, ν) -> (n+ν, -ν).
std::pair<int, int> normalize_index(int n, int nu);

ChiralSample sample_gaussian(DysonIndex d, int n, int nu, Rng& rng, double scale = 0.0);
ChiralSample sample_fixed_trace(DysonIndex d, int n, int nu, double c, Rng& rng);

struct Correlated {
    ChiralSample sample;
    double log_jacobian = 0.0;
};
double correlation_jacobian_exponent(DysonIndex d, int n);
Correlated apply_correlation(const ChiralSample& s, const Eigen::MatrixXcd& C);

// Direct draw for the specs that admit one (Gaussian, fixed trace, and
// correlated on top of those).
ChiralSample sample_direct(const EnsembleSpec& spec, DysonIndex d, int n, int nu, Rng& rng);

double trace_wdw(const ChiralSample& s);
double log_density(const EnsembleSpec& spec, const ChiralSample& s);

// Lorentz normalizability bound for the matrix weight (see README).
double lorentz_min_mu(DysonIndex d, int n, int nu, int k2_minus_k1);

// Real coordinates of W respecting the β structure.
std::vector<double> to_coords(const ChiralSample& s);
void from_coords(const std::vector<double>& x, ChiralSample& s);

struct ChainConfig {
    int burn_in = 5000;
    int thinning = 0;       // 0 = ceil(integrated autocorrelation time from a pilot run)
    int pilot = 4000;
    double target_acceptance = 0.3;
};

struct ChainDiagnostics {
    double step = 0.0;
    double acceptance = 0.0;
    double tau_pilot = 0.0;
    int thinning = 1;
};

// Random-walk Metropolis over the real coordinates of W.
class MetropolisChain {
public:
    MetropolisChain(EnsembleSpec spec, DysonIndex d, int n, int nu, ChainConfig cfg, Rng rng);
    // Next emitted sample (after thinning).
    const ChiralSample& next();
    const ChainDiagnostics& diagnostics() const { return diag_; }

private:
    bool sweep();

    EnsembleSpec spec_;
    ChiralSample cur_;
    std::vector<double> x_, prop_;
    double logp_ = 0.0;
    double log_step_ = 0.0;
    ChainConfig cfg_;
    Rng rng_;
    ChainDiagnostics diag_;
    long accepted_ = 0, proposed_ = 0;
};

std::vector<ChiralSample> sample_mcmc(const EnsembleSpec& spec, DysonIndex d, int n, int nu, const ChainConfig& cfg,
                                      Rng rng, int count, ChainDiagnostics* diag = nullptr);

// Integrated autocorrelation time with Sokal's automatic window (c = 5).
double integrated_autocorrelation(const std::vector<double>& series);

// Element of the left symmetry group (orthogonal, unitary, unitary symplectic).
Eigen::MatrixXcd random_left_group_element(DysonIndex d, int n, Rng& rng);

}  // namespace chirmt
