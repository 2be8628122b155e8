#pragma once

#include "ensembles.hpp"
#include "grassmann.hpp"
#include "ordinary_mc.hpp"
#include "quadrature.hpp"
#include "supermatrix.hpp"

#include <variant>

namespace chirmt {

enum class CosetKind { Fermionic, Bosonic, Mixed };  // (0|1), (1|0), (1|1)

struct CosetPoint {
    CosetKind kind = CosetKind::Fermionic;
    double x = 1.0;       // BB entry, x > 0
    double theta = 0.0;   // FF entry r e^{iθ}
    double radius = 1.0;
};

// Generators used by the Mixed coset: 0 (upper right), 1 (lower left).
constexpr int kCosetGenerators = 2;

SuperMatrix coset_matrix(const CosetPoint& p);
CosetKind coset_for(int k1, int k2);

struct CosetContext {
    DysonIndex dyson = DysonIndex::from_beta(2);
    int n = 1;
    int nu = 0;
    int k1 = 0;
    int k2 = 1;
};

struct GaussianClosed { double scale = 0.0; };       // exp(-(scale/γ̃) str U), scale 0 means n
struct NormDependent1D { NormWeight p; };
struct LorentzClosed { double gamma = 1.0; double mu = 0.0; };
struct QuarticAux {
    double alpha = 1.0;
    double alpha_hat = 0.0;
    double rel_tol = 1e-12;
    int start_nodes = 64;
    int max_nodes = 1024;
};
struct UnquenchedDouble { double mass = 1.0; };

using SuperWeight = std::variant<GaussianClosed, NormDependent1D, LorentzClosed, QuarticAux, UnquenchedDouble>;

std::string weight_name(const SuperWeight& w);

Grassmann q_gaussian(const SuperMatrix& U, const CosetContext& c, double scale = 0.0);
Grassmann q_norm_dependent(const NormWeight& p, const SuperMatrix& U, const CosetContext& c, double rel_tol = 1e-10);
Grassmann q_lorentz(const SuperMatrix& U, const CosetContext& c, double gamma, double mu);
Grassmann q_quartic(const SuperMatrix& U, const CosetContext& c, const QuarticAux& q);
Grassmann evaluate_q(const SuperWeight& w, const SuperMatrix& U, const CosetContext& c);

// Radial exponent D in ∫ dr r^(D-1) p(r^2 + str U).
int radial_dimension(const CosetContext& c);

struct SuperQuadConfig {
    double rel_tol = 1e-10;
    double ff_radius = 0.0;     // 0 picks 1, or Γ²/2 for a Lorentz weight with Γ² <= 1
    int ff_start = 32;
    int bb_start = 32;
    int ff_cap = 1 << 12;
    int bb_cap = 1 << 11;
    // Unquenched double contour radii (0 = automatic).
    double v_radius = 0.0;
    double u_radius = 0.0;
};

struct SuperResult {
    cplx z_reduced = 0.0;    // normalized E[∏det(WW†-κ2²)/∏det(WW†-κ1²)]
    cplx z_chiral = 0.0;     // including the chiral prefactor
    cplx raw = 0.0;
    cplx raw_free = 0.0;
    double err_est = 0.0;    // relative, from the last doubling step
    int nodes = 0;
};

// Coset integral with sources divided by the same integral with the source
// superdeterminant dropped (normalization through the Gaussian prescription).
SuperResult z_super(const SuperWeight& w, DysonIndex d, int n, int nu, const SourcePack& src,
                    const SuperQuadConfig& cfg = {});

// Raw coset integral; `with_sources = false` drops sdet^{-n}(U - κ²).
IntegrationResult coset_integral(const SuperWeight& w, const CosetContext& c, const SourcePack& src,
                                 bool with_sources, const SuperQuadConfig& cfg);

// One-sided correlated Gaussian ensemble, C on the (n+ν) side, given the
// eigenvalues of C; (0|1) sources.
SuperResult z_super_correlated(const std::vector<double>& c_eigenvalues, int n, int nu, const SourcePack& src,
                               const SuperQuadConfig& cfg = {});

// Microscopic limit of the Gaussian ensemble. `xi` holds n·κ per source
// (one entry for (0|1) and (1|0), {ξ1, ξ2} for (1|1)).
struct MicroResult {
    cplx value = 0.0;
    double err_est = 0.0;
};

MicroResult z_micro(CosetKind kind, int nu, const std::vector<cplx>& xi, const SuperQuadConfig& cfg = {});

// Lorentz weight with μ = n + μ̃ and Γ² = G/n held in the microscopic scaling;
// (0|1) only. Normalized to 1 at ξ = 0.
MicroResult z_micro_lorentz_heavy(int nu, cplx xi, double G, double mu_tilde, const SuperQuadConfig& cfg = {});

// Partially quenched partition function with one flavor of mass m, (0|1)
// source, finite n.
SuperResult z_unquenched_super(double mass, int n, int nu, const SourcePack& src, const SuperQuadConfig& cfg = {});

// Microscopic partially quenched value for rescaled source ξ = nκ (mass-like:
// κ² = -(μ/n)², pass mu = |ξ|) and rescaled mass M = n m. Returned up to a
// μ-independent constant; compare ratios.
MicroResult z_unquenched_micro(int nu, double mu, double M, const SuperQuadConfig& cfg = {});

// L(φ) such that ∮ dφ/2π e^{iνφ} exp(L(φ)) reproduces z_unquenched_micro.
cplx chiral_lagrangian_split(double phi, double M, double mu, int nu, const SuperQuadConfig& cfg = {});

}  // namespace chirmt
