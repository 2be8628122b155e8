#pragma once

#include "ensembles.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace chirmt {

// Source variables. κ values are stored unsquared; the squared forms are
// derived. from_squared() picks the principal square root.
struct SourcePack {
    std::vector<cplx> kappa1;  // bosonic (denominator) sources
    std::vector<cplx> kappa2;  // fermionic (numerator) sources

    static SourcePack from_squared(const std::vector<cplx>& s1, const std::vector<cplx>& s2);

    int k1() const { return int(kappa1.size()); }
    int k2() const { return int(kappa2.size()); }
    std::vector<cplx> squared1() const;
    std::vector<cplx> squared2() const;
    std::vector<int> L() const;       // sign Im κ1
    std::vector<int> Ltilde() const;  // sign Im κ1^2

    // κ1 off the real axis; for superspace runs also γ̃ k1 <= γ̃ k2 + n.
    void validate() const;
    void validate_superspace(DysonIndex d, int n) const;
};

// Log-modulus plus accumulated phase; avoids overflow in long products.
struct LogValue {
    double log_abs = 0.0;
    double phase = 0.0;
    cplx exp() const { return std::polar(std::exp(log_abs), phase); }
    LogValue& operator+=(const LogValue& o) { log_abs += o.log_abs; phase += o.phase; return *this; }
    LogValue& operator-=(const LogValue& o) { log_abs -= o.log_abs; phase -= o.phase; return *this; }
};

// log det via partial-pivot LU; std::nullopt if a pivot vanishes.
std::optional<LogValue> log_det(const Eigen::MatrixXcd& A);

struct RatioValue {
    cplx value;
    bool rejected = false;
};

// ∏ det(Hχ - κ2_j) / ∏ det(Hχ - κ1_j), from the full chiral matrix.
RatioValue char_ratio(const ChiralSample& s, const SourcePack& src);
// ∏ det(WW† - κ2_j^2) / ∏ det(WW† - κ1_j^2): the reduced (squared) form.
RatioValue squared_ratio(const ChiralSample& s, const SourcePack& src);
// (-1)^{γ(n+ν)(k2-k1)} sdet^{-ν/γ̃} κ, exact integer powers.
cplx chiral_prefactor(DysonIndex d, int n, int nu, const SourcePack& src);

// Streaming estimate of a complex mean. Samples are processed in chunks
// that each own an RNG stream; statistics are reduced over chunks in id
// order, so merging split runs reproduces a single run bit for bit.
struct WelfordChunk {
    std::uint64_t id = 0;
    long count = 0;
    double mean_re = 0.0, mean_im = 0.0;
    double m2_re = 0.0, m2_im = 0.0;
    double tau = 1.0;  // integrated autocorrelation time of the chunk's series

    void push(cplx v);
};

struct MCEstimate {
    cplx mean = 0.0;
    double std_error = 0.0;  // standard error of the complex mean
    double std_re = 0.0, std_im = 0.0;
    long n_samples = 0;
    std::uint64_t seed = 0;
    double ess = 0.0;
    long rejected = 0;
    bool unreliable = false;
    std::string note;
    std::vector<WelfordChunk> chunks;

    // Recompute mean/stderr/n_samples from the chunk list.
    void finalize();
    static MCEstimate merge(const MCEstimate& a, const MCEstimate& b);
};

enum class RatioForm { Reduced, Chiral };

struct MCOptions {
    RatioForm form = RatioForm::Reduced;
    int chunk_size = 4096;
    int threads = 1;
    ChainConfig chain;
    int n_chains = 4;
    // Chunk ids [first_chunk, first_chunk + n_chunks) are evaluated; used to
    // run a sub-range of a larger job.
    std::uint64_t first_chunk = 0;
};

MCEstimate estimate_Z(const EnsembleSpec& spec, DysonIndex d, int n, int nu, const SourcePack& src, long n_samples,
                      std::uint64_t seed, const MCOptions& opt = {});

MCEstimate estimate_Z_correlated(const EnsembleSpec& base, const Eigen::MatrixXcd& C, DysonIndex d, int n, int nu,
                                 const SourcePack& src, long n_samples, std::uint64_t seed,
                                 const MCOptions& opt = {});

// Ratio estimator E[ratio · ∏ det(W†W + m²)] / E[∏ det(W†W + m²)] over one
// Gaussian sample set, with delete-one-chunk jackknife errors.
MCEstimate estimate_Z_unquenched(const std::vector<double>& masses, DysonIndex d, int n, int nu,
                                 const SourcePack& src, long n_samples, std::uint64_t seed,
                                 const MCOptions& opt = {});

struct Histogram {
    std::vector<double> edges;
    std::vector<double> density;  // integrates to 1 over the edges
    std::vector<double> per_matrix;  // counts per matrix per unit length
    long counted = 0;
    long outside = 0;
    long zero_modes = 0;          // total over all samples
    long n_samples = 0;
};

enum class SpectrumOf { Chiral, Wishart };

struct DensityOptions {
    SpectrumOf of = SpectrumOf::Wishart;
    bool microscopic = false;
    double lo = 0.0, hi = 0.0;  // hi <= lo picks the range from the data
    double zero_tol = 1e-9;
};

Histogram spectral_density(const EnsembleSpec& spec, DysonIndex d, int n, int nu, long n_samples, int bins,
                           std::uint64_t seed, const DensityOptions& opt = {});

// Microscopic density of the positive chiral eigenvalues for β=2 in units
// ζ = 2nλ of the Gaussian ensemble exp(-n tr WW†); tends to 1/π.
double microscopic_density_reference(int nu, double zeta);

// Eigenvalues of WW† (γn of them), ascending.
std::vector<double> wishart_eigenvalues(const ChiralSample& s);

}  // namespace chirmt
