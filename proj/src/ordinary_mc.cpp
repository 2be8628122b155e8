#include "ordinary_mc.hpp"

#include "errors.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <numbers>
#include <thread>

namespace chirmt {

SourcePack SourcePack::from_squared(const std::vector<cplx>& s1, const std::vector<cplx>& s2) {
    SourcePack p;
    for (cplx s : s1) p.kappa1.push_back(std::sqrt(s));
    for (cplx s : s2) p.kappa2.push_back(std::sqrt(s));
    return p;
}

std::vector<cplx> SourcePack::squared1() const {
    std::vector<cplx> v;
    for (cplx k : kappa1) v.push_back(k * k);
    return v;
}

std::vector<cplx> SourcePack::squared2() const {
    std::vector<cplx> v;
    for (cplx k : kappa2) v.push_back(k * k);
    return v;
}

std::vector<int> SourcePack::L() const {
    std::vector<int> v;
    for (cplx k : kappa1) v.push_back(k.imag() > 0 ? 1 : -1);
    return v;
}

std::vector<int> SourcePack::Ltilde() const {
    std::vector<int> v;
    for (cplx k : kappa1) v.push_back((k * k).imag() >= 0 ? 1 : -1);
    return v;
}

void SourcePack::validate() const {
    for (cplx k : kappa1)
        if (k.imag() == 0.0) throw InputError("bosonic source on the real axis is not allowed");
}

void SourcePack::validate_superspace(DysonIndex d, int n) const {
    validate();
    if (d.gamma_tilde * k1() > d.gamma_tilde * k2() + n)
        throw InputError("superspace needs gt*k1 <= gt*k2 + n");
}

std::optional<LogValue> log_det(const Eigen::MatrixXcd& A) {
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(A);
    const auto& M = lu.matrixLU();
    LogValue v;
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
        cplx d = M(i, i);
        double a = std::abs(d);
        if (a == 0.0 || !std::isfinite(a)) return std::nullopt;
        v.log_abs += std::log(a);
        v.phase += std::arg(d);
    }
    if (lu.permutationP().determinant() < 0) v.phase += std::numbers::pi;
    return v;
}

namespace {

RatioValue ratio_from(const Eigen::MatrixXcd& base, const std::vector<cplx>& num, const std::vector<cplx>& den) {
    LogValue acc;
    Eigen::MatrixXcd A;
    const auto id = Eigen::MatrixXcd::Identity(base.rows(), base.cols());
    for (cplx k : num) {
        A = base - k * id;
        auto ld = log_det(A);
        if (!ld) return {0.0, false};  // a vanishing numerator is a legitimate zero
        acc += *ld;
    }
    for (cplx k : den) {
        A = base - k * id;
        auto ld = log_det(A);
        if (!ld) return {0.0, true};
        acc -= *ld;
    }
    return {acc.exp(), false};
}

}  // namespace

RatioValue char_ratio(const ChiralSample& s, const SourcePack& src) {
    return ratio_from(chiral_matrix(s), src.kappa2, src.kappa1);
}

RatioValue squared_ratio(const ChiralSample& s, const SourcePack& src) {
    Eigen::MatrixXcd WW = s.W * s.W.adjoint();
    return ratio_from(WW, src.squared2(), src.squared1());
}

cplx chiral_prefactor(DysonIndex d, int n, int nu, const SourcePack& src) {
    // sdet κ is (∏κ1/∏κ2)^{γγ̃}; its power -ν/γ̃ is the integer power -γν.
    int sign_exp = d.gamma * (n + nu) * (src.k2() - src.k1());
    cplx num = 1.0, den = 1.0;
    for (cplx k : src.kappa2) num *= k;
    for (cplx k : src.kappa1) den *= k;
    cplx r = 1.0;
    for (int i = 0; i < d.gamma * nu; ++i) r *= num / den;
    return (sign_exp % 2 == 0) ? r : -r;
}

void WelfordChunk::push(cplx v) {
    ++count;
    double dr = v.real() - mean_re, di = v.imag() - mean_im;
    mean_re += dr / count;
    mean_im += di / count;
    m2_re += dr * (v.real() - mean_re);
    m2_im += di * (v.imag() - mean_im);
}

void MCEstimate::finalize() {
    std::sort(chunks.begin(), chunks.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
    WelfordChunk acc;
    double n_eff = 0.0;
    for (const auto& c : chunks) {
        if (c.count == 0) continue;
        n_eff += c.count / c.tau;
        if (acc.count == 0) {
            acc = c;
            continue;
        }
        // Chan et al. pairwise combination.
        double na = acc.count, nb = c.count, nt = na + nb;
        double dr = c.mean_re - acc.mean_re, di = c.mean_im - acc.mean_im;
        acc.mean_re += dr * nb / nt;
        acc.mean_im += di * nb / nt;
        acc.m2_re += c.m2_re + dr * dr * na * nb / nt;
        acc.m2_im += c.m2_im + di * di * na * nb / nt;
        acc.count += c.count;
    }
    n_samples = acc.count;
    mean = cplx(acc.mean_re, acc.mean_im);
    if (acc.count > 1) {
        double var_re = acc.m2_re / (acc.count - 1), var_im = acc.m2_im / (acc.count - 1);
        std_re = std::sqrt(var_re / n_eff);
        std_im = std::sqrt(var_im / n_eff);
        std_error = std::sqrt((var_re + var_im) / n_eff);
    }
    ess = n_eff;
    unreliable = ess < 100.0;
}

MCEstimate MCEstimate::merge(const MCEstimate& a, const MCEstimate& b) {
    MCEstimate m = a;
    for (const auto& c : b.chunks) {
        for (const auto& e : m.chunks)
            if (e.id == c.id) throw InputError("merging estimates that share a chunk id");
        m.chunks.push_back(c);
    }
    m.rejected = a.rejected + b.rejected;
    m.finalize();
    return m;
}

namespace {

template <class Fn>
void parallel_for(int tasks, int threads, Fn fn) {
    if (threads <= 1 || tasks <= 1) {
        for (int t = 0; t < tasks; ++t) fn(t);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    std::exception_ptr err;
    std::mutex err_mu;
    for (int w = 0; w < std::min(threads, tasks); ++w)
        pool.emplace_back([&] {
            for (int t; (t = next++) < tasks;) {
                try {
                    fn(t);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(err_mu);
                    if (!err) err = std::current_exception();
                }
            }
        });
    for (auto& th : pool) th.join();
    if (err) std::rethrow_exception(err);
}

RatioValue observable(const ChiralSample& s, const SourcePack& src, RatioForm form) {
    return form == RatioForm::Chiral ? char_ratio(s, src) : squared_ratio(s, src);
}

void check_spec(const EnsembleSpec& spec, DysonIndex d, int n, int nu, const SourcePack& src) {
    src.validate();
    if (auto* l = std::get_if<LorentzSpec>(&spec)) {
        double need = lorentz_min_mu(d, n, nu, src.k2() - src.k1());
        if (!(l->mu > need))
            throw PreconditionError("Lorentz weight with mu=" + std::to_string(l->mu) +
                                    " is not normalizable with these sources (needs mu > " +
                                    std::to_string(need) + ")");
    }
    if (auto* q = std::get_if<QuarticSpec>(&spec))
        if (!(q->alpha > 0.0)) throw InputError("quartic weight needs alpha > 0");
}

}  // namespace

MCEstimate estimate_Z(const EnsembleSpec& spec, DysonIndex d, int n, int nu, const SourcePack& src, long n_samples,
                      std::uint64_t seed, const MCOptions& opt) {
    std::tie(n, nu) = normalize_index(n, nu);
    check_spec(spec, d, n, nu, src);
    if (n_samples < 2) throw InputError("need at least 2 samples");
    MCEstimate est;
    est.seed = seed;
    Rng root(seed);

    if (has_direct_sampler(spec)) {
        const int cs = std::max(1, opt.chunk_size);
        const int n_chunks = int((n_samples + cs - 1) / cs);
        std::vector<WelfordChunk> chunks(n_chunks);
        std::vector<long> rej(n_chunks, 0);
        parallel_for(n_chunks, opt.threads, [&](int c) {
            std::uint64_t id = opt.first_chunk + c;
            Rng rng = root.split(id);
            long todo = std::min<long>(cs, n_samples - long(c) * cs);
            WelfordChunk w;
            w.id = id;
            for (long i = 0; i < todo; ++i) {
                ChiralSample s = sample_direct(spec, d, n, nu, rng);
                RatioValue r = observable(s, src, opt.form);
                if (r.rejected) {
                    ++rej[c];
                    continue;
                }
                w.push(r.value);
            }
            chunks[c] = w;
        });
        est.chunks = std::move(chunks);
        for (long r : rej) est.rejected += r;
    } else {
        const int nc = std::max(1, opt.n_chains);
        std::vector<WelfordChunk> chunks(nc);
        std::vector<long> rej(nc, 0);
        parallel_for(nc, opt.threads, [&](int c) {
            std::uint64_t id = opt.first_chunk + c;
            MetropolisChain chain(spec, d, n, nu, opt.chain, root.split(id));
            long todo = n_samples / nc + (c < n_samples % nc ? 1 : 0);
            std::vector<double> re, im;
            re.reserve(todo);
            im.reserve(todo);
            WelfordChunk w;
            w.id = id;
            for (long i = 0; i < todo; ++i) {
                RatioValue r = observable(chain.next(), src, opt.form);
                if (r.rejected) {
                    ++rej[c];
                    continue;
                }
                w.push(r.value);
                re.push_back(r.value.real());
                im.push_back(r.value.imag());
            }
            w.tau = std::max(integrated_autocorrelation(re), integrated_autocorrelation(im));
            chunks[c] = w;
        });
        est.chunks = std::move(chunks);
        for (long r : rej) est.rejected += r;
        est.note = "mcmc";
    }
    est.finalize();
    if (est.unreliable) est.note += (est.note.empty() ? "" : ";") + std::string("ess<100");
    return est;
}

MCEstimate estimate_Z_correlated(const EnsembleSpec& base, const Eigen::MatrixXcd& C, DysonIndex d, int n, int nu,
                                 const SourcePack& src, long n_samples, std::uint64_t seed, const MCOptions& opt) {
    CorrelatedSpec cs{std::make_shared<EnsembleSpec>(base), C};
    return estimate_Z(EnsembleSpec(cs), d, n, nu, src, n_samples, seed, opt);
}

MCEstimate estimate_Z_unquenched(const std::vector<double>& masses, DysonIndex d, int n, int nu,
                                 const SourcePack& src, long n_samples, std::uint64_t seed, const MCOptions& opt) {
    std::tie(n, nu) = normalize_index(n, nu);
    if (masses.empty()) throw InputError("unquenched estimate needs at least one flavor");
    src.validate();
    // Enough chunks for a meaningful jackknife.
    const int cs = int(std::max<long>(1, std::min<long>(opt.chunk_size, n_samples / 32)));
    const int n_chunks = int((n_samples + cs - 1) / cs);
    std::vector<cplx> num(n_chunks, 0.0);
    std::vector<double> den(n_chunks, 0.0);
    std::vector<long> cnt(n_chunks, 0), rej(n_chunks, 0);
    Rng root(seed);
    parallel_for(n_chunks, opt.threads, [&](int c) {
        Rng rng = root.split(opt.first_chunk + c);
        long todo = std::min<long>(cs, n_samples - long(c) * cs);
        for (long i = 0; i < todo; ++i) {
            ChiralSample s = sample_gaussian(d, n, nu, rng);
            RatioValue r = observable(s, src, opt.form);
            if (r.rejected) {
                ++rej[c];
                continue;
            }
            Eigen::MatrixXcd A = s.W.adjoint() * s.W;
            double w = 1.0;
            for (double m : masses) {
                Eigen::MatrixXcd B = A;
                B.diagonal().array() += m * m;
                w *= B.determinant().real();
            }
            num[c] += r.value * w;
            den[c] += w;
            ++cnt[c];
        }
    });
    cplx tn = 0.0;
    double td = 0.0;
    long total = 0;
    for (int c = 0; c < n_chunks; ++c) tn += num[c], td += den[c], total += cnt[c];
    MCEstimate est;
    est.seed = seed;
    est.mean = tn / td;
    est.n_samples = total;
    for (long r : rej) est.rejected += r;
    // Delete-one-chunk jackknife.
    std::vector<cplx> theta(n_chunks);
    cplx tbar = 0.0;
    for (int c = 0; c < n_chunks; ++c) {
        theta[c] = (tn - num[c]) / (td - den[c]);
        tbar += theta[c];
    }
    tbar /= double(n_chunks);
    double vr = 0.0, vi = 0.0;
    for (int c = 0; c < n_chunks; ++c) {
        vr += std::norm(theta[c].real() - tbar.real());
        vi += std::norm(theta[c].imag() - tbar.imag());
    }
    double f = double(n_chunks - 1) / n_chunks;
    est.std_re = std::sqrt(f * vr);
    est.std_im = std::sqrt(f * vi);
    est.std_error = std::sqrt(f * (vr + vi));
    est.ess = double(total);
    est.note = "ratio-jackknife";
    return est;
}

std::vector<double> wishart_eigenvalues(const ChiralSample& s) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(s.W * s.W.adjoint(), Eigen::EigenvaluesOnly);
    std::vector<double> ev(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
    return ev;
}

Histogram spectral_density(const EnsembleSpec& spec, DysonIndex d, int n, int nu, long n_samples, int bins,
                           std::uint64_t seed, const DensityOptions& opt) {
    std::tie(n, nu) = normalize_index(n, nu);
    if (bins < 1) throw InputError("need at least one bin");
    std::vector<ChiralSample> samples;
    if (has_direct_sampler(spec)) {
        Rng rng(seed);
        for (long i = 0; i < n_samples; ++i) samples.push_back(sample_direct(spec, d, n, nu, rng));
    } else {
        samples = sample_mcmc(spec, d, n, nu, ChainConfig{}, Rng(seed), int(n_samples));
    }
    Histogram h;
    h.n_samples = n_samples;
    std::vector<double> vals;
    // Microscopic units: ζ = 2nλ for the chiral eigenvalues λ >= 0, and
    // its square for the Wishart eigenvalues.
    const double scale = opt.microscopic ? (opt.of == SpectrumOf::Chiral ? 2.0 * n : 4.0 * n * n) : 1.0;
    for (const auto& s : samples) {
        if (opt.of == SpectrumOf::Wishart) {
            for (double e : wishart_eigenvalues(s)) vals.push_back(e * scale);
        } else {
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(chiral_matrix(s), Eigen::EigenvaluesOnly);
            for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
                double e = es.eigenvalues()[i];
                if (std::abs(e) < opt.zero_tol) {
                    ++h.zero_modes;
                    continue;
                }
                if (opt.microscopic && e < 0.0) continue;
                vals.push_back(e * scale);
            }
        }
    }
    double lo = opt.lo, hi = opt.hi;
    if (!(hi > lo)) {
        if (vals.empty()) throw NumericError("no eigenvalues to histogram");
        auto [mn, mx] = std::minmax_element(vals.begin(), vals.end());
        lo = *mn;
        hi = *mx;
        double pad = 1e-9 * std::max(1.0, hi - lo);
        lo -= pad;
        hi += pad;
    }
    const double width = (hi - lo) / bins;
    for (int b = 0; b <= bins; ++b) h.edges.push_back(lo + b * width);
    std::vector<long> counts(bins, 0);
    for (double v : vals) {
        if (v < lo || v >= hi) {
            ++h.outside;
            continue;
        }
        int b = std::min(bins - 1, int((v - lo) / width));
        ++counts[b];
        ++h.counted;
    }
    h.density.resize(bins);
    h.per_matrix.resize(bins);
    for (int b = 0; b < bins; ++b) {
        h.density[b] = h.counted ? counts[b] / (double(h.counted) * width) : 0.0;
        h.per_matrix[b] = counts[b] / (double(n_samples) * width);
    }
    return h;
}

double microscopic_density_reference(int nu, double zeta) {
    if (nu < 0) throw InputError("nu must be >= 0");
    if (zeta <= 0.0) return 0.0;
    const double a = std::cyl_bessel_j(double(nu), zeta);
    const double b = std::cyl_bessel_j(double(nu + 1), zeta);
    // J_{ν-1} with J_{-1} = -J_1
    const double c = nu == 0 ? -std::cyl_bessel_j(1.0, zeta) : std::cyl_bessel_j(double(nu - 1), zeta);
    return 0.5 * zeta * (a * a - b * c);
}

}  // namespace chirmt
