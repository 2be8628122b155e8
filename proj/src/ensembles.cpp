#include "ensembles.hpp"

#include "errors.hpp"

#include <cmath>
#include <limits>
#include <numeric>

namespace chirmt {

DysonIndex DysonIndex::from_beta(int beta) {
    switch (beta) {
        case 1: return {1, 1, 2};
        case 2: return {2, 1, 1};
        case 4: return {4, 2, 1};
        default: throw InputError("Dyson index must be 1, 2 or 4, got " + std::to_string(beta));
    }
}

Eigen::MatrixXcd chiral_matrix(const ChiralSample& s) {
    const auto r = s.W.rows(), c = s.W.cols();
    Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(r + c, r + c);
    H.topRightCorner(r, c) = s.W;
    H.bottomLeftCorner(c, r) = s.W.adjoint();
    return H;
}

double NormWeight::log_p(double t) const {
    cplx v = deriv(t, 0);
    if (!(v.real() > 0.0)) return -std::numeric_limits<double>::infinity();
    return std::log(v.real());
}

NormWeight gaussian_norm(double scale) {
    return {"gaussian", [scale](cplx t, int k) { return std::pow(-scale, k) * std::exp(-scale * t); }};
}

NormWeight lorentz_norm(double gamma2, double mu) {
    return {"lorentz", [gamma2, mu](cplx t, int k) {
                cplx fall = 1.0;
                for (int i = 0; i < k; ++i) fall *= (-mu - i);
                return fall * std::pow(gamma2 + t, -mu - k);
            }};
}

NormWeight narrow_gaussian_norm(double center, double width) {
    return {"narrow-gaussian", [center, width](cplx t, int k) {
                // Hermite recursion for derivatives of exp(-y^2/2), y = (t-c)/w.
                cplx y = (t - center) / width;
                cplx h0 = 1.0, h1 = y;  // probabilists' He_k
                cplx hk = k == 0 ? h0 : h1;
                for (int j = 2; j <= k; ++j) {
                    cplx h2 = y * h1 - double(j - 1) * h0;
                    h0 = h1;
                    h1 = h2;
                    hk = h2;
                }
                double sign = (k % 2) ? -1.0 : 1.0;
                return sign * hk * std::exp(-0.5 * y * y) / std::pow(width, k);
            }};
}

std::string ensemble_name(const EnsembleSpec& spec) {
    struct V {
        std::string operator()(const GaussianSpec&) const { return "gaussian"; }
        std::string operator()(const LorentzSpec&) const { return "lorentz"; }
        std::string operator()(const QuarticSpec&) const { return "quartic"; }
        std::string operator()(const NormDependentSpec& s) const { return "norm-dependent:" + s.p.name; }
        std::string operator()(const FixedTraceSpec&) const { return "fixed-trace"; }
        std::string operator()(const CorrelatedSpec& s) const { return "correlated:" + ensemble_name(*s.base); }
    };
    return std::visit(V{}, spec);
}

bool has_direct_sampler(const EnsembleSpec& spec) {
    if (std::holds_alternative<GaussianSpec>(spec) || std::holds_alternative<FixedTraceSpec>(spec)) return true;
    if (auto* c = std::get_if<CorrelatedSpec>(&spec)) return has_direct_sampler(*c->base);
    return false;
}

std::pair<int, int> normalize_index(int n, int nu) {
    if (nu >= 0) return {n, nu};
    if (n + nu < 1) throw InputError("index too negative for the matrix size");
    return {n + nu, -nu};
}

namespace {

void check_sizes(int n, int nu) {
    if (n < 1) throw InputError("n must be >= 1");
    if (nu < 0) throw InputError("nu must be >= 0 after normalization");
}

// Quaternion a0 + i(a1 τ1 + a2 τ2 + a3 τ3) as [[z, w], [-conj w, conj z]].
void put_quaternion(Eigen::MatrixXcd& W, int i, int j, double a0, double a1, double a2, double a3) {
    cplx z(a0, a3), w(a2, a1);
    W(2 * i, 2 * j) = z;
    W(2 * i, 2 * j + 1) = w;
    W(2 * i + 1, 2 * j) = -std::conj(w);
    W(2 * i + 1, 2 * j + 1) = std::conj(z);
}

Eigen::MatrixXcd embed_quaternion_scalar(const Eigen::MatrixXcd& R) {
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(2 * R.rows(), 2 * R.cols());
    for (Eigen::Index i = 0; i < R.rows(); ++i)
        for (Eigen::Index j = 0; j < R.cols(); ++j) out(2 * i, 2 * j) = out(2 * i + 1, 2 * j + 1) = R(i, j);
    return out;
}

}  // namespace

ChiralSample sample_gaussian(DysonIndex d, int n, int nu, Rng& rng, double scale) {
    std::tie(n, nu) = normalize_index(n, nu);
    check_sizes(n, nu);
    if (scale <= 0.0) scale = n;
    ChiralSample s{d, n, nu, Eigen::MatrixXcd::Zero(d.gamma * n, d.gamma * (n + nu))};
    const int m = n + nu;
    if (d.beta == 1) {
        // exp(-scale w^2 / 2): variance 1/scale
        double sd = std::sqrt(1.0 / scale);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < m; ++j) s.W(i, j) = sd * rng.normal();
    } else if (d.beta == 2) {
        double sd = std::sqrt(0.5 / scale);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < m; ++j) s.W(i, j) = cplx(sd * rng.normal(), sd * rng.normal());
    } else {
        // tr over the embedding counts each quaternion twice: exp(-2 scale Σa^2)
        double sd = std::sqrt(0.25 / scale);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < m; ++j) {
                double a0 = sd * rng.normal(), a1 = sd * rng.normal();
                double a2 = sd * rng.normal(), a3 = sd * rng.normal();
                put_quaternion(s.W, i, j, a0, a1, a2, a3);
            }
    }
    return s;
}

double trace_wdw(const ChiralSample& s) { return s.W.squaredNorm(); }

ChiralSample sample_fixed_trace(DysonIndex d, int n, int nu, double c, Rng& rng) {
    if (!(c > 0.0)) throw InputError("fixed-trace constant must be positive");
    for (;;) {
        ChiralSample s = sample_gaussian(d, n, nu, rng);
        double t = trace_wdw(s);
        if (t <= 0.0) continue;
        s.W *= std::sqrt(c * s.n / t);
        return s;
    }
}

double correlation_jacobian_exponent(DysonIndex d, int n) {
    // Real dimension per column rescaling: β n rows' worth, halved for det C.
    return 0.5 * d.beta * n;
}

Correlated apply_correlation(const ChiralSample& s, const Eigen::MatrixXcd& C) {
    const int m = s.n + s.nu;
    if (C.rows() != m || C.cols() != m) throw InputError("correlation matrix must be (n+nu) x (n+nu)");
    if (!C.isApprox(C.adjoint(), 1e-12)) throw InputError("correlation matrix must be Hermitean");
    if (s.dyson.beta == 1 && C.imag().norm() > 0.0) throw InputError("beta=1 needs a real correlation matrix");
    Eigen::LLT<Eigen::MatrixXcd> llt(C);
    if (llt.info() != Eigen::Success) throw InputError("correlation matrix is not positive definite");
    Eigen::MatrixXcd L = llt.matrixL();
    Eigen::MatrixXcd R = L.adjoint();
    if (s.dyson.beta == 4) R = embed_quaternion_scalar(R);
    Correlated out{s, 0.0};
    out.sample.W = s.W * R;
    double logdet = 0.0;
    for (int i = 0; i < m; ++i) logdet += 2.0 * std::log(L(i, i).real());
    out.log_jacobian = correlation_jacobian_exponent(s.dyson, s.n) * logdet;
    return out;
}

ChiralSample sample_direct(const EnsembleSpec& spec, DysonIndex d, int n, int nu, Rng& rng) {
    if (auto* g = std::get_if<GaussianSpec>(&spec)) return sample_gaussian(d, n, nu, rng, g->scale);
    if (auto* f = std::get_if<FixedTraceSpec>(&spec)) return sample_fixed_trace(d, n, nu, f->c, rng);
    if (auto* c = std::get_if<CorrelatedSpec>(&spec))
        return apply_correlation(sample_direct(*c->base, d, n, nu, rng), c->C).sample;
    throw CapabilityError("no direct sampler for " + ensemble_name(spec));
}

double lorentz_min_mu(DysonIndex d, int n, int nu, int k2_minus_k1) {
    if (d.beta == 2) return 2.0 * n + nu - 1.0 + std::max(0, k2_minus_k1);
    return double(n + nu) / d.gamma_tilde + std::max(0, k2_minus_k1);
}

double log_density(const EnsembleSpec& spec, const ChiralSample& s) {
    struct V {
        const ChiralSample& s;
        double operator()(const GaussianSpec& g) const {
            double scale = g.scale > 0.0 ? g.scale : s.n;
            return -scale * trace_wdw(s) / s.dyson.gamma_tilde;
        }
        double operator()(const LorentzSpec& l) const {
            const auto m = s.W.cols();
            Eigen::MatrixXcd A = s.W.adjoint() * s.W;
            A.diagonal().array() += l.gamma * l.gamma;
            Eigen::LLT<Eigen::MatrixXcd> llt(A);
            double logdet = 0.0;
            for (Eigen::Index i = 0; i < m; ++i) logdet += 2.0 * std::log(llt.matrixLLT()(i, i).real());
            return -l.mu * logdet;
        }
        double operator()(const QuarticSpec& q) const {
            Eigen::MatrixXcd A = s.W * s.W.adjoint();
            return -q.alpha * A.squaredNorm() - q.alpha_hat * A.trace().real();
        }
        double operator()(const NormDependentSpec& p) const { return p.p.log_p(trace_wdw(s)); }
        double operator()(const FixedTraceSpec& f) const {
            double target = f.c * s.n;
            return std::abs(trace_wdw(s) - target) <= 1e-9 * target ? 0.0 : -std::numeric_limits<double>::infinity();
        }
        double operator()(const CorrelatedSpec& c) const {
            Eigen::LLT<Eigen::MatrixXcd> llt(c.C);
            if (llt.info() != Eigen::Success) throw InputError("correlation matrix is not positive definite");
            Eigen::MatrixXcd R = llt.matrixL().adjoint();
            if (s.dyson.beta == 4) R = embed_quaternion_scalar(R);
            ChiralSample g = s;
            g.W = s.W * R.inverse();
            return log_density(*c.base, g);
        }
    };
    double v = std::visit(V{s}, spec);
    if (std::isnan(v) || v == std::numeric_limits<double>::infinity())
        throw NumericError("log density is not finite for " + ensemble_name(spec));
    return v;
}

std::vector<double> to_coords(const ChiralSample& s) {
    std::vector<double> x;
    const int n = s.n, m = s.n + s.nu;
    if (s.dyson.beta == 1) {
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < m; ++j) x.push_back(s.W(i, j).real());
    } else if (s.dyson.beta == 2) {
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < m; ++j) {
                x.push_back(s.W(i, j).real());
                x.push_back(s.W(i, j).imag());
            }
    } else {
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < m; ++j) {
                cplx z = s.W(2 * i, 2 * j), w = s.W(2 * i, 2 * j + 1);
                x.push_back(z.real());
                x.push_back(w.imag());
                x.push_back(w.real());
                x.push_back(z.imag());
            }
    }
    return x;
}

void from_coords(const std::vector<double>& x, ChiralSample& s) {
    const int n = s.n, m = s.n + s.nu;
    std::size_t k = 0;
    if (s.dyson.beta == 1) {
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < m; ++j) s.W(i, j) = x[k++];
    } else if (s.dyson.beta == 2) {
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < m; ++j, k += 2) s.W(i, j) = cplx(x[k], x[k + 1]);
    } else {
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < m; ++j, k += 4) put_quaternion(s.W, i, j, x[k], x[k + 1], x[k + 2], x[k + 3]);
    }
}

MetropolisChain::MetropolisChain(EnsembleSpec spec, DysonIndex d, int n, int nu, ChainConfig cfg, Rng rng)
    : spec_(std::move(spec)), cfg_(cfg), rng_(std::move(rng)) {
    if (std::holds_alternative<FixedTraceSpec>(spec_))
        throw CapabilityError("fixed-trace weight is sampled exactly; MCMC is not used for it");
    cur_ = sample_gaussian(d, n, nu, rng_);
    logp_ = log_density(spec_, cur_);
    if (!std::isfinite(logp_)) throw NumericError("initial point outside the support");
    x_ = to_coords(cur_);
    prop_.resize(x_.size());
    // Start from the scale of the Gaussian draw.
    log_step_ = std::log(2.38 / std::sqrt(double(x_.size())) / std::sqrt(double(cur_.n)));

    // Robbins-Monro adaptation of log(step) during burn-in.
    long acc = 0;
    for (int t = 0; t < cfg_.burn_in; ++t) {
        bool a = sweep();
        acc += a;
        log_step_ += ((a ? 1.0 : 0.0) - cfg_.target_acceptance) / std::pow(t + 1.0, 0.6);
        if (log_step_ < std::log(1e-8)) throw NumericError("MCMC acceptance cannot be adapted (step collapsed)");
    }
    accepted_ = proposed_ = 0;

    diag_.step = std::exp(log_step_);
    if (cfg_.thinning > 0) {
        diag_.thinning = cfg_.thinning;
    } else {
        std::vector<double> series;
        series.reserve(cfg_.pilot);
        for (int t = 0; t < cfg_.pilot; ++t) {
            sweep();
            series.push_back(trace_wdw(cur_));
        }
        diag_.tau_pilot = integrated_autocorrelation(series);
        diag_.thinning = std::max(1, int(std::ceil(diag_.tau_pilot)));
    }
    double acc_rate = proposed_ > 0 ? double(accepted_) / proposed_ : 0.0;
    if (cfg_.thinning == 0 && acc_rate < 0.01) throw NumericError("MCMC acceptance below 0.01 after adaptation");
    diag_.acceptance = acc_rate;
}

bool MetropolisChain::sweep() {
    const double step = std::exp(log_step_);
    for (std::size_t i = 0; i < x_.size(); ++i) prop_[i] = x_[i] + step * rng_.normal();
    ChiralSample trial = cur_;
    from_coords(prop_, trial);
    double lp = log_density(spec_, trial);
    ++proposed_;
    if (std::log(rng_.uniform()) < lp - logp_) {
        x_.swap(prop_);
        cur_ = std::move(trial);
        logp_ = lp;
        ++accepted_;
        return true;
    }
    return false;
}

const ChiralSample& MetropolisChain::next() {
    for (int t = 0; t < diag_.thinning; ++t) sweep();
    diag_.acceptance = proposed_ > 0 ? double(accepted_) / proposed_ : 0.0;
    return cur_;
}

std::vector<ChiralSample> sample_mcmc(const EnsembleSpec& spec, DysonIndex d, int n, int nu, const ChainConfig& cfg,
                                      Rng rng, int count, ChainDiagnostics* diag) {
    MetropolisChain chain(spec, d, n, nu, cfg, std::move(rng));
    std::vector<ChiralSample> out;
    out.reserve(count);
    for (int i = 0; i < count; ++i) out.push_back(chain.next());
    if (diag) *diag = chain.diagnostics();
    return out;
}

double integrated_autocorrelation(const std::vector<double>& x) {
    const std::size_t N = x.size();
    if (N < 4) return 1.0;
    double mean = std::accumulate(x.begin(), x.end(), 0.0) / N;
    double c0 = 0.0;
    for (double v : x) c0 += (v - mean) * (v - mean);
    c0 /= N;
    if (c0 <= 0.0) return 1.0;
    double tau = 1.0;
    for (std::size_t t = 1; t < N / 2; ++t) {
        double ct = 0.0;
        for (std::size_t i = 0; i + t < N; ++i) ct += (x[i] - mean) * (x[i + t] - mean);
        ct /= N;
        tau += 2.0 * ct / c0;
        if (double(t) >= 5.0 * tau) break;
    }
    return std::max(tau, 1.0);
}

Eigen::MatrixXcd random_left_group_element(DysonIndex d, int n, Rng& rng) {
    if (d.beta == 1) {
        Eigen::MatrixXd G(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) G(i, j) = rng.normal();
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(G);
        return Eigen::MatrixXd(qr.householderQ()).cast<cplx>();
    }
    if (d.beta == 2) {
        Eigen::MatrixXcd G(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) G(i, j) = cplx(rng.normal(), rng.normal());
        Eigen::HouseholderQR<Eigen::MatrixXcd> qr(G);
        return qr.householderQ();
    }
    // exp(iH) with H Hermitean and quaternion self-dual is unitary symplectic.
    ChiralSample q{d, n, 0, Eigen::MatrixXcd::Zero(2 * n, 2 * n)};
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) put_quaternion(q.W, i, j, rng.normal(), rng.normal(), rng.normal(), rng.normal());
    Eigen::MatrixXcd H = q.W + q.W.adjoint();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H);
    Eigen::VectorXcd ph = (es.eigenvalues().cast<cplx>() * cplx(0.0, 1.0)).array().exp();
    return es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace chirmt
