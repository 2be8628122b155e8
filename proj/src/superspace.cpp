#include "superspace.hpp"

#include "errors.hpp"
#include "quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace chirmt {

namespace {

constexpr cplx I{0.0, 1.0};

cplx on_circle(double r, double theta) { return std::polar(r, theta); }

void require_beta2(DysonIndex d) {
    if (d.beta != 2) throw CapabilityError("superspace quadrature is implemented for beta = 2 only");
}

}  // namespace

CosetKind coset_for(int k1, int k2) {
    if (k1 == 0 && k2 == 1) return CosetKind::Fermionic;
    if (k1 == 1 && k2 == 0) return CosetKind::Bosonic;
    if (k1 == 1 && k2 == 1) return CosetKind::Mixed;
    throw CapabilityError("coset quadrature supports (k1|k2) in {(0|1), (1|0), (1|1)}");
}

SuperMatrix coset_matrix(const CosetPoint& p) {
    switch (p.kind) {
        case CosetKind::Fermionic: {
            SuperMatrix U(Dims{0, 1}, 0);
            U(0, 0) = Grassmann(0, on_circle(p.radius, p.theta));
            return U;
        }
        case CosetKind::Bosonic: {
            if (!(p.x > 0.0)) throw InputError("bosonic coset needs x > 0");
            SuperMatrix U(Dims{1, 0}, 0);
            U(0, 0) = Grassmann(0, p.x);
            return U;
        }
        case CosetKind::Mixed: {
            if (!(p.x > 0.0)) throw InputError("bosonic coset needs x > 0");
            SuperMatrix U(Dims{1, 1}, kCosetGenerators);
            U(0, 0) = Grassmann(kCosetGenerators, p.x);
            U(0, 1) = Grassmann::generator(kCosetGenerators, 0);
            U(1, 0) = Grassmann::generator(kCosetGenerators, 1);
            U(1, 1) = Grassmann(kCosetGenerators, on_circle(p.radius, p.theta));
            return U;
        }
    }
    throw InputError("unknown coset kind");
}

std::string weight_name(const SuperWeight& w) {
    struct V {
        std::string operator()(const GaussianClosed&) const { return "gaussian"; }
        std::string operator()(const NormDependent1D& p) const { return "norm-dependent:" + p.p.name; }
        std::string operator()(const LorentzClosed&) const { return "lorentz"; }
        std::string operator()(const QuarticAux&) const { return "quartic"; }
        std::string operator()(const UnquenchedDouble&) const { return "unquenched"; }
    };
    return std::visit(V{}, w);
}

int radial_dimension(const CosetContext& c) {
    return c.dyson.beta * (c.n + c.dyson.gamma_tilde * (c.k2 - c.k1)) * (c.n + c.nu);
}

Grassmann q_gaussian(const SuperMatrix& U, const CosetContext& c, double scale) {
    if (scale <= 0.0) scale = c.n;
    return gexp(str(U) * cplx(-scale / c.dyson.gamma_tilde));
}

Grassmann q_norm_dependent(const NormWeight& p, const SuperMatrix& U, const CosetContext& c, double rel_tol) {
    const int D = radial_dimension(c);
    if (D < 1) throw CapabilityError("radial dimension must be positive for the norm-dependent superweight");
    Grassmann s = str(U);
    const cplx b = s.body();
    // R_k = ∫ dr r^(D-1) p^(k)(r^2 + b); the lift supplies the nilpotent part.
    auto radial = [&](cplx body, int k) {
        LadderConfig cfg;
        cfg.kind = RuleKind::Legendre;
        cfg.mapping = Mapping::HalfLine;
        cfg.start = 32;
        cfg.rel_tol = rel_tol;
        auto f = [&](double r) { return std::pow(r, D - 1) * p.deriv(r * r + body, k); };
        return integrate(f, cfg).value;
    };
    (void)b;
    return lift_scalar(radial, s);
}

Grassmann q_lorentz(const SuperMatrix& U, const CosetContext& c, double gamma, double mu) {
    const double gt = c.dyson.gamma_tilde;
    const double bound = (c.n + c.nu) / gt + std::max(0, c.k2 - c.k1);
    if (!(mu > bound))
        throw PreconditionError("Lorentz superweight needs mu > " + std::to_string(bound));
    SuperMatrix A = U;
    for (int i = 0; i < A.rows().total(); ++i) A(i, i) += Grassmann(U.num_generators(), gamma * gamma);
    const double p = c.n / gt + (c.k2 - c.k1) - mu;
    // Evaluate the FF-only case through the determinant so a zero of Γ²+u
    // on the contour does not pass through an inverse.
    if (A.rows().b == 0 && A.rows().f == 1) return gpow(A(0, 0), cplx(-p));
    Grassmann sd = sdet(A);
    double ip = std::round(p);
    if (std::abs(p - ip) < 1e-15) return gpow(sd, int(ip));
    return gpow(sd, cplx(p));
}

Grassmann q_quartic(const SuperMatrix& U, const CosetContext& c, const QuarticAux& q) {
    require_beta2(c.dyson);
    if (!(q.alpha > 0.0)) throw InputError("quartic weight needs alpha > 0");
    const int N = c.n + (c.k2 - c.k1);
    if (N < 0) throw CapabilityError("auxiliary dimension is negative");
    if (c.n > 6) throw CapabilityError("quartic superweight by direct expansion supports n <= 6; use MC over H");
    const int ngen = U.num_generators();
    const double alpha = q.alpha;
    const double a = q.alpha_hat - 1.0;
    // Every pole in E lies in the lower half plane (at -i and -i(1 + 2αx)),
    // so the contour may move up; Im E = 1 keeps the nearest pole two units
    // away, which the Hermite rule resolves quickly.
    const double shift = std::max(a, 1.0);
    const double delta = shift - a;
    const int p = c.n + c.nu + (c.k2 - c.k1);
    const double sa = std::sqrt(alpha);

    SuperMatrix base = cplx(-2.0 * alpha) * U;

    // With c = iE - 1 and V = -2αU, sdet(c + V)^{-1} for a matrix of at most
    // one bosonic and one fermionic row whose diagonal is pure body reads
    //   (c+f) Σ_k (σρ)^k / ((c+f)^k (c+b)^{k+1}),
    // so the E dependence sits in scalar factors and the Grassmann content
    // in fixed coefficients P_k. Other shapes take the generic loop below.
    const Dims dims = U.rows();
    bool split = dims.b <= 1 && dims.f <= 1 && dims.b + dims.f >= 1;
    for (int k = 0; split && k < dims.total(); ++k) split = base(k, k).nilpotent_part().is_zero();
    std::vector<Grassmann> P;
    cplx vb = 0.0, vf = 0.0;
    if (split) {
        if (dims.b == 1) vb = base(0, 0).body();
        if (dims.f == 1) vf = base(dims.b, dims.b).body();
        P.push_back(Grassmann(ngen, 1.0));
        if (dims.b == 1 && dims.f == 1) {
            Grassmann sr = base(0, 1) * base(1, 0);
            for (Grassmann t = sr; !t.is_zero(); t = t * sr) P.push_back(t);
        }
    }
    auto h = [&](cplx c, int k) {
        cplx v = 1.0;
        if (dims.f == 1) v *= std::pow(c + vf, 1 - k);
        if (dims.b == 1) v /= std::pow(c + vb, k + 1);
        return v;
    };

    auto moments = [&](int m) {
        QuadratureRule r = gauss_hermite(m);
        std::vector<Grassmann> mom(std::max(1, 2 * N - 1), Grassmann(ngen));
        if (split) {
            std::vector<cplx> acc(P.size() * mom.size(), 0.0);
            for (std::size_t i = 0; i < r.size(); ++i) {
                const double t = r.nodes[i];
                const cplx E = 2.0 * sa * t + I * shift;
                const cplx gauss = std::exp(-I * t * delta / sa + delta * delta / (4.0 * alpha));
                const cplx w = r.weights[i] * 2.0 * sa * gauss * std::pow(1.0 - I * E, -p);
                const cplx c = I * E - 1.0;
                for (std::size_t k = 0; k < P.size(); ++k) {
                    cplx v = w * h(c, int(k));
                    for (std::size_t j = 0; j < mom.size(); ++j) {
                        acc[k * mom.size() + j] += v;
                        v *= E;
                    }
                }
            }
            for (std::size_t j = 0; j < mom.size(); ++j)
                for (std::size_t k = 0; k < P.size(); ++k) mom[j] += P[k] * acc[k * mom.size() + j];
            return mom;
        }
        for (std::size_t i = 0; i < r.size(); ++i) {
            const double t = r.nodes[i];
            const cplx E = 2.0 * sa * t + I * shift;
            const cplx gauss = std::exp(-I * t * delta / sa + delta * delta / (4.0 * alpha));
            const cplx w = r.weights[i] * 2.0 * sa * gauss * std::pow(1.0 - I * E, -p);
            SuperMatrix A = base;
            for (int k = 0; k < A.rows().total(); ++k) A(k, k) += Grassmann(ngen, I * E - 1.0);
            Grassmann S = sdet(A).inverse();
            cplx Ek = 1.0;
            for (std::size_t k = 0; k < mom.size(); ++k) {
                mom[k] += S * (w * Ek);
                Ek *= E;
            }
        }
        return mom;
    };
    auto h_part = [&](const std::vector<Grassmann>& mom) {
        if (N == 0) return Grassmann(ngen, 1.0);
        SuperMatrix M(Dims{N, 0}, ngen);
        for (int i = 0; i < N; ++i)
            for (int j = 0; j < N; ++j) M(i, j) = mom[i + j];
        double fact = 1.0;
        for (int k = 2; k <= N; ++k) fact *= k;
        return even_det(M) * cplx(fact);
    };

    int m = q.start_nodes;
    Grassmann prev = h_part(moments(m));
    Grassmann H = prev;
    for (;;) {
        if (2 * m > q.max_nodes)
            throw ConvergenceError("auxiliary eigenvalue quadrature did not converge", prev.body().real(),
                                   prev.body().imag(), 0.0);
        m *= 2;
        H = h_part(moments(m));
        double diff = (H - prev).max_abs();
        if (diff <= q.rel_tol * std::max(H.max_abs(), 1e-300)) break;
        prev = H;
    }
    Grassmann pre = gexp(str(U * U) * cplx(-alpha) - str(U) * cplx(q.alpha_hat));
    return pre * H;
}

Grassmann evaluate_q(const SuperWeight& w, const SuperMatrix& U, const CosetContext& c) {
    struct V {
        const SuperMatrix& U;
        const CosetContext& c;
        Grassmann operator()(const GaussianClosed& g) const { return q_gaussian(U, c, g.scale); }
        Grassmann operator()(const NormDependent1D& p) const { return q_norm_dependent(p.p, U, c); }
        Grassmann operator()(const LorentzClosed& l) const { return q_lorentz(U, c, l.gamma, l.mu); }
        Grassmann operator()(const QuarticAux& q) const { return q_quartic(U, c, q); }
        Grassmann operator()(const UnquenchedDouble&) const {
            throw CapabilityError("the unquenched weight is evaluated by z_unquenched_super");
        }
    };
    return std::visit(V{U, c}, w);
}

namespace {

double default_ff_radius(const SuperWeight& w, const SuperQuadConfig& cfg) {
    if (cfg.ff_radius > 0.0) return cfg.ff_radius;
    if (auto* l = std::get_if<LorentzClosed>(&w)) {
        double g2 = l->gamma * l->gamma;
        if (g2 <= 1.0) return 0.5 * g2;
    }
    if (auto* p = std::get_if<NormDependent1D>(&w); p && p->p.name == "lorentz") return 0.5;
    return 1.0;
}

// Integrand of the coset integral at one point, measure included:
// (0|1): dθ/2π, (1|0): dx/x, (1|1): dx dθ/2π u ∫dβ dα.
cplx coset_integrand(const SuperWeight& w, const CosetContext& c, const std::vector<cplx>& s1,
                     const std::vector<cplx>& s2, bool with_sources, const CosetPoint& pt) {
    SuperMatrix U = coset_matrix(pt);
    const int ngen = U.num_generators();
    Grassmann F = evaluate_q(w, U, c);
    // sdet^{(n+ν)/γ̃} U
    const int e = c.n + c.nu;
    switch (pt.kind) {
        case CosetKind::Fermionic: {
            cplx u = U(0, 0).body();
            cplx v = F.body() * std::pow(u, -e);
            if (with_sources) v *= std::pow(u - s2[0], c.n);
            return v;
        }
        case CosetKind::Bosonic: {
            cplx v = F.body() * std::pow(pt.x, e - 1);
            if (with_sources) v *= std::pow(pt.x - s1[0], -c.n);
            return v;
        }
        case CosetKind::Mixed: {
            F = F * gpow(sdet(U), e);
            if (with_sources) {
                SuperMatrix K = U;
                K(0, 0) -= Grassmann(ngen, s1[0]);
                K(1, 1) -= Grassmann(ngen, s2[0]);
                F = F * gpow(sdet(K), -c.n);
            }
            cplx top = berezin(F, {0, 1}).body();
            return on_circle(pt.radius, pt.theta) * top;
        }
    }
    return 0.0;
}

// The circle integral does not depend on the radius as long as the circle
// stays inside the analyticity annulus of the weight. Entire weights get a
// wider search; a large-n integrand on a badly placed circle is dominated by
// cancellations of order e^n, so we take the radius with the smallest peak.
double tuned_ff_radius(const SuperWeight& w, const CosetContext& c, const std::vector<cplx>& s2, bool with_sources,
                       double fallback) {
    const bool entire = std::holds_alternative<GaussianClosed>(w) || std::holds_alternative<QuarticAux>(w);
    double r_max = fallback;
    if (entire) r_max = 4.0 * std::max(1.0, with_sources ? std::sqrt(std::abs(s2[0])) : 0.0);
    const double r_min = 1e-3 * r_max;
    const int n_r = 40, n_th = 24;
    double best = fallback, best_peak = INFINITY;
    for (int i = 0; i <= n_r; ++i) {
        double r = r_min * std::pow(r_max / r_min, double(i) / n_r);
        double peak = -INFINITY;
        try {
            for (int j = 0; j < n_th; ++j) {
                cplx v = coset_integrand(w, c, {}, s2, with_sources,
                                         {CosetKind::Fermionic, 1.0, 2.0 * M_PI * j / n_th, r});
                peak = std::max(peak, std::log(std::abs(v)));
            }
        } catch (const std::exception&) {
            continue;
        }
        if (std::isfinite(peak) && peak < best_peak) {
            best_peak = peak;
            best = r;
        }
    }
    return best;
}

}  // namespace

IntegrationResult coset_integral(const SuperWeight& w, const CosetContext& c, const SourcePack& src,
                                 bool with_sources, const SuperQuadConfig& cfg) {
    require_beta2(c.dyson);
    const CosetKind kind = coset_for(c.k1, c.k2);
    const auto s1 = src.squared1(), s2 = src.squared2();
    const double radius = default_ff_radius(w, cfg);
    switch (kind) {
        case CosetKind::Fermionic: {
            const double r = cfg.ff_radius > 0.0 ? radius : tuned_ff_radius(w, c, s2, with_sources, radius);
            LadderConfig lc{RuleKind::PeriodicTrapezoid, Mapping::None, 0, 0, cfg.ff_start, cfg.ff_cap, cfg.rel_tol};
            return integrate(
                [&](double th) {
                    return coset_integrand(w, c, s1, s2, with_sources, {CosetKind::Fermionic, 1.0, th, r});
                },
                lc);
        }
        case CosetKind::Bosonic: {
            LadderConfig lc{RuleKind::Legendre, Mapping::HalfLine, 0, 1, cfg.bb_start, cfg.bb_cap, cfg.rel_tol};
            return integrate(
                [&](double x) {
                    if (x <= 0.0) return cplx(0.0);
                    return coset_integrand(w, c, s1, s2, with_sources, {CosetKind::Bosonic, x, 0.0, radius});
                },
                lc);
        }
        case CosetKind::Mixed: {
            LadderConfig lx{RuleKind::Legendre, Mapping::HalfLine, 0, 1, cfg.bb_start, cfg.bb_cap, cfg.rel_tol};
            LadderConfig ly{RuleKind::PeriodicTrapezoid, Mapping::None, 0, 0, 16, std::min(cfg.ff_cap, 256),
                            cfg.rel_tol};
            return integrate_2d(
                [&](double x, double th) {
                    if (x <= 0.0) return cplx(0.0);
                    return coset_integrand(w, c, s1, s2, with_sources, {CosetKind::Mixed, x, th, radius});
                },
                lx, ly);
        }
    }
    throw InputError("unknown coset");
}

SuperResult z_super(const SuperWeight& w, DysonIndex d, int n, int nu, const SourcePack& src,
                    const SuperQuadConfig& cfg) {
    require_beta2(d);
    std::tie(n, nu) = normalize_index(n, nu);
    src.validate_superspace(d, n);
    if (src.k1() == 1) {
        cplx s = src.squared1()[0];
        if (s.imag() == 0.0 && s.real() >= 0.0)
            throw InputError("squared bosonic source lies on the bosonic integration contour");
    }
    if (auto* u = std::get_if<UnquenchedDouble>(&w)) return z_unquenched_super(u->mass, n, nu, src, cfg);
    // Below this bound the ordinary-space average diverges and the source-free
    // coset integral used for normalization vanishes identically.
    if (auto* l = std::get_if<LorentzClosed>(&w)) {
        double need = lorentz_min_mu(d, n, nu, src.k2() - src.k1());
        if (!(l->mu > need))
            throw PreconditionError("Lorentz weight with mu=" + std::to_string(l->mu) +
                                    " has no finite ratio with these sources (needs mu > " + std::to_string(need) +
                                    ")");
    }
    CosetContext c{d, n, nu, src.k1(), src.k2()};
    coset_for(c.k1, c.k2);
    SuperResult r;
    IntegrationResult with = coset_integral(w, c, src, true, cfg);
    IntegrationResult free = coset_integral(w, c, src, false, cfg);
    if (std::abs(free.value) == 0.0) throw NumericError("source-free reference integral vanishes");
    r.raw = with.value;
    r.raw_free = free.value;
    r.z_reduced = with.value / free.value;
    r.z_chiral = chiral_prefactor(d, n, nu, src) * r.z_reduced;
    r.err_est = with.err_est / std::max(std::abs(with.value), 1e-300) +
                free.err_est / std::max(std::abs(free.value), 1e-300);
    r.nodes = with.nodes;
    return r;
}

SuperResult z_super_correlated(const std::vector<double>& c_eigenvalues, int n, int nu, const SourcePack& src,
                               const SuperQuadConfig& cfg) {
    if (int(c_eigenvalues.size()) != n + nu) throw InputError("need n+nu correlation eigenvalues");
    for (double c : c_eigenvalues)
        if (!(c > 0.0)) throw InputError("correlation eigenvalues must be positive");
    if (!(src.k1() == 0 && src.k2() == 1)) throw CapabilityError("correlated superspace path supports (0|1) only");
    const cplx s = src.squared2()[0];
    // Dual (0|1) representation on the (n+ν) side:
    //   (-s)^{-ν} ∮ e^{nu} ∏_j (u - s/c_j) u^{-n}, normalized to be monic.
    LadderConfig lc{RuleKind::PeriodicTrapezoid, Mapping::None, 0, 0, cfg.ff_start, cfg.ff_cap, cfg.rel_tol};
    auto integrand = [&](double th, bool with) {
        cplx u = std::polar(1.0, th);
        cplx v = std::exp(double(n) * u) * std::pow(u, -n);
        if (with)
            for (double c : c_eigenvalues) v *= (u - s / c);
        return v;
    };
    IntegrationResult with = integrate([&](double th) { return integrand(th, true); }, lc);
    IntegrationResult free = integrate([&](double th) { return integrand(th, false); }, lc);
    double detC = 1.0;
    for (double c : c_eigenvalues) detC *= c;
    SuperResult r;
    r.raw = with.value;
    r.raw_free = free.value;
    if (nu > 0 && s == cplx(0.0)) {
        // Limit s -> 0: the s^ν coefficient of the polynomial.
        throw InputError("correlated path needs a nonzero source when nu > 0");
    }
    r.z_reduced = std::pow(-s, -nu) * detC * with.value / free.value;
    r.z_chiral = chiral_prefactor(DysonIndex::from_beta(2), n, nu, src) * r.z_reduced;
    r.err_est = with.err_est / std::max(std::abs(with.value), 1e-300);
    r.nodes = with.nodes;
    return r;
}

MicroResult z_micro(CosetKind kind, int nu, const std::vector<cplx>& xi, const SuperQuadConfig& cfg) {
    if (nu < 0) throw InputError("nu must be >= 0");
    LadderConfig ff{RuleKind::PeriodicTrapezoid, Mapping::None, 0, 0, cfg.ff_start, cfg.ff_cap, cfg.rel_tol};
    switch (kind) {
        case CosetKind::Fermionic: {
            if (xi.size() != 1) throw InputError("(0|1) needs one rescaled source");
            const cplx x = xi[0];
            if (x == cplx(0.0)) return {1.0, 0.0};
            // exp(-iξ(u + 1/u)) u^{-ν}, normalized by its small-ξ behaviour.
            IntegrationResult r = integrate(
                [&](double th) {
                    cplx u = std::polar(1.0, th);
                    return std::exp(-I * x * (u + 1.0 / u)) * std::pow(u, -nu);
                },
                ff);
            double fact = 1.0;
            for (int k = 2; k <= nu; ++k) fact *= k;
            cplx norm = fact / std::pow(-I * x, nu);
            return {r.value * norm, r.err_est * std::abs(norm)};
        }
        case CosetKind::Bosonic: {
            if (xi.size() != 1) throw InputError("(1|0) needs one rescaled source");
            const cplx x = xi[0];
            if (!(x.imag() > 0.0)) throw InputError("(1|0) microscopic integral needs Im(n kappa) > 0");
            LadderConfig bb{RuleKind::Legendre, Mapping::HalfLine, 0, 1, cfg.bb_start, cfg.bb_cap, cfg.rel_tol};
            IntegrationResult r = integrate(
                [&](double t) {
                    if (t <= 0.0) return cplx(0.0);
                    return std::exp(I * x * (t + 1.0 / t)) * std::pow(t, nu - 1);
                },
                bb);
            cplx norm = std::pow(-I * x, nu);
            return {r.value * norm, r.err_est * std::abs(norm)};
        }
        case CosetKind::Mixed: {
            if (xi.size() != 2) throw InputError("(1|1) needs two rescaled sources");
            if (!(xi[0].imag() > 0.0)) throw InputError("(1|1) microscopic integral needs Im(n kappa1) > 0");
            auto raw = [&](cplx x1, cplx x2) {
                LadderConfig lx{RuleKind::Legendre, Mapping::HalfLine, 0, 1, cfg.bb_start, cfg.bb_cap, cfg.rel_tol};
                LadderConfig ly{RuleKind::PeriodicTrapezoid, Mapping::None, 0, 0, 16, 256, cfg.rel_tol};
                return integrate_2d(
                    [&](double x, double th) {
                        if (x <= 0.0) return cplx(0.0);
                        SuperMatrix U = coset_matrix({CosetKind::Mixed, x, th, 1.0});
                        SuperMatrix S = U + inverse(U);
                        Grassmann arg = S(0, 0) * (I * x1) - S(1, 1) * (I * x2);
                        Grassmann F = gexp(arg) * gpow(sdet(U), nu);
                        return std::polar(1.0, th) * berezin(F, {0, 1}).body();
                    },
                    lx, ly);
            };
            IntegrationResult r = raw(xi[0], xi[1]);
            IntegrationResult susy = raw(xi[0], xi[0]);
            cplx v = r.value / susy.value * std::pow(xi[1] / xi[0], nu);
            return {v, r.err_est / std::max(std::abs(r.value), 1e-300)};
        }
    }
    throw InputError("unknown coset");
}

MicroResult z_micro_lorentz_heavy(int nu, cplx xi, double G, double mu_tilde, const SuperQuadConfig& cfg) {
    if (nu < 0) throw InputError("nu must be >= 0");
    if (!(G > 0.0)) throw InputError("G must be positive");
    // Generalized binomial C(μ̃-1, ν) fixes the ξ -> 0 normalization.
    double binom = 1.0;
    for (int j = 0; j < nu; ++j) binom *= (mu_tilde - 1.0 - j) / (j + 1.0);
    if (binom == 0.0) throw CapabilityError("heavy-tail normalization vanishes for this (mu_tilde, nu)");
    if (xi == cplx(0.0)) return {1.0, 0.0};
    const double r = std::min(1.0, 0.5 * G / std::abs(xi));
    LadderConfig ff{RuleKind::PeriodicTrapezoid, Mapping::None, 0, 0, cfg.ff_start, cfg.ff_cap, cfg.rel_tol};
    IntegrationResult res = integrate(
        [&](double th) {
            cplx w = std::polar(r, th);
            return std::pow(G + xi * w, mu_tilde - 1.0) * std::pow(w, -nu) * std::exp(-xi / w);
        },
        ff);
    cplx norm = 1.0 / (std::pow(xi, nu) * binom * std::pow(G, mu_tilde - 1.0 - nu));
    return {res.value * norm, res.err_est * std::abs(norm)};
}

namespace {

// N = ∮_v g(v) [∮_{|u|=R} f(u)/(u+v+m²) + f(-v-m²)/(v+m²)], the u contour
// moved outside the coupling pole, whose residue is added back.
IntegrationResult unquenched_numerator(const std::function<cplx(cplx)>& f, const std::function<cplx(cplx)>& g,
                                       double m2, double rv, double R, double small_r, const SuperQuadConfig& cfg) {
    LadderConfig lc{RuleKind::PeriodicTrapezoid, Mapping::None, 0, 0, cfg.ff_start, std::min(cfg.ff_cap, 1024),
                    cfg.rel_tol};
    if (small_r > 0.0) {
        // Both circles small enough that u + v + m² never vanishes.
        return integrate_2d(
            [&](double tv, double tu) {
                cplx v = std::polar(small_r, tv), u = std::polar(small_r, tu);
                return g(v) * f(u) / (u + v + m2);
            },
            lc, lc);
    }
    IntegrationResult a = integrate_2d(
        [&](double tv, double tu) {
            cplx v = std::polar(rv, tv), u = std::polar(R, tu);
            return g(v) * f(u) / (u + v + m2);
        },
        lc, lc);
    // The residue term can vanish identically (it does for the source-free
    // integrand), so its tolerance is measured against the circle part.
    LadderConfig lb = lc;
    lb.abs_floor = std::max(std::abs(a.value), 1e-300);
    IntegrationResult b = integrate(
        [&](double tv) {
            cplx v = std::polar(rv, tv);
            return g(v) * f(-v - m2) / (v + m2);
        },
        lb);
    return {a.value + b.value, a.err_est + b.err_est, a.nodes + b.nodes};
}

}  // namespace

SuperResult z_unquenched_super(double mass, int n, int nu, const SourcePack& src, const SuperQuadConfig& cfg) {
    std::tie(n, nu) = normalize_index(n, nu);
    if (!(src.k1() == 0 && src.k2() == 1))
        throw CapabilityError("unquenched double contour supports one fermionic source");
    if (!(mass > 0.0)) throw InputError("mass must be positive");
    const cplx s = src.squared2()[0];
    const double m2 = mass * mass;
    auto g = [&](cplx v) { return std::exp(double(n) * v) * std::pow(v, nu) * std::pow(1.0 + m2 / v, n + nu + 1); };
    auto f = [&](cplx u) { return std::exp(double(n) * u) * std::pow(u, -nu) * std::pow(1.0 - s / u, n); };
    auto f0 = [&](cplx u) { return std::exp(double(n) * u) * std::pow(u, -nu - n); };

    double small_r = 0.0, rv = 0.0, R = 0.0;
    if (cfg.v_radius > 0.0) {
        rv = cfg.v_radius;
    } else if (m2 > 3.0) {
        small_r = 1.0;
    } else {
        rv = std::min(1.0, mass);
    }
    if (small_r == 0.0) R = cfg.u_radius > 0.0 ? cfg.u_radius : 2.0 * (rv + m2) + 2.0 * std::sqrt(std::abs(s));
    if (small_r == 0.0 && R <= rv + m2) throw InputError("u radius must exceed v radius + m^2");

    IntegrationResult num = unquenched_numerator(f, g, m2, rv, R, small_r, cfg);
    IntegrationResult den = unquenched_numerator(f0, g, m2, rv, R, small_r, cfg);
    SuperResult r;
    r.raw = num.value;
    r.raw_free = den.value;
    r.z_reduced = num.value / den.value;
    r.z_chiral = chiral_prefactor(DysonIndex::from_beta(2), n, nu, src) * r.z_reduced;
    r.err_est = num.err_est / std::max(std::abs(num.value), 1e-300) + den.err_est / std::max(std::abs(den.value), 1e-300);
    r.nodes = num.nodes;
    return r;
}

namespace {

cplx micro_inner(cplx y, double mu, double M, int nu, const SuperQuadConfig& cfg) {
    auto f = [&](cplx w) { return std::exp(mu * (w + 1.0 / w)) * std::pow(w, -nu); };
    const double R = 2.0 * M / mu + 1.0;
    LadderConfig lc{RuleKind::PeriodicTrapezoid, Mapping::None, 0, 0, cfg.ff_start, std::min(cfg.ff_cap, 4096),
                    cfg.rel_tol};
    IntegrationResult a = integrate(
        [&](double th) {
            cplx w = std::polar(R, th);
            return f(w) / (mu * w + M * y);
        },
        lc);
    return a.value + f(-M * y / mu) / (M * y);
}

}  // namespace

MicroResult z_unquenched_micro(int nu, double mu, double M, const SuperQuadConfig& cfg) {
    if (!(mu > 0.0) || !(M > 0.0)) throw InputError("rescaled source and mass must be positive");
    LadderConfig lc{RuleKind::PeriodicTrapezoid, Mapping::None, 0, 0, 32, 1024, cfg.rel_tol};
    IntegrationResult r = integrate(
        [&](double phi) { return std::exp(I * double(nu) * phi) * std::exp(chiral_lagrangian_split(phi, M, mu, nu, cfg)); },
        lc);
    return {r.value, r.err_est};
}

cplx chiral_lagrangian_split(double phi, double M, double mu, int nu, const SuperQuadConfig& cfg) {
    if (!(mu > 0.0)) throw InputError("rescaled source must be positive");
    if (M == 0.0) throw InputError("split form needs a nonzero mass");
    const cplx y = std::polar(1.0, phi);
    cplx inner = micro_inner(y, mu, M, nu, cfg);
    if (inner == cplx(0.0)) throw NumericError("inner coset integral vanishes");
    return M * (y + 1.0 / y) + std::log(inner) - double(nu) * std::log(mu);
}

}  // namespace chirmt
