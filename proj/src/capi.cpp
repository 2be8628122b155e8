#include "chirmt/chirmt.h"

#include "errors.hpp"
#include "ordinary_mc.hpp"
#include "superspace.hpp"
#include "verify.hpp"

#include <cstdlib>
#include <cstring>
#include <string>

struct chirmt_session {
    int threads = 1;
    double rel_tol = 1e-10;
    chirmt::RatioForm form = chirmt::RatioForm::Reduced;
};

namespace {

using namespace chirmt;

thread_local std::string g_last_error;

template <class F>
chirmt_status guard(F&& f) {
    g_last_error.clear();
    try {
        f();
        return CHIRMT_OK;
    } catch (const InputError& e) {
        g_last_error = e.what();
        return CHIRMT_E_INPUT;
    } catch (const StructuralError& e) {
        g_last_error = e.what();
        return CHIRMT_E_STRUCTURAL;
    } catch (const SingularityError& e) {
        g_last_error = e.what();
        return CHIRMT_E_SINGULAR;
    } catch (const CapabilityError& e) {
        g_last_error = e.what();
        return CHIRMT_E_CAPABILITY;
    } catch (const PreconditionError& e) {
        g_last_error = e.what();
        return CHIRMT_E_PRECONDITION;
    } catch (const ConvergenceError& e) {
        g_last_error = std::string(e.what()) + " (best estimate " + std::to_string(e.best_re) + "," +
                       std::to_string(e.best_im) + ")";
        return CHIRMT_E_CONVERGENCE;
    } catch (const NumericError& e) {
        g_last_error = e.what();
        return CHIRMT_E_NUMERIC;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return CHIRMT_E_INTERNAL;
    } catch (...) {
        g_last_error = "unknown error";
        return CHIRMT_E_INTERNAL;
    }
}

void need(const void* p, const char* what) {
    if (!p) throw InputError(std::string("null pointer: ") + what);
}

cplx to_cplx(chirmt_complex z) { return {z.re, z.im}; }
chirmt_complex from_cplx(cplx z) { return {z.real(), z.imag()}; }

DysonIndex dyson(int beta) {
    if (beta != 1 && beta != 2 && beta != 4) throw InputError("beta must be 1, 2 or 4");
    return DysonIndex::from_beta(beta);
}

SourcePack sources(const chirmt_problem& p) {
    if (p.k1 < 0 || p.k2 < 0) throw InputError("source counts must be >= 0");
    if ((p.k1 > 0 && !p.kappa1) || (p.k2 > 0 && !p.kappa2)) throw InputError("missing source array");
    std::vector<cplx> a, b;
    for (int i = 0; i < p.k1; ++i) a.push_back(to_cplx(p.kappa1[i]));
    for (int i = 0; i < p.k2; ++i) b.push_back(to_cplx(p.kappa2[i]));
    if (p.squared) return SourcePack::from_squared(a, b);
    return SourcePack{a, b};
}

void check_sizes(const chirmt_problem& p) {
    if (p.n < 1) throw InputError("n must be >= 1");
    if (p.n + p.nu < 1) throw InputError("n + nu must be >= 1");
}

EnsembleSpec ensemble(const chirmt_ensemble& e) {
    switch (e.kind) {
        case CHIRMT_GAUSSIAN: return GaussianSpec{e.p1};
        case CHIRMT_LORENTZ: return LorentzSpec{e.p1, e.p2};
        case CHIRMT_QUARTIC: return QuarticSpec{e.p1, e.p2};
        case CHIRMT_FIXED_TRACE: return FixedTraceSpec{e.p1};
        case CHIRMT_NORM_GAUSSIAN: return NormDependentSpec{gaussian_norm(e.p1)};
    }
    throw InputError("unknown ensemble kind");
}

SuperWeight weight(const chirmt_ensemble& e, int n) {
    switch (e.kind) {
        case CHIRMT_GAUSSIAN: return GaussianClosed{e.p1};
        case CHIRMT_LORENTZ: return LorentzClosed{e.p1, e.p2};
        case CHIRMT_QUARTIC: return QuarticAux{e.p1, e.p2};
        case CHIRMT_NORM_GAUSSIAN: return NormDependent1D{gaussian_norm(e.p1)};
        case CHIRMT_FIXED_TRACE:
            // Finite-width stand-in for the trace constraint.
            return NormDependent1D{narrow_gaussian_norm(e.p1 * n, 0.05 * e.p1 * n)};
    }
    throw InputError("unknown ensemble kind");
}

MCOptions options(const chirmt_session* s) {
    MCOptions o;
    o.threads = s->threads;
    o.form = s->form;
    return o;
}

SuperQuadConfig quad(const chirmt_session* s) {
    SuperQuadConfig q;
    q.rel_tol = s->rel_tol;
    return q;
}

void write(const MCEstimate& e, chirmt_mc_result* out) {
    out->value = from_cplx(e.mean);
    out->std_error = e.std_error;
    out->std_re = e.std_re;
    out->std_im = e.std_im;
    out->ess = e.ess;
    out->n_samples = e.n_samples;
    out->rejected = e.rejected;
    out->unreliable = e.unreliable;
    out->seed = e.seed;
}

void write(const SuperResult& r, chirmt_super_result* out) {
    out->z_reduced = from_cplx(r.z_reduced);
    out->z_chiral = from_cplx(r.z_chiral);
    out->err_est = r.err_est;
    out->nodes = r.nodes;
}

char* dup_string(const std::string& s) {
    char* p = static_cast<char*>(std::malloc(s.size() + 1));
    if (!p) throw std::bad_alloc();
    std::memcpy(p, s.c_str(), s.size() + 1);
    return p;
}

}  // namespace

extern "C" {

const char* chirmt_version(void) { return "1.0.0"; }

const char* chirmt_last_error(void) { return g_last_error.c_str(); }

chirmt_status chirmt_session_create(chirmt_session** out) {
    return guard([&] {
        need(out, "out");
        *out = new chirmt_session();
    });
}

void chirmt_session_destroy(chirmt_session* s) { delete s; }

chirmt_status chirmt_session_set_threads(chirmt_session* s, int threads) {
    return guard([&] {
        need(s, "session");
        if (threads < 1) throw InputError("threads must be >= 1");
        s->threads = threads;
    });
}

chirmt_status chirmt_session_set_rel_tol(chirmt_session* s, double rel_tol) {
    return guard([&] {
        need(s, "session");
        if (!(rel_tol > 0.0 && rel_tol < 1.0)) throw InputError("relative tolerance must lie in (0, 1)");
        s->rel_tol = rel_tol;
    });
}

chirmt_status chirmt_session_set_ratio_form(chirmt_session* s, int chiral) {
    return guard([&] {
        need(s, "session");
        s->form = chiral ? RatioForm::Chiral : RatioForm::Reduced;
    });
}

chirmt_status chirmt_sample(chirmt_session* s, const chirmt_ensemble* e, int beta, int n, int nu, uint64_t seed,
                            long count, double* eigenvalues) {
    return guard([&] {
        need(s, "session");
        need(e, "ensemble");
        need(eigenvalues, "eigenvalues");
        if (n < 1 || n + nu < 1 || count < 1) throw InputError("need n >= 1, n + nu >= 1 and count >= 1");
        DysonIndex d = dyson(beta);
        EnsembleSpec spec = ensemble(*e);
        std::vector<ChiralSample> draws;
        if (has_direct_sampler(spec)) {
            Rng rng(seed);
            for (long i = 0; i < count; ++i) draws.push_back(sample_direct(spec, d, n, nu, rng));
        } else {
            draws = sample_mcmc(spec, d, n, nu, ChainConfig{}, Rng(seed), int(count));
        }
        std::size_t k = 0;
        for (const auto& w : draws)
            for (double v : wishart_eigenvalues(w)) eigenvalues[k++] = v;
    });
}

chirmt_status chirmt_z_ordinary(chirmt_session* s, const chirmt_problem* p, const chirmt_ensemble* e, long samples,
                                uint64_t seed, chirmt_mc_result* out) {
    return guard([&] {
        need(s, "session");
        need(p, "problem");
        need(e, "ensemble");
        need(out, "out");
        check_sizes(*p);
        write(estimate_Z(ensemble(*e), dyson(p->beta), p->n, p->nu, sources(*p), samples, seed, options(s)), out);
    });
}

chirmt_status chirmt_z_ordinary_correlated(chirmt_session* s, const chirmt_problem* p, const chirmt_ensemble* base,
                                           const chirmt_complex* C, long samples, uint64_t seed,
                                           chirmt_mc_result* out) {
    return guard([&] {
        need(s, "session");
        need(p, "problem");
        need(base, "ensemble");
        need(C, "C");
        need(out, "out");
        check_sizes(*p);
        const int m = p->n + p->nu;
        Eigen::MatrixXcd Cm(m, m);
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j) Cm(i, j) = to_cplx(C[i * m + j]);
        write(estimate_Z_correlated(ensemble(*base), Cm, dyson(p->beta), p->n, p->nu, sources(*p), samples, seed,
                                    options(s)),
              out);
    });
}

chirmt_status chirmt_z_unquenched_mc(chirmt_session* s, const chirmt_problem* p, const double* masses, int n_flavors,
                                     long samples, uint64_t seed, chirmt_mc_result* out) {
    return guard([&] {
        need(s, "session");
        need(p, "problem");
        need(masses, "masses");
        need(out, "out");
        check_sizes(*p);
        std::vector<double> m(masses, masses + std::max(0, n_flavors));
        write(estimate_Z_unquenched(m, dyson(p->beta), p->n, p->nu, sources(*p), samples, seed, options(s)), out);
    });
}

chirmt_status chirmt_z_super(chirmt_session* s, const chirmt_problem* p, const chirmt_ensemble* e,
                             chirmt_super_result* out) {
    return guard([&] {
        need(s, "session");
        need(p, "problem");
        need(e, "ensemble");
        need(out, "out");
        check_sizes(*p);
        write(z_super(weight(*e, p->n), dyson(p->beta), p->n, p->nu, sources(*p), quad(s)), out);
    });
}

chirmt_status chirmt_z_super_correlated(chirmt_session* s, const chirmt_problem* p, const double* c_eigenvalues,
                                        chirmt_super_result* out) {
    return guard([&] {
        need(s, "session");
        need(p, "problem");
        need(c_eigenvalues, "c_eigenvalues");
        need(out, "out");
        check_sizes(*p);
        if (p->beta != 2) throw CapabilityError("superspace evaluation is implemented for beta = 2");
        std::vector<double> c(c_eigenvalues, c_eigenvalues + p->n + p->nu);
        write(z_super_correlated(c, p->n, p->nu, sources(*p), quad(s)), out);
    });
}

chirmt_status chirmt_z_unquenched_super(chirmt_session* s, const chirmt_problem* p, double mass,
                                        chirmt_super_result* out) {
    return guard([&] {
        need(s, "session");
        need(p, "problem");
        need(out, "out");
        check_sizes(*p);
        if (p->beta != 2) throw CapabilityError("superspace evaluation is implemented for beta = 2");
        write(z_unquenched_super(mass, p->n, p->nu, sources(*p), quad(s)), out);
    });
}

chirmt_status chirmt_z_micro(chirmt_session* s, int k1, int k2, int nu, const chirmt_complex* xi,
                             chirmt_complex* out, double* err_est) {
    return guard([&] {
        need(s, "session");
        need(xi, "xi");
        need(out, "out");
        CosetKind kind = coset_for(k1, k2);
        std::vector<cplx> x;
        for (int i = 0; i < k1 + k2; ++i) x.push_back(to_cplx(xi[i]));
        MicroResult r = z_micro(kind, nu, x, quad(s));
        *out = from_cplx(r.value);
        if (err_est) *err_est = r.err_est;
    });
}

chirmt_status chirmt_z_micro_lorentz_heavy(chirmt_session* s, int nu, chirmt_complex xi, double G, double mu_tilde,
                                           chirmt_complex* out, double* err_est) {
    return guard([&] {
        need(s, "session");
        need(out, "out");
        MicroResult r = z_micro_lorentz_heavy(nu, to_cplx(xi), G, mu_tilde, quad(s));
        *out = from_cplx(r.value);
        if (err_est) *err_est = r.err_est;
    });
}

chirmt_status chirmt_z_unquenched_micro(chirmt_session* s, int nu, double mu, double M, chirmt_complex* out,
                                        double* err_est) {
    return guard([&] {
        need(s, "session");
        need(out, "out");
        MicroResult r = z_unquenched_micro(nu, mu, M, quad(s));
        *out = from_cplx(r.value);
        if (err_est) *err_est = r.err_est;
    });
}

chirmt_status chirmt_chiral_lagrangian(chirmt_session* s, double phi, double M, double mu, int nu,
                                       chirmt_complex* out) {
    return guard([&] {
        need(s, "session");
        need(out, "out");
        *out = from_cplx(chiral_lagrangian_split(phi, M, mu, nu, quad(s)));
    });
}

chirmt_status chirmt_density(chirmt_session* s, const chirmt_ensemble* e, int beta, int n, int nu, long samples,
                             int bins, uint64_t seed, int spectrum, int microscopic, double lo, double hi,
                             double* edges, double* density, double* per_matrix, long* zero_modes) {
    return guard([&] {
        need(s, "session");
        need(e, "ensemble");
        need(edges, "edges");
        need(density, "density");
        if (n < 1 || n + nu < 1 || samples < 1) throw InputError("need n >= 1, n + nu >= 1 and samples >= 1");
        DensityOptions o;
        o.of = spectrum ? SpectrumOf::Chiral : SpectrumOf::Wishart;
        o.microscopic = microscopic != 0;
        o.lo = lo;
        o.hi = hi;
        Histogram h = spectral_density(ensemble(*e), dyson(beta), n, nu, samples, bins, seed, o);
        std::copy(h.edges.begin(), h.edges.end(), edges);
        std::copy(h.density.begin(), h.density.end(), density);
        if (per_matrix) std::copy(h.per_matrix.begin(), h.per_matrix.end(), per_matrix);
        if (zero_modes) *zero_modes = h.zero_modes;
    });
}

chirmt_status chirmt_microscopic_density_reference(int nu, double zeta, double* out) {
    return guard([&] {
        need(out, "out");
        *out = microscopic_density_reference(nu, zeta);
    });
}

int chirmt_scenario_count(void) { return int(scenario_names().size()); }

const char* chirmt_scenario_name(int index) {
    const auto& names = scenario_names();
    if (index < 0 || index >= int(names.size())) return nullptr;
    return names[index].c_str();
}

chirmt_status chirmt_verify(chirmt_session* s, const char* scenario, uint64_t seed, long samples, char** json_out,
                            int* passed) {
    return guard([&] {
        need(s, "session");
        need(scenario, "scenario");
        ScenarioConfig cfg;
        cfg.seed = seed;
        cfg.threads = s->threads;
        if (samples > 0) cfg.samples = samples;
        ScenarioResult r;
        if (std::string(scenario) == "identities") {
            r.name = "identities";
            r.reports = identity_suite(seed);
            r.pass = true;
            for (const auto& c : r.reports) r.pass = r.pass && c.pass;
            r.summary = std::to_string(r.reports.size()) + " identity checks";
        } else {
            r = run_scenario(scenario, cfg);
        }
        if (passed) *passed = r.pass;
        if (json_out) *json_out = dup_string(r.to_json());
    });
}

void chirmt_free_string(char* p) { std::free(p); }

}  // extern "C"
