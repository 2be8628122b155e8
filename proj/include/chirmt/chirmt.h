/* chirmt: chiral random matrix partition functions, ordinary space and superspace. */
#ifndef CHIRMT_H
#define CHIRMT_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define CHIRMT_API __declspec(dllexport)
#else
#define CHIRMT_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum chirmt_status {
    CHIRMT_OK = 0,
    CHIRMT_E_INPUT = 1,
    CHIRMT_E_STRUCTURAL = 2,
    CHIRMT_E_SINGULAR = 3,
    CHIRMT_E_CAPABILITY = 4,
    CHIRMT_E_PRECONDITION = 5,
    CHIRMT_E_NUMERIC = 6,
    CHIRMT_E_CONVERGENCE = 7,
    CHIRMT_E_INTERNAL = 8
} chirmt_status;

typedef struct chirmt_complex {
    double re;
    double im;
} chirmt_complex;

typedef enum chirmt_ensemble_kind {
    CHIRMT_GAUSSIAN = 0,     /* p1 = scale (0 means n) */
    CHIRMT_LORENTZ = 1,      /* p1 = Gamma, p2 = mu */
    CHIRMT_QUARTIC = 2,      /* p1 = alpha, p2 = alpha_hat */
    CHIRMT_FIXED_TRACE = 3,  /* p1 = c, tr WW^dag = c n */
    CHIRMT_NORM_GAUSSIAN = 4 /* radial projection of exp(-p1 t); superspace only */
} chirmt_ensemble_kind;

typedef struct chirmt_ensemble {
    chirmt_ensemble_kind kind;
    double p1;
    double p2;
} chirmt_ensemble;

/* Problem definition. kappa1 are bosonic (denominator) sources, kappa2
   fermionic (numerator) sources. With squared != 0 the arrays hold kappa^2. */
typedef struct chirmt_problem {
    int beta;
    int n;
    int nu;
    int k1;
    int k2;
    const chirmt_complex* kappa1;
    const chirmt_complex* kappa2;
    int squared;
} chirmt_problem;

typedef struct chirmt_mc_result {
    chirmt_complex value;
    double std_error;
    double std_re;
    double std_im;
    double ess;
    long n_samples;
    long rejected;
    int unreliable;
    uint64_t seed;
} chirmt_mc_result;

typedef struct chirmt_super_result {
    chirmt_complex z_reduced; /* E prod det(WW^dag - k2^2) / prod det(WW^dag - k1^2) */
    chirmt_complex z_chiral;  /* with the chiral prefactor */
    double err_est;
    int nodes;
} chirmt_super_result;

typedef struct chirmt_session chirmt_session;

CHIRMT_API const char* chirmt_version(void);
/* Message of the last failing call on this thread ("" if none). */
CHIRMT_API const char* chirmt_last_error(void);

CHIRMT_API chirmt_status chirmt_session_create(chirmt_session** out);
CHIRMT_API void chirmt_session_destroy(chirmt_session* s);
CHIRMT_API chirmt_status chirmt_session_set_threads(chirmt_session* s, int threads);
CHIRMT_API chirmt_status chirmt_session_set_rel_tol(chirmt_session* s, double rel_tol);
/* 0 = reduced (squared) ratio, 1 = full chiral ratio. */
CHIRMT_API chirmt_status chirmt_session_set_ratio_form(chirmt_session* s, int chiral);

/* Wishart eigenvalues of `count` draws, gamma*n values per draw. */
CHIRMT_API chirmt_status chirmt_sample(chirmt_session* s, const chirmt_ensemble* e, int beta, int n, int nu,
                                       uint64_t seed, long count, double* eigenvalues);

CHIRMT_API chirmt_status chirmt_z_ordinary(chirmt_session* s, const chirmt_problem* p, const chirmt_ensemble* e,
                                           long samples, uint64_t seed, chirmt_mc_result* out);
/* C is (n+nu) x (n+nu), row-major, Hermitean positive definite. */
CHIRMT_API chirmt_status chirmt_z_ordinary_correlated(chirmt_session* s, const chirmt_problem* p,
                                                      const chirmt_ensemble* base, const chirmt_complex* C,
                                                      long samples, uint64_t seed, chirmt_mc_result* out);
CHIRMT_API chirmt_status chirmt_z_unquenched_mc(chirmt_session* s, const chirmt_problem* p, const double* masses,
                                                int n_flavors, long samples, uint64_t seed, chirmt_mc_result* out);

CHIRMT_API chirmt_status chirmt_z_super(chirmt_session* s, const chirmt_problem* p, const chirmt_ensemble* e,
                                        chirmt_super_result* out);
/* Eigenvalues of the correlation matrix, n+nu of them. */
CHIRMT_API chirmt_status chirmt_z_super_correlated(chirmt_session* s, const chirmt_problem* p,
                                                   const double* c_eigenvalues, chirmt_super_result* out);
CHIRMT_API chirmt_status chirmt_z_unquenched_super(chirmt_session* s, const chirmt_problem* p, double mass,
                                                   chirmt_super_result* out);

/* Microscopic Gaussian limit; xi = n*kappa per source, ordered bosonic first. */
CHIRMT_API chirmt_status chirmt_z_micro(chirmt_session* s, int k1, int k2, int nu, const chirmt_complex* xi,
                                        chirmt_complex* out, double* err_est);
CHIRMT_API chirmt_status chirmt_z_micro_lorentz_heavy(chirmt_session* s, int nu, chirmt_complex xi, double G,
                                                      double mu_tilde, chirmt_complex* out, double* err_est);
/* Partially quenched microscopic value, up to a mu-independent constant. */
CHIRMT_API chirmt_status chirmt_z_unquenched_micro(chirmt_session* s, int nu, double mu, double M,
                                                   chirmt_complex* out, double* err_est);
CHIRMT_API chirmt_status chirmt_chiral_lagrangian(chirmt_session* s, double phi, double M, double mu, int nu,
                                                  chirmt_complex* out);

/* Histogram; edges has bins+1 entries, density and per_matrix bins entries.
   spectrum: 0 Wishart, 1 chiral. hi <= lo picks the range from the data. */
CHIRMT_API chirmt_status chirmt_density(chirmt_session* s, const chirmt_ensemble* e, int beta, int n, int nu,
                                        long samples, int bins, uint64_t seed, int spectrum, int microscopic,
                                        double lo, double hi, double* edges, double* density, double* per_matrix,
                                        long* zero_modes);
CHIRMT_API chirmt_status chirmt_microscopic_density_reference(int nu, double zeta, double* out);

CHIRMT_API int chirmt_scenario_count(void);
CHIRMT_API const char* chirmt_scenario_name(int index);
/* Runs a verification scenario ("identities" runs the algebra suite). The
   JSON report is returned in *json_out, released with chirmt_free_string. */
CHIRMT_API chirmt_status chirmt_verify(chirmt_session* s, const char* scenario, uint64_t seed, long samples,
                                       char** json_out, int* passed);
CHIRMT_API void chirmt_free_string(char* p);

#ifdef __cplusplus
}
#endif

#endif
