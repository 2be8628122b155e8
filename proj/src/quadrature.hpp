#pragma once

#include <complex>
#include <functional>
#include <string>
#include <vector>

namespace chirmt {

using cplx = std::complex<double>;

enum class RuleKind { Legendre, Hermite, PeriodicTrapezoid };
enum class Mapping { None, Interval, HalfLine };

// A rule on its reference domain plus an optional map to the target domain.
// Weights already include the Jacobian of the mapping.
struct QuadratureRule {
    RuleKind kind = RuleKind::Legendre;
    Mapping mapping = Mapping::None;
    std::vector<double> nodes;
    std::vector<double> weights;

    std::size_t size() const { return nodes.size(); }
};

constexpr int kTrapezoidNodeCap = 1 << 16;
constexpr int kGaussNodeCap = 1 << 12;

QuadratureRule gauss_legendre(int m);                        // [-1, 1]
QuadratureRule gauss_legendre(int m, double a, double b);    // [a, b]
QuadratureRule gauss_hermite(int m);                         // weight e^{-x^2} on R
// Half-line [0, inf) through x = t/(1-t), t Gauss-Legendre on [0, 1).
QuadratureRule half_line(int m);
// θ_j = 2πj/m with weights 1/m, i.e. the normalized measure dθ/2π.
QuadratureRule periodic_trapezoid(int m);

QuadratureRule make_rule(RuleKind kind, Mapping mapping, int m, double a = 0.0, double b = 1.0);

struct LadderConfig {
    RuleKind kind = RuleKind::Legendre;
    Mapping mapping = Mapping::None;
    double a = -1.0, b = 1.0;       // only for Mapping::Interval
    int start = 16;
    int cap = 0;                    // 0 picks the default cap for the kind
    double rel_tol = 1e-10;
    double abs_floor = 1e-300;      // guards the relative test near zero
};

struct IntegrationResult {
    cplx value;
    double err_est = 0.0;
    int nodes = 0;
};

double apply(const QuadratureRule& r, const std::function<double(double)>& f);
cplx apply(const QuadratureRule& r, const std::function<cplx(double)>& f);

// Doubles the node count until two successive estimates agree to rel_tol.
// Throws ConvergenceError carrying the best estimate when the cap is hit.
IntegrationResult integrate(const std::function<cplx(double)>& f, const LadderConfig& cfg);

// Two-axis tensor product, both axes refined together.
IntegrationResult integrate_2d(const std::function<cplx(double, double)>& f, const LadderConfig& x,
                               const LadderConfig& y);

std::string to_string(RuleKind k);

}  // namespace chirmt
