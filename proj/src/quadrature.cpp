#include "quadrature.hpp"

#include <cstdio>

#include "errors.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>

namespace chirmt {

namespace {

constexpr double kPi = std::numbers::pi;

QuadratureRule legendre_uncached(int m) {
    QuadratureRule r;
    r.kind = RuleKind::Legendre;
    r.nodes.resize(m);
    r.weights.resize(m);
    for (int i = 0; i < (m + 1) / 2; ++i) {
        double x = std::cos(kPi * (i + 0.75) / (m + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= m; ++k) {
                double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            if (m == 1) p0 = 1.0;
            dp = m * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        // Recompute the derivative at the converged node.
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= m; ++k) {
            double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        dp = m * (x * p1 - p0) / (x * x - 1.0);
        double w = 2.0 / ((1.0 - x * x) * dp * dp);
        r.nodes[i] = -x;
        r.nodes[m - 1 - i] = x;
        r.weights[i] = r.weights[m - 1 - i] = w;
    }
    if (m % 2 == 1) r.nodes[m / 2] = 0.0;
    return r;
}

QuadratureRule hermite_uncached(int m) {
    // Golub-Welsch on the Jacobi matrix of the physicists' Hermite polynomials.
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(m);
    Eigen::VectorXd sub(m > 1 ? m - 1 : 0);
    for (int k = 1; k < m; ++k) sub[k - 1] = std::sqrt(k / 2.0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
    QuadratureRule r;
    r.kind = RuleKind::Hermite;
    r.nodes.resize(m);
    r.weights.resize(m);
    const double mu0 = std::sqrt(kPi);
    for (int i = 0; i < m; ++i) {
        r.nodes[i] = es.eigenvalues()[i];
        double v = es.eigenvectors()(0, i);
        r.weights[i] = mu0 * v * v;
    }
    return r;
}

template <class Build>
const QuadratureRule& cached(std::map<int, QuadratureRule>& cache, std::mutex& mu, int m, Build build) {
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(m);
    if (it == cache.end()) it = cache.emplace(m, build(m)).first;
    return it->second;
}

int default_cap(RuleKind k) { return k == RuleKind::PeriodicTrapezoid ? kTrapezoidNodeCap : kGaussNodeCap; }

}  // namespace

QuadratureRule gauss_legendre(int m) {
    if (m < 1 || m > kGaussNodeCap) throw InputError("Gauss-Legendre node count out of range");
    static std::map<int, QuadratureRule> cache;
    static std::mutex mu;
    return cached(cache, mu, m, legendre_uncached);
}

QuadratureRule gauss_legendre(int m, double a, double b) {
    QuadratureRule r = gauss_legendre(m);
    r.mapping = Mapping::Interval;
    double h = 0.5 * (b - a), c = 0.5 * (b + a);
    for (std::size_t i = 0; i < r.size(); ++i) {
        r.nodes[i] = c + h * r.nodes[i];
        r.weights[i] *= h;
    }
    return r;
}

QuadratureRule gauss_hermite(int m) {
    if (m < 1 || m > kGaussNodeCap) throw InputError("Gauss-Hermite node count out of range");
    static std::map<int, QuadratureRule> cache;
    static std::mutex mu;
    return cached(cache, mu, m, hermite_uncached);
}

QuadratureRule half_line(int m) {
    QuadratureRule r = gauss_legendre(m, 0.0, 1.0);
    r.mapping = Mapping::HalfLine;
    for (std::size_t i = 0; i < r.size(); ++i) {
        double t = r.nodes[i];
        double one = 1.0 - t;
        r.nodes[i] = t / one;
        r.weights[i] /= one * one;
    }
    return r;
}

QuadratureRule periodic_trapezoid(int m) {
    if (m < 1 || m > kTrapezoidNodeCap) throw InputError("trapezoid node count out of range");
    QuadratureRule r;
    r.kind = RuleKind::PeriodicTrapezoid;
    r.nodes.resize(m);
    r.weights.assign(m, 1.0 / m);
    for (int j = 0; j < m; ++j) r.nodes[j] = 2.0 * kPi * j / m;
    return r;
}

QuadratureRule make_rule(RuleKind kind, Mapping mapping, int m, double a, double b) {
    switch (kind) {
        case RuleKind::PeriodicTrapezoid: return periodic_trapezoid(m);
        case RuleKind::Hermite: return gauss_hermite(m);
        case RuleKind::Legendre:
            if (mapping == Mapping::HalfLine) return half_line(m);
            if (mapping == Mapping::Interval) return gauss_legendre(m, a, b);
            return gauss_legendre(m);
    }
    throw InputError("unknown rule kind");
}

double apply(const QuadratureRule& r, const std::function<double(double)>& f) {
    double s = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) s += r.weights[i] * f(r.nodes[i]);
    return s;
}

cplx apply(const QuadratureRule& r, const std::function<cplx(double)>& f) {
    cplx s = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) s += r.weights[i] * f(r.nodes[i]);
    return s;
}

IntegrationResult integrate(const std::function<cplx(double)>& f, const LadderConfig& cfg) {
    int cap = cfg.cap > 0 ? cfg.cap : default_cap(cfg.kind);
    int m = cfg.start;
    cplx prev = chirmt::apply(make_rule(cfg.kind, cfg.mapping, m, cfg.a, cfg.b), f);
    if (!std::isfinite(prev.real()) || !std::isfinite(prev.imag()))
        throw NumericError("integrand not finite on quadrature nodes");
    double err = std::numeric_limits<double>::infinity();
    while (2 * m <= cap) {
        m *= 2;
        cplx cur = chirmt::apply(make_rule(cfg.kind, cfg.mapping, m, cfg.a, cfg.b), f);
        if (!std::isfinite(cur.real()) || !std::isfinite(cur.imag()))
            throw NumericError("integrand not finite on quadrature nodes");
        err = std::abs(cur - prev);
        prev = cur;
        if (err <= cfg.rel_tol * std::max(std::abs(cur), cfg.abs_floor)) return {cur, err, m};
    }
    char msg[96];
    std::snprintf(msg, sizeof msg, "quadrature did not reach rel tol %g at %d nodes", cfg.rel_tol, m);
    throw ConvergenceError(msg,
                           prev.real(), prev.imag(), err);
}

IntegrationResult integrate_2d(const std::function<cplx(double, double)>& f, const LadderConfig& x,
                               const LadderConfig& y) {
    int capx = x.cap > 0 ? x.cap : default_cap(x.kind);
    int capy = y.cap > 0 ? y.cap : default_cap(y.kind);
    auto eval = [&](int mx, int my) {
        QuadratureRule rx = make_rule(x.kind, x.mapping, mx, x.a, x.b);
        QuadratureRule ry = make_rule(y.kind, y.mapping, my, y.a, y.b);
        cplx s = 0.0;
        for (std::size_t i = 0; i < rx.size(); ++i) {
            cplx inner = 0.0;
            for (std::size_t j = 0; j < ry.size(); ++j) inner += ry.weights[j] * f(rx.nodes[i], ry.nodes[j]);
            s += rx.weights[i] * inner;
        }
        if (!std::isfinite(s.real()) || !std::isfinite(s.imag()))
            throw NumericError("integrand not finite on quadrature nodes");
        return s;
    };
    int mx = x.start, my = y.start;
    cplx prev = eval(mx, my);
    double err = std::numeric_limits<double>::infinity();
    double tol = std::min(x.rel_tol, y.rel_tol);
    while (2 * mx <= capx || 2 * my <= capy) {
        if (2 * mx <= capx) mx *= 2;
        if (2 * my <= capy) my *= 2;
        cplx cur = eval(mx, my);
        err = std::abs(cur - prev);
        prev = cur;
        if (err <= tol * std::max(std::abs(cur), x.abs_floor)) return {cur, err, mx * my};
    }
    throw ConvergenceError("2d quadrature did not converge", prev.real(), prev.imag(), err);
}

std::string to_string(RuleKind k) {
    switch (k) {
        case RuleKind::Legendre: return "legendre";
        case RuleKind::Hermite: return "hermite";
        case RuleKind::PeriodicTrapezoid: return "periodic-trapezoid";
    }
    return "?";
}

}  // namespace chirmt
