#include "grassmann.hpp"

#include "errors.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace chirmt {

namespace {

void check_ngen(int n) {
    if (n < 0 || n > kMaxGenerators)
        throw StructuralError("generator count out of range: " + std::to_string(n));
}

void check_same(const Grassmann& a, const Grassmann& b) {
    if (a.num_generators() != b.num_generators())
        throw StructuralError("Grassmann elements over different generator sets (" +
                              std::to_string(a.num_generators()) + " vs " +
                              std::to_string(b.num_generators()) + ")");
}

}  // namespace

int monomial_sign(Mask a, Mask b) {
    // Moving each generator of b leftwards past the larger generators of a.
    int swaps = 0;
    while (b) {
        int j = std::countr_zero(b);
        b &= b - 1;
        Mask above = (j >= 31) ? 0u : (a & ~((Mask{2} << j) - 1u));
        swaps += std::popcount(above);
    }
    return (swaps & 1) ? -1 : 1;
}

Grassmann::Grassmann(int num_generators) : ngen_(num_generators) { check_ngen(num_generators); }

Grassmann::Grassmann(int num_generators, cplx scalar) : ngen_(num_generators) {
    check_ngen(num_generators);
    if (scalar != cplx(0.0)) terms_.emplace_back(0u, scalar);
}

Grassmann Grassmann::generator(int num_generators, int index) {
    if (index < 0 || index >= num_generators)
        throw StructuralError("generator index out of range");
    return monomial(num_generators, Mask{1} << index);
}

Grassmann Grassmann::monomial(int num_generators, Mask mask, cplx c) {
    Grassmann g(num_generators);
    if (num_generators < 32 && (mask >> num_generators) != 0)
        throw StructuralError("monomial uses generators beyond the algebra");
    if (c != cplx(0.0)) g.terms_.emplace_back(mask, c);
    return g;
}

cplx Grassmann::body() const { return coeff(0u); }

cplx Grassmann::coeff(Mask m) const {
    auto it = std::lower_bound(terms_.begin(), terms_.end(), m,
                               [](const auto& t, Mask v) { return t.first < v; });
    if (it != terms_.end() && it->first == m) return it->second;
    return 0.0;
}

Grassmann Grassmann::nilpotent_part() const {
    Grassmann g(ngen_);
    for (const auto& t : terms_)
        if (t.first != 0u) g.terms_.push_back(t);
    return g;
}

Grassmann Grassmann::even_part() const {
    Grassmann g(ngen_);
    for (const auto& t : terms_)
        if (std::popcount(t.first) % 2 == 0) g.terms_.push_back(t);
    return g;
}

Grassmann Grassmann::odd_part() const {
    Grassmann g(ngen_);
    for (const auto& t : terms_)
        if (std::popcount(t.first) % 2 == 1) g.terms_.push_back(t);
    return g;
}

bool Grassmann::is_even(double tol) const { return odd_part().is_zero(tol); }
bool Grassmann::is_odd(double tol) const { return even_part().is_zero(tol); }

bool Grassmann::is_zero(double tol) const { return max_abs() <= tol; }

double Grassmann::max_abs() const {
    double m = 0.0;
    for (const auto& t : terms_) m = std::max(m, std::abs(t.second));
    return m;
}

int Grassmann::nilpotency_order() const {
    Grassmann nil = nilpotent_part();
    if (nil.terms_.empty()) return 1;
    Grassmann p = nil;
    int k = 1;
    while (!p.terms_.empty()) {
        p = p * nil;
        ++k;
    }
    return k;
}

void Grassmann::add_term(Mask m, cplx c) { terms_.emplace_back(m, c); }

void Grassmann::canonicalize() {
    std::sort(terms_.begin(), terms_.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    std::size_t out = 0;
    for (std::size_t i = 0; i < terms_.size();) {
        Mask m = terms_[i].first;
        cplx s = 0.0;
        for (; i < terms_.size() && terms_[i].first == m; ++i) s += terms_[i].second;
        if (s != cplx(0.0)) terms_[out++] = {m, s};
    }
    terms_.resize(out);
}

Grassmann Grassmann::operator-() const {
    Grassmann g = *this;
    for (auto& t : g.terms_) t.second = -t.second;
    return g;
}

Grassmann& Grassmann::operator+=(const Grassmann& o) {
    check_same(*this, o);
    terms_.insert(terms_.end(), o.terms_.begin(), o.terms_.end());
    canonicalize();
    return *this;
}

Grassmann& Grassmann::operator-=(const Grassmann& o) {
    check_same(*this, o);
    for (const auto& t : o.terms_) terms_.emplace_back(t.first, -t.second);
    canonicalize();
    return *this;
}

Grassmann operator*(const Grassmann& a, const Grassmann& b) {
    check_same(a, b);
    Grassmann r(a.ngen_);
    r.terms_.reserve(a.terms_.size() * b.terms_.size());
    for (const auto& [ma, ca] : a.terms_)
        for (const auto& [mb, cb] : b.terms_) {
            if (ma & mb) continue;
            r.add_term(ma | mb, double(monomial_sign(ma, mb)) * ca * cb);
        }
    r.canonicalize();
    return r;
}

Grassmann& Grassmann::operator*=(const Grassmann& o) { return *this = *this * o; }

Grassmann& Grassmann::operator*=(cplx c) {
    if (c == cplx(0.0)) {
        terms_.clear();
        return *this;
    }
    for (auto& t : terms_) t.second *= c;
    return *this;
}

Grassmann Grassmann::inverse() const {
    cplx b = body();
    if (b == cplx(0.0)) throw SingularityError("Grassmann element with zero body is not invertible");
    // (b + N)^{-1} = b^{-1} Σ_k (-N/b)^k, the series stops at the nilpotency order.
    Grassmann step = nilpotent_part() * (-1.0 / b);
    Grassmann term(ngen_, 1.0 / b);
    Grassmann sum = term;
    for (;;) {
        term = term * step;
        if (term.terms_.empty()) break;
        sum += term;
    }
    return sum;
}

std::string Grassmann::dump() const {
    std::ostringstream os;
    char buf[96];
    for (const auto& [m, c] : terms_) {
        std::snprintf(buf, sizeof buf, "%u: %.17g,%.17g\n", m, c.real(), c.imag());
        os << buf;
    }
    return os.str();
}

Grassmann operator+(Grassmann a, const Grassmann& b) { return a += b; }
Grassmann operator-(Grassmann a, const Grassmann& b) { return a -= b; }
Grassmann operator*(Grassmann a, cplx c) { return a *= c; }
Grassmann operator*(cplx c, Grassmann a) { return a *= c; }
Grassmann operator+(Grassmann a, cplx c) { return a += Grassmann(a.num_generators(), c); }
Grassmann operator-(Grassmann a, cplx c) { return a -= Grassmann(a.num_generators(), c); }

Grassmann berezin(const Grassmann& f, std::span<const int> generators) {
    Grassmann cur = f;
    for (auto it = generators.rbegin(); it != generators.rend(); ++it) {
        int g = *it;
        if (g < 0 || g >= f.num_generators()) throw StructuralError("Berezin generator out of range");
        Mask bit = Mask{1} << g;
        Grassmann next(f.num_generators());
        for (const auto& [m, c] : cur.terms()) {
            if (!(m & bit)) continue;
            // Bring η_g to the front, then drop it.
            int before = std::popcount(m & (bit - 1u));
            next += Grassmann::monomial(f.num_generators(), m & ~bit, (before & 1) ? -c : c);
        }
        cur = std::move(next);
    }
    return cur;
}

Grassmann berezin(const Grassmann& f, std::initializer_list<int> generators) {
    std::vector<int> g(generators);
    return berezin(f, std::span<const int>(g));
}

Grassmann lift_scalar(std::span<const cplx> derivatives, const Grassmann& x) {
    if (!x.is_even()) throw StructuralError("lift_scalar needs an even argument");
    int need = x.nilpotency_order();
    if (static_cast<int>(derivatives.size()) < need)
        throw CapabilityError("lift_scalar: " + std::to_string(derivatives.size()) +
                              " derivatives supplied, nilpotency order needs " + std::to_string(need));
    Grassmann nil = x.nilpotent_part();
    Grassmann out(x.num_generators(), derivatives[0]);
    Grassmann power(x.num_generators(), 1.0);
    double fact = 1.0;
    for (int k = 1; k < need; ++k) {
        power = power * nil;
        fact *= k;
        out += power * (derivatives[k] / fact);
    }
    return out;
}

Grassmann lift_scalar(const std::function<cplx(cplx, int)>& deriv, const Grassmann& x) {
    int need = x.nilpotency_order();
    std::vector<cplx> d(need);
    for (int k = 0; k < need; ++k) d[k] = deriv(x.body(), k);
    return lift_scalar(std::span<const cplx>(d), x);
}

Grassmann gexp(const Grassmann& x) {
    return lift_scalar([](cplx b, int) { return std::exp(b); }, x);
}

Grassmann glog(const Grassmann& x) {
    return lift_scalar(
        [](cplx b, int k) {
            if (k == 0) return std::log(b);
            // (k-1)! (-1)^{k-1} / b^k
            double f = 1.0;
            for (int i = 2; i < k; ++i) f *= i;
            return ((k % 2) ? 1.0 : -1.0) * f / std::pow(b, k);
        },
        x);
}

Grassmann gpow(const Grassmann& x, cplx p) {
    return lift_scalar(
        [p](cplx b, int k) {
            cplx fall = 1.0;
            for (int i = 0; i < k; ++i) fall *= (p - double(i));
            return fall * std::pow(b, p - double(k));
        },
        x);
}

Grassmann gpow(const Grassmann& x, int p) {
    if (p >= 0) {
        Grassmann r(x.num_generators(), 1.0), base = x;
        for (unsigned e = unsigned(p); e; e >>= 1) {
            if (e & 1u) r = r * base;
            if (e > 1u) base = base * base;
        }
        return r;
    }
    return gpow(x.inverse(), -p);
}

}  // namespace chirmt
