#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace chirmt {

using cplx = std::complex<double>;
using Mask = std::uint32_t;

constexpr int kMaxGenerators = 32;

// Element of the Grassmann algebra over `num_generators` anticommuting
// generators. Monomials are stored in canonical (ascending index) order as
// bitmasks, kept sorted by mask with no zero coefficients.
class Grassmann {
public:
    Grassmann() = default;
    explicit Grassmann(int num_generators);
    Grassmann(int num_generators, cplx scalar);

    static Grassmann generator(int num_generators, int index);
    static Grassmann monomial(int num_generators, Mask mask, cplx c = 1.0);

    int num_generators() const { return ngen_; }
    const std::vector<std::pair<Mask, cplx>>& terms() const { return terms_; }

    cplx body() const;
    cplx coeff(Mask m) const;
    Grassmann nilpotent_part() const;
    Grassmann even_part() const;
    Grassmann odd_part() const;
    bool is_even(double tol = 0.0) const;
    bool is_odd(double tol = 0.0) const;
    bool is_zero(double tol = 0.0) const;
    double max_abs() const;

    // Smallest k with nilpotent_part()^k == 0.
    int nilpotency_order() const;

    Grassmann operator-() const;
    Grassmann& operator+=(const Grassmann& o);
    Grassmann& operator-=(const Grassmann& o);
    Grassmann& operator*=(const Grassmann& o);
    Grassmann& operator*=(cplx c);

    // Inverse via body inverse and the terminating geometric series.
    Grassmann inverse() const;

    std::string dump() const;

    friend Grassmann operator*(const Grassmann& a, const Grassmann& b);

private:
    void add_term(Mask m, cplx c);
    void canonicalize();

    int ngen_ = 0;
    std::vector<std::pair<Mask, cplx>> terms_;
};

Grassmann operator+(Grassmann a, const Grassmann& b);
Grassmann operator-(Grassmann a, const Grassmann& b);
Grassmann operator*(Grassmann a, cplx c);
Grassmann operator*(cplx c, Grassmann a);
Grassmann operator+(Grassmann a, cplx c);
Grassmann operator-(Grassmann a, cplx c);

// Sign of the product of two disjoint canonical monomials.
int monomial_sign(Mask a, Mask b);

// Iterated Berezin integral, last listed generator integrated first,
// with the convention  ∫dη η = 1.
Grassmann berezin(const Grassmann& f, std::span<const int> generators);
Grassmann berezin(const Grassmann& f, std::initializer_list<int> generators);

// f(x) for an even x, from the derivatives f^(k)(body x), k = 0..K.
Grassmann lift_scalar(std::span<const cplx> derivatives, const Grassmann& x);
// Same, but the derivatives are requested on demand: deriv(body, k).
Grassmann lift_scalar(const std::function<cplx(cplx, int)>& deriv, const Grassmann& x);

Grassmann gexp(const Grassmann& x);
Grassmann glog(const Grassmann& x);
Grassmann gpow(const Grassmann& x, cplx p);
Grassmann gpow(const Grassmann& x, int p);

}  // namespace chirmt
