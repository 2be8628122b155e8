#include "supermatrix.hpp"

#include "errors.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <sstream>

namespace chirmt {

SuperMatrix::SuperMatrix(Dims rows, Dims cols, int num_generators)
    : rows_(rows), cols_(cols), ngen_(num_generators),
      a_(std::size_t(rows.total()) * cols.total(), Grassmann(num_generators)) {
    if (rows.b < 0 || rows.f < 0 || cols.b < 0 || cols.f < 0) throw StructuralError("negative block size");
}

SuperMatrix SuperMatrix::identity(Dims d, int num_generators) {
    SuperMatrix m(d, num_generators);
    for (int i = 0; i < d.total(); ++i) m(i, i) = Grassmann(num_generators, 1.0);
    return m;
}

SuperMatrix SuperMatrix::diagonal(Dims d, const std::vector<cplx>& diag, int num_generators) {
    if (int(diag.size()) != d.total()) throw StructuralError("diagonal length mismatch");
    SuperMatrix m(d, num_generators);
    for (int i = 0; i < d.total(); ++i) m(i, i) = Grassmann(num_generators, diag[i]);
    return m;
}

void SuperMatrix::check_grading(double tol) const {
    for (int i = 0; i < rows_.total(); ++i)
        for (int j = 0; j < cols_.total(); ++j) {
            const Grassmann& e = (*this)(i, j);
            bool ok = odd_entry(i, j) ? e.is_odd(tol) : e.is_even(tol);
            if (!ok)
                throw StructuralError("entry (" + std::to_string(i) + "," + std::to_string(j) +
                                      ") violates the block grading");
        }
}

SuperMatrix SuperMatrix::block(bool row_fermionic, bool col_fermionic) const {
    Dims r = row_fermionic ? Dims{rows_.f, 0} : Dims{rows_.b, 0};
    Dims c = col_fermionic ? Dims{cols_.f, 0} : Dims{cols_.b, 0};
    int r0 = row_fermionic ? rows_.b : 0;
    int c0 = col_fermionic ? cols_.b : 0;
    // Blocks are returned as plain (k|0) arrays; grading is the caller's business.
    SuperMatrix out(r, c, ngen_);
    for (int i = 0; i < r.b; ++i)
        for (int j = 0; j < c.b; ++j) out(i, j) = (*this)(r0 + i, c0 + j);
    return out;
}

SuperMatrix& SuperMatrix::operator+=(const SuperMatrix& o) {
    if (!(rows_ == o.rows_ && cols_ == o.cols_)) throw StructuralError("shape mismatch in +");
    for (std::size_t k = 0; k < a_.size(); ++k) a_[k] += o.a_[k];
    return *this;
}

SuperMatrix& SuperMatrix::operator-=(const SuperMatrix& o) {
    if (!(rows_ == o.rows_ && cols_ == o.cols_)) throw StructuralError("shape mismatch in -");
    for (std::size_t k = 0; k < a_.size(); ++k) a_[k] -= o.a_[k];
    return *this;
}

SuperMatrix& SuperMatrix::operator*=(cplx c) {
    for (auto& e : a_) e *= c;
    return *this;
}

std::string SuperMatrix::dump() const {
    std::ostringstream os;
    for (int i = 0; i < rows_.total(); ++i)
        for (int j = 0; j < cols_.total(); ++j) os << "[" << i << "," << j << "]\n" << (*this)(i, j).dump();
    return os.str();
}

SuperMatrix operator+(SuperMatrix a, const SuperMatrix& b) { return a += b; }
SuperMatrix operator-(SuperMatrix a, const SuperMatrix& b) { return a -= b; }
SuperMatrix operator*(cplx c, SuperMatrix a) { return a *= c; }

SuperMatrix operator*(const SuperMatrix& a, const SuperMatrix& b) {
    if (!(a.cols() == b.rows())) throw StructuralError("shape mismatch in product");
    if (a.num_generators() != b.num_generators()) throw StructuralError("generator mismatch in product");
    SuperMatrix c(a.rows(), b.cols(), a.num_generators());
    int n = a.rows().total(), k = a.cols().total(), m = b.cols().total();
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j) {
            Grassmann s(a.num_generators());
            for (int l = 0; l < k; ++l) s += a(i, l) * b(l, j);
            c(i, j) = std::move(s);
        }
    return c;
}

Grassmann str(const SuperMatrix& m) {
    if (!m.is_square()) throw StructuralError("supertrace of a non-square matrix");
    Grassmann s(m.num_generators());
    for (int i = 0; i < m.rows().b; ++i) s += m(i, i);
    for (int i = m.rows().b; i < m.rows().total(); ++i) s -= m(i, i);
    return s;
}

namespace {

// Gauss-Jordan on a square array of commuting (even) entries.
// Returns the determinant; if `inv` is given it receives the inverse.
Grassmann eliminate(std::vector<Grassmann> a, int n, int ngen, std::vector<Grassmann>* inv) {
    std::vector<Grassmann> b;
    if (inv) {
        b.assign(std::size_t(n) * n, Grassmann(ngen));
        for (int i = 0; i < n; ++i) b[std::size_t(i) * n + i] = Grassmann(ngen, 1.0);
    }
    auto at = [n](std::vector<Grassmann>& v, int i, int j) -> Grassmann& { return v[std::size_t(i) * n + j]; };
    Grassmann det(ngen, 1.0);
    for (int c = 0; c < n; ++c) {
        int piv = c;
        double best = std::abs(at(a, c, c).body());
        for (int r = c + 1; r < n; ++r)
            if (std::abs(at(a, r, c).body()) > best) best = std::abs(at(a, r, c).body()), piv = r;
        if (best == 0.0) throw SingularityError("matrix body is singular");
        if (piv != c) {
            for (int j = 0; j < n; ++j) std::swap(at(a, c, j), at(a, piv, j));
            if (inv)
                for (int j = 0; j < n; ++j) std::swap(at(b, c, j), at(b, piv, j));
            det = -det;
        }
        Grassmann p = at(a, c, c);
        det = det * p;
        Grassmann pinv = p.inverse();
        for (int j = 0; j < n; ++j) at(a, c, j) = at(a, c, j) * pinv;
        if (inv)
            for (int j = 0; j < n; ++j) at(b, c, j) = at(b, c, j) * pinv;
        for (int r = 0; r < n; ++r) {
            if (r == c) continue;
            Grassmann f = at(a, r, c);
            if (f.is_zero()) continue;
            for (int j = 0; j < n; ++j) at(a, r, j) -= f * at(a, c, j);
            if (inv)
                for (int j = 0; j < n; ++j) at(b, r, j) -= f * at(b, c, j);
        }
    }
    if (inv) *inv = std::move(b);
    return det;
}

std::vector<Grassmann> entries(const SuperMatrix& m) {
    std::vector<Grassmann> v;
    int n = m.rows().total();
    v.reserve(std::size_t(n) * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) v.push_back(m(i, j));
    return v;
}

SuperMatrix from_entries(Dims d, int ngen, const std::vector<Grassmann>& v) {
    SuperMatrix m(d, ngen);
    int n = d.total();
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) = v[std::size_t(i) * n + j];
    return m;
}

}  // namespace

Grassmann even_det(const SuperMatrix& m) {
    if (!m.is_square()) throw StructuralError("determinant of a non-square matrix");
    int n = m.rows().total();
    if (n == 0) return Grassmann(m.num_generators(), 1.0);
    return eliminate(entries(m), n, m.num_generators(), nullptr);
}

SuperMatrix even_inverse(const SuperMatrix& m) {
    if (!m.is_square()) throw StructuralError("inverse of a non-square matrix");
    int n = m.rows().total();
    std::vector<Grassmann> inv;
    if (n > 0) eliminate(entries(m), n, m.num_generators(), &inv);
    return from_entries(m.rows(), m.num_generators(), inv);
}

Grassmann sdet(const SuperMatrix& m) {
    if (!m.is_square()) throw StructuralError("superdeterminant of a non-square matrix");
    SuperMatrix A = m.block(false, false), B = m.block(false, true);
    SuperMatrix C = m.block(true, false), D = m.block(true, true);
    if (m.rows().f == 0) return even_det(A);
    Grassmann detD = even_det(D);
    if (detD.body() == cplx(0.0)) throw SingularityError("sdet: fermion-fermion block is singular");
    if (m.rows().b == 0) return detD.inverse();
    SuperMatrix S = A - B * even_inverse(D) * C;
    return even_det(S) * detD.inverse();
}

SuperMatrix inverse(const SuperMatrix& m) {
    if (!m.is_square()) throw StructuralError("inverse of a non-square matrix");
    Dims d = m.rows();
    if (d.f == 0 || d.b == 0) return even_inverse(m);
    int ngen = m.num_generators();
    SuperMatrix A = m.block(false, false), B = m.block(false, true);
    SuperMatrix C = m.block(true, false), D = m.block(true, true);
    SuperMatrix Di = even_inverse(D);
    SuperMatrix Si = even_inverse(A - B * Di * C);
    SuperMatrix TR = cplx(-1.0) * (Si * B * Di);
    SuperMatrix BL = cplx(-1.0) * (Di * C * Si);
    SuperMatrix BR = Di + Di * C * Si * B * Di;
    SuperMatrix out(d, ngen);
    for (int i = 0; i < d.b; ++i) {
        for (int j = 0; j < d.b; ++j) out(i, j) = Si(i, j);
        for (int j = 0; j < d.f; ++j) out(i, d.b + j) = TR(i, j);
    }
    for (int i = 0; i < d.f; ++i) {
        for (int j = 0; j < d.b; ++j) out(d.b + i, j) = BL(i, j);
        for (int j = 0; j < d.f; ++j) out(d.b + i, d.b + j) = BR(i, j);
    }
    return out;
}

Grassmann conjugate(const Grassmann& g, const std::vector<int>& conj_map) {
    int ngen = g.num_generators();
    if (int(conj_map.size()) != ngen) throw StructuralError("conjugation map has wrong length");
    Grassmann out(ngen);
    std::vector<int> img;
    for (const auto& [m, c] : g.terms()) {
        img.clear();
        for (Mask r = m; r; r &= r - 1) img.push_back(conj_map[std::countr_zero(r)]);
        std::reverse(img.begin(), img.end());
        // Sign of sorting the image sequence.
        int inv = 0;
        Mask mask = 0;
        for (std::size_t a = 0; a < img.size(); ++a) {
            mask |= Mask{1} << img[a];
            for (std::size_t b = a + 1; b < img.size(); ++b) inv += img[a] > img[b];
        }
        out += Grassmann::monomial(ngen, mask, (inv & 1) ? -std::conj(c) : std::conj(c));
    }
    return out;
}

SuperMatrix adjoint(const SuperMatrix& m, const std::vector<int>& conj_map) {
    SuperMatrix out(m.cols(), m.rows(), m.num_generators());
    for (int i = 0; i < m.rows().total(); ++i)
        for (int j = 0; j < m.cols().total(); ++j) out(j, i) = conjugate(m(i, j), conj_map);
    return out;
}

}  // namespace chirmt
