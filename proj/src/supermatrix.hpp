#pragma once

#include "grassmann.hpp"

#include <string>
#include <vector>

namespace chirmt {

// Block dimension (bosonic | fermionic).
struct Dims {
    int b = 0;
    int f = 0;
    int total() const { return b + f; }
    bool operator==(const Dims&) const = default;
};

// Graded (p1|q1) x (p2|q2) matrix over a Grassmann algebra. Entries in the
// BB and FF blocks are even, entries in BF and FB are odd. A square matrix
// (rows == cols) is what the rest of the code calls a supermatrix.
class SuperMatrix {
public:
    SuperMatrix() = default;
    SuperMatrix(Dims rows, Dims cols, int num_generators);
    SuperMatrix(Dims square, int num_generators) : SuperMatrix(square, square, num_generators) {}

    static SuperMatrix identity(Dims d, int num_generators);
    static SuperMatrix diagonal(Dims d, const std::vector<cplx>& diag, int num_generators);

    Dims rows() const { return rows_; }
    Dims cols() const { return cols_; }
    int num_generators() const { return ngen_; }
    bool is_square() const { return rows_ == cols_; }

    // Entry (i, j) in the full (b+f) x (b+f) layout, bosonic indices first.
    Grassmann& operator()(int i, int j) { return a_[std::size_t(i) * cols_.total() + j]; }
    const Grassmann& operator()(int i, int j) const { return a_[std::size_t(i) * cols_.total() + j]; }

    bool odd_entry(int i, int j) const { return (i >= rows_.b) != (j >= cols_.b); }

    // Throws StructuralError when an entry has the wrong parity.
    void check_grading(double tol = 0.0) const;

    SuperMatrix block(bool row_fermionic, bool col_fermionic) const;

    SuperMatrix& operator+=(const SuperMatrix& o);
    SuperMatrix& operator-=(const SuperMatrix& o);
    SuperMatrix& operator*=(cplx c);

    std::string dump() const;

private:
    Dims rows_, cols_;
    int ngen_ = 0;
    std::vector<Grassmann> a_;
};

SuperMatrix operator+(SuperMatrix a, const SuperMatrix& b);
SuperMatrix operator-(SuperMatrix a, const SuperMatrix& b);
SuperMatrix operator*(const SuperMatrix& a, const SuperMatrix& b);
SuperMatrix operator*(cplx c, SuperMatrix a);

using RectSuperMatrix = SuperMatrix;

Grassmann str(const SuperMatrix& m);
Grassmann sdet(const SuperMatrix& m);
SuperMatrix inverse(const SuperMatrix& m);

// Determinant and inverse of a purely bosonic matrix with even (commuting)
// entries, by elimination pivoted on the body.
Grassmann even_det(const SuperMatrix& m);
SuperMatrix even_inverse(const SuperMatrix& m);

// Complex conjugation on the algebra: generator i goes to conj_map[i] and
// the order of generators in each monomial is reversed.
Grassmann conjugate(const Grassmann& g, const std::vector<int>& conj_map);
// Graded adjoint: transpose plus conjugation of every entry.
SuperMatrix adjoint(const SuperMatrix& m, const std::vector<int>& conj_map);

}  // namespace chirmt
