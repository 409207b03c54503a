#pragma once

#include <complex>
#include <vector>

namespace epchain::detail {

using cplx = std::complex<double>;

/// Minimal dense complex matrix, row-major. Sized for the n <= 16 chains
/// this library works with; everything is O(n^3) LU with partial pivoting.
struct CMat {
    int n = 0;
    std::vector<cplx> a;

    CMat() = default;
    explicit CMat(int dim) : n(dim), a(static_cast<std::size_t>(dim) * dim) {}

    cplx& operator()(int i, int j) { return a[static_cast<std::size_t>(i) * n + j]; }
    const cplx& operator()(int i, int j) const { return a[static_cast<std::size_t>(i) * n + j]; }

    static CMat identity(int dim);
};

CMat multiply(const CMat& x, const CMat& y);
std::vector<cplx> multiply(const CMat& x, const std::vector<cplx>& v);

double inf_norm(const CMat& x);
double norm2(const std::vector<cplx>& v);
cplx dot(const std::vector<cplx>& x, const std::vector<cplx>& y);  // conj(x) . y
void normalize(std::vector<cplx>& v);

/// LU factorization with partial pivoting, kept for repeated solves.
/// Exactly singular pivots are replaced by a tiny perturbation so that
/// inverse iteration against a singular shift still produces the strongly
/// amplified direction instead of failing.
struct LU {
    CMat lu;
    std::vector<int> piv;
    int sign = 1;
    double pivot_floor = 0.0;

    explicit LU(CMat m);
    std::vector<cplx> solve(std::vector<cplx> b) const;
};

CMat inverse(const CMat& x);

/// Real LU determinant with partial pivoting (used for the Sylvester
/// resultant). Row-major n x n input, destroyed in place.
double real_det_inplace(std::vector<double>& m, int n);

}  // namespace epchain::detail
