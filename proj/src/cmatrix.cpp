#include "epchain/detail/cmatrix.hpp"

#include <cmath>
#include <stdexcept>

namespace epchain::detail {

CMat CMat::identity(int dim) {
    CMat m(dim);
    for (int i = 0; i < dim; ++i) m(i, i) = 1.0;
    return m;
}

CMat multiply(const CMat& x, const CMat& y) {
    CMat out(x.n);
    for (int i = 0; i < x.n; ++i)
        for (int k = 0; k < x.n; ++k) {
            const cplx xik = x(i, k);
            if (xik == cplx{}) continue;
            for (int j = 0; j < x.n; ++j) out(i, j) += xik * y(k, j);
        }
    return out;
}

std::vector<cplx> multiply(const CMat& x, const std::vector<cplx>& v) {
    std::vector<cplx> out(x.n);
    for (int i = 0; i < x.n; ++i) {
        cplx s = 0.0;
        for (int j = 0; j < x.n; ++j) s += x(i, j) * v[j];
        out[i] = s;
    }
    return out;
}

double inf_norm(const CMat& x) {
    double best = 0.0;
    for (int i = 0; i < x.n; ++i) {
        double row = 0.0;
        for (int j = 0; j < x.n; ++j) row += std::abs(x(i, j));
        if (row > best) best = row;
    }
    return best;
}

double norm2(const std::vector<cplx>& v) {
    double s = 0.0;
    for (const auto& z : v) s += std::norm(z);
    return std::sqrt(s);
}

cplx dot(const std::vector<cplx>& x, const std::vector<cplx>& y) {
    cplx s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += std::conj(x[i]) * y[i];
    return s;
}

void normalize(std::vector<cplx>& v) {
    const double nrm = norm2(v);
    if (nrm == 0.0) throw std::invalid_argument("cannot normalize a zero vector");
    for (auto& z : v) z /= nrm;
}

LU::LU(CMat m) : lu(std::move(m)), piv(lu.n) {
    const int n = lu.n;
    const double scale = inf_norm(lu);
    pivot_floor = std::max(scale * 1e-18, 1e-30);
    for (int i = 0; i < n; ++i) piv[i] = i;
    for (int col = 0; col < n; ++col) {
        int best = col;
        double bestmag = std::abs(lu(col, col));
        for (int r = col + 1; r < n; ++r) {
            const double mag = std::abs(lu(r, col));
            if (mag > bestmag) {
                bestmag = mag;
                best = r;
            }
        }
        if (best != col) {
            for (int j = 0; j < n; ++j) std::swap(lu(col, j), lu(best, j));
            std::swap(piv[col], piv[best]);
            sign = -sign;
        }
        if (std::abs(lu(col, col)) < pivot_floor) lu(col, col) = pivot_floor;
        const cplx inv_piv = 1.0 / lu(col, col);
        for (int r = col + 1; r < n; ++r) {
            const cplx f = lu(r, col) * inv_piv;
            lu(r, col) = f;
            if (f == cplx{}) continue;
            for (int j = col + 1; j < n; ++j) lu(r, j) -= f * lu(col, j);
        }
    }
}

std::vector<cplx> LU::solve(std::vector<cplx> b) const {
    const int n = lu.n;
    std::vector<cplx> x(n);
    for (int i = 0; i < n; ++i) x[i] = b[piv[i]];
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < i; ++j) x[i] -= lu(i, j) * x[j];
    for (int i = n - 1; i >= 0; --i) {
        for (int j = i + 1; j < n; ++j) x[i] -= lu(i, j) * x[j];
        x[i] /= lu(i, i);
    }
    return x;
}

CMat inverse(const CMat& x) {
    LU f(x);
    CMat out(x.n);
    std::vector<cplx> e(x.n);
    for (int col = 0; col < x.n; ++col) {
        std::fill(e.begin(), e.end(), cplx{});
        e[col] = 1.0;
        const auto sol = f.solve(e);
        for (int i = 0; i < x.n; ++i) out(i, col) = sol[i];
    }
    return out;
}

double real_det_inplace(std::vector<double>& m, int n) {
    double det = 1.0;
    for (int col = 0; col < n; ++col) {
        int best = col;
        double bestmag = std::abs(m[static_cast<std::size_t>(col) * n + col]);
        for (int r = col + 1; r < n; ++r) {
            const double mag = std::abs(m[static_cast<std::size_t>(r) * n + col]);
            if (mag > bestmag) {
                bestmag = mag;
                best = r;
            }
        }
        if (bestmag == 0.0) return 0.0;
        if (best != col) {
            for (int j = 0; j < n; ++j)
                std::swap(m[static_cast<std::size_t>(col) * n + j], m[static_cast<std::size_t>(best) * n + j]);
            det = -det;
        }
        const double piv = m[static_cast<std::size_t>(col) * n + col];
        det *= piv;
        for (int r = col + 1; r < n; ++r) {
            const double f = m[static_cast<std::size_t>(r) * n + col] / piv;
            if (f == 0.0) continue;
            for (int j = col; j < n; ++j)
                m[static_cast<std::size_t>(r) * n + j] -= f * m[static_cast<std::size_t>(col) * n + j];
        }
    }
    return det;
}

}  // namespace epchain::detail
