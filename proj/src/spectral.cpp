#include "epchain/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <limits>
#include <numbers>

#include "epchain/detail/cmatrix.hpp"

namespace epchain {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

double max_abs_coeff(const std::vector<double>& c) {
    double m = 0.0;
    for (double x : c) m = std::max(m, std::abs(x));
    return m;
}

/// Horner evaluation returning p(z) and p'(z).
std::pair<cplx, cplx> eval_with_derivative(const std::vector<double>& c, cplx z) {
    cplx p = c.back();
    cplx dp = 0.0;
    for (int k = static_cast<int>(c.size()) - 2; k >= 0; --k) {
        dp = dp * z + p;
        p = p * z + c[k];
    }
    return {p, dp};
}

/// Scale of rounding noise when evaluating p at z; used to recognize that a
/// residual has hit the double-precision floor rather than stagnated.
double eval_noise(const std::vector<double>& c, cplx z) {
    const double az = std::abs(z);
    double s = 0.0;
    double zp = 1.0;
    for (double ck : c) {
        s += std::abs(ck) * zp;
        zp *= az;
    }
    return 2.0 * kEps * s;
}

std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

double unit_double(std::uint64_t bits) {
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

/// Deterministic start vector for inverse iteration, seeded from the shift
/// so that distinct members of a degenerate pair probe independent
/// directions of a multi-dimensional eigenspace.
std::vector<cplx> seeded_start(int n, cplx lambda) {
    std::uint64_t seed = 0x243f6a8885a308d3ull;
    std::uint64_t lo, hi;
    double re = lambda.real(), im = lambda.imag();
    static_assert(sizeof(double) == sizeof(std::uint64_t));
    std::memcpy(&lo, &re, sizeof lo);
    std::memcpy(&hi, &im, sizeof hi);
    seed ^= lo;
    seed ^= hi * 0x9e3779b97f4a7c15ull;
    std::vector<cplx> v(n);
    for (int i = 0; i < n; ++i) {
        const double ang = 2.0 * std::numbers::pi * unit_double(splitmix64(seed));
        const double mag = 0.5 + unit_double(splitmix64(seed));
        v[i] = mag * cplx{std::cos(ang), std::sin(ang)};
    }
    detail::normalize(v);
    return v;
}

detail::CMat dense(const TridiagonalHamiltonian& h) {
    detail::CMat m(h.n);
    for (int j = 0; j + 1 < h.n; ++j) {
        m(j, j + 1) = h.super[j];
        m(j + 1, j) = h.sub[j];
    }
    return m;
}

std::vector<cplx> apply(const TridiagonalHamiltonian& h, const std::vector<cplx>& x, Side side) {
    // Left application y H is the right application of the transpose,
    // which swaps the two bands.
    const auto& lo = (side == Side::right) ? h.sub : h.super;
    const auto& up = (side == Side::right) ? h.super : h.sub;
    std::vector<cplx> y(h.n);
    for (int i = 0; i < h.n; ++i) {
        cplx s = 0.0;
        if (i > 0) s += lo[i - 1] * x[i - 1];
        if (i + 1 < h.n) s += up[i] * x[i + 1];
        y[i] = s;
    }
    return y;
}

double residual(const TridiagonalHamiltonian& h, const std::vector<cplx>& x, cplx lambda, Side side) {
    auto y = apply(h, x, side);
    double s = 0.0;
    for (int i = 0; i < h.n; ++i) s += std::norm(y[i] - lambda * x[i]);
    return std::sqrt(s);
}

cplx rayleigh(const TridiagonalHamiltonian& h, const std::vector<cplx>& x, Side side) {
    auto y = apply(h, x, side);
    return detail::dot(x, y);  // x is unit norm
}

}  // namespace

CharPoly char_poly(const TridiagonalHamiltonian& h) {
    const auto lp = link_products(h);
    // Three-term recurrence for the leading principal minors of (lambda I - H):
    // p_0 = 1, p_1 = lambda, p_k = lambda p_{k-1} - m_sq[k-1] p_{k-2}.
    std::vector<double> prev{1.0};
    std::vector<double> cur{0.0, 1.0};
    for (int k = 2; k <= h.n; ++k) {
        std::vector<double> next(k + 1, 0.0);
        for (int i = 0; i < k; ++i) next[i + 1] = cur[i];
        const double m = lp.m_sq[k - 2];
        for (int i = 0; i < k - 1; ++i) next[i] -= m * prev[i];
        prev = std::move(cur);
        cur = std::move(next);
    }
    return CharPoly{std::move(cur)};
}

cplx eval(const CharPoly& p, cplx z) {
    cplx acc = p.coeffs.back();
    for (int k = static_cast<int>(p.coeffs.size()) - 2; k >= 0; --k) acc = acc * z + p.coeffs[k];
    return acc;
}

CharPoly derivative(const CharPoly& p) {
    CharPoly d;
    if (p.coeffs.size() <= 1) {
        d.coeffs = {0.0};
        return d;
    }
    d.coeffs.resize(p.coeffs.size() - 1);
    for (std::size_t k = 1; k < p.coeffs.size(); ++k)
        d.coeffs[k - 1] = static_cast<double>(k) * p.coeffs[k];
    return d;
}

std::vector<cplx> polynomial_roots(const CharPoly& p) {
    std::vector<double> c = p.coeffs;
    if (c.empty() || c.back() == 0.0) throw std::invalid_argument("polynomial must have a nonzero leading coefficient");
    for (double x : c)
        if (!std::isfinite(x)) throw std::invalid_argument("polynomial coefficients must be finite");

    std::vector<cplx> roots;
    // Exact zeros at the origin come out of the constant coefficient; factoring
    // them here keeps multiple roots at 0 bit-exact (one-way links produce them).
    while (c.size() > 1 && c.front() == 0.0) {
        roots.emplace_back(0.0, 0.0);
        c.erase(c.begin());
    }
    const int d = static_cast<int>(c.size()) - 1;
    if (d == 0) return roots;

    const double maxc = max_abs_coeff(p.coeffs);
    const double res_target = 1e-12 * maxc;

    // Cauchy-style inclusion radius, starting angles on a golden-ratio spiral
    // so no symmetry of the (even/odd) polynomial is mirrored by the guesses.
    double radius = 0.0;
    for (int k = 0; k < d; ++k) radius = std::max(radius, std::abs(c[k] / c[d]));
    radius = 1.0 + radius;
    std::vector<cplx> z(d);
    for (int i = 0; i < d; ++i) {
        const double frac = std::fmod(0.6180339887498949 * (i + 1), 1.0);
        const double ang = 2.0 * std::numbers::pi * frac + 0.35;
        z[i] = radius * (0.5 + 0.5 * (i + 1.0) / d) * cplx{std::cos(ang), std::sin(ang)};
    }

    const int max_sweeps = 500;
    bool converged = false;
    for (int sweep = 0; sweep < max_sweeps && !converged; ++sweep) {
        converged = true;
        for (int i = 0; i < d; ++i) {
            auto [pv, dpv] = eval_with_derivative(c, z[i]);
            if (std::abs(pv) <= 2.0 * eval_noise(c, z[i])) continue;
            cplx newton;
            if (dpv == cplx{}) {
                newton = cplx{1e-8 * (1.0 + std::abs(z[i])), 1e-8};
            } else {
                newton = pv / dpv;
            }
            cplx repulsion = 0.0;
            for (int j = 0; j < d; ++j) {
                if (j == i) continue;
                cplx diff = z[i] - z[j];
                if (diff == cplx{}) diff = cplx{1e-14 * (1.0 + std::abs(z[i])), 0.0};
                repulsion += 1.0 / diff;
            }
            const cplx denom = 1.0 - newton * repulsion;
            const cplx step = (denom == cplx{}) ? newton : newton / denom;
            z[i] -= step;
            if (std::abs(step) > 1e-14 * (1.0 + std::abs(z[i]))) converged = false;
        }
    }

    // Newton polish to step convergence. Stopping on the residual target
    // alone is not enough: near a tiny near-degenerate pair the whole
    // neighborhood satisfies |p| < target while the root positions are
    // still wrong, so iterate until the step dies or |p| reaches the
    // evaluation-noise floor. Multiple roots converge linearly here, which
    // still shrinks the step geometrically.
    for (int i = 0; i < d; ++i) {
        cplx best = z[i];
        double best_resid = std::abs(eval_with_derivative(c, z[i]).first);
        for (int it = 0; it < 60; ++it) {
            auto [pv, dpv] = eval_with_derivative(c, z[i]);
            const double r = std::abs(pv);
            if (r < best_resid) {
                best_resid = r;
                best = z[i];
            }
            if (r <= 2.0 * eval_noise(c, z[i])) break;
            if (dpv == cplx{}) break;
            const cplx step = pv / dpv;
            if (std::abs(step) > 0.5 * (1.0 + std::abs(z[i]))) break;
            if (std::abs(step) < kEps * std::abs(z[i])) break;
            z[i] -= step;
        }
        if (std::abs(eval_with_derivative(c, z[i]).first) > best_resid) z[i] = best;
    }

    const double hard_limit = 1e-10 * (1.0 + maxc);
    for (int i = 0; i < d; ++i) {
        const double r = std::abs(eval_with_derivative(c, z[i]).first);
        if (r > std::max(hard_limit, 32.0 * eval_noise(c, z[i]))) {
            std::vector<cplx> best = roots;
            best.insert(best.end(), z.begin(), z.end());
            throw ConvergenceError("root iteration failed to reach the residual target", std::move(best));
        }
    }

    roots.insert(roots.end(), z.begin(), z.end());
    return roots;
}

Spectrum eigenvalues(const TridiagonalHamiltonian& h) {
    Spectrum s;
    s.eigenvalues = polynomial_roots(char_poly(h));
    return s;
}

double degeneracy_tolerance(const Spectrum& s) {
    double m = 0.0;
    for (const auto& e : s.eigenvalues) m = std::max(m, std::abs(e));
    return 1e-6 * (1.0 + m);
}

namespace {

struct VectorResult {
    std::vector<cplx> x;
    double resid = std::numeric_limits<double>::infinity();
};

VectorResult recurrence_vector(const TridiagonalHamiltonian& h, cplx lambda, Side side) {
    const auto& div_band = (side == Side::right) ? h.super : h.sub;
    const auto& mul_band = (side == Side::right) ? h.sub : h.super;
    VectorResult out;
    double band_scale = 0.0;
    for (double x : div_band) band_scale = std::max(band_scale, std::abs(x));
    const double pivot_tol = 1e-12 * (1.0 + band_scale);
    for (double x : div_band)
        if (std::abs(x) <= pivot_tol) return out;  // singular recurrence, let the caller fall back

    std::vector<cplx> x(h.n);
    x[0] = 1.0;
    if (h.n > 1) x[1] = lambda / div_band[0];
    for (int k = 1; k + 1 < h.n; ++k) x[k + 1] = (lambda * x[k] - mul_band[k - 1] * x[k - 1]) / div_band[k];
    const double nrm = detail::norm2(x);
    if (!(nrm > 0.0) || !std::isfinite(nrm)) return out;
    for (auto& z : x) z /= nrm;
    out.x = std::move(x);
    out.resid = residual(h, out.x, lambda, side);
    return out;
}

VectorResult inverse_iteration(const TridiagonalHamiltonian& h, cplx lambda, Side side,
                               const std::vector<cplx>* project_out, std::vector<cplx> start) {
    detail::CMat m = dense(h);
    if (side == Side::left) {
        for (int j = 0; j + 1 < h.n; ++j) std::swap(m(j, j + 1), m(j + 1, j));
    }
    cplx shift = lambda;
    VectorResult best;
    std::vector<cplx> x = std::move(start);
    if (project_out) {
        const cplx ov = detail::dot(*project_out, x);
        for (int i = 0; i < h.n; ++i) x[i] -= ov * (*project_out)[i];
        detail::normalize(x);
    }
    for (int outer = 0; outer < 3; ++outer) {
        detail::CMat sm = m;
        for (int i = 0; i < h.n; ++i) sm(i, i) -= shift;
        detail::LU lu(std::move(sm));
        for (int it = 0; it < 4; ++it) {
            auto y = lu.solve(x);
            if (project_out) {
                const cplx ov = detail::dot(*project_out, y);
                for (int i = 0; i < h.n; ++i) y[i] -= ov * (*project_out)[i];
            }
            const double nrm = detail::norm2(y);
            if (!(nrm > 0.0) || !std::isfinite(nrm)) break;
            for (auto& z : y) z /= nrm;
            x = std::move(y);
            const cplx mu = rayleigh(h, x, side);
            const double r = residual(h, x, mu, side);
            if (r < best.resid) {
                best.x = x;
                best.resid = r;
            }
        }
        if (best.resid < 1e-13 * (1.0 + inf_norm(h))) break;
        if (!best.x.empty() && !project_out) shift = rayleigh(h, best.x, side);
    }
    return best;
}

}  // namespace

std::vector<cplx> eigenvector(const TridiagonalHamiltonian& h, cplx lambda, Side side) {
    if (h.n < 2) throw std::invalid_argument("eigenvector needs n >= 2");
    const double scale = 1.0 + inf_norm(h);
    const double tol = 1e-9 * scale;

    VectorResult rec = recurrence_vector(h, lambda, side);
    if (!rec.x.empty()) {
        // The recurrence satisfies every row but the last one exactly, so its
        // residual is tied to |p(lambda)| rather than to the eigenvalue error.
        if (rec.resid < tol) return rec.x;
        const cplx mu = rayleigh(h, rec.x, side);
        if (residual(h, rec.x, mu, side) < tol) return rec.x;
    }

    VectorResult inv = inverse_iteration(h, lambda, side, nullptr, seeded_start(h.n, lambda));
    if (!inv.x.empty()) {
        const cplx mu = rayleigh(h, inv.x, side);
        if (residual(h, inv.x, mu, side) < tol) return inv.x;
    }
    if (!rec.x.empty() && rec.resid <= inv.resid) return rec.x;
    if (!inv.x.empty() && inv.resid < tol * 1e3) return inv.x;
    throw std::runtime_error("eigenvector iteration did not converge; is lambda an eigenvalue?");
}

void attach_eigenvectors(Spectrum& s, const TridiagonalHamiltonian& h) {
    std::vector<std::vector<cplx>> right, left;
    right.reserve(s.eigenvalues.size());
    left.reserve(s.eigenvalues.size());
    for (const auto& lam : s.eigenvalues) {
        right.push_back(eigenvector(h, lam, Side::right));
        left.push_back(eigenvector(h, lam, Side::left));
    }
    s.right_vectors = std::move(right);
    s.left_vectors = std::move(left);
}

namespace {

/// Sylvester resultant of p (degree d) and p' (degree d-1): determinant of
/// the (2d-1) x (2d-1) band matrix of shifted coefficient rows.
double sylvester_resultant(const std::vector<double>& c) {
    const int d = static_cast<int>(c.size()) - 1;
    std::vector<double> dc(d);
    for (int k = 1; k <= d; ++k) dc[k - 1] = k * c[k];
    const int m = 2 * d - 1;
    std::vector<double> mat(static_cast<std::size_t>(m) * m, 0.0);
    // d-1 rows of p coefficients (descending), then d rows of p'.
    for (int r = 0; r < d - 1; ++r)
        for (int k = 0; k <= d; ++k) mat[static_cast<std::size_t>(r) * m + r + d - k] = c[k];
    for (int r = 0; r < d; ++r)
        for (int k = 0; k <= d - 1; ++k) mat[static_cast<std::size_t>(d - 1 + r) * m + r + d - 1 - k] = dc[k];
    return detail::real_det_inplace(mat, m);
}

double disc_of_scaled(const CharPoly& p, double* scale_out) {
    const int d = p.degree();
    if (d < 2) throw std::invalid_argument("discriminant needs degree >= 2");
    const double s = max_abs_coeff(p.coeffs);
    std::vector<double> c(p.coeffs);
    for (auto& x : c) x /= s;
    if (scale_out) *scale_out = s;
    const double res = sylvester_resultant(c);
    const int sgn = (static_cast<long long>(d) * (d - 1) / 2) % 2 == 0 ? 1 : -1;
    return sgn * res / c[d];
}

}  // namespace

double normalized_discriminant(const TridiagonalHamiltonian& h) {
    return disc_of_scaled(char_poly(h), nullptr);
}

double discriminant(const TridiagonalHamiltonian& h) {
    const CharPoly p = char_poly(h);
    double s = 1.0;
    const double nd = disc_of_scaled(p, &s);
    // disc(p) = s^(2d-2) disc(p/s): positive power of a positive scale.
    return nd * std::pow(s, 2 * p.degree() - 2);
}

double coalescence_measure(const TridiagonalHamiltonian& h, cplx l1, cplx l2) {
    // Accepts pairs inside the fractional-power zone of a degeneracy: a pair
    // emerging from a defect at parameter distance 1e-8 already sits about
    // sqrt(1e-8) apart, well beyond the bare degeneracy tolerance.
    const double scale = 1.0 + std::max(std::abs(l1), std::abs(l2));
    const double pair_tol = 1e-3 * scale;
    if (std::abs(l1 - l2) > pair_tol)
        throw std::invalid_argument("coalescence_measure: eigenvalue pair is not degenerate");

    const auto x1 = eigenvector(h, l1, Side::right);
    const auto x2 = eigenvector(h, l2, Side::right);
    double measure = 1.0 - std::abs(detail::dot(x1, x2));

    if (measure < 0.5) {
        // A coalesced-looking pair can also be an exact diabolic point whose
        // fallback iterations landed on the same eigenspace direction. Probe
        // for a second independent eigenvector; if one exists with a small
        // residual, the eigenspace is two-dimensional and the pair is not
        // coalesced after all.
        bool used_fallback = false;
        double band_scale = 0.0;
        for (double x : h.super) band_scale = std::max(band_scale, std::abs(x));
        for (double x : h.super)
            if (std::abs(x) <= 1e-12 * (1.0 + band_scale)) used_fallback = true;
        if (used_fallback) {
            const cplx mean = 0.5 * (l1 + l2);
            auto start = seeded_start(h.n, mean + cplx{0.0, 1.0});
            VectorResult second = inverse_iteration(h, mean, Side::right, &x1, std::move(start));
            if (!second.x.empty() && second.resid < 1e-6 * (1.0 + inf_norm(h)))
                measure = 1.0 - std::abs(detail::dot(x1, second.x));
        }
    }
    return std::clamp(measure, 0.0, 1.0);
}

}  // namespace epchain
