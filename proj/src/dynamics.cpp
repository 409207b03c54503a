#include "epchain/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "epchain/detail/cmatrix.hpp"

namespace epchain {

namespace {

using detail::CMat;

CMat dense(const TridiagonalHamiltonian& h) {
    CMat m(h.n);
    for (int j = 0; j + 1 < h.n; ++j) {
        m(j, j + 1) = h.super[j];
        m(j + 1, j) = h.sub[j];
    }
    return m;
}

/// exp(M) by scaling and squaring with a truncated Taylor series; the
/// series is summed until terms vanish at machine level, well inside the
/// 1e-10 per-step error budget.
CMat expm(const CMat& m) {
    const double nrm = detail::inf_norm(m);
    int s = 0;
    if (nrm > 0.5) s = static_cast<int>(std::ceil(std::log2(nrm / 0.5)));
    if (s > 60) throw std::runtime_error("evolve: propagator norm too large for series fallback");
    CMat b = m;
    const double scale = std::pow(2.0, -s);
    for (auto& z : b.a) z *= scale;
    CMat sum = CMat::identity(m.n);
    CMat term = CMat::identity(m.n);
    for (int k = 1; k <= 40; ++k) {
        term = multiply(term, b);
        for (auto& z : term.a) z /= static_cast<double>(k);
        for (std::size_t i = 0; i < sum.a.size(); ++i) sum.a[i] += term.a[i];
        if (detail::inf_norm(term) < 1e-18) break;
    }
    for (int i = 0; i < s; ++i) sum = multiply(sum, sum);
    return sum;
}

/// Propagator for one step, preferring the eigenbasis route.
CMat propagator(const TridiagonalHamiltonian& h, double dt) {
    const int n = h.n;
    try {
        const auto spec = eigenvalues(h);
        CMat x(n);
        for (int c = 0; c < n; ++c) {
            const auto vec = eigenvector(h, spec.eigenvalues[c], Side::right);
            for (int r = 0; r < n; ++r) x(r, c) = vec[r];
        }
        const CMat xinv = detail::inverse(x);
        const double cond = detail::inf_norm(x) * detail::inf_norm(xinv);
        if (cond < 1e8) {
            CMat d(n);
            for (int c = 0; c < n; ++c)
                d(c, c) = std::exp(cplx{0.0, -1.0} * spec.eigenvalues[c] * dt);
            CMat u = multiply(multiply(x, d), xinv);
            bool finite = true;
            for (const auto& z : u.a)
                if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) finite = false;
            if (finite) return u;
        }
    } catch (const std::exception&) {
        // defective or ill-conditioned eigenbasis: use the series
    }
    CMat m = dense(h);
    for (auto& z : m.a) z *= cplx{0.0, -dt};
    return expm(m);
}

}  // namespace

StateVector uniform_state(int n) {
    if (n < 1) throw std::invalid_argument("state needs n >= 1");
    StateVector s;
    s.amplitudes.assign(n, cplx{1.0 / std::sqrt(static_cast<double>(n)), 0.0});
    s.normalized = true;
    return s;
}

StateVector site_state(int n, int site) {
    if (site < 0 || site >= n) throw std::invalid_argument("site index out of range");
    StateVector s;
    s.amplitudes.assign(n, cplx{});
    s.amplitudes[site] = 1.0;
    s.normalized = true;
    return s;
}

std::vector<StateVector> evolve(const ChainParams& p, const StateVector& psi0, double t_total,
                                int steps, bool renormalize) {
    validate(p);
    if (steps < 1) throw std::invalid_argument("evolve needs steps >= 1");
    if (!(t_total > 0.0)) throw std::invalid_argument("evolve needs t_total > 0");
    if (static_cast<int>(psi0.amplitudes.size()) != p.n)
        throw std::invalid_argument("psi0 dimension does not match n");

    const auto h = build_hamiltonian(p);
    const CMat u = propagator(h, t_total / steps);

    std::vector<StateVector> traj;
    traj.reserve(steps + 1);
    traj.push_back(psi0);
    std::vector<cplx> cur = psi0.amplitudes;
    for (int s = 0; s < steps; ++s) {
        cur = multiply(u, cur);
        StateVector next;
        next.normalized = renormalize;
        if (renormalize) detail::normalize(cur);
        next.amplitudes = cur;
        traj.push_back(std::move(next));
    }
    return traj;
}

double edge_mass(const StateVector& psi, int k, Side side) {
    const int n = static_cast<int>(psi.amplitudes.size());
    if (k < 1 || k > n) throw std::invalid_argument("edge_mass needs 1 <= k <= n");
    double total = 0.0;
    for (const auto& z : psi.amplitudes) total += std::norm(z);
    if (total == 0.0) throw std::invalid_argument("edge_mass of a zero state");
    double part = 0.0;
    for (int i = 0; i < k; ++i) {
        const int idx = (side == Side::left) ? i : n - 1 - i;
        part += std::norm(psi.amplitudes[idx]);
    }
    return part / total;
}

FunnelResult run_funnel(const ChainParams& p, const StateVector& psi0, int k, int max_steps) {
    validate(p);
    const auto h = build_hamiltonian(p);
    const double nrm = inf_norm(h);
    const double dt = 0.5 / std::max(nrm, 1e-3);  // keeps ||H|| dt <= 0.5
    const CMat u = propagator(h, dt);

    std::vector<cplx> cur = psi0.amplitudes;
    FunnelResult out;
    double prev = -1.0;
    for (int s = 1; s <= max_steps; ++s) {
        cur = multiply(u, cur);
        detail::normalize(cur);
        StateVector st{cur, true};
        const double em = edge_mass(st, k, Side::left);
        out.step = s;
        if (std::abs(em - prev) < 1e-10) {
            out.converged = true;
            out.state = std::move(st);
            out.edge_left = em;
            out.edge_right = edge_mass(out.state, k, Side::right);
            return out;
        }
        prev = em;
        if (s == max_steps) out.state = std::move(st);
    }
    out.edge_left = edge_mass(out.state, k, Side::left);
    out.edge_right = edge_mass(out.state, k, Side::right);
    return out;
}

}  // namespace epchain
