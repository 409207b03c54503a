#include "epchain/chain.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace epchain {

void validate(const ChainParams& p) {
    if (!(std::isfinite(p.v) && std::isfinite(p.w) && std::isfinite(p.g) && std::isfinite(p.a)))
        throw std::invalid_argument("chain parameters must be finite");
    if (p.n < 2)
        throw std::invalid_argument("chain length n must be at least 2, got " + std::to_string(p.n));
}

double base_hopping(const ChainParams& p, int link) {
    return (link % 2 == 1) ? p.v : p.w;
}

TridiagonalHamiltonian build_hamiltonian(const ChainParams& p) {
    validate(p);
    TridiagonalHamiltonian h;
    h.n = p.n;
    h.super.resize(p.n - 1);
    h.sub.resize(p.n - 1);
    for (int j = 1; j < p.n; ++j) {
        const double t = base_hopping(p, j);
        const double offset = (j - 1) * p.a;
        h.super[j - 1] = t + p.g - offset;
        h.sub[j - 1] = t - p.g - offset;
    }
    return h;
}

LinkProducts link_products(const TridiagonalHamiltonian& h) {
    LinkProducts lp;
    lp.m_sq.resize(h.super.size());
    for (std::size_t j = 0; j < h.super.size(); ++j) lp.m_sq[j] = h.super[j] * h.sub[j];
    return lp;
}

TridiagonalHamiltonian chiral_conjugate(const TridiagonalHamiltonian& h) {
    TridiagonalHamiltonian out = h;
    for (auto& x : out.super) x = -x;
    for (auto& x : out.sub) x = -x;
    return out;
}

double inf_norm(const TridiagonalHamiltonian& h) {
    double best = 0.0;
    for (int i = 0; i < h.n; ++i) {
        double row = 0.0;
        if (i > 0) row += std::abs(h.sub[i - 1]);
        if (i + 1 < h.n) row += std::abs(h.super[i]);
        if (row > best) best = row;
    }
    return best;
}

}  // namespace epchain
