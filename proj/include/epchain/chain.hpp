#pragma once

#include <vector>

namespace epchain {

/// Model parameters of the nonreciprocal graded chain.
///
/// v and w are the alternating base hopping amplitudes (v on odd links,
/// counting from the chain's left end), g is the nonreciprocity added to
/// every left-hop and subtracted from every right-hop, and a is the linear
/// gradient removed per link. All parameters are real; n is the number of
/// lattice sites.
struct ChainParams {
    double v = 1.0;
    double w = 1.0;
    double g = 0.0;
    double a = 0.0;
    int n = 4;
};

/// Throws std::invalid_argument unless all amplitudes are finite and n >= 2.
void validate(const ChainParams& p);

/// Base hopping of 1-indexed link j: v on odd links, w on even links.
double base_hopping(const ChainParams& p, int link);

/// Zero-diagonal real tridiagonal matrix. Entry conventions:
/// super[j] = H[j][j+1] (amplitude for the hop site j+1 -> site j) and
/// sub[j] = H[j+1][j], with 0-indexed sites. Both bands have length n-1.
struct TridiagonalHamiltonian {
    int n = 0;
    std::vector<double> super;
    std::vector<double> sub;
};

/// Per-link products m_sq[j] = super[j] * sub[j] (squared geometric means).
struct LinkProducts {
    std::vector<double> m_sq;
};

/// Assembles the chain Hamiltonian: link j (1-indexed) carries
/// super = t_j + g - (j-1)a and sub = t_j - g - (j-1)a, where t_j
/// alternates v, w, v, ... starting from v.
TridiagonalHamiltonian build_hamiltonian(const ChainParams& p);

LinkProducts link_products(const TridiagonalHamiltonian& h);

/// Conjugation by the sublattice operator diag(+1,-1,+1,...). For a
/// zero-diagonal tridiagonal matrix this negates every band entry, so the
/// result equals -H exactly.
TridiagonalHamiltonian chiral_conjugate(const TridiagonalHamiltonian& h);

/// Max row sum of |entries| (infinity norm).
double inf_norm(const TridiagonalHamiltonian& h);

}  // namespace epchain
