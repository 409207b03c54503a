#pragma once

#include <array>
#include <complex>
#include <utility>
#include <vector>

#include "epchain/chain.hpp"
#include "epchain/spectral.hpp"

namespace epchain {

/// Closed-form spectral coefficients of the 4-site chain. The four energies
/// are +-sqrt(A +- B) with A the half-sum of the three link products and
/// B^2 = A^2 - m1^2 m3^2 (so that lambda^4 - 2A lambda^2 + (A^2 - B^2)
/// matches the characteristic polynomial).
struct SpectralCoefficients {
    double A = 0.0;
    double B_sq = 0.0;
    cplx B;  // principal square root of B_sq
};

/// Requires p.n == 4.
SpectralCoefficients coefficients(const ChainParams& p);

/// The four closed-form energies {+sqrt(A+B), -sqrt(A+B), +sqrt(A-B), -sqrt(A-B)}.
std::array<cplx, 4> energies_n4(const ChainParams& p);

/// Nonreciprocity values where an odd-link product vanishes (a link turns
/// one-way): {+v, -v, +(v-2a), -(v-2a)}, duplicates collapsed when they
/// coincide. These are the zero-energy degeneracies of the 4-site chain.
std::vector<double> type1_loci(double v, double w, double a);

/// Real nonreciprocity values where B^2 vanishes, found by solving the
/// quadratic that B^2 forms in x = g^2. Empty when no real solutions exist.
std::vector<double> type2_loci(double v, double w, double a);

/// (a, g) points where A and B^2 vanish simultaneously, which makes the
/// characteristic polynomial collapse to lambda^4 (a fourth-order
/// degeneracy). Branch 1 solves A = 0 on the g = +-(v-2a) lines, branch 2
/// on the g = +-v lines; only real solutions are kept and every returned
/// point is checked to satisfy |A|, |B^2| < 1e-9.
std::vector<std::pair<double, double>> case_iib_loci(double v, double w);

/// Aggregate of the three locus families.
struct EpLoci {
    std::vector<double> type1;
    std::vector<double> type2;
    std::vector<std::pair<double, double>> case_iib;
};

EpLoci ep_loci(const ChainParams& p);

/// First-order-in-eps model of the energies under a gradient shift
/// a -> a + eps: E = +-{A0 + (5a-2v-w) eps +- sqrt(B0^2 + 4(2a-v)(g^2-v^2) eps)}^(1/2),
/// with A0, B0 the unperturbed coefficients. The expansion keeps only the
/// explicit eps-term of B^2 shown above, so away from degeneracies its
/// defect against the exact energies at a+eps is O(eps) in general and
/// O(eps^2) when A0 vanishes; tests measure it against energies_n4.
std::array<cplx, 4> perturbed_energies(const ChainParams& p, double eps);

/// Degeneracy classes of the 4-site chain at a parameter point.
enum class EpCase {
    none,     // B0 != 0, A0^2 != B0^2: no degeneracy, analytic spectrum
    type_i,   // B0 != 0, A0^2 == B0^2: second-order degeneracy at E = 0
    type_iia, // B0 == 0, A0 != 0:      second-order degeneracies at E = +-sqrt(A0)
    type_iib, // B0 == 0, A0 == 0:      fourth-order degeneracy at E = 0
};

const char* to_string(EpCase c);

/// Classifies by |B0| and |A0^2 - B0^2| against tol (natural parameter
/// units). When |B0| <= tol the second test degenerates to |A0| vs tol.
EpCase classify_point(const ChainParams& p, double tol = 1e-8);

}  // namespace epchain
