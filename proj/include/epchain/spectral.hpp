#pragma once

#include <complex>
#include <optional>
#include <stdexcept>
#include <vector>

#include "epchain/chain.hpp"

namespace epchain {

using cplx = std::complex<double>;

/// Monic characteristic polynomial det(lambda*I - H), coefficients in
/// ascending order: coeffs[k] multiplies lambda^k, coeffs[n] == 1.
struct CharPoly {
    std::vector<double> coeffs;

    int degree() const { return static_cast<int>(coeffs.size()) - 1; }
};

CharPoly char_poly(const TridiagonalHamiltonian& h);

cplx eval(const CharPoly& p, cplx z);
CharPoly derivative(const CharPoly& p);

/// Thrown when root iteration exhausts its iteration budget; carries the
/// best iterate so callers can inspect how far it got.
class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& msg, std::vector<cplx> best_iterate)
        : std::runtime_error(msg), best(std::move(best_iterate)) {}

    std::vector<cplx> best;
};

/// All roots of p with multiplicity, via Ehrlich-Aberth simultaneous
/// iteration followed by Newton polish. Exact zero roots are factored out
/// first. Polished residual target is 1e-12 * max|coeff|.
std::vector<cplx> polynomial_roots(const CharPoly& p);

struct Spectrum {
    std::vector<cplx> eigenvalues;
    std::optional<std::vector<std::vector<cplx>>> right_vectors;
    std::optional<std::vector<std::vector<cplx>>> left_vectors;
};

Spectrum eigenvalues(const TridiagonalHamiltonian& h);

/// Two eigenvalues closer than this are treated as degenerate.
double degeneracy_tolerance(const Spectrum& s);

enum class Side { left, right };

/// Unit-norm eigenvector for a known eigenvalue. Uses the tridiagonal
/// forward recurrence x[k+1] = (lambda*x[k] - sub[k-1]*x[k-1]) / super[k]
/// when every pivot is safely nonzero, otherwise shifted inverse iteration.
/// The residual ||H x - mu x|| < 1e-9 * (1 + ||H||) is enforced at the
/// Rayleigh-refined eigenvalue mu of the computed direction.
std::vector<cplx> eigenvector(const TridiagonalHamiltonian& h, cplx lambda, Side side);

/// Fills right_vectors and left_vectors of an existing spectrum.
void attach_eigenvectors(Spectrum& s, const TridiagonalHamiltonian& h);

/// Discriminant of the characteristic polynomial, computed as the Sylvester
/// resultant of (p, p'). Coefficients are rescaled to unit max-norm first
/// and the known power of the scale is multiplied back, so zeros and signs
/// survive even when raw coefficients span many orders of magnitude.
double discriminant(const TridiagonalHamiltonian& h);

/// Same resultant evaluated on the max-norm-scaled polynomial, without
/// undoing the scaling. Scale-free: thresholds like 1e-12 mean the same
/// thing across a parameter sweep.
double normalized_discriminant(const TridiagonalHamiltonian& h);

/// 1 - |<x1, x2>| for the unit right eigenvectors of a degenerate pair.
/// Near 0: the vectors coalesce (exceptional point), near 1: the pair keeps
/// independent directions (diabolic point). Requires |l1 - l2| within ten
/// degeneracy tolerances; throws std::invalid_argument otherwise.
double coalescence_measure(const TridiagonalHamiltonian& h, cplx l1, cplx l2);

}  // namespace epchain
