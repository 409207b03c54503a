#pragma once

#include <complex>
#include <vector>

#include "epchain/chain.hpp"
#include "epchain/spectral.hpp"

namespace epchain {

struct StateVector {
    std::vector<cplx> amplitudes;
    bool normalized = false;
};

StateVector uniform_state(int n);
StateVector site_state(int n, int site);

/// Applies exp(-i H dt) per step with dt = t_total / steps, renormalizing
/// each step when requested. The propagator comes from the spectral
/// decomposition when the eigenvector matrix is well conditioned, otherwise
/// from a scaled-and-squared truncated series. The returned trajectory has
/// steps + 1 entries, starting with psi0.
std::vector<StateVector> evolve(const ChainParams& p, const StateVector& psi0, double t_total,
                                int steps, bool renormalize);

/// Fraction of squared magnitude on the k sites nearest the chosen end of
/// the normalized state; in [0, 1].
double edge_mass(const StateVector& psi, int k, Side side);

/// Stopping rule used by funneling experiments: runs the renormalized
/// evolution until the left-end edge_mass(k) changes by less than 1e-10
/// between steps, capped at `max_steps`. Returns the state at that step.
struct FunnelResult {
    StateVector state;
    int step = 0;
    bool converged = false;
    double edge_left = 0.0;
    double edge_right = 0.0;
};

FunnelResult run_funnel(const ChainParams& p, const StateVector& psi0, int k,
                        int max_steps = 10000);

}  // namespace epchain
