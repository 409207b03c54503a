#pragma once

#include <complex>
#include <optional>
#include <vector>

#include "epchain/chain.hpp"
#include "epchain/closed_form.hpp"
#include "epchain/spectral.hpp"

namespace epchain {

enum class ScanAxis { g, a };

const char* to_string(ScanAxis axis);

/// One scan line through parameter space.
struct ScanConfig {
    ScanAxis axis = ScanAxis::g;
    double min = -2.0;
    double max = 2.0;
    int samples = 401;        // grid points over [min, max], >= 2
    double refine_tol = 1e-12;  // on the normalized discriminant
    bool estimate_orders = true;
};

/// What a degeneracy turned out to be.
///  ep            eigenvectors coalesce and the splitting exponent is 1/k, k >= 2
///  dp            eigenvalues merge but eigenvectors stay independent
///  crossing      eigenvectors coalesce but the splitting is analytic along
///                the scan axis (integer exponent, no branch point)
///  indeterminate the coalescence measure fell in the guard band
enum class DegeneracyKind { ep, dp, crossing, indeterminate };

const char* to_string(DegeneracyKind k);

/// A located spectral degeneracy: one record per coalescing eigenvalue
/// cluster, so a single parameter value can contribute several records
/// (the chiral partner at -E is its own cluster).
struct EpRecord {
    double g = 0.0;
    double a = 0.0;
    cplx energy;              // cluster mean
    int cluster_size = 0;     // algebraic multiplicity seen by the scan
    double exponent = 0.0;    // fitted splitting exponent along the scan axis
    int matched_order = 0;    // round(1/exponent), 0 when the fit failed
    double coalescence = 1.0;
    DegeneracyKind kind = DegeneracyKind::indeterminate;
    std::optional<EpCase> case_label;  // n == 4 only
    bool refined = false;
};

/// Fitted splitting exponent at a parameter point.
struct OrderFit {
    double exponent = 0.0;
    int matched_order = 0;
    int cluster_size = 0;
    int points_used = 0;
};

/// Walks the normalized discriminant along cfg.axis, brackets sign changes
/// and sub-threshold local minima (even-order touch zeros), refines each to
/// |disc| < cfg.refine_tol, and emits one record per degenerate eigenvalue
/// cluster found at the refined point, sorted by axis value.
std::vector<EpRecord> scan_for_eps(const ChainParams& base, const ScanConfig& cfg);

/// Perturbs the chosen parameter by log-spaced eps in [eps_min, eps_max],
/// measures the maximal pairwise splitting of the coalescing cluster, and
/// fits the log-log slope. matched_order = round(1/slope). Points where the
/// splitting is below the 1e-11 noise floor are discarded; fewer than three
/// usable points raise std::runtime_error (refine the candidate or pick an
/// axis transversal to the degeneracy).
OrderFit order_estimate(const ChainParams& p, ScanAxis axis, double eps_min = 1e-9,
                        double eps_max = 1e-3, int points = 13);

/// Thresholded coalescence measure: < 0.1 ep, > 0.9 dp, else indeterminate.
DegeneracyKind ep_vs_dp(const ChainParams& p, cplx l1, cplx l2);

struct Trajectory {
    std::vector<EpRecord> points;
};

struct TrajectorySet {
    std::vector<Trajectory> lines;
    /// Near-intersections of distinct lines: candidates for higher-order
    /// degeneracies. For n == 4 each candidate within reach of a case-IIB
    /// locus is snapped to it and verified.
    std::vector<EpRecord> intersections;
};

/// Row-by-row g-scans over an (g, a) grid, linked across rows by nearest
/// neighbor matching within `linking_radius_steps` grid steps.
TrajectorySet ep_trajectories(const ChainParams& base, double g_min, double g_max, int g_samples,
                              double a_min, double a_max, int a_samples,
                              double linking_radius_steps = 3.0);

}  // namespace epchain
