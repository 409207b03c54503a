#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "epchain/chain.hpp"
#include "epchain/ep_scan.hpp"

namespace epchain {

struct AxisSpec {
    double min = 0.0;
    double max = 0.0;
    int samples = 2;  // grid points, >= 2
};

struct GridPoint {
    double g = 0.0;
    double a = 0.0;
    std::vector<cplx> energies;  // sheet order
};

/// Parameter-sweep result with sheet-tracked eigenvalue ordering. Points
/// are stored fast-axis contiguous; for 2D grids the fast axis is g and
/// rows advance in a (row-major over (a, g)).
struct SweepGrid {
    ChainParams base;
    ScanAxis primary = ScanAxis::g;
    AxisSpec primary_axis;
    std::optional<AxisSpec> a_axis;  // set only for 2D grids
    std::vector<GridPoint> points;
    std::vector<EpRecord> ep_annotations;
};

/// Spectra along one axis; consecutive points are matched by the
/// minimal-total-|delta lambda| assignment so each sheet stays continuous
/// except across degeneracies. When annotate is set, scan_for_eps runs over
/// the same range and its records are attached.
SweepGrid sweep_1d(const ChainParams& base, ScanAxis axis, double min, double max, int samples,
                   bool annotate = true);

/// Row-wise 1D sweeps over g stitched across a-rows with the same
/// assignment rule; annotations come from ep_trajectories.
SweepGrid sweep_2d(const ChainParams& base, const AxisSpec& g_axis, const AxisSpec& a_axis,
                   bool annotate = true);

struct WindingResult {
    int winding = 0;
    int samples = 0;
    double closure_defect = 0.0;
};

/// Winding of the reciprocal-limit Bloch vector d(k) = (v + w cos k, w sin k)
/// around the origin, accumulated over `samples` points of the Brillouin
/// zone. Throws when |v| == |w| (gap closes) or samples < 16.
WindingResult winding_number(double v, double w, int samples);

enum class ExportFormat { csv, json };

/// CSV columns: g, a, re_e_1..re_e_n, im_e_1..im_e_n in sheet order, one
/// row per grid point, 17 significant digits. JSON mirrors the grid and
/// adds the EP annotations.
void write_grid(const SweepGrid& grid, ExportFormat fmt, std::ostream& os);
void write_grid_file(const SweepGrid& grid, ExportFormat fmt, const std::string& path);

SweepGrid read_grid_json(std::istream& is);
SweepGrid read_grid_json_file(const std::string& path);

}  // namespace epchain
