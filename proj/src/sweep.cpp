#include "epchain/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "epchain/detail/assignment.hpp"
#include "epchain/detail/parallel.hpp"

namespace epchain {

namespace {

using nlohmann::json;

std::vector<cplx> spectrum_at(const ChainParams& base, double g, double a) {
    ChainParams p = base;
    p.g = g;
    p.a = a;
    return eigenvalues(build_hamiltonian(p)).eigenvalues;
}

/// Reorders `next` so that entry i continues sheet i of `prev`.
std::vector<cplx> match_to(const std::vector<cplx>& prev, const std::vector<cplx>& next) {
    const int n = static_cast<int>(prev.size());
    std::vector<double> cost(static_cast<std::size_t>(n) * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) cost[static_cast<std::size_t>(i) * n + j] = std::abs(prev[i] - next[j]);
    const auto asg = detail::min_cost_assignment(cost, n);
    std::vector<cplx> out(n);
    for (int i = 0; i < n; ++i) out[i] = next[asg[i]];
    return out;
}

/// Deterministic initial sheet order at the first grid point.
void canonical_order(std::vector<cplx>& ev) {
    std::sort(ev.begin(), ev.end(), [](const cplx& x, const cplx& y) {
        if (x.real() != y.real()) return x.real() < y.real();
        return x.imag() < y.imag();
    });
}

}  // namespace

SweepGrid sweep_1d(const ChainParams& base, ScanAxis axis, double min, double max, int samples,
                   bool annotate) {
    validate(base);
    if (samples < 2) throw std::invalid_argument("sweep needs at least 2 samples");
    if (!(std::isfinite(min) && std::isfinite(max) && min < max))
        throw std::invalid_argument("sweep range must be finite with min < max");

    SweepGrid grid;
    grid.base = base;
    grid.primary = axis;
    grid.primary_axis = AxisSpec{min, max, samples};
    grid.points.resize(samples);

    const double step = (max - min) / (samples - 1);
    std::vector<std::vector<cplx>> raw(samples);
    detail::parallel_for(samples, [&](std::size_t i) {
        const double x = min + static_cast<double>(i) * step;
        const double g = (axis == ScanAxis::g) ? x : base.g;
        const double a = (axis == ScanAxis::a) ? x : base.a;
        raw[i] = spectrum_at(base, g, a);
        grid.points[i].g = g;
        grid.points[i].a = a;
    });
    canonical_order(raw[0]);
    grid.points[0].energies = raw[0];
    for (int i = 1; i < samples; ++i)
        grid.points[i].energies = match_to(grid.points[i - 1].energies, raw[i]);

    if (annotate) {
        ScanConfig cfg;
        cfg.axis = axis;
        cfg.min = min;
        cfg.max = max;
        cfg.samples = samples;
        grid.ep_annotations = scan_for_eps(base, cfg);
    }
    return grid;
}

SweepGrid sweep_2d(const ChainParams& base, const AxisSpec& g_axis, const AxisSpec& a_axis,
                   bool annotate) {
    validate(base);
    if (g_axis.samples < 2 || a_axis.samples < 1)
        throw std::invalid_argument("2D sweep needs >= 2 g samples and >= 1 a row");
    if (a_axis.samples == 1) {
        // degenerate grid: a single row is just a 1D sweep at that a
        ChainParams row = base;
        row.a = a_axis.min;
        SweepGrid grid = sweep_1d(row, ScanAxis::g, g_axis.min, g_axis.max, g_axis.samples, annotate);
        grid.a_axis = a_axis;
        return grid;
    }

    SweepGrid grid;
    grid.base = base;
    grid.primary = ScanAxis::g;
    grid.primary_axis = g_axis;
    grid.a_axis = a_axis;
    grid.points.resize(static_cast<std::size_t>(g_axis.samples) * a_axis.samples);

    const double g_step = (g_axis.max - g_axis.min) / (g_axis.samples - 1);
    const double a_step = (a_axis.max - a_axis.min) / (a_axis.samples - 1);

    std::vector<std::vector<std::vector<cplx>>> raw(a_axis.samples);
    detail::parallel_for(a_axis.samples, [&](std::size_t r) {
        raw[r].resize(g_axis.samples);
        const double a = a_axis.min + static_cast<double>(r) * a_step;
        for (int c = 0; c < g_axis.samples; ++c) {
            const double g = g_axis.min + c * g_step;
            raw[r][c] = spectrum_at(base, g, a);
            auto& pt = grid.points[r * g_axis.samples + c];
            pt.g = g;
            pt.a = a;
        }
    });

    for (int r = 0; r < a_axis.samples; ++r) {
        // In-row continuity first; then anchor the row to the one below it
        // by matching at the first column, so sheet indices carry across rows.
        std::vector<std::vector<cplx>> row(g_axis.samples);
        if (r == 0) {
            canonical_order(raw[0][0]);
            row[0] = raw[0][0];
        } else {
            row[0] = match_to(grid.points[(static_cast<std::size_t>(r) - 1) * g_axis.samples].energies,
                              raw[r][0]);
        }
        for (int c = 1; c < g_axis.samples; ++c) row[c] = match_to(row[c - 1], raw[r][c]);
        for (int c = 0; c < g_axis.samples; ++c)
            grid.points[static_cast<std::size_t>(r) * g_axis.samples + c].energies = std::move(row[c]);
    }

    if (annotate) {
        const auto traj = ep_trajectories(base, g_axis.min, g_axis.max, g_axis.samples, a_axis.min,
                                          a_axis.max, a_axis.samples);
        for (const auto& line : traj.lines)
            for (const auto& rec : line.points) grid.ep_annotations.push_back(rec);
        for (const auto& rec : traj.intersections) grid.ep_annotations.push_back(rec);
    }
    return grid;
}

WindingResult winding_number(double v, double w, int samples) {
    if (samples < 16) throw std::invalid_argument("winding_number needs samples >= 16");
    if (!(std::isfinite(v) && std::isfinite(w))) throw std::invalid_argument("parameters must be finite");
    if (std::abs(std::abs(v) - std::abs(w)) < 1e-12)
        throw std::runtime_error("winding_number: |v| == |w| closes the gap, winding undefined");

    auto d = [&](double k) {
        return std::pair<double, double>{v + w * std::cos(k), w * std::sin(k)};
    };
    double total = 0.0;
    auto [px, py] = d(0.0);
    for (int i = 1; i <= samples; ++i) {
        const double k = 2.0 * std::numbers::pi * static_cast<double>(i % samples) / samples;
        auto [x, y] = d(k);
        total += std::atan2(px * y - py * x, px * x + py * y);
        px = x;
        py = y;
    }
    WindingResult out;
    out.samples = samples;
    out.winding = static_cast<int>(std::lround(total / (2.0 * std::numbers::pi)));
    out.closure_defect = std::abs(total - 2.0 * std::numbers::pi * out.winding);
    return out;
}

namespace {

std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

json params_to_json(const ChainParams& p) {
    return json{{"v", p.v}, {"w", p.w}, {"g", p.g}, {"a", p.a}, {"n", p.n}};
}

ChainParams params_from_json(const json& j) {
    ChainParams p;
    p.v = j.at("v").get<double>();
    p.w = j.at("w").get<double>();
    p.g = j.at("g").get<double>();
    p.a = j.at("a").get<double>();
    p.n = j.at("n").get<int>();
    return p;
}

json record_to_json(const EpRecord& r) {
    json j{{"g", r.g},
           {"a", r.a},
           {"energy_re", r.energy.real()},
           {"energy_im", r.energy.imag()},
           {"cluster_size", r.cluster_size},
           {"exponent", r.exponent},
           {"matched_order", r.matched_order},
           {"coalescence", r.coalescence},
           {"kind", to_string(r.kind)},
           {"refined", r.refined}};
    if (r.case_label) j["case"] = to_string(*r.case_label);
    return j;
}

EpRecord record_from_json(const json& j) {
    EpRecord r;
    r.g = j.at("g").get<double>();
    r.a = j.at("a").get<double>();
    r.energy = cplx{j.at("energy_re").get<double>(), j.at("energy_im").get<double>()};
    r.cluster_size = j.at("cluster_size").get<int>();
    r.exponent = j.at("exponent").get<double>();
    r.matched_order = j.at("matched_order").get<int>();
    r.coalescence = j.at("coalescence").get<double>();
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "EP")
        r.kind = DegeneracyKind::ep;
    else if (kind == "DP")
        r.kind = DegeneracyKind::dp;
    else if (kind == "crossing")
        r.kind = DegeneracyKind::crossing;
    else
        r.kind = DegeneracyKind::indeterminate;
    r.refined = j.at("refined").get<bool>();
    if (j.contains("case")) {
        const std::string c = j.at("case").get<std::string>();
        if (c == "0") r.case_label = EpCase::none;
        if (c == "I") r.case_label = EpCase::type_i;
        if (c == "IIA") r.case_label = EpCase::type_iia;
        if (c == "IIB") r.case_label = EpCase::type_iib;
    }
    return r;
}

json grid_to_json(const SweepGrid& grid) {
    json j;
    j["model"] = params_to_json(grid.base);
    j["primary_axis"] = {{"name", to_string(grid.primary)},
                         {"min", grid.primary_axis.min},
                         {"max", grid.primary_axis.max},
                         {"samples", grid.primary_axis.samples}};
    if (grid.a_axis)
        j["a_axis"] = {{"min", grid.a_axis->min}, {"max", grid.a_axis->max}, {"samples", grid.a_axis->samples}};
    json pts = json::array();
    for (const auto& pt : grid.points) {
        json re = json::array(), im = json::array();
        for (const auto& e : pt.energies) {
            re.push_back(e.real());
            im.push_back(e.imag());
        }
        pts.push_back(json{{"g", pt.g}, {"a", pt.a}, {"re", re}, {"im", im}});
    }
    j["points"] = std::move(pts);
    json ann = json::array();
    for (const auto& r : grid.ep_annotations) ann.push_back(record_to_json(r));
    j["ep_annotations"] = std::move(ann);
    return j;
}

}  // namespace

void write_grid(const SweepGrid& grid, ExportFormat fmt, std::ostream& os) {
    if (fmt == ExportFormat::json) {
        os << grid_to_json(grid).dump(2) << '\n';
        return;
    }
    const int n = grid.base.n;
    os << "g,a";
    for (int i = 1; i <= n; ++i) os << ",re_e_" << i;
    for (int i = 1; i <= n; ++i) os << ",im_e_" << i;
    os << '\n';
    for (const auto& pt : grid.points) {
        os << fmt17(pt.g) << ',' << fmt17(pt.a);
        for (const auto& e : pt.energies) os << ',' << fmt17(e.real());
        for (const auto& e : pt.energies) os << ',' << fmt17(e.imag());
        os << '\n';
    }
}

void write_grid_file(const SweepGrid& grid, ExportFormat fmt, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open for writing: " + path);
    write_grid(grid, fmt, os);
    if (!os) throw std::runtime_error("write failed: " + path);
}

SweepGrid read_grid_json(std::istream& is) {
    json j = json::parse(is);
    SweepGrid grid;
    grid.base = params_from_json(j.at("model"));
    const auto& pa = j.at("primary_axis");
    grid.primary = pa.at("name").get<std::string>() == "a" ? ScanAxis::a : ScanAxis::g;
    grid.primary_axis = AxisSpec{pa.at("min").get<double>(), pa.at("max").get<double>(),
                                 pa.at("samples").get<int>()};
    if (j.contains("a_axis")) {
        const auto& aa = j.at("a_axis");
        grid.a_axis =
            AxisSpec{aa.at("min").get<double>(), aa.at("max").get<double>(), aa.at("samples").get<int>()};
    }
    for (const auto& pj : j.at("points")) {
        GridPoint pt;
        pt.g = pj.at("g").get<double>();
        pt.a = pj.at("a").get<double>();
        const auto& re = pj.at("re");
        const auto& im = pj.at("im");
        for (std::size_t i = 0; i < re.size(); ++i)
            pt.energies.emplace_back(re[i].get<double>(), im[i].get<double>());
        grid.points.push_back(std::move(pt));
    }
    for (const auto& rj : j.at("ep_annotations")) grid.ep_annotations.push_back(record_from_json(rj));
    return grid;
}

SweepGrid read_grid_json_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open for reading: " + path);
    return read_grid_json(is);
}

}  // namespace epchain
