#include "epchain/ep_scan.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "epchain/detail/parallel.hpp"

namespace epchain {

namespace {

ChainParams at_axis(ChainParams p, ScanAxis axis, double x) {
    if (axis == ScanAxis::g)
        p.g = x;
    else
        p.a = x;
    return p;
}

double ndisc(const ChainParams& p) { return normalized_discriminant(build_hamiltonian(p)); }

/// Eigenvalue clusters connected under a linking radius. The radius adapts
/// to the closest-pair gap because the computed members of a multiplicity-m
/// root spread out like (machine eps)^(1/m), far beyond the plain tolerance
/// for m = 3, 4.
struct Cluster {
    cplx center;
    std::vector<int> members;
};

std::vector<Cluster> degenerate_clusters(const std::vector<cplx>& ev, double tol) {
    const int n = static_cast<int>(ev.size());
    double min_gap = std::numeric_limits<double>::infinity();
    double max_abs = 0.0;
    for (int i = 0; i < n; ++i) {
        max_abs = std::max(max_abs, std::abs(ev[i]));
        for (int j = i + 1; j < n; ++j) min_gap = std::min(min_gap, std::abs(ev[i] - ev[j]));
    }
    // No pair inside the fractional-power zone: nothing is degenerate here.
    if (!(min_gap <= 1e-3 * (1.0 + max_abs))) return {};
    const double radius = std::max(10.0 * tol, 4.0 * min_gap);

    std::vector<int> comp(n, -1);
    int ncomp = 0;
    for (int i = 0; i < n; ++i) {
        if (comp[i] >= 0) continue;
        comp[i] = ncomp;
        std::vector<int> stack{i};
        while (!stack.empty()) {
            const int u = stack.back();
            stack.pop_back();
            for (int vtx = 0; vtx < n; ++vtx) {
                if (comp[vtx] >= 0 || std::abs(ev[u] - ev[vtx]) > radius) continue;
                comp[vtx] = ncomp;
                stack.push_back(vtx);
            }
        }
        ++ncomp;
    }
    std::vector<Cluster> out(ncomp);
    for (int i = 0; i < n; ++i) out[comp[i]].members.push_back(i);
    for (auto& c : out) {
        cplx mean = 0.0;
        for (int idx : c.members) mean += ev[idx];
        c.center = mean / static_cast<double>(c.members.size());
    }
    out.erase(std::remove_if(out.begin(), out.end(),
                             [](const Cluster& c) { return c.members.size() < 2; }),
              out.end());
    return out;
}

/// Log-log least squares fit of the cluster splitting against eps,
/// tracking the `m` eigenvalues closest to `center` at each perturbed point.
OrderFit fit_cluster_order(const ChainParams& p, ScanAxis axis, cplx center, int m, double base_split,
                           double eps_min, double eps_max, int points) {
    if (points < 3 || !(eps_min > 0.0) || !(eps_max > eps_min))
        throw std::invalid_argument("order fit needs points >= 3 and 0 < eps_min < eps_max");
    const double x0 = (axis == ScanAxis::g) ? p.g : p.a;
    // Coefficient rounding alone moves an m-fold root by about eps^(1/m),
    // so when the cluster really is degenerate, splittings below that carry
    // no information about the Puiseux branch and would flatten the fit.
    // A well-separated cluster (generic point) only suffers cancellation in
    // D(eps) - D(0).
    const double scale = 1.0 + std::abs(center);
    double noise_floor = std::max(1e-11, 100.0 * 2.2e-16 * base_split);
    if (base_split <= 1e-3 * scale)
        noise_floor = std::max(noise_floor, 10.0 * std::pow(2.2e-16, 1.0 / m) * scale);
    std::vector<double> lx, ly;
    for (int k = 0; k < points; ++k) {
        const double t = static_cast<double>(k) / (points - 1);
        const double eps = eps_min * std::pow(eps_max / eps_min, t);
        const auto ev = eigenvalues(build_hamiltonian(at_axis(p, axis, x0 + eps))).eigenvalues;
        std::vector<double> dist(ev.size());
        std::vector<int> idx(ev.size());
        for (std::size_t i = 0; i < ev.size(); ++i) {
            dist[i] = std::abs(ev[i] - center);
            idx[i] = static_cast<int>(i);
        }
        std::sort(idx.begin(), idx.end(), [&](int i, int j) { return dist[i] < dist[j]; });
        double split = 0.0;
        for (int i = 0; i < m; ++i)
            for (int j = i + 1; j < m; ++j)
                split = std::max(split, std::abs(ev[idx[i]] - ev[idx[j]]));
        const double s = std::abs(split - base_split);
        if (s > noise_floor) {
            lx.push_back(std::log(eps));
            ly.push_back(std::log(s));
        }
    }
    OrderFit fit;
    fit.cluster_size = m;
    fit.points_used = static_cast<int>(lx.size());
    if (fit.points_used < 3)
        throw std::runtime_error(
            "order fit: splitting stayed below the noise floor; refine the candidate or perturb a "
            "transversal axis");
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (int i = 0; i < fit.points_used; ++i) {
        sx += lx[i];
        sy += ly[i];
        sxx += lx[i] * lx[i];
        sxy += lx[i] * ly[i];
    }
    const double denom = fit.points_used * sxx - sx * sx;
    fit.exponent = (fit.points_used * sxy - sx * sy) / denom;
    fit.matched_order = (fit.exponent > 0.0) ? static_cast<int>(std::lround(1.0 / fit.exponent)) : 0;
    if (fit.matched_order < 1) fit.matched_order = fit.exponent > 1.5 ? 0 : 1;
    return fit;
}

DegeneracyKind classify_kind(double coalescence, const OrderFit& fit) {
    if (coalescence > 0.9) return DegeneracyKind::dp;
    if (coalescence >= 0.1) return DegeneracyKind::indeterminate;
    const bool fractional =
        fit.matched_order >= 2 && std::abs(fit.exponent - 1.0 / fit.matched_order) < 0.05;
    return fractional ? DegeneracyKind::ep : DegeneracyKind::crossing;
}

}  // namespace

const char* to_string(ScanAxis axis) { return axis == ScanAxis::g ? "g" : "a"; }

const char* to_string(DegeneracyKind k) {
    switch (k) {
        case DegeneracyKind::ep: return "EP";
        case DegeneracyKind::dp: return "DP";
        case DegeneracyKind::crossing: return "crossing";
        case DegeneracyKind::indeterminate: return "indeterminate";
    }
    return "?";
}

OrderFit order_estimate(const ChainParams& p, ScanAxis axis, double eps_min, double eps_max,
                        int points) {
    validate(p);
    const auto ev = eigenvalues(build_hamiltonian(p)).eigenvalues;
    const double tol = degeneracy_tolerance(Spectrum{ev, {}, {}});
    double min_gap = std::numeric_limits<double>::infinity();
    int bi = 0, bj = 1;
    for (int i = 0; i < p.n; ++i)
        for (int j = i + 1; j < p.n; ++j) {
            const double d = std::abs(ev[i] - ev[j]);
            if (d < min_gap) {
                min_gap = d;
                bi = i;
                bj = j;
            }
        }
    const cplx pair_center = 0.5 * (ev[bi] + ev[bj]);
    const double radius = std::max(10.0 * tol, 4.0 * min_gap);
    std::vector<int> members;
    for (int i = 0; i < p.n; ++i)
        if (std::abs(ev[i] - pair_center) <= radius) members.push_back(i);
    cplx center = 0.0;
    for (int i : members) center += ev[i];
    center /= static_cast<double>(members.size());
    double base_split = 0.0;
    for (std::size_t i = 0; i < members.size(); ++i)
        for (std::size_t j = i + 1; j < members.size(); ++j)
            base_split = std::max(base_split, std::abs(ev[members[i]] - ev[members[j]]));
    return fit_cluster_order(p, axis, center, static_cast<int>(members.size()), base_split, eps_min,
                             eps_max, points);
}

DegeneracyKind ep_vs_dp(const ChainParams& p, cplx l1, cplx l2) {
    const double m = coalescence_measure(build_hamiltonian(p), l1, l2);
    if (m < 0.1) return DegeneracyKind::ep;
    if (m > 0.9) return DegeneracyKind::dp;
    return DegeneracyKind::indeterminate;
}

namespace {

struct Candidate {
    double x = 0.0;
    bool refined = false;
};

/// Bisection for a sign change of f on [lo, hi].
template <typename F>
double bisect(F&& f, double lo, double hi, double flo) {
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        const double fm = f(mid);
        if (fm == 0.0) return mid;
        if ((flo < 0.0) != (fm < 0.0)) {
            hi = mid;
        } else {
            lo = mid;
            flo = fm;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace

std::vector<EpRecord> scan_for_eps(const ChainParams& base, const ScanConfig& cfg) {
    validate(base);
    if (cfg.samples < 2) throw std::invalid_argument("scan needs at least 2 samples");
    if (!(std::isfinite(cfg.min) && std::isfinite(cfg.max) && cfg.min < cfg.max))
        throw std::invalid_argument("scan range must be finite with min < max");

    const int ns = cfg.samples;
    const double step = (cfg.max - cfg.min) / (ns - 1);
    std::vector<double> xs(ns), ds(ns);
    for (int i = 0; i < ns; ++i) xs[i] = cfg.min + i * step;
    detail::parallel_for(ns, [&](std::size_t i) { ds[i] = ndisc(at_axis(base, cfg.axis, xs[i])); });

    auto f = [&](double x) { return ndisc(at_axis(base, cfg.axis, x)); };

    std::vector<Candidate> cands;
    // Exact grid zeros: isolated ones are degeneracies the grid hit dead on;
    // runs of consecutive zeros mean the discriminant vanishes identically
    // over a stretch (a collapsed family), which has no isolated loci.
    for (int i = 0; i < ns; ++i) {
        if (ds[i] != 0.0) continue;
        const bool left_zero = i > 0 && ds[i - 1] == 0.0;
        const bool right_zero = i + 1 < ns && ds[i + 1] == 0.0;
        if (!left_zero && !right_zero) cands.push_back({xs[i], true});
    }
    for (int i = 0; i + 1 < ns; ++i) {
        if (ds[i] == 0.0 || ds[i + 1] == 0.0) continue;
        if ((ds[i] < 0.0) != (ds[i + 1] < 0.0)) {
            const double root = bisect(f, xs[i], xs[i + 1], ds[i]);
            cands.push_back({root, std::abs(f(root)) <= cfg.refine_tol});
        }
    }

    // Even-order zeros touch the axis without a sign change. Every strict
    // local minimum of |disc| is a candidate; refinement on the
    // central-difference derivative decides whether it actually reaches
    // zero. Minima that refine to |disc| <= refine_tol are accepted, ones
    // stuck below 1e-8 are kept but flagged unrefined, anything larger is a
    // genuine positive minimum and is dropped.
    const double unrefined_band = 1e-8;
    const double h = std::max(1e-7, 1e-9 * std::abs(cfg.max - cfg.min));
    auto dfdx = [&](double x) { return (f(x + h) - f(x - h)) / (2.0 * h); };
    for (int i = 1; i + 1 < ns; ++i) {
        const double m = std::abs(ds[i]);
        if (ds[i] == 0.0 || ds[i - 1] == 0.0 || ds[i + 1] == 0.0) continue;
        if (m > std::abs(ds[i - 1]) || m > std::abs(ds[i + 1])) continue;
        if (m == std::abs(ds[i - 1]) && m == std::abs(ds[i + 1])) continue;  // flat plateau
        if ((ds[i - 1] < 0.0) != (ds[i + 1] < 0.0)) continue;  // handled as a sign change
        const double dlo = dfdx(xs[i - 1]);
        const double dhi = dfdx(xs[i + 1]);
        if ((dlo < 0.0) == (dhi < 0.0)) {
            if (m < unrefined_band) cands.push_back({xs[i], false});
            continue;
        }
        const double xstar = bisect(dfdx, xs[i - 1], xs[i + 1], dlo);
        const double fstar = std::abs(f(xstar));
        if (fstar <= cfg.refine_tol) {
            cands.push_back({xstar, true});
        } else if (fstar < unrefined_band) {
            cands.push_back({xstar, false});
        }
    }

    std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) { return a.x < b.x; });
    const double merge_radius = std::max(1e-10, 1e-6 * step);
    std::vector<Candidate> merged;
    for (const auto& c : cands) {
        if (!merged.empty() && std::abs(c.x - merged.back().x) < merge_radius) {
            if (c.refined && !merged.back().refined) merged.back() = c;
            continue;
        }
        merged.push_back(c);
    }

    std::vector<EpRecord> records;
    for (const auto& cand : merged) {
        const ChainParams p = at_axis(base, cfg.axis, cand.x);
        const auto spec = eigenvalues(build_hamiltonian(p));
        const double tol = degeneracy_tolerance(spec);
        const auto clusters = degenerate_clusters(spec.eigenvalues, tol);
        for (const auto& cl : clusters) {
            EpRecord rec;
            rec.g = p.g;
            rec.a = p.a;
            rec.energy = cl.center;
            rec.cluster_size = static_cast<int>(cl.members.size());
            rec.refined = cand.refined;

            // Coalescence of the two closest members of this cluster.
            double best = std::numeric_limits<double>::infinity();
            cplx l1 = 0.0, l2 = 0.0;
            for (std::size_t i = 0; i < cl.members.size(); ++i)
                for (std::size_t j = i + 1; j < cl.members.size(); ++j) {
                    const double d =
                        std::abs(spec.eigenvalues[cl.members[i]] - spec.eigenvalues[cl.members[j]]);
                    if (d < best) {
                        best = d;
                        l1 = spec.eigenvalues[cl.members[i]];
                        l2 = spec.eigenvalues[cl.members[j]];
                    }
                }
            try {
                rec.coalescence = coalescence_measure(build_hamiltonian(p), l1, l2);
            } catch (const std::exception&) {
                rec.coalescence = 0.5;  // guard band: indeterminate
            }

            if (cfg.estimate_orders) {
                double base_split = 0.0;
                for (std::size_t i = 0; i < cl.members.size(); ++i)
                    for (std::size_t j = i + 1; j < cl.members.size(); ++j)
                        base_split = std::max(base_split,
                                              std::abs(spec.eigenvalues[cl.members[i]] -
                                                       spec.eigenvalues[cl.members[j]]));
                try {
                    const OrderFit fit =
                        fit_cluster_order(p, cfg.axis, cl.center, rec.cluster_size, base_split,
                                          1e-9, 1e-3, 13);
                    rec.exponent = fit.exponent;
                    rec.matched_order = fit.matched_order;
                    rec.kind = classify_kind(rec.coalescence, fit);
                } catch (const std::runtime_error&) {
                    rec.kind = rec.coalescence < 0.1 ? DegeneracyKind::indeterminate
                                                     : classify_kind(rec.coalescence, OrderFit{});
                }
            } else {
                if (rec.coalescence < 0.1)
                    rec.kind = DegeneracyKind::ep;
                else if (rec.coalescence > 0.9)
                    rec.kind = DegeneracyKind::dp;
                else
                    rec.kind = DegeneracyKind::indeterminate;
            }
            if (p.n == 4) {
                // The exact-point classifier needs |B| below its tolerance,
                // but refining the discriminant to 1e-12 only pins B^2 to
                // about 1e-6 at B = 0 loci (disc scales with B^4 there). A
                // record is a degeneracy by construction, so when the
                // classifier reports the non-degenerate case, label from the
                // measured structure instead: zero-energy pair = I,
                // zero-energy quadruple = IIB, nonzero-energy pair = IIA.
                EpCase label = classify_point(p);
                if (label == EpCase::none) {
                    if (std::abs(cl.center) <= 10.0 * tol)
                        label = rec.cluster_size >= 4 ? EpCase::type_iib : EpCase::type_i;
                    else
                        label = EpCase::type_iia;
                }
                rec.case_label = label;
            }
            records.push_back(std::move(rec));
        }
    }
    std::sort(records.begin(), records.end(), [&](const EpRecord& r1, const EpRecord& r2) {
        const double x1 = (cfg.axis == ScanAxis::g) ? r1.g : r1.a;
        const double x2 = (cfg.axis == ScanAxis::g) ? r2.g : r2.a;
        if (x1 != x2) return x1 < x2;
        if (r1.energy.real() != r2.energy.real()) return r1.energy.real() < r2.energy.real();
        return r1.energy.imag() < r2.energy.imag();
    });
    return records;
}

TrajectorySet ep_trajectories(const ChainParams& base, double g_min, double g_max, int g_samples,
                              double a_min, double a_max, int a_samples,
                              double linking_radius_steps) {
    validate(base);
    if (a_samples < 1) return {};  // empty grid, nothing to link
    if (g_samples < 2) throw std::invalid_argument("trajectory grid needs at least 2 g samples");
    const double g_step = (g_max - g_min) / (g_samples - 1);
    const double a_step = a_samples > 1 ? (a_max - a_min) / (a_samples - 1) : 0.0;

    std::vector<std::vector<EpRecord>> rows(a_samples);
    detail::parallel_for(a_samples, [&](std::size_t r) {
        ChainParams p = base;
        p.a = a_min + static_cast<double>(r) * a_step;
        ScanConfig cfg;
        cfg.axis = ScanAxis::g;
        cfg.min = g_min;
        cfg.max = g_max;
        cfg.samples = g_samples;
        rows[r] = scan_for_eps(p, cfg);
    });

    TrajectorySet out;
    const double radius = linking_radius_steps * g_step;
    std::vector<int> open;  // indices into out.lines with a point in the previous row
    for (int r = 0; r < a_samples; ++r) {
        std::vector<int> next_open;
        std::vector<bool> taken(rows[r].size(), false);
        // Greedy nearest-neighbor continuation, closest pairs first.
        struct Link {
            double d;
            int line;
            int rec;
        };
        std::vector<Link> links;
        for (int li : open) {
            const EpRecord& tail = out.lines[li].points.back();
            for (std::size_t k = 0; k < rows[r].size(); ++k) {
                const double d = std::hypot(rows[r][k].g - tail.g,
                                            std::abs(rows[r][k].energy - tail.energy));
                if (std::abs(rows[r][k].g - tail.g) <= radius) links.push_back({d, li, static_cast<int>(k)});
            }
        }
        std::sort(links.begin(), links.end(), [](const Link& x, const Link& y) { return x.d < y.d; });
        std::vector<bool> line_used(out.lines.size(), false);
        for (const auto& l : links) {
            if (taken[l.rec] || line_used[l.line]) continue;
            out.lines[l.line].points.push_back(rows[r][l.rec]);
            taken[l.rec] = true;
            line_used[l.line] = true;
            next_open.push_back(l.line);
        }
        for (std::size_t k = 0; k < rows[r].size(); ++k) {
            if (taken[k]) continue;
            out.lines.push_back(Trajectory{{rows[r][k]}});
            next_open.push_back(static_cast<int>(out.lines.size()) - 1);
        }
        open = std::move(next_open);
    }

    // Near-intersections of distinct lines flag higher-order candidates.
    const auto iib = (base.n == 4) ? case_iib_loci(base.v, base.w)
                                   : std::vector<std::pair<double, double>>{};
    for (std::size_t i = 0; i < out.lines.size(); ++i) {
        for (std::size_t j = i + 1; j < out.lines.size(); ++j) {
            double best = std::numeric_limits<double>::infinity();
            EpRecord at;
            for (const auto& p1 : out.lines[i].points)
                for (const auto& p2 : out.lines[j].points) {
                    const double da = a_step > 0.0 ? (p1.a - p2.a) / a_step : (p1.a - p2.a);
                    const double dg = (p1.g - p2.g) / g_step;
                    const double d = std::hypot(dg, da);
                    if (d < best) {
                        best = d;
                        at = p1;
                        at.g = 0.5 * (p1.g + p2.g);
                        at.a = 0.5 * (p1.a + p2.a);
                        at.energy = 0.5 * (p1.energy + p2.energy);
                    }
                }
            if (best <= linking_radius_steps) {
                // Snap to an exact fourth-order locus when one is in reach;
                // the radius is generous because candidates sit a few grid
                // cells off where two lines merge, and the snap re-derives
                // the order at the exact locus anyway.
                const double snap = 2.0 * linking_radius_steps * std::max(a_step, g_step);
                for (const auto& [la, lg] : iib) {
                    if (std::abs(at.a - la) <= snap && std::abs(at.g - lg) <= snap) {
                        at.a = la;
                        at.g = lg;
                        ChainParams p = base;
                        p.g = lg;
                        p.a = la;
                        // On the g = +-v lines the first link product does not
                        // depend on a, so the quarter-power splitting only
                        // shows along g; elsewhere a works.
                        const ScanAxis fit_axis =
                            (std::abs(std::abs(lg) - std::abs(base.v)) < 1e-12) ? ScanAxis::g
                                                                               : ScanAxis::a;
                        const auto fit = order_estimate(p, fit_axis);
                        at.exponent = fit.exponent;
                        at.matched_order = fit.matched_order;
                        at.cluster_size = fit.cluster_size;
                        at.case_label = classify_point(p);
                        break;
                    }
                }
                out.intersections.push_back(at);
            }
        }
    }
    return out;
}

}  // namespace epchain
