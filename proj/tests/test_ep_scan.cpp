#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "epchain/ep_scan.hpp"

using namespace epchain;

namespace {

std::vector<const EpRecord*> records_near(const std::vector<EpRecord>& recs, double g, double tol) {
    std::vector<const EpRecord*> out;
    for (const auto& r : recs)
        if (std::abs(r.g - g) < tol) out.push_back(&r);
    return out;
}

int count_kind(const std::vector<EpRecord>& recs, DegeneracyKind k) {
    int c = 0;
    for (const auto& r : recs) c += (r.kind == k);
    return c;
}

}  // namespace

TEST_SUITE("ep_scan") {

TEST_CASE("four-site scan at a = 0.3 finds the four one-way loci") {
    ChainParams p{1.0, 0.1, 0.0, 0.3, 4};
    ScanConfig cfg;
    cfg.min = -2.0;
    cfg.max = 2.0;
    cfg.samples = 801;
    const auto recs = scan_for_eps(p, cfg);

    for (double locus : {-1.0, -0.4, 0.4, 1.0}) {
        const auto near = records_near(recs, locus, 1e-6);
        REQUIRE(near.size() == 1);
        CHECK(near.front()->refined);
        CHECK(std::abs(near.front()->energy) < 1e-5);
        CHECK(near.front()->cluster_size == 2);
        CHECK(near.front()->coalescence < 0.1);
        CHECK(near.front()->kind == DegeneracyKind::ep);
        CHECK(near.front()->matched_order == 2);
        REQUIRE(near.front()->case_label.has_value());
        CHECK(*near.front()->case_label == EpCase::type_i);
    }
    // no spurious records: the type-2 quadratic has no real solutions here
    CHECK(recs.size() == 4);
}

TEST_CASE("range excluding the loci yields no records") {
    ChainParams p{1.0, 1.0, 0.0, 0.0, 4};
    ScanConfig cfg;
    cfg.min = -0.9;
    cfg.max = 0.9;
    cfg.samples = 301;
    CHECK(scan_for_eps(p, cfg).empty());
}

TEST_CASE("touch zeros: the a = 0 type-2 loci appear without sign changes") {
    ChainParams p{0.1, 1.0, 0.0, 0.0, 4};
    ScanConfig cfg;
    cfg.min = -2.0;
    cfg.max = 2.0;
    cfg.samples = 801;
    const auto recs = scan_for_eps(p, cfg);
    const double inner = std::sqrt(1.04 / 5.0);
    for (double locus : {-1.0, -inner, inner, 1.0}) {
        const auto near = records_near(recs, locus, 1e-6);
        CHECK(near.size() == 2);  // one cluster at +E, one at -E
        for (const auto* r : near) {
            CHECK(r->kind == DegeneracyKind::ep);
            CHECK(r->matched_order == 2);
            REQUIRE(r->case_label.has_value());
            CHECK(*r->case_label == EpCase::type_iia);  // nonzero-energy pair
        }
    }
    // the discriminant also vanishes at g = +-v, but those zero crossings
    // split linearly and stay labeled as crossings
    int eps = 0, crossings = 0;
    for (const auto& r : recs) {
        eps += (r.kind == DegeneracyKind::ep);
        crossings += (r.kind == DegeneracyKind::crossing);
    }
    CHECK(eps == 8);
    CHECK(crossings == 2);
    for (const auto* r : records_near(recs, 0.1, 1e-6)) CHECK(r->kind == DegeneracyKind::crossing);
}

TEST_CASE("six-site chain at a = 0: eight EP records in [-2, 2]") {
    ChainParams p{1.0, 0.1, 0.0, 0.0, 6};
    ScanConfig cfg;
    cfg.min = -2.0;
    cfg.max = 2.0;
    cfg.samples = 801;
    const auto recs = scan_for_eps(p, cfg);
    CHECK(count_kind(recs, DegeneracyKind::ep) == 8);
    // the zero-energy pairs at g = +-v coalesce but split analytically,
    // so they are crossings rather than EPs
    for (const auto& r : recs) {
        if (std::abs(std::abs(r.g) - 1.0) < 1e-6 && std::abs(r.energy) < 1e-4) {
            CHECK(r.kind == DegeneracyKind::crossing);
            CHECK(r.coalescence < 0.1);
        }
    }
}

TEST_CASE("four-site chain at a = 0: the zero crossings at g = +-v are analytic") {
    ChainParams p{1.0, 0.1, 0.0, 0.0, 4};
    ScanConfig cfg;
    cfg.min = 0.5;
    cfg.max = 1.5;
    cfg.samples = 501;
    const auto recs = scan_for_eps(p, cfg);
    const auto near = records_near(recs, 1.0, 1e-6);
    REQUIRE(near.size() == 1);
    CHECK(near.front()->coalescence < 0.1);                  // the eigenvectors do coalesce
    CHECK(near.front()->kind == DegeneracyKind::crossing);   // but the splitting is linear
    CHECK(std::abs(near.front()->exponent - 1.0) < 0.05);
}

TEST_CASE("scan agrees with the closed-form loci over random parameter draws") {
    std::mt19937 rng(617);
    std::uniform_real_distribution<double> dist(-1.5, 1.5);
    int checked = 0;
    for (int trial = 0; trial < 20; ++trial) {
        const double v = dist(rng), w = dist(rng), a = dist(rng);
        if (std::abs(v) < 0.05 || std::abs(w) < 0.05) continue;  // skip the collapsed family
        ChainParams p{v, w, 0.0, a, 4};
        ScanConfig cfg;
        cfg.min = -2.0;
        cfg.max = 2.0;
        cfg.samples = 1201;
        cfg.estimate_orders = false;
        const auto recs = scan_for_eps(p, cfg);

        std::vector<double> expected;
        for (double g : type1_loci(v, w, a))
            if (g > cfg.min && g < cfg.max) expected.push_back(g);
        for (double g : type2_loci(v, w, a))
            if (g > cfg.min && g < cfg.max) expected.push_back(g);
        std::sort(expected.begin(), expected.end());
        expected.erase(std::unique(expected.begin(), expected.end(),
                                   [](double x, double y) { return std::abs(x - y) < 1e-9; }),
                       expected.end());

        // two loci inside the same grid cell mask each other (a touch zero
        // next to a sign change); skip those below the grid resolution
        const double step = (cfg.max - cfg.min) / (cfg.samples - 1);
        for (std::size_t i = 0; i < expected.size(); ++i) {
            const double g = expected[i];
            const bool crowded =
                (i > 0 && g - expected[i - 1] < 3.0 * step) ||
                (i + 1 < expected.size() && expected[i + 1] - g < 3.0 * step);
            if (crowded) continue;
            const auto near = records_near(recs, g, 1e-6);
            CHECK_MESSAGE(!near.empty(), "missing locus g=", g, " v=", v, " w=", w, " a=", a);
        }
        for (const auto& r : recs) {
            const bool matched = std::any_of(expected.begin(), expected.end(),
                                             [&](double g) { return std::abs(r.g - g) < 1e-6; });
            CHECK_MESSAGE(matched, "spurious record g=", r.g, " v=", v, " w=", w, " a=", a);
        }
        ++checked;
    }
    CHECK(checked >= 15);
}

TEST_CASE("scan records are mirrored under g -> -g") {
    ChainParams p{1.0, 0.1, 0.0, 0.25, 4};
    ScanConfig cfg;
    cfg.min = -1.8;
    cfg.max = 1.8;
    cfg.samples = 601;
    cfg.estimate_orders = false;
    const auto recs = scan_for_eps(p, cfg);
    REQUIRE(!recs.empty());
    for (const auto& r : recs) {
        const auto mirror = records_near(recs, -r.g, 1e-7);
        CHECK(!mirror.empty());
    }
}

TEST_CASE("order_estimate at the known case types") {
    // one-way end-link locus with gradient: square-root splitting
    REQUIRE(classify_point({1.0, 0.1, 1.0, 0.3, 4}) == EpCase::type_i);
    const auto case1 = order_estimate({1.0, 0.1, 1.0, 0.3, 4}, ScanAxis::g);
    CHECK(case1.exponent == doctest::Approx(0.5).epsilon(0.06));
    CHECK(case1.matched_order == 2);
    CHECK(case1.cluster_size == 2);

    // middle-link one-way locus at a = 0: nonzero-energy pair
    REQUIRE(classify_point({0.1, 1.0, 1.0, 0.0, 4}) == EpCase::type_iia);
    const auto case2a = order_estimate({0.1, 1.0, 1.0, 0.0, 4}, ScanAxis::g);
    CHECK(case2a.exponent == doctest::Approx(0.5).epsilon(0.06));
    CHECK(case2a.matched_order == 2);

    // fourth-order point on the g = +-(v-2a) branch, perturbed in the gradient
    const auto pts = case_iib_loci(1.0, 0.1);
    bool tested4 = false;
    for (const auto& [a, g] : pts) {
        if (std::abs(std::abs(g) - 1.0) < 1e-6 || a < 0.0 || a > 0.5) continue;
        const auto fit = order_estimate({1.0, 0.1, g, a, 4}, ScanAxis::a);
        CHECK(fit.exponent == doctest::Approx(0.25).epsilon(0.12));
        CHECK(fit.matched_order == 4);
        CHECK(fit.cluster_size == 4);
        tested4 = true;
    }
    CHECK(tested4);

    // generic point: analytic perturbation
    REQUIRE(classify_point({1.0, 0.1, 0.7, 0.3, 4}) == EpCase::none);
    const auto generic = order_estimate({1.0, 0.1, 0.7, 0.3, 4}, ScanAxis::g);
    CHECK(generic.exponent == doctest::Approx(1.0).epsilon(0.05));
    CHECK(generic.matched_order == 1);
}

TEST_CASE("order_estimate errors when the splitting never leaves the noise floor") {
    // perturbing a at g = v leaves the zero pair exactly double
    CHECK_THROWS_AS(order_estimate({1.0, 0.1, 1.0, 0.3, 4}, ScanAxis::a), std::runtime_error);
}

TEST_CASE("ep_vs_dp distinguishes the block-degenerate Hermitian chain") {
    // decoupled blocks with equal spectra: a diabolic point
    ChainParams dp_p{1.0, 1.0, 0.0, 1.0, 4};
    auto ev = eigenvalues(build_hamiltonian(dp_p)).eigenvalues;
    std::sort(ev.begin(), ev.end(), [](cplx x, cplx y) { return x.real() < y.real(); });
    CHECK(ep_vs_dp(dp_p, ev[2], ev[3]) == DegeneracyKind::dp);

    // one-way end link with gradient: exceptional
    ChainParams ep_p{1.0, 0.1, 1.0, 0.3, 4};
    auto ev2 = eigenvalues(build_hamiltonian(ep_p)).eigenvalues;
    std::sort(ev2.begin(), ev2.end(), [](cplx x, cplx y) { return std::abs(x) < std::abs(y); });
    CHECK(ep_vs_dp(ep_p, ev2[0], ev2[1]) == DegeneracyKind::ep);
}

TEST_CASE("trajectories: lines intersect near the fourth-order point") {
    // The moving locus advances 2*da per row, so the linking radius must
    // cover that jump in units of the g grid step.
    ChainParams base{1.0, 0.1, 0.0, 0.0, 4};
    const auto traj = ep_trajectories(base, 0.2, 1.3, 241, 0.0, 0.3, 16, 10.0);
    REQUIRE(traj.lines.size() >= 2);
    // a stationary line of records at g = 1 and a moving line at g = 1 - 2a
    bool fixed_line = false, moving_line = false;
    for (const auto& line : traj.lines) {
        if (line.points.size() < 5) continue;
        const double g0 = line.points.front().g;
        const double g1 = line.points.back().g;
        if (std::abs(g0 - 1.0) < 1e-6 && std::abs(g1 - 1.0) < 1e-6) fixed_line = true;
        if (g1 < g0 - 0.1) moving_line = true;
    }
    CHECK(fixed_line);
    CHECK(moving_line);

    REQUIRE(!traj.intersections.empty());
    bool snapped = false;
    for (const auto& x : traj.intersections) {
        if (std::abs(x.a - 0.14607158371605264) < 1e-9 &&
            std::abs(x.g - (1.0 - 2.0 * 0.14607158371605264)) < 1e-9) {
            snapped = true;
            CHECK(x.matched_order == 4);
            REQUIRE(x.case_label.has_value());
            CHECK(*x.case_label == EpCase::type_iib);
        }
    }
    CHECK(snapped);
}

TEST_CASE("single-row grid reproduces the plain scan") {
    ChainParams base{1.0, 0.1, 0.0, 0.3, 4};
    const auto traj = ep_trajectories(base, -2.0, 2.0, 801, 0.3, 0.3, 1);
    ScanConfig cfg;
    cfg.min = -2.0;
    cfg.max = 2.0;
    cfg.samples = 801;
    const auto recs = scan_for_eps(base, cfg);
    std::size_t total = 0;
    for (const auto& line : traj.lines) total += line.points.size();
    CHECK(total == recs.size());
}

TEST_CASE("empty trajectory grid yields an empty set") {
    ChainParams base{1.0, 0.1, 0.0, 0.0, 4};
    const auto traj = ep_trajectories(base, -1.0, 1.0, 11, 0.0, 1.0, 0);
    CHECK(traj.lines.empty());
    CHECK(traj.intersections.empty());
}

TEST_CASE("scan validates its configuration") {
    ChainParams p{1.0, 0.1, 0.0, 0.0, 4};
    ScanConfig bad;
    bad.samples = 1;
    CHECK_THROWS_AS(scan_for_eps(p, bad), std::invalid_argument);
    bad.samples = 10;
    bad.min = 1.0;
    bad.max = -1.0;
    CHECK_THROWS_AS(scan_for_eps(p, bad), std::invalid_argument);
}

}  // TEST_SUITE
