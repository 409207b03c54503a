#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "epchain/detail/assignment.hpp"
#include "epchain/sweep.hpp"

using namespace epchain;

TEST_SUITE("assignment") {

TEST_CASE("matches brute force on random small cost matrices") {
    std::mt19937 rng(4242);
    std::uniform_real_distribution<double> dist(0.0, 10.0);
    for (int trial = 0; trial < 60; ++trial) {
        const int n = 2 + trial % 4;  // 2..5
        std::vector<double> cost(n * n);
        for (auto& c : cost) c = dist(rng);
        const auto asg = detail::min_cost_assignment(cost, n);
        double got = 0.0;
        std::vector<char> seen(n, 0);
        for (int i = 0; i < n; ++i) {
            REQUIRE(asg[i] >= 0);
            REQUIRE(asg[i] < n);
            REQUIRE(!seen[asg[i]]);
            seen[asg[i]] = 1;
            got += cost[i * n + asg[i]];
        }
        std::vector<int> perm(n);
        for (int i = 0; i < n; ++i) perm[i] = i;
        double best = 1e300;
        do {
            double s = 0.0;
            for (int i = 0; i < n; ++i) s += cost[i * n + perm[i]];
            best = std::min(best, s);
        } while (std::next_permutation(perm.begin(), perm.end()));
        CHECK(got == doctest::Approx(best).epsilon(1e-12));
    }
}

}  // TEST_SUITE

TEST_SUITE("sweep") {

TEST_CASE("sheet union equals the raw eigenvalue multiset") {
    const ChainParams base{1.0, 0.1, 0.0, 0.3, 4};
    const auto grid = sweep_1d(base, ScanAxis::g, -1.5, 1.5, 61, false);
    REQUIRE(grid.points.size() == 61);
    for (const auto& pt : grid.points) {
        ChainParams p = base;
        p.g = pt.g;
        auto raw = eigenvalues(build_hamiltonian(p)).eigenvalues;
        // greedy match: every raw eigenvalue is some sheet entry
        for (const auto& e : raw) {
            double best = 1e300;
            for (const auto& s : pt.energies) best = std::min(best, std::abs(s - e));
            CHECK(best < 1e-12);
        }
    }
}

TEST_CASE("sheets only permute across annotated degeneracies") {
    const ChainParams base{1.0, 0.1, 0.0, 0.3, 4};
    const auto grid = sweep_1d(base, ScanAxis::g, -1.5, 1.5, 301);
    auto has_record_between = [&](double lo, double hi) {
        for (const auto& r : grid.ep_annotations)
            if (r.g > lo && r.g < hi) return true;
        return false;
    };
    for (std::size_t i = 0; i + 1 < grid.points.size(); ++i) {
        if (has_record_between(grid.points[i].g, grid.points[i + 1].g)) continue;
        // identity assignment: sheet k at i is nearest to sheet k at i+1
        const auto& cur = grid.points[i].energies;
        const auto& nxt = grid.points[i + 1].energies;
        for (std::size_t k = 0; k < cur.size(); ++k) {
            for (std::size_t j = 0; j < nxt.size(); ++j) {
                if (j == k) continue;
                // allow exact ties (conjugate sheets crossing zero imag)
                CHECK(std::abs(cur[k] - nxt[k]) <= std::abs(cur[k] - nxt[j]) + 1e-12);
            }
        }
    }
}

TEST_CASE("collapsed family: persistent zero sheets and no isolated records") {
    // with v = w = g = 0 the first link vanishes for every a, so two sheets
    // are pinned at exactly zero and the discriminant vanishes identically;
    // a whole line of zeros is not a set of isolated degeneracies
    const ChainParams base{0.0, 0.0, 0.0, 0.0, 4};
    const auto grid = sweep_1d(base, ScanAxis::a, 0.1, 1.0, 11);
    for (const auto& pt : grid.points) {
        int zero_sheets = 0;
        for (const auto& e : pt.energies) zero_sheets += (e == cplx{0.0, 0.0});
        CHECK(zero_sheets >= 2);
    }
    CHECK(grid.ep_annotations.empty());

    // and at the fully zero point the whole spectrum is exactly zero
    const auto all_zero = eigenvalues(build_hamiltonian(base)).eigenvalues;
    for (const auto& e : all_zero) CHECK(e == cplx{0.0, 0.0});
}

TEST_CASE("2D sweep with a single a row degenerates to the 1D sweep") {
    const ChainParams base{1.0, 0.1, 0.0, 0.0, 4};
    const auto grid2 = sweep_2d(base, AxisSpec{-1.0, 1.0, 21}, AxisSpec{0.3, 0.3, 1}, false);
    ChainParams slice = base;
    slice.a = 0.3;
    const auto grid1 = sweep_1d(slice, ScanAxis::g, -1.0, 1.0, 21, false);
    REQUIRE(grid2.points.size() == grid1.points.size());
    for (std::size_t i = 0; i < grid1.points.size(); ++i) {
        CHECK(grid2.points[i].a == 0.3);
        for (std::size_t k = 0; k < grid1.points[i].energies.size(); ++k)
            CHECK(grid2.points[i].energies[k] == grid1.points[i].energies[k]);
    }
}

TEST_CASE("2D sweep: one-row slice matches the 1D sweep spectra") {
    const ChainParams base{1.0, 0.1, 0.0, 0.0, 6};
    AxisSpec ga{-1.2, 1.2, 25};
    AxisSpec aa{0.0, 0.7, 8};
    const auto grid2 = sweep_2d(base, ga, aa, false);
    REQUIRE(grid2.points.size() == 25u * 8u);
    ChainParams slice = base;
    slice.a = 0.7;
    const auto grid1 = sweep_1d(slice, ScanAxis::g, -1.2, 1.2, 25, false);
    for (int c = 0; c < 25; ++c) {
        const auto& p2 = grid2.points[7 * 25 + c];
        const auto& p1 = grid1.points[c];
        CHECK(p2.a == 0.7);
        for (const auto& e : p1.energies) {
            double best = 1e300;
            for (const auto& s : p2.energies) best = std::min(best, std::abs(s - e));
            CHECK(best < 1e-12);
        }
    }
}

TEST_CASE("winding numbers of the reciprocal limit") {
    const auto inner = winding_number(0.1, 1.0, 256);
    CHECK(std::abs(inner.winding) == 1);
    CHECK(inner.closure_defect < 1e-6);
    const auto outer = winding_number(1.0, 0.1, 256);
    CHECK(outer.winding == 0);
    CHECK(outer.closure_defect < 1e-6);
    const auto flat = winding_number(0.7, 0.0, 64);
    CHECK(flat.winding == 0);
}

TEST_CASE("winding is stable under sample doubling") {
    for (int samples = 64; samples <= 1024; samples *= 2) {
        CHECK(winding_number(0.3, 0.9, samples).winding == winding_number(0.3, 0.9, 2 * samples).winding);
    }
}

TEST_CASE("winding rejects the gapless point and tiny sample counts") {
    CHECK_THROWS_AS(winding_number(1.0, 1.0, 64), std::runtime_error);
    CHECK_THROWS_AS(winding_number(1.0, -1.0, 64), std::runtime_error);
    CHECK_THROWS_AS(winding_number(0.1, 1.0, 8), std::invalid_argument);
}

TEST_CASE("CSV export shape and 17-digit round trip") {
    const ChainParams base{1.0, 0.1, 0.0, 0.0, 4};
    const auto grid = sweep_1d(base, ScanAxis::g, -1.0, 1.0, 3, false);
    std::ostringstream os;
    write_grid(grid, ExportFormat::csv, os);
    const std::string text = os.str();
    std::istringstream is(text);
    std::string line;
    std::getline(is, line);
    CHECK(line == "g,a,re_e_1,re_e_2,re_e_3,re_e_4,im_e_1,im_e_2,im_e_3,im_e_4");
    int rows = 0;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        ++rows;
        // every numeric field round-trips exactly through text
        std::istringstream fields(line);
        std::string tok;
        int col = 0;
        while (std::getline(fields, tok, ',')) {
            const double x = std::stod(tok);
            char buf[40];
            std::snprintf(buf, sizeof buf, "%.17g", x);
            CHECK(tok == buf);
            ++col;
        }
        CHECK(col == 10);
    }
    CHECK(rows == 3);
}

TEST_CASE("JSON export round-trips the grid exactly") {
    const ChainParams base{1.0, 0.1, 0.0, 0.3, 4};
    const auto grid = sweep_1d(base, ScanAxis::g, -1.5, 1.5, 41);
    std::ostringstream os;
    write_grid(grid, ExportFormat::json, os);
    std::istringstream is(os.str());
    const auto back = read_grid_json(is);
    REQUIRE(back.points.size() == grid.points.size());
    for (std::size_t i = 0; i < grid.points.size(); ++i) {
        CHECK(back.points[i].g == grid.points[i].g);
        CHECK(back.points[i].a == grid.points[i].a);
        REQUIRE(back.points[i].energies.size() == grid.points[i].energies.size());
        for (std::size_t k = 0; k < grid.points[i].energies.size(); ++k)
            CHECK(back.points[i].energies[k] == grid.points[i].energies[k]);
    }
    REQUIRE(back.ep_annotations.size() == grid.ep_annotations.size());
    for (std::size_t i = 0; i < grid.ep_annotations.size(); ++i) {
        CHECK(back.ep_annotations[i].g == grid.ep_annotations[i].g);
        CHECK(back.ep_annotations[i].energy == grid.ep_annotations[i].energy);
        CHECK(back.ep_annotations[i].kind == grid.ep_annotations[i].kind);
        CHECK(back.ep_annotations[i].exponent == grid.ep_annotations[i].exponent);
    }
}

TEST_CASE("sweep validates its inputs") {
    const ChainParams base{1.0, 0.1, 0.0, 0.0, 4};
    CHECK_THROWS_AS(sweep_1d(base, ScanAxis::g, -1.0, 1.0, 1), std::invalid_argument);
    CHECK_THROWS_AS(sweep_1d(base, ScanAxis::g, 1.0, -1.0, 10), std::invalid_argument);
}

TEST_CASE("export rejects an unwritable path") {
    const ChainParams base{1.0, 0.1, 0.0, 0.0, 4};
    const auto grid = sweep_1d(base, ScanAxis::g, -1.0, 1.0, 3, false);
    CHECK_THROWS_AS(write_grid_file(grid, ExportFormat::csv, "/nonexistent-dir/out.csv"),
                    std::runtime_error);
    CHECK_THROWS_AS(read_grid_json_file("/nonexistent-dir/in.json"), std::runtime_error);
}

}  // TEST_SUITE
