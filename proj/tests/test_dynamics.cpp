#include <doctest.h>

#include <cmath>

#include "epchain/detail/cmatrix.hpp"
#include "epchain/dynamics.hpp"

using namespace epchain;

TEST_SUITE("dynamics") {

TEST_CASE("Hermitian evolution conserves norm and energy") {
    const ChainParams p{1.0, 0.4, 0.0, 0.0, 6};
    const auto h = build_hamiltonian(p);
    const auto traj = evolve(p, uniform_state(6), 50.0, 1000, false);
    REQUIRE(traj.size() == 1001);
    auto expectation = [&](const StateVector& s) {
        cplx acc = 0.0;
        for (int i = 0; i < 6; ++i) {
            cplx hx = 0.0;
            if (i > 0) hx += h.sub[i - 1] * s.amplitudes[i - 1];
            if (i + 1 < 6) hx += h.super[i] * s.amplitudes[i + 1];
            acc += std::conj(s.amplitudes[i]) * hx;
        }
        return acc;
    };
    const double e0 = expectation(traj.front()).real();
    for (std::size_t k = 0; k < traj.size(); k += 100) {
        CHECK(std::abs(detail::norm2(traj[k].amplitudes) - 1.0) < 1e-9);
        CHECK(std::abs(expectation(traj[k]).real() - e0) < 1e-8 * (1.0 + std::abs(e0)));
    }
}

TEST_CASE("one-way end link drives the amplitude to one end") {
    // g = v makes the end link one-way; the late-time state piles up on the
    // left while the right end empties out completely
    const ChainParams p{1.0, 0.1, 1.0, 0.0, 8};
    const auto res = run_funnel(p, uniform_state(8), 2);
    CHECK(res.edge_left > 0.8);
    CHECK(res.edge_right < 1e-9);
}

TEST_CASE("one-way middle links confine the state to the last two sites") {
    // g = w: every even link is one-way, the chain funnels block by block
    const ChainParams p{1.0, 0.1, 0.1, 0.0, 8};
    const auto res = run_funnel(p, uniform_state(8), 2);
    CHECK(res.edge_left > 0.99);
    CHECK(res.edge_right < 1e-6);
}

TEST_CASE("funneling direction flips with the sign of g") {
    const ChainParams plus{1.0, 0.1, 0.9, 0.0, 8};
    const ChainParams minus{1.0, 0.1, -0.9, 0.0, 8};
    const auto rp = run_funnel(plus, uniform_state(8), 2);
    const auto rm = run_funnel(minus, uniform_state(8), 2);
    CHECK(rp.edge_left == doctest::Approx(rm.edge_right).epsilon(1e-9));
    CHECK(rp.edge_right == doctest::Approx(rm.edge_left).epsilon(1e-9));
    CHECK(rp.edge_left > rp.edge_right);
}

TEST_CASE("renormalized non-Hermitian evolution approaches a fixed direction") {
    // at g = 0.95 the whole spectrum is imaginary with a unique top mode,
    // so the renormalized evolution is a convergent power iteration
    const ChainParams p{1.0, 0.1, 0.95, 0.0, 4};
    const auto traj = evolve(p, uniform_state(4), 100.0, 1000, true);
    const auto& last = traj.back().amplitudes;
    const auto& prev = traj[traj.size() - 2].amplitudes;
    const double angle = std::acos(std::min(1.0, std::abs(detail::dot(last, prev))));
    CHECK(angle < 1e-8);
}

TEST_CASE("edge_mass basics") {
    CHECK(edge_mass(uniform_state(8), 8, Side::left) == doctest::Approx(1.0));
    CHECK(edge_mass(site_state(8, 0), 1, Side::left) == doctest::Approx(1.0));
    CHECK(edge_mass(site_state(8, 0), 1, Side::right) == doctest::Approx(0.0));
    CHECK(edge_mass(uniform_state(4), 1, Side::left) == doctest::Approx(0.25));
    CHECK_THROWS_AS(edge_mass(uniform_state(4), 0, Side::left), std::invalid_argument);
    CHECK_THROWS_AS(edge_mass(uniform_state(4), 5, Side::left), std::invalid_argument);
}

TEST_CASE("evolve validates inputs") {
    const ChainParams p{1.0, 0.1, 0.0, 0.0, 4};
    CHECK_THROWS_AS(evolve(p, uniform_state(4), 1.0, 0, false), std::invalid_argument);
    CHECK_THROWS_AS(evolve(p, uniform_state(4), -1.0, 10, false), std::invalid_argument);
    CHECK_THROWS_AS(evolve(p, uniform_state(6), 1.0, 10, false), std::invalid_argument);
}

TEST_CASE("evolve errors out when the per-step propagator norm is absurd") {
    // a defective point forces the series route, and a gigantic dt pushes
    // the scaling count past its cap
    const ChainParams p{1.0, 0.5, 1.0, 0.0, 4};
    CHECK_THROWS_AS(evolve(p, uniform_state(4), 1e21, 1, false), std::runtime_error);
}

TEST_CASE("series fallback at a defective point still evolves accurately") {
    // at g = v the eigenbasis is singular, forcing the scaled-squared series;
    // compare one step against a very fine spectral-free reference
    const ChainParams p{1.0, 0.5, 1.0, 0.0, 4};
    const auto one = evolve(p, site_state(4, 2), 0.5, 1, false).back();
    const auto fine = evolve(p, site_state(4, 2), 0.5, 64, false).back();
    double diff = 0.0;
    for (int i = 0; i < 4; ++i) diff = std::max(diff, std::abs(one.amplitudes[i] - fine.amplitudes[i]));
    CHECK(diff < 1e-9);
}

}  // TEST_SUITE
