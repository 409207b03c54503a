#include "epchain/closed_form.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace epchain {

namespace {

void require_n4(const ChainParams& p) {
    validate(p);
    if (p.n != 4) throw std::invalid_argument("closed-form expressions exist only for n = 4");
}

cplx principal_sqrt(double x) {
    return (x >= 0.0) ? cplx{std::sqrt(x), 0.0} : cplx{0.0, std::sqrt(-x)};
}

/// Stable real quadratic solver for alpha x^2 + beta x + gamma.
std::vector<double> solve_quadratic(double alpha, double beta, double gamma) {
    std::vector<double> out;
    if (alpha == 0.0) {
        if (beta != 0.0) out.push_back(-gamma / beta);
        return out;
    }
    const double disc = beta * beta - 4.0 * alpha * gamma;
    if (disc < 0.0) return out;
    const double sq = std::sqrt(disc);
    const double q = -0.5 * (beta + (beta >= 0.0 ? sq : -sq));
    if (q != 0.0) {
        out.push_back(q / alpha);
        out.push_back(gamma / q);
    } else {
        out.push_back(0.0);
        if (disc > 0.0) out.push_back(-beta / alpha);
    }
    return out;
}

void push_unique(std::vector<double>& xs, double x, double tol = 0.0) {
    for (double y : xs)
        if (std::abs(x - y) <= tol) return;
    xs.push_back(x);
}

}  // namespace

SpectralCoefficients coefficients(const ChainParams& p) {
    require_n4(p);
    SpectralCoefficients sc;
    sc.A = (-1.5 * p.g * p.g + p.v * p.v + 0.5 * p.w * p.w) +
           (2.5 * p.a * p.a - 2.0 * p.a * p.v - p.a * p.w);
    const double m1 = p.v * p.v - p.g * p.g;
    const double m3 = (p.v - 2.0 * p.a) * (p.v - 2.0 * p.a) - p.g * p.g;
    sc.B_sq = sc.A * sc.A - m1 * m3;
    sc.B = principal_sqrt(sc.B_sq);
    return sc;
}

std::array<cplx, 4> energies_n4(const ChainParams& p) {
    const auto sc = coefficients(p);
    const cplx ep = std::sqrt(cplx{sc.A, 0.0} + sc.B);
    const cplx em = std::sqrt(cplx{sc.A, 0.0} - sc.B);
    return {ep, -ep, em, -em};
}

std::vector<double> type1_loci(double v, double w, double a) {
    (void)w;  // the zero-energy loci depend on the odd links only
    std::vector<double> out;
    push_unique(out, v);
    push_unique(out, -v);
    push_unique(out, v - 2.0 * a);
    push_unique(out, -(v - 2.0 * a));
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<double> type2_loci(double v, double w, double a) {
    // B^2 as a quadratic in x = g^2:
    //   A(x) = rest - 1.5 x,   rest = v^2 + w^2/2 + 2.5 a^2 - 2av - aw
    //   B^2(x) = A(x)^2 - (v^2 - x)((v-2a)^2 - x)
    const double rest = v * v + 0.5 * w * w + 2.5 * a * a - 2.0 * a * v - a * w;
    const double v2 = v * v;
    const double u2 = (v - 2.0 * a) * (v - 2.0 * a);
    const double alpha = 1.25;
    const double beta = -3.0 * rest + v2 + u2;
    const double gamma = rest * rest - v2 * u2;
    std::vector<double> out;
    for (double x : solve_quadratic(alpha, beta, gamma)) {
        if (x < 0.0) continue;  // g^2 must be nonnegative for real g
        const double g = std::sqrt(x);
        push_unique(out, g, 1e-15);
        push_unique(out, -g, 1e-15);
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<std::pair<double, double>> case_iib_loci(double v, double w) {
    std::vector<std::pair<double, double>> out;
    auto consider = [&](double a, double g) {
        ChainParams p{v, w, g, a, 4};
        const auto sc = coefficients(p);
        if (std::abs(sc.A) < 1e-9 && std::abs(sc.B_sq) < 1e-9) out.emplace_back(a, g);
    };
    // Branch 1: g = +-(v - 2a) with 7a^2 - 2a(4v - w) + (v^2 - w^2) = 0.
    {
        const double rad = 9.0 * v * v - 8.0 * v * w + 8.0 * w * w;
        if (rad >= 0.0) {
            for (double sgn : {+1.0, -1.0}) {
                const double a = (4.0 * v - w + sgn * std::sqrt(rad)) / 7.0;
                consider(a, v - 2.0 * a);
                consider(a, -(v - 2.0 * a));
            }
        }
    }
    // Branch 2: g = +-v with 5a^2 - 2a(2v + w) + (w^2 - v^2) = 0.
    {
        const double s = 2.0 * v + w;
        const double rad = s * s - 5.0 * (w * w - v * v);
        if (rad >= 0.0) {
            for (double sgn : {+1.0, -1.0}) {
                const double a = (s + sgn * std::sqrt(rad)) / 5.0;
                consider(a, v);
                consider(a, -v);
            }
        }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end(),
                          [](const auto& x, const auto& y) {
                              return std::abs(x.first - y.first) < 1e-12 && std::abs(x.second - y.second) < 1e-12;
                          }),
              out.end());
    return out;
}

EpLoci ep_loci(const ChainParams& p) {
    require_n4(p);
    return EpLoci{type1_loci(p.v, p.w, p.a), type2_loci(p.v, p.w, p.a), case_iib_loci(p.v, p.w)};
}

std::array<cplx, 4> perturbed_energies(const ChainParams& p, double eps) {
    const auto sc = coefficients(p);
    const double a_lin = sc.A + (5.0 * p.a - 2.0 * p.v - p.w) * eps;
    const double inner = sc.B_sq + 4.0 * (2.0 * p.a - p.v) * (p.g * p.g - p.v * p.v) * eps;
    const cplx b = principal_sqrt(inner);
    const cplx ep = std::sqrt(cplx{a_lin, 0.0} + b);
    const cplx em = std::sqrt(cplx{a_lin, 0.0} - b);
    return {ep, -ep, em, -em};
}

const char* to_string(EpCase c) {
    switch (c) {
        case EpCase::none: return "0";
        case EpCase::type_i: return "I";
        case EpCase::type_iia: return "IIA";
        case EpCase::type_iib: return "IIB";
    }
    return "?";
}

EpCase classify_point(const ChainParams& p, double tol) {
    const auto sc = coefficients(p);
    const double abs_b = std::sqrt(std::abs(sc.B_sq));
    // A^2 - B^2 equals the product of the two odd-link products exactly.
    const double a2_minus_b2 = sc.A * sc.A - sc.B_sq;
    if (abs_b > tol) return (std::abs(a2_minus_b2) <= tol) ? EpCase::type_i : EpCase::none;
    return (std::abs(sc.A) <= tol) ? EpCase::type_iib : EpCase::type_iia;
}

}  // namespace epchain
