#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "wigner/fem.hpp"
#include "wigner/hermite.hpp"

using namespace wigner;

namespace {

constexpr double kPi = std::numbers::pi;

// independent recursion-free Hermite evaluation for small n
double he_direct(int n, double p) {
    switch (n) {
        case 0: return 1;
        case 1: return p;
        case 2: return p * p - 1;
        case 3: return p * p * p - 3 * p;
        case 4: return p * p * p * p - 6 * p * p + 3;
        default: {
            // explicit sum He_n(p) = n! sum_m (-1)^m p^{n-2m} / (m! (n-2m)! 2^m)
            double nf = 1;
            for (int i = 2; i <= n; ++i) nf *= i;
            double tot = 0;
            for (int m = 0; 2 * m <= n; ++m) {
                double mf = 1, rf = 1;
                for (int i = 2; i <= m; ++i) mf *= i;
                for (int i = 2; i <= n - 2 * m; ++i) rf *= i;
                tot += ((m % 2) ? -1.0 : 1.0) * std::pow(p, n - 2 * m) /
                       (mf * rf * std::pow(2.0, m));
            }
            return nf * tot;
        }
    }
}

// composite Simpson on [-L, L]
template <typename F>
double simpson(F f, double lo, double hi, int n) {
    const double h = (hi - lo) / n;
    double s = f(lo) + f(hi);
    for (int i = 1; i < n; ++i) s += f(lo + i * h) * ((i % 2) ? 4.0 : 2.0);
    return s * h / 3.0;
}

// exact harmonic ground-state coefficients f_{2k}(x) = e^{-x^2} (-1)^k / (sqrt(pi) 4^k k!)
CoefficientSet exact_harmonic(const Mesh1D& mesh, int K) {
    CoefficientSet f = make_coefficient_set(mesh, K);
    for (int k = 0; k <= K; ++k) {
        double denom = std::sqrt(kPi) * std::pow(4.0, k);
        for (int i = 2; i <= k; ++i) denom *= i;
        if (k == 1) denom *= 1;  // k! for k=1 is 1
        const double c = ((k % 2) ? -1.0 : 1.0) / denom;
        for (int i = 0; i < mesh.n_nodes(); ++i)
            f.phi[k][i] = c * std::exp(-mesh.nodes[i] * mesh.nodes[i]);
    }
    return f;
}

}  // namespace

TEST_CASE("hermite_he matches explicit polynomials") {
    for (int n = 0; n <= 12; ++n)
        for (double p : {-2.7, -1.0, -0.3, 0.0, 0.5, 1.9, 3.3})
            CHECK(hermite_he(n, p) == doctest::Approx(he_direct(n, p)).epsilon(1e-12));
}

TEST_CASE("c_alpha against quadrature") {
    for (int n = 0; n <= 12; ++n) {
        const double q = simpson(
            [n](double p) { return hermite_he(n, p) * std::exp(-p * p); }, -12.0,
            12.0, 24000);
        if (n % 2 == 1) {
            CHECK(c_alpha(n) == 0.0);
            CHECK(std::abs(q) < 1e-12);
        } else {
            CHECK(c_alpha(n) == doctest::Approx(q).epsilon(1e-10));
        }
    }
    CHECK_THROWS_AS((void)c_alpha(-1), std::invalid_argument);
}

TEST_CASE("h_from_f and f_from_h invert each other") {
    const Mesh1D mesh = build_mesh(2.0, 0.5, 1);
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    for (int K : {0, 1, 3, 6}) {
        CoefficientSet f = make_coefficient_set(mesh, K);
        for (auto& phi : f.phi)
            for (auto& v : phi) v = uni(rng);
        const CoefficientSet back = f_from_h(h_from_f(f));
        for (int k = 0; k <= K; ++k)
            for (int i = 0; i < mesh.n_nodes(); ++i)
                CHECK(back.phi[k][i] == doctest::Approx(f.phi[k][i]).epsilon(1e-13));
        const CoefficientSet back2 = h_from_f(f_from_h(f));
        for (int k = 0; k <= K; ++k)
            for (int i = 0; i < mesh.n_nodes(); ++i)
                CHECK(back2.phi[k][i] == doctest::Approx(f.phi[k][i]).epsilon(1e-13));
    }
}

TEST_CASE("overlap is symmetric and matches the brute-force phase-space integral") {
    const Mesh1D mesh = build_mesh(6.0, 0.05, 1);
    const int K = 8;
    const CoefficientSet f = exact_harmonic(mesh, K);
    // a second, different smooth state: scaled Gaussian profile per moment
    CoefficientSet g = make_coefficient_set(mesh, K);
    for (int k = 0; k <= K; ++k)
        for (int i = 0; i < mesh.n_nodes(); ++i) {
            const double x = mesh.nodes[i];
            g.phi[k][i] = std::exp(-0.7 * x * x) / (1.0 + k * k);
        }
    const BandedMatrix mass = assemble_mass(mesh);
    const double sfg = overlap(f, g, mass);
    const double sgf = overlap(g, f, mass);
    CHECK(sfg == doctest::Approx(sgf).epsilon(1e-12));

    // brute-force 2 pi int int f g dx dp, tensor Simpson rule
    const double L = 6.0;
    const int nx = 480, np = 480;
    auto sw = [](int i, int n) {
        if (i == 0 || i == n) return 1.0;
        return (i % 2) ? 4.0 : 2.0;
    };
    double tot = 0.0;
    for (int i = 0; i <= nx; ++i) {
        const double x = -L + 2 * L * i / nx;
        for (int j = 0; j <= np; ++j) {
            const double p = -L + 2 * L * j / np;
            tot += sw(i, nx) * sw(j, np) * evaluate_wigner(f, x, p) *
                   evaluate_wigner(g, x, p);
        }
    }
    tot *= (2 * L / nx / 3) * (2 * L / np / 3) * 2 * kPi;
    CHECK(sfg == doctest::Approx(tot).epsilon(1e-6));

    // positive on a nonzero state
    CHECK(overlap(f, f, mass) > 0.0);
}

TEST_CASE("evaluate_wigner matches the truncated series and the exact peak") {
    const Mesh1D mesh = build_mesh(10.0, 0.05, 2);
    const int K = 10;
    const CoefficientSet f = exact_harmonic(mesh, K);
    // independent series evaluation at scattered points
    for (double x : {0.0, 0.4, -1.3})
        for (double p : {0.0, 0.8, -2.1}) {
            double series = 0.0;
            for (int k = 0; k <= K; ++k) {
                const double c = ((k % 2) ? -1.0 : 1.0) * std::exp(-x * x) /
                                 (std::sqrt(kPi) * std::pow(4.0, k) *
                                  std::tgamma(k + 1.0));
                series += c * std::exp(-p * p / 2) / std::sqrt(2 * kPi) *
                          hermite_he(2 * k, p);
            }
            CHECK(evaluate_wigner(f, x, p) == doctest::Approx(series).epsilon(1e-11));
        }
    // truncation tail at the peak: the K=10 series stops ~3.6e-5 short of 1/pi
    CHECK(std::abs(evaluate_wigner(f, 0.0, 0.0) - 1.0 / kPi) < 5e-5);
    // symmetric in p by construction (even orders only)
    CHECK(evaluate_wigner(f, 0.7, 1.3) == evaluate_wigner(f, 0.7, -1.3));
    // zero state evaluates to zero
    CoefficientSet z = make_coefficient_set(mesh, 3);
    CHECK(evaluate_wigner(z, 0.3, 0.2) == 0.0);
    // outside the spatial domain
    CHECK_THROWS_AS((void)evaluate_wigner(f, 10.5, 0.0), std::invalid_argument);
}

TEST_CASE("reconstruct_wavefunction recovers the harmonic ground state") {
    const Mesh1D mesh = build_mesh(10.0, 0.05, 2);
    const CoefficientSet f = exact_harmonic(mesh, 12);
    const double psi0 = std::pow(kPi, -0.25);
    const auto psi = reconstruct_wavefunction(f, 0.0, psi0);
    for (int i = 0; i < mesh.n_nodes(); ++i) {
        const double x = mesh.nodes[i];
        if (std::abs(x) > 3.0) continue;
        const double exact = std::pow(kPi, -0.25) * std::exp(-x * x / 2);
        CHECK(psi[i] == doctest::Approx(exact).epsilon(1e-4));
    }
    CHECK_THROWS_AS((void)reconstruct_wavefunction(f, 0.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS((void)reconstruct_wavefunction(f, 11.0, 1.0), std::invalid_argument);
    const CoefficientSet z = make_coefficient_set(mesh, 2);
    const auto zero = reconstruct_wavefunction(z, 0.0, 1.0);
    for (double v : zero) CHECK(v == 0.0);
}

TEST_CASE("h_from_wavefunction reproduces exact coefficient chains") {
    // For the harmonic ground state the full chain psi -> h -> f must land on
    // the closed-form coefficients up to finite-difference error.
    const Mesh1D mesh = build_mesh(8.0, 0.02, 1);
    const int K = 3;
    std::vector<double> psi(mesh.n_nodes());
    for (int i = 0; i < mesh.n_nodes(); ++i)
        psi[i] = std::pow(kPi, -0.25) * std::exp(-mesh.nodes[i] * mesh.nodes[i] / 2);
    const CoefficientSet f = f_from_h(h_from_wavefunction(mesh, psi, K));
    const CoefficientSet ex = exact_harmonic(mesh, K);
    for (int k = 0; k <= K; ++k) {
        double emax = 0.0;
        for (int i = 0; i < mesh.n_nodes(); ++i)
            emax = std::max(emax, std::abs(f.phi[k][i] - ex.phi[k][i]));
        CHECK(emax < 2e-6);
    }
}

TEST_CASE("coefficient set shape checks") {
    const Mesh1D mesh = build_mesh(2.0, 0.5, 1);
    const CoefficientSet f = make_coefficient_set(mesh, 4);
    CHECK(f.K == 4);
    CHECK(static_cast<int>(f.phi.size()) == 5);
    for (const auto& phi : f.phi)
        CHECK(static_cast<int>(phi.size()) == mesh.n_nodes());
    const Mesh1D other = build_mesh(2.0, 0.25, 1);
    const CoefficientSet g = make_coefficient_set(other, 4);
    const BandedMatrix mass = assemble_mass(mesh);
    CHECK_THROWS_AS((void)overlap(f, g, mass), std::invalid_argument);
}
