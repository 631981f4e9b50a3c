#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "wigner/dft.hpp"
#include "wigner/fem.hpp"
#include "wigner/potentials.hpp"
#include "wigner/schrodinger.hpp"
#include "wigner/solver.hpp"

using namespace wigner;

namespace {

constexpr double kPi = 3.14159265358979323846;

ScfConfig coarse_config(int K, double h) {
    ScfConfig cfg;
    cfg.solver.K = K;
    cfg.solver.a = 10.0;
    cfg.solver.h = h;
    cfg.solver.p = 1;
    cfg.solver.dt = 0.01;
    cfg.solver.T = 500.0;
    cfg.solver.tol = 1e-10;
    return cfg;
}

double nodal_mass(const std::vector<double>& w, const std::vector<double>& rho) {
    double m = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) m += w[i] * rho[i];
    return m;
}

}  // namespace

TEST_CASE("total energy assembles the hartree, exchange and correlation pieces") {
    const std::vector<double> w = {0.5, 1.0, 1.0, 0.5};
    const std::vector<double> rho = {0.3, 0.7, 0.2, 0.05};
    const double eps = 0.42;
    const LdaConstants lda;

    // restate the functional from the published pieces: E = 2 eps - U_H
    // - int(V_XC rho) + E_X + E_C with U_H = 1/2 int rho^2 and
    // E_X = -1/4 int rho^2
    const XcPotentials xc = lda_vxc(rho, lda);
    double expected = 2.0 * eps;
    for (std::size_t i = 0; i < w.size(); ++i) {
        expected -= 0.5 * w[i] * rho[i] * rho[i];
        expected -= w[i] * (xc.vx[i] + xc.vc[i]) * rho[i];
        expected += -0.25 * w[i] * rho[i] * rho[i];
        expected += w[i] * lda_ec_density(rho[i], lda);
    }
    CHECK(total_energy(w, rho, eps, lda, true)
          == doctest::Approx(expected).epsilon(1e-13));

    // switching the interaction off bypasses every integral
    CHECK(total_energy(w, rho, eps, lda, false) == 2.0 * eps);

    // zero density: all interaction integrals vanish
    const std::vector<double> zero(w.size(), 0.0);
    CHECK(total_energy(w, zero, eps, lda, true)
          == doctest::Approx(2.0 * eps).epsilon(1e-15));

    // rounding-level negative entries are treated as zero
    const std::vector<double> tiny_neg = {0.3, -1e-13, 0.2, 0.05};
    const std::vector<double> tiny_zero = {0.3, 0.0, 0.2, 0.05};
    CHECK(total_energy(w, tiny_neg, eps, lda, true)
          == total_energy(w, tiny_zero, eps, lda, true));
}

TEST_CASE("interaction off reduces to the bare ground state, phase-space inner") {
    // K = 2 is the largest expansion the finite-difference nodal potential
    // (five derivative orders) can drive, and the largest the scf uses
    ScfConfig cfg = coarse_config(2, 0.1);
    cfg.solver.dt = 0.02;
    cfg.solver.T = 300.0;
    cfg.interaction_on = false;
    cfg.scf_tol = 1e-8;

    const DftState out = scf_solve(harmonic(1.0), InnerSolver::wigner, cfg);
    CHECK(out.converged);
    // the map is constant, so the loop settles as soon as the warm-started
    // inner solve reproduces itself
    CHECK(out.iterations <= 3);
    CHECK(out.total_energy == 2.0 * out.orbital_energy);
    CHECK(out.orbital_energy == doctest::Approx(0.5).epsilon(2e-3));

    const Mesh1D mesh = build_mesh(cfg.solver.a, cfg.solver.h, cfg.solver.p);
    const auto w = assemble_mass(mesh).row_sums();
    CHECK(nodal_mass(w, out.rho) == doctest::Approx(2.0).epsilon(1e-9));
    double derr = 0.0;
    for (int i = 0; i < mesh.n_nodes(); ++i) {
        const double x = mesh.nodes[i];
        derr = std::max(derr,
                        std::abs(out.rho[i] - 2.0 / std::sqrt(kPi) * std::exp(-x * x)));
    }
    CHECK(derr <= 5e-3);
    for (int i = 0; i < mesh.n_nodes(); ++i) {
        REQUIRE(out.v_h[i] == 0.0);
        REQUIRE(out.v_x[i] == 0.0);
        REQUIRE(out.v_c[i] == 0.0);
    }
}

TEST_CASE("interaction off with the reference inner solver repeats exactly") {
    ScfConfig cfg = coarse_config(0, 0.1);
    cfg.solver.dt = 0.02;
    cfg.solver.T = 300.0;
    cfg.interaction_on = false;

    const DftState out = scf_solve(harmonic(1.0), InnerSolver::schrodinger, cfg);
    CHECK(out.converged);
    // second iteration re-solves the identical eigenproblem from the same
    // seed, so the density update is exactly zero
    CHECK(out.iterations == 2);
    CHECK(out.history.back().density_change <= 1e-14);
    CHECK(out.total_energy == 2.0 * out.orbital_energy);
    CHECK(out.orbital_energy == doctest::Approx(0.5).epsilon(2e-3));
}

TEST_CASE("contact scf matches the reference energies at coarse resolution") {
    // two contact-interacting electrons in the x^2/2 trap; pinned
    // reference energies for the h = 0.2 discretization
    const Potential vext = harmonic(1.0);

    DftState w1 = scf_solve(vext, InnerSolver::wigner, coarse_config(1, 0.2));
    CHECK(w1.converged);
    CHECK(w1.total_energy == doctest::Approx(1.31727).epsilon(2e-4 / 1.31727));

    DftState w0 = scf_solve(vext, InnerSolver::wigner, coarse_config(0, 0.2));
    CHECK(w0.converged);
    CHECK(w0.total_energy == doctest::Approx(1.31718).epsilon(2e-4 / 1.31718));

    DftState s = scf_solve(vext, InnerSolver::schrodinger, coarse_config(0, 0.2));
    CHECK(s.converged);

    // the two inner solvers discretize the same problem
    CHECK(std::abs(w1.total_energy - s.total_energy) <= 1e-2);

    // bookkeeping and reported fields
    const Mesh1D mesh = build_mesh(10.0, 0.2, 1);
    const auto w = assemble_mass(mesh).row_sums();
    for (const DftState* st : {&w1, &w0, &s}) {
        CHECK(nodal_mass(w, st->rho) == doctest::Approx(2.0).epsilon(1e-9));
        CHECK(static_cast<int>(st->history.size()) == st->iterations);
        CHECK(st->history.front().iteration == 1);
        CHECK(st->history.back().iteration == st->iterations);
        CHECK(st->history.back().density_change <= 1e-9);
        CHECK(st->history.back().density_change < st->history.front().density_change);

        std::vector<double> rc(st->rho.size());
        for (std::size_t i = 0; i < rc.size(); ++i) rc[i] = std::max(st->rho[i], 0.0);
        CHECK(st->total_energy
              == total_energy(w, rc, st->orbital_energy, LdaConstants{}, true));
        const XcPotentials xc = lda_vxc(rc);
        for (std::size_t i = 0; i < rc.size(); i += 7) {
            REQUIRE(st->v_h[i] == doctest::Approx(rc[i]).scale(1.0).epsilon(1e-14));
            REQUIRE(st->v_x[i] == doctest::Approx(-0.5 * rc[i]).scale(1.0).epsilon(1e-14));
            REQUIRE(st->v_c[i] == doctest::Approx(xc.vc[i]).scale(1.0).epsilon(1e-14));
        }
    }
}

TEST_CASE("reference-inner energies converge to the continuum value at second order") {
    // the nodal energy quadrature differs from the phase-space column at
    // O(h^2) but the limit is shared
    const double limit = 1.31304;
    std::vector<double> errs;
    for (double h : {0.2, 0.1, 0.05}) {
        const DftState s =
            scf_solve(harmonic(1.0), InnerSolver::schrodinger, coarse_config(0, h));
        REQUIRE(s.converged);
        errs.push_back(std::abs(s.total_energy - limit));
    }
    CHECK(errs[2] <= 6e-4);
    for (int k = 0; k + 1 < 3; ++k) {
        const double order = std::log2(errs[k] / errs[k + 1]);
        CHECK(order >= 1.7);
        CHECK(order <= 2.3);
    }
}

TEST_CASE("converged density is a fixed point of the kohn-sham map") {
    ScfConfig cfg = coarse_config(0, 0.4);
    const DftState out = scf_solve(harmonic(1.0), InnerSolver::schrodinger, cfg);
    REQUIRE(out.converged);

    // rebuild the effective potential from the reported density and solve
    // the inner eigenproblem once more; the density must reproduce itself
    const Mesh1D mesh = build_mesh(cfg.solver.a, cfg.solver.h, cfg.solver.p);
    const int n = mesh.n_nodes();
    const auto w = assemble_mass(mesh).row_sums();
    std::vector<double> rc(n);
    for (int i = 0; i < n; ++i) rc[i] = std::max(out.rho[i], 0.0);
    const auto vh = hartree(rc);
    const XcPotentials xc = lda_vxc(rc);
    std::vector<double> vks(n);
    for (int i = 0; i < n; ++i)
        vks[i] = 0.5 * mesh.nodes[i] * mesh.nodes[i] + vh[i] + xc.vx[i] + xc.vc[i];

    SchrodingerConfig scfg;
    scfg.n_states = 1;
    scfg.dt = cfg.solver.dt;
    scfg.T = cfg.solver.T;
    scfg.tol = 1e-12;
    scfg.rng_seed = cfg.solver.rng_seed;
    const SchrodingerResult res =
        lowest_states(mesh, nodal_potential(mesh, vks, 0), scfg);
    REQUIRE(res.converged);
    std::vector<double> rho_next = orbital_density(res.orbitals[0], 2.0);
    const double m = nodal_mass(w, rho_next);
    for (double& r : rho_next) r *= 2.0 / m;

    double resid = 0.0;
    for (int i = 0; i < n; ++i)
        resid = std::max(resid, std::abs(rho_next[i] - out.rho[i]));
    CHECK(resid <= 10.0 * cfg.scf_tol);
    CHECK(res.energies[0] == doctest::Approx(out.orbital_energy).epsilon(1e-8));
}

TEST_CASE("iteration cap reports non-convergence with the history intact") {
    ScfConfig cfg = coarse_config(0, 0.4);
    cfg.max_iter = 4;
    const DftState out = scf_solve(harmonic(1.0), InnerSolver::schrodinger, cfg);
    CHECK_FALSE(out.converged);
    CHECK(out.iterations == 4);
    REQUIRE(out.history.size() == 4);
    for (int k = 0; k < 4; ++k) CHECK(out.history[k].iteration == k + 1);
    CHECK(out.history.back().density_change > cfg.scf_tol);
}

TEST_CASE("invalid configuration and inner failure are rejected") {
    const Potential vext = harmonic(1.0);

    ScfConfig bad = coarse_config(0, 0.4);
    bad.alpha = 0.0;
    CHECK_THROWS_AS(scf_solve(vext, InnerSolver::wigner, bad), std::invalid_argument);
    bad.alpha = 1.2;
    CHECK_THROWS_AS(scf_solve(vext, InnerSolver::wigner, bad), std::invalid_argument);
    bad.alpha = -0.3;
    CHECK_THROWS_AS(scf_solve(vext, InnerSolver::wigner, bad), std::invalid_argument);

    ScfConfig cap = coarse_config(0, 0.4);
    cap.max_iter = 0;
    CHECK_THROWS_AS(scf_solve(vext, InnerSolver::wigner, cap), std::invalid_argument);

    // an inner propagation window too short to converge is an error, not a
    // silently wrong density
    ScfConfig tiny = coarse_config(1, 0.4);
    tiny.solver.T = 0.02;
    tiny.solver.tol = 1e-14;
    CHECK_THROWS_AS(scf_solve(vext, InnerSolver::wigner, tiny), std::runtime_error);
    CHECK_THROWS_AS(scf_solve(vext, InnerSolver::schrodinger, tiny), std::runtime_error);
}
