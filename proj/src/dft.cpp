#include "wigner/dft.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace wigner {

namespace {

std::vector<double> clamped(const std::vector<double>& rho) {
    std::vector<double> rc(rho.size());
    for (std::size_t i = 0; i < rho.size(); ++i) {
        if (rho[i] < -1e-12)
            throw std::runtime_error("scf_solve: density went negative");
        rc[i] = std::max(rho[i], 0.0);
    }
    return rc;
}

}  // namespace

double total_energy(std::span<const double> w, std::span<const double> rho,
                    double eps, const LdaConstants& lda, bool interaction_on) {
    if (!interaction_on) return 2.0 * eps;
    double uh = 0.0, ex = 0.0, ec = 0.0, ivxc = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        const double r = std::max(rho[i], 0.0);
        uh += 0.5 * w[i] * r * r;
        ex += -0.25 * w[i] * r * r;
        ec += w[i] * lda_ec_density(r, lda);
        double num = lda.a * r * r * r + lda.b * r * r;
        double dnum = 3 * lda.a * r * r + 2 * lda.b * r;
        double den = r * r + lda.d * r + lda.e;
        double dden = 2 * r + lda.d;
        const double vc = (dnum * den - num * dden) / (den * den);
        ivxc += w[i] * (-0.5 * r + vc) * r;
    }
    return 2.0 * eps - uh - ivxc + ex + ec;
}

DftState scf_solve(const Potential& v_ext, InnerSolver inner,
                   const ScfConfig& cfg) {
    if (!(cfg.alpha > 0.0 && cfg.alpha <= 1.0))
        throw std::invalid_argument("scf_solve: alpha must be in (0, 1]");
    if (cfg.max_iter < 1)
        throw std::invalid_argument("scf_solve: max_iter must be >= 1");
    const Mesh1D mesh = build_mesh(cfg.solver.a, cfg.solver.h, cfg.solver.p);
    const int n = mesh.n_nodes();
    const auto w = assemble_mass(mesh).row_sums();

    std::vector<double> vext_nodal(n);
    for (int i = 0; i < n; ++i) vext_nodal[i] = v_ext(mesh.nodes[i]);

    // normalized Gaussian start, two electrons
    std::vector<double> rho(n);
    double mass = 0.0;
    for (int i = 0; i < n; ++i) {
        rho[i] = std::exp(-mesh.nodes[i] * mesh.nodes[i] / 2);
        mass += w[i] * rho[i];
    }
    for (double& r : rho) r *= 2.0 / mass;

    DftState out;
    SolverConfig inner_cfg = cfg.solver;
    inner_cfg.n_states = 1;
    std::vector<CoefficientSet> warm;
    double eps = 0.0;
    bool converged = false;
    // with no density feedback the map is constant; mixing would only slow
    // the loop down
    const double alpha = cfg.interaction_on ? cfg.alpha : 1.0;

    int it = 0;
    while (it < cfg.max_iter && !converged) {
        ++it;
        const auto rc = clamped(rho);
        std::vector<double> vks(n);
        if (cfg.interaction_on) {
            const auto xc = lda_vxc(rc, cfg.lda);
            const auto vh = hartree(rc);
            for (int i = 0; i < n; ++i)
                vks[i] = vext_nodal[i] + vh[i] + xc.vx[i] + xc.vc[i];
        } else {
            vks = vext_nodal;
        }

        std::vector<double> rho_new(n);
        if (inner == InnerSolver::wigner) {
            const int mmax = std::min(5, 2 * cfg.solver.K + 1);
            const Potential vp = nodal_potential(mesh, vks, mmax);
            StateEnsemble ens = warm.empty()
                                    ? run_itp(inner_cfg, vp)
                                    : run_itp(inner_cfg, vp, std::move(warm));
            if (!ens.converged)
                throw std::runtime_error("scf_solve: inner propagation did not converge");
            eps = ens.energies[0];
            for (int i = 0; i < n; ++i) rho_new[i] = 2.0 * ens.states[0].phi[0][i];
            warm = std::move(ens.states);
        } else {
            const Potential vp = nodal_potential(mesh, vks, 0);
            SchrodingerConfig scfg;
            scfg.n_states = 1;
            scfg.dt = cfg.solver.dt;
            scfg.T = cfg.solver.T;
            scfg.tol = 1e-12;
            scfg.rng_seed = cfg.solver.rng_seed;
            SchrodingerResult res = lowest_states(mesh, vp, scfg);
            if (!res.converged)
                throw std::runtime_error("scf_solve: inner eigensolver did not converge");
            eps = res.energies[0];
            rho_new = orbital_density(res.orbitals[0], 2.0);
            double m2 = 0.0;
            for (int i = 0; i < n; ++i) m2 += w[i] * rho_new[i];
            for (double& r : rho_new) r *= 2.0 / m2;
            out.orbital = std::move(res.orbitals[0]);
        }

        double dr = 0.0;
        for (int i = 0; i < n; ++i) dr = std::max(dr, std::abs(rho_new[i] - rho[i]));
        for (int i = 0; i < n; ++i) rho[i] += alpha * (rho_new[i] - rho[i]);
        const auto rc_now = clamped(rho);
        const double e_now = total_energy(w, rc_now, eps, cfg.lda, cfg.interaction_on);
        out.history.push_back({it, dr, e_now});
        converged = dr <= cfg.scf_tol;
    }

    const auto rc = clamped(rho);
    if (inner == InnerSolver::wigner && !warm.empty()) {
        // orbital energy against the final mixed density
        std::vector<double> vks(n);
        if (cfg.interaction_on) {
            const auto xc = lda_vxc(rc, cfg.lda);
            for (int i = 0; i < n; ++i)
                vks[i] = vext_nodal[i] + rc[i] + xc.vx[i] + xc.vc[i];
        } else {
            vks = vext_nodal;
        }
        const auto& f = warm[0];
        std::vector<double> f2;
        if (f.K >= 1) {
            f2 = f.phi[1];
        } else {
            CoupledOperator op(mesh, nodal_potential(mesh, vks, 1), 0);
            f2 = op.reconstruct_next(f, 0);
        }
        eps = 0.0;
        for (int i = 0; i < n; ++i)
            eps += w[i] * (f2[i] + 0.5 * f.phi[0][i] + vks[i] * f.phi[0][i]);
    }

    if (inner == InnerSolver::wigner && !warm.empty()) out.state = warm[0];
    out.rho = rho;
    out.orbital_energy = eps;
    out.total_energy = total_energy(w, rc, eps, cfg.lda, cfg.interaction_on);
    const auto xc = lda_vxc(rc, cfg.lda);
    out.v_h = cfg.interaction_on ? hartree(rc) : std::vector<double>(n, 0.0);
    out.v_x = cfg.interaction_on ? xc.vx : std::vector<double>(n, 0.0);
    out.v_c = cfg.interaction_on ? xc.vc : std::vector<double>(n, 0.0);
    out.iterations = it;
    out.converged = converged;
    return out;
}

}  // namespace wigner
