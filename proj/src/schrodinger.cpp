#include "wigner/schrodinger.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>

namespace wigner {

std::pair<BandedMatrix, BandedMatrix> assemble_hamiltonian(const Mesh1D& mesh,
                                                           const Potential& V) {
    BandedMatrix h = assemble_stiffness(mesh);
    h.scale(0.5);
    const BandedMatrix mv = assemble_weighted_mass(
        mesh, [&V](double x) { return V.derivative(x, 0); });
    h.add_scaled(mv, 1.0);
    return {std::move(h), assemble_mass(mesh)};
}

namespace {

std::vector<int> constrained_nodes(const Mesh1D& mesh, const Potential& V) {
    const int n = mesh.n_nodes();
    std::vector<int> out{0, n - 1};
    const double tol = 1e-14 * std::max(1.0, mesh.a);
    for (double s : V.singular_points())
        for (int i = 1; i < n - 1; ++i)
            if (std::abs(mesh.nodes[i] - s) <= tol) out.push_back(i);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

double m_dot(const BandedMatrix& m, const std::vector<double>& a,
             const std::vector<double>& b) {
    const auto mb = m.matvec(b);
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * mb[i];
    return s;
}

}  // namespace

SchrodingerResult lowest_states(const Mesh1D& mesh, const Potential& V,
                                const SchrodingerConfig& cfg) {
    if (cfg.n_states < 1)
        throw std::invalid_argument("lowest_states: n_states must be >= 1");
    if (!(cfg.dt > 0)) throw std::invalid_argument("lowest_states: dt must be positive");
    auto [h, m] = assemble_hamiltonian(mesh, V);
    const int n = mesh.n_nodes();
    const auto bc = constrained_nodes(mesh, V);

    BandedMatrix imp = m;
    imp.add_scaled(h, 0.5 * cfg.dt);
    BandedMatrix exp = m;
    exp.add_scaled(h, -0.5 * cfg.dt);
    for (int i : bc) imp.set_identity_row(i);
    BandedLU lu(std::move(imp));

    std::mt19937_64 rng(cfg.rng_seed);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    std::vector<std::vector<double>> psi(cfg.n_states, std::vector<double>(n));
    for (auto& v : psi) {
        for (double& x : v) x = uni(rng);
        for (int i : bc) v[i] = 0.0;
        const double s = std::sqrt(m_dot(m, v, v));
        for (double& x : v) x /= s;
    }

    SchrodingerResult out;
    const int n_steps = static_cast<int>(std::llround(cfg.T / cfg.dt));
    double err = std::numeric_limits<double>::infinity();
    for (int it = 1; it <= n_steps; ++it) {
        const auto last = psi;
        for (auto& v : psi) {
            auto rhs = exp.matvec(v);
            for (int i : bc) rhs[i] = 0.0;
            lu.solve_in_place(rhs);
            // pivoting can leave rounding residue on constrained rows
            for (int i : bc) rhs[i] = 0.0;
            v = std::move(rhs);
        }
        for (int j = 0; j < cfg.n_states; ++j) {
            for (int i = 0; i < j; ++i) {
                const double r = m_dot(m, psi[i], psi[j]);
                for (int q = 0; q < n; ++q) psi[j][q] -= r * psi[i][q];
            }
            const double s2 = m_dot(m, psi[j], psi[j]);
            if (!(s2 > 1e-24))
                throw std::runtime_error("lowest_states: rank deficiency in state " +
                                         std::to_string(j));
            const double inv = 1.0 / std::sqrt(s2);
            for (double& x : psi[j]) x *= inv;
        }
        err = 0.0;
        for (int j = 0; j < cfg.n_states; ++j) {
            // the overall sign of an orbital is immaterial; compare up to it
            double dp = 0.0, dm = 0.0;
            for (int q = 0; q < n; ++q) {
                dp = std::max(dp, std::abs(psi[j][q] - last[j][q]));
                dm = std::max(dm, std::abs(psi[j][q] + last[j][q]));
            }
            err = std::max(err, std::min(dp, dm));
        }
        out.iterations = it;
        if (!std::isfinite(err))
            throw std::runtime_error("lowest_states: state became non-finite at iteration " +
                                     std::to_string(it));
        if (err <= cfg.tol) break;
    }
    out.converged = err <= cfg.tol;

    std::vector<bool> is_bc(n, false);
    for (int i : bc) is_bc[i] = true;
    for (const auto& v : psi) {
        const double e = m_dot(h, v, v);  // psi' M psi = 1 already
        out.energies.push_back(e);
        const auto hv = h.matvec(v);
        const auto mv = m.matvec(v);
        for (int q = 0; q < n; ++q)
            if (!is_bc[q])
                out.residual = std::max(out.residual, std::abs(hv[q] - e * mv[q]));
    }
    out.orbitals = std::move(psi);
    return out;
}

std::vector<double> orbital_density(std::span<const double> psi, double occupation) {
    std::vector<double> rho(psi.size());
    for (std::size_t i = 0; i < psi.size(); ++i) rho[i] = occupation * psi[i] * psi[i];
    return rho;
}

}  // namespace wigner
