#pragma once

#include <vector>

#include "wigner/potentials.hpp"
#include "wigner/schrodinger.hpp"
#include "wigner/solver.hpp"

namespace wigner {

// Self-consistent Kohn-Sham loop for two contact-interacting electrons in
// an external potential, with the phase-space solver or the position-space
// reference solver as the inner eigensolver.

enum class InnerSolver { wigner, schrodinger };

struct ScfConfig {
    double alpha = 0.3;     // linear density mixing weight
    double scf_tol = 1e-9;  // inf-norm density change
    int max_iter = 200;
    // discretization and inner-iteration parameters; K applies to the
    // phase-space inner solver only
    SolverConfig solver;
    // test hook: with the interaction off, V_H and V_XC are forced to zero
    // and the loop reduces to the bare external-potential ground state
    bool interaction_on = true;
    LdaConstants lda;
};

struct ScfHistoryRecord {
    int iteration;
    double density_change;  // inf-norm of the pre-mixing density update
    double energy;          // total energy at this iterate
};

struct DftState {
    std::vector<double> rho;  // nodal density, integral 2
    double orbital_energy = 0.0;
    std::vector<double> v_h, v_x, v_c;  // nodal potential pieces
    std::vector<ScfHistoryRecord> history;
    double total_energy = 0.0;
    int iterations = 0;
    bool converged = false;
    // converged inner-solver state, kept for export and self-convergence
    // studies: phase-space coefficients for the wigner inner solver
    // (state.phi empty otherwise), nodal orbital for the reference inner
    // solver (empty otherwise)
    CoefficientSet state;
    std::vector<double> orbital;
};

// Run the self-consistent loop. The external potential enters through its
// nodal values only; every derivative the phase-space solver needs is
// taken from finite-difference nodal arrays of the full effective
// potential. Inner-solver failure propagates as an exception; reaching
// max_iter reports converged = false with the history intact.
DftState scf_solve(const Potential& v_ext, InnerSolver inner,
                   const ScfConfig& cfg);

// Total energy of a converged density/orbital pair:
//   E = 2 eps - U_H - int(V_XC rho) + E_X + E_C,
// all integrals by nodal quadrature with weights w.
double total_energy(std::span<const double> w, std::span<const double> rho,
                    double eps, const LdaConstants& lda, bool interaction_on);

}  // namespace wigner
