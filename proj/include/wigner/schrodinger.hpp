#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "wigner/fem.hpp"
#include "wigner/potentials.hpp"

namespace wigner {

// Reference position-space eigensolver used to validate the phase-space
// results and as the alternative inner solver of the self-consistent loop.

// Weak-form Hamiltonian and mass matrix: H = S/2 + M_V where S is the
// stiffness matrix and M_V the potential-weighted mass matrix. Boundary
// conditions are not applied here.
std::pair<BandedMatrix, BandedMatrix> assemble_hamiltonian(const Mesh1D& mesh,
                                                           const Potential& V);

struct SchrodingerConfig {
    int n_states = 1;
    double dt = 0.01;
    double T = 500.0;
    double tol = 1e-12;
    std::uint64_t rng_seed = 0;
};

struct SchrodingerResult {
    std::vector<std::vector<double>> orbitals;  // mass-orthonormal, nodal
    std::vector<double> energies;               // Rayleigh quotients
    // max residual ||H psi - E M psi||_inf over states, on rows not
    // constrained to zero
    double residual = 0.0;
    int iterations = 0;
    bool converged = false;
};

// Lowest eigenpairs by imaginary-time propagation of the (H, M) pencil
// with Crank-Nicolson steps, Gram-Schmidt orthogonalization in the mass
// inner product, and homogeneous Dirichlet values at the domain endpoints
// and at mesh nodes coinciding with singular points of V.
SchrodingerResult lowest_states(const Mesh1D& mesh, const Potential& V,
                                const SchrodingerConfig& cfg = {});

// Nodal density of a doubly occupied orbital: rho_i = occupation psi_i^2.
std::vector<double> orbital_density(std::span<const double> psi,
                                    double occupation = 2.0);

}  // namespace wigner
