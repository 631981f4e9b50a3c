#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "wigner/fem.hpp"
#include "wigner/hermite.hpp"
#include "wigner/potentials.hpp"

namespace wigner {

// Assembled spatial operators shared by the propagation, the moment
// reconstruction chain and diagnostics, for a fixed mesh / potential /
// truncation order K.
class CoupledOperator {
  public:
    CoupledOperator(const Mesh1D& mesh, const Potential& V, int K);

    const Mesh1D& mesh() const { return mesh_; }
    int K() const { return K_; }
    const BandedMatrix& mass() const { return mass_; }
    const BandedMatrix& stiffness() const { return stiffness_; }
    const BandedMatrix& advection() const { return advection_; }
    // Mass matrices weighted by odd / even potential derivatives:
    // odd_mass(l)  ~ weight V^(2l+1), l = 0..K
    // even_mass(l) ~ weight V^(2l),   l = 0..K
    const BandedMatrix& odd_mass(int l) const { return odd_mass_.at(l); }
    const BandedMatrix& even_mass(int l) const { return even_mass_.at(l); }
    // Quadrature weights of the nodal basis functions (mass row sums).
    const std::vector<double>& weights() const { return weights_; }
    // Potential at the nodes, with non-finite values replaced by zero.
    const std::vector<double>& potential_nodal() const { return v_nodal_; }
    // Indices of nodes coinciding with singular points of V.
    const std::vector<int>& pinned_nodes() const { return pinned_; }

    // Solve the moment recurrence for phi_{k+1} given phi_0..phi_k
    // (coefficients of the Hermite expansion of a stationary state):
    //   (2k+2) D phi_{k+1} = -D phi_k - sum_l c_l M^(2l+1) phi_{k-l},
    // with D the transposed advection matrix and phi_{k+1}(-a) = 0.
    std::vector<double> reconstruct_next(const CoefficientSet& f, int k) const;

  private:
    Mesh1D mesh_;
    int K_;
    BandedMatrix mass_, stiffness_, advection_;
    std::vector<BandedMatrix> odd_mass_, even_mass_;
    std::vector<double> weights_, v_nodal_;
    std::vector<int> pinned_;
    std::unique_ptr<BandedLU> chain_lu_;  // factored D with first row pinned
};

// Crank-Nicolson propagator for the coupled imaginary-time system at a
// fixed step dt. The highest retained moment is closed by the recurrence,
// evaluated explicitly from the pre-step state.
class CnStepper {
  public:
    CnStepper(const CoupledOperator& op, double dt);
    double dt() const { return dt_; }
    // One step in place. dt = 0 leaves the state bitwise unchanged.
    void step(const CoupledOperator& op, CoefficientSet& f) const;

  private:
    double dt_;
    int block_n_ = 0, band_ = 0;
    BandedMatrix explicit_side_;
    std::optional<BandedLU> implicit_lu_;
};

// Convenience wrapper building a one-shot stepper.
void cn_step(const CoupledOperator& op, CoefficientSet& f, double dt);

// Rebuild phi_1..phi_K from phi_0 through the moment recurrence. Leaves
// phi_0 untouched; applying it twice gives the same result bitwise.
void project_constraint(const CoupledOperator& op, CoefficientSet& f);

// Scale the state so the quadrature integral of f_0 is exactly 1.
// Throws std::runtime_error when the integral is below 1e-14 relative to
// the coefficient magnitude (the state carries no mass to normalize).
void normalize(const CoupledOperator& op, CoefficientSet& f);

// Replace f_0 by its even part about x = 0. Requires a symmetric mesh.
void symmetrize_even(CoefficientSet& f);

// Modified Gram-Schmidt on the phase-space inner product, in order
// (states[0] first). Throws std::runtime_error when a state is reduced
// below 1e-12 of its original norm (rank deficiency).
void orthogonalize(const CoupledOperator& op, std::vector<CoefficientSet>& states);

// Phase-space inner product of two coefficient sets on the operator's mesh.
double state_overlap(const CoupledOperator& op, const CoefficientSet& fa,
                     const CoefficientSet& fb);

// Ground/excited-state energy of a normalized state:
//   E = sum_i w_i (f_2(x_i) + f_0(x_i)/2 + V(x_i) f_0(x_i)),
// the quadrature of the kinetic and potential moments at the nodes.
// Requires K >= 1 (f_2 must be carried); throws std::invalid_argument
// otherwise. Non-finite nodal potential values contribute zero.
double compute_energy(const CoupledOperator& op, const CoefficientSet& f);
double compute_energy(const CoefficientSet& f, const Potential& V);

// As compute_energy, but for K = 0 the kinetic moment f_2 is first
// reconstructed from f_0 through the moment recurrence (used where a
// density-only run still needs an energy estimate).
double compute_energy_augmented(const CoupledOperator& op, const CoefficientSet& f);

// Rayleigh-quotient energy estimate under the phase-space inner product,
// using the closed coupled operator. Diagnostic cross-check for
// compute_energy; agrees near stationarity.
double rayleigh_energy(const CoupledOperator& op, const CoefficientSet& f);

struct SolverConfig {
    int K = 10;
    double a = 10.0;
    double h = 0.1;
    int p = 1;
    double dt = 0.01;
    double T = 500.0;
    double tol = 1e-10;
    int n_states = 1;
    bool enforce_even = true;
    bool use_projection = true;
    std::uint64_t rng_seed = 0;
};

struct TraceRecord {
    int iteration;
    double tau;         // imaginary time
    double err;         // max over states and moments of the step change
    std::vector<double> energies;
};

struct StateEnsemble {
    std::vector<CoefficientSet> states;
    std::vector<double> energies;
    int iterations = 0;
    bool converged = false;
    double final_err = 0.0;
    std::vector<TraceRecord> trace;
};

// Imaginary-time propagation from a seeded random initial state:
// repeat { close; CN step; even-symmetrize; pin singular nodes;
// orthogonalize (n_states > 1); normalize; project } until the step
// change falls below tol or tau reaches T. After the loop, converged
// ensembles with several states get one final orthogonalize + normalize
// pass so the reported states are orthogonal under the phase-space
// product. A NaN in the state aborts with std::runtime_error naming the
// step. Non-convergence is reported through the flag, not an exception.
StateEnsemble run_itp(const SolverConfig& cfg, const Potential& V);

// As run_itp but continuing from given initial states (sizes must match
// cfg); used by self-consistent loops to warm-start inner solves.
StateEnsemble run_itp(const SolverConfig& cfg, const Potential& V,
                      std::vector<CoefficientSet> initial);

}  // namespace wigner
