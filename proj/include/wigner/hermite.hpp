#pragma once

#include <span>
#include <vector>

#include "wigner/fem.hpp"

namespace wigner {

// Nodal coefficient functions of the even-order Hermite expansion in momentum:
// f(x, p) = sum_k phi[k](x) * (2*pi)^{-1/2} e^{-p^2/2} He_{2k}(p).
// phi[k] holds f_{2k}; odd-order coefficients vanish identically for the
// eigenstates handled here, so only even orders are stored.
struct CoefficientSet {
    Mesh1D mesh;
    int K = 0;
    std::vector<std::vector<double>> phi;  // (K+1) vectors of length n_nodes

    std::vector<double>& operator[](int k) { return phi[k]; }
    const std::vector<double>& operator[](int k) const { return phi[k]; }
};

CoefficientSet make_coefficient_set(const Mesh1D& mesh, int K);

// Probabilists' Hermite polynomial He_n by three-term recursion.
double hermite_he(int n, double p);

// C_alpha = integral He_alpha(p) e^{-p^2} dp; zero for odd alpha.
// Computed by the ratio recurrence C_{2m} = -(m - 1/2) C_{2m-2}, C_0 = sqrt(pi).
double c_alpha(int alpha);

// Phase-space L2 pairing of two expansions on the same mesh with the same K:
//   sum_{k,l} C_{2k+2l} phi_k^a . M . phi_l^b
// The constant (2*pi)^{-1} in front of the true integral is dropped; only
// ratios enter Gram-Schmidt, so the scale never matters downstream.
double overlap(const CoefficientSet& fa, const CoefficientSet& fb,
               const BandedMatrix& mass);

// Triangular maps between Wigner coefficients f_{2k} and the wavefunction
// moment functions h_{2k}:
//   h_{2k} = sum_b f_{2(k-b)} / (2^b b!)      (h_from_f)
//   f_{2k} = sum_b (-1)^b h_{2(k-b)} / (2^b b!)  (f_from_h)
// They are exact inverses of each other.
CoefficientSet h_from_f(const CoefficientSet& f);
CoefficientSet f_from_h(const CoefficientSet& h);

// Builds h_{2k}(x) = [sum_b (-1)^b binom(2k,b) psi^(b) psi^(2k-b)] / ((2k)!(-4)^k)
// from a nodal real wavefunction, with psi derivatives from order-4 central
// finite differences at the node spacing (shifted same-width windows near the
// boundary, differentiating the local interpolant at the true node).
CoefficientSet h_from_wavefunction(const Mesh1D& mesh, std::span<const double> psi,
                                   int K);

// Point evaluation of the expanded Wigner function; x must lie in the domain.
double evaluate_wigner(const CoefficientSet& f, double x, double p);

// Recovers a real pure-state wavefunction on the mesh nodes from its Wigner
// coefficients, anchored at x0 where psi(x0) = psi0 != 0:
//   psi(x) = e^{-(x-x0)^2/2} / psi0 * sum_k f_{2k}((x+x0)/2) (-1)^k (x-x0)^{2k}
std::vector<double> reconstruct_wavefunction(const CoefficientSet& f, double x0,
                                             double psi0);

}  // namespace wigner
