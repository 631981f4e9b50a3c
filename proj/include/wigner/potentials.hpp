#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "wigner/fem.hpp"

namespace wigner {

// External or effective potential with access to its spatial derivatives.
// derivative(x, m) returns d^m V / dx^m at x; m = 0 is the potential itself.
// Evaluation at a singular point throws std::domain_error. The singular
// points are listed explicitly so that solvers can pin the corresponding
// mesh nodes without ever evaluating V there.
class Potential {
  public:
    using DerivFn = std::function<double(double, int)>;

    Potential() = default;
    Potential(std::string kind, DerivFn fn, int max_order,
              std::vector<double> singular_points = {});

    // d^m V / dx^m at x. Throws std::invalid_argument for m < 0 or
    // m > max_order(), std::domain_error at a singular point.
    double derivative(double x, int m) const;
    double operator()(double x) const { return derivative(x, 0); }

    int max_order() const { return max_order_; }
    const std::string& kind() const { return kind_; }
    const std::vector<double>& singular_points() const { return singular_; }

  private:
    std::string kind_;
    DerivFn fn_;
    int max_order_ = -1;
    std::vector<double> singular_;
};

// V(x) = omega^2 x^2 / 2. All derivatives in closed form (zero for m >= 3).
Potential harmonic(double omega);

// Soft-free one-dimensional Coulomb attraction V(x) = -1/|x|.
// Derivatives in closed form away from the origin; x = 0 is singular.
Potential hydrogen1d();

// Exact ground-state density of two Coulomb-coupled particles in a
// harmonic trap (normalized so that the density integrates to 2).
double hooke_exact_density(double x);

// Kohn-Sham potential reproducing hooke_exact_density for a doubly
// occupied orbital: V = (rho'' rho - rho'^2 / 2) / (4 rho^2).
// Derivatives of order >= 1 are produced by high-order finite differences
// of the closed-form expression.
Potential hooke_ks_potential();

// Potential defined by nodal values on a mesh. The value is the finite
// element interpolant; derivatives are formed as second-order finite
// difference nodal arrays (one-sided or copied near the boundary) and then
// interpolated. This is the form consumed by the self-consistent loop,
// where the effective potential is only known at the nodes.
Potential nodal_potential(const Mesh1D& mesh, std::vector<double> values,
                          int max_order);

// Local-density correlation parametrization for the contact-interacting
// gas: e_c(rho) = (a rho^3 + b rho^2) / (rho^2 + d rho + e).
struct LdaConstants {
    double a = -1.0 / 24.0;
    double b = -0.00436143;
    double d = 0.252758;
    double e = 0.0174457;
};

// Correlation energy density e_c(rho) (energy per unit length).
double lda_ec_density(double rho, const LdaConstants& c = {});

// Exchange and correlation potentials evaluated at nodal densities.
// V_X = -rho/2 (contact exchange), V_C = d e_c / d rho.
// Densities below -1e-12 are rejected; small negative values are clamped
// to zero before evaluation.
struct XcPotentials {
    std::vector<double> vx;
    std::vector<double> vc;
};
XcPotentials lda_vxc(std::span<const double> rho, const LdaConstants& c = {});

// Hartree potential of the contact interaction: V_H(x) = rho(x).
std::vector<double> hartree(std::span<const double> rho);

}  // namespace wigner
