#pragma once

#include <functional>
#include <span>
#include <vector>

namespace wigner {

// Uniform 1D mesh on [-a, a] with Lagrange elements of order p (1 or 2).
// Nodes are evenly spaced at h/p; the node count is N = p*n_el + 1 and the
// element count n_el = 2a/h is required to be even so that x = 0 is a node
// (bitwise exactly 0.0, which downstream symmetry and pinning logic rely on).
struct Mesh1D {
    double a = 0.0;
    double h = 0.0;
    int p = 1;
    int n_el = 0;
    std::vector<double> nodes;

    int n_nodes() const { return static_cast<int>(nodes.size()); }
};

Mesh1D build_mesh(double a, double h, int p);

// General banded matrix in LAPACK band storage (column-major, with kl extra
// leading rows of headroom so the same buffer can hold a dgbtrf factorization).
// Entry (i, j) lives at ab[j*ldab() + kl + ku + i - j] for j-ku <= i <= j+kl.
class BandedMatrix {
  public:
    BandedMatrix() = default;
    BandedMatrix(int n, int kl, int ku);

    int n() const { return n_; }
    int kl() const { return kl_; }
    int ku() const { return ku_; }
    int ldab() const { return 2 * kl_ + ku_ + 1; }

    bool in_band(int i, int j) const {
        return i - j <= kl_ && j - i <= ku_;
    }
    double& at(int i, int j);
    double get(int i, int j) const;

    // Replaces row i by the i-th identity row (Dirichlet row replacement).
    void set_identity_row(int i);

    std::vector<double> matvec(std::span<const double> x) const;
    // y = alpha * A^T x  (used for the advection transpose in the moment chain)
    std::vector<double> matvec_transpose(std::span<const double> x) const;

    // Row sums; for a mass matrix these are the basis-function integrals.
    std::vector<double> row_sums() const;

    void add_scaled(const BandedMatrix& other, double alpha);
    void scale(double alpha);

    double* data() { return ab_.data(); }
    const double* data() const { return ab_.data(); }

  private:
    int n_ = 0, kl_ = 0, ku_ = 0;
    std::vector<double> ab_;
};

// One-time LU factorization (LAPACK dgbtrf) for repeated banded solves.
class BandedLU {
  public:
    explicit BandedLU(BandedMatrix a);
    void solve_in_place(std::span<double> rhs) const;
    std::vector<double> solve(std::vector<double> rhs) const;
    int n() const { return a_.n(); }

  private:
    BandedMatrix a_;
    std::vector<int> ipiv_;
};

struct DirichletBc {
    int index = 0;
    double value = 0.0;
};

// Solves A x = rhs after replacing each constrained row by an identity row.
// The factorization is discarded; use BandedLU directly for repeated solves.
std::vector<double> solve_banded(BandedMatrix a, std::vector<double> rhs,
                                 std::span<const DirichletBc> bcs = {});

// All assembly uses a fixed 4-point Gauss-Legendre rule per element; the rule
// is exact through polynomial degree 7, which covers every unweighted product
// of the p <= 2 bases with slack.
BandedMatrix assemble_mass(const Mesh1D& mesh);
BandedMatrix assemble_stiffness(const Mesh1D& mesh);
// A_ij = integral phi_i' phi_j  (advection form; A + A^T has only boundary terms)
BandedMatrix assemble_advection(const Mesh1D& mesh);
// M^w_ij = integral w(x) phi_i phi_j; rejects non-finite weight values at any
// quadrature point, naming the element.  Quadrature points never coincide with
// nodes, so integrable nodal singularities in w are acceptable.
BandedMatrix assemble_weighted_mass(const Mesh1D& mesh,
                                    const std::function<double(double)>& w);

// Evaluates the finite element interpolant of nodal values at x in [-a, a].
double fem_interpolate(const Mesh1D& mesh, std::span<const double> nodal, double x);

}  // namespace wigner
