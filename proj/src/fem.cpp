#include "wigner/fem.hpp"

#include <lapacke.h>

#include <array>
#include <cassert>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace wigner {

namespace {

// 4-point Gauss-Legendre rule mapped to the reference element [0, 1].
constexpr int kQuadPoints = 4;
constexpr std::array<double, 4> kQuadT = {
    0.5 - 0.8611363115940526 / 2, 0.5 - 0.3399810435848563 / 2,
    0.5 + 0.3399810435848563 / 2, 0.5 + 0.8611363115940526 / 2};
constexpr std::array<double, 4> kQuadW = {
    0.3478548451374538 / 2, 0.6521451548625461 / 2,
    0.6521451548625461 / 2, 0.3478548451374538 / 2};

// Lagrange shape functions and reference-coordinate derivatives on [0, 1].
void shape_funcs(int p, double t, std::span<double> phi, std::span<double> dphi) {
    if (p == 1) {
        phi[0] = 1 - t;
        phi[1] = t;
        dphi[0] = -1;
        dphi[1] = 1;
    } else {
        phi[0] = (1 - t) * (1 - 2 * t);
        phi[1] = 4 * t * (1 - t);
        phi[2] = t * (2 * t - 1);
        dphi[0] = 4 * t - 3;
        dphi[1] = 4 - 8 * t;
        dphi[2] = 4 * t - 1;
    }
}

enum class Form { Mass, Stiffness, Advection };

BandedMatrix assemble(const Mesh1D& mesh, Form form,
                      const std::function<double(double)>* weight) {
    const int p = mesh.p;
    BandedMatrix out(mesh.n_nodes(), p, p);
    std::array<double, 3> phi{}, dphi{};
    for (int e = 0; e < mesh.n_el; ++e) {
        const int base = p * e;
        const double x0 = mesh.nodes[base];
        for (int q = 0; q < kQuadPoints; ++q) {
            const double t = kQuadT[q];
            const double x = x0 + t * mesh.h;
            shape_funcs(p, t, phi, dphi);
            double w = 1.0;
            if (weight) {
                w = (*weight)(x);
                if (!std::isfinite(w)) {
                    throw std::invalid_argument(
                        "assemble_weighted_mass: non-finite weight at x=" +
                        std::to_string(x) + " in element " + std::to_string(e));
                }
            }
            const double jw = kQuadW[q] * mesh.h * w;
            for (int i = 0; i <= p; ++i) {
                for (int j = 0; j <= p; ++j) {
                    double v = 0.0;
                    switch (form) {
                        case Form::Mass: v = phi[i] * phi[j]; break;
                        // dphi/dx = dphi/dt / h; two factors cancel one h of jw
                        case Form::Stiffness: v = dphi[i] * dphi[j] / (mesh.h * mesh.h); break;
                        case Form::Advection: v = dphi[i] / mesh.h * phi[j]; break;
                    }
                    out.at(base + i, base + j) += jw * v;
                }
            }
        }
    }
    return out;
}

}  // namespace

Mesh1D build_mesh(double a, double h, int p) {
    if (!(a > 0)) throw std::invalid_argument("build_mesh: a must be positive, got a=" + std::to_string(a));
    if (!(h > 0)) throw std::invalid_argument("build_mesh: h must be positive, got h=" + std::to_string(h));
    if (p != 1 && p != 2) throw std::invalid_argument("build_mesh: p must be 1 or 2, got p=" + std::to_string(p));
    const double ratio = 2 * a / h;
    const double rounded = std::round(ratio);
    if (std::abs(ratio - rounded) > 1e-9 * ratio) {
        throw std::invalid_argument("build_mesh: h=" + std::to_string(h) +
                                    " does not evenly divide the domain width " +
                                    std::to_string(2 * a));
    }
    const long n_el = static_cast<long>(rounded);
    if (n_el % 2 != 0) {
        throw std::invalid_argument("build_mesh: element count 2a/h=" + std::to_string(n_el) +
                                    " must be even so that x=0 is a node");
    }
    Mesh1D mesh;
    mesh.a = a;
    mesh.h = h;
    mesh.p = p;
    mesh.n_el = static_cast<int>(n_el);
    const int n = p * mesh.n_el + 1;
    mesh.nodes.resize(n);
    // Symmetric form: endpoints land on +-a exactly and the center on 0.0 exactly.
    for (int i = 0; i < n; ++i) {
        mesh.nodes[i] = (-a * (n - 1 - i) + a * i) / (n - 1);
    }
    return mesh;
}

BandedMatrix::BandedMatrix(int n, int kl, int ku) : n_(n), kl_(kl), ku_(ku) {
    assert(n > 0 && kl >= 0 && ku >= 0);
    ab_.assign(static_cast<size_t>(ldab()) * n, 0.0);
}

double& BandedMatrix::at(int i, int j) {
    assert(i >= 0 && i < n_ && j >= 0 && j < n_ && in_band(i, j));
    return ab_[static_cast<size_t>(j) * ldab() + kl_ + ku_ + i - j];
}

double BandedMatrix::get(int i, int j) const {
    if (i < 0 || i >= n_ || j < 0 || j >= n_ || !in_band(i, j)) return 0.0;
    return ab_[static_cast<size_t>(j) * ldab() + kl_ + ku_ + i - j];
}

void BandedMatrix::set_identity_row(int i) {
    assert(i >= 0 && i < n_);
    for (int j = std::max(0, i - kl_); j <= std::min(n_ - 1, i + ku_); ++j) {
        ab_[static_cast<size_t>(j) * ldab() + kl_ + ku_ + i - j] = (i == j) ? 1.0 : 0.0;
    }
}

std::vector<double> BandedMatrix::matvec(std::span<const double> x) const {
    assert(static_cast<int>(x.size()) == n_);
    std::vector<double> y(n_, 0.0);
    for (int j = 0; j < n_; ++j) {
        const double xj = x[j];
        if (xj == 0.0) continue;
        const int ilo = std::max(0, j - ku_);
        const int ihi = std::min(n_ - 1, j + kl_);
        const double* col = &ab_[static_cast<size_t>(j) * ldab() + kl_ + ku_ - j];
        for (int i = ilo; i <= ihi; ++i) y[i] += col[i] * xj;
    }
    return y;
}

std::vector<double> BandedMatrix::matvec_transpose(std::span<const double> x) const {
    assert(static_cast<int>(x.size()) == n_);
    std::vector<double> y(n_, 0.0);
    for (int j = 0; j < n_; ++j) {
        const int ilo = std::max(0, j - ku_);
        const int ihi = std::min(n_ - 1, j + kl_);
        const double* col = &ab_[static_cast<size_t>(j) * ldab() + kl_ + ku_ - j];
        double acc = 0.0;
        for (int i = ilo; i <= ihi; ++i) acc += col[i] * x[i];
        y[j] = acc;
    }
    return y;
}

std::vector<double> BandedMatrix::row_sums() const {
    std::vector<double> ones(n_, 1.0);
    return matvec(ones);
}

void BandedMatrix::add_scaled(const BandedMatrix& other, double alpha) {
    assert(n_ == other.n_ && kl_ >= other.kl_ && ku_ >= other.ku_);
    for (int j = 0; j < n_; ++j) {
        const int ilo = std::max(0, j - other.ku_);
        const int ihi = std::min(n_ - 1, j + other.kl_);
        for (int i = ilo; i <= ihi; ++i) {
            ab_[static_cast<size_t>(j) * ldab() + kl_ + ku_ + i - j] +=
                alpha * other.ab_[static_cast<size_t>(j) * other.ldab() + other.kl_ + other.ku_ + i - j];
        }
    }
}

void BandedMatrix::scale(double alpha) {
    for (double& v : ab_) v *= alpha;
}

BandedLU::BandedLU(BandedMatrix a) : a_(std::move(a)), ipiv_(a_.n()) {
    const int info = LAPACKE_dgbtrf(LAPACK_COL_MAJOR, a_.n(), a_.n(), a_.kl(),
                                    a_.ku(), a_.data(), a_.ldab(), ipiv_.data());
    if (info != 0) {
        throw std::runtime_error("banded LU factorization failed, dgbtrf info=" +
                                 std::to_string(info));
    }
}

void BandedLU::solve_in_place(std::span<double> rhs) const {
    assert(static_cast<int>(rhs.size()) == a_.n());
    const int info = LAPACKE_dgbtrs(LAPACK_COL_MAJOR, 'N', a_.n(), a_.kl(), a_.ku(),
                                    1, a_.data(), a_.ldab(), ipiv_.data(),
                                    rhs.data(), a_.n());
    if (info != 0) {
        throw std::runtime_error("banded solve failed, dgbtrs info=" + std::to_string(info));
    }
}

std::vector<double> BandedLU::solve(std::vector<double> rhs) const {
    solve_in_place(rhs);
    return rhs;
}

std::vector<double> solve_banded(BandedMatrix a, std::vector<double> rhs,
                                 std::span<const DirichletBc> bcs) {
    if (a.n() != static_cast<int>(rhs.size())) {
        throw std::invalid_argument("solve_banded: rhs size " + std::to_string(rhs.size()) +
                                    " does not match matrix dimension " + std::to_string(a.n()));
    }
    for (const auto& bc : bcs) {
        if (bc.index < 0 || bc.index >= a.n()) {
            throw std::invalid_argument("solve_banded: Dirichlet index " +
                                        std::to_string(bc.index) + " out of range");
        }
        a.set_identity_row(bc.index);
        rhs[bc.index] = bc.value;
    }
    return BandedLU(std::move(a)).solve(std::move(rhs));
}

BandedMatrix assemble_mass(const Mesh1D& mesh) { return assemble(mesh, Form::Mass, nullptr); }

BandedMatrix assemble_stiffness(const Mesh1D& mesh) { return assemble(mesh, Form::Stiffness, nullptr); }

BandedMatrix assemble_advection(const Mesh1D& mesh) { return assemble(mesh, Form::Advection, nullptr); }

BandedMatrix assemble_weighted_mass(const Mesh1D& mesh,
                                    const std::function<double(double)>& w) {
    return assemble(mesh, Form::Mass, &w);
}

double fem_interpolate(const Mesh1D& mesh, std::span<const double> nodal, double x) {
    assert(static_cast<int>(nodal.size()) == mesh.n_nodes());
    if (x < -mesh.a || x > mesh.a) {
        throw std::invalid_argument("fem_interpolate: x=" + std::to_string(x) +
                                    " outside the domain [-" + std::to_string(mesh.a) +
                                    ", " + std::to_string(mesh.a) + "]");
    }
    int e = static_cast<int>((x + mesh.a) / mesh.h);
    e = std::min(std::max(e, 0), mesh.n_el - 1);
    const int base = mesh.p * e;
    const double t = (x - mesh.nodes[base]) / mesh.h;
    std::array<double, 3> phi{}, dphi{};
    shape_funcs(mesh.p, t, phi, dphi);
    double v = 0.0;
    for (int i = 0; i <= mesh.p; ++i) v += phi[i] * nodal[base + i];
    return v;
}

}  // namespace wigner
