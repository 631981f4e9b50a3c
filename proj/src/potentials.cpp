#include "wigner/potentials.hpp"

#include <cmath>
#include <limits>
#include <memory>
#include <stdexcept>
#include <utility>

namespace wigner {

namespace {

constexpr double kPi = 3.14159265358979323846;
const double kSqrt2Pi = std::sqrt(2.0 * kPi);

double factorial(int n) {
    double f = 1.0;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
}

// ---- closed-form pieces of the trapped interacting pair ----------------

// density = 2 C^2 exp(-x^2/2) g(x) with g as below; C^2 normalizes the
// integral to 2.
const double kHookeC2 = 1.0 / (16.0 * std::sqrt(kPi) + 10.0 * kPi);

double hooke_g(double x) {
    const double e = std::exp(-x * x / 2);
    return (4 + 2 * x * x) * e +
           kSqrt2Pi * (1.75 + 2.5 * x * x + 0.25 * x * x * x * x) +
           kSqrt2Pi * std::erf(x / std::sqrt(2.0)) * (3 * x + x * x * x);
}

double hooke_gp(double x) {
    const double e = std::exp(-x * x / 2);
    return 6 * x * e + kSqrt2Pi * (5 * x + x * x * x) +
           3 * kSqrt2Pi * std::erf(x / std::sqrt(2.0)) * (1 + x * x);
}

double hooke_gpp(double x) {
    const double e = std::exp(-x * x / 2);
    return 12 * e + kSqrt2Pi * (5 + 3 * x * x) +
           6 * kSqrt2Pi * x * std::erf(x / std::sqrt(2.0));
}

double hooke_drho(double x) {
    return 2 * kHookeC2 * std::exp(-x * x / 2) * (hooke_gp(x) - x * hooke_g(x));
}

double hooke_ddrho(double x) {
    return 2 * kHookeC2 * std::exp(-x * x / 2) *
           (hooke_gpp(x) - 2 * x * hooke_gp(x) + (x * x - 1) * hooke_g(x));
}

double hooke_vks(double x) {
    const double r = hooke_exact_density(x);
    const double rp = hooke_drho(x);
    const double rpp = hooke_ddrho(x);
    return (rpp * r - rp * rp / 2) / (4 * r * r);
}

// Order-8 central first-derivative stencil, applied recursively for higher
// orders. Recursion keeps the formal order high while the effective step
// grows with m, which is why the step map below widens for large m.
constexpr double kFd8[9] = {1.0 / 280,  -4.0 / 105, 1.0 / 5, -4.0 / 5, 0.0,
                            4.0 / 5,    -1.0 / 5,   4.0 / 105, -1.0 / 280};

double fd8_recursive(const std::function<double(double)>& f, double x, int m,
                     double step) {
    if (m == 0) return f(x);
    double acc = 0.0;
    for (int i = -4; i <= 4; ++i) {
        const double c = kFd8[i + 4];
        if (c == 0.0) continue;
        acc += c * fd8_recursive(f, x + i * step, m - 1, step);
    }
    return acc / step;
}

double hooke_fd_step(int m) {
    switch (m) {
        case 1: return 5e-3;
        case 2: return 5e-3;
        case 3: return 1e-2;
        case 4: return 2e-2;
        case 5: return 3e-2;
        default: return 5e-2;
    }
}

// ---- second-order nodal finite differences ------------------------------

// m-th derivative of a nodal array at node spacing dx. Central stencils in
// the interior; one-sided second-order formulas at the ends for m <= 2,
// nearest-interior copy for m >= 3 (those orders only enter high Hermite
// moments whose weight is negligible at the boundary).
std::vector<double> fd_nodal(const std::vector<double>& d0, double dx, int m) {
    const int n = static_cast<int>(d0.size());
    std::vector<double> out(n, 0.0);
    auto need = [&](int min_n) {
        if (n < min_n)
            throw std::invalid_argument(
                "nodal_potential: mesh too small for requested derivative order");
    };
    switch (m) {
        case 1:
            need(3);
            for (int i = 1; i + 1 < n; ++i) out[i] = (d0[i + 1] - d0[i - 1]) / (2 * dx);
            out[0] = (-3 * d0[0] + 4 * d0[1] - d0[2]) / (2 * dx);
            out[n - 1] = (3 * d0[n - 1] - 4 * d0[n - 2] + d0[n - 3]) / (2 * dx);
            break;
        case 2:
            need(4);
            for (int i = 1; i + 1 < n; ++i)
                out[i] = (d0[i + 1] - 2 * d0[i] + d0[i - 1]) / (dx * dx);
            out[0] = (2 * d0[0] - 5 * d0[1] + 4 * d0[2] - d0[3]) / (dx * dx);
            out[n - 1] =
                (2 * d0[n - 1] - 5 * d0[n - 2] + 4 * d0[n - 3] - d0[n - 4]) / (dx * dx);
            break;
        case 3: {
            need(5);
            const double d3 = 2 * dx * dx * dx;
            for (int i = 2; i + 2 < n; ++i)
                out[i] = (-d0[i - 2] + 2 * d0[i - 1] - 2 * d0[i + 1] + d0[i + 2]) / d3;
            out[0] = out[1] = out[2];
            out[n - 1] = out[n - 2] = out[n - 3];
            break;
        }
        case 4: {
            need(5);
            const double d4 = dx * dx * dx * dx;
            for (int i = 2; i + 2 < n; ++i)
                out[i] = (d0[i - 2] - 4 * d0[i - 1] + 6 * d0[i] - 4 * d0[i + 1] +
                          d0[i + 2]) / d4;
            out[0] = out[1] = out[2];
            out[n - 1] = out[n - 2] = out[n - 3];
            break;
        }
        case 5: {
            need(7);
            const double d5 = 2 * dx * dx * dx * dx * dx;
            for (int i = 3; i + 3 < n; ++i)
                out[i] = (-d0[i - 3] + 4 * d0[i - 2] - 5 * d0[i - 1] + 5 * d0[i + 1] -
                          4 * d0[i + 2] + d0[i + 3]) / d5;
            out[0] = out[1] = out[2] = out[3];
            out[n - 1] = out[n - 2] = out[n - 3] = out[n - 4];
            break;
        }
        default:
            throw std::invalid_argument(
                "nodal_potential: derivative order above 5 is not supported");
    }
    return out;
}

}  // namespace

Potential::Potential(std::string kind, DerivFn fn, int max_order,
                     std::vector<double> singular_points)
    : kind_(std::move(kind)),
      fn_(std::move(fn)),
      max_order_(max_order),
      singular_(std::move(singular_points)) {
    if (max_order_ < 0) throw std::invalid_argument("Potential: max_order must be >= 0");
    if (!fn_) throw std::invalid_argument("Potential: fn must be callable");
}

double Potential::derivative(double x, int m) const {
    if (!fn_) throw std::invalid_argument("Potential: empty");
    if (m < 0 || m > max_order_)
        throw std::invalid_argument("Potential: derivative order m out of range");
    return fn_(x, m);
}

Potential harmonic(double omega) {
    if (!(omega > 0))
        throw std::invalid_argument("harmonic: omega must be positive");
    const double w2 = omega * omega;
    return Potential(
        "harmonic",
        [w2](double x, int m) -> double {
            switch (m) {
                case 0: return 0.5 * w2 * x * x;
                case 1: return w2 * x;
                case 2: return w2;
                default: return 0.0;
            }
        },
        std::numeric_limits<int>::max());
}

Potential hydrogen1d() {
    return Potential(
        "hydrogen1d",
        [](double x, int m) -> double {
            if (x == 0.0)
                throw std::domain_error("hydrogen1d: evaluation at the singular point x = 0");
            // V = -1/|x|; for x > 0, d^m(-1/x) = -(-1)^m m!/x^{m+1};
            // for x < 0, V = 1/x and d^m(1/x) = (-1)^m m!/x^{m+1}.
            const double mf = factorial(m);
            const double sign = (m % 2 == 0) ? 1.0 : -1.0;
            const double p = std::pow(x, m + 1);
            return (x > 0 ? -sign : sign) * mf / p;
        },
        40, {0.0});
}

double hooke_exact_density(double x) {
    return 2 * kHookeC2 * std::exp(-x * x / 2) * hooke_g(x);
}

Potential hooke_ks_potential() {
    return Potential(
        "hooke_ks",
        [](double x, int m) -> double {
            if (m == 0) return hooke_vks(x);
            return fd8_recursive(hooke_vks, x, m, hooke_fd_step(m));
        },
        9);
}

Potential nodal_potential(const Mesh1D& mesh, std::vector<double> values,
                          int max_order) {
    if (static_cast<int>(values.size()) != mesh.n_nodes())
        throw std::invalid_argument("nodal_potential: values size does not match mesh");
    if (max_order < 0 || max_order > 5)
        throw std::invalid_argument("nodal_potential: max_order must be in [0, 5]");
    const double dx = mesh.h / mesh.p;
    auto arrays = std::make_shared<std::vector<std::vector<double>>>();
    arrays->push_back(std::move(values));
    for (int m = 1; m <= max_order; ++m)
        arrays->push_back(fd_nodal((*arrays)[0], dx, m));
    Mesh1D mesh_copy = mesh;
    return Potential(
        "nodal",
        [mesh_copy, arrays](double x, int m) -> double {
            return fem_interpolate(mesh_copy, (*arrays)[m], x);
        },
        max_order);
}

double lda_ec_density(double rho, const LdaConstants& c) {
    const double num = c.a * rho * rho * rho + c.b * rho * rho;
    const double den = rho * rho + c.d * rho + c.e;
    return num / den;
}

XcPotentials lda_vxc(std::span<const double> rho, const LdaConstants& c) {
    XcPotentials out;
    out.vx.resize(rho.size());
    out.vc.resize(rho.size());
    for (std::size_t i = 0; i < rho.size(); ++i) {
        double r = rho[i];
        if (r < -1e-12)
            throw std::invalid_argument("lda_vxc: negative density");
        if (r < 0) r = 0;
        out.vx[i] = -0.5 * r;
        // quotient rule for d/drho of (a r^3 + b r^2)/(r^2 + d r + e)
        const double num = c.a * r * r * r + c.b * r * r;
        const double dnum = 3 * c.a * r * r + 2 * c.b * r;
        const double den = r * r + c.d * r + c.e;
        const double dden = 2 * r + c.d;
        out.vc[i] = (dnum * den - num * dden) / (den * den);
    }
    return out;
}

std::vector<double> hartree(std::span<const double> rho) {
    return std::vector<double>(rho.begin(), rho.end());
}

}  // namespace wigner
