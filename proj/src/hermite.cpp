#include "wigner/hermite.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace wigner {

namespace {

double factorial(int n) {
    double r = 1.0;
    for (int i = 2; i <= n; ++i) r *= i;
    return r;
}

void check_compatible(const CoefficientSet& fa, const CoefficientSet& fb) {
    if (fa.K != fb.K) {
        throw std::invalid_argument("overlap: K mismatch (" + std::to_string(fa.K) +
                                    " vs " + std::to_string(fb.K) + ")");
    }
    const auto& ma = fa.mesh;
    const auto& mb = fb.mesh;
    if (ma.a != mb.a || ma.h != mb.h || ma.p != mb.p) {
        throw std::invalid_argument("overlap: mesh mismatch");
    }
}

// Finite-difference weights for the m-th derivative at evaluation point z on
// the grid points xs (Fornberg's recursion).  On a symmetric interior window
// this reproduces the classical order-4 central stencils; near the boundary
// the same window is shifted inward, differentiating the interpolant at the
// true node position.
std::vector<double> fd_weights(double z, std::span<const double> xs, int m) {
    const int nd = static_cast<int>(xs.size()) - 1;
    std::vector<std::vector<double>> c(nd + 1, std::vector<double>(m + 1, 0.0));
    double c1 = 1.0;
    double c4 = xs[0] - z;
    c[0][0] = 1.0;
    for (int i = 1; i <= nd; ++i) {
        const int mn = std::min(i, m);
        double c2 = 1.0;
        const double c5 = c4;
        c4 = xs[i] - z;
        for (int j = 0; j < i; ++j) {
            const double c3 = xs[i] - xs[j];
            c2 *= c3;
            if (j == i - 1) {
                for (int k = mn; k >= 1; --k)
                    c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for (int k = mn; k >= 1; --k)
                c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    std::vector<double> w(nd + 1);
    for (int i = 0; i <= nd; ++i) w[i] = c[i][m];
    return w;
}

std::vector<double> fd_derivative(std::span<const double> v, double dx, int m) {
    if (m == 0) return {v.begin(), v.end()};
    // symmetric window wide enough for order-4 accuracy of derivative m
    const int half = std::max(2, (m + 4) / 2);
    const int n = static_cast<int>(v.size());
    if (n < 2 * half + 1) {
        throw std::invalid_argument("fd_derivative: grid too small for order " +
                                    std::to_string(m));
    }
    std::vector<double> xs(2 * half + 1);
    std::vector<double> out(n, 0.0);
    const double scale = 1.0 / std::pow(dx, m);
    // interior weights computed once; boundary windows per node
    for (int s = 0; s <= 2 * half; ++s) xs[s] = s - half;
    const auto wc = fd_weights(0.0, xs, m);
    for (int i = 0; i < n; ++i) {
        int lo = i - half;
        if (lo >= 0 && lo + 2 * half < n) {
            double acc = 0.0;
            for (int s = 0; s <= 2 * half; ++s) acc += wc[s] * v[lo + s];
            out[i] = acc * scale;
        } else {
            lo = std::min(std::max(lo, 0), n - 1 - 2 * half);
            for (int s = 0; s <= 2 * half; ++s) xs[s] = lo + s - i;
            const auto wb = fd_weights(0.0, xs, m);
            double acc = 0.0;
            for (int s = 0; s <= 2 * half; ++s) acc += wb[s] * v[lo + s];
            out[i] = acc * scale;
        }
    }
    return out;
}

}  // namespace

CoefficientSet make_coefficient_set(const Mesh1D& mesh, int K) {
    if (K < 0) throw std::invalid_argument("K must be nonnegative, got " + std::to_string(K));
    CoefficientSet f;
    f.mesh = mesh;
    f.K = K;
    f.phi.assign(K + 1, std::vector<double>(mesh.n_nodes(), 0.0));
    return f;
}

double hermite_he(int n, double p) {
    if (n < 0) throw std::invalid_argument("hermite_he: negative degree");
    double hm = 1.0;  // He_0
    if (n == 0) return hm;
    double h = p;  // He_1
    for (int k = 1; k < n; ++k) {
        const double next = p * h - k * hm;
        hm = h;
        h = next;
    }
    return h;
}

double c_alpha(int alpha) {
    if (alpha < 0) throw std::invalid_argument("c_alpha: negative order");
    if (alpha % 2 == 1) return 0.0;
    // C_{2m} = sqrt(pi) (-1)^m (2m)! / (4^m m!), via the ratio
    // C_{2m}/C_{2m-2} = -(2m-1)/2 to avoid factorial overflow
    double c = std::sqrt(std::numbers::pi);
    for (int m = 1; 2 * m <= alpha; ++m) c *= -(m - 0.5);
    return c;
}

double overlap(const CoefficientSet& fa, const CoefficientSet& fb,
               const BandedMatrix& mass) {
    check_compatible(fa, fb);
    const int K = fa.K;
    std::vector<double> c(2 * K + 1);
    for (int s = 0; s <= 2 * K; ++s) c[s] = c_alpha(2 * s);
    double total = 0.0;
    for (int l = 0; l <= K; ++l) {
        const auto mb = mass.matvec(fb.phi[l]);
        for (int k = 0; k <= K; ++k) {
            double dot = 0.0;
            const auto& ak = fa.phi[k];
            for (size_t i = 0; i < mb.size(); ++i) dot += ak[i] * mb[i];
            total += c[k + l] * dot;
        }
    }
    return total;
}

CoefficientSet h_from_f(const CoefficientSet& f) {
    CoefficientSet h = make_coefficient_set(f.mesh, f.K);
    const int n = f.mesh.n_nodes();
    for (int k = 0; k <= f.K; ++k) {
        for (int b = 0; b <= k; ++b) {
            const double w = 1.0 / (std::pow(2.0, b) * factorial(b));
            for (int i = 0; i < n; ++i) h.phi[k][i] += w * f.phi[k - b][i];
        }
    }
    return h;
}

CoefficientSet f_from_h(const CoefficientSet& h) {
    CoefficientSet f = make_coefficient_set(h.mesh, h.K);
    const int n = h.mesh.n_nodes();
    for (int k = 0; k <= h.K; ++k) {
        for (int b = 0; b <= k; ++b) {
            const double w = ((b % 2) ? -1.0 : 1.0) / (std::pow(2.0, b) * factorial(b));
            for (int i = 0; i < n; ++i) f.phi[k][i] += w * h.phi[k - b][i];
        }
    }
    return f;
}

CoefficientSet h_from_wavefunction(const Mesh1D& mesh, std::span<const double> psi,
                                   int K) {
    if (static_cast<int>(psi.size()) != mesh.n_nodes()) {
        throw std::invalid_argument("h_from_wavefunction: psi size mismatch");
    }
    const double dx = mesh.h / mesh.p;
    std::vector<std::vector<double>> d(2 * K + 1);
    for (int m = 0; m <= 2 * K; ++m) d[m] = fd_derivative(psi, dx, m);
    CoefficientSet h = make_coefficient_set(mesh, K);
    const int n = mesh.n_nodes();
    for (int k = 0; k <= K; ++k) {
        const double denom = factorial(2 * k) * std::pow(-4.0, k);
        for (int b = 0; b <= 2 * k; ++b) {
            const double binom =
                factorial(2 * k) / (factorial(b) * factorial(2 * k - b));
            const double w = ((b % 2) ? -1.0 : 1.0) * binom / denom;
            const auto& db = d[b];
            const auto& dr = d[2 * k - b];
            for (int i = 0; i < n; ++i) h.phi[k][i] += w * db[i] * dr[i];
        }
    }
    return h;
}

double evaluate_wigner(const CoefficientSet& f, double x, double p) {
    if (x < -f.mesh.a || x > f.mesh.a) {
        throw std::invalid_argument("evaluate_wigner: x=" + std::to_string(x) +
                                    " outside the domain");
    }
    const double gauss =
        std::exp(-p * p / 2) / std::sqrt(2 * std::numbers::pi);
    double total = 0.0;
    for (int k = 0; k <= f.K; ++k) {
        total += fem_interpolate(f.mesh, f.phi[k], x) * gauss * hermite_he(2 * k, p);
    }
    return total;
}

std::vector<double> reconstruct_wavefunction(const CoefficientSet& f, double x0,
                                             double psi0) {
    if (psi0 == 0.0) {
        throw std::invalid_argument("reconstruct_wavefunction: psi0 must be nonzero");
    }
    if (x0 < -f.mesh.a || x0 > f.mesh.a) {
        throw std::invalid_argument("reconstruct_wavefunction: x0 outside the domain");
    }
    const int n = f.mesh.n_nodes();
    std::vector<double> psi(n, 0.0);
    for (int i = 0; i < n; ++i) {
        const double x = f.mesh.nodes[i];
        const double mid = (x + x0) / 2;
        const double dxn = x - x0;
        double series = 0.0;
        double power = 1.0;  // (x-x0)^{2k}
        for (int k = 0; k <= f.K; ++k) {
            const double sign = (k % 2) ? -1.0 : 1.0;
            series += fem_interpolate(f.mesh, f.phi[k], mid) * sign * power;
            power *= dxn * dxn;
        }
        psi[i] = std::exp(-dxn * dxn / 2) / psi0 * series;
    }
    return psi;
}

}  // namespace wigner
