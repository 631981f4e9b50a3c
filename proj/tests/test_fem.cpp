#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "wigner/fem.hpp"

using namespace wigner;

namespace {

// Independent dense assembly oracle with its own shape-function evaluation and
// the same fixed 4-point rule, for entrywise comparison against the banded path.
std::vector<std::vector<double>> dense_oracle(const Mesh1D& mesh, int form,
                                              double (*w)(double)) {
    const int n = mesh.n_nodes();
    const int p = mesh.p;
    std::vector<std::vector<double>> out(n, std::vector<double>(n, 0.0));
    const double xi[4] = {-0.8611363115940526, -0.3399810435848563,
                          0.3399810435848563, 0.8611363115940526};
    const double wq[4] = {0.3478548451374538, 0.6521451548625461,
                          0.6521451548625461, 0.3478548451374538};
    for (int e = 0; e < mesh.n_el; ++e) {
        const double x0 = mesh.nodes[p * e];
        for (int q = 0; q < 4; ++q) {
            const double t = (xi[q] + 1) / 2;
            const double qw = wq[q] / 2 * mesh.h;
            const double x = x0 + t * mesh.h;
            double phi[3], dphi[3];
            if (p == 1) {
                phi[0] = 1 - t; phi[1] = t;
                dphi[0] = -1 / mesh.h; dphi[1] = 1 / mesh.h;
            } else {
                phi[0] = 2 * t * t - 3 * t + 1;
                phi[1] = -4 * t * t + 4 * t;
                phi[2] = 2 * t * t - t;
                dphi[0] = (4 * t - 3) / mesh.h;
                dphi[1] = (-8 * t + 4) / mesh.h;
                dphi[2] = (4 * t - 1) / mesh.h;
            }
            const double ww = w ? w(x) : 1.0;
            for (int i = 0; i <= p; ++i) {
                for (int j = 0; j <= p; ++j) {
                    double v = 0;
                    if (form == 0) v = phi[i] * phi[j];
                    if (form == 1) v = dphi[i] * dphi[j];
                    if (form == 2) v = dphi[i] * phi[j];
                    out[p * e + i][p * e + j] += qw * ww * v;
                }
            }
        }
    }
    return out;
}

double gaussian_weight(double x) { return std::exp(-x * x); }

}  // namespace

TEST_CASE("build_mesh geometry") {
    auto mesh = build_mesh(10.0, 0.05, 2);
    CHECK(mesh.n_el == 400);
    CHECK(mesh.n_nodes() == 801);
    CHECK(mesh.nodes.front() == -10.0);
    CHECK(mesh.nodes.back() == 10.0);
    // the center node must be bitwise zero
    CHECK(mesh.nodes[400] == 0.0);
    for (int i = 1; i < mesh.n_nodes(); ++i) {
        CHECK(mesh.nodes[i] - mesh.nodes[i - 1] ==
              doctest::Approx(0.025).epsilon(1e-12));
    }
}

TEST_CASE("build_mesh rejects bad parameters by name") {
    CHECK_THROWS_WITH_AS(build_mesh(10.0, 0.3, 1),
                         doctest::Contains("does not evenly divide"),
                         std::invalid_argument);
    // 2a/h = 5 elements: odd, no center node
    CHECK_THROWS_WITH_AS(build_mesh(2.5, 1.0, 1), doctest::Contains("even"),
                         std::invalid_argument);
    CHECK_THROWS_WITH_AS(build_mesh(10.0, 0.1, 3), doctest::Contains("p"),
                         std::invalid_argument);
    CHECK_THROWS_WITH_AS(build_mesh(-1.0, 0.1, 1), doctest::Contains("a"),
                         std::invalid_argument);
}

TEST_CASE("assembled matrices match the dense quadrature oracle") {
    for (int p : {1, 2}) {
        auto mesh = build_mesh(2.0, 0.25, p);
        auto m = assemble_mass(mesh);
        auto s = assemble_stiffness(mesh);
        auto a = assemble_advection(mesh);
        auto mw = assemble_weighted_mass(mesh, gaussian_weight);
        auto om = dense_oracle(mesh, 0, nullptr);
        auto os = dense_oracle(mesh, 1, nullptr);
        auto oa = dense_oracle(mesh, 2, nullptr);
        auto ow = dense_oracle(mesh, 0, gaussian_weight);
        const int n = mesh.n_nodes();
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                CHECK(m.get(i, j) == doctest::Approx(om[i][j]).epsilon(1e-12));
                CHECK(s.get(i, j) == doctest::Approx(os[i][j]).epsilon(1e-12));
                CHECK(a.get(i, j) == doctest::Approx(oa[i][j]).epsilon(1e-12));
                CHECK(mw.get(i, j) == doctest::Approx(ow[i][j]).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("mass matrix is symmetric positive definite with exact row sums") {
    for (int p : {1, 2}) {
        auto mesh = build_mesh(5.0, 0.5, p);
        auto m = assemble_mass(mesh);
        const int n = mesh.n_nodes();
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                CHECK(m.get(i, j) == doctest::Approx(m.get(j, i)).epsilon(1e-14));
        // row sums are the basis integrals and total the domain length
        auto sums = m.row_sums();
        double total = 0;
        for (double v : sums) total += v;
        CHECK(total == doctest::Approx(2 * mesh.a).epsilon(1e-13));
        // positive definiteness via random quadratic forms
        std::mt19937_64 rng(7);
        std::uniform_real_distribution<double> dist(-1.0, 1.0);
        for (int trial = 0; trial < 20; ++trial) {
            std::vector<double> x(n);
            for (double& v : x) v = dist(rng);
            auto mx = m.matvec(x);
            double q = 0;
            for (int i = 0; i < n; ++i) q += x[i] * mx[i];
            CHECK(q > 0.0);
        }
    }
}

TEST_CASE("stiffness annihilates constants") {
    for (int p : {1, 2}) {
        auto mesh = build_mesh(3.0, 0.25, p);
        auto s = assemble_stiffness(mesh);
        std::vector<double> ones(mesh.n_nodes(), 1.0);
        for (double v : s.matvec(ones)) CHECK(std::abs(v) < 1e-13);
    }
}

TEST_CASE("advection antisymmetry up to boundary terms") {
    for (int p : {1, 2}) {
        auto mesh = build_mesh(4.0, 0.5, p);
        auto a = assemble_advection(mesh);
        const int n = mesh.n_nodes();
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                double expect = 0.0;
                if (i == 0 && j == 0) expect = -1.0;
                if (i == n - 1 && j == n - 1) expect = 1.0;
                CHECK(a.get(i, j) + a.get(j, i) ==
                      doctest::Approx(expect).epsilon(1e-13));
            }
        }
    }
    // interior linear-element row pattern (+1/2, 0, -1/2)
    auto mesh = build_mesh(4.0, 0.5, 1);
    auto a = assemble_advection(mesh);
    CHECK(a.get(5, 4) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(std::abs(a.get(5, 5)) < 1e-14);
    CHECK(a.get(5, 6) == doctest::Approx(-0.5).epsilon(1e-14));
}

TEST_CASE("weighted mass rejects non-finite weights naming the element") {
    auto mesh = build_mesh(2.0, 0.5, 1);
    auto bad = [](double x) { return 1.0 / (x - 0.1); };
    CHECK_THROWS_WITH_AS(assemble_weighted_mass(mesh, [](double) {
                             return std::numeric_limits<double>::infinity();
                         }),
                         doctest::Contains("element"), std::invalid_argument);
    CHECK_NOTHROW(assemble_weighted_mass(mesh, bad));  // finite at all Gauss points
}

TEST_CASE("banded solve against dense elimination oracle") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    const int n = 40, kl = 3, ku = 2;
    BandedMatrix a(n, kl, ku);
    std::vector<std::vector<double>> d(n, std::vector<double>(n, 0.0));
    for (int i = 0; i < n; ++i) {
        for (int j = std::max(0, i - ku); j <= std::min(n - 1, i + kl); ++j) {
            // note: fill transposed-band region; diagonal made dominant
            double v = dist(rng);
            if (i == j) v += 8.0;
            a.at(j, i) = v;
            d[j][i] = v;
        }
    }
    std::vector<double> rhs(n);
    for (double& v : rhs) v = dist(rng);
    auto x = solve_banded(a, rhs);
    // dense Gaussian elimination with partial pivoting
    auto dd = d;
    auto b = rhs;
    std::vector<int> perm(n);
    for (int i = 0; i < n; ++i) perm[i] = i;
    for (int c = 0; c < n; ++c) {
        int piv = c;
        for (int r = c + 1; r < n; ++r)
            if (std::abs(dd[r][c]) > std::abs(dd[piv][c])) piv = r;
        std::swap(dd[c], dd[piv]);
        std::swap(b[c], b[piv]);
        for (int r = c + 1; r < n; ++r) {
            const double f = dd[r][c] / dd[c][c];
            for (int j = c; j < n; ++j) dd[r][j] -= f * dd[c][j];
            b[r] -= f * b[c];
        }
    }
    std::vector<double> xo(n);
    for (int r = n - 1; r >= 0; --r) {
        double acc = b[r];
        for (int j = r + 1; j < n; ++j) acc -= dd[r][j] * xo[j];
        xo[r] = acc / dd[r][r];
    }
    for (int i = 0; i < n; ++i)
        CHECK(x[i] == doctest::Approx(xo[i]).epsilon(1e-11));
    // residual contract
    auto ax = a.matvec(x);
    double rmax = 0, bmax = 0;
    for (int i = 0; i < n; ++i) {
        rmax = std::max(rmax, std::abs(ax[i] - rhs[i]));
        bmax = std::max(bmax, std::abs(rhs[i]));
    }
    CHECK(rmax <= 1e-10 * (bmax + 1));
}

TEST_CASE("Dirichlet row replacement pins values") {
    auto mesh = build_mesh(2.0, 0.25, 1);
    auto s = assemble_stiffness(mesh);
    const int n = mesh.n_nodes();
    // -u'' = 0 with u(-a)=1, u(a)=3 has the linear interpolant as solution
    std::vector<double> rhs(n, 0.0);
    std::vector<DirichletBc> bcs{{0, 1.0}, {n - 1, 3.0}};
    auto u = solve_banded(s, rhs, bcs);
    for (int i = 0; i < n; ++i) {
        const double expect = 1.0 + 2.0 * (mesh.nodes[i] + mesh.a) / (2 * mesh.a);
        CHECK(u[i] == doctest::Approx(expect).epsilon(1e-10));
    }
    CHECK_THROWS_AS(solve_banded(s, rhs, std::vector<DirichletBc>{{-1, 0.0}}),
                    std::invalid_argument);
}

TEST_CASE("matvec_transpose agrees with explicit transpose") {
    auto mesh = build_mesh(2.0, 0.5, 2);
    auto a = assemble_advection(mesh);
    const int n = mesh.n_nodes();
    std::vector<double> x(n);
    for (int i = 0; i < n; ++i) x[i] = std::sin(i + 1.0);
    auto y = a.matvec_transpose(x);
    for (int j = 0; j < n; ++j) {
        double acc = 0;
        for (int i = 0; i < n; ++i) acc += a.get(i, j) * x[i];
        CHECK(y[j] == doctest::Approx(acc).epsilon(1e-13));
    }
}
