#include "wigner/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>

namespace wigner {

namespace {

// coefficient of V^(2l+1) f_{2(k-l)} in the moment recurrence:
// c_l = 1/((2l+1)! (-4)^l)
double recon_coeff(int l) {
    double c = 1.0;
    for (int i = 1; i <= l; ++i) c /= -4.0 * (2 * i) * (2 * i + 1);
    return c;
}

// coefficient of V^(2l) f_{2(k-l)} in the propagation operator:
// e_l = 2/((2l)! (-4)^l)
double even_coeff(int l) {
    double c = 2.0;
    for (int i = 1; i <= l; ++i) c /= -4.0 * (2 * i - 1) * (2 * i);
    return c;
}

void axpy(std::vector<double>& y, double alpha, const std::vector<double>& x) {
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += alpha * x[i];
}

}  // namespace

CoupledOperator::CoupledOperator(const Mesh1D& mesh, const Potential& V, int K)
    : mesh_(mesh),
      K_(K),
      mass_(assemble_mass(mesh)),
      stiffness_(assemble_stiffness(mesh)),
      advection_(assemble_advection(mesh)) {
    if (K < 0) throw std::invalid_argument("CoupledOperator: K must be >= 0");
    for (int l = 0; l <= K; ++l) {
        odd_mass_.push_back(assemble_weighted_mass(
            mesh, [&V, l](double x) { return V.derivative(x, 2 * l + 1); }));
        even_mass_.push_back(assemble_weighted_mass(
            mesh, [&V, l](double x) { return V.derivative(x, 2 * l); }));
    }
    weights_ = mass_.row_sums();
    const int n = mesh.n_nodes();
    v_nodal_.resize(n);
    for (int i = 0; i < n; ++i) {
        double v;
        try {
            v = V(mesh.nodes[i]);
        } catch (const std::domain_error&) {
            v = 0.0;
        }
        v_nodal_[i] = std::isfinite(v) ? v : 0.0;
    }
    const double tol = 1e-14 * std::max(1.0, mesh.a);
    for (double s : V.singular_points())
        for (int i = 0; i < n; ++i)
            if (std::abs(mesh.nodes[i] - s) <= tol) pinned_.push_back(i);
    // transposed advection with the first row pinned for the Dirichlet
    // condition of the recurrence, factored once
    BandedMatrix dhat(n, mesh.p, mesh.p);
    for (int i = 0; i < n; ++i)
        for (int j = std::max(0, i - mesh.p); j <= std::min(n - 1, i + mesh.p); ++j)
            dhat.at(i, j) = advection_.get(j, i);
    dhat.set_identity_row(0);
    chain_lu_ = std::make_unique<BandedLU>(std::move(dhat));
}

std::vector<double> CoupledOperator::reconstruct_next(const CoefficientSet& f,
                                                      int k) const {
    if (k < 0 || k > K_ || k >= static_cast<int>(f.phi.size()))
        throw std::invalid_argument("reconstruct_next: k out of range");
    std::vector<double> rhs = advection_.matvec_transpose(f.phi[k]);
    for (double& v : rhs) v = -v;
    for (int l = 0; l <= k; ++l)
        axpy(rhs, -recon_coeff(l), odd_mass_[l].matvec(f.phi[k - l]));
    const double scale = 1.0 / (2 * k + 2);
    for (double& v : rhs) v *= scale;
    rhs[0] = 0.0;
    chain_lu_->solve_in_place(rhs);
    return rhs;
}

CnStepper::CnStepper(const CoupledOperator& op, double dt)
    : dt_(dt), explicit_side_(1, 0, 0) {
    const int K = op.K();
    const int N = op.mesh().n_nodes();
    block_n_ = N * (K + 1);
    band_ = op.mesh().p * (K + 1) + K;
    if (dt == 0.0) return;  // step() is the identity; nothing to factor
    BandedMatrix imp(block_n_, band_, band_);
    BandedMatrix exp(block_n_, band_, band_);
    auto idx = [K](int i, int k) { return i * (K + 1) + k; };
    // add c * piece at moment-block (k, kp) of both CN sides
    auto add = [&](int k, int kp, const BandedMatrix& piece, double c) {
        const int kl = piece.kl(), ku = piece.ku();
        for (int i = 0; i < N; ++i) {
            for (int j = std::max(0, i - kl); j <= std::min(N - 1, i + ku); ++j) {
                const double v = piece.get(i, j);
                if (v == 0.0) continue;
                imp.at(idx(i, k), idx(j, kp)) += 0.5 * dt_ * c * v;
                exp.at(idx(i, k), idx(j, kp)) -= 0.5 * dt_ * c * v;
            }
        }
    };
    for (int k = 0; k <= K; ++k) {
        // time-derivative mass term on both sides
        const auto& M = op.mass();
        for (int i = 0; i < N; ++i) {
            for (int j = std::max(0, i - M.kl()); j <= std::min(N - 1, i + M.ku()); ++j) {
                const double v = M.get(i, j);
                if (v == 0.0) continue;
                imp.at(idx(i, k), idx(j, k)) += v;
                exp.at(idx(i, k), idx(j, k)) += v;
            }
        }
        add(k, k, op.stiffness(), 0.25);
        add(k, k, op.mass(), 4.0 * k + 1.0);
        if (k > 0) add(k, k - 1, op.mass(), 1.0);
        if (k < K) add(k, k + 1, op.mass(), (2.0 * k + 2.0) * (2.0 * k + 1.0));
        for (int l = 0; l <= k; ++l) add(k, k - l, op.even_mass(l), even_coeff(l));
    }
    explicit_side_ = std::move(exp);
    implicit_lu_.emplace(std::move(imp));
}

void CnStepper::step(const CoupledOperator& op, CoefficientSet& f) const {
    if (dt_ == 0.0) return;
    const int K = op.K();
    const int N = op.mesh().n_nodes();
    if (f.K != K || f.mesh.n_nodes() != N)
        throw std::invalid_argument("CnStepper: state does not match operator");
    std::vector<double> x(block_n_);
    for (int k = 0; k <= K; ++k)
        for (int i = 0; i < N; ++i) x[i * (K + 1) + k] = f.phi[k][i];
    std::vector<double> rhs = explicit_side_.matvec(x);
    // highest moment closed by the recurrence, taken explicitly
    const auto fk1 = op.reconstruct_next(f, K);
    const auto mfk1 = op.mass().matvec(fk1);
    const double c = dt_ * (2.0 * K + 2.0) * (2.0 * K + 1.0);
    for (int i = 0; i < N; ++i) rhs[i * (K + 1) + K] -= c * mfk1[i];
    implicit_lu_->solve_in_place(rhs);
    for (int k = 0; k <= K; ++k)
        for (int i = 0; i < N; ++i) f.phi[k][i] = rhs[i * (K + 1) + k];
}

void cn_step(const CoupledOperator& op, CoefficientSet& f, double dt) {
    CnStepper(op, dt).step(op, f);
}

void project_constraint(const CoupledOperator& op, CoefficientSet& f) {
    for (int k = 0; k < op.K(); ++k) f.phi[k + 1] = op.reconstruct_next(f, k);
}

void normalize(const CoupledOperator& op, CoefficientSet& f) {
    const auto& w = op.weights();
    const auto& f0 = f.phi[0];
    double s = 0.0, amp = 0.0;
    for (std::size_t i = 0; i < f0.size(); ++i) {
        s += w[i] * f0[i];
        amp = std::max(amp, std::abs(f0[i]));
    }
    if (std::abs(s) <= 1e-14 * std::max(1.0, amp))
        throw std::runtime_error("normalize: state has no mass");
    const double inv = 1.0 / s;
    for (auto& phi : f.phi)
        for (double& v : phi) v *= inv;
}

void symmetrize_even(CoefficientSet& f) {
    const auto& nodes = f.mesh.nodes;
    const std::size_t n = nodes.size();
    const double tol = 1e-12 * std::max(1.0, f.mesh.a);
    for (std::size_t i = 0; i < n; ++i)
        if (std::abs(nodes[i] + nodes[n - 1 - i]) > tol)
            throw std::invalid_argument("symmetrize_even: mesh is not symmetric");
    auto& f0 = f.phi[0];
    for (std::size_t i = 0; 2 * i < n; ++i) {
        const double v = 0.5 * (f0[i] + f0[n - 1 - i]);
        f0[i] = v;
        f0[n - 1 - i] = v;
    }
}

double state_overlap(const CoupledOperator& op, const CoefficientSet& fa,
                     const CoefficientSet& fb) {
    return overlap(fa, fb, op.mass());
}

void orthogonalize(const CoupledOperator& op, std::vector<CoefficientSet>& states) {
    for (std::size_t j = 0; j < states.size(); ++j) {
        const double before = state_overlap(op, states[j], states[j]);
        for (std::size_t i = 0; i < j; ++i) {
            const double r = state_overlap(op, states[i], states[j]) /
                             state_overlap(op, states[i], states[i]);
            for (int k = 0; k <= states[j].K; ++k)
                axpy(states[j].phi[k], -r, states[i].phi[k]);
        }
        const double after = state_overlap(op, states[j], states[j]);
        if (!(after > 1e-24 * before))
            throw std::runtime_error(
                "orthogonalize: rank deficiency, state " + std::to_string(j) +
                " vanishes after orthogonalization");
    }
}

double compute_energy(const CoupledOperator& op, const CoefficientSet& f) {
    if (f.K < 1)
        throw std::invalid_argument(
            "compute_energy: K = 0 state carries no kinetic moment");
    const auto& w = op.weights();
    const auto& v = op.potential_nodal();
    const auto& f0 = f.phi[0];
    const auto& f2 = f.phi[1];
    double e = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i)
        e += w[i] * (f2[i] + 0.5 * f0[i] + v[i] * f0[i]);
    return e;
}

double compute_energy(const CoefficientSet& f, const Potential& V) {
    if (f.K < 1)
        throw std::invalid_argument(
            "compute_energy: K = 0 state carries no kinetic moment");
    const auto w = assemble_mass(f.mesh).row_sums();
    const auto& f0 = f.phi[0];
    const auto& f2 = f.phi[1];
    double e = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        double vi;
        try {
            vi = V(f.mesh.nodes[i]);
        } catch (const std::domain_error&) {
            vi = 0.0;
        }
        if (!std::isfinite(vi)) vi = 0.0;
        e += w[i] * (f2[i] + 0.5 * f0[i] + vi * f0[i]);
    }
    return e;
}

double compute_energy_augmented(const CoupledOperator& op, const CoefficientSet& f) {
    if (f.K >= 1) return compute_energy(op, f);
    const auto f2 = op.reconstruct_next(f, 0);
    const auto& w = op.weights();
    const auto& v = op.potential_nodal();
    const auto& f0 = f.phi[0];
    double e = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i)
        e += w[i] * (f2[i] + 0.5 * f0[i] + v[i] * f0[i]);
    return e;
}

double rayleigh_energy(const CoupledOperator& op, const CoefficientSet& f) {
    const int K = op.K();
    // apply the closed coupled operator
    std::vector<std::vector<double>> hf;
    const auto fk1 = op.reconstruct_next(f, K);
    for (int k = 0; k <= K; ++k) {
        auto v = op.stiffness().matvec(f.phi[k]);
        for (double& x : v) x *= 0.25;
        axpy(v, 4.0 * k + 1.0, op.mass().matvec(f.phi[k]));
        if (k > 0) axpy(v, 1.0, op.mass().matvec(f.phi[k - 1]));
        axpy(v, (2.0 * k + 2.0) * (2.0 * k + 1.0),
             op.mass().matvec(k < K ? f.phi[k + 1] : fk1));
        for (int l = 0; l <= k; ++l)
            axpy(v, even_coeff(l), op.even_mass(l).matvec(f.phi[k - l]));
        hf.push_back(std::move(v));
    }
    std::vector<double> c(2 * K + 1);
    for (int s = 0; s <= 2 * K; ++s) c[s] = c_alpha(2 * s);
    double num = 0.0, den = 0.0;
    for (int k = 0; k <= K; ++k) {
        const auto mf = op.mass().matvec(f.phi[k]);
        for (int l = 0; l <= K; ++l) {
            double dh = 0.0, dm = 0.0;
            for (std::size_t i = 0; i < mf.size(); ++i) {
                dh += f.phi[l][i] * hf[k][i];
                dm += f.phi[l][i] * mf[i];
            }
            num += c[k + l] * dh;
            den += c[k + l] * dm;
        }
    }
    return num / den / 2.0;
}

namespace {

void apply_pins(const CoupledOperator& op, CoefficientSet& f) {
    for (int i : op.pinned_nodes()) f.phi[0][i] = 0.0;
}

StateEnsemble run_itp_impl(const SolverConfig& cfg, const Potential& V,
                           std::vector<CoefficientSet> states) {
    const Mesh1D mesh = build_mesh(cfg.a, cfg.h, cfg.p);
    if (cfg.K < 0) throw std::invalid_argument("run_itp: K must be >= 0");
    if (cfg.n_states < 1) throw std::invalid_argument("run_itp: n_states must be >= 1");
    if (!(cfg.dt > 0)) throw std::invalid_argument("run_itp: dt must be positive");
    if (!(cfg.T > 0)) throw std::invalid_argument("run_itp: T must be positive");
    CoupledOperator op(mesh, V, cfg.K);
    CnStepper stepper(op, cfg.dt);

    const int N = mesh.n_nodes();
    if (states.empty()) {
        std::mt19937_64 rng(cfg.rng_seed);
        std::uniform_real_distribution<double> uni(0.0, 1.0);
        for (int s = 0; s < cfg.n_states; ++s) {
            CoefficientSet f = make_coefficient_set(mesh, cfg.K);
            for (int i = 0; i < N; ++i) f.phi[0][i] = uni(rng);
            states.push_back(std::move(f));
        }
    } else {
        if (static_cast<int>(states.size()) != cfg.n_states)
            throw std::invalid_argument("run_itp: initial states do not match n_states");
        for (const auto& f : states)
            if (f.K != cfg.K || f.mesh.n_nodes() != N)
                throw std::invalid_argument("run_itp: initial state does not match config");
    }
    for (auto& f : states) {
        if (cfg.enforce_even) symmetrize_even(f);
        apply_pins(op, f);
        project_constraint(op, f);
        normalize(op, f);
    }

    StateEnsemble out;
    const int n_steps = static_cast<int>(std::llround(cfg.T / cfg.dt));
    double err = std::numeric_limits<double>::infinity();
    std::vector<CoefficientSet> last;
    for (int it = 1; it <= n_steps; ++it) {
        last = states;
        for (auto& f : states) {
            stepper.step(op, f);
            if (cfg.enforce_even) symmetrize_even(f);
            apply_pins(op, f);
        }
        if (cfg.n_states > 1) orthogonalize(op, states);
        for (auto& f : states) {
            normalize(op, f);
            if (cfg.use_projection) project_constraint(op, f);
        }
        err = 0.0;
        for (std::size_t s = 0; s < states.size(); ++s)
            for (int k = 0; k <= cfg.K; ++k)
                for (int i = 0; i < N; ++i)
                    err = std::max(err,
                                   std::abs(states[s].phi[k][i] - last[s].phi[k][i]));
        TraceRecord rec;
        rec.iteration = it;
        rec.tau = it * cfg.dt;
        rec.err = err;
        for (const auto& f : states)
            rec.energies.push_back(compute_energy_augmented(op, f));
        out.trace.push_back(std::move(rec));
        out.iterations = it;
        if (!std::isfinite(err))
            throw std::runtime_error("run_itp: state became non-finite at iteration " +
                                     std::to_string(it));
        if (err <= cfg.tol) break;
    }
    out.converged = err <= cfg.tol;
    out.final_err = err;
    // report an orthogonal ensemble: one terminal pass, no re-projection
    if (cfg.n_states > 1) {
        orthogonalize(op, states);
        for (auto& f : states) normalize(op, f);
    }
    for (const auto& f : states)
        out.energies.push_back(compute_energy_augmented(op, f));
    out.states = std::move(states);
    return out;
}

}  // namespace

StateEnsemble run_itp(const SolverConfig& cfg, const Potential& V) {
    return run_itp_impl(cfg, V, {});
}

StateEnsemble run_itp(const SolverConfig& cfg, const Potential& V,
                      std::vector<CoefficientSet> initial) {
    if (initial.empty())
        throw std::invalid_argument("run_itp: initial states must not be empty");
    return run_itp_impl(cfg, V, std::move(initial));
}

}  // namespace wigner
