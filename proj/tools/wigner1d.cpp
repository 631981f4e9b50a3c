// wigner1d: command-line front end for the phase-space eigensolver.
//
// Subcommands: solve, scf, converge, reference, wigner-grid, defaults.
// Configuration is a flat key = value file with [section] headers; any
// command-line flag overrides the file value, and WIGNER1D_OUTPUT_DIR
// overrides the output directory over everything else.
//
// Exit codes: 0 success, 1 usage or configuration error, 2 numerical
// non-convergence, 3 internal error.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "wigner/dft.hpp"
#include "wigner/fem.hpp"
#include "wigner/hermite.hpp"
#include "wigner/potentials.hpp"
#include "wigner/schrodinger.hpp"
#include "wigner/solver.hpp"

#ifndef WIGNER1D_VERSION
#define WIGNER1D_VERSION "unknown"
#endif

namespace {

using namespace wigner;

constexpr double kPi = 3.14159265358979323846;

struct RunConfig {
    // [run]
    std::string system = "harmonic";  // harmonic | hydrogen1d | hooke_ks | contact_hooke
    // [solver]
    SolverConfig solver;
    // [scf]
    double alpha = 0.3;
    double scf_tol = 1e-9;
    int scf_max_iter = 200;
    std::string inner = "wigner";  // wigner | schrodinger
    // [output]
    std::string outdir = ".";
    // [converge]
    std::vector<double> h_list = {0.2, 0.1, 0.05, 0.025};
    std::vector<int> K_list = {1};
    std::string metric = "coeff";       // coeff | density
    std::string reference = "exact";    // exact | finest
    // [grid]
    double x_min = -5.0, x_max = 5.0;
    double p_min = -5.0, p_max = 5.0;
    int nx = 101, np = 101;
};

std::string g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string join_doubles(const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ",";
        s += g17(v[i]);
    }
    return s;
}

std::string join_ints(const std::vector<int>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(v[i]);
    }
    return s;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& v) {
    std::size_t pos = 0;
    double out;
    try {
        out = std::stod(v, &pos);
    } catch (const std::exception&) {
        throw std::invalid_argument("config: bad numeric value for " + key + ": " + v);
    }
    if (pos != v.size())
        throw std::invalid_argument("config: bad numeric value for " + key + ": " + v);
    return out;
}

int parse_int(const std::string& key, const std::string& v) {
    std::size_t pos = 0;
    int out;
    try {
        out = std::stoi(v, &pos);
    } catch (const std::exception&) {
        throw std::invalid_argument("config: bad integer value for " + key + ": " + v);
    }
    if (pos != v.size())
        throw std::invalid_argument("config: bad integer value for " + key + ": " + v);
    return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "on" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "off" || v == "no") return false;
    throw std::invalid_argument("config: bad boolean value for " + key + ": " + v);
}

std::vector<double> parse_double_list(const std::string& key, const std::string& v) {
    std::vector<double> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_double(key, trim(item)));
    if (out.empty()) throw std::invalid_argument("config: empty list for " + key);
    return out;
}

std::vector<int> parse_int_list(const std::string& key, const std::string& v) {
    std::vector<int> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_int(key, trim(item)));
    if (out.empty()) throw std::invalid_argument("config: empty list for " + key);
    return out;
}

// Applies one section-qualified key. Unknown keys are rejected so that a
// typo never silently falls back to a default.
void apply_key(RunConfig& cfg, const std::string& section, const std::string& key,
               const std::string& value) {
    const std::string q = section + "." + key;
    if (q == "run.system") cfg.system = value;
    else if (q == "solver.K") cfg.solver.K = parse_int(q, value);
    else if (q == "solver.a") cfg.solver.a = parse_double(q, value);
    else if (q == "solver.h") cfg.solver.h = parse_double(q, value);
    else if (q == "solver.p") cfg.solver.p = parse_int(q, value);
    else if (q == "solver.dt") cfg.solver.dt = parse_double(q, value);
    else if (q == "solver.T") cfg.solver.T = parse_double(q, value);
    else if (q == "solver.tol") cfg.solver.tol = parse_double(q, value);
    else if (q == "solver.n_states") cfg.solver.n_states = parse_int(q, value);
    else if (q == "solver.enforce_even") cfg.solver.enforce_even = parse_bool(q, value);
    else if (q == "solver.use_projection") cfg.solver.use_projection = parse_bool(q, value);
    else if (q == "solver.rng_seed") cfg.solver.rng_seed = std::stoull(value);
    else if (q == "scf.alpha") cfg.alpha = parse_double(q, value);
    else if (q == "scf.scf_tol") cfg.scf_tol = parse_double(q, value);
    else if (q == "scf.scf_max_iter") cfg.scf_max_iter = parse_int(q, value);
    else if (q == "scf.inner") cfg.inner = value;
    else if (q == "output.dir") cfg.outdir = value;
    else if (q == "converge.h_list") cfg.h_list = parse_double_list(q, value);
    else if (q == "converge.K_list") cfg.K_list = parse_int_list(q, value);
    else if (q == "converge.metric") cfg.metric = value;
    else if (q == "converge.reference") cfg.reference = value;
    else if (q == "grid.x_min") cfg.x_min = parse_double(q, value);
    else if (q == "grid.x_max") cfg.x_max = parse_double(q, value);
    else if (q == "grid.p_min") cfg.p_min = parse_double(q, value);
    else if (q == "grid.p_max") cfg.p_max = parse_double(q, value);
    else if (q == "grid.nx") cfg.nx = parse_int(q, value);
    else if (q == "grid.np") cfg.np = parse_int(q, value);
    else throw std::invalid_argument("config: unknown key '" + key + "' in section [" +
                                     section + "]");
}

void load_config_file(RunConfig& cfg, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("config: cannot open " + path);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#' || t[0] == ';') continue;
        if (t.front() == '[') {
            if (t.back() != ']')
                throw std::invalid_argument("config: malformed section at line " +
                                            std::to_string(lineno));
            section = trim(t.substr(1, t.size() - 2));
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config: expected key = value at line " +
                                        std::to_string(lineno));
        if (section.empty())
            throw std::invalid_argument("config: key outside any [section] at line " +
                                        std::to_string(lineno));
        apply_key(cfg, section, trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
    }
}

void print_config(std::FILE* out, const RunConfig& cfg) {
    std::fprintf(out, "[run]\n");
    std::fprintf(out, "system = %s\n", cfg.system.c_str());
    std::fprintf(out, "\n[solver]\n");
    std::fprintf(out, "K = %d\n", cfg.solver.K);
    std::fprintf(out, "a = %s\n", g17(cfg.solver.a).c_str());
    std::fprintf(out, "h = %s\n", g17(cfg.solver.h).c_str());
    std::fprintf(out, "p = %d\n", cfg.solver.p);
    std::fprintf(out, "dt = %s\n", g17(cfg.solver.dt).c_str());
    std::fprintf(out, "T = %s\n", g17(cfg.solver.T).c_str());
    std::fprintf(out, "tol = %s\n", g17(cfg.solver.tol).c_str());
    std::fprintf(out, "n_states = %d\n", cfg.solver.n_states);
    std::fprintf(out, "enforce_even = %s\n", cfg.solver.enforce_even ? "true" : "false");
    std::fprintf(out, "use_projection = %s\n",
                 cfg.solver.use_projection ? "true" : "false");
    std::fprintf(out, "rng_seed = %llu\n",
                 static_cast<unsigned long long>(cfg.solver.rng_seed));
    std::fprintf(out, "\n[scf]\n");
    std::fprintf(out, "alpha = %s\n", g17(cfg.alpha).c_str());
    std::fprintf(out, "scf_tol = %s\n", g17(cfg.scf_tol).c_str());
    std::fprintf(out, "scf_max_iter = %d\n", cfg.scf_max_iter);
    std::fprintf(out, "inner = %s\n", cfg.inner.c_str());
    std::fprintf(out, "\n[output]\n");
    std::fprintf(out, "dir = %s\n", cfg.outdir.c_str());
    std::fprintf(out, "\n[converge]\n");
    std::fprintf(out, "h_list = %s\n", join_doubles(cfg.h_list).c_str());
    std::fprintf(out, "K_list = %s\n", join_ints(cfg.K_list).c_str());
    std::fprintf(out, "metric = %s\n", cfg.metric.c_str());
    std::fprintf(out, "reference = %s\n", cfg.reference.c_str());
    std::fprintf(out, "\n[grid]\n");
    std::fprintf(out, "x_min = %s\n", g17(cfg.x_min).c_str());
    std::fprintf(out, "x_max = %s\n", g17(cfg.x_max).c_str());
    std::fprintf(out, "p_min = %s\n", g17(cfg.p_min).c_str());
    std::fprintf(out, "p_max = %s\n", g17(cfg.p_max).c_str());
    std::fprintf(out, "nx = %d\n", cfg.nx);
    std::fprintf(out, "np = %d\n", cfg.np);
}

class CsvFile {
  public:
    CsvFile(const std::filesystem::path& path, const std::string& header) {
        f_ = std::fopen(path.string().c_str(), "w");
        if (!f_) throw std::runtime_error("cannot open " + path.string() + " for writing");
        std::fprintf(f_, "%s\n", header.c_str());
    }
    ~CsvFile() {
        if (f_) std::fclose(f_);
    }
    CsvFile(const CsvFile&) = delete;
    CsvFile& operator=(const CsvFile&) = delete;

    void row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i)
            std::fprintf(f_, "%s%s", i ? "," : "", cells[i].c_str());
        std::fprintf(f_, "\n");
    }

  private:
    std::FILE* f_ = nullptr;
};

Potential make_potential(const std::string& system) {
    if (system == "harmonic") return harmonic(1.0);
    if (system == "hydrogen1d") return hydrogen1d();
    if (system == "hooke_ks") return hooke_ks_potential();
    throw std::invalid_argument("unknown system '" + system +
                                "' (expected harmonic, hydrogen1d, hooke_ks or "
                                "contact_hooke)");
}

std::filesystem::path resolve_outdir(const RunConfig& cfg) {
    std::string dir = cfg.outdir;
    if (const char* env = std::getenv("WIGNER1D_OUTPUT_DIR"); env && *env) dir = env;
    std::filesystem::path p(dir);
    std::filesystem::create_directories(p);
    return p;
}

void write_manifest(const std::filesystem::path& dir, const std::string& command,
                    const RunConfig& cfg, bool converged,
                    const std::vector<std::string>& notes = {}) {
    std::FILE* f = std::fopen((dir / "manifest.ini").string().c_str(), "w");
    if (!f) throw std::runtime_error("cannot write manifest.ini");
    std::fprintf(f, "# wigner1d manifest; re-run: wigner1d %s --config manifest.ini\n",
                 command.c_str());
    std::fprintf(f, "# command = %s\n", command.c_str());
    std::fprintf(f, "# version = %s\n", WIGNER1D_VERSION);
    std::fprintf(f, "# converged = %s\n", converged ? "true" : "false");
    for (const auto& n : notes) std::fprintf(f, "# %s\n", n.c_str());
    std::fprintf(f, "\n");
    print_config(f, cfg);
    std::fclose(f);
}

void write_states_csv(const std::filesystem::path& dir, const StateEnsemble& ens) {
    const auto& mesh = ens.states[0].mesh;
    const int K = ens.states[0].K;
    std::string header;
    const bool multi = ens.states.size() > 1;
    if (multi) header = "state,";
    header += "x";
    for (int k = 0; k <= K; ++k) header += ",f_" + std::to_string(2 * k);
    CsvFile csv(dir / "state.csv", header);
    for (std::size_t s = 0; s < ens.states.size(); ++s)
        for (int i = 0; i < mesh.n_nodes(); ++i) {
            std::vector<std::string> cells;
            if (multi) cells.push_back(std::to_string(s));
            cells.push_back(g17(mesh.nodes[i]));
            for (int k = 0; k <= K; ++k) cells.push_back(g17(ens.states[s].phi[k][i]));
            csv.row(cells);
        }
}

void write_trace_csv(const std::filesystem::path& dir,
                     const std::vector<TraceRecord>& trace, int n_states) {
    std::string header = "iteration,tau,err";
    for (int s = 0; s < n_states; ++s) header += ",energy_" + std::to_string(s);
    CsvFile csv(dir / "trace.csv", header);
    for (const auto& r : trace) {
        std::vector<std::string> cells = {std::to_string(r.iteration), g17(r.tau),
                                          g17(r.err)};
        for (double e : r.energies) cells.push_back(g17(e));
        csv.row(cells);
    }
}

int do_solve(const RunConfig& cfg) {
    if (cfg.system == "contact_hooke")
        throw std::invalid_argument(
            "system contact_hooke is self-consistent; use the scf subcommand");
    const Potential V = make_potential(cfg.system);
    const StateEnsemble ens = run_itp(cfg.solver, V);

    const auto dir = resolve_outdir(cfg);
    write_states_csv(dir, ens);
    {
        CsvFile csv(dir / "energies.csv", "energy");
        for (double e : ens.energies) csv.row({g17(e)});
    }
    write_trace_csv(dir, ens.trace, cfg.solver.n_states);
    std::vector<std::string> notes;
    if (cfg.solver.K == 0)
        notes.push_back(
            "energy_note = K=0 energies use f_2 reconstructed from f_0 via the "
            "moment chain");
    write_manifest(dir, "solve", cfg, ens.converged, notes);
    if (!ens.converged) {
        std::fprintf(stderr,
                     "solve: not converged after %d iterations (err %.3e > tol %.3e)\n",
                     ens.iterations, ens.final_err, cfg.solver.tol);
        return 2;
    }
    return 0;
}

int do_reference(const RunConfig& cfg) {
    if (cfg.system == "contact_hooke")
        throw std::invalid_argument(
            "system contact_hooke is self-consistent; use the scf subcommand with "
            "inner = schrodinger");
    const Potential V = make_potential(cfg.system);
    const Mesh1D mesh = build_mesh(cfg.solver.a, cfg.solver.h, cfg.solver.p);
    SchrodingerConfig scfg;
    scfg.n_states = cfg.solver.n_states;
    scfg.dt = cfg.solver.dt;
    scfg.T = cfg.solver.T;
    scfg.tol = cfg.solver.tol;
    scfg.rng_seed = cfg.solver.rng_seed;
    const SchrodingerResult res = lowest_states(mesh, V, scfg);

    const auto dir = resolve_outdir(cfg);
    {
        std::string header = "x";
        for (int s = 0; s < scfg.n_states; ++s) header += ",psi_" + std::to_string(s);
        CsvFile csv(dir / "orbitals.csv", header);
        for (int i = 0; i < mesh.n_nodes(); ++i) {
            std::vector<std::string> cells = {g17(mesh.nodes[i])};
            for (const auto& psi : res.orbitals) cells.push_back(g17(psi[i]));
            csv.row(cells);
        }
    }
    {
        const auto rho = orbital_density(res.orbitals[0], 2.0);
        CsvFile csv(dir / "density.csv", "x,rho");
        for (int i = 0; i < mesh.n_nodes(); ++i)
            csv.row({g17(mesh.nodes[i]), g17(rho[i])});
    }
    {
        CsvFile csv(dir / "energies.csv", "energy");
        for (double e : res.energies) csv.row({g17(e)});
    }
    write_manifest(dir, "reference", cfg, res.converged,
                   {"residual = " + g17(res.residual)});
    if (!res.converged) {
        std::fprintf(stderr, "reference: not converged after %d iterations\n",
                     res.iterations);
        return 2;
    }
    return 0;
}

ScfConfig make_scf_config(const RunConfig& cfg) {
    ScfConfig sc;
    sc.alpha = cfg.alpha;
    sc.scf_tol = cfg.scf_tol;
    sc.max_iter = cfg.scf_max_iter;
    sc.solver = cfg.solver;
    return sc;
}

int do_scf(const RunConfig& cfg) {
    if (cfg.system != "contact_hooke")
        throw std::invalid_argument("scf supports system contact_hooke only");
    InnerSolver inner;
    if (cfg.inner == "wigner") inner = InnerSolver::wigner;
    else if (cfg.inner == "schrodinger") inner = InnerSolver::schrodinger;
    else throw std::invalid_argument("scf.inner must be wigner or schrodinger");

    const DftState out = scf_solve(harmonic(1.0), inner, make_scf_config(cfg));

    const auto dir = resolve_outdir(cfg);
    const Mesh1D mesh = build_mesh(cfg.solver.a, cfg.solver.h, cfg.solver.p);
    {
        CsvFile csv(dir / "density.csv", "x,rho");
        for (int i = 0; i < mesh.n_nodes(); ++i)
            csv.row({g17(mesh.nodes[i]), g17(out.rho[i])});
    }
    {
        CsvFile csv(dir / "potentials.csv", "x,v_h,v_x,v_c");
        for (int i = 0; i < mesh.n_nodes(); ++i)
            csv.row({g17(mesh.nodes[i]), g17(out.v_h[i]), g17(out.v_x[i]),
                     g17(out.v_c[i])});
    }
    {
        CsvFile csv(dir / "scf_history.csv", "iteration,density_change,energy");
        for (const auto& r : out.history)
            csv.row({std::to_string(r.iteration), g17(r.density_change), g17(r.energy)});
    }
    {
        CsvFile csv(dir / "scf_summary.csv",
                    "total_energy,orbital_energy,iterations,converged");
        csv.row({g17(out.total_energy), g17(out.orbital_energy),
                 std::to_string(out.iterations), out.converged ? "true" : "false"});
    }
    if (inner == InnerSolver::wigner && !out.state.phi.empty()) {
        StateEnsemble tmp;
        tmp.states.push_back(out.state);
        write_states_csv(dir, tmp);
    } else if (!out.orbital.empty()) {
        CsvFile csv(dir / "orbitals.csv", "x,psi_0");
        for (int i = 0; i < mesh.n_nodes(); ++i)
            csv.row({g17(mesh.nodes[i]), g17(out.orbital[i])});
    }
    std::vector<std::string> notes;
    if (inner == InnerSolver::wigner && cfg.solver.K == 0)
        notes.push_back(
            "energy_note = K=0 orbital energy uses f_2 reconstructed from the "
            "converged f_0 via the moment chain");
    write_manifest(dir, "scf", cfg, out.converged, notes);
    if (!out.converged) {
        std::fprintf(stderr, "scf: not converged after %d iterations\n", out.iterations);
        return 2;
    }
    return 0;
}

// Exact ground-state coefficient reference where one exists, used by the
// converge subcommand.
std::optional<CoefficientSet> exact_coefficients(const std::string& system,
                                                 const Mesh1D& mesh, int K) {
    if (system == "harmonic") {
        CoefficientSet f = make_coefficient_set(mesh, K);
        double scale = 1.0 / std::sqrt(kPi);
        for (int k = 0; k <= K; ++k) {
            for (int i = 0; i < mesh.n_nodes(); ++i)
                f.phi[k][i] = scale * std::exp(-mesh.nodes[i] * mesh.nodes[i]);
            scale /= -4.0 * (k + 1);
        }
        return f;
    }
    if (system == "hooke_ks") {
        std::vector<double> psi(mesh.n_nodes());
        for (int i = 0; i < mesh.n_nodes(); ++i)
            psi[i] = std::sqrt(hooke_exact_density(mesh.nodes[i]) / 2.0);
        return f_from_h(h_from_wavefunction(mesh, psi, K));
    }
    return std::nullopt;
}

std::optional<std::vector<double>> exact_density(const std::string& system,
                                                 const Mesh1D& mesh) {
    std::vector<double> rho(mesh.n_nodes());
    for (int i = 0; i < mesh.n_nodes(); ++i) {
        const double x = mesh.nodes[i];
        if (system == "harmonic") rho[i] = std::exp(-x * x) / std::sqrt(kPi);
        else if (system == "hooke_ks") rho[i] = hooke_exact_density(x) / 2.0;
        else if (system == "hydrogen1d") rho[i] = 2.0 * x * x * std::exp(-2.0 * std::abs(x));
        else return std::nullopt;
    }
    return rho;
}

CoefficientSet converge_run(const RunConfig& cfg, int K, double h) {
    if (cfg.system == "contact_hooke") {
        RunConfig rc = cfg;
        rc.solver.K = K;
        rc.solver.h = h;
        rc.solver.n_states = 1;
        const DftState out =
            scf_solve(harmonic(1.0), InnerSolver::wigner, make_scf_config(rc));
        if (!out.converged)
            throw std::runtime_error("converge: scf run did not converge at h = " +
                                     g17(h));
        return out.state;
    }
    SolverConfig sc = cfg.solver;
    sc.K = K;
    sc.h = h;
    sc.n_states = 1;
    const StateEnsemble ens = run_itp(sc, make_potential(cfg.system));
    if (!ens.converged)
        throw std::runtime_error("converge: solver run did not converge at h = " +
                                 g17(h));
    return ens.states[0];
}

// max_k ||phi_k - ref_k||_inf over shared nodes; a node-index stride maps
// the coarse mesh into the reference mesh when the reference is finer.
double coefficient_error(const CoefficientSet& f, const CoefficientSet& ref,
                         bool density_only) {
    const int stride = (ref.mesh.n_nodes() - 1) / (f.mesh.n_nodes() - 1);
    const int kmax = density_only ? 0 : std::min(f.K, ref.K);
    double err = 0.0;
    for (int k = 0; k <= kmax; ++k)
        for (int i = 0; i < f.mesh.n_nodes(); ++i)
            err = std::max(err, std::abs(f.phi[k][i] - ref.phi[k][i * stride]));
    return err;
}

int do_converge(const RunConfig& cfg) {
    if (cfg.metric != "coeff" && cfg.metric != "density")
        throw std::invalid_argument("converge.metric must be coeff or density");
    if (cfg.reference != "exact" && cfg.reference != "finest")
        throw std::invalid_argument("converge.reference must be exact or finest");
    if (cfg.system == "contact_hooke" && cfg.reference == "exact")
        throw std::invalid_argument(
            "contact_hooke has no closed-form solution; use reference = finest");
    if (cfg.system == "contact_hooke" && cfg.inner != "wigner")
        throw std::invalid_argument(
            "converge with contact_hooke exports phase-space coefficients; set "
            "scf.inner = wigner");
    if (cfg.system == "hydrogen1d" && cfg.metric == "coeff")
        throw std::invalid_argument(
            "hydrogen1d has no exact coefficient reference; use metric = density");
    if (cfg.h_list.empty()) throw std::invalid_argument("converge: empty h_list");
    for (std::size_t i = 0; i + 1 < cfg.h_list.size(); ++i)
        if (std::abs(cfg.h_list[i] / cfg.h_list[i + 1] - 2.0) > 1e-9)
            throw std::invalid_argument(
                "converge: h_list must be strictly halving (h, h/2, h/4, ...)");
    if (cfg.h_list.size() < 2)
        std::fprintf(stderr,
                     "converge: fewer than 2 mesh sizes; no orders will be computed\n");

    const bool density_only = cfg.metric == "density";
    const auto dir = resolve_outdir(cfg);
    CsvFile csv(dir / "convergence.csv", "K,h,error,order");

    for (int K : cfg.K_list) {
        // one task per mesh size; runs are independent
        std::vector<std::future<CoefficientSet>> runs;
        for (double h : cfg.h_list)
            runs.push_back(std::async(std::launch::async,
                                      [&cfg, K, h] { return converge_run(cfg, K, h); }));
        std::vector<CoefficientSet> states;
        for (auto& fut : runs) states.push_back(fut.get());

        std::optional<CoefficientSet> ref;
        std::size_t n_rows = cfg.h_list.size();
        if (cfg.reference == "exact") {
            // per-run reference on each run's own mesh
        } else {
            ref = states.back();  // smallest h
            n_rows -= 1;          // the reference row itself carries no error
        }

        double prev_err = 0.0;
        for (std::size_t i = 0; i < n_rows; ++i) {
            double err;
            if (cfg.reference == "exact") {
                const auto& mesh = states[i].mesh;
                if (density_only) {
                    const auto rho = exact_density(cfg.system, mesh);
                    if (!rho)
                        throw std::invalid_argument("no exact density for system " +
                                                    cfg.system);
                    err = 0.0;
                    for (int j = 0; j < mesh.n_nodes(); ++j)
                        err = std::max(err, std::abs(states[i].phi[0][j] - (*rho)[j]));
                } else {
                    const auto fref = exact_coefficients(cfg.system, mesh, states[i].K);
                    if (!fref)
                        throw std::invalid_argument(
                            "no exact coefficient reference for system " + cfg.system);
                    err = coefficient_error(states[i], *fref, false);
                }
            } else {
                err = coefficient_error(states[i], *ref, density_only);
            }
            std::vector<std::string> cells = {std::to_string(K), g17(cfg.h_list[i]),
                                              g17(err)};
            cells.push_back(i == 0 ? "" : g17(std::log2(prev_err / err)));
            csv.row(cells);
            prev_err = err;
        }
    }
    write_manifest(dir, "converge", cfg, true);
    return 0;
}

int do_wigner_grid(const RunConfig& cfg) {
    if (cfg.nx <= 0 || cfg.np <= 0)
        throw std::invalid_argument("wigner-grid: nx and np must be positive");
    if (!(cfg.p_min < cfg.p_max))
        throw std::invalid_argument("wigner-grid: empty p range (p_min >= p_max)");
    if (!(cfg.x_min < cfg.x_max))
        throw std::invalid_argument("wigner-grid: empty x range (x_min >= x_max)");
    if (cfg.x_min < -cfg.solver.a || cfg.x_max > cfg.solver.a)
        throw std::invalid_argument(
            "wigner-grid: x range must lie inside the computational domain [-a, a]");
    if (cfg.system == "contact_hooke")
        throw std::invalid_argument(
            "system contact_hooke is self-consistent; use the scf subcommand");

    const Potential V = make_potential(cfg.system);
    const StateEnsemble ens = run_itp(cfg.solver, V);
    const auto dir = resolve_outdir(cfg);

    {
        CsvFile csv(dir / "wigner_grid.csv", "x,p,f");
        for (int i = 0; i < cfg.nx; ++i) {
            const double x =
                cfg.x_min + (cfg.x_max - cfg.x_min) * i / std::max(1, cfg.nx - 1);
            for (int j = 0; j < cfg.np; ++j) {
                const double p =
                    cfg.p_min + (cfg.p_max - cfg.p_min) * j / std::max(1, cfg.np - 1);
                csv.row({g17(x), g17(p), g17(evaluate_wigner(ens.states[0], x, p))});
            }
        }
    }
    {
        std::FILE* f = std::fopen((dir / "wigner_grid.gp").string().c_str(), "w");
        if (!f) throw std::runtime_error("cannot write wigner_grid.gp");
        std::fprintf(f,
                     "# gnuplot script for the exported phase-space grid\n"
                     "set datafile separator comma\n"
                     "set xlabel 'x'\n"
                     "set ylabel 'p'\n"
                     "set view map\n"
                     "set dgrid3d %d,%d\n"
                     "splot 'wigner_grid.csv' skip 1 using 1:2:3 with pm3d notitle\n",
                     cfg.np, cfg.nx);
        std::fclose(f);
    }
    write_manifest(dir, "wigner-grid", cfg, ens.converged);
    if (!ens.converged) {
        std::fprintf(stderr, "wigner-grid: solve not converged (err %.3e)\n",
                     ens.final_err);
        return 2;
    }
    return 0;
}

void add_common_options(CLI::App* sub, RunConfig& cfg) {
    // flag names mirror the config-file keys, so help moves off -h to free
    // the mesh-size flag
    sub->set_help_flag("--help", "print help and exit");
    sub->add_option("--config", "configuration file (key = value with [section] headers)")
        ->check(CLI::ExistingFile);
    sub->add_option("--system", cfg.system,
                    "system: harmonic, hydrogen1d, hooke_ks or contact_hooke");
    sub->add_option("--K", cfg.solver.K, "Hermite truncation order");
    sub->add_option("--a", cfg.solver.a, "domain half-width");
    sub->add_option("--h", cfg.solver.h, "mesh size");
    sub->add_option("--p", cfg.solver.p, "element order (1 or 2)");
    sub->add_option("--dt", cfg.solver.dt, "imaginary-time step");
    sub->add_option("--T", cfg.solver.T, "maximum imaginary time");
    sub->add_option("--tol", cfg.solver.tol, "stopping tolerance on the step change");
    sub->add_option("--n-states", cfg.solver.n_states, "number of eigenstates");
    sub->add_option("--enforce-even", cfg.solver.enforce_even,
                    "restrict f_0 to even functions");
    sub->add_option("--use-projection", cfg.solver.use_projection,
                    "re-project onto the stationary-equation constraint each step");
    sub->add_option("--seed", cfg.solver.rng_seed, "random initial state seed");
    sub->add_option("--alpha", cfg.alpha, "scf linear mixing weight");
    sub->add_option("--scf-tol", cfg.scf_tol, "scf density tolerance (inf-norm)");
    sub->add_option("--scf-max-iter", cfg.scf_max_iter, "scf iteration cap");
    sub->add_option("--inner", cfg.inner, "scf inner solver: wigner or schrodinger");
    sub->add_option("--outdir", cfg.outdir,
                    "output directory (WIGNER1D_OUTPUT_DIR overrides)");
    sub->add_option("--h-list", cfg.h_list, "mesh sizes for converge (halving)")
        ->delimiter(',');
    sub->add_option("--K-list", cfg.K_list, "truncation orders for converge")
        ->delimiter(',');
    sub->add_option("--metric", cfg.metric, "converge error metric: coeff or density");
    sub->add_option("--reference", cfg.reference,
                    "converge reference: exact or finest");
    sub->add_option("--x-min", cfg.x_min, "grid x lower bound");
    sub->add_option("--x-max", cfg.x_max, "grid x upper bound");
    sub->add_option("--p-min", cfg.p_min, "grid p lower bound");
    sub->add_option("--p-max", cfg.p_max, "grid p upper bound");
    sub->add_option("--nx", cfg.nx, "grid points in x");
    sub->add_option("--np", cfg.np, "grid points in p");
}

}  // namespace

int main(int argc, char** argv) {
    RunConfig cfg;

    // the config file is applied before flag parsing so that flags override
    // file values
    try {
        for (int i = 1; i < argc; ++i) {
            const std::string arg = argv[i];
            if (arg == "--config" && i + 1 < argc) load_config_file(cfg, argv[i + 1]);
            else if (arg.rfind("--config=", 0) == 0) load_config_file(cfg, arg.substr(9));
        }
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "wigner1d: %s\n", e.what());
        return 1;
    }

    CLI::App app{"wigner1d: phase-space eigenstates of 1D quantum systems"};
    app.set_help_flag("--help", "print help and exit");
    app.require_subcommand(1);
    CLI::App* solve = app.add_subcommand("solve", "imaginary-time eigenstate solve");
    CLI::App* scf = app.add_subcommand("scf", "self-consistent Kohn-Sham loop");
    CLI::App* converge = app.add_subcommand("converge", "mesh-refinement study");
    CLI::App* reference =
        app.add_subcommand("reference", "position-space reference eigensolve");
    CLI::App* grid =
        app.add_subcommand("wigner-grid", "export f(x, p) on a rectangular grid");
    CLI::App* defaults = app.add_subcommand("defaults", "print all defaults and exit");
    for (CLI::App* sub : {solve, scf, converge, reference, grid})
        add_common_options(sub, cfg);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        if (defaults->parsed()) {
            print_config(stdout, RunConfig{});
            return 0;
        }
        if (solve->parsed()) return do_solve(cfg);
        if (scf->parsed()) return do_scf(cfg);
        if (converge->parsed()) return do_converge(cfg);
        if (reference->parsed()) return do_reference(cfg);
        if (grid->parsed()) return do_wigner_grid(cfg);
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "wigner1d: %s\n", e.what());
        return 1;
    } catch (const std::domain_error& e) {
        std::fprintf(stderr, "wigner1d: internal error: %s\n", e.what());
        return 3;
    } catch (const std::runtime_error& e) {
        std::fprintf(stderr, "wigner1d: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "wigner1d: internal error: %s\n", e.what());
        return 3;
    }
    return 0;
}
