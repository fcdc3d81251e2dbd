// Acceptance suite: one PASS / FAIL / BLOCKED line per criterion.
//
//   acceptance --criterion N     run one criterion (exit 0 pass, 1 fail, 77 blocked)
//   acceptance --all             run every criterion in turn
//
// MaxCut library instances are looked up in $HOPSWEEP_BIQMAC_DIR and then in
// tests/data/biqmac/ of the source tree.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hopsweep/hopsweep.hpp"
#include "oracles.hpp"

#ifndef HOPSWEEP_SOURCE_DIR
#define HOPSWEEP_SOURCE_DIR "."
#endif

namespace fs = std::filesystem;
using namespace hopsweep;

namespace {

constexpr int kPass = 0;
constexpr int kFail = 1;
constexpr int kBlocked = 77;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

int report(int number, int status, const std::string& title, const std::string& detail) {
    const char* word = status == kPass ? "PASS" : status == kBlocked ? "BLOCKED" : "FAIL";
    std::printf("criterion %d: %s  %s  [%s]\n", number, word, title.c_str(), detail.c_str());
    std::fflush(stdout);
    return status;
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

std::vector<std::uint8_t> bits(std::uint64_t s, std::size_t n) {
    std::vector<std::uint8_t> x(n);
    for (std::size_t k = 0; k < n; ++k) x[k] = (s >> k) & 1U;
    return x;
}

// ---- 1: DMRG against exact diagonalization ----

int criterion1() {
    const auto t0 = Clock::now();
    double worst = 0.0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        Rng rng = Rng::stream(seed, StreamPurpose::test_data, 1);
        const std::size_t n = 8;
        std::vector<OperatorTerm> hx, hz;
        for (const OperatorTerm& t : oracle::random_terms(n, 0.3, rng, true))
            (t.factors.size() == 1 && t.factors[0].kind == OpKind::sx ? hx : hz).push_back(t);
        const double a = rng.uniform(0.01, 0.99), b = rng.uniform(0.01, 0.99), offset = rng.uniform(-1, 1);
        const MatrixProductOperator h = mix(hx, hz, a, b, offset, n);
        SweepParams sp;
        sp.max_bond = 32;
        sp.nsweeps = 8;
        // a random start at the bond cap: from a low-rank start the 1e-10
        // truncation cutoff can lock in an incomplete bond basis
        const SweepOutcome out = run(random_mps(n, sp.max_bond, seed), h, sp);
        const double exact = dense_ground_energy(hx, hz, a, b, offset, n);
        worst = std::max(worst, std::abs(out.energy - exact));
    }
    const double t = seconds_since(t0);
    const bool ok = worst <= 1e-7 && t < 120.0;
    return report(1, ok ? kPass : kFail, "DMRG matches exact diagonalization (20 models, n=8, D=32, 8 sweeps)",
                  fmt("max |E_dmrg - E_exact| = %.3e (tol 1e-7), %.1f s (limit 120 s)", worst, t));
}

// ---- 2: QUBO to Ising identity ----

int criterion2() {
    const auto t0 = Clock::now();
    double worst = 0.0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        Rng rng = Rng::stream(seed, StreamPurpose::test_data, 2);
        const std::size_t n = 12;
        QuboModel q(n, rng.uniform(-5, 5));
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i; j < n; ++j) q.add(i, j, rng.uniform(-3, 3));
        const IsingModel m = to_ising(q);
        for (std::uint64_t s = 0; s < (std::uint64_t{1} << n); ++s) {
            const auto x = bits(s, n);
            // x^T Q x summed over the full symmetric matrix, independent of the stored layout
            double f = q.offset();
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j) f += q.get(i, j) * x[i] * x[j];
            worst = std::max(worst, std::abs(f - ising_energy(m, SpinConfiguration::from_binary(x))));
        }
    }
    const double t = seconds_since(t0);
    const bool ok = worst <= 1e-9 && t < 30.0;
    return report(2, ok ? kPass : kFail, "QUBO and Ising objectives agree on all 2^12 configurations (10 models)",
                  fmt("max difference %.3e (tol 1e-9), %.2f s (limit 30 s)", worst, t));
}

// ---- 3: Sudoku reduction identities ----

int criterion3() {
    const auto t0 = Clock::now();
    const QuboModel full = sudoku::full_qubo(3);
    std::size_t boards = 0, assignments = 0, mismatches = 0;
    std::size_t largest = 0;
    for (std::uint64_t seed = 1; boards < 5 && seed < 2000; ++seed) {
        const auto pz = sudoku::generate_puzzle(3, 71 + seed % 4, seed);
        const auto [reduced, map] = sudoku::clamp(pz.puzzle, full);
        if (map.free_count() > 16 || map.free_count() < 12) continue;
        largest = std::max(largest, map.free_count());
        ++boards;
        const std::size_t ns = map.free_count();
        for (std::uint64_t s = 0; s < (std::uint64_t{1} << ns); ++s) {
            const auto x = bits(s, ns);
            ++assignments;
            if (reduced.objective(x) != full.objective(sudoku::expand(map, x))) ++mismatches;
        }
    }
    std::size_t puzzles = 0, bad_couplings = 0, couplings = 0, nonzero_solutions = 0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto pz = sudoku::generate_puzzle(3, 24, seed);
        const auto [reduced, map] = sudoku::clamp(pz.puzzle, full);
        const IsingModel m = to_ising(reduced);
        ++puzzles;
        for (const auto& [mn, j] : m.couplings)
            if (j != 0.0) {
                ++couplings;
                if (j != 2.0) ++bad_couplings;
            }
        const auto z = sudoku::indicator(pz.solution);
        std::vector<std::uint8_t> x(map.free_count());
        for (std::size_t k = 0; k < x.size(); ++k) x[k] = z[map.free_vars[k]];
        if (reduced.objective(x) != 0.0 || ising_energy(m, SpinConfiguration::from_binary(x)) != 0.0)
            ++nonzero_solutions;
    }
    const bool ok = boards == 5 && mismatches == 0 && bad_couplings == 0 && nonzero_solutions == 0;
    return report(3, ok ? kPass : kFail, "Sudoku clamping identities",
                  fmt("%zu boards with 12<=N_s<=16 (largest %zu), %zu assignments, %zu mismatches; %zu 24-clue puzzles, %zu couplings, "
                      "%zu not equal to 2, %zu solutions with nonzero energy; %.1f s",
                      boards, largest, assignments, mismatches, puzzles, couplings, bad_couplings, nonzero_solutions,
                      seconds_since(t0)));
}

// ---- 4: driver against brute force ----

DriveParams criterion4_params() {
    DriveParams p;
    p.m_steps = 5;
    p.hx = 1.0;
    p.sweep.max_bond = 16;
    p.sweep.nsweeps = 5;
    p.max_restarts = 5;
    return p;
}

int criterion4() {
    const auto t0 = Clock::now();
    std::size_t reached = 0, restarts = 0;
    std::string misses;
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
        const IsingModel m = random_ising(16, 0.5, seed);
        const double e0 = brute_force_ground(m).best_energy;
        DriveParams p = criterion4_params();
        p.seed = seed;
        p.target_energy = e0;
        const RunReport r = solve(m, p);
        restarts += r.restarts;
        if (r.classical_energy == e0)
            ++reached;
        else
            misses += fmt(" seed%llu(%g vs %g)", static_cast<unsigned long long>(seed), r.classical_energy, e0);
    }
    const double t = seconds_since(t0);
    const bool ok = reached >= 45 && t < 900.0;
    return report(4, ok ? kPass : kFail, "driver reaches the brute-force ground energy (50 models, 16 spins)",
                  fmt("%zu/50 reached (need 45), %zu restarts used, %.1f s (limit 900 s)", reached, restarts, t) +
                      (misses.empty() ? "" : ";" + misses));
}

// ---- 5, 6: MaxCut library instances ----

std::optional<fs::path> find_instance(const std::string& name) {
    std::vector<fs::path> dirs;
    if (const char* env = std::getenv("HOPSWEEP_BIQMAC_DIR"); env && *env) dirs.emplace_back(env);
    dirs.emplace_back(fs::path(HOPSWEEP_SOURCE_DIR) / "tests" / "data" / "biqmac");
    for (const auto& d : dirs)
        for (const char* ext : {"", ".txt", ".dat"}) {
            const fs::path p = d / (name + ext);
            if (fs::is_regular_file(p)) return p;
        }
    return std::nullopt;
}

struct MaxcutRun {
    bool found = false;
    bool reached = false;
    std::string detail;
};

MaxcutRun run_maxcut(const std::string& name, double e0, DriveParams p) {
    MaxcutRun out;
    const auto path = find_instance(name);
    if (!path) {
        out.detail = name + ": instance file not found";
        return out;
    }
    out.found = true;
    const auto t0 = Clock::now();
    const maxcut::Graph g = maxcut::read_biqmac(path->string());
    const IsingModel m = to_ising(maxcut::to_qubo(g));
    p.target_energy = e0;
    p.rescale = true;
    const RunReport r = solve(m, p);
    const double cut = maxcut::cut_value(g, r.configuration.to_binary());
    out.reached = -cut == e0;
    out.detail = fmt("%s: E = %g (target %g), %zu restarts, %.1f s", name.c_str(), -cut, e0, r.restarts,
                     seconds_since(t0));
    return out;
}

int criterion5() {
    DriveParams p;
    p.m_steps = 5;
    p.hx = 1.0;
    p.eta = 0.0;
    p.sweep.max_bond = 30;
    p.sweep.nsweeps = 5;
    p.max_restarts = 10;
    const MaxcutRun main = run_maxcut("pm1s_80.0", -79, p);
    const std::string title = "pm1s_80.0 reaches E0 = -79 (M=5, hx=1, D=30, <=10 restarts)";
    if (!main.found)
        return report(5, kBlocked, title,
                      main.detail + "; set HOPSWEEP_BIQMAC_DIR or add it under tests/data/biqmac/");
    std::string detail = main.detail;
    for (const auto& [name, e0] : {std::pair{"pm1s_80.1", -69.0}, std::pair{"pm1s_80.3", -66.0}}) {
        const MaxcutRun soft = run_maxcut(name, e0, p);
        detail += "; soft " + soft.detail + (soft.found ? (soft.reached ? " ok" : " missed") : "");
    }
    return report(5, main.reached ? kPass : kFail, title, detail);
}

int criterion6() {
    DriveParams p;
    p.m_steps = 10;
    p.hx = 1.0;
    p.eta = 0.3;
    p.sweep.max_bond = 30;
    p.sweep.nsweeps = 5;
    p.max_restarts = 10;
    const MaxcutRun r = run_maxcut("g05_60.0", -536, p);
    const std::string title = "g05_60.0 reaches -536 (soft, non-gating)";
    if (!r.found)
        return report(6, kBlocked, title, r.detail + "; set HOPSWEEP_BIQMAC_DIR or add it under tests/data/biqmac/");
    // soft: a miss is reported but does not fail the suite
    std::printf("criterion 6: %s  %s  [%s]\n", r.reached ? "PASS" : "SOFT-MISS", title.c_str(), r.detail.c_str());
    return kPass;
}

// ---- 7, 8: Sudoku end to end and trace properties ----

struct TraceCheck {
    double sx = 0.0, sz_offset = 0.0;
    std::size_t bond = 0;
    std::size_t n = 0;
    bool ok() const { return std::abs(sx) <= 1e-6 * static_cast<double>(n) && std::abs(sz_offset) <= 1e-6 && bond == 1; }
    std::string text() const {
        return fmt("final Sx %.2e (limit %.1e), Sz offset %.2e, bond %zu", sx, 1e-6 * static_cast<double>(n),
                   sz_offset, bond);
    }
};

struct SudokuRun {
    std::size_t clues = 0, spins = 0, n_up = 0;
    RunReport report;
    bool well_formed = false, verified = false;
    TraceCheck trace;
};

SudokuRun solve_sudoku(const sudoku::Board& clues, DriveParams p) {
    SudokuRun s;
    const auto [reduced, map] = sudoku::clamp(clues, sudoku::full_qubo(clues.n));
    const IsingModel m = to_ising(reduced);
    s.clues = clues.clue_count();
    s.spins = m.n;
    p.target_energy = 0.0;
    p.n_up_ground = 81 - s.clues;
    s.report = solve(m, p);
    s.n_up = s.report.configuration.count_up();
    const auto dec = sudoku::decode(s.report.configuration, map, clues);
    s.well_formed = dec.well_formed();
    s.verified = s.well_formed && sudoku::verify(dec.board).valid;
    s.trace = {s.report.steps.back().sx_total, s.report.steps.back().sz_total, s.report.final_bond, m.n};
    return s;
}

DriveParams sudoku_params() {
    DriveParams p;
    p.m_steps = 10;
    p.hx = 0.75;
    p.sweep.max_bond = 20;
    p.sweep.nsweeps = 5;
    p.init = {InitKind::random, 3};
    p.max_restarts = 5;
    return p;
}

int criterion7() {
    const auto t0 = Clock::now();
    // the first generated 24-26 clue puzzle with at least 180 free spins
    std::optional<sudoku::Puzzle> pz;
    for (std::uint64_t seed = 1; seed < 100 && !pz; ++seed) {
        auto cand = sudoku::generate_puzzle(3, 24 + seed % 3, seed);
        if (sudoku::clamp(cand.puzzle, sudoku::full_qubo(3)).second.free_count() >= 180) pz = cand;
    }
    if (!pz) return report(7, kFail, "end-to-end Sudoku", "no generated puzzle with N_s >= 180");
    DriveParams p = sudoku_params();
    p.seed = 7;
    const SudokuRun s = solve_sudoku(pz->puzzle, p);
    const double t = seconds_since(t0);
    const bool ok = s.report.classical_energy == 0.0 && s.verified && s.n_up == 81 - s.clues && t <= 3600.0 &&
                    s.report.restarts <= 5;
    return report(7, ok ? kPass : kFail, "generated Sudoku solved to energy 0 and verified",
                  fmt("%zu clues, N_s = %zu, energy %g, verified %s, N_up %zu (expect %zu), %zu restarts, %.0f s "
                      "(limit 3600 s); ",
                      s.clues, s.spins, s.report.classical_energy, s.verified ? "yes" : "no", s.n_up, 81 - s.clues,
                      s.report.restarts, t) +
                      s.trace.text());
}

int criterion8() {
    const auto t0 = Clock::now();
    std::size_t runs = 0, successes = 0, violations = 0;
    std::string worst;
    auto check = [&](const TraceCheck& tc, bool success, const std::string& label) {
        ++runs;
        if (!success) return;
        ++successes;
        if (!tc.ok()) {
            ++violations;
            worst += "; " + label + ": " + tc.text();
        }
    };
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        const auto pz = sudoku::generate_puzzle(3, 40, seed);
        DriveParams p = sudoku_params();
        p.seed = seed;
        const SudokuRun s = solve_sudoku(pz.puzzle, p);
        check(s.trace, s.verified && s.report.classical_energy == 0.0, fmt("sudoku seed %llu", (unsigned long long)seed));
    }
    // A degenerate ground space lets a product state keep a free spin in
    // superposition, so the properties are checked on unique ground states.
    std::size_t ising_runs = 0, degenerate_skipped = 0;
    for (std::uint64_t seed = 1; ising_runs < 10 && seed < 200; ++seed) {
        const IsingModel m = random_ising(16, 0.5, seed);
        const OracleResult exact = brute_force_ground(m);
        if (exact.degeneracy != 1) {
            ++degenerate_skipped;
            continue;
        }
        ++ising_runs;
        DriveParams p = criterion4_params();
        p.seed = seed;
        p.target_energy = exact.best_energy;
        const RunReport r = solve(m, p);
        // offset of Sz from the ground configuration's value
        double sz_ground = 0.0;
        for (Spin v : exact.best_configs.front().values) sz_ground += spin_value(v);
        TraceCheck tc{r.steps.back().sx_total, r.steps.back().sz_total - sz_ground, r.final_bond, m.n};
        check(tc, r.converged, fmt("ising seed %llu", (unsigned long long)seed));
    }
    const bool ok = successes > 0 && violations == 0;
    return report(8, ok ? kPass : kFail, "trace properties on successful runs",
                  fmt("%zu runs, %zu successful, %zu violations, %zu degenerate models skipped, %.1f s", runs,
                      successes, violations, degenerate_skipped, seconds_since(t0)) +
                      worst);
}

// ---- 9: invariant suites ----

int criterion9() {
    const auto t0 = Clock::now();
    std::vector<std::string> failed;
    auto expect = [&](bool cond, const std::string& what) {
        if (!cond) failed.push_back(what);
    };

    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        // canonical form residuals and norm preservation
        const MatrixProductState psi = random_mps(9, 6, seed);
        for (std::size_t c : {0u, 4u, 8u}) {
            const MatrixProductState moved = canonicalize(psi, c);
            expect(isometry_residual(moved) < 1e-12, fmt("isometry residual seed %llu center %zu", (unsigned long long)seed, c));
            expect(std::abs(inner(moved, psi) - 1.0) < 1e-12, "canonicalize changes the state");
        }

        // MPO expectations against dense matrices, and variational dominance
        Rng rng = Rng::stream(seed, StreamPurpose::test_data, 9);
        const auto terms = oracle::random_terms(7, 0.5, rng, true);
        const MatrixProductOperator h = compile(terms, 7, 0.3);
        const Eigen::MatrixXd dense = oracle::dense_operator(terms, 7, 0.3);
        const MatrixProductState phi = random_mps(7, 4, seed + 100);
        expect(std::abs(expectation(phi, h) - oracle::dense_expectation(dense, oracle::dense_state(phi))) < 1e-10,
               "MPO expectation differs from dense");
        SweepParams sp;
        sp.max_bond = 3;
        sp.nsweeps = 3;
        const double e = run(phi, h, sp).energy;
        expect(e >= oracle::ground_energy(dense) - 1e-10, "DMRG energy below the exact ground energy");

        // cut / QUBO duality and field-free MaxCut images
        const maxcut::Graph g = maxcut::random_graph(12, 0.4, maxcut::WeightKind::plus_minus_one, seed);
        const QuboModel q = maxcut::to_qubo(g);
        for (std::uint64_t s = 0; s < 4096; ++s) {
            const auto x = bits(s, 12);
            if (q.objective(x) != -maxcut::cut_value(g, x)) {
                failed.push_back("cut/QUBO duality");
                break;
            }
        }
        for (double hz : to_ising(q).hz) expect(hz == 0.0, "MaxCut image has a nonzero field");

        // rescaling preserves the minimizers
        const IsingModel m = random_ising(10, 0.5, seed);
        const auto [scaled, factor] = rescale(m);
        expect(brute_force_ground(scaled).best_configs == brute_force_ground(m).best_configs,
               "rescaling changes the minimizers");
        expect(factor > 0.0, "rescale factor must be positive");
    }
    const double t = seconds_since(t0);
    std::string detail = fmt("%zu failures, %.1f s", failed.size(), t);
    for (const auto& f : failed) detail += "; " + f;
    return report(9, failed.empty() ? kPass : kFail,
                  "invariants: canonical form, MPO vs dense, variational bound, cut duality, zero MaxCut fields", detail);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"hopsweep acceptance suite"};
    int criterion = 0;
    bool all = false;
    app.add_option("--criterion", criterion, "criterion number 1-9")->check(CLI::Range(1, 9));
    app.add_flag("--all", all, "run every criterion");
    CLI11_PARSE(app, argc, argv);
    if (!all && criterion == 0) {
        std::fprintf(stderr, "give --criterion N or --all\n");
        return 2;
    }
    const std::vector<std::function<int()>> table = {criterion1, criterion2, criterion3, criterion4, criterion5,
                                                     criterion6, criterion7, criterion8, criterion9};
    if (!all) return table[static_cast<std::size_t>(criterion - 1)]();
    int worst = kPass;
    for (const auto& c : table) {
        const int s = c();
        if (s == kFail) worst = kFail;
    }
    return worst;
}
