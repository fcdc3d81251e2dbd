// hopsweep command line: Sudoku, MaxCut and QUBO solving by discrete driving
// with DMRG, coupling analysis, and exhaustive reference solutions.
//
// Exit status: 0 target reached or board verified, 2 finished without
// reaching the target, 1 input or runtime error.

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hopsweep/hopsweep.hpp"

namespace fs = std::filesystem;
using namespace hopsweep;
using io::json;

namespace {

constexpr int kExitReached = 0;
constexpr int kExitError = 1;
constexpr int kExitNotReached = 2;

// ---- shared drive options ----

struct DriveFlags {
    std::string config;
    std::optional<std::size_t> steps, bond_dim, sweeps, restarts, jobs;
    std::optional<double> hx, eta, target_energy, reference;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> init, noise, out, resume;
    bool rescale = false, early_exit = false, verbose = false, save_state = false;
};

void add_drive_flags(CLI::App* cmd, DriveFlags& f) {
    cmd->add_option("--config", f.config, "JSON configuration; command line flags take precedence")
        ->check(CLI::ExistingFile);
    cmd->add_option("--steps", f.steps, "driving steps M")->check(CLI::Range(2, 1000000));
    cmd->add_option("--hx", f.hx, "transverse field strength");
    cmd->add_option("--eta", f.eta, "transverse field noise amplitude")->check(CLI::NonNegativeNumber);
    cmd->add_option("--bond-dim,-D", f.bond_dim, "maximum bond dimension")->check(CLI::PositiveNumber);
    cmd->add_option("--sweeps", f.sweeps, "DMRG sweeps per driving step")->check(CLI::PositiveNumber);
    cmd->add_option("--seed", f.seed, "random seed");
    cmd->add_option("--restarts", f.restarts, "restarts allowed when the target is missed");
    cmd->add_option("--target-energy", f.target_energy, "stop once a classical energy this low is found");
    cmd->add_option("--reference", f.reference, "known optimum E0 to compare against (also the default target)");
    cmd->add_flag("--rescale", f.rescale, "divide the model by its largest coupling before driving");
    cmd->add_option("--init", f.init, "initial state: minus or random:D");
    cmd->add_option("--noise", f.noise, "noise redraw policy: per_step or per_run")
        ->check(CLI::IsMember({"per_step", "per_run"}));
    cmd->add_flag("--early-exit", f.early_exit, "stop sweeping a step once its energy stalls");
    cmd->add_option("--jobs", f.jobs, "attempts run concurrently")->check(CLI::PositiveNumber);
    cmd->add_option("--out", f.out, "output directory (default: $HOPSWEEP_OUT or ./hopsweep-out)");
    cmd->add_flag("--save-state", f.save_state, "write the final MPS as state.json");
    cmd->add_option("--resume", f.resume, "start the first attempt from a saved MPS")->check(CLI::ExistingFile);
    cmd->add_flag("-v,--verbose", f.verbose, "print every driving step to stderr");
}

const std::set<std::string> kConfigExtras = {"instance", "out", "reference", "verbose", "coupling",
                                             "format",   "save_state", "resume"};

struct Settings {
    DriveParams params;
    json config = json::object();
    std::optional<std::string> instance;
    std::optional<double> reference;
    std::string out;
    bool verbose = false, save_state = false;
    std::optional<std::string> resume;
};

std::string default_out() {
    const char* env = std::getenv("HOPSWEEP_OUT");
    return env && *env ? env : "hopsweep-out";
}

/// defaults < configuration file < command line flags
Settings resolve(const DriveFlags& f, DriveParams defaults) {
    Settings s;
    s.params = std::move(defaults);
    if (!f.config.empty()) {
        s.config = io::parse_json(io::read_text(f.config), f.config);
        io::apply_params(s.config, s.params, kConfigExtras);
        auto str = [&](const char* k) -> std::optional<std::string> {
            if (!s.config.contains(k)) return std::nullopt;
            if (!s.config.at(k).is_string()) throw io::FormatError(std::string("configuration: '") + k + "' must be a string");
            return s.config.at(k).get<std::string>();
        };
        s.instance = str("instance");
        s.resume = str("resume");
        if (auto o = str("out")) s.out = *o;
        if (s.config.contains("reference")) {
            if (!s.config.at("reference").is_number()) throw io::FormatError("configuration: 'reference' must be a number");
            s.reference = s.config.at("reference").get<double>();
        }
        if (s.config.contains("verbose")) s.verbose = s.config.at("verbose").get<bool>();
        if (s.config.contains("save_state")) s.save_state = s.config.at("save_state").get<bool>();
    }
    DriveParams& p = s.params;
    if (f.steps) p.m_steps = *f.steps;
    if (f.hx) p.hx = *f.hx;
    if (f.eta) p.eta = *f.eta;
    if (f.bond_dim) p.sweep.max_bond = *f.bond_dim;
    if (f.sweeps) p.sweep.nsweeps = *f.sweeps;
    if (f.seed) p.seed = *f.seed;
    if (f.restarts) p.max_restarts = *f.restarts;
    if (f.jobs) p.jobs = *f.jobs;
    if (f.target_energy) p.target_energy = *f.target_energy;
    if (f.rescale) p.rescale = true;
    if (f.early_exit) p.sweep.early_exit = true;
    if (f.init) p.init = io::init_from_string(*f.init);
    if (f.noise) p.noise = *f.noise == "per_run" ? NoisePolicy::per_run : NoisePolicy::per_step;
    if (f.reference) s.reference = *f.reference;
    if (f.out) s.out = *f.out;
    if (f.resume) s.resume = *f.resume;
    if (f.verbose) s.verbose = true;
    if (f.save_state) s.save_state = true;
    if (s.out.empty()) s.out = default_out();
    if (!p.target_energy && s.reference) p.target_energy = *s.reference;
    p.validate();
    return s;
}

StepCallback progress(bool verbose) {
    if (!verbose) return {};
    return [](std::size_t attempt, const StepRecord& r) {
        std::fprintf(stderr, "attempt %zu step %zu  a=%.3f b=%.3f  E=%.10g  Sx=%.3e  Sz=%.3e  bond=%zu  %.2fs\n",
                     attempt, r.step, r.a, r.b, r.energy, r.sx_total, r.sz_total, r.bond_after, r.wall_seconds);
    };
}

void write_outputs(const fs::path& dir, const RunReport& r, const json& extra, bool save_state) {
    fs::create_directories(dir);
    io::write_text((dir / "report.json").string(), io::report_to_json(r, extra).dump(2) + "\n");
    io::write_text((dir / "trace.csv").string(), io::trace_csv(r.steps));
    io::write_text((dir / "heatmap.csv").string(), io::heatmap_csv(r.steps));
    if (save_state && r.final_state) io::write_text((dir / "state.json").string(), io::mps_to_json(*r.final_state).dump() + "\n");
}

std::optional<MatrixProductState> load_resume(const Settings& s) {
    if (!s.resume) return std::nullopt;
    return io::mps_from_json(io::parse_json(io::read_text(*s.resume), *s.resume));
}

// ---- instances ----

enum class Format { qubo, biqmac, sudoku };

Format detect_format(const std::string& path, const std::string& requested) {
    if (requested == "qubo") return Format::qubo;
    if (requested == "biqmac") return Format::biqmac;
    if (requested == "sudoku") return Format::sudoku;
    if (fs::path(path).extension() == ".json") return Format::qubo;
    const std::string text = io::read_text(path);
    try {
        maxcut::parse_biqmac(text);
        return Format::biqmac;
    } catch (const maxcut::GraphFormatError&) {
    }
    try {
        sudoku::parse_board(text);
        return Format::sudoku;
    } catch (const sudoku::BoardFormatError&) {
    }
    throw std::invalid_argument("cannot tell the format of '" + path + "'; pass --format");
}

sudoku::PairCoupling coupling_mode(const std::string& s) {
    return s == "accumulate" ? sudoku::PairCoupling::accumulate : sudoku::PairCoupling::unit;
}

/// Any supported instance reduced to an Ising model, with enough context to
/// interpret the solution.
struct Loaded {
    Format format;
    IsingModel model;
    std::optional<maxcut::Graph> graph;
    std::optional<sudoku::Board> board;
    std::optional<sudoku::ClampMap> clamp;
};

Loaded load_instance(const std::string& path, const std::string& format, const std::string& coupling) {
    Loaded l{detect_format(path, format), IsingModel(), {}, {}, {}};
    switch (l.format) {
        case Format::qubo:
            l.model = to_ising(io::read_qubo(path));
            break;
        case Format::biqmac:
            l.graph = maxcut::read_biqmac(path);
            l.model = to_ising(maxcut::to_qubo(*l.graph));
            break;
        case Format::sudoku: {
            l.board = sudoku::parse_board(io::read_text(path));
            sudoku::check_clues(*l.board);
            auto [reduced, map] = sudoku::clamp(*l.board, sudoku::full_qubo(l.board->n, coupling_mode(coupling)));
            l.model = to_ising(reduced);
            l.clamp = std::move(map);
            break;
        }
    }
    return l;
}

std::vector<std::string> expand_paths(const std::vector<std::string>& inputs) {
    std::vector<std::string> out;
    for (const std::string& in : inputs) {
        if (fs::is_directory(in)) {
            std::vector<std::string> files;
            for (const auto& e : fs::directory_iterator(in))
                if (e.is_regular_file()) files.push_back(e.path().string());
            std::sort(files.begin(), files.end());
            out.insert(out.end(), files.begin(), files.end());
        } else if (fs::exists(in)) {
            out.push_back(in);
        } else {
            throw std::invalid_argument("no such file or directory: '" + in + "'");
        }
    }
    if (out.empty()) throw std::invalid_argument("no instances given");
    return out;
}

std::string energy_text(double e) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", e);
    return buf;
}

// ---- sudoku ----

struct SudokuArgs {
    DriveFlags drive;
    std::optional<std::string> board;
    std::optional<std::size_t> generate;
    std::uint64_t puzzle_seed = 1;
    std::optional<std::string> coupling;
};

int run_sudoku(SudokuArgs& a) {
    DriveParams defaults;
    defaults.m_steps = 10;
    defaults.hx = 0.7;
    defaults.sweep.max_bond = 60;
    defaults.sweep.nsweeps = 5;
    Settings s = resolve(a.drive, defaults);
    const std::string coupling = a.coupling                          ? *a.coupling
                                 : s.config.contains("coupling") ? s.config.at("coupling").get<std::string>()
                                                                  : "unit";
    if (coupling != "unit" && coupling != "accumulate") throw std::invalid_argument("coupling must be unit or accumulate");

    sudoku::Board clues;
    std::string instance;
    if (a.generate) {
        clues = sudoku::generate_puzzle(3, *a.generate, a.puzzle_seed).puzzle;
        instance = "generated:" + std::to_string(*a.generate) + ":" + std::to_string(a.puzzle_seed);
    } else {
        const auto path = a.board ? a.board : s.instance;
        if (!path) throw std::invalid_argument("give a board file or --generate CLUES");
        clues = sudoku::parse_board(io::read_text(*path));
        instance = *path;
    }
    try {
        sudoku::check_clues(clues);
    } catch (const sudoku::ClueConflict& e) {
        std::cerr << "error: inconsistent clues: " << e.what() << "\n";
        return kExitError;
    }
    const std::size_t cells = clues.side() * clues.side();
    std::cout << "puzzle (" << clues.clue_count() << " clues):\n" << sudoku::pretty(clues) << "\n";
    if (clues.complete()) {
        std::cout << "board is already complete; no free spins\n";
        return sudoku::verify(clues).valid ? kExitReached : kExitNotReached;
    }

    auto [reduced, map] = sudoku::clamp(clues, sudoku::full_qubo(clues.n, coupling_mode(coupling)));
    const IsingModel model = to_ising(reduced);
    if (!s.params.target_energy) s.params.target_energy = 0.0;
    if (!s.params.n_up_ground) s.params.n_up_ground = cells - clues.clue_count();
    std::cout << "free spins: " << model.n << ", couplings: " << model.nonzero_couplings() << "\n";

    const auto resume = load_resume(s);
    const RunReport r = solve(model, s.params, progress(s.verbose), resume ? &*resume : nullptr);
    const sudoku::DecodeResult dec = sudoku::decode(r.configuration, map, clues);
    bool verified = false;
    std::vector<std::string> problems;
    if (dec.well_formed()) {
        const sudoku::Verdict v = sudoku::verify(dec.board);
        verified = v.valid;
        problems = v.violations;
    } else {
        for (const auto& issue : dec.issues)
            problems.push_back("cell (" + std::to_string(issue.row + 1) + ", " + std::to_string(issue.col + 1) +
                               ") has " + std::to_string(issue.digits.size()) + " digits");
    }
    const bool solved = verified && r.classical_energy == 0.0;

    std::cout << "\n" << sudoku::pretty(dec.board, &clues) << "\n";
    std::cout << "energy " << energy_text(r.classical_energy) << ", final bond " << r.final_bond << ", attempts "
              << r.restarts + 1 << ", " << energy_text(r.wall_seconds) << " s\n";
    std::cout << (solved ? "verified" : "NOT verified") << "\n";
    for (const auto& p : problems) std::cout << "  " << p << "\n";

    json extra = {{"instance", instance},     {"clues", clues.clue_count()}, {"spins", model.n},
                  {"coupling", coupling},     {"verified", solved},          {"problems", problems},
                  {"solution", sudoku::format_board(dec.board)}};
    const fs::path dir(s.out);
    write_outputs(dir, r, extra, s.save_state);
    io::write_text((dir / "solution.txt").string(), sudoku::pretty(dec.board, &clues));
    std::cout << "wrote " << dir.string() << "\n";
    return solved ? kExitReached : kExitNotReached;
}

// ---- maxcut / qubo ----

struct SolveArgs {
    DriveFlags drive;
    std::vector<std::string> inputs;
};

int run_maxcut(SolveArgs& a) {
    Settings s = resolve(a.drive, DriveParams{});
    std::vector<std::string> inputs = a.inputs;
    if (inputs.empty() && s.instance) inputs.push_back(*s.instance);
    const auto paths = expand_paths(inputs);
    if (s.reference && paths.size() > 1) throw std::invalid_argument("--reference needs a single instance");
    const auto resume = load_resume(s);

    bool all_reached = true;
    for (const std::string& path : paths) {
        const maxcut::Graph g = maxcut::read_biqmac(path);
        const IsingModel model = to_ising(maxcut::to_qubo(g));
        const RunReport r = solve(model, s.params, progress(s.verbose), resume ? &*resume : nullptr);
        const double cut = maxcut::cut_value(g, r.configuration.to_binary());
        const bool match = s.reference && -cut == *s.reference;
        const bool reached = s.reference ? match : r.converged;
        all_reached = all_reached && reached;

        std::cout << fs::path(path).filename().string() << ": vertices " << g.n_vertices << ", edges "
                  << g.edges.size() << ", cut " << energy_text(cut) << ", energy " << energy_text(r.classical_energy);
        if (s.reference) std::cout << ", reference " << energy_text(*s.reference) << ", match=" << (match ? "true" : "false");
        std::cout << ", attempts " << r.restarts + 1 << ", " << energy_text(r.wall_seconds) << " s\n";

        json extra = {{"instance", path}, {"cut", cut}, {"vertices", g.n_vertices}, {"edges", g.edges.size()}};
        if (s.reference) {
            extra["reference"] = *s.reference;
            extra["match"] = match;
        }
        const fs::path dir = paths.size() == 1 ? fs::path(s.out) : fs::path(s.out) / fs::path(path).stem();
        write_outputs(dir, r, extra, s.save_state);
    }
    return all_reached ? kExitReached : kExitNotReached;
}

int run_qubo(SolveArgs& a) {
    Settings s = resolve(a.drive, DriveParams{});
    std::vector<std::string> inputs = a.inputs;
    if (inputs.empty() && s.instance) inputs.push_back(*s.instance);
    if (inputs.size() != 1) throw std::invalid_argument("qubo takes exactly one QUBO JSON file");
    const QuboModel q = io::read_qubo(inputs[0]);
    const IsingModel model = to_ising(q);
    const auto resume = load_resume(s);
    const RunReport r = solve(model, s.params, progress(s.verbose), resume ? &*resume : nullptr);
    const bool match = s.reference && r.classical_energy <= *s.reference + s.params.target_tol;
    std::cout << "variables " << q.size() << ", objective " << energy_text(r.classical_energy) << "\n"
              << "x = " << io::spins_to_string(r.configuration) << "\n";
    if (s.reference) std::cout << "reference " << energy_text(*s.reference) << ", match=" << (match ? "true" : "false") << "\n";
    json extra = {{"instance", inputs[0]}, {"objective", q.objective(r.configuration.to_binary())}};
    write_outputs(fs::path(s.out), r, extra, s.save_state);
    return (s.reference ? match : r.converged) ? kExitReached : kExitNotReached;
}

// ---- analyze ----

struct AnalyzeArgs {
    std::string input;
    std::string format = "auto";
    std::string coupling = "unit";
    std::optional<std::string> out;
};

int run_analyze(AnalyzeArgs& a) {
    const Loaded l = load_instance(a.input, a.format, a.coupling);
    const fs::path dir(a.out ? *a.out : default_out());
    fs::create_directories(dir);
    io::write_text((dir / "fields.csv").string(), io::fields_csv(l.model));
    std::cout << "spins " << l.model.n << ", couplings " << l.model.nonzero_couplings() << "\n";
    if (l.model.n >= 2) {
        const GlassProfile g = characterize(l.model);
        io::write_text((dir / "filling.csv").string(), io::filling_csv(g));
        std::cout << "hz mean " << energy_text(g.hz_mean) << ", hz std " << energy_text(g.hz_std) << "\n";
        for (std::size_t d = 1; d <= std::min<std::size_t>(3, g.rho.size()); ++d)
            std::cout << "rho(" << d << ") = " << energy_text(g.rho[d - 1]) << "\n";
    }
    // the (reduced) problem in the common exchange format
    const QuboModel q = from_ising(l.model);
    io::write_text((dir / "qubo.json").string(), io::qubo_to_json(q).dump(1) + "\n");
    std::cout << "wrote " << dir.string() << "\n";
    return kExitReached;
}

// ---- oracle ----

struct OracleArgs {
    std::optional<std::string> input;
    std::optional<std::size_t> random_n;
    double density = 0.5;
    std::uint64_t seed = 1;
    std::string method = "brute";
    std::string format = "auto";
    std::string coupling = "unit";
};

int run_oracle(OracleArgs& a) {
    if (a.input.has_value() == a.random_n.has_value())
        throw std::invalid_argument("give either an instance file or --random N");
    Loaded l = a.input ? load_instance(*a.input, a.format, a.coupling)
                       : Loaded{Format::qubo, random_ising(*a.random_n, a.density, a.seed), {}, {}, {}};
    const std::size_t n = l.model.n;
    if (a.method == "dense") {
        const IsingTerms t = to_operator_terms(l.model);
        const double e = dense_ground_energy({}, t.problem_terms(), 0.0, 1.0, t.constant, n);
        std::cout << "spins " << n << "\nground energy " << energy_text(e) << "\n";
        return kExitReached;
    }
    const OracleResult r = brute_force_ground(l.model);
    std::cout << "spins " << n << "\nground energy " << energy_text(r.best_energy) << "\ndegeneracy " << r.degeneracy
              << "\nminimizer " << io::spins_to_string(r.best_configs.front()) << "\n";
    if (l.graph) std::cout << "max cut " << energy_text(maxcut::cut_value(*l.graph, r.best_configs.front().to_binary())) << "\n";
    if (l.board) {
        const auto dec = sudoku::decode(r.best_configs.front(), *l.clamp, *l.board);
        std::cout << sudoku::pretty(dec.board, &*l.board);
    }
    return kExitReached;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Ground states of QUBO, MaxCut and Sudoku instances by discrete driving with DMRG"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "hopsweep 1.0");

    SudokuArgs sud;
    auto* c_sud = app.add_subcommand("sudoku", "solve a Sudoku board");
    c_sud->add_option("board", sud.board, "board file (81 characters, '.' or '0' for empty cells)");
    c_sud->add_option("--generate", sud.generate, "solve a generated puzzle with this many clues")
        ->check(CLI::Range(17, 81))
        ->excludes(c_sud->get_option("board"));
    c_sud->add_option("--puzzle-seed", sud.puzzle_seed, "seed of the generated puzzle");
    c_sud->add_option("--coupling", sud.coupling, "pair coupling convention: unit or accumulate")
        ->check(CLI::IsMember({"unit", "accumulate"}));
    add_drive_flags(c_sud, sud.drive);

    SolveArgs mc;
    auto* c_mc = app.add_subcommand("maxcut", "solve Biq Mac MaxCut instances (files or directories)");
    c_mc->add_option("instances", mc.inputs, "instance files or directories");
    add_drive_flags(c_mc, mc.drive);

    SolveArgs qb;
    auto* c_qb = app.add_subcommand("qubo", "solve a QUBO JSON file");
    c_qb->add_option("instance", qb.inputs, "QUBO JSON file");
    add_drive_flags(c_qb, qb.drive);

    AnalyzeArgs an;
    auto* c_an = app.add_subcommand("analyze", "write field and coupling statistics as CSV");
    c_an->add_option("instance", an.input, "QUBO JSON, Biq Mac or Sudoku file")->required()->check(CLI::ExistingFile);
    c_an->add_option("--format", an.format, "auto, qubo, biqmac or sudoku")
        ->check(CLI::IsMember({"auto", "qubo", "biqmac", "sudoku"}));
    c_an->add_option("--coupling", an.coupling, "Sudoku pair coupling: unit or accumulate")
        ->check(CLI::IsMember({"unit", "accumulate"}));
    c_an->add_option("--out", an.out, "output directory");

    OracleArgs orc;
    auto* c_or = app.add_subcommand("oracle", "exact ground state of a small instance");
    c_or->add_option("instance", orc.input, "QUBO JSON, Biq Mac or Sudoku file")->check(CLI::ExistingFile);
    c_or->add_option("--random", orc.random_n, "use a random Ising model with this many spins");
    c_or->add_option("--density", orc.density, "coupling density of the random model")->check(CLI::Range(0.0, 1.0));
    c_or->add_option("--seed", orc.seed, "seed of the random model");
    c_or->add_option("--method", orc.method, "brute (exhaustive) or dense (diagonalization)")
        ->check(CLI::IsMember({"brute", "dense"}));
    c_or->add_option("--format", orc.format, "auto, qubo, biqmac or sudoku")
        ->check(CLI::IsMember({"auto", "qubo", "biqmac", "sudoku"}));
    c_or->add_option("--coupling", orc.coupling, "Sudoku pair coupling: unit or accumulate")
        ->check(CLI::IsMember({"unit", "accumulate"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitError;
    }

    try {
        if (c_sud->parsed()) return run_sudoku(sud);
        if (c_mc->parsed()) return run_maxcut(mc);
        if (c_qb->parsed()) return run_qubo(qb);
        if (c_an->parsed()) return run_analyze(an);
        if (c_or->parsed()) return run_oracle(orc);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    }
    return kExitError;
}
