#pragma once

// Discrete driving from a transverse-field Hamiltonian to the Ising problem
// Hamiltonian, with DMRG refinement at every step and seeded restarts.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <tuple>
#include <utility>
#include <vector>

#include "hopsweep/dmrg.hpp"
#include "hopsweep/mpo.hpp"
#include "hopsweep/mps.hpp"
#include "hopsweep/qubo.hpp"
#include "hopsweep/rng.hpp"

namespace hopsweep {

enum class InitKind { minus_product, random };

struct InitSpec {
    InitKind kind = InitKind::minus_product;
    std::size_t bond = 3;  ///< bond dimension of a random initial state
};

enum class NoisePolicy { per_step, per_run };

enum class ReadoutRule { threshold, projective };

struct DriveParams {
    std::size_t m_steps = 10;
    double hx = 1.0;
    double eta = 0.0;
    SweepParams sweep{};
    InitSpec init{};
    std::uint64_t seed = 1;
    std::size_t max_restarts = 0;
    std::optional<double> target_energy;
    std::optional<std::size_t> n_up_ground;
    bool rescale = false;
    NoisePolicy noise = NoisePolicy::per_step;
    std::size_t restart_bond = 3;  ///< bond dimension of the random state used by restarts
    std::size_t jobs = 1;          ///< attempts run concurrently
    double target_tol = 1e-9;      ///< classical energy counts as reaching the target within this slack
    bool record_site_rows = true;

    void validate() const {
        if (m_steps < 2) throw std::invalid_argument("m_steps must be at least 2");
        if (!std::isfinite(hx)) throw std::invalid_argument("hx must be finite");
        if (!(eta >= 0.0) || !std::isfinite(eta)) throw std::invalid_argument("eta must be finite and >= 0");
        if (init.bond < 1 || restart_bond < 1) throw std::invalid_argument("initial bond dimension must be >= 1");
        if (jobs < 1) throw std::invalid_argument("jobs must be at least 1");
        if (target_energy && !std::isfinite(*target_energy)) throw std::invalid_argument("target energy must be finite");
        sweep.validate();
    }
};

struct StepRecord {
    std::size_t step = 0;  ///< 1-based driving step i
    double a = 0.0;
    double b = 0.0;
    double energy = 0.0;  ///< <H_i> after the step, in the model's own units
    double sx_total = 0.0;
    double sz_total = 0.0;
    std::vector<double> sz_sites;
    std::size_t max_bond_reached = 1;
    std::size_t bond_after = 1;
    std::size_t sweeps_run = 0;
    double wall_seconds = 0.0;
};

struct Attempt {
    std::size_t index = 0;  ///< 0 for the first run, r for restart r
    std::vector<StepRecord> steps;
    SpinConfiguration configuration;
    ReadoutRule readout_used = ReadoutRule::threshold;
    double classical_energy = 0.0;
    double mps_energy = 0.0;
    std::size_t final_bond = 1;
    bool reached = false;
    double wall_seconds = 0.0;
    std::optional<MatrixProductState> final_state;
};

struct RunReport {
    std::vector<StepRecord> steps;  ///< of the returned attempt
    SpinConfiguration configuration;
    double classical_energy = 0.0;
    double mps_energy = 0.0;
    std::size_t final_bond = 1;
    std::size_t best_attempt = 0;
    std::size_t restarts = 0;  ///< restarts actually performed
    bool converged = false;    ///< target reached, or no target set
    double rescale_factor = 1.0;
    ReadoutRule readout_used = ReadoutRule::threshold;
    std::vector<double> attempt_energies;
    std::uint64_t seed = 0;
    DriveParams params;
    double wall_seconds = 0.0;
    std::optional<MatrixProductState> final_state;  ///< of the returned attempt
};

class DriveError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// (a_i, b_i) for i = 1..M with b_i = i/M and a_i = 1 - b_i.
inline std::vector<std::pair<double, double>> linear_schedule(std::size_t m_steps) {
    if (m_steps < 2) throw std::invalid_argument("linear_schedule needs at least 2 steps");
    std::vector<std::pair<double, double>> s;
    s.reserve(m_steps);
    for (std::size_t i = 1; i <= m_steps; ++i) {
        const double b = static_cast<double>(i) / static_cast<double>(m_steps);
        s.emplace_back(i == m_steps ? 0.0 : 1.0 - b, b);
    }
    return s;
}

/// hx + eta_m with eta_m uniform in [-eta, eta).
inline std::vector<double> noisy_transverse_field(std::size_t n, double hx, double eta, Rng& rng) {
    if (!(eta >= 0.0)) throw std::invalid_argument("eta must be nonnegative");
    std::vector<double> f(n, hx);
    if (eta == 0.0) return f;
    for (double& v : f) v += rng.uniform(-eta, eta);
    return f;
}

struct Trace {
    double energy = 0.0;
    double sx_total = 0.0;
    double sz_total = 0.0;
    std::vector<double> sz_sites;
};

inline Trace trace_observables(const MatrixProductState& state, const MatrixProductOperator& h,
                               std::optional<std::size_t> n_up_ground = std::nullopt) {
    Trace t;
    t.energy = expectation(state, h);
    t.sz_sites = expect_all_sites(state, spin_ops::sz);
    for (double v : expect_all_sites(state, spin_ops::sx)) t.sx_total += v;
    for (double v : t.sz_sites) t.sz_total += v;
    if (n_up_ground) t.sz_total -= static_cast<double>(*n_up_ground) - static_cast<double>(state.size()) / 2.0;
    return t;
}

using StepCallback = std::function<void(std::size_t attempt, const StepRecord&)>;

namespace detail {

inline std::vector<OperatorTerm> transverse_terms(const std::vector<double>& fields) {
    std::vector<OperatorTerm> t;
    t.reserve(fields.size());
    for (std::size_t m = 0; m < fields.size(); ++m)
        if (fields[m] != 0.0) t.push_back(OperatorTerm::single(fields[m], m, OpKind::sx));
    return t;
}

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

/// One pass through the schedule. `model` is the unscaled problem used for
/// readout; `scaled` and `factor` define the Hamiltonian actually driven.
inline Attempt drive_once(const IsingModel& model, const IsingModel& scaled, double factor, const DriveParams& p,
                          std::size_t index, const StepCallback& on_step,
                          const MatrixProductState* initial = nullptr) {
    const auto t0 = std::chrono::steady_clock::now();
    const std::size_t n = model.n;
    const IsingTerms terms = to_operator_terms(scaled);
    const std::vector<OperatorTerm> problem = terms.problem_terms();

    MatrixProductState state = [&] {
        if (index == 0 && initial) return *initial;
        if (index == 0 && p.init.kind == InitKind::minus_product) return minus_product_state(n);
        return random_mps(n, index == 0 ? p.init.bond : p.restart_bond, p.seed, index);
    }();
    Rng noise = Rng::stream(p.seed, StreamPurpose::transverse_noise, index);
    std::vector<double> fields = noisy_transverse_field(n, p.hx, p.eta, noise);

    Attempt at;
    at.index = index;
    const auto schedule = linear_schedule(p.m_steps);
    for (std::size_t i = 0; i < schedule.size(); ++i) {
        const auto ts = std::chrono::steady_clock::now();
        const auto [a, b] = schedule[i];
        if (i > 0 && p.noise == NoisePolicy::per_step) fields = noisy_transverse_field(n, p.hx, p.eta, noise);
        const MatrixProductOperator h = mix(transverse_terms(fields), problem, a, b, terms.constant, n);
        std::optional<SweepOutcome> swept;
        try {
            swept = run(state, h, p.sweep);
        } catch (const std::exception& e) {
            throw DriveError("driving step " + std::to_string(i + 1) + ": " + e.what());
        }
        SweepOutcome& out = *swept;
        state = std::move(out.state);
        Trace tr = trace_observables(state, h, p.n_up_ground);
        StepRecord rec;
        rec.step = i + 1;
        rec.a = a;
        rec.b = b;
        rec.energy = out.energy * factor;
        rec.sx_total = tr.sx_total;
        rec.sz_total = tr.sz_total;
        if (p.record_site_rows) rec.sz_sites = std::move(tr.sz_sites);
        rec.max_bond_reached = out.max_bond_reached;
        rec.bond_after = state.max_bond();
        rec.sweeps_run = out.energy_history.size();
        rec.wall_seconds = seconds_since(ts);
        if (on_step) on_step(index, rec);
        at.steps.push_back(std::move(rec));
    }

    at.mps_energy = at.steps.back().energy;
    at.final_bond = state.max_bond();
    const SpinConfiguration by_threshold = readout(state);
    const double e_threshold = ising_energy(model, by_threshold);
    at.configuration = by_threshold;
    at.classical_energy = e_threshold;
    if (at.final_bond > 1) {
        // a non-product final state: projection can resolve superpositions
        // of degenerate minima that thresholding would average away
        const SpinConfiguration by_projection = project_readout(state);
        const double e_projection = ising_energy(model, by_projection);
        if (e_projection < e_threshold) {
            at.configuration = by_projection;
            at.classical_energy = e_projection;
            at.readout_used = ReadoutRule::projective;
        }
    }
    at.reached = !p.target_energy || at.classical_energy <= *p.target_energy + p.target_tol;
    at.final_state = std::move(state);
    at.wall_seconds = seconds_since(t0);
    return at;
}

}  // namespace detail

/// Algorithm driver: up to 1 + max_restarts attempts, stopping at the first
/// that reaches the target. The returned attempt has the lowest classical
/// energy (lowest index on ties). With jobs > 1 attempts run in batches; the
/// result is identical to the sequential one. `initial`, when given, replaces
/// the initial state of the first attempt (a saved checkpoint).
inline RunReport solve(const IsingModel& model, const DriveParams& params, const StepCallback& on_step = {},
                       const MatrixProductState* initial = nullptr) {
    model.validate();
    params.validate();
    if (model.n == 0) throw std::invalid_argument("solve needs a nonempty model");
    if (initial && initial->size() != model.n)
        throw std::invalid_argument("initial state has " + std::to_string(initial->size()) + " sites, model has " +
                                    std::to_string(model.n));
    const auto t0 = std::chrono::steady_clock::now();

    IsingModel scaled = model;
    double factor = 1.0;
    if (params.rescale && model.nonzero_couplings() > 0) std::tie(scaled, factor) = rescale(model);

    std::vector<Attempt> attempts;
    const std::size_t total = params.max_restarts + 1;
    bool reached = false;
    for (std::size_t start = 0; start < total && !reached; start += params.jobs) {
        const std::size_t count = std::min(params.jobs, total - start);
        std::vector<Attempt> batch(count);
        if (count == 1) {
            batch[0] = detail::drive_once(model, scaled, factor, params, start, on_step, initial);
        } else {
            std::vector<std::exception_ptr> errors(count);
            std::vector<std::thread> workers;
            for (std::size_t k = 0; k < count; ++k)
                workers.emplace_back([&, k] {
                    try {
                        batch[k] = detail::drive_once(model, scaled, factor, params, start + k, on_step, initial);
                    } catch (...) {
                        errors[k] = std::current_exception();
                    }
                });
            for (auto& w : workers) w.join();
            for (auto& e : errors)
                if (e) std::rethrow_exception(e);
        }
        for (Attempt& a : batch) {
            if (reached) break;
            reached = a.reached;
            attempts.push_back(std::move(a));
        }
    }

    std::size_t best = 0;
    for (std::size_t k = 1; k < attempts.size(); ++k)
        if (attempts[k].classical_energy < attempts[best].classical_energy) best = k;

    RunReport r;
    r.steps = attempts[best].steps;
    r.configuration = attempts[best].configuration;
    r.classical_energy = attempts[best].classical_energy;
    r.mps_energy = attempts[best].mps_energy;
    r.final_bond = attempts[best].final_bond;
    r.readout_used = attempts[best].readout_used;
    r.best_attempt = best;
    r.restarts = attempts.size() - 1;
    r.converged = attempts[best].reached;
    r.rescale_factor = factor;
    for (const Attempt& a : attempts) r.attempt_energies.push_back(a.classical_energy);
    r.seed = params.seed;
    r.params = params;
    r.final_state = std::move(attempts[best].final_state);
    r.wall_seconds = detail::seconds_since(t0);
    return r;
}

}  // namespace hopsweep
