#include <gtest/gtest.h>

#include "hopsweep/drive.hpp"
#include "hopsweep/oracle.hpp"
#include "oracles.hpp"

using namespace hopsweep;

namespace {

IsingModel random_qubo_model(std::size_t n, std::uint64_t seed, double density) {
    Rng rng = Rng::stream(seed, StreamPurpose::test_data);
    QuboModel q(n);
    for (std::size_t i = 0; i < n; ++i) {
        q.add(i, i, static_cast<double>(rng.below(5)) - 2.0);
        for (std::size_t j = i + 1; j < n; ++j)
            if (rng.uniform01() < density) q.add(i, j, static_cast<double>(rng.below(5)) - 2.0);
    }
    return to_ising(q);
}

DriveParams quick_params() {
    DriveParams p;
    p.m_steps = 5;
    p.hx = 1.0;
    p.sweep.max_bond = 16;
    p.sweep.nsweeps = 5;
    return p;
}

}  // namespace

TEST(LinearSchedule, Values) {
    const auto s10 = linear_schedule(10);
    for (std::size_t i = 0; i < 10; ++i) EXPECT_DOUBLE_EQ(s10[i].second, (i + 1) / 10.0);
    const auto s2 = linear_schedule(2);
    EXPECT_EQ(s2[0], std::make_pair(0.5, 0.5));
    EXPECT_EQ(s2[1], std::make_pair(0.0, 1.0));
    EXPECT_EQ(linear_schedule(5).back(), std::make_pair(0.0, 1.0));
    EXPECT_THROW(linear_schedule(1), std::invalid_argument);
}

TEST(NoisyField, RangeAndDeterminism) {
    Rng r0 = Rng::stream(1, StreamPurpose::transverse_noise);
    EXPECT_EQ(noisy_transverse_field(5, 1.3, 0.0, r0), std::vector<double>(5, 1.3));
    Rng r1 = Rng::stream(2, StreamPurpose::transverse_noise), r2 = Rng::stream(2, StreamPurpose::transverse_noise);
    const auto f = noisy_transverse_field(210, 1.3, 0.2, r1);
    for (double v : f) {
        EXPECT_GE(v, 1.1 - 1e-12);
        EXPECT_LE(v, 1.5 + 1e-12);
    }
    EXPECT_EQ(f, noisy_transverse_field(210, 1.3, 0.2, r2));
}

TEST(TraceObservables, MinusState) {
    MatrixProductOperator h = compile({OperatorTerm::single(1.0, 0, OpKind::sz)}, 4);
    Trace t = trace_observables(minus_product_state(4), h);
    EXPECT_NEAR(t.sx_total, -2.0, 1e-12);
    EXPECT_EQ(t.sz_sites.size(), 4u);
}

TEST(Solve, SingleSpinFieldAlignment) {
    IsingModel m(1);
    m.hz = {5.0};
    RunReport r = solve(m, quick_params());
    EXPECT_EQ(r.configuration.values[0], Spin::down);
    EXPECT_DOUBLE_EQ(r.classical_energy, -2.5);
    EXPECT_EQ(r.steps.size(), 5u);
}

TEST(Solve, FourteenSpinQuboReachesBruteForce) {
    IsingModel m = random_qubo_model(14, 3, 0.3);
    DriveParams p = quick_params();
    p.target_energy = brute_force_ground(m).best_energy;
    p.max_restarts = 3;
    RunReport r = solve(m, p);
    EXPECT_EQ(r.classical_energy, *p.target_energy);
    EXPECT_TRUE(r.converged);
    EXPECT_DOUBLE_EQ(ising_energy(m, r.configuration), r.classical_energy);
    EXPECT_LE(r.classical_energy, r.mps_energy + 1e-6);
}

TEST(Solve, DeterministicAndParallelMatchesSequential) {
    IsingModel m = random_qubo_model(10, 4, 0.4);
    DriveParams p = quick_params();
    p.eta = 0.2;
    p.init = {InitKind::random, 3};
    p.max_restarts = 3;
    p.target_energy = -1e9;  // unreachable: all attempts run
    RunReport a = solve(m, p), b = solve(m, p);
    EXPECT_EQ(a.attempt_energies, b.attempt_energies);
    EXPECT_EQ(a.configuration, b.configuration);
    ASSERT_EQ(a.steps.size(), b.steps.size());
    for (std::size_t i = 0; i < a.steps.size(); ++i) EXPECT_EQ(a.steps[i].energy, b.steps[i].energy);
    p.jobs = 3;
    RunReport c = solve(m, p);
    EXPECT_EQ(a.attempt_energies, c.attempt_energies);
    EXPECT_EQ(a.best_attempt, c.best_attempt);
    EXPECT_FALSE(a.converged);
    EXPECT_EQ(a.restarts, 3u);
}

TEST(Solve, RestartsAreIndependentStreams) {
    IsingModel m = random_qubo_model(8, 5, 0.5);
    DriveParams p = quick_params();
    p.eta = 0.3;
    p.max_restarts = 1;
    p.target_energy = -1e9;
    p.record_site_rows = false;
    std::vector<std::vector<double>> first_steps(2);
    solve(m, p, [&](std::size_t at, const StepRecord& s) { first_steps[at].push_back(s.energy); });
    DriveParams q = p;
    q.seed = p.seed + 1;
    std::vector<std::vector<double>> other(2);
    solve(m, q, [&](std::size_t at, const StepRecord& s) { other[at].push_back(s.energy); });
    EXPECT_NE(first_steps[1], other[1]);
    EXPECT_NE(first_steps[0], first_steps[1]);
}

TEST(Solve, RescaleKeepsUnscaledEnergies) {
    IsingModel m = random_qubo_model(9, 6, 0.5);
    for (auto& [k, j] : m.couplings) j *= 37.0;
    for (double& h : m.hz) h *= 37.0;
    m.constant *= 37.0;
    DriveParams p = quick_params();
    p.rescale = true;
    p.hx = 0.5;
    RunReport r = solve(m, p);
    EXPECT_GT(r.rescale_factor, 1.0);
    EXPECT_DOUBLE_EQ(r.classical_energy, ising_energy(m, r.configuration));
    EXPECT_NEAR(r.steps.back().energy, r.mps_energy, 1e-12);
}

TEST(Solve, FinalStepIsPureProblemHamiltonian) {
    IsingModel m = random_qubo_model(10, 7, 0.4);
    RunReport r = solve(m, quick_params());
    EXPECT_EQ(r.steps.back().a, 0.0);
    EXPECT_EQ(r.steps.back().b, 1.0);
    if (r.final_bond == 1) {
        EXPECT_NEAR(r.classical_energy, r.mps_energy, 1e-9);
        EXPECT_LE(std::abs(r.steps.back().sx_total), 1e-6 * 10);
    }
    EXPECT_LE(r.classical_energy, r.mps_energy + 1e-6);
}

TEST(Solve, RejectsBadParams) {
    DriveParams p = quick_params();
    p.m_steps = 1;
    EXPECT_THROW(solve(IsingModel(2), p), std::invalid_argument);
    EXPECT_THROW(solve(IsingModel(0), quick_params()), std::invalid_argument);
}

TEST(Solve, FinalStateAndCheckpointStart) {
    IsingModel m = random_qubo_model(8, 3, 0.5);
    DriveParams p = quick_params();
    p.init = {InitKind::random, 3};
    const RunReport a = solve(m, p);
    ASSERT_TRUE(a.final_state.has_value());
    EXPECT_EQ(a.final_state->max_bond(), a.final_bond);

    // the same initial tensors supplied explicitly reproduce the run
    const MatrixProductState start = random_mps(8, 3, p.seed, 0);
    DriveParams q = p;
    q.init = {InitKind::minus_product, 3};
    const RunReport b = solve(m, q, {}, &start);
    EXPECT_EQ(b.configuration, a.configuration);
    EXPECT_EQ(b.mps_energy, a.mps_energy);

    const MatrixProductState wrong = minus_product_state(5);
    EXPECT_THROW(solve(m, p, {}, &wrong), std::invalid_argument);
}
