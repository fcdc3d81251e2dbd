#include <gtest/gtest.h>

#include <chrono>

#include "hopsweep/dmrg.hpp"
#include "oracles.hpp"

using namespace hopsweep;

namespace {

std::vector<OperatorTerm> tfim_chain(std::size_t n, double j, double hx) {
    std::vector<OperatorTerm> t;
    for (std::size_t m = 0; m + 1 < n; ++m) t.push_back(OperatorTerm::pair(j, m, OpKind::sz, m + 1, OpKind::sz));
    for (std::size_t m = 0; m < n; ++m) t.push_back(OperatorTerm::single(hx, m, OpKind::sx));
    return t;
}

DenseTensor vector_tensor(const Eigen::VectorXd& v) {
    return DenseTensor({"x"}, {static_cast<std::size_t>(v.size())}, std::vector<double>(v.data(), v.data() + v.size()));
}

}  // namespace

TEST(Lanczos, IdentityOperator) {
    DenseTensor g({"x"}, {5}, {1, 2, 3, 4, 5});
    EigenPair e = local_eigensolve([](const DenseTensor& x) { return x; }, g);
    EXPECT_NEAR(e.value, 1.0, 1e-14);
    EXPECT_NEAR(e.vector.norm(), 1.0, 1e-14);
}

TEST(Lanczos, KnownSpectrum) {
    // Q diag(-2, 0, 1, 3) Q^T for an orthogonal Q
    Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(Eigen::MatrixXd::Random(4, 4)).householderQ();
    Eigen::MatrixXd a = q * Eigen::Vector4d(-2, 0, 1, 3).asDiagonal() * q.transpose();
    auto apply = [&](const DenseTensor& x) {
        Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(x.data().data(), 4);
        return vector_tensor(a * v);
    };
    EigenPair e = local_eigensolve(apply, DenseTensor({"x"}, {4}, {1, 1, 1, 1}), {4, 1e-14, 4});
    EXPECT_NEAR(e.value, -2.0, 1e-10);
    EXPECT_LE(e.residual, 1e-10);
}

TEST(Lanczos, TwoSpinBlockMatchesDense) {
    std::vector<OperatorTerm> terms{OperatorTerm::pair(2.0, 0, OpKind::sz, 1, OpKind::sz),
                                    OperatorTerm::single(0.3, 0, OpKind::sz), OperatorTerm::single(-0.2, 1, OpKind::sz),
                                    OperatorTerm::single(0.7, 0, OpKind::sx), OperatorTerm::single(0.4, 1, OpKind::sx)};
    const Eigen::MatrixXd h = oracle::dense_operator(terms, 2);
    auto apply = [&](const DenseTensor& x) {
        Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(x.data().data(), 4);
        return vector_tensor(h * v);
    };
    EigenPair e = local_eigensolve(apply, DenseTensor({"x"}, {4}, {1, 0.5, 0.25, 1}));
    EXPECT_NEAR(e.value, oracle::ground_energy(h), 1e-10);
}

TEST(Lanczos, Errors) {
    auto id = [](const DenseTensor& x) { return x; };
    EXPECT_THROW(local_eigensolve(id, DenseTensor({"x"}, {3})), EigensolverError);
    auto bad = [](const DenseTensor& x) {
        DenseTensor y = x;
        y.data()[0] = std::numeric_limits<double>::infinity();
        return y;
    };
    EXPECT_THROW(local_eigensolve(bad, DenseTensor({"x"}, {3}, {1, 1, 1})), EigensolverError);
}

TEST(Dmrg, ClassicalFixedPoint) {
    std::vector<OperatorTerm> terms{OperatorTerm::single(1.0, 0, OpKind::sz), OperatorTerm::single(-1.0, 1, OpKind::sz),
                                    OperatorTerm::pair(1.0, 1, OpKind::sz, 2, OpKind::sz)};
    MatrixProductOperator h = compile(terms, 3, 0.5);
    MatrixProductState g = product_state({Spin::down, Spin::up, Spin::down});
    SweepOutcome out = sweep(g, h, {8, 1e-10, 4, 1e-14, 1});
    EXPECT_NEAR(out.energy, expectation(g, h), 1e-12);
    EXPECT_NEAR(std::abs(inner(out.state, g)), 1.0, 1e-12);
    EXPECT_EQ(out.state.max_bond(), 1u);
}

TEST(Dmrg, TransverseFieldChainMatchesExactDiagonalization) {
    const std::size_t n = 8;
    const auto terms = tfim_chain(n, 1.0, 1.0);
    MatrixProductOperator h = compile(terms, n);
    SweepOutcome out = run(random_mps(n, 2, 1), h, {16, 1e-10, 4, 1e-14, 5});
    const double exact = oracle::ground_energy(oracle::dense_operator(terms, n));
    EXPECT_NEAR(out.energy, exact, 1e-8);
    ASSERT_EQ(out.energy_history.size(), 5u);
    for (std::size_t k = 1; k < out.energy_history.size(); ++k)
        EXPECT_LE(out.energy_history[k], out.energy_history[k - 1] + 1e-7);
    EXPECT_LE(isometry_residual(out.state), 1e-10);
    EXPECT_NEAR(norm(out.state), 1.0, 1e-10);
}

TEST(Dmrg, SingleSweepRunEqualsSweep) {
    const auto terms = tfim_chain(6, 1.0, 0.8);
    MatrixProductOperator h = compile(terms, 6);
    SweepParams p{8, 1e-10, 4, 1e-14, 1};
    SweepOutcome a = run(random_mps(6, 2, 4), h, p), b = sweep(random_mps(6, 2, 4), h, p);
    EXPECT_EQ(a.energy, b.energy);
}

TEST(Dmrg, ClassicalModelCollapsesToProductState) {
    Rng rng = Rng::stream(21, StreamPurpose::test_data);
    const std::size_t n = 8;
    const auto terms = oracle::random_terms(n, 0.5, rng, false);
    MatrixProductOperator h = compile(terms, n);
    SweepOutcome out = run(random_mps(n, 4, 2), h, {16, 1e-10, 4, 1e-14, 4});
    EXPECT_EQ(out.state.max_bond(), 1u);
    EXPECT_NEAR(out.energy, oracle::ground_energy(oracle::dense_operator(terms, n)), 1e-9);
}

TEST(Dmrg, RandomLongRangeMatchesExactDiagonalization) {
    Rng rng = Rng::stream(22, StreamPurpose::test_data);
    const std::size_t n = 6;
    const auto terms = oracle::random_terms(n, 0.6, rng);
    MatrixProductOperator h = compile(terms, n, -1.5);
    SweepOutcome out = run(random_mps(n, 2, 3), h, {16, 1e-10, 4, 1e-14, 6});
    EXPECT_NEAR(out.energy, oracle::ground_energy(oracle::dense_operator(terms, n, -1.5)), 1e-7);
}

TEST(Dmrg, SingleSiteChain) {
    MatrixProductOperator h = compile({OperatorTerm::single(1.0, 0, OpKind::sx), OperatorTerm::single(0.5, 0, OpKind::sz)}, 1, 2.0);
    SweepOutcome out = run(product_state({Spin::up}), h, {4, 1e-10, 4, 1e-14, 2});
    EXPECT_NEAR(out.energy, 2.0 - 0.5 * std::sqrt(1.25), 1e-12);
}

TEST(Dmrg, RejectsBadInput) {
    MatrixProductOperator h = compile({OperatorTerm::single(1.0, 0, OpKind::sx)}, 2);
    EXPECT_THROW(run(random_mps(3, 2, 1), h, {}), std::invalid_argument);
    SweepParams bad;
    bad.krylov_dim = 1;
    EXPECT_THROW(run(random_mps(2, 2, 1), h, bad), std::invalid_argument);
}

TEST(DmrgProperty, VariationalBoundAndMonotonicity) {
    for (std::uint64_t trial = 0; trial < 8; ++trial) {
        Rng rng = Rng::stream(900 + trial, StreamPurpose::test_data);
        const std::size_t n = 4 + trial % 7;
        const auto terms = oracle::random_terms(n, 0.4, rng);
        MatrixProductOperator h = compile(terms, n);
        const double exact = oracle::ground_energy(oracle::dense_operator(terms, n));
        // a tight bond cap still never undercuts the exact ground energy
        SweepOutcome capped = run(random_mps(n, 2, trial), h, {4, 1e-10, 4, 1e-14, 4});
        for (double e : capped.energy_history) EXPECT_GE(e, exact - 1e-9);
        // without a binding cap only cutoff-level truncation remains
        SweepOutcome out = run(random_mps(n, 2, trial), h, {32, 1e-10, 4, 1e-14, 4});
        for (std::size_t k = 0; k < out.energy_history.size(); ++k) {
            EXPECT_GE(out.energy_history[k], exact - 1e-9);
            if (k > 0) EXPECT_LE(out.energy_history[k], out.energy_history[k - 1] + 1e-7);
        }
        EXPECT_LE(isometry_residual(out.state), 1e-10);
        EXPECT_NEAR(norm(out.state), 1.0, 1e-10);
    }
}

TEST(DmrgProperty, CostScalingSmoke) {
    const std::size_t n = 64;
    MatrixProductOperator h = compile(tfim_chain(n, 1.0, 1.0), n);
    auto timed = [&](std::size_t d) {
        TwoSiteDmrg engine(random_mps(n, d, 5), h, {d, 0.0, 4, 1e-14, 1, 1});
        const auto t0 = std::chrono::steady_clock::now();
        engine.sweep();
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    };
    timed(8);
    const double t16 = timed(16), t32 = timed(32);
    EXPECT_LE(t32 / t16, 10.0) << "t16=" << t16 << " t32=" << t32;
}
