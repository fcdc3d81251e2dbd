#pragma once

// Exhaustive and dense-diagonalization references for small instances.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hopsweep/mpo.hpp"
#include "hopsweep/qubo.hpp"

namespace hopsweep {

inline constexpr std::size_t kBruteForceMaxSpins = 24;
inline constexpr std::size_t kDenseMaxSpins = 12;
/// At most this many minimizers are kept; `degeneracy` still counts all.
inline constexpr std::size_t kMaxStoredMinimizers = 4096;

struct OracleResult {
    double best_energy = 0.0;
    std::vector<SpinConfiguration> best_configs;  ///< lexicographically sorted (up < down)
    std::uint64_t degeneracy = 0;
    std::uint64_t evaluated_count = 0;
};

class OracleCapError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Gray-code enumeration of all 2^n configurations with incremental energy
/// updates. Inputs that are multiples of 1/4 are summed exactly.
inline OracleResult brute_force_ground(const IsingModel& m, double degeneracy_tol = 1e-9) {
    m.validate();
    if (m.n > kBruteForceMaxSpins)
        throw OracleCapError("brute_force_ground is capped at " + std::to_string(kBruteForceMaxSpins) +
                             " spins (got " + std::to_string(m.n) + ")");
    const std::size_t n = m.n;
    std::vector<double> j(n * n, 0.0);
    for (const auto& [mn, v] : m.couplings) {
        j[mn.first * n + mn.second] += v;
        j[mn.second * n + mn.first] += v;
    }
    // start from all spins down; bit k of `state` set means spin k is up
    std::vector<double> s(n, -0.5), field(m.hz);
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b) field[a] += j[a * n + b] * s[b];
    double e = m.constant;
    for (std::size_t k = 0; k < n; ++k) e += m.hz[k] * s[k];
    for (const auto& [mn, v] : m.couplings) e += v * s[mn.first] * s[mn.second];

    const double tol = degeneracy_tol * std::max(1.0, coefficient_norm(m));
    OracleResult r;
    r.best_energy = std::numeric_limits<double>::infinity();
    std::vector<std::uint32_t> best;
    auto consider = [&](std::uint32_t state) {
        if (e < r.best_energy - tol) {
            r.best_energy = e;
            best.clear();
            r.degeneracy = 0;
        }
        if (std::abs(e - r.best_energy) <= tol) {
            r.best_energy = std::min(r.best_energy, e);
            ++r.degeneracy;
            if (best.size() < kMaxStoredMinimizers) best.push_back(state);
        }
    };

    std::uint32_t state = 0;
    consider(state);
    const std::uint64_t total = std::uint64_t{1} << n;
    for (std::uint64_t g = 1; g < total; ++g) {
        const auto k = static_cast<std::size_t>(__builtin_ctzll(g));
        const double delta = -2.0 * s[k];
        e += delta * field[k];
        s[k] += delta;
        state ^= std::uint32_t{1} << k;
        const double* row = &j[k * n];
        for (std::size_t b = 0; b < n; ++b) field[b] += row[b] * delta;
        consider(state);
    }
    r.evaluated_count = total;

    auto to_config = [n](std::uint32_t st) {
        SpinConfiguration c;
        c.values.resize(n);
        for (std::size_t k = 0; k < n; ++k) c.values[k] = (st >> k) & 1U ? Spin::up : Spin::down;
        return c;
    };
    for (std::uint32_t st : best) r.best_configs.push_back(to_config(st));
    std::sort(r.best_configs.begin(), r.best_configs.end(), [](const auto& a, const auto& b) {
        for (std::size_t k = 0; k < a.size(); ++k)
            if (a.values[k] != b.values[k]) return a.values[k] == Spin::up;
        return false;
    });
    return r;
}

/// Dense matrix of offset + sum of terms; site 0 is the most significant bit
/// and bit value 0 is spin up.
inline Eigen::MatrixXd dense_matrix(const std::vector<OperatorTerm>& terms, std::size_t n, double offset = 0.0) {
    if (n > kDenseMaxSpins)
        throw OracleCapError("dense operators are capped at " + std::to_string(kDenseMaxSpins) + " spins (got " +
                             std::to_string(n) + ")");
    const auto dim = static_cast<Eigen::Index>(std::uint64_t{1} << n);
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim, dim);
    h.diagonal().setConstant(offset);
    for (const OperatorTerm& t : terms) {
        validate_term(t, n);
        for (Eigen::Index col = 0; col < dim; ++col) {
            auto row = static_cast<std::uint64_t>(col);
            double amp = t.coefficient;
            for (const OpFactor& f : t.factors) {
                const std::uint64_t bit = std::uint64_t{1} << (n - 1 - f.site);
                if (f.kind == OpKind::sz)
                    amp *= (row & bit) ? -0.5 : 0.5;
                else {
                    amp *= 0.5;
                    row ^= bit;
                }
            }
            h(static_cast<Eigen::Index>(row), col) += amp;
        }
    }
    return h;
}

/// Lowest eigenvalue of a * H_x + b * (H_z + offset).
inline double dense_ground_energy(const std::vector<OperatorTerm>& hx_terms, const std::vector<OperatorTerm>& hz_terms,
                                  double a, double b, double offset, std::size_t n) {
    std::vector<OperatorTerm> all;
    for (OperatorTerm t : hx_terms) {
        t.coefficient *= a;
        all.push_back(std::move(t));
    }
    for (OperatorTerm t : hz_terms) {
        t.coefficient *= b;
        all.push_back(std::move(t));
    }
    const Eigen::MatrixXd h = dense_matrix(all, n, b * offset);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h, Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0);
}

}  // namespace hopsweep
