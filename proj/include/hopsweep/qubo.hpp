#pragma once

// QUBO models, their Ising images under S^z = x - 1/2, classical energies and
// coupling statistics.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "hopsweep/mpo.hpp"
#include "hopsweep/mps.hpp"
#include "hopsweep/rng.hpp"

namespace hopsweep {

using SitePair = std::pair<std::size_t, std::size_t>;

/// Objective offset + x^T Q x over binary x, Q symmetric. Only the upper
/// triangle (i <= j) is stored; entry (i, j) is the matrix element Q_ij = Q_ji,
/// so an off-diagonal entry contributes 2 * Q_ij * x_i * x_j.
class QuboModel {
public:
    explicit QuboModel(std::size_t n = 0, double offset = 0.0) : n_(n), offset_(offset) {
        if (!std::isfinite(offset)) throw std::invalid_argument("QUBO offset must be finite");
    }

    std::size_t size() const { return n_; }
    double offset() const { return offset_; }
    void set_offset(double c) {
        if (!std::isfinite(c)) throw std::invalid_argument("QUBO offset must be finite");
        offset_ = c;
    }
    void add_offset(double c) { set_offset(offset_ + c); }

    /// Add `v` to the symmetric matrix element Q_ij (and hence Q_ji).
    void add(std::size_t i, std::size_t j, double v) {
        if (i >= n_ || j >= n_)
            throw std::out_of_range("QUBO index (" + std::to_string(i) + ", " + std::to_string(j) +
                                    ") out of range for n = " + std::to_string(n_));
        if (!std::isfinite(v)) throw std::invalid_argument("QUBO entries must be finite");
        if (i > j) std::swap(i, j);
        entries_[{i, j}] += v;
    }

    /// Replace Q_ij (and Q_ji) by `v`.
    void set(std::size_t i, std::size_t j, double v) {
        if (i > j) std::swap(i, j);
        entries_.erase({i, j});
        add(i, j, v);
    }

    double get(std::size_t i, std::size_t j) const {
        if (i > j) std::swap(i, j);
        auto it = entries_.find({i, j});
        return it == entries_.end() ? 0.0 : it->second;
    }

    const std::map<SitePair, double>& entries() const { return entries_; }

    /// offset + sum_ij Q_ij x_i x_j.
    double objective(const std::vector<std::uint8_t>& x) const {
        if (x.size() != n_) throw std::invalid_argument("QUBO objective: length mismatch");
        double e = offset_;
        for (const auto& [ij, v] : entries_) {
            if (!x[ij.first] || !x[ij.second]) continue;
            e += ij.first == ij.second ? v : 2.0 * v;
        }
        return e;
    }

private:
    std::size_t n_;
    double offset_;
    std::map<SitePair, double> entries_;
};

/// constant + sum_{m<n} J_mn s_m s_n + sum_m hz_m s_m with s in {+1/2, -1/2}.
struct IsingModel {
    std::size_t n = 0;
    std::map<SitePair, double> couplings;  ///< keys m < n
    std::vector<double> hz;
    double constant = 0.0;

    explicit IsingModel(std::size_t size = 0) : n(size), hz(size, 0.0) {}

    void add_coupling(std::size_t a, std::size_t b, double j) {
        if (a == b) throw std::invalid_argument("Ising coupling needs two distinct sites");
        if (a >= n || b >= n) throw std::out_of_range("Ising coupling site out of range");
        if (a > b) std::swap(a, b);
        couplings[{a, b}] += j;
    }

    void validate() const {
        if (hz.size() != n) throw std::invalid_argument("Ising field vector length differs from n");
        if (!std::isfinite(constant)) throw std::invalid_argument("Ising constant is not finite");
        for (double h : hz)
            if (!std::isfinite(h)) throw std::invalid_argument("Ising field is not finite");
        for (const auto& [mn, j] : couplings) {
            if (!(mn.first < mn.second) || mn.second >= n)
                throw std::invalid_argument("Ising coupling key must satisfy m < n < size");
            if (!std::isfinite(j)) throw std::invalid_argument("Ising coupling is not finite");
        }
    }

    std::size_t nonzero_couplings() const {
        return static_cast<std::size_t>(
            std::count_if(couplings.begin(), couplings.end(), [](const auto& kv) { return kv.second != 0.0; }));
    }
};

inline IsingModel to_ising(const QuboModel& q) {
    IsingModel m(q.size());
    double diag = 0.0, all = 0.0;
    for (const auto& [ij, v] : q.entries()) {
        const auto [i, j] = ij;
        if (i == j) {
            diag += v;
            all += v;
            m.hz[i] += v;
        } else {
            all += 2.0 * v;
            m.hz[i] += v;
            m.hz[j] += v;
            if (v != 0.0) m.couplings[{i, j}] += 2.0 * v;
        }
    }
    m.constant = q.offset() + 0.25 * diag + 0.25 * all;
    return m;
}

/// Inverse of to_ising: x = s + 1/2.
inline QuboModel from_ising(const IsingModel& m) {
    m.validate();
    QuboModel q(m.n, m.constant);
    for (std::size_t k = 0; k < m.n; ++k) {
        if (m.hz[k] != 0.0) q.add(k, k, m.hz[k]);
        q.add_offset(-0.5 * m.hz[k]);
    }
    for (const auto& [mn, j] : m.couplings) {
        if (j == 0.0) continue;
        q.add(mn.first, mn.second, 0.5 * j);
        q.add(mn.first, mn.first, -0.5 * j);
        q.add(mn.second, mn.second, -0.5 * j);
        q.add_offset(0.25 * j);
    }
    return q;
}

inline double ising_energy(const IsingModel& m, const SpinConfiguration& s) {
    if (s.size() != m.n) throw std::invalid_argument("ising_energy: configuration length mismatch");
    double e = m.constant;
    for (std::size_t k = 0; k < m.n; ++k) e += m.hz[k] * spin_value(s.values[k]);
    for (const auto& [mn, j] : m.couplings) e += j * spin_value(s.values[mn.first]) * spin_value(s.values[mn.second]);
    return e;
}

struct GlassProfile {
    double hz_mean = 0.0;
    double hz_std = 0.0;            ///< population standard deviation
    std::vector<double> rho;        ///< rho[d - 1] for d = 1 .. n-1
    std::vector<std::size_t> count;  ///< couplings at distance d, same indexing
};

inline GlassProfile characterize(const IsingModel& m) {
    if (m.n < 2) throw std::invalid_argument("characterize needs at least two spins");
    GlassProfile g;
    for (double h : m.hz) g.hz_mean += h;
    g.hz_mean /= static_cast<double>(m.n);
    for (double h : m.hz) g.hz_std += (h - g.hz_mean) * (h - g.hz_mean);
    g.hz_std = std::sqrt(g.hz_std / static_cast<double>(m.n));
    g.count.assign(m.n - 1, 0);
    for (const auto& [mn, j] : m.couplings)
        if (j != 0.0) ++g.count[mn.second - mn.first - 1];
    g.rho.resize(m.n - 1);
    for (std::size_t d = 1; d < m.n; ++d)
        g.rho[d - 1] = static_cast<double>(g.count[d - 1]) / static_cast<double>(m.n - d);
    return g;
}

struct IsingTerms {
    std::vector<OperatorTerm> hz_terms;
    std::vector<OperatorTerm> coupling_terms;
    double constant = 0.0;

    std::vector<OperatorTerm> problem_terms() const {
        std::vector<OperatorTerm> all = coupling_terms;
        all.insert(all.end(), hz_terms.begin(), hz_terms.end());
        return all;
    }
};

/// The Ising energy read as a diagonal operator in S^z.
inline IsingTerms to_operator_terms(const IsingModel& m) {
    IsingTerms t;
    for (std::size_t k = 0; k < m.n; ++k)
        if (m.hz[k] != 0.0) t.hz_terms.push_back(OperatorTerm::single(m.hz[k], k, OpKind::sz));
    for (const auto& [mn, j] : m.couplings)
        if (j != 0.0) t.coupling_terms.push_back(OperatorTerm::pair(j, mn.first, OpKind::sz, mn.second, OpKind::sz));
    t.constant = m.constant;
    return t;
}

/// Divide couplings, fields and constant by max |J_mn|; returns the factor.
inline std::pair<IsingModel, double> rescale(const IsingModel& m) {
    double factor = 0.0;
    for (const auto& [mn, j] : m.couplings) factor = std::max(factor, std::abs(j));
    if (!(factor > 0.0)) throw std::invalid_argument("rescale: model has no nonzero coupling");
    IsingModel s = m;
    for (auto& [mn, j] : s.couplings) j /= factor;
    for (double& h : s.hz) h /= factor;
    s.constant /= factor;
    return {std::move(s), factor};
}

/// Each pair is coupled with probability `density`, J drawn from
/// {-2, -1, 1, 2}; fields drawn from {-1, -1/2, 0, 1/2, 1}. All energies are
/// multiples of 1/4 and therefore compare exactly.
inline IsingModel random_ising(std::size_t n, double density, std::uint64_t seed) {
    if (!(density >= 0.0 && density <= 1.0)) throw std::invalid_argument("coupling density must lie in [0, 1]");
    static constexpr double kCouplings[] = {-2.0, -1.0, 1.0, 2.0};
    Rng rng = Rng::stream(seed, StreamPurpose::test_data);
    IsingModel m(n);
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = a + 1; b < n; ++b)
            if (rng.uniform01() < density) m.couplings[{a, b}] = kCouplings[rng.below(4)];
    for (double& h : m.hz) h = 0.5 * (static_cast<double>(rng.below(5)) - 2.0);
    return m;
}

/// Sum of |coefficient| over all terms including the constant; the scale for
/// floating comparisons of energies.
inline double coefficient_norm(const IsingModel& m) {
    double s = std::abs(m.constant);
    for (double h : m.hz) s += std::abs(h);
    for (const auto& [mn, j] : m.couplings) s += std::abs(j);
    return s;
}

}  // namespace hopsweep
