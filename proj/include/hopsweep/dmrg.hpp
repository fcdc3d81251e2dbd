#pragma once

// Two-site DMRG ground-state sweeps over an MPO.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "hopsweep/lanczos.hpp"
#include "hopsweep/mpo.hpp"
#include "hopsweep/mps.hpp"
#include "hopsweep/tensor.hpp"

namespace hopsweep {

struct SweepParams {
    std::size_t max_bond = 20;
    double cutoff = kDefaultCutoff;
    std::size_t krylov_dim = 4;
    double eig_tol = 1e-14;
    std::size_t nsweeps = 5;
    std::size_t eig_restarts = 4;  ///< extra Lanczos cycles per bond update
    bool early_exit = false;       ///< stop once the sweep energy stalls

    void validate() const {
        if (max_bond < 1) throw std::invalid_argument("max_bond must be at least 1");
        if (!(cutoff >= 0.0)) throw std::invalid_argument("cutoff must be nonnegative");
        if (krylov_dim < 2) throw std::invalid_argument("krylov_dim must be at least 2");
        if (!(eig_tol >= 0.0)) throw std::invalid_argument("eig_tol must be nonnegative");
        if (nsweeps < 1) throw std::invalid_argument("nsweeps must be at least 1");
    }
};

struct SweepOutcome {
    MatrixProductState state;
    double energy = 0.0;                 ///< <psi|H|psi> including the offset
    std::vector<double> energy_history;  ///< one entry per sweep
    std::size_t max_bond_reached = 1;
    bool converged = false;
};

class DmrgError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline DenseTensor right_env_labels(const DenseTensor& env) {
    return env.relabeled({"rbra", "rmpo", "rket"});
}

/// H_eff applied to a two-site tensor theta(l, p1, p2, r).
inline DenseTensor apply_two_site(const DenseTensor& left, const DenseTensor& w1, const DenseTensor& w2,
                                  const DenseTensor& right, const DenseTensor& theta) {
    DenseTensor x = contract(left, theta, {{"ket", kLeft}});                // (bra, mpo, p1, p2, r)
    x = contract(x, w1, {{"mpo", kMpoLeft}, {"p1", kIn}});                  // (bra, p2, r, o, wr)
    x.relabel(kOut, "q1");
    x = contract(x, w2, {{kMpoRight, kMpoLeft}, {"p2", kIn}});              // (bra, r, q1, o, wr)
    x.relabel(kOut, "q2");
    x = contract(x, right, {{kRight, "rket"}, {kMpoRight, "rmpo"}});       // (bra, q1, q2, rbra)
    return std::move(x).relabeled({kLeft, "p1", "p2", kRight});
}

/// H_eff applied to a single site tensor psi(l, p, r); used for one-site chains.
inline DenseTensor apply_one_site(const DenseTensor& left, const DenseTensor& w, const DenseTensor& right,
                                  const DenseTensor& psi) {
    DenseTensor x = contract(left, psi, {{"ket", kLeft}});                  // (bra, mpo, p, r)
    x = contract(x, w, {{"mpo", kMpoLeft}, {kPhys, kIn}});                  // (bra, r, o, wr)
    x = contract(x, right, {{kRight, "rket"}, {kMpoRight, "rmpo"}});       // (bra, o, rbra)
    return std::move(x).relabeled({kLeft, kPhys, kRight});
}

}  // namespace detail

/// Sweep engine holding cached environments for one state/operator pair.
class TwoSiteDmrg {
public:
    TwoSiteDmrg(MatrixProductState state, const MatrixProductOperator& mpo, SweepParams params)
        : state_(std::move(state)), mpo_(mpo), params_(params) {
        params_.validate();
        if (state_.size() != mpo_.size()) throw std::invalid_argument("DMRG: MPS/MPO length mismatch");
        state_ = normalized(canonicalize(std::move(state_), 0));
        const std::size_t n = state_.size();
        left_.assign(n, detail::unit_mpo_env());
        right_.assign(n, detail::unit_mpo_env());
        for (std::size_t k = n - 1; k > 0; --k)
            right_[k - 1] = detail::mpo_transfer_left(right_[k], state_.site(k), mpo_.site(k), state_.site(k));
    }

    /// One left-to-right-to-left pass; returns <H> afterwards.
    double sweep() {
        const std::size_t n = state_.size();
        if (n == 1) return solve_single_site();
        for (std::size_t b = 0; b + 1 < n; ++b) update_bond(b, true);
        for (std::size_t b = n - 1; b-- > 0;) update_bond(b, false);
        state_.set_center(0);
        return energy();
    }

    double energy() const { return expectation(state_, mpo_); }
    const MatrixProductState& state() const { return state_; }
    std::size_t max_bond_reached() const { return max_bond_reached_; }

private:
    MatrixProductState state_;
    const MatrixProductOperator& mpo_;
    SweepParams params_;
    std::vector<DenseTensor> left_, right_;  // left_[k]: sites < k; right_[k]: sites > k
    std::size_t max_bond_reached_ = 1;

    LanczosParams lanczos() const { return {params_.krylov_dim, params_.eig_tol, params_.eig_restarts}; }

    void update_bond(std::size_t b, bool moving_right) {
        DenseTensor theta = contract(state_.site(b).relabeled({kLeft, "p1", "bond"}),
                                     state_.site(b + 1).relabeled({"bond", "p2", kRight}), {{"bond", "bond"}});
        const DenseTensor& env_l = left_[b];
        const DenseTensor env_r = detail::right_env_labels(right_[b + 1]);
        const DenseTensor& w1 = mpo_.site(b);
        const DenseTensor& w2 = mpo_.site(b + 1);
        EigenPair eig;
        try {
            eig = local_eigensolve(
                [&](const DenseTensor& x) { return detail::apply_two_site(env_l, w1, w2, env_r, x); }, theta,
                lanczos());
        } catch (const std::exception& e) {
            throw DmrgError("eigensolver failed at bond " + std::to_string(b) + "-" + std::to_string(b + 1) +
                            ": " + e.what());
        }
        SvdResult svd = svd_split(eig.vector, {kLeft, "p1"}, params_.max_bond, params_.cutoff, "bond");
        double s2 = 0.0;
        for (double s : svd.singular_values) s2 += s * s;
        const double inv = 1.0 / std::sqrt(s2);
        const std::size_t keep = svd.singular_values.size();
        max_bond_reached_ = std::max(max_bond_reached_, keep);
        if (moving_right) {
            state_.mutable_site(b) = std::move(svd.left).relabeled({kLeft, kPhys, kRight});
            DenseTensor rest = std::move(svd.right);  // (bond, p2, r)
            const std::size_t cols = rest.size() / keep;
            for (std::size_t j = 0; j < keep; ++j)
                for (std::size_t c = 0; c < cols; ++c) rest.data()[j * cols + c] *= svd.singular_values[j] * inv;
            state_.mutable_site(b + 1) = std::move(rest).relabeled({kLeft, kPhys, kRight});
            left_[b + 1] = detail::mpo_transfer_right(left_[b], state_.site(b), w1, state_.site(b));
            state_.set_center(b + 1);
        } else {
            state_.mutable_site(b + 1) = std::move(svd.right).relabeled({kLeft, kPhys, kRight});
            DenseTensor rest = std::move(svd.left);  // (l, p1, bond)
            for (std::size_t i = 0; i < rest.size(); ++i) rest.data()[i] *= svd.singular_values[i % keep] * inv;
            state_.mutable_site(b) = std::move(rest).relabeled({kLeft, kPhys, kRight});
            right_[b] = detail::mpo_transfer_left(right_[b + 1], state_.site(b + 1), w2, state_.site(b + 1));
            state_.set_center(b);
        }
    }

    double solve_single_site() {
        const DenseTensor env_r = detail::right_env_labels(right_[0]);
        EigenPair eig;
        try {
            eig = local_eigensolve(
                [&](const DenseTensor& x) { return detail::apply_one_site(left_[0], mpo_.site(0), env_r, x); },
                state_.site(0), lanczos());
        } catch (const std::exception& e) {
            throw DmrgError(std::string("eigensolver failed at site 0: ") + e.what());
        }
        state_.mutable_site(0) = std::move(eig.vector);
        state_.set_center(0);
        return energy();
    }
};

/// A single full sweep.
inline SweepOutcome sweep(const MatrixProductState& state, const MatrixProductOperator& mpo,
                          const SweepParams& params) {
    TwoSiteDmrg engine(state, mpo, params);
    const double e = engine.sweep();
    return {engine.state(), e, {e}, engine.max_bond_reached(), false};
}

/// params.nsweeps sweeps, stopping early (when enabled) once successive
/// sweep energies differ by less than eig_tol * max(1, |E|).
inline SweepOutcome run(const MatrixProductState& state, const MatrixProductOperator& mpo,
                        const SweepParams& params) {
    TwoSiteDmrg engine(state, mpo, params);
    SweepOutcome out{engine.state(), 0.0, {}, 1, false};
    for (std::size_t s = 0; s < params.nsweeps; ++s) {
        const double e = engine.sweep();
        if (!out.energy_history.empty()) {
            const double prev = out.energy_history.back();
            out.converged = std::abs(prev - e) < params.eig_tol * std::max(1.0, std::abs(e));
        }
        out.energy_history.push_back(e);
        if (params.early_exit && out.converged) break;
    }
    out.state = engine.state();
    out.energy = out.energy_history.back();
    out.max_bond_reached = engine.max_bond_reached();
    return out;
}

}  // namespace hopsweep
