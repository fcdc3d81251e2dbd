#pragma once

// Matrix product states over spin-1/2 sites.
//
// Every site tensor carries labels (l, p, r). Physical index 0 is spin up
// (S^z = +1/2) and 1 is spin down, so a basis configuration maps to a dense
// amplitude index with site 0 as the most significant bit.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "hopsweep/rng.hpp"
#include "hopsweep/tensor.hpp"

namespace hopsweep {

inline const Label kLeft = "l";
inline const Label kPhys = "p";
inline const Label kRight = "r";

using Op2 = std::array<std::array<double, 2>, 2>;

namespace spin_ops {
inline constexpr Op2 sz{{{0.5, 0.0}, {0.0, -0.5}}};
inline constexpr Op2 sx{{{0.0, 0.5}, {0.5, 0.0}}};
inline constexpr Op2 identity{{{1.0, 0.0}, {0.0, 1.0}}};
}  // namespace spin_ops

enum class Spin : std::int8_t { down = -1, up = 1 };

inline double spin_value(Spin s) { return s == Spin::up ? 0.5 : -0.5; }
inline std::size_t spin_index(Spin s) { return s == Spin::up ? 0 : 1; }

struct SpinConfiguration {
    std::vector<Spin> values;

    std::size_t size() const { return values.size(); }
    std::size_t count_up() const {
        return static_cast<std::size_t>(std::count(values.begin(), values.end(), Spin::up));
    }
    /// Binary image under x = S^z + 1/2.
    std::vector<std::uint8_t> to_binary() const {
        std::vector<std::uint8_t> x(values.size());
        for (std::size_t m = 0; m < values.size(); ++m) x[m] = values[m] == Spin::up ? 1 : 0;
        return x;
    }
    static SpinConfiguration from_binary(const std::vector<std::uint8_t>& x) {
        SpinConfiguration c;
        c.values.reserve(x.size());
        for (std::uint8_t b : x) c.values.push_back(b ? Spin::up : Spin::down);
        return c;
    }
    bool operator==(const SpinConfiguration&) const = default;
};

class MatrixProductState {
public:
    /// Wraps raw site tensors; the result is not assumed canonical.
    explicit MatrixProductState(std::vector<DenseTensor> sites) : sites_(std::move(sites)) {
        validate();
    }

    MatrixProductState(std::vector<DenseTensor> sites, std::size_t center)
        : sites_(std::move(sites)), center_(center) {
        validate();
        if (center >= sites_.size()) throw std::out_of_range("canonical center out of range");
    }

    std::size_t size() const { return sites_.size(); }
    const DenseTensor& site(std::size_t k) const { return sites_.at(k); }
    const std::vector<DenseTensor>& sites() const { return sites_; }

    /// Orthogonality center, absent when the gauge is unknown.
    std::optional<std::size_t> center() const { return center_; }

    /// Extent of the bond between site k and k+1, for k < size()-1.
    std::size_t bond_dim(std::size_t k) const { return sites_.at(k).dim(kRight); }

    std::size_t max_bond() const {
        std::size_t d = 1;
        for (std::size_t k = 0; k + 1 < size(); ++k) d = std::max(d, bond_dim(k));
        return d;
    }

    // Mutable access for in-place algorithms (sweeps). Callers restore the
    // canonical-form bookkeeping through set_center().
    DenseTensor& mutable_site(std::size_t k) { return sites_.at(k); }
    void set_center(std::optional<std::size_t> c) { center_ = c; }

private:
    std::vector<DenseTensor> sites_;
    std::optional<std::size_t> center_;

    void validate() const {
        if (sites_.empty()) throw std::invalid_argument("an MPS needs at least one site");
        for (std::size_t k = 0; k < sites_.size(); ++k) {
            const DenseTensor& t = sites_[k];
            if (t.rank() != 3 || t.labels() != std::vector<Label>{kLeft, kPhys, kRight})
                throw std::invalid_argument("MPS site " + std::to_string(k) + " must have labels (l, p, r)");
            if (t.dim(kPhys) != 2)
                throw std::invalid_argument("MPS site " + std::to_string(k) + " must have physical extent 2");
        }
        if (sites_.front().dim(kLeft) != 1 || sites_.back().dim(kRight) != 1)
            throw std::invalid_argument("MPS boundary bonds must have extent 1");
        for (std::size_t k = 0; k + 1 < sites_.size(); ++k)
            if (sites_[k].dim(kRight) != sites_[k + 1].dim(kLeft))
                throw std::invalid_argument("MPS bond mismatch between sites " + std::to_string(k) +
                                            " and " + std::to_string(k + 1));
    }
};

namespace detail {

inline DenseTensor site_from_amplitudes(double up, double down) {
    return DenseTensor({kLeft, kPhys, kRight}, {1, 2, 1}, {up, down});
}

inline DenseTensor op_tensor(const Op2& op, const Label& out = "o", const Label& in = "i") {
    return DenseTensor({out, in}, {2, 2}, {op[0][0], op[0][1], op[1][0], op[1][1]});
}

/// Move the orthogonality center one site to the right (k -> k+1).
inline void shift_center_right(MatrixProductState& s, std::size_t k) {
    QrResult qr = qr_split(s.site(k), {kLeft, kPhys}, "bond");
    s.mutable_site(k) = std::move(qr.q).relabeled({kLeft, kPhys, kRight});
    DenseTensor next = contract(qr.r, s.site(k + 1), {{kRight, kLeft}});  // (bond, p, r)
    s.mutable_site(k + 1) = std::move(next).relabeled({kLeft, kPhys, kRight});
}

/// Move the orthogonality center one site to the left (k -> k-1).
inline void shift_center_left(MatrixProductState& s, std::size_t k) {
    QrResult qr = qr_split(s.site(k), {kPhys, kRight}, "bond");  // q(p, r, bond), r(bond, l)
    s.mutable_site(k) = qr.q.permuted({"bond", kPhys, kRight}).relabeled({kLeft, kPhys, kRight});
    DenseTensor prev = contract(s.site(k - 1), qr.r, {{kRight, kLeft}});  // (l, p, bond)
    s.mutable_site(k - 1) = std::move(prev).relabeled({kLeft, kPhys, kRight});
}

/// Transfer step of an overlap: env(bra, ket) through bra site `a` and ket site `b`,
/// optionally with a one-site operator between them.
inline DenseTensor transfer_right(const DenseTensor& env, const DenseTensor& a, const DenseTensor& b,
                                  const Op2* op = nullptr) {
    DenseTensor x = contract(env, b, {{"ket", kLeft}});  // (bra, p, r)
    if (op != nullptr) {
        x = contract(x, op_tensor(*op), {{kPhys, "i"}});  // (bra, r, o)
        x.relabel("o", kPhys);
    }
    x.relabel(kRight, "ket");
    DenseTensor y = contract(a, x, {{kLeft, "bra"}, {kPhys, kPhys}});  // (r, ket)
    y.relabel(kRight, "bra");
    return y;
}

inline DenseTensor transfer_left(const DenseTensor& env, const DenseTensor& a, const DenseTensor& b,
                                 const Op2* op = nullptr) {
    DenseTensor x = contract(b, env, {{kRight, "ket"}});  // (l, p, bra)
    if (op != nullptr) {
        x = contract(x, op_tensor(*op), {{kPhys, "i"}});  // (l, bra, o)
        x.relabel("o", kPhys);
    }
    x.relabel(kLeft, "ket");
    DenseTensor y = contract(a, x, {{kRight, "bra"}, {kPhys, kPhys}});  // (l, ket)
    y.relabel(kLeft, "bra");
    return y;
}

inline DenseTensor unit_env() { return DenseTensor({"bra", "ket"}, {1, 1}, {1.0}); }

}  // namespace detail

inline MatrixProductState product_state(const std::vector<Spin>& spins) {
    if (spins.empty()) throw std::invalid_argument("product state needs at least one spin");
    std::vector<DenseTensor> sites;
    sites.reserve(spins.size());
    for (Spin s : spins)
        sites.push_back(detail::site_from_amplitudes(s == Spin::up ? 1.0 : 0.0, s == Spin::up ? 0.0 : 1.0));
    return MatrixProductState(std::move(sites), 0);
}

inline MatrixProductState product_state(const SpinConfiguration& config) { return product_state(config.values); }

/// The x-polarized state (|up> - |down>)/sqrt(2) on every site.
inline MatrixProductState minus_product_state(std::size_t n) {
    if (n == 0) throw std::invalid_argument("minus_product_state needs n >= 1");
    const double a = 1.0 / std::sqrt(2.0);
    std::vector<DenseTensor> sites(n, detail::site_from_amplitudes(a, -a));
    return MatrixProductState(std::move(sites), 0);
}

/// Bring `state` into canonical form with its center at `new_center`. The
/// represented wavefunction (including its norm) is unchanged.
inline MatrixProductState canonicalize(MatrixProductState state, std::size_t new_center) {
    const std::size_t n = state.size();
    if (new_center >= n) throw std::out_of_range("canonicalize: center out of range");
    if (auto c = state.center()) {
        for (std::size_t k = *c; k < new_center; ++k) detail::shift_center_right(state, k);
        for (std::size_t k = *c; k > new_center; --k) detail::shift_center_left(state, k);
    } else {
        for (std::size_t k = 0; k < new_center; ++k) detail::shift_center_right(state, k);
        for (std::size_t k = n - 1; k > new_center; --k) detail::shift_center_left(state, k);
    }
    state.set_center(new_center);
    return state;
}

/// <a|b> by zipper contraction.
inline double inner(const MatrixProductState& a, const MatrixProductState& b) {
    if (a.size() != b.size()) throw std::invalid_argument("inner: MPS length mismatch");
    DenseTensor env = detail::unit_env();
    for (std::size_t k = 0; k < a.size(); ++k) env = detail::transfer_right(env, a.site(k), b.site(k));
    return env.scalar_value();
}

inline double norm(const MatrixProductState& s) { return std::sqrt(std::max(0.0, inner(s, s))); }

/// Copy of `state` scaled to unit norm (center tensor carries the factor).
inline MatrixProductState normalized(MatrixProductState state) {
    const double nrm = norm(state);
    if (!(nrm > 0.0) || !std::isfinite(nrm)) throw std::domain_error("cannot normalize a zero MPS");
    const std::size_t k = state.center().value_or(0);
    state.mutable_site(k) *= 1.0 / nrm;
    return state;
}

/// Amplitude <config|state>.
inline double amplitude(const MatrixProductState& state, const SpinConfiguration& config) {
    if (config.size() != state.size()) throw std::invalid_argument("amplitude: length mismatch");
    Eigen::RowVectorXd v = Eigen::RowVectorXd::Ones(1);
    for (std::size_t k = 0; k < state.size(); ++k) {
        const DenseTensor& t = state.site(k);
        const auto dl = static_cast<Eigen::Index>(t.dim(kLeft));
        const auto dr = static_cast<Eigen::Index>(t.dim(kRight));
        Eigen::MatrixXd m(dl, dr);
        const std::size_t p = spin_index(config.values[k]);
        for (Eigen::Index a = 0; a < dl; ++a)
            for (Eigen::Index b = 0; b < dr; ++b)
                m(a, b) = t.at({static_cast<std::size_t>(a), p, static_cast<std::size_t>(b)});
        v = v * m;
    }
    return v(0);
}

/// Expectation <op_m> for every site m, normalized by <psi|psi>.
inline std::vector<double> expect_all_sites(const MatrixProductState& state, const Op2& op) {
    const std::size_t n = state.size();
    std::vector<DenseTensor> left(n), right(n);
    left[0] = detail::unit_env();
    for (std::size_t k = 1; k < n; ++k)
        left[k] = detail::transfer_right(left[k - 1], state.site(k - 1), state.site(k - 1));
    right[n - 1] = detail::unit_env();
    for (std::size_t k = n - 1; k > 0; --k)
        right[k - 1] = detail::transfer_left(right[k], state.site(k), state.site(k));
    const double norm2 =
        contract(detail::transfer_right(left[0], state.site(0), state.site(0)), right[0],
                 {{"bra", "bra"}, {"ket", "ket"}})
            .scalar_value();
    if (!(norm2 > 0.0)) throw std::domain_error("expectation of a zero MPS");
    std::vector<double> out(n);
    for (std::size_t k = 0; k < n; ++k) {
        DenseTensor e = detail::transfer_right(left[k], state.site(k), state.site(k), &op);
        out[k] = contract(e, right[k], {{"bra", "bra"}, {"ket", "ket"}}).scalar_value() / norm2;
    }
    return out;
}

inline double expect_site(const MatrixProductState& state, const Op2& op, std::size_t m) {
    if (m >= state.size()) throw std::out_of_range("expect_site: site out of range");
    DenseTensor env = detail::unit_env();
    DenseTensor env_op = detail::unit_env();
    for (std::size_t k = 0; k < state.size(); ++k) {
        env = detail::transfer_right(env, state.site(k), state.site(k));
        env_op = detail::transfer_right(env_op, state.site(k), state.site(k), k == m ? &op : nullptr);
    }
    return env_op.scalar_value() / env.scalar_value();
}

struct SpinTotals {
    double sx_total = 0.0;
    double sz_total = 0.0;
};

/// Total S^x and S^z. With `n_up_ground`, S^z is measured from its ground
/// value n_up_ground - N/2.
inline SpinTotals total_spin_traces(const MatrixProductState& state,
                                    std::optional<std::size_t> n_up_ground = std::nullopt) {
    SpinTotals t;
    for (double v : expect_all_sites(state, spin_ops::sx)) t.sx_total += v;
    for (double v : expect_all_sites(state, spin_ops::sz)) t.sz_total += v;
    if (n_up_ground)
        t.sz_total -= static_cast<double>(*n_up_ground) - static_cast<double>(state.size()) / 2.0;
    return t;
}

/// Values of |<S^z_m>| at or below this count as a tie and read out as up.
inline constexpr double kReadoutTieTolerance = 1e-12;

/// Per-site thresholding of <S^z_m>: up when >= 0 (ties up).
inline SpinConfiguration readout(const MatrixProductState& state) {
    SpinConfiguration c;
    for (double v : expect_all_sites(state, spin_ops::sz))
        c.values.push_back(v >= -kReadoutTieTolerance ? Spin::up : Spin::down);
    return c;
}

/// Sequential projective readout: fixes spins left to right, each time
/// choosing the more probable outcome conditioned on the spins already
/// fixed (ties up). The result always has nonzero amplitude, so a
/// superposition of degenerate configurations collapses onto one of them.
inline SpinConfiguration project_readout(const MatrixProductState& state) {
    const MatrixProductState s = canonicalize(state, 0);
    SpinConfiguration c;
    Eigen::RowVectorXd v = Eigen::RowVectorXd::Ones(1);
    for (std::size_t k = 0; k < s.size(); ++k) {
        const DenseTensor& t = s.site(k);
        const auto dl = static_cast<Eigen::Index>(t.dim(kLeft));
        const auto dr = static_cast<Eigen::Index>(t.dim(kRight));
        std::array<Eigen::RowVectorXd, 2> branch;
        for (std::size_t p = 0; p < 2; ++p) {
            Eigen::MatrixXd m(dl, dr);
            for (Eigen::Index a = 0; a < dl; ++a)
                for (Eigen::Index b = 0; b < dr; ++b)
                    m(a, b) = t.at({static_cast<std::size_t>(a), p, static_cast<std::size_t>(b)});
            branch[p] = v * m;
        }
        // sites to the right are right-isometric, so squared norms are the
        // conditional probabilities up to a common factor
        const double up = branch[0].squaredNorm(), down = branch[1].squaredNorm();
        const std::size_t pick = up >= down ? 0 : 1;
        c.values.push_back(pick == 0 ? Spin::up : Spin::down);
        const double nrm = branch[pick].norm();
        v = nrm > 0.0 ? Eigen::RowVectorXd(branch[pick] / nrm) : branch[pick];
    }
    return c;
}

/// Largest deviation from the isometry conditions about the state's center.
inline double isometry_residual(const MatrixProductState& state) {
    const auto c = state.center();
    if (!c) return std::numeric_limits<double>::infinity();
    double worst = 0.0;
    for (std::size_t k = 0; k < state.size(); ++k) {
        if (k == *c) continue;
        const DenseTensor& t = state.site(k);
        const bool left_side = k < *c;
        const detail::MatrixView m =
            left_side ? detail::as_matrix(t, {kLeft, kPhys}) : detail::as_matrix(t, {kLeft});
        detail::ConstRowMap a(m.data.data(), static_cast<Eigen::Index>(m.rows),
                              static_cast<Eigen::Index>(m.cols));
        Eigen::MatrixXd g = left_side ? Eigen::MatrixXd(a.transpose() * a) : Eigen::MatrixXd(a * a.transpose());
        g -= Eigen::MatrixXd::Identity(g.rows(), g.cols());
        worst = std::max(worst, g.cwiseAbs().maxCoeff());
    }
    return worst;
}

/// Random state with entries uniform in (-1, 1), canonical at site 0 and
/// normalized. Bond extents are min(d, largest possible Schmidt rank).
/// `stream_index` selects an independent stream for the same seed.
inline MatrixProductState random_mps(std::size_t n, std::size_t d, std::uint64_t seed,
                                     std::uint64_t stream_index = 0) {
    if (n == 0 || d == 0) throw std::invalid_argument("random_mps needs n >= 1 and d >= 1");
    auto cap = [&](std::size_t bond) {  // bond between site `bond` and `bond + 1`
        const std::size_t left = bond + 1, right = n - bond - 1;
        const std::size_t schmidt = std::min(left, right) >= 63
                                        ? d
                                        : std::min(std::size_t{1} << std::min(left, right), d);
        return std::min(d, schmidt);
    };
    Rng rng = Rng::stream(seed, StreamPurpose::state_init, stream_index);
    std::vector<DenseTensor> sites;
    sites.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t dl = k == 0 ? 1 : cap(k - 1);
        const std::size_t dr = k + 1 == n ? 1 : cap(k);
        std::vector<double> data(dl * 2 * dr);
        for (double& x : data) x = rng.uniform(-1.0, 1.0);
        sites.emplace_back(std::vector<Label>{kLeft, kPhys, kRight}, std::vector<std::size_t>{dl, 2, dr},
                           std::move(data));
    }
    return normalized(canonicalize(MatrixProductState(std::move(sites)), 0));
}

}  // namespace hopsweep
