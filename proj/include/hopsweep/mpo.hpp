#pragma once

// Matrix product operators compiled from weighted one- and two-spin terms.
//
// Site tensors carry labels (wl, o, i, wr): left bond, physical out (bra
// side), physical in (ket side), right bond. The constant part of the
// operator lives in `offset` and is never materialized in the tensors.

#include <cmath>
#include <cstddef>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "hopsweep/mps.hpp"
#include "hopsweep/tensor.hpp"

namespace hopsweep {

inline const Label kMpoLeft = "wl";
inline const Label kOut = "o";
inline const Label kIn = "i";
inline const Label kMpoRight = "wr";

/// Relative squared-weight threshold for the MPO compression pass.
inline constexpr double kMpoCompressCutoff = 1e-12;

enum class OpKind { sx, sz };

inline const Op2& op_matrix(OpKind k) { return k == OpKind::sx ? spin_ops::sx : spin_ops::sz; }

struct OpFactor {
    std::size_t site;
    OpKind kind;
    bool operator==(const OpFactor&) const = default;
};

/// coefficient * op_{site_1} [* op_{site_2}], sites strictly increasing.
struct OperatorTerm {
    double coefficient = 0.0;
    std::vector<OpFactor> factors;

    static OperatorTerm single(double c, std::size_t site, OpKind k) { return {c, {{site, k}}}; }
    static OperatorTerm pair(double c, std::size_t s1, OpKind k1, std::size_t s2, OpKind k2) {
        if (s1 > s2) {
            std::swap(s1, s2);
            std::swap(k1, k2);
        }
        return {c, {{s1, k1}, {s2, k2}}};
    }
};

inline void validate_term(const OperatorTerm& t, std::size_t n) {
    if (!std::isfinite(t.coefficient)) throw std::invalid_argument("operator term coefficient is not finite");
    if (t.factors.empty() || t.factors.size() > 2)
        throw std::invalid_argument("operator terms act on one or two sites");
    for (const OpFactor& f : t.factors)
        if (f.site >= n)
            throw std::out_of_range("operator term site " + std::to_string(f.site) + " out of range for " +
                                    std::to_string(n) + " sites");
    if (t.factors.size() == 2 && !(t.factors[0].site < t.factors[1].site))
        throw std::invalid_argument("two-site operator term needs strictly increasing sites");
}

class MatrixProductOperator {
public:
    MatrixProductOperator(std::vector<DenseTensor> sites, double offset)
        : sites_(std::move(sites)), offset_(offset) {
        if (sites_.empty()) throw std::invalid_argument("an MPO needs at least one site");
        if (!std::isfinite(offset_)) throw std::invalid_argument("MPO offset is not finite");
        for (const DenseTensor& w : sites_)
            if (w.labels() != std::vector<Label>{kMpoLeft, kOut, kIn, kMpoRight} || w.dim(kOut) != 2 ||
                w.dim(kIn) != 2)
                throw std::invalid_argument("MPO sites must be (wl, o, i, wr) with physical extent 2");
        if (sites_.front().dim(kMpoLeft) != 1 || sites_.back().dim(kMpoRight) != 1)
            throw std::invalid_argument("MPO boundary bonds must have extent 1");
        for (std::size_t k = 0; k + 1 < sites_.size(); ++k)
            if (sites_[k].dim(kMpoRight) != sites_[k + 1].dim(kMpoLeft))
                throw std::invalid_argument("MPO bond mismatch at " + std::to_string(k));
    }

    std::size_t size() const { return sites_.size(); }
    const DenseTensor& site(std::size_t k) const { return sites_.at(k); }
    double offset() const { return offset_; }

    std::size_t max_bond() const {
        std::size_t w = 1;
        for (std::size_t k = 0; k + 1 < size(); ++k) w = std::max(w, sites_[k].dim(kMpoRight));
        return w;
    }

private:
    std::vector<DenseTensor> sites_;
    double offset_;
};

namespace detail {

inline void add_op(DenseTensor& w, std::size_t row, std::size_t col, const Op2& op, double c) {
    for (std::size_t o = 0; o < 2; ++o)
        for (std::size_t i = 0; i < 2; ++i)
            if (op[o][i] != 0.0) w.at({row, o, i, col}) += c * op[o][i];
}

/// Exact finite-state-machine MPO. Bond channels are: start (nothing placed
/// yet), done (a complete term placed), and one open channel per
/// (first site, operator) awaiting a partner further right.
inline std::vector<DenseTensor> fsm_mpo(const std::vector<OperatorTerm>& terms, std::size_t n) {
    using Key = std::pair<std::size_t, OpKind>;
    std::map<Key, std::size_t> last_partner;  // open key -> furthest partner site
    for (const OperatorTerm& t : terms) {
        if (t.factors.size() != 2 || t.coefficient == 0.0) continue;
        const Key key{t.factors[0].site, t.factors[0].kind};
        auto [it, inserted] = last_partner.try_emplace(key, t.factors[1].site);
        if (!inserted) it->second = std::max(it->second, t.factors[1].site);
    }

    constexpr std::size_t start = 0, done = 1;
    // channels[k]: open keys on the bond to the right of site k
    std::vector<std::map<Key, std::size_t>> channels(n);
    for (std::size_t k = 0; k + 1 < n; ++k) {
        std::size_t next = 2;
        for (const auto& [key, last] : last_partner)
            if (key.first <= k && last > k) channels[k][key] = next++;
    }
    auto bond_extent = [&](std::size_t k) { return 2 + channels[k].size(); };

    std::vector<DenseTensor> sites;
    sites.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t wl = k == 0 ? 2 : bond_extent(k - 1);
        const std::size_t wr = k + 1 == n ? 2 : bond_extent(k);
        DenseTensor w({kMpoLeft, kOut, kIn, kMpoRight}, {wl, 2, 2, wr});
        add_op(w, start, start, spin_ops::identity, 1.0);
        add_op(w, done, done, spin_ops::identity, 1.0);
        if (k > 0)
            for (const auto& [key, ch] : channels[k - 1]) {
                auto it = k + 1 < n ? channels[k].find(key) : channels[k].end();
                if (it != channels[k].end()) add_op(w, ch, it->second, spin_ops::identity, 1.0);
            }
        if (k + 1 < n)
            for (const auto& [key, ch] : channels[k])
                if (key.first == k) add_op(w, start, ch, op_matrix(key.second), 1.0);
        sites.push_back(std::move(w));
    }
    for (const OperatorTerm& t : terms) {
        if (t.coefficient == 0.0) continue;
        if (t.factors.size() == 1) {
            add_op(sites[t.factors[0].site], start, done, op_matrix(t.factors[0].kind), t.coefficient);
        } else {
            const std::size_t k = t.factors[1].site;
            const std::size_t ch = channels[k - 1].at({t.factors[0].site, t.factors[0].kind});
            add_op(sites[k], ch, done, op_matrix(t.factors[1].kind), t.coefficient);
        }
    }

    // boundary rows/columns: the chain starts in `start` and ends in `done`
    auto slice_bond = [](const DenseTensor& w, bool left, std::size_t keep) {
        const std::size_t wl = w.dim(kMpoLeft), wr = w.dim(kMpoRight);
        DenseTensor out({kMpoLeft, kOut, kIn, kMpoRight}, {left ? 1 : wl, 2, 2, left ? wr : 1});
        for (std::size_t a = 0; a < (left ? 1 : wl); ++a)
            for (std::size_t o = 0; o < 2; ++o)
                for (std::size_t i = 0; i < 2; ++i)
                    for (std::size_t b = 0; b < (left ? wr : 1); ++b)
                        out.at({a, o, i, b}) = w.at({left ? keep : a, o, i, left ? b : keep});
        return out;
    };
    sites.front() = slice_bond(sites.front(), true, start);
    sites.back() = slice_bond(sites.back(), false, done);
    return sites;
}

/// Two-pass SVD compression. Tensors are temporarily scaled by 1/sqrt(2) so
/// the identity has unit norm per site and the canonical norm stays O(1).
inline void compress_mpo(std::vector<DenseTensor>& sites, double cutoff) {
    const std::size_t n = sites.size();
    if (n < 2) return;
    const double s = 1.0 / std::sqrt(2.0);
    for (DenseTensor& w : sites) w *= s;

    // left-to-right: remove exact linear dependencies only
    constexpr double rank_cutoff = 1e-28;
    for (std::size_t k = 0; k + 1 < n; ++k) {
        const std::size_t full = sites[k].size() / sites[k].dim(kMpoRight);
        SvdResult svd = svd_split(sites[k], {kMpoLeft, kOut, kIn}, full, rank_cutoff, "bond");
        for (std::size_t j = 0; j < svd.singular_values.size(); ++j) {
            // scale rows of right factor by singular values
            const std::size_t cols = svd.right.size() / svd.singular_values.size();
            for (std::size_t c = 0; c < cols; ++c) svd.right.data()[j * cols + c] *= svd.singular_values[j];
        }
        sites[k] = std::move(svd.left).relabeled({kMpoLeft, kOut, kIn, kMpoRight});
        DenseTensor next = contract(svd.right, sites[k + 1], {{kMpoRight, kMpoLeft}});  // (bond, o, i, wr)
        sites[k + 1] = std::move(next).relabeled({kMpoLeft, kOut, kIn, kMpoRight});
    }
    // right-to-left: truncate against the now-orthonormal left block
    for (std::size_t k = n - 1; k > 0; --k) {
        const std::size_t full = sites[k].dim(kMpoLeft);
        SvdResult svd = svd_split(sites[k], {kMpoLeft}, full, cutoff, "bond");  // U(wl, bond), V(bond, o, i, wr)
        const std::size_t keep = svd.singular_values.size();
        for (std::size_t r = 0; r < svd.left.dim(kMpoLeft); ++r)
            for (std::size_t j = 0; j < keep; ++j) svd.left.data()[r * keep + j] *= svd.singular_values[j];
        sites[k] = std::move(svd.right).relabeled({kMpoLeft, kOut, kIn, kMpoRight});
        DenseTensor prev = contract(sites[k - 1], svd.left, {{kMpoRight, kMpoLeft}});  // (wl, o, i, bond)
        sites[k - 1] = std::move(prev).relabeled({kMpoLeft, kOut, kIn, kMpoRight});
    }
    for (DenseTensor& w : sites) w *= 1.0 / s;
}

}  // namespace detail

/// Compile `offset + sum_t coefficient_t * prod(factors_t)` over `n` sites.
inline MatrixProductOperator compile(const std::vector<OperatorTerm>& terms, std::size_t n, double offset = 0.0,
                                     double compress_cutoff = kMpoCompressCutoff) {
    if (n == 0) throw std::invalid_argument("compile needs at least one site");
    for (const OperatorTerm& t : terms) validate_term(t, n);
    std::vector<DenseTensor> sites = detail::fsm_mpo(terms, n);
    detail::compress_mpo(sites, compress_cutoff);
    return MatrixProductOperator(std::move(sites), offset);
}

/// a * H_x + b * H_z, where the constant belongs to H_z and is scaled by b.
inline MatrixProductOperator mix(const std::vector<OperatorTerm>& hx_terms,
                                 const std::vector<OperatorTerm>& hz_terms, double a, double b, double offset,
                                 std::size_t n, double compress_cutoff = kMpoCompressCutoff) {
    if (!std::isfinite(a) || !std::isfinite(b)) throw std::invalid_argument("mix weights must be finite");
    std::vector<OperatorTerm> terms;
    terms.reserve(hx_terms.size() + hz_terms.size());
    if (a != 0.0)
        for (OperatorTerm t : hx_terms) {
            t.coefficient *= a;
            terms.push_back(std::move(t));
        }
    if (b != 0.0)
        for (OperatorTerm t : hz_terms) {
            t.coefficient *= b;
            terms.push_back(std::move(t));
        }
    for (const OperatorTerm& t : hx_terms) validate_term(t, n);
    for (const OperatorTerm& t : hz_terms) validate_term(t, n);
    return compile(terms, n, b * offset, compress_cutoff);
}

namespace detail {

/// env(bra, mpo, ket) extended by one site to the right.
inline DenseTensor mpo_transfer_right(const DenseTensor& env, const DenseTensor& bra, const DenseTensor& w,
                                      const DenseTensor& ket) {
    DenseTensor x = contract(env, ket, {{"ket", kLeft}});                       // (bra, mpo, p, r)
    DenseTensor y = contract(x, w, {{"mpo", kMpoLeft}, {kPhys, kIn}});        // (bra, r, o, wr)
    y.relabel(kRight, "ket");
    DenseTensor z = contract(bra, y, {{kLeft, "bra"}, {kPhys, kOut}});       // (r, ket, wr)
    return std::move(z).relabeled({"bra", "ket", "mpo"}).permuted({"bra", "mpo", "ket"});
}

/// env(bra, mpo, ket) extended by one site to the left.
inline DenseTensor mpo_transfer_left(const DenseTensor& env, const DenseTensor& bra, const DenseTensor& w,
                                     const DenseTensor& ket) {
    DenseTensor x = contract(ket, env, {{kRight, "ket"}});                      // (l, p, bra, mpo)
    DenseTensor y = contract(x, w, {{"mpo", kMpoRight}, {kPhys, kIn}});       // (l, bra, wl, o)
    y.relabel(kLeft, "ket");
    DenseTensor z = contract(bra, y, {{kRight, "bra"}, {kPhys, kOut}});      // (l, ket, wl)
    return std::move(z).relabeled({"bra", "ket", "mpo"}).permuted({"bra", "mpo", "ket"});
}

inline DenseTensor unit_mpo_env() { return DenseTensor({"bra", "mpo", "ket"}, {1, 1, 1}, {1.0}); }

}  // namespace detail

/// <psi|H|psi> / <psi|psi>, including the offset.
inline double expectation(const MatrixProductState& state, const MatrixProductOperator& h) {
    if (state.size() != h.size()) throw std::invalid_argument("expectation: MPS/MPO length mismatch");
    DenseTensor env = detail::unit_mpo_env();
    for (std::size_t k = 0; k < state.size(); ++k)
        env = detail::mpo_transfer_right(env, state.site(k), h.site(k), state.site(k));
    return env.scalar_value() / inner(state, state) + h.offset();
}

}  // namespace hopsweep
