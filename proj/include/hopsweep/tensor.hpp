#pragma once

// Dense real tensors with labeled indices: the contraction and decomposition
// substrate for the MPS, MPO and DMRG code.
//
// Storage is row-major over dims() as listed (the last index varies fastest).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

extern "C" void dgesdd_(const char* jobz, const int* m, const int* n, double* a, const int* lda, double* s,
                        double* u, const int* ldu, double* vt, const int* ldvt, double* work, const int* lwork,
                        int* iwork, int* info);

namespace hopsweep {

using Label = std::string;
using LabelPair = std::pair<Label, Label>;

/// Relative squared-weight threshold used wherever truncation happens.
inline constexpr double kDefaultCutoff = 1e-10;

class TensorError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class DenseTensor {
public:
    /// Rank-0 tensor holding 0.
    DenseTensor() : data_(1, 0.0) {}

    /// Zero-filled tensor.
    DenseTensor(std::vector<Label> labels, std::vector<std::size_t> dims)
        : labels_(std::move(labels)), dims_(std::move(dims)) {
        check_shape();
        data_.assign(product(dims_), 0.0);
    }

    DenseTensor(std::vector<Label> labels, std::vector<std::size_t> dims, std::vector<double> data)
        : labels_(std::move(labels)), dims_(std::move(dims)), data_(std::move(data)) {
        check_shape();
        if (data_.size() != product(dims_))
            throw TensorError("tensor data length " + std::to_string(data_.size()) +
                              " does not match product of dims " + std::to_string(product(dims_)));
        if (!all_finite()) throw TensorError("tensor data contains non-finite values");
    }

    static DenseTensor scalar(double value) {
        DenseTensor t;
        t.data_[0] = value;
        return t;
    }

    std::size_t rank() const { return dims_.size(); }
    std::size_t size() const { return data_.size(); }
    const std::vector<std::size_t>& dims() const { return dims_; }
    const std::vector<Label>& labels() const { return labels_; }

    bool has_label(const Label& label) const {
        return std::find(labels_.begin(), labels_.end(), label) != labels_.end();
    }

    std::size_t axis(const Label& label) const {
        auto it = std::find(labels_.begin(), labels_.end(), label);
        if (it == labels_.end()) throw TensorError("label not found: '" + label + "'");
        return static_cast<std::size_t>(it - labels_.begin());
    }

    std::size_t dim(const Label& label) const { return dims_[axis(label)]; }

    std::span<const double> data() const { return data_; }
    std::span<double> data() { return data_; }

    double scalar_value() const {
        if (size() != 1) throw TensorError("tensor is not a scalar");
        return data_[0];
    }

    double& at(std::span<const std::size_t> index) { return data_[offset(index)]; }
    double at(std::span<const std::size_t> index) const { return data_[offset(index)]; }
    double& at(std::initializer_list<std::size_t> index) {
        return at(std::span<const std::size_t>(index.begin(), index.size()));
    }
    double at(std::initializer_list<std::size_t> index) const {
        return at(std::span<const std::size_t>(index.begin(), index.size()));
    }

    void relabel(const Label& from, const Label& to) {
        if (from == to) return;
        if (has_label(to)) throw TensorError("relabel would duplicate label '" + to + "'");
        labels_[axis(from)] = to;
    }

    DenseTensor relabeled(std::vector<Label> labels) const& {
        DenseTensor t = *this;
        t.set_labels(std::move(labels));
        return t;
    }
    DenseTensor relabeled(std::vector<Label> labels) && {
        set_labels(std::move(labels));
        return std::move(*this);
    }

    /// Same tensor with its axes reordered to match `order`.
    DenseTensor permuted(const std::vector<Label>& order) const {
        if (order.size() != rank()) throw TensorError("permutation must name every label once");
        std::vector<std::size_t> perm(rank());
        for (std::size_t k = 0; k < rank(); ++k) perm[k] = axis(order[k]);
        std::vector<std::size_t> check = perm;
        std::sort(check.begin(), check.end());
        if (std::adjacent_find(check.begin(), check.end()) != check.end())
            throw TensorError("permutation repeats a label");
        DenseTensor out;
        out.labels_ = order;
        out.dims_.resize(rank());
        for (std::size_t k = 0; k < rank(); ++k) out.dims_[k] = dims_[perm[k]];
        out.data_ = permute_data(dims_, data_, perm);
        return out;
    }

    double norm() const {
        double s = 0.0;
        for (double v : data_) s += v * v;
        return std::sqrt(s);
    }

    bool all_finite() const {
        return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
    }

    DenseTensor& operator*=(double alpha) {
        for (double& v : data_) v *= alpha;
        return *this;
    }
    friend DenseTensor operator*(double alpha, DenseTensor t) { return t *= alpha; }

    /// `perm[k]` is the source axis that becomes axis k.
    static std::vector<double> permute_data(const std::vector<std::size_t>& dims,
                                            std::span<const double> src,
                                            const std::vector<std::size_t>& perm) {
        const std::size_t r = dims.size();
        bool identity = true;
        for (std::size_t k = 0; k < r; ++k) identity = identity && perm[k] == k;
        if (identity || src.size() <= 1) return {src.begin(), src.end()};

        std::vector<std::size_t> src_strides(r, 1);
        for (std::size_t k = r - 1; k > 0; --k) src_strides[k - 1] = src_strides[k] * dims[k];
        std::vector<std::size_t> out_dims(r), stride(r);
        for (std::size_t k = 0; k < r; ++k) {
            out_dims[k] = dims[perm[k]];
            stride[k] = src_strides[perm[k]];
        }
        std::vector<double> out(src.size());
        std::vector<std::size_t> counter(r, 0);
        const std::size_t inner = out_dims[r - 1];
        const std::size_t inner_stride = stride[r - 1];
        std::size_t src_off = 0;
        for (std::size_t pos = 0; pos < out.size(); pos += inner) {
            const double* s = src.data() + src_off;
            double* o = out.data() + pos;
            for (std::size_t i = 0; i < inner; ++i) o[i] = s[i * inner_stride];
            // advance the odometer over all but the innermost axis
            for (std::size_t k = r - 1; k-- > 0;) {
                ++counter[k];
                src_off += stride[k];
                if (counter[k] < out_dims[k]) break;
                src_off -= stride[k] * out_dims[k];
                counter[k] = 0;
            }
        }
        return out;
    }

private:
    std::vector<Label> labels_;
    std::vector<std::size_t> dims_;
    std::vector<double> data_;

    static std::size_t product(const std::vector<std::size_t>& dims) {
        return std::accumulate(dims.begin(), dims.end(), std::size_t{1}, std::multiplies<>());
    }

    void check_shape() const {
        if (labels_.size() != dims_.size())
            throw TensorError("tensor needs exactly one label per dimension");
        for (std::size_t d : dims_)
            if (d == 0) throw TensorError("tensor extents must be positive");
        for (std::size_t i = 0; i < labels_.size(); ++i)
            for (std::size_t j = i + 1; j < labels_.size(); ++j)
                if (labels_[i] == labels_[j]) throw TensorError("duplicate label '" + labels_[i] + "'");
    }

    void set_labels(std::vector<Label> labels) {
        if (labels.size() != dims_.size()) throw TensorError("relabel needs one label per dimension");
        labels_ = std::move(labels);
        check_shape();
    }

    std::size_t offset(std::span<const std::size_t> index) const {
        if (index.size() != rank()) throw TensorError("index rank mismatch");
        std::size_t off = 0;
        for (std::size_t k = 0; k < rank(); ++k) {
            if (index[k] >= dims_[k]) throw std::out_of_range("tensor index out of range");
            off = off * dims_[k] + index[k];
        }
        return off;
    }
};

namespace detail {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstRowMap = Eigen::Map<const RowMatrix>;
using RowMap = Eigen::Map<RowMatrix>;

/// Tensor data permuted into a row-major (rows x cols) matrix.
struct MatrixView {
    std::vector<double> data;
    std::size_t rows = 1;
    std::size_t cols = 1;
    std::vector<Label> col_labels;
    std::vector<std::size_t> row_dims;
    std::vector<std::size_t> col_dims;
};

inline MatrixView as_matrix(const DenseTensor& t, const std::vector<Label>& rows,
                            const std::vector<Label>& cols) {
    if (rows.size() + cols.size() != t.rank())
        throw TensorError("matricization must use every label exactly once");
    MatrixView v;
    std::vector<std::size_t> perm;
    perm.reserve(t.rank());
    for (const Label& l : rows) {
        perm.push_back(t.axis(l));
        v.row_dims.push_back(t.dims()[perm.back()]);
        v.rows *= v.row_dims.back();
    }
    for (const Label& l : cols) {
        perm.push_back(t.axis(l));
        v.col_labels.push_back(l);
        v.col_dims.push_back(t.dims()[perm.back()]);
        v.cols *= v.col_dims.back();
    }
    std::vector<std::size_t> check = perm;
    std::sort(check.begin(), check.end());
    if (std::adjacent_find(check.begin(), check.end()) != check.end())
        throw TensorError("label used twice in matricization");
    v.data = DenseTensor::permute_data(t.dims(), t.data(), perm);
    return v;
}

/// Rows first in the given order, remaining labels as columns in tensor order.
inline MatrixView as_matrix(const DenseTensor& t, const std::vector<Label>& rows) {
    std::vector<Label> cols;
    for (const Label& l : t.labels())
        if (std::find(rows.begin(), rows.end(), l) == rows.end()) cols.push_back(l);
    return as_matrix(t, rows, cols);
}

}  // namespace detail

/// Sum over paired indices. The result carries the free labels of `a`
/// followed by the free labels of `b`, each in their original order.
inline DenseTensor contract(const DenseTensor& a, const DenseTensor& b,
                            std::span<const LabelPair> pairs) {
    std::vector<Label> a_contracted, b_contracted;
    for (const auto& [la, lb] : pairs) {
        const std::size_t ea = a.dim(la), eb = b.dim(lb);
        if (ea != eb)
            throw TensorError("extent mismatch contracting '" + la + "' (" + std::to_string(ea) +
                              ") with '" + lb + "' (" + std::to_string(eb) + ")");
        a_contracted.push_back(la);
        b_contracted.push_back(lb);
    }
    std::vector<Label> a_free, b_free;
    for (const Label& l : a.labels())
        if (std::find(a_contracted.begin(), a_contracted.end(), l) == a_contracted.end())
            a_free.push_back(l);
    for (const Label& l : b.labels())
        if (std::find(b_contracted.begin(), b_contracted.end(), l) == b_contracted.end())
            b_free.push_back(l);

    const detail::MatrixView am = detail::as_matrix(a, a_free, a_contracted);
    const detail::MatrixView bm = detail::as_matrix(b, b_contracted, b_free);

    std::vector<Label> labels = a_free;
    labels.insert(labels.end(), b_free.begin(), b_free.end());
    std::vector<std::size_t> dims = am.row_dims;
    dims.insert(dims.end(), bm.col_dims.begin(), bm.col_dims.end());

    DenseTensor out(labels, dims);
    detail::ConstRowMap A(am.data.data(), static_cast<Eigen::Index>(am.rows),
                          static_cast<Eigen::Index>(am.cols));
    detail::ConstRowMap B(bm.data.data(), static_cast<Eigen::Index>(bm.rows),
                          static_cast<Eigen::Index>(bm.cols));
    detail::RowMap C(out.data().data(), static_cast<Eigen::Index>(am.rows),
                     static_cast<Eigen::Index>(bm.cols));
    C.noalias() = A * B;
    return out;
}

inline DenseTensor contract(const DenseTensor& a, const DenseTensor& b,
                            std::initializer_list<LabelPair> pairs) {
    return contract(a, b, std::span<const LabelPair>(pairs.begin(), pairs.size()));
}

namespace detail {

struct ThinSvd {
    Eigen::MatrixXd u;   ///< rows x k
    Eigen::VectorXd s;   ///< k, nonincreasing
    Eigen::MatrixXd vt;  ///< k x cols
};

/// LAPACK divide and conquer, with one-sided Jacobi as the fallback when it
/// does not converge. Eigen 3.4.0's BDCSVD is avoided: it can index out of
/// bounds or return NaN on matrices with clustered singular values.
inline ThinSvd thin_svd(const Eigen::MatrixXd& matrix) {
    const int m = static_cast<int>(matrix.rows()), n = static_cast<int>(matrix.cols());
    const int k = std::min(m, n);
    ThinSvd r;
    r.u.resize(m, k);
    r.s.resize(k);
    r.vt.resize(k, n);
    Eigen::MatrixXd a = matrix;
    std::vector<int> iwork(static_cast<std::size_t>(8 * k));
    int info = 0, lwork = -1;
    double query = 0.0;
    dgesdd_("S", &m, &n, a.data(), &m, r.s.data(), r.u.data(), &m, r.vt.data(), &k, &query, &lwork, iwork.data(),
            &info);
    if (info == 0) {
        lwork = static_cast<int>(query);
        std::vector<double> work(static_cast<std::size_t>(std::max(lwork, 1)));
        dgesdd_("S", &m, &n, a.data(), &m, r.s.data(), r.u.data(), &m, r.vt.data(), &k, work.data(), &lwork,
                iwork.data(), &info);
    }
    if (info == 0 && r.u.allFinite() && r.s.allFinite() && r.vt.allFinite()) return r;
    Eigen::JacobiSVD<Eigen::MatrixXd> jac(matrix, Eigen::ComputeThinU | Eigen::ComputeThinV);
    r.u = jac.matrixU();
    r.s = jac.singularValues();
    r.vt = jac.matrixV().transpose();
    return r;
}

}  // namespace detail

struct SvdResult {
    DenseTensor left;                    ///< (row labels..., bond), orthonormal columns
    std::vector<double> singular_values;  ///< nonincreasing, nonnegative
    DenseTensor right;                   ///< (bond, remaining labels...), orthonormal rows
    double truncation_error = 0.0;       ///< discarded squared weight / total squared weight
};

/// Singular value decomposition across the bipartition `row_labels` | rest.
///
/// At most `max_rank` values are kept; trailing values are further dropped
/// while their cumulative squared weight stays below `cutoff` relative to the
/// total. At least one value always survives. Ties at the boundary keep the
/// first values in the decomposition's order; only the retained subspace is
/// meaningful.
inline SvdResult svd_split(const DenseTensor& t, const std::vector<Label>& row_labels,
                           std::size_t max_rank, double cutoff = kDefaultCutoff,
                           const Label& bond = "bond") {
    if (row_labels.empty() || row_labels.size() >= t.rank())
        throw TensorError("svd_split needs a nonempty strict subset of labels as rows");
    if (max_rank == 0) throw TensorError("svd_split max_rank must be positive");
    if (cutoff < 0.0) throw TensorError("svd_split cutoff must be nonnegative");

    const detail::MatrixView m = detail::as_matrix(t, row_labels);
    detail::ConstRowMap M(m.data.data(), static_cast<Eigen::Index>(m.rows),
                          static_cast<Eigen::Index>(m.cols));
    if (!M.allFinite()) throw TensorError("svd_split input contains non-finite values");
    const detail::ThinSvd svd = detail::thin_svd(M);
    const Eigen::VectorXd& s = svd.s;
    const std::size_t full = static_cast<std::size_t>(s.size());

    double total = 0.0;
    for (std::size_t k = 0; k < full; ++k) total += s[k] * s[k];
    std::size_t keep = std::min(max_rank, full);
    double discarded = 0.0;
    for (std::size_t k = keep; k < full; ++k) discarded += s[k] * s[k];
    if (total > 0.0) {
        while (keep > 1) {
            const double next = discarded + s[keep - 1] * s[keep - 1];
            if (next / total >= cutoff) break;
            discarded = next;
            --keep;
        }
    }

    SvdResult r;
    r.truncation_error = total > 0.0 ? discarded / total : 0.0;
    r.singular_values.assign(s.data(), s.data() + keep);

    std::vector<Label> left_labels = row_labels;
    left_labels.push_back(bond);
    std::vector<std::size_t> left_dims = m.row_dims;
    left_dims.push_back(keep);
    std::vector<double> left_data(m.rows * keep);
    detail::RowMap(left_data.data(), static_cast<Eigen::Index>(m.rows),
                   static_cast<Eigen::Index>(keep)) = svd.u.leftCols(keep);
    r.left = DenseTensor(std::move(left_labels), std::move(left_dims), std::move(left_data));

    std::vector<Label> right_labels{bond};
    right_labels.insert(right_labels.end(), m.col_labels.begin(), m.col_labels.end());
    std::vector<std::size_t> right_dims{keep};
    right_dims.insert(right_dims.end(), m.col_dims.begin(), m.col_dims.end());
    std::vector<double> right_data(keep * m.cols);
    detail::RowMap(right_data.data(), static_cast<Eigen::Index>(keep),
                   static_cast<Eigen::Index>(m.cols)) = svd.vt.topRows(keep);
    r.right = DenseTensor(std::move(right_labels), std::move(right_dims), std::move(right_data));
    return r;
}

struct QrResult {
    DenseTensor q;  ///< (row labels..., bond), orthonormal columns
    DenseTensor r;  ///< (bond, remaining labels...)
};

/// Thin QR across `row_labels` | rest; the bond extent is min(rows, cols).
inline QrResult qr_split(const DenseTensor& t, const std::vector<Label>& row_labels,
                         const Label& bond = "bond") {
    if (row_labels.empty() || row_labels.size() >= t.rank())
        throw TensorError("qr_split needs a nonempty strict subset of labels as rows");
    const detail::MatrixView m = detail::as_matrix(t, row_labels);
    detail::ConstRowMap M(m.data.data(), static_cast<Eigen::Index>(m.rows),
                          static_cast<Eigen::Index>(m.cols));
    const std::size_t k = std::min(m.rows, m.cols);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(M);
    Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(
                                                static_cast<Eigen::Index>(m.rows),
                                                static_cast<Eigen::Index>(k));
    Eigen::MatrixXd rr = qr.matrixQR()
                             .topRows(static_cast<Eigen::Index>(k))
                             .template triangularView<Eigen::Upper>();
    // fix signs so that diag(R) >= 0; makes the factorization unique
    for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(k); ++i) {
        if (rr(i, i) < 0.0) {
            rr.row(i) *= -1.0;
            q.col(i) *= -1.0;
        }
    }

    std::vector<Label> q_labels = row_labels;
    q_labels.push_back(bond);
    std::vector<std::size_t> q_dims = m.row_dims;
    q_dims.push_back(k);
    std::vector<double> q_data(m.rows * k);
    detail::RowMap(q_data.data(), static_cast<Eigen::Index>(m.rows), static_cast<Eigen::Index>(k)) = q;

    std::vector<Label> r_labels{bond};
    r_labels.insert(r_labels.end(), m.col_labels.begin(), m.col_labels.end());
    std::vector<std::size_t> r_dims{k};
    r_dims.insert(r_dims.end(), m.col_dims.begin(), m.col_dims.end());
    std::vector<double> r_data(k * m.cols);
    detail::RowMap(r_data.data(), static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(m.cols)) = rr;

    return {DenseTensor(std::move(q_labels), std::move(q_dims), std::move(q_data)),
            DenseTensor(std::move(r_labels), std::move(r_dims), std::move(r_data))};
}

}  // namespace hopsweep
