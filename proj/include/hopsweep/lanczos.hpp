#pragma once

// Restarted Lanczos for the lowest eigenpair of an implicitly applied real
// symmetric operator.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "hopsweep/tensor.hpp"

namespace hopsweep {

struct LanczosParams {
    std::size_t krylov_dim = 4;
    double tol = 1e-14;          ///< residual threshold, relative to max(1, |lambda|)
    std::size_t max_restarts = 4;  ///< extra Krylov cycles after the first
};

struct EigenPair {
    double value = 0.0;
    DenseTensor vector;
    double residual = 0.0;  ///< ||H v - lambda v|| of the returned vector
    std::size_t matvecs = 0;
};

class EigensolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// `apply(x)` must return H x as a tensor with the labels and dims of `x`
/// (label order may differ).
template <class Apply>
EigenPair local_eigensolve(Apply&& apply, const DenseTensor& guess, const LanczosParams& p = {}) {
    if (p.krylov_dim < 2) throw std::invalid_argument("krylov_dim must be at least 2");
    const double g = guess.norm();
    if (!(g > 0.0)) throw EigensolverError("zero initial vector");
    if (!std::isfinite(g)) throw EigensolverError("non-finite initial vector");

    const auto n = static_cast<Eigen::Index>(guess.size());
    DenseTensor work = guess;
    EigenPair out;
    auto matvec = [&](const Eigen::VectorXd& x) {
        std::copy(x.data(), x.data() + n, work.data().begin());
        DenseTensor y = apply(work);
        if (y.labels() != work.labels()) y = y.permuted(work.labels());
        if (y.dims() != work.dims()) throw EigensolverError("operator changed the vector shape");
        ++out.matvecs;
        Eigen::VectorXd r = Eigen::Map<const Eigen::VectorXd>(y.data().data(), n);
        if (!r.allFinite()) throw EigensolverError("operator produced non-finite values");
        return r;
    };

    Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(guess.data().data(), n) / g;
    Eigen::VectorXd hv = matvec(v);
    double lambda = v.dot(hv);
    double residual = (hv - lambda * v).norm();
    const std::size_t kmax = std::min<std::size_t>(p.krylov_dim, static_cast<std::size_t>(n));

    for (std::size_t cycle = 0; cycle <= p.max_restarts; ++cycle) {
        if (residual <= p.tol * std::max(1.0, std::abs(lambda)) || kmax < 2) break;
        std::vector<Eigen::VectorXd> basis{v}, images{hv};
        std::vector<double> alpha, beta;
        Eigen::VectorXd w = hv;
        for (std::size_t j = 0;; ++j) {
            alpha.push_back(basis[j].dot(w));
            // full reorthogonalization; the spaces here are tiny
            for (const auto& b : basis) w -= b.dot(w) * b;
            for (const auto& b : basis) w -= b.dot(w) * b;
            const double bnorm = w.norm();
            if (j + 1 == kmax || bnorm <= 1e-14 * std::max(1.0, std::abs(alpha.back()))) break;
            beta.push_back(bnorm);
            basis.push_back(w / bnorm);
            w = matvec(basis.back());
            images.push_back(w);
        }
        const auto k = static_cast<Eigen::Index>(alpha.size());
        Eigen::MatrixXd t = Eigen::MatrixXd::Zero(k, k);
        for (Eigen::Index i = 0; i < k; ++i) {
            t(i, i) = alpha[static_cast<std::size_t>(i)];
            if (i + 1 < k) t(i, i + 1) = t(i + 1, i) = beta[static_cast<std::size_t>(i)];
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
        const Eigen::VectorXd c = es.eigenvectors().col(0);
        Eigen::VectorXd next = Eigen::VectorXd::Zero(n), hnext = Eigen::VectorXd::Zero(n);
        for (Eigen::Index i = 0; i < k; ++i) {
            next += c(i) * basis[static_cast<std::size_t>(i)];
            hnext += c(i) * images[static_cast<std::size_t>(i)];
        }
        const double scale = next.norm();
        next /= scale;
        hnext /= scale;
        const double lnext = next.dot(hnext);
        if (lnext > lambda) break;  // only round-off can get here; keep the better vector
        v = std::move(next);
        hv = std::move(hnext);
        lambda = lnext;
        residual = (hv - lambda * v).norm();
        if (static_cast<std::size_t>(k) < kmax) break;  // invariant subspace found
    }

    out.value = lambda;
    out.residual = residual;
    out.vector = guess;
    std::copy(v.data(), v.data() + n, out.vector.data().begin());
    return out;
}

}  // namespace hopsweep
