// SPDX-License-Identifier: Apache-2.0
//
// chanpred - channel predictors for time-variant flat-fading channels
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include <cstddef>
#include <iostream>
#include <optional>
#include <string>
#include <string_view>

#include "chanpred/gridded.hpp"
#include "chanpred/lmmse.hpp"
#include "chanpred/numerics.hpp"

namespace chanpred {

/// Common basis Q for the diagonal filter approximation S^T W = Q^H diag(w) Q.
enum class QKind {
    circulant,  // Q = F1, M x M DFT
    toeplitz,   // Q = F2, first M columns of the 2M x 2M DFT
};

inline std::string_view to_string(QKind kind) {
    return kind == QKind::circulant ? "circulant" : "toeplitz";
}

inline std::optional<QKind> parse_q_kind(std::string_view s) {
    if (s == "circulant" || s == "circ") return QKind::circulant;
    if (s == "toeplitz" || s == "toep") return QKind::toeplitz;
    return std::nullopt;
}

inline std::size_t feature_dim(QKind kind, std::size_t obs_len) {
    return kind == QKind::circulant ? obs_len : 2 * obs_len;
}

inline CMatrix q_matrix(QKind kind, std::size_t obs_len) {
    if (obs_len < 1) throw DimensionError("q_matrix: empty observation window");
    return dft_matrix(feature_dim(kind, obs_len), obs_len, true);
}

/// Least-squares fit of real spectral weights: minimizes ||H - Q^H diag(w) Q||_F.
///
/// Normal equations G w = d with G_kl = |q_k q_l^H|^2 and d_k = Re(q_k H q_k^H), q_k the rows
/// of Q. For Q = F2 the Gram matrix has a one-dimensional kernel ((-1)^k), which maps to the
/// zero matrix; the minimum-norm solution is returned. The Gram factorization depends only
/// on Q, so one SpectralFit serves a whole bank.
class SpectralFit {
public:
    explicit SpectralFit(CMatrix q) : q_(std::move(q)) {
        const auto k = q_.rows();
        const CMatrix inner = q_ * q_.adjoint();
        gram_ = inner.cwiseAbs2();
        cod_.setThreshold(1e-10);
        cod_.compute(gram_);
        const Eigen::Index nullity = (k == 2 * q_.cols()) ? 1 : 0;
        if (cod_.rank() < k - nullity)
            throw IllPosedDecomposition("spectral fit: Gram matrix rank " +
                                        std::to_string(cod_.rank()) + " below " +
                                        std::to_string(k - nullity));
    }

    const CMatrix& q() const noexcept { return q_; }
    const RMatrix& gram() const noexcept { return gram_; }

    /// `block` is S^T W (M x M), Hermitian within 1e-9 relative.
    RVector fit(const CMatrix& block) const {
        if (block.rows() != q_.cols() || block.cols() != q_.cols())
            throw DimensionError("spectral fit: filter block does not match Q");
        if (!is_hermitian(block, 1e-9)) throw DomainError("spectral fit: S^T W is not Hermitian");
        const CMatrix h = hermitian_part(block);
        const CMatrix qh = q_ * h;
        RVector d(q_.rows());
        double worst_imag = 0.0;
        for (Eigen::Index k = 0; k < q_.rows(); ++k) {
            const cplx v = qh.row(k).dot(q_.row(k));  // q_k H q_k^H
            d[k] = v.real();
            worst_imag = std::max(worst_imag, std::abs(v.imag()));
        }
        if (worst_imag > 1e-8)
            std::clog << "chanpred: warning: spectral fit discarded imaginary residue "
                      << worst_imag << '\n';
        return cod_.solve(d);
    }

    /// Q^H diag(w) Q
    CMatrix reconstruct(const RVector& w) const {
        return q_.adjoint() * w.cast<cplx>().asDiagonal() * q_;
    }

private:
    CMatrix q_;
    RMatrix gram_;
    Eigen::CompleteOrthogonalDecomposition<RMatrix> cod_;
};

inline RVector fit_spectral_weights(const CMatrix& block, const CMatrix& q) {
    return SpectralFit(q).fit(block);
}

inline RVector fit_spectral_weights(const ExtendedFilter& filter, const CMatrix& q) {
    return fit_spectral_weights(filter.observation_block(), q);
}

/// Closed form for circulant covariances: w_k = c_k / (c_k + sigma^2), c_k = q_k Sigma_h q_k^H.
inline RVector spectral_ratio_weights(const CMatrix& sigma_h, const CMatrix& q, double noise_var) {
    check_noise_var(noise_var);
    if (sigma_h.rows() != q.cols() || sigma_h.cols() != q.cols())
        throw DimensionError("spectral_ratio_weights: covariance does not match Q");
    const CMatrix qs = q * sigma_h;
    RVector w(q.rows());
    for (Eigen::Index k = 0; k < q.rows(); ++k) {
        const double c = qs.row(k).dot(q.row(k)).real();
        w[k] = c / (c + noise_var);
    }
    return w;
}

enum class FitMethod { least_squares, spectral_ratio };

/// c_hat = |Q y|^2 / sigma^2
inline RVector feature_compressed(const CVector& y, const CMatrix& q, double noise_var) {
    check_noise_var(noise_var);
    if (y.size() != q.cols()) throw DimensionError("feature_compressed: observation length mismatch");
    return (q * y).cwiseAbs2() / noise_var;
}

/// w_hat(c) = A2 softmax(A1 c + b)
struct StructuredModel {
    QKind q_kind = QKind::toeplitz;
    CMatrix q;   // K x M
    RMatrix a1;  // N_g x K, rows are the spectral weights
    CMatrix a2;  // M x N_g, columns are the bank's output rows
    RVector b;   // N_g
    std::size_t obs_len = 0;
    std::size_t step = 0;
    double noise_var = 0.0;

    std::size_t num_samples() const { return static_cast<std::size_t>(a1.rows()); }
    std::size_t feature_len() const { return static_cast<std::size_t>(a1.cols()); }
};

inline StructuredModel assemble_structured(const FilterBank& bank, QKind kind,
                                           FitMethod method = FitMethod::least_squares) {
    if (bank.size() == 0) throw DomainError("assemble_structured: empty filter bank");
    StructuredModel model;
    model.q_kind = kind;
    model.q = q_matrix(kind, bank.obs_len);
    model.obs_len = bank.obs_len;
    model.step = bank.step;
    model.noise_var = bank.noise_var;
    const auto n = static_cast<Eigen::Index>(bank.size());
    const auto m = static_cast<Eigen::Index>(bank.obs_len);
    model.a1.resize(n, model.q.rows());
    model.a2.resize(m, n);
    model.b.resize(n);

    std::optional<SpectralFit> fit;
    if (method == FitMethod::least_squares) fit.emplace(model.q);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto idx = static_cast<std::size_t>(i);
        if (method == FitMethod::least_squares) {
            model.a1.row(i) = fit->fit(bank.obs_blocks[idx]).transpose();
        } else {
            const CMatrix sigma_h = toeplitz_cov(bank.specs[idx], bank.obs_len);
            model.a1.row(i) = spectral_ratio_weights(sigma_h, model.q, bank.noise_var).transpose();
        }
        model.a2.col(i) = bank.out_rows[idx];
        model.b[i] = bank.biases[idx];
    }
    return model;
}

/// Multiply-add counter for cost instrumentation.
struct OpCounter {
    std::size_t multiply_adds = 0;
};

inline PredictorRow structured_row(const StructuredModel& model, const RVector& c_hat,
                                   OpCounter* counter = nullptr) {
    if (static_cast<std::size_t>(c_hat.size()) != model.feature_len())
        throw DimensionError("structured_row: feature length mismatch");
    const RVector p = softmax(model.a1 * c_hat + model.b);
    if (counter) counter->multiply_adds += model.a1.size() + model.a2.size();
    return {model.a2 * p.cast<cplx>(), model.step};
}

}  // namespace chanpred
