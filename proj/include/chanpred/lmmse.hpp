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

#include "chanpred/channel.hpp"
#include "chanpred/covariance.hpp"
#include "chanpred/numerics.hpp"

namespace chanpred {

/// Linear one-coefficient predictor: h_hat = sum_k weights[k] * y[k] (y newest first).
struct PredictorRow {
    CVector weights;
    std::size_t step = 0;

    std::size_t obs_len() const { return static_cast<std::size_t>(weights.size()); }
};

/// Full extended filter W = Sigma_ext S (S^T Sigma_ext S + sigma^2 I)^-1, (M+l) x M.
/// Row 0 is the l-step predictor; the bottom M x M block S^T W equals Sigma_h Sigma_y^-1.
struct ExtendedFilter {
    CMatrix w;
    double noise_var = 0.0;
    std::size_t step = 0;

    std::size_t obs_len() const { return static_cast<std::size_t>(w.cols()); }

    PredictorRow output_row() const { return {w.row(0).transpose(), step}; }

    /// S^T W
    CMatrix observation_block() const { return w.bottomRows(w.cols()); }
};

inline void check_noise_var(double noise_var) {
    if (!(noise_var > 0.0) || !std::isfinite(noise_var))
        throw DomainError("noise variance must be positive and finite");
}

/// h_hat = c^H Sigma_y^-1 y with c^H = [R[l], ..., R[M-1+l]].
inline PredictorRow lmmse_direct(const CovarianceSpec& spec, std::size_t obs_len, std::size_t step,
                                 double noise_var) {
    check_noise_var(noise_var);
    const auto m = static_cast<Eigen::Index>(obs_len);
    const CMatrix sigma_h = toeplitz_cov(spec, obs_len);
    if (step < 1) throw InvalidStepError("lmmse_direct: step must be at least 1");
    CVector corr(m);
    for (Eigen::Index k = 0; k < m; ++k)
        corr[k] = covariance_at(spec, step + static_cast<std::size_t>(k));
    const CMatrix sigma_y = sigma_h + noise_var * CMatrix::Identity(m, m);
    // row = c^H Sigma_y^-1  <=>  row^H = Sigma_y^-1 (c^H)^H
    const CMatrix x = hermitian_solve(sigma_y, corr.conjugate());
    return {x.col(0).conjugate(), step};
}

inline ExtendedFilter lmmse_extended(const CovarianceSpec& spec, std::size_t obs_len,
                                     std::size_t step, double noise_var) {
    check_noise_var(noise_var);
    const auto m = static_cast<Eigen::Index>(obs_len);
    const CMatrix ext = extended_cov(spec, obs_len, step);
    const CovarianceParts parts = extract_parts(ext, make_selection(obs_len, step));
    const CMatrix sigma_y = parts.sigma_h + noise_var * CMatrix::Identity(m, m);
    // W = Sigma_ext S Sigma_y^-1  =>  W^H = Sigma_y^-1 S^T Sigma_ext
    const CMatrix x = hermitian_solve(sigma_y, ext.bottomRows(m));
    return {x.adjoint(), noise_var, step};
}

inline cplx predict(const PredictorRow& row, const CVector& y) {
    if (y.size() != row.weights.size()) throw DimensionError("predict: observation length mismatch");
    return (row.weights.array() * y.array()).sum();
}

/// Covariance under the infinitely-many-paths assumption for the given velocity.
inline CovarianceSpec jakes_spec(const ModelParams& params) {
    if (!(params.velocity_mps >= 0.0)) throw DomainError("jakes_spec: negative velocity");
    return CovarianceSpec::jakes(params.doppler_bandwidth(), params.symbol_duration_s);
}

}  // namespace chanpred
