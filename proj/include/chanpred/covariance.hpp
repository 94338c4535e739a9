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

#include <cmath>
#include <cstddef>
#include <numbers>
#include <numeric>
#include <utility>
#include <vector>

#include "chanpred/channel.hpp"
#include "chanpred/errors.hpp"
#include "chanpred/numerics.hpp"

namespace chanpred {

/// Covariance function R[k] = E[h[m] h*[m+k]] of a unit-variance stationary fading process.
///
/// finite_paths: line spectrum, R[k] = sum_p |a_p|^2 exp(j 2 pi f_p T_s k)
/// jakes:        limit of infinitely many paths, R[k] = J0(2 pi B_D T_s k)
/// tabulated:    explicit values R[0..L-1]
class CovarianceSpec {
public:
    enum class Kind { finite_paths, jakes, tabulated };

    static CovarianceSpec finite_paths(std::vector<double> dopplers_hz, std::vector<double> powers,
                                       double symbol_duration_s) {
        if (dopplers_hz.size() != powers.size() || dopplers_hz.empty())
            throw DimensionError("finite_paths: need one power per Doppler shift");
        const double total = std::accumulate(powers.begin(), powers.end(), 0.0);
        if (std::abs(total - 1.0) > 1e-9) throw DomainError("finite_paths: powers must sum to 1");
        CovarianceSpec s(Kind::finite_paths, symbol_duration_s);
        s.dopplers_ = std::move(dopplers_hz);
        s.powers_ = std::move(powers);
        return s;
    }

    static CovarianceSpec jakes(double doppler_bandwidth_hz, double symbol_duration_s) {
        if (!(doppler_bandwidth_hz >= 0.0)) throw DomainError("jakes: negative Doppler bandwidth");
        CovarianceSpec s(Kind::jakes, symbol_duration_s);
        s.bandwidth_ = doppler_bandwidth_hz;
        return s;
    }

    static CovarianceSpec tabulated(std::vector<cplx> values) {
        if (values.empty()) throw DimensionError("tabulated: no values");
        CovarianceSpec s(Kind::tabulated, 1.0);
        s.table_ = std::move(values);
        return s;
    }

    /// Line spectrum of a concrete scenario (powers |a_p|^2).
    static CovarianceSpec from_scenario(const ChannelScenario& scenario, double symbol_duration_s) {
        std::vector<double> powers;
        powers.reserve(scenario.num_paths());
        for (const auto& a : scenario.amplitudes) powers.push_back(std::norm(a));
        // renormalize away the rounding of 1/sqrt(P)^2
        const double total = std::accumulate(powers.begin(), powers.end(), 0.0);
        for (auto& p : powers) p /= total;
        return finite_paths(scenario.dopplers, std::move(powers), symbol_duration_s);
    }

    Kind kind() const noexcept { return kind_; }
    double symbol_duration() const noexcept { return symbol_duration_; }
    const std::vector<double>& dopplers() const noexcept { return dopplers_; }
    const std::vector<double>& powers() const noexcept { return powers_; }
    double doppler_bandwidth() const noexcept { return bandwidth_; }
    const std::vector<cplx>& table() const noexcept { return table_; }

private:
    CovarianceSpec(Kind kind, double ts) : kind_(kind), symbol_duration_(ts) {
        if (!(ts > 0.0)) throw DomainError("symbol duration must be positive");
    }

    Kind kind_;
    double symbol_duration_;
    std::vector<double> dopplers_;
    std::vector<double> powers_;
    double bandwidth_ = 0.0;
    std::vector<cplx> table_;
};

inline cplx covariance_at(const CovarianceSpec& spec, std::size_t k) {
    const double lag = static_cast<double>(k);
    switch (spec.kind()) {
    case CovarianceSpec::Kind::finite_paths: {
        cplx r{0.0, 0.0};
        for (std::size_t p = 0; p < spec.dopplers().size(); ++p) {
            const double angle =
                2.0 * std::numbers::pi * spec.dopplers()[p] * spec.symbol_duration() * lag;
            r += spec.powers()[p] * std::polar(1.0, angle);
        }
        return r;
    }
    case CovarianceSpec::Kind::jakes:
        return {bessel_j0(2.0 * std::numbers::pi * spec.doppler_bandwidth() *
                          spec.symbol_duration() * lag),
                0.0};
    case CovarianceSpec::Kind::tabulated:
        if (k >= spec.table().size())
            throw DimensionError("covariance_at: lag beyond tabulated range");
        return spec.table()[k];
    }
    return {};
}

/// Hermitian Toeplitz matrix of size n: entry (i, j) = R[j - i] above the diagonal,
/// conjugate below. Matches the newest-first observation ordering.
inline CMatrix hermitian_toeplitz(const CovarianceSpec& spec, std::size_t n) {
    const auto size = static_cast<Eigen::Index>(n);
    std::vector<cplx> r(n);
    for (std::size_t k = 0; k < n; ++k) r[k] = covariance_at(spec, k);
    CMatrix a(size, size);
    for (Eigen::Index i = 0; i < size; ++i) {
        a(i, i) = cplx(r[0].real(), 0.0);
        for (Eigen::Index j = i + 1; j < size; ++j) {
            a(i, j) = r[static_cast<std::size_t>(j - i)];
            a(j, i) = std::conj(a(i, j));
        }
    }
    return a;
}

/// Covariance matrix Sigma_h of the M observed coefficients.
inline CMatrix toeplitz_cov(const CovarianceSpec& spec, std::size_t obs_len) {
    if (obs_len < 1) throw DimensionError("toeplitz_cov: empty observation window");
    return hermitian_toeplitz(spec, obs_len);
}

/// Covariance of [h[M-1+l], ..., h[M], h[M-1], ..., h[0]].
inline CMatrix extended_cov(const CovarianceSpec& spec, std::size_t obs_len, std::size_t step) {
    if (step < 1) throw InvalidStepError("extended_cov: step must be at least 1");
    if (obs_len < 1) throw DimensionError("extended_cov: empty observation window");
    return hermitian_toeplitz(spec, obs_len + step);
}

/// e1 (first standard basis vector of length M+l) and S = [0; I_M].
struct SelectionOps {
    std::size_t obs_len = 0;
    std::size_t step = 0;
    CVector e1;
    CMatrix s;
};

inline SelectionOps make_selection(std::size_t obs_len, std::size_t step) {
    const auto m = static_cast<Eigen::Index>(obs_len);
    const auto l = static_cast<Eigen::Index>(step);
    SelectionOps ops{obs_len, step, CVector::Zero(m + l), CMatrix::Zero(m + l, m)};
    ops.e1[0] = 1.0;
    ops.s.bottomRows(m) = CMatrix::Identity(m, m);
    return ops;
}

struct CovarianceParts {
    CVector corr_row;  // [R[l], R[1+l], ..., R[M-1+l]] = e1^T Sigma_ext S
    CMatrix sigma_h;   // S^T Sigma_ext S
};

/// Slices the correlation row and the observation covariance out of the extended covariance.
inline CovarianceParts extract_parts(const CMatrix& ext, const SelectionOps& ops) {
    const auto m = static_cast<Eigen::Index>(ops.obs_len);
    const auto l = static_cast<Eigen::Index>(ops.step);
    if (ext.rows() != m + l || ext.cols() != m + l || ops.s.rows() != m + l || ops.s.cols() != m)
        throw DimensionError("extract_parts: extended covariance does not match selection");
    return {ext.row(0).segment(l, m).transpose(), ext.bottomRightCorner(m, m)};
}

/// Covariance averaged over uniform DoAs by midpoint quadrature; converges to the Jakes
/// covariance. Used for the per-velocity reading of the genie predictor.
inline CovarianceSpec prior_averaged_spec(const ModelParams& params, std::size_t max_lag,
                                          std::size_t quadrature_points = 4096) {
    std::vector<cplx> table(max_lag + 1, cplx{0.0, 0.0});
    const double bd = params.doppler_bandwidth();
    for (std::size_t q = 0; q < quadrature_points; ++q) {
        const double doa = -std::numbers::pi + 2.0 * std::numbers::pi * (static_cast<double>(q) + 0.5) /
                                                   static_cast<double>(quadrature_points);
        const double w = 2.0 * std::numbers::pi * bd * std::cos(doa) * params.symbol_duration_s;
        for (std::size_t k = 0; k <= max_lag; ++k)
            table[k] += std::polar(1.0, w * static_cast<double>(k));
    }
    for (auto& v : table) v /= static_cast<double>(quadrature_points);
    table[0] = 1.0;
    return CovarianceSpec::tabulated(std::move(table));
}

}  // namespace chanpred
