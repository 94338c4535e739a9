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
#include <vector>

#include "chanpred/channel.hpp"
#include "chanpred/covariance.hpp"
#include "chanpred/lmmse.hpp"
#include "chanpred/numerics.hpp"
#include "chanpred/random.hpp"

namespace chanpred {

enum class DoaSampling {
    uniform_grid,   // single path, DoAs equi-spacing cos(delta) over (-1, 1)
    random_tuples,  // i.i.d. draws of P-tuples from the uniform prior
};

struct GridStrategy {
    std::size_t num_samples = 16;
    DoaSampling sampling = DoaSampling::uniform_grid;
    std::size_t assumed_paths = 1;

    /// Uniform grid for a single path, random tuples otherwise.
    static GridStrategy for_paths(std::size_t num_samples, std::size_t paths) {
        return {num_samples, paths == 1 ? DoaSampling::uniform_grid : DoaSampling::random_tuples,
                paths};
    }
};

/// Grid of DoA tuples. The uniform grid puts delta_i = arccos(2 (i + 1/2) / N - 1) so the
/// Doppler shifts B_D cos(delta_i) are equally spaced without touching +-B_D.
inline std::vector<std::vector<double>> grid_doas(const GridStrategy& strategy, RandomStream& rng) {
    if (strategy.num_samples < 1) throw DomainError("grid: at least one sample required");
    if (strategy.assumed_paths < 1) throw DomainError("grid: at least one path required");
    std::vector<std::vector<double>> doas(strategy.num_samples);
    const auto n = static_cast<double>(strategy.num_samples);
    for (std::size_t i = 0; i < strategy.num_samples; ++i) {
        if (strategy.sampling == DoaSampling::uniform_grid) {
            if (strategy.assumed_paths != 1)
                throw DomainError("grid: uniform grid is defined for a single path only");
            doas[i] = {std::acos(2.0 * (static_cast<double>(i) + 0.5) / n - 1.0)};
        } else {
            doas[i].resize(strategy.assumed_paths);
            for (auto& d : doas[i]) d = rng.uniform(-std::numbers::pi, std::numbers::pi);
        }
    }
    return doas;
}

/// LMMSE filters for each grid sample together with their log-likelihood biases.
struct FilterBank {
    std::size_t obs_len = 0;
    std::size_t step = 0;
    double noise_var = 0.0;
    std::vector<std::vector<double>> doas;
    std::vector<CovarianceSpec> specs;
    std::vector<CMatrix> filters;     // W_i, (M+l) x M
    std::vector<CVector> out_rows;    // e1^T W_i
    std::vector<CMatrix> obs_blocks;  // S^T W_i (Hermitian)
    std::vector<double> biases;       // log det(I - S^T W_i)

    std::size_t size() const { return filters.size(); }
};

/// b = log det(I - S^T W). Real and non-positive for a valid LMMSE filter.
inline double bias_term(const ExtendedFilter& filter) {
    const CMatrix block = filter.observation_block();
    const auto m = block.rows();
    const cplx ld = logdet(CMatrix::Identity(m, m) - block);
    if (std::abs(ld.imag()) > 1e-9)
        throw NumericFailure("bias_term: log-determinant has an imaginary part", 0);
    return ld.real();
}

/// Appends a sample built from an arbitrary covariance spec.
inline void add_bank_sample(FilterBank& bank, const CovarianceSpec& spec,
                            std::vector<double> doas = {}) {
    ExtendedFilter f = lmmse_extended(spec, bank.obs_len, bank.step, bank.noise_var);
    bank.biases.push_back(bias_term(f));
    bank.out_rows.push_back(f.w.row(0).transpose());
    bank.obs_blocks.push_back(hermitian_part(f.observation_block()));
    bank.filters.push_back(std::move(f.w));
    bank.specs.push_back(spec);
    bank.doas.push_back(std::move(doas));
}

inline FilterBank empty_bank(std::size_t obs_len, std::size_t step, double noise_var) {
    check_noise_var(noise_var);
    if (step < 1) throw InvalidStepError("bank: step must be at least 1");
    FilterBank bank;
    bank.obs_len = obs_len;
    bank.step = step;
    bank.noise_var = noise_var;
    return bank;
}

inline FilterBank build_bank(const GridStrategy& strategy, const ModelParams& params,
                             std::size_t step, double noise_var, RandomStream& rng) {
    params.validate();
    FilterBank bank = empty_bank(params.obs_len, step, noise_var);
    const double power = 1.0 / static_cast<double>(strategy.assumed_paths);
    for (auto& tuple : grid_doas(strategy, rng)) {
        std::vector<double> dopplers;
        for (double d : tuple) dopplers.push_back(params.doppler_bandwidth() * std::cos(d));
        const auto spec = CovarianceSpec::finite_paths(
            dopplers, std::vector<double>(tuple.size(), power), params.symbol_duration_s);
        add_bank_sample(bank, spec, std::move(tuple));
    }
    return bank;
}

/// C_hat = y y^H / sigma^2
inline CMatrix feature_full(const CVector& y, double noise_var) {
    check_noise_var(noise_var);
    return (y * y.adjoint()) / noise_var;
}

/// Scores tr(S^T W_i C_hat) + b_i via the dense trace.
inline RVector gridded_scores(const FilterBank& bank, const CMatrix& c_hat) {
    RVector s(static_cast<Eigen::Index>(bank.size()));
    for (std::size_t i = 0; i < bank.size(); ++i) {
        // tr(A B) = sum_ij A_ij B_ji; the imaginary residue is rounding only
        const cplx tr = (bank.obs_blocks[i].array() * c_hat.transpose().array()).sum();
        s[static_cast<Eigen::Index>(i)] = tr.real() + bank.biases[i];
    }
    return s;
}

/// Same scores for a rank-one C_hat: y^H (S^T W_i) y / sigma^2 + b_i.
inline RVector gridded_scores(const FilterBank& bank, const CVector& y, double noise_var) {
    RVector s(static_cast<Eigen::Index>(bank.size()));
    for (std::size_t i = 0; i < bank.size(); ++i) {
        const cplx q = y.dot(bank.obs_blocks[i] * y);  // dot conjugates its left argument
        s[static_cast<Eigen::Index>(i)] = q.real() / noise_var + bank.biases[i];
    }
    return s;
}

inline PredictorRow combine_rows(const FilterBank& bank, const RVector& probabilities) {
    CVector w = CVector::Zero(static_cast<Eigen::Index>(bank.obs_len));
    for (std::size_t i = 0; i < bank.size(); ++i)
        w += probabilities[static_cast<Eigen::Index>(i)] * bank.out_rows[i];
    return {w, bank.step};
}

inline PredictorRow gridded_row(const FilterBank& bank, const CMatrix& c_hat) {
    if (bank.size() == 0) throw DomainError("gridded_row: empty filter bank");
    return combine_rows(bank, softmax(gridded_scores(bank, c_hat)));
}

/// Gridded predictor for an observation, using the O(N_g M^2) quadratic-form scores.
inline PredictorRow gridded_row(const FilterBank& bank, const CVector& y) {
    if (bank.size() == 0) throw DomainError("gridded_row: empty filter bank");
    return combine_rows(bank, softmax(gridded_scores(bank, y, bank.noise_var)));
}

}  // namespace chanpred
