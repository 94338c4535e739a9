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

#include "chanpred/errors.hpp"
#include "chanpred/numerics.hpp"
#include "chanpred/random.hpp"

namespace chanpred {

inline constexpr double kSpeedOfLight = 299'792'458.0;  // m/s

inline constexpr double kmh_to_mps(double kmh) { return kmh / 3.6; }

/// SNR is 1/sigma_n^2 for the unit-power channel.
inline double snr_db_to_noise_var(double snr_db) { return std::pow(10.0, -snr_db / 10.0); }

struct ModelParams {
    double carrier_freq_hz = 2.0e9;
    double symbol_duration_s = 20.57e-6;
    double velocity_mps = 0.0;
    std::size_t num_paths = 1;
    std::size_t obs_len = 16;   // M
    std::size_t pred_len = 4;   // N

    /// B_D = v f_c / c
    double doppler_bandwidth() const { return velocity_mps * carrier_freq_hz / kSpeedOfLight; }

    void validate() const {
        if (!(carrier_freq_hz > 0.0)) throw DomainError("carrier frequency must be positive");
        if (!(symbol_duration_s > 0.0)) throw DomainError("symbol duration must be positive");
        if (!(velocity_mps >= 0.0) || !std::isfinite(velocity_mps))
            throw DomainError("velocity must be finite and non-negative");
        if (num_paths < 1) throw DomainError("at least one path is required");
        if (obs_len < 1 || pred_len < 1)
            throw DomainError("observation and prediction lengths must be positive");
    }
};

/// Propagation state of one block: P plane waves with fixed DoA and phase.
struct ChannelScenario {
    std::vector<double> doas;      // radians
    std::vector<double> phases;    // radians
    std::vector<double> dopplers;  // Hz
    std::vector<cplx> amplitudes;  // |a_p| = 1/sqrt(P)

    std::size_t num_paths() const { return doas.size(); }
};

/// Builds the derived quantities for given DoAs and phases.
inline ChannelScenario make_scenario(const ModelParams& params, std::vector<double> doas,
                                     std::vector<double> phases) {
    if (doas.size() != phases.size() || doas.empty())
        throw DimensionError("make_scenario: need one phase per DoA");
    ChannelScenario s;
    const double bd = params.doppler_bandwidth();
    const double amp = 1.0 / std::sqrt(static_cast<double>(doas.size()));
    s.dopplers.reserve(doas.size());
    s.amplitudes.reserve(doas.size());
    for (std::size_t p = 0; p < doas.size(); ++p) {
        s.dopplers.push_back(bd * std::cos(doas[p]));
        s.amplitudes.push_back(std::polar(amp, phases[p]));
    }
    s.doas = std::move(doas);
    s.phases = std::move(phases);
    return s;
}

/// Draws P independent DoAs and phases, each uniform on [-pi, pi).
inline ChannelScenario sample_scenario(const ModelParams& params, RandomStream& rng) {
    std::vector<double> doas(params.num_paths);
    std::vector<double> phases(params.num_paths);
    for (std::size_t p = 0; p < params.num_paths; ++p) {
        doas[p] = rng.uniform(-std::numbers::pi, std::numbers::pi);
        phases[p] = rng.uniform(-std::numbers::pi, std::numbers::pi);
    }
    return make_scenario(params, std::move(doas), std::move(phases));
}

/// Channel coefficients h[0..M+N-1] in time order.
inline CVector generate_block(const ChannelScenario& scenario, const ModelParams& params) {
    const auto len = static_cast<Eigen::Index>(params.obs_len + params.pred_len);
    CVector h = CVector::Zero(len);
    for (std::size_t p = 0; p < scenario.num_paths(); ++p) {
        const double w = 2.0 * std::numbers::pi * scenario.dopplers[p] * params.symbol_duration_s;
        for (Eigen::Index m = 0; m < len; ++m)
            h[m] += scenario.amplitudes[p] * std::polar(1.0, w * static_cast<double>(m));
    }
    return h;
}

/// Observation-window vector [h[M-1], ..., h[0]] (newest first).
inline CVector observation_window(const CVector& block, std::size_t obs_len) {
    if (static_cast<std::size_t>(block.size()) < obs_len)
        throw DimensionError("observation_window: block shorter than observation length");
    return block.head(static_cast<Eigen::Index>(obs_len)).reverse();
}

inline CVector add_noise(const CVector& h, double noise_var, RandomStream& rng) {
    if (!(noise_var > 0.0)) throw DomainError("add_noise: noise variance must be positive");
    CVector y = h;
    for (Eigen::Index i = 0; i < y.size(); ++i) y[i] += rng.complex_normal(noise_var);
    return y;
}

/// One noisy observation with its prediction target and the scenario that produced it.
struct Realization {
    ChannelScenario scenario;
    CVector y;    // length M, newest first
    cplx target;  // h[M-1+l]
};

inline void check_step(const ModelParams& params, std::size_t step) {
    if (step < 1 || step > params.pred_len)
        throw InvalidStepError("prediction step must lie in [1, pred_len]");
}

/// Draws scenario, block and noise (in that order) from `rng`.
inline Realization draw_realization(const ModelParams& params, std::size_t step, double noise_var,
                                    RandomStream& rng) {
    Realization r;
    r.scenario = sample_scenario(params, rng);
    const CVector block = generate_block(r.scenario, params);
    r.y = add_noise(observation_window(block, params.obs_len), noise_var, rng);
    r.target = block[static_cast<Eigen::Index>(params.obs_len - 1 + step)];
    return r;
}

struct ObservationBatch {
    std::vector<CVector> observations;
    std::vector<cplx> targets;
    std::vector<ChannelScenario> scenarios;
    double noise_var = 0.0;

    std::size_t size() const { return observations.size(); }
};

inline ObservationBatch make_batch(const ModelParams& params, std::size_t step,
                                   std::size_t batch_size, double noise_var, RandomStream& rng) {
    params.validate();
    check_step(params, step);
    if (batch_size < 1) throw DomainError("make_batch: batch size must be positive");
    if (!(noise_var > 0.0)) throw DomainError("make_batch: noise variance must be positive");
    ObservationBatch batch;
    batch.noise_var = noise_var;
    batch.observations.reserve(batch_size);
    batch.targets.reserve(batch_size);
    batch.scenarios.reserve(batch_size);
    for (std::size_t b = 0; b < batch_size; ++b) {
        Realization r = draw_realization(params, step, noise_var, rng);
        batch.observations.push_back(std::move(r.y));
        batch.targets.push_back(r.target);
        batch.scenarios.push_back(std::move(r.scenario));
    }
    return batch;
}

}  // namespace chanpred
