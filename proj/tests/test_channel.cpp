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

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "chanpred/channel.hpp"
#include "chanpred/covariance.hpp"
#include "chanpred/random.hpp"
#include "oracles.hpp"

using namespace chanpred;

namespace {

ModelParams params_for(double v_mps, std::size_t paths = 1, std::size_t m = 16, std::size_t n = 4) {
    ModelParams p;
    p.velocity_mps = v_mps;
    p.num_paths = paths;
    p.obs_len = m;
    p.pred_len = n;
    return p;
}

}  // namespace

TEST(RandomStream, SplitIgnoresParentDraws) {
    RandomStream a(42);
    RandomStream b(42);
    for (int i = 0; i < 100; ++i) b.uniform(0.0, 1.0);
    RandomStream ca = a.split(7);
    RandomStream cb = b.split(7);
    for (int i = 0; i < 10; ++i) EXPECT_EQ(ca.uniform(0.0, 1.0), cb.uniform(0.0, 1.0));
}

TEST(RandomStream, DistinctKeysDiffer) {
    RandomStream r(0);
    EXPECT_NE(r.split(1).uniform(0.0, 1.0), r.split(2).uniform(0.0, 1.0));
    EXPECT_NE(r.split({1, 2}).uniform(0.0, 1.0), r.split({2, 1}).uniform(0.0, 1.0));
    EXPECT_NE(RandomStream(0).uniform(0.0, 1.0), RandomStream(1).uniform(0.0, 1.0));
}

TEST(ModelParams, DopplerBandwidthFromVelocity) {
    const ModelParams p = params_for(27.78);
    EXPECT_DOUBLE_EQ(p.doppler_bandwidth(), 27.78 * 2.0e9 / 299792458.0);
    EXPECT_NEAR(p.doppler_bandwidth(), 185.26, 0.1);
    const ChannelScenario s = make_scenario(p, {0.0}, {0.0});
    EXPECT_DOUBLE_EQ(s.dopplers[0], p.doppler_bandwidth());
}

TEST(ModelParams, Validation) {
    ModelParams p;
    EXPECT_NO_THROW(p.validate());
    p.velocity_mps = -1.0;
    EXPECT_THROW(p.validate(), DomainError);
    p = ModelParams{};
    p.num_paths = 0;
    EXPECT_THROW(p.validate(), DomainError);
    p = ModelParams{};
    p.obs_len = 0;
    EXPECT_THROW(p.validate(), DomainError);
    p = ModelParams{};
    p.carrier_freq_hz = 0.0;
    EXPECT_THROW(p.validate(), DomainError);
}

TEST(SampleScenario, ZeroVelocityHasZeroDoppler) {
    RandomStream rng(1);
    const ModelParams p = params_for(0.0, 5);
    for (int i = 0; i < 20; ++i)
        for (double f : sample_scenario(p, rng).dopplers) EXPECT_EQ(f, 0.0);
}

TEST(SampleScenario, AmplitudesAndRanges) {
    RandomStream rng(2);
    const ModelParams p = params_for(30.0, 3);
    for (int i = 0; i < 200; ++i) {
        const ChannelScenario s = sample_scenario(p, rng);
        ASSERT_EQ(s.num_paths(), 3u);
        for (std::size_t k = 0; k < 3; ++k) {
            EXPECT_NEAR(std::abs(s.amplitudes[k]), 1.0 / std::sqrt(3.0), 1e-15);
            EXPECT_GE(s.doas[k], -std::numbers::pi);
            EXPECT_LT(s.doas[k], std::numbers::pi);
            EXPECT_GE(s.phases[k], -std::numbers::pi);
            EXPECT_LT(s.phases[k], std::numbers::pi);
            EXPECT_NEAR(s.dopplers[k], p.doppler_bandwidth() * std::cos(s.doas[k]), 1e-12);
            EXPECT_NEAR(std::arg(s.amplitudes[k]), s.phases[k], 1e-12);
        }
    }
}

TEST(SampleScenario, MismatchedInputs) {
    EXPECT_THROW(make_scenario(ModelParams{}, {0.0, 1.0}, {0.0}), DimensionError);
    EXPECT_THROW(make_scenario(ModelParams{}, {}, {}), DimensionError);
}

TEST(GenerateBlock, ZeroDopplerIsConstantOnes) {
    const ModelParams p = params_for(0.0);
    const CVector h = generate_block(make_scenario(p, {1.0}, {0.0}), p);
    ASSERT_EQ(h.size(), 20);
    for (Eigen::Index m = 0; m < h.size(); ++m) EXPECT_LE(std::abs(h[m] - 1.0), 1e-15);
}

TEST(GenerateBlock, SinglePathHasUnitModulus) {
    RandomStream rng(3);
    const ModelParams p = params_for(40.0);
    const CVector h = generate_block(sample_scenario(p, rng), p);
    for (Eigen::Index m = 0; m < h.size(); ++m) EXPECT_NEAR(std::abs(h[m]), 1.0, 1e-14);
}

TEST(GenerateBlock, TwoOpposingPathsGiveCosine) {
    const ModelParams p = params_for(500.0, 2, 16, 16);
    const ChannelScenario s = make_scenario(p, {0.0, std::numbers::pi}, {0.0, 0.0});
    const double f = p.doppler_bandwidth();
    const CVector h = generate_block(s, p);
    for (Eigen::Index m = 0; m < h.size(); ++m) {
        oracle::cplx direct{0.0, 0.0};
        for (std::size_t k = 0; k < 2; ++k) {
            const double a = 2.0 * std::numbers::pi * s.dopplers[k] * p.symbol_duration_s * m;
            direct += oracle::cplx(std::cos(a), std::sin(a)) / std::sqrt(2.0);
        }
        EXPECT_LE(std::abs(h[m] - direct), 1e-14);
        EXPECT_NEAR(h[m].real(), std::sqrt(2.0) * std::cos(2.0 * std::numbers::pi * f * p.symbol_duration_s * m), 1e-13);
        EXPECT_NEAR(h[m].imag(), 0.0, 1e-13);
    }
}

TEST(GenerateBlock, UnitAveragePower) {
    RandomStream rng(4);
    const ModelParams p = params_for(25.0, 4);
    double power = 0.0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) power += std::norm(generate_block(sample_scenario(p, rng), p)[7]);
    EXPECT_NEAR(power / n, 1.0, 0.03);
}

TEST(GenerateBlock, EmpiricalAutocorrelationMatchesLineSpectrum) {
    RandomStream rng(5);
    const ModelParams p = params_for(150.0, 3, 8, 8);
    const std::vector<double> doas = {0.3, 1.9, -2.5};
    ChannelScenario fixed = make_scenario(p, doas, {0.0, 0.0, 0.0});
    std::vector<double> powers(3, 1.0 / 3.0);
    const int n = 100000;
    std::vector<oracle::cplx> acc(8, {0.0, 0.0});
    for (int i = 0; i < n; ++i) {
        std::vector<double> phases(3);
        for (auto& ph : phases) ph = rng.uniform(-std::numbers::pi, std::numbers::pi);
        const CVector h = generate_block(make_scenario(p, doas, phases), p);
        for (int k = 0; k < 8; ++k) acc[static_cast<std::size_t>(k)] += h[3 + k] * std::conj(h[3]);
    }
    const CovarianceSpec spec = CovarianceSpec::from_scenario(fixed, p.symbol_duration_s);
    for (std::size_t k = 0; k < 8; ++k) {
        const oracle::cplx expected = oracle::line_covariance(fixed.dopplers, powers, p.symbol_duration_s,
                                                               static_cast<long long>(k));
        EXPECT_LE(std::abs(acc[k] / static_cast<double>(n) - expected), 0.01) << "lag " << k;
        EXPECT_LE(std::abs(covariance_at(spec, k) - expected), 1e-14);
    }
}

TEST(ObservationWindow, NewestFirstOrdering) {
    const ModelParams p = params_for(60.0);
    const double psi = 0.7;
    const ChannelScenario s = make_scenario(p, {0.4}, {psi});
    const double f = s.dopplers[0];
    const CVector y = observation_window(generate_block(s, p), p.obs_len);
    for (Eigen::Index k = 0; k < y.size(); ++k) {
        const double a = psi + 2.0 * std::numbers::pi * f * p.symbol_duration_s * (15 - k);
        EXPECT_LE(std::abs(y[k] - oracle::cplx(std::cos(a), std::sin(a))), 1e-13);
    }
    EXPECT_THROW(observation_window(CVector::Zero(3), 4), DimensionError);
}

TEST(AddNoise, VanishingNoise) {
    RandomStream rng(6);
    const CVector h = CVector::Constant(16, oracle::cplx(0.3, -0.2));
    EXPECT_LE((add_noise(h, 1e-30, rng) - h).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(AddNoise, SampleVariance) {
    RandomStream rng(7);
    const double s2 = 0.37;
    const CVector y = add_noise(CVector::Zero(1000000), s2, rng);
    const double var = y.squaredNorm() / 1e6;
    EXPECT_NEAR(var / s2, 1.0, 0.01);
    EXPECT_NEAR(y.real().squaredNorm() / 1e6, s2 / 2.0, 0.01 * s2);
    EXPECT_NEAR(y.imag().squaredNorm() / 1e6, s2 / 2.0, 0.01 * s2);
    EXPECT_NEAR(std::abs(y.sum()) / 1e6, 0.0, 0.005);
}

TEST(AddNoise, RejectsNonPositiveVariance) {
    RandomStream rng(8);
    EXPECT_THROW(add_noise(CVector::Zero(2), 0.0, rng), DomainError);
    EXPECT_THROW(add_noise(CVector::Zero(2), -1.0, rng), DomainError);
}

TEST(Snr, TenDecibels) {
    EXPECT_DOUBLE_EQ(snr_db_to_noise_var(10.0), 0.1);
    EXPECT_DOUBLE_EQ(snr_db_to_noise_var(0.0), 1.0);
    EXPECT_NEAR(snr_db_to_noise_var(-10.0), 10.0, 1e-14);
}

TEST(MakeBatch, ShapeAndStepChecks) {
    RandomStream rng(9);
    const ModelParams p = params_for(10.0);
    const ObservationBatch b = make_batch(p, 4, 50, 0.1, rng);
    EXPECT_EQ(b.size(), 50u);
    EXPECT_EQ(b.targets.size(), 50u);
    for (const auto& y : b.observations) EXPECT_EQ(y.size(), 16);
    EXPECT_THROW(make_batch(p, 0, 5, 0.1, rng), InvalidStepError);
    EXPECT_THROW(make_batch(p, 5, 5, 0.1, rng), InvalidStepError);
    EXPECT_THROW(make_batch(p, 1, 0, 0.1, rng), DomainError);
    EXPECT_THROW(make_batch(p, 1, 5, 0.0, rng), DomainError);
}

TEST(MakeBatch, TargetIsRotatedLastObservation) {
    RandomStream rng(10);
    const ModelParams p = params_for(80.0);
    const ObservationBatch b = make_batch(p, 1, 1, 1e-30, rng);
    const double f = b.scenarios[0].dopplers[0];
    const double a = 2.0 * std::numbers::pi * f * p.symbol_duration_s;
    EXPECT_LE(std::abs(b.targets[0] - b.observations[0][0] * oracle::cplx(std::cos(a), std::sin(a))), 1e-12);
}

TEST(MakeBatch, TargetIndex) {
    RandomStream rng(11);
    const ModelParams p = params_for(33.0, 2);
    RandomStream copy = rng;
    const Realization r = draw_realization(p, 3, 0.2, rng);
    const ChannelScenario s = sample_scenario(p, copy);
    const CVector h = generate_block(s, p);
    EXPECT_EQ(r.target, h[15 + 3]);
}

TEST(MakeBatch, ZeroPredictorMseIsChannelPower) {
    RandomStream rng(12);
    const ObservationBatch single = make_batch(params_for(20.0, 1), 2, 500, 0.1, rng);
    double mse = 0.0;
    for (auto t : single.targets) mse += std::norm(t);
    EXPECT_NEAR(mse / 500.0, 1.0, 1e-12);

    const std::size_t n = 40000;
    const ObservationBatch multi = make_batch(params_for(20.0, 5), 2, n, 0.1, rng);
    mse = 0.0;
    for (auto t : multi.targets) mse += std::norm(t);
    mse /= static_cast<double>(n);
    // |h|^2 of a 5-path sum has variance below 1
    EXPECT_NEAR(mse, 1.0, 3.0 * std::sqrt(1.0 / static_cast<double>(n)));
}

TEST(MakeBatch, ZeroVelocityObservationsAreConstantBeforeNoise) {
    RandomStream rng(13);
    const ModelParams p = params_for(0.0, 3);
    const ObservationBatch b = make_batch(p, 4, 10, 1e-30, rng);
    for (std::size_t i = 0; i < b.size(); ++i) {
        const auto& y = b.observations[i];
        for (Eigen::Index k = 1; k < y.size(); ++k) EXPECT_LE(std::abs(y[k] - y[0]), 1e-12);
        EXPECT_LE(std::abs(b.targets[i] - y[0]), 1e-12);
    }
}

TEST(MakeBatch, DeterministicForSeed) {
    RandomStream a(99), b(99);
    const ModelParams p = params_for(30.0, 2);
    const ObservationBatch x = make_batch(p, 2, 5, 0.1, a);
    const ObservationBatch y = make_batch(p, 2, 5, 0.1, b);
    for (std::size_t i = 0; i < 5; ++i) {
        EXPECT_EQ(x.observations[i], y.observations[i]);
        EXPECT_EQ(x.targets[i], y.targets[i]);
    }
}
