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

#include <random>
#include <vector>

#include "chanpred/chanpred.hpp"

namespace testing_support {

/// Line spectrum with 1..max_paths paths, Dopplers up to +-max_doppler_hz, random powers.
inline chanpred::CovarianceSpec random_line_spec(std::mt19937_64& g, std::size_t max_paths = 4,
                                                 double max_doppler_hz = 400.0,
                                                 double ts = 20.57e-6) {
    std::uniform_int_distribution<std::size_t> np(1, max_paths);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const std::size_t p = np(g);
    std::vector<double> f(p), w(p);
    double total = 0.0;
    for (std::size_t i = 0; i < p; ++i) {
        f[i] = (2.0 * u(g) - 1.0) * max_doppler_hz;
        total += (w[i] = 0.1 + u(g));
    }
    for (auto& v : w) v /= total;
    return chanpred::CovarianceSpec::finite_paths(f, w, ts);
}

/// Either a line spectrum or a Jakes spectrum.
inline chanpred::CovarianceSpec random_spec(std::mt19937_64& g) {
    if (std::uniform_int_distribution<int>(0, 3)(g) == 0)
        return chanpred::CovarianceSpec::jakes(std::uniform_real_distribution<double>(0.0, 400.0)(g),
                                               20.57e-6);
    return random_line_spec(g);
}

inline double rel_diff(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
    const double scale = std::max(a.cwiseAbs().maxCoeff(), b.cwiseAbs().maxCoeff());
    return (a - b).cwiseAbs().maxCoeff() / std::max(scale, 1e-300);
}

}  // namespace testing_support
