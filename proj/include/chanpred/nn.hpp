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
#include <cstdint>
#include <random>
#include <string_view>
#include <utility>
#include <vector>

#include "chanpred/channel.hpp"
#include "chanpred/numerics.hpp"
#include "chanpred/random.hpp"
#include "chanpred/structured.hpp"

namespace chanpred {

/// One-hidden-layer softmax network: out = A2 softmax(A1 c + b1) + b2.
/// The 2M outputs are the real parts of the filter followed by the imaginary parts.
struct NNWeights {
    RMatrix a1;  // N_g x K
    RVector b1;  // N_g
    RMatrix a2;  // 2M x N_g
    RVector b2;  // 2M

    std::size_t obs_len() const { return static_cast<std::size_t>(a2.rows() / 2); }
    std::size_t hidden() const { return static_cast<std::size_t>(a1.rows()); }
    std::size_t feature_len() const { return static_cast<std::size_t>(a1.cols()); }

    static NNWeights zeros(std::size_t hidden, std::size_t feature_len, std::size_t obs_len) {
        const auto n = static_cast<Eigen::Index>(hidden);
        const auto k = static_cast<Eigen::Index>(feature_len);
        const auto m2 = static_cast<Eigen::Index>(2 * obs_len);
        return {RMatrix::Zero(n, k), RVector::Zero(n), RMatrix::Zero(m2, n), RVector::Zero(m2)};
    }

    NNWeights zeros_like() const {
        return {RMatrix::Zero(a1.rows(), a1.cols()), RVector::Zero(b1.size()),
                RMatrix::Zero(a2.rows(), a2.cols()), RVector::Zero(b2.size())};
    }

    bool all_finite() const {
        return a1.allFinite() && b1.allFinite() && a2.allFinite() && b2.allFinite();
    }

    /// Calls f(name, block) for the four parameter blocks in a fixed order.
    template <typename F>
    void for_each_block(F&& f) {
        f(std::string_view("A1"), a1);
        f(std::string_view("b1"), b1);
        f(std::string_view("A2"), a2);
        f(std::string_view("b2"), b2);
    }
};

/// A(1) = A1, b(1) = b, A(2) = [Re(A2); Im(A2)], b(2) = 0.
inline NNWeights init_from_structured(const StructuredModel& model) {
    NNWeights w;
    const auto m = static_cast<Eigen::Index>(model.obs_len);
    w.a1 = model.a1;
    w.b1 = model.b;
    w.a2.resize(2 * m, model.a2.cols());
    w.a2.topRows(m) = model.a2.real();
    w.a2.bottomRows(m) = model.a2.imag();
    w.b2 = RVector::Zero(2 * m);
    return w;
}

struct ForwardPass {
    RVector hidden;  // softmax probabilities
    RVector output;  // 2M
};

inline ForwardPass forward_pass(const NNWeights& w, const RVector& c_hat) {
    if (c_hat.size() != w.a1.cols()) throw DimensionError("forward: feature length mismatch");
    ForwardPass fp;
    fp.hidden = softmax(w.a1 * c_hat + w.b1);
    fp.output = w.a2 * fp.hidden + w.b2;
    return fp;
}

inline RVector forward(const NNWeights& w, const RVector& c_hat) {
    return forward_pass(w, c_hat).output;
}

/// [w_re; w_im] -> w_re + j w_im
inline CVector filter_from_output(const RVector& output) {
    const Eigen::Index m = output.size() / 2;
    CVector w(m);
    for (Eigen::Index k = 0; k < m; ++k) w[k] = cplx(output[k], output[m + k]);
    return w;
}

inline cplx predict_nn(const NNWeights& w, const RVector& c_hat, const CVector& y) {
    if (static_cast<std::size_t>(y.size()) != w.obs_len())
        throw DimensionError("predict_nn: observation length mismatch");
    const CVector filt = filter_from_output(forward(w, c_hat));
    return (filt.array() * y.array()).sum();
}

struct LossAndGrad {
    double mse = 0.0;
    NNWeights grad;
};

/// Mean squared prediction error over the batch and its gradient with respect to all four
/// parameter blocks.
inline LossAndGrad loss_and_grad(const NNWeights& w, const ObservationBatch& batch,
                                 const CMatrix& q, double noise_var) {
    if (batch.size() == 0) throw DomainError("loss_and_grad: empty batch");
    const Eigen::Index m = static_cast<Eigen::Index>(w.obs_len());
    LossAndGrad out{0.0, w.zeros_like()};
    RVector g_out(2 * m);
    for (std::size_t b = 0; b < batch.size(); ++b) {
        const CVector& y = batch.observations[b];
        if (y.size() != m) throw DimensionError("loss_and_grad: observation length mismatch");
        const RVector c_hat = feature_compressed(y, q, noise_var);
        const ForwardPass fp = forward_pass(w, c_hat);
        cplx h_hat{0.0, 0.0};
        for (Eigen::Index k = 0; k < m; ++k) h_hat += cplx(fp.output[k], fp.output[m + k]) * y[k];
        const cplx err = h_hat - batch.targets[b];
        if (!std::isfinite(err.real()) || !std::isfinite(err.imag()))
            throw NumericFailure("loss_and_grad: non-finite prediction", b);
        out.mse += std::norm(err);

        // d|e|^2/dw_re[k] = 2 Re(conj(e) y_k), d|e|^2/dw_im[k] = -2 Im(conj(e) y_k)
        for (Eigen::Index k = 0; k < m; ++k) {
            const cplx t = std::conj(err) * y[k];
            g_out[k] = 2.0 * t.real();
            g_out[m + k] = -2.0 * t.imag();
        }
        out.grad.a2.noalias() += g_out * fp.hidden.transpose();
        out.grad.b2 += g_out;
        // softmax Jacobian: (diag(p) - p p^T) g
        const RVector g_p = w.a2.transpose() * g_out;
        const RVector g_z = (fp.hidden.array() * (g_p.array() - fp.hidden.dot(g_p))).matrix();
        out.grad.a1.noalias() += g_z * c_hat.transpose();
        out.grad.b1 += g_z;
    }
    const double inv = 1.0 / static_cast<double>(batch.size());
    out.mse *= inv;
    out.grad.for_each_block([inv](std::string_view, auto& block) { block *= inv; });
    return out;
}

enum class OptimizerKind { adam, sgd };

struct TrainConfig {
    std::size_t minibatches = 3000;
    std::size_t batch_size = 50;
    double learning_rate = 1e-3;
    OptimizerKind optimizer = OptimizerKind::adam;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    /// Relative scale of the Gaussian perturbation added to A2 before the first step. Breaks
    /// the symmetry of banks whose samples coincide (zero velocity), where the hidden units
    /// would otherwise receive identical updates forever.
    double init_jitter = 1e-6;

    bool operator==(const TrainConfig&) const = default;

    void validate() const {
        if (minibatches < 1) throw DomainError("train: at least one minibatch required");
        if (batch_size < 1) throw DomainError("train: batch size must be positive");
        if (!(learning_rate > 0.0)) throw DomainError("train: learning rate must be positive");
        if (!(init_jitter >= 0.0)) throw DomainError("train: negative init jitter");
        if (optimizer == OptimizerKind::adam &&
            (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0) || !(epsilon > 0.0)))
            throw DomainError("train: invalid Adam hyperparameters");
    }
};

/// Adam with bias correction; plain SGD when configured so.
class Optimizer {
public:
    Optimizer(const TrainConfig& cfg, const NNWeights& shape)
        : cfg_(cfg), m_(shape.zeros_like()), v_(shape.zeros_like()) {}

    void step(NNWeights& w, NNWeights& g) {
        ++t_;
        if (cfg_.optimizer == OptimizerKind::sgd) {
            w.a1 -= cfg_.learning_rate * g.a1;
            w.b1 -= cfg_.learning_rate * g.b1;
            w.a2 -= cfg_.learning_rate * g.a2;
            w.b2 -= cfg_.learning_rate * g.b2;
            return;
        }
        const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
        const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
        update(w.a1, g.a1, m_.a1, v_.a1, c1, c2);
        update(w.b1, g.b1, m_.b1, v_.b1, c1, c2);
        update(w.a2, g.a2, m_.a2, v_.a2, c1, c2);
        update(w.b2, g.b2, m_.b2, v_.b2, c1, c2);
    }

private:
    template <typename Block>
    void update(Block& w, const Block& g, Block& m, Block& v, double c1, double c2) const {
        m = cfg_.beta1 * m + (1.0 - cfg_.beta1) * g;
        v = cfg_.beta2 * v + (1.0 - cfg_.beta2) * g.cwiseAbs2();
        w.array() -= cfg_.learning_rate * (m.array() / c1) / ((v.array() / c2).sqrt() + cfg_.epsilon);
    }

    TrainConfig cfg_;
    NNWeights m_;
    NNWeights v_;
    std::uint64_t t_ = 0;
};

/// Thrown by train(); carries the weights from before the failing step.
class TrainingFailure : public NumericFailure {
public:
    TrainingFailure(const std::string& what, std::size_t step, NNWeights last_good)
        : NumericFailure(what, step), last_good_(std::move(last_good)) {}
    const NNWeights& last_good() const noexcept { return last_good_; }

private:
    NNWeights last_good_;
};

struct TrainResult {
    NNWeights weights;
    std::vector<double> loss_trace;  // minibatch MSE before each update
};

/// Fixed-budget training on freshly generated minibatches (no sample is seen twice).
inline TrainResult train(NNWeights w, const ModelParams& params, std::size_t step,
                         double noise_var, const CMatrix& q, const TrainConfig& cfg,
                         RandomStream& rng) {
    cfg.validate();
    params.validate();
    check_step(params, step);
    if (cfg.init_jitter > 0.0) {
        const double scale = cfg.init_jitter * std::max(max_abs(w.a2), 1.0);
        std::normal_distribution<double> n(0.0, scale);
        for (Eigen::Index i = 0; i < w.a2.size(); ++i) w.a2.data()[i] += n(rng.engine());
    }
    Optimizer opt(cfg, w);
    TrainResult result;
    result.loss_trace.reserve(cfg.minibatches);
    for (std::size_t s = 0; s < cfg.minibatches; ++s) {
        const ObservationBatch batch = make_batch(params, step, cfg.batch_size, noise_var, rng);
        LossAndGrad lg;
        try {
            lg = loss_and_grad(w, batch, q, noise_var);
        } catch (const NumericFailure& e) {
            throw TrainingFailure(std::string("train: ") + e.what(), s, w);
        }
        NNWeights candidate = w;
        opt.step(candidate, lg.grad);
        if (!candidate.all_finite())
            throw TrainingFailure("train: non-finite weights after update", s, w);
        w = std::move(candidate);
        result.loss_trace.push_back(lg.mse);
    }
    result.weights = std::move(w);
    return result;
}

}  // namespace chanpred
