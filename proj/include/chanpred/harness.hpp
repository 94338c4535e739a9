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

#include <algorithm>
#include <array>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "chanpred/channel.hpp"
#include "chanpred/covariance.hpp"
#include "chanpred/errors.hpp"
#include "chanpred/gridded.hpp"
#include "chanpred/lmmse.hpp"
#include "chanpred/nn.hpp"
#include "chanpred/random.hpp"
#include "chanpred/structured.hpp"

namespace chanpred {

// ------------------------------------------------------------------------
// Predictor vocabulary
// ------------------------------------------------------------------------

/// Declaration order is the reporting order.
enum class PredictorKind {
    lmmse_perfect,
    lmmse_jakes,
    gridded,
    structured_toep,
    structured_circ,
    nn_toep,
    nn_circ,
};

inline constexpr std::array kAllPredictors = {
    PredictorKind::lmmse_perfect,   PredictorKind::lmmse_jakes, PredictorKind::gridded,
    PredictorKind::structured_toep, PredictorKind::structured_circ, PredictorKind::nn_toep,
    PredictorKind::nn_circ,
};

inline std::string_view predictor_name(PredictorKind k) {
    switch (k) {
    case PredictorKind::lmmse_perfect: return "LMMSE Perfect";
    case PredictorKind::lmmse_jakes: return "LMMSE Jakes";
    case PredictorKind::gridded: return "Gridded";
    case PredictorKind::structured_toep: return "Structured Toep";
    case PredictorKind::structured_circ: return "Structured Circ";
    case PredictorKind::nn_toep: return "NN Toep";
    case PredictorKind::nn_circ: return "NN Circ";
    }
    return "";
}

/// Config-file slug.
inline std::string_view predictor_slug(PredictorKind k) {
    switch (k) {
    case PredictorKind::lmmse_perfect: return "lmmse_perfect";
    case PredictorKind::lmmse_jakes: return "lmmse_jakes";
    case PredictorKind::gridded: return "gridded";
    case PredictorKind::structured_toep: return "structured_toep";
    case PredictorKind::structured_circ: return "structured_circ";
    case PredictorKind::nn_toep: return "nn_toep";
    case PredictorKind::nn_circ: return "nn_circ";
    }
    return "";
}

/// Accepts either the slug or the display name.
inline std::optional<PredictorKind> parse_predictor(std::string_view s) {
    for (auto k : kAllPredictors)
        if (s == predictor_slug(k) || s == predictor_name(k)) return k;
    return std::nullopt;
}

inline std::optional<QKind> predictor_q_kind(PredictorKind k) {
    switch (k) {
    case PredictorKind::structured_toep:
    case PredictorKind::nn_toep: return QKind::toeplitz;
    case PredictorKind::structured_circ:
    case PredictorKind::nn_circ: return QKind::circulant;
    default: return std::nullopt;
    }
}

inline bool is_network(PredictorKind k) {
    return k == PredictorKind::nn_toep || k == PredictorKind::nn_circ;
}

/// How the genie ("LMMSE Perfect") predictor obtains its covariance.
enum class PerfectMode {
    per_realization,  // line spectrum of each evaluation block's true scenario
    per_velocity,     // one filter per velocity from the DoA-prior-averaged covariance
};

// ------------------------------------------------------------------------
// Experiment configuration
// ------------------------------------------------------------------------

struct ExperimentConfig {
    std::size_t obs_len = 16;
    std::size_t step = 4;
    std::size_t paths = 1;
    std::vector<double> snr_db = {10.0};
    std::vector<double> velocities_kmh = {0, 10, 20, 30, 40, 50, 60, 70, 80, 90, 100};
    /// Bank size for Gridded and the circulant variants; Toeplitz variants use twice as many.
    std::size_t grid_samples = 16;
    std::vector<QKind> q_kinds = {QKind::toeplitz, QKind::circulant};
    std::vector<PredictorKind> predictors{kAllPredictors.begin(), kAllPredictors.end()};
    std::size_t eval_samples = 20'000;
    TrainConfig train;
    std::uint64_t seed = 0;
    std::string output = "results.csv";
    double carrier_freq_hz = 2.0e9;
    double symbol_duration_s = 20.57e-6;
    PerfectMode perfect_mode = PerfectMode::per_realization;
    FitMethod fit_method = FitMethod::least_squares;

    bool operator==(const ExperimentConfig&) const = default;

    static constexpr std::size_t kFullScaleEvalSamples = 200'000;

    void validate() const {
        if (eval_samples < 1) throw DomainError("config: eval_samples must be at least 1");
        if (obs_len < 1) throw DomainError("config: obs_len must be at least 1");
        if (step < 1) throw DomainError("config: step must be at least 1");
        if (paths < 1) throw DomainError("config: paths must be at least 1");
        if (grid_samples < 1) throw DomainError("config: grid_samples must be at least 1");
        for (double v : velocities_kmh)
            if (!(v >= 0.0) || !std::isfinite(v))
                throw DomainError("config: velocities must be finite and non-negative");
        for (double s : snr_db)
            if (!std::isfinite(s)) throw DomainError("config: snr_db must be finite");
        train.validate();
    }

    /// Bank size used by a predictor kind.
    std::size_t samples_for(PredictorKind k) const {
        const auto q = predictor_q_kind(k);
        return q && *q == QKind::toeplitz ? 2 * grid_samples : grid_samples;
    }

    bool runs(PredictorKind k) const {
        if (std::find(predictors.begin(), predictors.end(), k) == predictors.end()) return false;
        const auto q = predictor_q_kind(k);
        return !q || std::find(q_kinds.begin(), q_kinds.end(), *q) != q_kinds.end();
    }

    ModelParams params_at(double velocity_kmh) const {
        ModelParams p;
        p.carrier_freq_hz = carrier_freq_hz;
        p.symbol_duration_s = symbol_duration_s;
        p.velocity_mps = kmh_to_mps(velocity_kmh);
        p.num_paths = paths;
        p.obs_len = obs_len;
        p.pred_len = step;
        return p;
    }
};

namespace detail {

inline std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string_view> split_list(std::string_view s) {
    std::vector<std::string_view> out;
    while (true) {
        const auto pos = s.find(',');
        const auto item = trim(s.substr(0, pos));
        if (!item.empty()) out.push_back(item);
        if (pos == std::string_view::npos) break;
        s.remove_prefix(pos + 1);
    }
    return out;
}

template <typename T>
T parse_number(std::string_view s, const std::string& key, std::size_t line) {
    T v{};
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw ParseError("invalid number '" + std::string(s) + "'", key, line);
    return v;
}

template <typename T, typename Fmt>
std::string join(const std::vector<T>& items, Fmt fmt) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out += ", ";
        out += fmt(items[i]);
    }
    return out;
}

}  // namespace detail

/// Flat `key = value` text; lists are comma-separated; `#` starts a comment.
inline ExperimentConfig parse_config(std::string_view text) {
    ExperimentConfig cfg;
    std::size_t line_no = 0;
    std::istringstream in{std::string(text)};
    std::string raw;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string_view line = raw;
        if (const auto hash = line.find('#'); hash != std::string_view::npos)
            line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) throw ParseError("expected 'key = value'", std::string(line), line_no);
        const std::string key(detail::trim(line.substr(0, eq)));
        const std::string_view value = detail::trim(line.substr(eq + 1));
        if (value.empty()) throw ParseError("missing value", key, line_no);

        auto size = [&] { return detail::parse_number<std::size_t>(value, key, line_no); };
        auto real = [&] { return detail::parse_number<double>(value, key, line_no); };
        auto reals = [&] {
            std::vector<double> v;
            for (auto item : detail::split_list(value))
                v.push_back(detail::parse_number<double>(item, key, line_no));
            if (v.empty()) throw ParseError("empty list", key, line_no);
            return v;
        };

        if (key == "obs_len") cfg.obs_len = size();
        else if (key == "step") cfg.step = size();
        else if (key == "paths") cfg.paths = size();
        else if (key == "snr_db") cfg.snr_db = reals();
        else if (key == "velocities_kmh") cfg.velocities_kmh = reals();
        else if (key == "grid_samples") cfg.grid_samples = size();
        else if (key == "eval_samples") cfg.eval_samples = size();
        else if (key == "minibatches") cfg.train.minibatches = size();
        else if (key == "batch_size") cfg.train.batch_size = size();
        else if (key == "learning_rate") cfg.train.learning_rate = real();
        else if (key == "adam_beta1") cfg.train.beta1 = real();
        else if (key == "adam_beta2") cfg.train.beta2 = real();
        else if (key == "adam_epsilon") cfg.train.epsilon = real();
        else if (key == "init_jitter") cfg.train.init_jitter = real();
        else if (key == "seed") cfg.seed = detail::parse_number<std::uint64_t>(value, key, line_no);
        else if (key == "output") cfg.output = std::string(value);
        else if (key == "carrier_freq_hz") cfg.carrier_freq_hz = real();
        else if (key == "symbol_duration_s") cfg.symbol_duration_s = real();
        else if (key == "optimizer") {
            if (value == "adam") cfg.train.optimizer = OptimizerKind::adam;
            else if (value == "sgd") cfg.train.optimizer = OptimizerKind::sgd;
            else throw ParseError("expected adam or sgd", key, line_no);
        } else if (key == "q_kinds") {
            cfg.q_kinds.clear();
            for (auto item : detail::split_list(value)) {
                const auto k = parse_q_kind(item);
                if (!k) throw ParseError("unknown q kind '" + std::string(item) + "'", key, line_no);
                cfg.q_kinds.push_back(*k);
            }
        } else if (key == "predictors") {
            cfg.predictors.clear();
            for (auto item : detail::split_list(value)) {
                const auto k = parse_predictor(item);
                if (!k) throw ParseError("unknown predictor '" + std::string(item) + "'", key, line_no);
                cfg.predictors.push_back(*k);
            }
        } else if (key == "perfect_mode") {
            if (value == "per_realization") cfg.perfect_mode = PerfectMode::per_realization;
            else if (value == "per_velocity") cfg.perfect_mode = PerfectMode::per_velocity;
            else throw ParseError("expected per_realization or per_velocity", key, line_no);
        } else if (key == "fit_method") {
            if (value == "least_squares") cfg.fit_method = FitMethod::least_squares;
            else if (value == "spectral_ratio") cfg.fit_method = FitMethod::spectral_ratio;
            else throw ParseError("expected least_squares or spectral_ratio", key, line_no);
        } else {
            throw ParseError("unknown key", key, line_no);
        }
    }
    try {
        cfg.validate();
    } catch (const DomainError& e) {
        throw ParseError(e.what(), "", line_no);
    }
    return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open config file '" + path + "'", "", 0);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

inline std::string format_config(const ExperimentConfig& cfg) {
    using detail::format_double;
    std::ostringstream out;
    out << "obs_len = " << cfg.obs_len << '\n'
        << "step = " << cfg.step << '\n'
        << "paths = " << cfg.paths << '\n'
        << "snr_db = " << detail::join(cfg.snr_db, format_double) << '\n'
        << "velocities_kmh = " << detail::join(cfg.velocities_kmh, format_double) << '\n'
        << "grid_samples = " << cfg.grid_samples << '\n'
        << "q_kinds = "
        << detail::join(cfg.q_kinds, [](QKind k) { return std::string(to_string(k)); }) << '\n'
        << "predictors = "
        << detail::join(cfg.predictors,
                        [](PredictorKind k) { return std::string(predictor_slug(k)); })
        << '\n'
        << "eval_samples = " << cfg.eval_samples << '\n'
        << "minibatches = " << cfg.train.minibatches << '\n'
        << "batch_size = " << cfg.train.batch_size << '\n'
        << "learning_rate = " << format_double(cfg.train.learning_rate) << '\n'
        << "optimizer = " << (cfg.train.optimizer == OptimizerKind::adam ? "adam" : "sgd") << '\n'
        << "adam_beta1 = " << format_double(cfg.train.beta1) << '\n'
        << "adam_beta2 = " << format_double(cfg.train.beta2) << '\n'
        << "adam_epsilon = " << format_double(cfg.train.epsilon) << '\n'
        << "init_jitter = " << format_double(cfg.train.init_jitter) << '\n'
        << "seed = " << cfg.seed << '\n'
        << "output = " << cfg.output << '\n'
        << "carrier_freq_hz = " << format_double(cfg.carrier_freq_hz) << '\n'
        << "symbol_duration_s = " << format_double(cfg.symbol_duration_s) << '\n'
        << "perfect_mode = "
        << (cfg.perfect_mode == PerfectMode::per_realization ? "per_realization" : "per_velocity")
        << '\n'
        << "fit_method = "
        << (cfg.fit_method == FitMethod::least_squares ? "least_squares" : "spectral_ratio")
        << '\n';
    return out.str();
}

// ------------------------------------------------------------------------
// Monte Carlo evaluation
// ------------------------------------------------------------------------

/// Predictor callable: cplx(const Realization&).
using PredictFn = std::function<cplx(const Realization&)>;

/// Mean |target - prediction|^2 over n_eval fresh realizations drawn from `rng`.
template <typename Predictor>
double evaluate_mse(Predictor&& predictor, const ModelParams& params, std::size_t step,
                    double noise_var, std::size_t n_eval, RandomStream& rng) {
    if (n_eval < 1) throw DomainError("evaluate_mse: n_eval must be at least 1");
    params.validate();
    check_step(params, step);
    check_noise_var(noise_var);
    double sum = 0.0;
    for (std::size_t i = 0; i < n_eval; ++i) {
        const Realization r = draw_realization(params, step, noise_var, rng);
        const cplx err = r.target - predictor(r);
        if (!std::isfinite(err.real()) || !std::isfinite(err.imag()))
            throw NumericFailure("evaluate_mse: non-finite prediction", i);
        sum += std::norm(err);
    }
    return sum / static_cast<double>(n_eval);
}

inline PredictFn zero_predictor() {
    return [](const Realization&) { return cplx{0.0, 0.0}; };
}

inline PredictFn row_predictor(PredictorRow row) {
    return [row = std::move(row)](const Realization& r) { return predict(row, r.y); };
}

inline PredictFn perfect_predictor(const ModelParams& params, std::size_t step, double noise_var,
                                   PerfectMode mode) {
    if (mode == PerfectMode::per_velocity)
        return row_predictor(lmmse_direct(prior_averaged_spec(params, params.obs_len + step),
                                          params.obs_len, step, noise_var));
    return [params, step, noise_var](const Realization& r) {
        const auto spec = CovarianceSpec::from_scenario(r.scenario, params.symbol_duration_s);
        return predict(lmmse_direct(spec, params.obs_len, step, noise_var), r.y);
    };
}

inline PredictFn gridded_predictor(FilterBank bank) {
    return [bank = std::move(bank)](const Realization& r) {
        return predict(gridded_row(bank, r.y), r.y);
    };
}

inline PredictFn structured_predictor(StructuredModel model) {
    return [model = std::move(model)](const Realization& r) {
        return predict(structured_row(model, feature_compressed(r.y, model.q, model.noise_var)), r.y);
    };
}

inline PredictFn network_predictor(NNWeights weights, CMatrix q, double noise_var) {
    return [w = std::move(weights), q = std::move(q), noise_var](const Realization& r) {
        return predict_nn(w, feature_compressed(r.y, q, noise_var), r.y);
    };
}

// ------------------------------------------------------------------------
// Sweeps
// ------------------------------------------------------------------------

struct MetricRecord {
    std::string predictor;
    double velocity_kmh = 0.0;
    double snr_db = 0.0;
    std::size_t paths = 1;
    double mse = 0.0;  // NaN for a failed row
    std::size_t eval_samples = 0;
    std::uint64_t seed = 0;
    std::string error;  // empty on success

    bool ok() const { return error.empty(); }
};

/// Random substreams of one sweep point. Evaluation data depends only on (snr, velocity), so
/// every predictor at a point is scored on the same realizations.
struct PointStreams {
    RandomStream eval;
    RandomStream grid;
    RandomStream root;
    std::size_t snr_index;
    std::size_t velocity_index;

    PointStreams(std::uint64_t seed, std::size_t snr_index, std::size_t velocity_index)
        : eval(RandomStream(seed).split({1, snr_index, velocity_index})),
          grid(RandomStream(seed).split({2, snr_index, velocity_index})),
          root(RandomStream(seed)),
          snr_index(snr_index),
          velocity_index(velocity_index) {}

    RandomStream grid_for(std::size_t samples) const { return grid.split(samples); }

    RandomStream train_for(PredictorKind k) const {
        return root.split({3, snr_index, velocity_index, static_cast<std::uint64_t>(k)});
    }
};

/// Lazily builds the banks and structured models shared by several predictors at one point.
class PointBuilder {
public:
    PointBuilder(const ExperimentConfig& cfg, double velocity_kmh, double snr_db,
                 PointStreams streams)
        : cfg_(cfg),
          params_(cfg.params_at(velocity_kmh)),
          noise_var_(snr_db_to_noise_var(snr_db)),
          streams_(std::move(streams)) {}

    const ModelParams& params() const { return params_; }
    double noise_var() const { return noise_var_; }
    const PointStreams& streams() const { return streams_; }

    const FilterBank& bank(std::size_t samples) {
        auto it = banks_.find(samples);
        if (it == banks_.end()) {
            RandomStream rng = streams_.grid_for(samples);
            it = banks_
                     .emplace(samples, build_bank(GridStrategy::for_paths(samples, cfg_.paths),
                                                  params_, cfg_.step, noise_var_, rng))
                     .first;
        }
        return it->second;
    }

    const StructuredModel& structured(QKind kind) {
        auto it = models_.find(kind);
        if (it == models_.end()) {
            const std::size_t samples =
                kind == QKind::toeplitz ? 2 * cfg_.grid_samples : cfg_.grid_samples;
            it = models_.emplace(kind, assemble_structured(bank(samples), kind, cfg_.fit_method))
                     .first;
        }
        return it->second;
    }

    TrainResult train_network(QKind kind) {
        const PredictorKind pk = kind == QKind::toeplitz ? PredictorKind::nn_toep : PredictorKind::nn_circ;
        const StructuredModel& model = structured(kind);
        RandomStream rng = streams_.train_for(pk);
        return train(init_from_structured(model), params_, cfg_.step, noise_var_, model.q,
                     cfg_.train, rng);
    }

    PredictFn predictor(PredictorKind k) {
        switch (k) {
        case PredictorKind::lmmse_perfect:
            return perfect_predictor(params_, cfg_.step, noise_var_, cfg_.perfect_mode);
        case PredictorKind::lmmse_jakes:
            return row_predictor(lmmse_direct(jakes_spec(params_), cfg_.obs_len, cfg_.step, noise_var_));
        case PredictorKind::gridded: return gridded_predictor(bank(cfg_.grid_samples));
        case PredictorKind::structured_toep: return structured_predictor(structured(QKind::toeplitz));
        case PredictorKind::structured_circ: return structured_predictor(structured(QKind::circulant));
        case PredictorKind::nn_toep:
        case PredictorKind::nn_circ: {
            const QKind kind = *predictor_q_kind(k);
            TrainResult tr = train_network(kind);
            return network_predictor(std::move(tr.weights), structured(kind).q, noise_var_);
        }
        }
        throw Error("unknown predictor");
    }

    double evaluate(const PredictFn& fn) const {
        RandomStream rng = streams_.eval;
        return evaluate_mse(fn, params_, cfg_.step, noise_var_, cfg_.eval_samples, rng);
    }

private:
    const ExperimentConfig& cfg_;
    ModelParams params_;
    double noise_var_;
    PointStreams streams_;
    std::map<std::size_t, FilterBank> banks_;
    std::map<QKind, StructuredModel> models_;
};

struct RunOptions {
    unsigned threads = 1;
    /// Called after each finished record (serialized by the harness).
    std::function<void(const MetricRecord&)> progress;
};

inline std::size_t predictor_rank(std::string_view name) {
    for (std::size_t i = 0; i < kAllPredictors.size(); ++i)
        if (predictor_name(kAllPredictors[i]) == name) return i;
    return kAllPredictors.size();
}

/// Velocity ascending, then SNR, then predictor in reporting order.
inline void sort_records(std::vector<MetricRecord>& records) {
    std::stable_sort(records.begin(), records.end(), [](const MetricRecord& a, const MetricRecord& b) {
        if (a.velocity_kmh != b.velocity_kmh) return a.velocity_kmh < b.velocity_kmh;
        if (a.snr_db != b.snr_db) return a.snr_db < b.snr_db;
        return predictor_rank(a.predictor) < predictor_rank(b.predictor);
    });
}

inline std::vector<MetricRecord> run_point(const ExperimentConfig& cfg, std::size_t snr_index,
                                           std::size_t velocity_index,
                                           const std::function<void(const MetricRecord&)>& done = {}) {
    const double snr = cfg.snr_db.at(snr_index);
    const double velocity = cfg.velocities_kmh.at(velocity_index);
    PointBuilder builder(cfg, velocity, snr, PointStreams(cfg.seed, snr_index, velocity_index));
    std::vector<MetricRecord> out;
    for (PredictorKind k : kAllPredictors) {
        if (!cfg.runs(k)) continue;
        MetricRecord rec{std::string(predictor_name(k)), velocity, snr, cfg.paths, 0.0,
                         cfg.eval_samples, cfg.seed, {}};
        try {
            rec.mse = builder.evaluate(builder.predictor(k));
        } catch (const Error& e) {
            rec.mse = std::numeric_limits<double>::quiet_NaN();
            rec.error = e.what();
        }
        if (done) done(rec);
        out.push_back(std::move(rec));
    }
    return out;
}

/// Runs every (snr, velocity, predictor) combination. Output does not depend on `threads`.
inline std::vector<MetricRecord> run_experiment(const ExperimentConfig& cfg,
                                                const RunOptions& opts = {}) {
    cfg.validate();
    struct Point {
        std::size_t snr, velocity;
    };
    std::vector<Point> points;
    for (std::size_t s = 0; s < cfg.snr_db.size(); ++s)
        for (std::size_t v = 0; v < cfg.velocities_kmh.size(); ++v) points.push_back({s, v});

    std::vector<std::vector<MetricRecord>> results(points.size());
    std::mutex progress_mutex;
    auto notify = [&](const MetricRecord& r) {
        if (!opts.progress) return;
        std::lock_guard lock(progress_mutex);
        opts.progress(r);
    };
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < points.size(); i = next++)
            results[i] = run_point(cfg, points[i].snr, points[i].velocity, notify);
    };
    const unsigned n_threads =
        std::max(1u, std::min<unsigned>(opts.threads, static_cast<unsigned>(points.size())));
    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    std::vector<MetricRecord> records;
    for (auto& r : results) records.insert(records.end(), r.begin(), r.end());
    sort_records(records);
    return records;
}

// ------------------------------------------------------------------------
// CSV
// ------------------------------------------------------------------------

inline constexpr std::string_view kCsvHeader =
    "predictor,velocity_kmh,snr_db,paths,mse,eval_samples,seed";

inline std::string format_csv(std::vector<MetricRecord> records) {
    sort_records(records);
    std::string out(kCsvHeader);
    out += '\n';
    char buf[64];
    auto sci = [&](double v) {
        if (std::isnan(v)) return std::string("nan");
        std::snprintf(buf, sizeof(buf), "%.6e", v);
        return std::string(buf);
    };
    for (const auto& r : records) {
        out += r.predictor + ',' + sci(r.velocity_kmh) + ',' + sci(r.snr_db) + ',' +
               std::to_string(r.paths) + ',' + sci(r.mse) + ',' + std::to_string(r.eval_samples) +
               ',' + std::to_string(r.seed) + '\n';
    }
    return out;
}

inline void write_csv(const std::vector<MetricRecord>& records, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open '" + path + "' for writing");
    out << format_csv(records);
    if (!out) throw Error("write to '" + path + "' failed");
}

}  // namespace chanpred
