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

// Command-line driver: sweep, train, eval, selftest.
//
// Exit status: 0 success, 2 configuration or argument error, 3 numeric failure.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "chanpred/chanpred.hpp"

using namespace chanpred;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;

class UsageError : public Error {
public:
    using Error::Error;
};

/// Flags that override config-file values. Only flags given on the command line are applied.
struct Overrides {
    std::string config_path;
    std::size_t obs_len = 0, step = 0, paths = 0, grid_samples = 0, eval_samples = 0;
    std::size_t minibatches = 0, batch_size = 0;
    double learning_rate = 0.0;
    std::uint64_t seed = 0;
    std::vector<double> snr_db, velocities_kmh;
    std::vector<std::string> q_kinds, predictors;
    std::string output, optimizer, perfect_mode;
    bool full_scale = false;
    unsigned threads = 1;
    std::vector<CLI::Option*> opts;

    void attach(CLI::App* app) {
        app->add_option("-c,--config", config_path, "Config file (key = value)")->check(CLI::ExistingFile);
        opts = {
            app->add_option("--obs-len", obs_len, "Observation window M"),
            app->add_option("--step", step, "Prediction step l"),
            app->add_option("--paths", paths, "Propagation paths P"),
            app->add_option("--snr", snr_db, "SNR list in dB")->delimiter(','),
            app->add_option("--velocities", velocities_kmh, "Velocity list in km/h")->delimiter(','),
            app->add_option("--grid-samples", grid_samples, "Bank size N_g (Toeplitz variants use 2 N_g)"),
            app->add_option("--q-kinds", q_kinds, "toeplitz, circulant")->delimiter(','),
            app->add_option("--predictors", predictors, "Predictor slugs")->delimiter(','),
            app->add_option("--eval-samples", eval_samples, "Evaluation realizations per point"),
            app->add_option("--minibatches", minibatches, "Training minibatches"),
            app->add_option("--batch-size", batch_size, "Training batch size"),
            app->add_option("--learning-rate", learning_rate, "Optimizer step size"),
            app->add_option("--optimizer", optimizer, "adam or sgd"),
            app->add_option("--perfect-mode", perfect_mode, "per_realization or per_velocity"),
            app->add_option("--seed", seed, "Root seed"),
            app->add_option("-o,--output", output, "Output path"),
        };
        app->add_flag("--paper-scale", full_scale, "Evaluate on 200000 realizations per point");
        app->add_option("-j,--threads", threads, "Worker threads for sweep points")->check(CLI::PositiveNumber);
    }

    bool given(std::size_t i) const { return opts[i]->count() > 0; }

    ExperimentConfig build() const {
        ExperimentConfig cfg = config_path.empty() ? ExperimentConfig{} : load_config(config_path);
        if (given(0)) cfg.obs_len = obs_len;
        if (given(1)) cfg.step = step;
        if (given(2)) cfg.paths = paths;
        if (given(3)) cfg.snr_db = snr_db;
        if (given(4)) cfg.velocities_kmh = velocities_kmh;
        if (given(5)) cfg.grid_samples = grid_samples;
        if (given(6)) {
            cfg.q_kinds.clear();
            for (const auto& s : q_kinds) {
                const auto k = parse_q_kind(s);
                if (!k) throw UsageError("unknown q kind '" + s + "'");
                cfg.q_kinds.push_back(*k);
            }
        }
        if (given(7)) {
            cfg.predictors.clear();
            for (const auto& s : predictors) {
                const auto k = parse_predictor(s);
                if (!k) throw UsageError("unknown predictor '" + s + "'");
                cfg.predictors.push_back(*k);
            }
        }
        if (given(8)) cfg.eval_samples = eval_samples;
        if (given(9)) cfg.train.minibatches = minibatches;
        if (given(10)) cfg.train.batch_size = batch_size;
        if (given(11)) cfg.train.learning_rate = learning_rate;
        if (given(12)) {
            if (optimizer == "adam") cfg.train.optimizer = OptimizerKind::adam;
            else if (optimizer == "sgd") cfg.train.optimizer = OptimizerKind::sgd;
            else throw UsageError("unknown optimizer '" + optimizer + "'");
        }
        if (given(13)) {
            if (perfect_mode == "per_realization") cfg.perfect_mode = PerfectMode::per_realization;
            else if (perfect_mode == "per_velocity") cfg.perfect_mode = PerfectMode::per_velocity;
            else throw UsageError("unknown perfect mode '" + perfect_mode + "'");
        }
        if (given(14)) cfg.seed = seed;
        if (given(15)) cfg.output = output;
        if (full_scale) cfg.eval_samples = ExperimentConfig::kFullScaleEvalSamples;
        try {
            cfg.validate();
        } catch (const DomainError& e) {
            throw UsageError(e.what());
        }
        return cfg;
    }
};

int run_sweep(const Overrides& ov) {
    const ExperimentConfig cfg = ov.build();
    RunOptions opts;
    opts.threads = ov.threads;
    opts.progress = [](const MetricRecord& r) {
        if (r.ok())
            std::fprintf(stderr, "%-16s v=%6.1f km/h snr=%6.1f dB  mse %.4e\n", r.predictor.c_str(),
                         r.velocity_kmh, r.snr_db, r.mse);
        else
            std::fprintf(stderr, "%-16s v=%6.1f km/h snr=%6.1f dB  FAILED: %s\n", r.predictor.c_str(),
                         r.velocity_kmh, r.snr_db, r.error.c_str());
    };
    const auto records = run_experiment(cfg, opts);
    if (cfg.output == "-")
        std::cout << format_csv(records);
    else
        write_csv(records, cfg.output);
    std::size_t failed = 0;
    for (const auto& r : records) failed += r.ok() ? 0 : 1;
    if (failed) {
        std::fprintf(stderr, "%zu of %zu rows failed\n", failed, records.size());
        return kExitNumeric;
    }
    return 0;
}

QKind network_kind(const std::string& s) {
    const auto k = parse_q_kind(s);
    if (!k) throw UsageError("unknown q kind '" + s + "'");
    return *k;
}

double single_snr(const ExperimentConfig& cfg) {
    if (cfg.snr_db.size() != 1) throw UsageError("give exactly one SNR (--snr)");
    return cfg.snr_db.front();
}

int run_train(const Overrides& ov, const std::string& kind_name, double velocity_kmh,
              const std::string& model_path) {
    const ExperimentConfig cfg = ov.build();
    const QKind kind = network_kind(kind_name);
    PointBuilder builder(cfg, velocity_kmh, single_snr(cfg), PointStreams(cfg.seed, 0, 0));
    const TrainResult tr = builder.train_network(kind);
    NNModel model;
    model.header.step = cfg.step;
    model.header.noise_var = builder.noise_var();
    model.header.q_kind = kind;
    model.header.velocity_mps = builder.params().velocity_mps;
    model.weights = tr.weights;
    std::ofstream out(model_path);
    if (!out) throw Error("cannot open '" + model_path + "' for writing");
    save_nn(out, model);
    const std::size_t tail = std::min<std::size_t>(100, tr.loss_trace.size());
    double recent = 0.0;
    for (std::size_t i = tr.loss_trace.size() - tail; i < tr.loss_trace.size(); ++i) recent += tr.loss_trace[i];
    std::printf("trained %s network, %zu minibatches, mean loss over last %zu: %.6e\n",
                std::string(to_string(kind)).c_str(), tr.loss_trace.size(), tail, recent / static_cast<double>(tail));
    return 0;
}

int run_eval(const Overrides& ov, const std::string& predictor_slug_arg, double velocity_kmh,
             const std::string& model_path) {
    const ExperimentConfig cfg = ov.build();
    const auto kind = parse_predictor(predictor_slug_arg);
    if (!kind) throw UsageError("unknown predictor '" + predictor_slug_arg + "'");
    PointBuilder builder(cfg, velocity_kmh, single_snr(cfg), PointStreams(cfg.seed, 0, 0));
    PredictFn fn;
    if (!model_path.empty()) {
        if (!is_network(*kind)) throw UsageError("--model applies to network predictors only");
        std::ifstream in(model_path);
        if (!in) throw UsageError("cannot open model file '" + model_path + "'");
        NNModel model = load_nn(in);
        const QKind q = *predictor_q_kind(*kind);
        if (model.header.q_kind && *model.header.q_kind != q)
            throw UsageError("model was trained for a different q kind");
        if (model.header.obs_len != cfg.obs_len || model.header.step != cfg.step)
            throw UsageError("model window does not match obs_len/step");
        if (model.header.velocity_mps && std::abs(*model.header.velocity_mps - builder.params().velocity_mps) > 1e-9)
            std::fprintf(stderr, "note: model was trained at %.3f km/h\n", *model.header.velocity_mps * 3.6);
        fn = network_predictor(std::move(model.weights), q_matrix(q, cfg.obs_len), builder.noise_var());
    } else {
        fn = builder.predictor(*kind);
    }
    const double mse = builder.evaluate(fn);
    std::printf("%s,%.6e,%.6e,%.6e,%zu\n", std::string(predictor_name(*kind)).c_str(), velocity_kmh,
                cfg.snr_db.front(), mse, cfg.eval_samples);
    return 0;
}

/// Quick consistency checks; a subset of the test suite that needs no test framework.
int run_selftest() {
    int failed = 0;
    auto report = [&](const char* name, bool ok, double value) {
        std::printf("%s %-28s %.3e\n", ok ? "PASS" : "FAIL", name, value);
        failed += ok ? 0 : 1;
    };

    RandomStream rng(11);
    double worst = 0.0;
    for (int i = 0; i < 50; ++i) {
        ModelParams p;
        p.velocity_mps = kmh_to_mps(10.0 * i);
        const auto scenario = sample_scenario(p, rng);
        const auto spec = CovarianceSpec::from_scenario(scenario, p.symbol_duration_s);
        const CVector a = lmmse_extended(spec, 16, 4, 0.1).output_row().weights;
        const CVector b = lmmse_direct(spec, 16, 4, 0.1).weights;
        worst = std::max(worst, max_abs(a - b) / std::max(max_abs(b), 1e-300));
    }
    report("extended filter row", worst <= 1e-12, worst);

    ModelParams p;
    p.velocity_mps = kmh_to_mps(60.0);
    const double s2 = 0.1;
    const std::size_t n = 5000;
    const double genie = s2 / (16.0 + s2);
    const double mse = evaluate_mse(perfect_predictor(p, 4, s2, PerfectMode::per_realization), p, 4, s2, n, rng);
    report("genie predictor MSE", std::abs(mse - genie) <= 3.0 * genie * std::sqrt(2.0 / n), mse);

    RandomStream grid_rng(12);
    const FilterBank bank = build_bank(GridStrategy::for_paths(32, 1), p, 4, s2, grid_rng);
    double bias_max = -1.0;
    for (double b : bank.biases) bias_max = std::max(bias_max, b);
    report("bank biases negative", bias_max < 0.0, bias_max);

    double init_gap = 0.0;
    for (QKind kind : {QKind::circulant, QKind::toeplitz}) {
        const StructuredModel model = assemble_structured(bank, kind);
        const NNWeights w = init_from_structured(model);
        for (int i = 0; i < 20; ++i) {
            const Realization r = draw_realization(p, 4, s2, rng);
            const RVector c = feature_compressed(r.y, model.q, s2);
            init_gap = std::max(init_gap, max_abs(filter_from_output(forward(w, c)) - structured_row(model, c).weights));
        }
    }
    report("network initialization", init_gap <= 1e-12, init_gap);

    std::printf("%s\n", failed ? "selftest failed" : "selftest passed");
    return failed ? kExitNumeric : 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"chanpred - channel predictors for time-variant flat-fading channels"};
    app.require_subcommand(1);

    Overrides sweep_ov, train_ov, eval_ov;
    auto* sweep = app.add_subcommand("sweep", "Evaluate all predictors over the SNR and velocity grid, write CSV");
    sweep_ov.attach(sweep);

    std::string train_kind = "toeplitz", train_model = "model.json";
    double train_velocity = 50.0;
    auto* train_cmd = app.add_subcommand("train", "Train one network and save its weights");
    train_ov.attach(train_cmd);
    train_cmd->add_option("--kind", train_kind, "toeplitz or circulant")->capture_default_str();
    train_cmd->add_option("--velocity", train_velocity, "Velocity in km/h")->capture_default_str();
    train_cmd->add_option("-m,--model", train_model, "Model output path")->capture_default_str();

    std::string eval_predictor = "nn_toep", eval_model;
    double eval_velocity = 50.0;
    auto* eval_cmd = app.add_subcommand("eval", "Evaluate one predictor at one point, print MSE");
    eval_ov.attach(eval_cmd);
    eval_cmd->add_option("-p,--predictor", eval_predictor, "Predictor slug")->capture_default_str();
    eval_cmd->add_option("--velocity", eval_velocity, "Velocity in km/h")->capture_default_str();
    eval_cmd->add_option("-m,--model", eval_model, "Saved network weights (network predictors)");

    auto* selftest = app.add_subcommand("selftest", "Run quick internal consistency checks");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        if (*sweep) return run_sweep(sweep_ov);
        if (*train_cmd) return run_train(train_ov, train_kind, train_velocity, train_model);
        if (*eval_cmd) return run_eval(eval_ov, eval_predictor, eval_velocity, eval_model);
        if (*selftest) return run_selftest();
    } catch (const ParseError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const NumericFailure& e) {
        std::cerr << "numeric failure: " << e.what() << '\n';
        return kExitNumeric;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitNumeric;
    }
    return 0;
}
