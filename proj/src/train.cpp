#include "cmrp/train.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>

#include <boost/math/distributions/students_t.hpp>
#include <json.hpp>

#include "cmrp/json_io.hpp"
#include "cmrp/plan.hpp"

namespace cmrp {

TrainConfig train_config_from_json_text(const std::string& json_text) {
    const nlohmann::json j = nlohmann::json::parse(json_text);
    TrainConfig config;
    config.batch_size = j.value("batch_size", config.batch_size);
    config.learning_rate = j.value("learning_rate", config.learning_rate);
    config.max_epochs = j.value("max_epochs", config.max_epochs);
    config.train_samples = j.value("train_samples", config.train_samples);
    config.val_samples = j.value("val_samples", config.val_samples);
    config.baseline_significance = j.value("baseline_significance", config.baseline_significance);
    config.early_stop_patience = j.value("early_stop_patience", config.early_stop_patience);
    config.seed = j.value("seed", config.seed);
    config.mixed_size = j.value("mixed_size", config.mixed_size);
    config.optimizer = j.value("optimizer", config.optimizer);
    config.threads = j.value("threads", config.threads);
    if (j.contains("generator")) config.generator = generator_config_from_json(j.at("generator"));
    if (j.contains("model")) {
        const auto& jm = j.at("model");
        config.model.hidden_dim = jm.value("hidden_dim", config.model.hidden_dim);
        config.model.heads = jm.value("heads", config.model.heads);
        config.model.encoder_layers = jm.value("encoder_layers", config.model.encoder_layers);
        config.model.feedforward_dim = jm.value("feedforward_dim", config.model.feedforward_dim);
        config.model.logit_clip = jm.value("logit_clip", config.model.logit_clip);
        config.model.forced_start = jm.value("forced_start", config.model.forced_start);
    }
    config.validate();
    return config;
}

TrainConfig load_train_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open train config: " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return train_config_from_json_text(text);
}

namespace {

std::string fmt(double value) {
    char buffer[40];
    std::snprintf(buffer, sizeof(buffer), "%.9g", value);
    return buffer;
}

}  // namespace

std::string TrainReport::to_csv() const {
    std::string out = "# cmrp-train-report-v1 optimizer=" + optimizer +
                      " threads=" + std::to_string(threads) +
                      " mixed=" + std::to_string(mixed_size ? 1 : 0) + "\n";
    out += "epoch,train_mean_max_time,val_mean_max_time,baseline_swapped,t_stat,p_value,wall_s\n";
    for (const EpochRow& row : epochs) {
        out += std::to_string(row.epoch) + "," + fmt(row.train_mean_max_time) + "," +
               fmt(row.val_mean_max_time) + "," + (row.baseline_swapped ? "1" : "0") + "," +
               fmt(row.t_stat) + "," + fmt(row.p_value) + "," + fmt(row.wall_s) + "\n";
    }
    out += "# best_epoch=" + std::to_string(best_epoch) + " best_val_mean=" + fmt(best_val_mean) +
           "\n";
    return out;
}

double paired_one_sided_p_value(const std::vector<double>& diffs, double* t_stat_out) {
    const std::size_t n = diffs.size();
    if (n < 2) {
        if (t_stat_out) *t_stat_out = 0.0;
        return 1.0;
    }
    double mean = 0.0;
    for (double d : diffs) mean += d;
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (double d : diffs) ss += (d - mean) * (d - mean);
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    if (sd == 0.0) {
        if (t_stat_out) *t_stat_out = 0.0;
        return mean > 0.0 ? 0.0 : 1.0;
    }
    const double t = mean / (sd / std::sqrt(static_cast<double>(n)));
    if (t_stat_out) *t_stat_out = t;
    const boost::math::students_t dist(static_cast<double>(n - 1));
    return boost::math::cdf(boost::math::complement(dist, t));
}

namespace {

std::vector<PaddedScenario> make_batch(const GeneratorConfig& generator, bool mixed, long count,
                                       std::uint64_t first_index) {
    if (mixed) return generate_mixed(generator, static_cast<int>(count), first_index);
    std::vector<PaddedScenario> batch;
    batch.reserve(count);
    for (long i = 0; i < count; ++i) {
        Scenario scenario = generate(generator, first_index + static_cast<std::uint64_t>(i));
        const int v = scenario.vertex_count();
        batch.push_back(pad(std::move(scenario), v));
    }
    return batch;
}

// Every epoch, the first few validation rollouts are re-evaluated through the
// plan-level evaluator; a mismatch means the decoder's running times drifted
// from the ground-truth cost model.
template <class T>
void spot_check_reward(const nn::ModelParams<T>& params,
                       const std::vector<PaddedScenario>& val) {
    const int checks = std::min<std::size_t>(16, val.size());
    for (int i = 0; i < checks; ++i) {
        const nn::RolloutResult result =
            nn::rollout(val[i], params, nn::DecodeMode::Greedy, nullptr);
        const MissionTimes reference = mission_times(val[i].scenario, result.plan);
        if (std::abs(reward(result.times) - (-reference.max_time)) > 1e-6) {
            throw std::runtime_error("rollout mission time disagrees with plan evaluation by " +
                                     std::to_string(std::abs(result.times.max_time -
                                                             reference.max_time)));
        }
    }
}

}  // namespace

template <class T>
std::pair<nn::ModelParams<T>, TrainReport> train(const TrainConfig& config) {
    config.validate();

    GeneratorConfig gen_train = config.generator;
    gen_train.seed = splitmix64(config.seed);
    GeneratorConfig gen_val = config.generator;
    gen_val.seed = splitmix64(config.seed ^ detail::kValSalt);

    const std::vector<PaddedScenario> val =
        make_batch(gen_val, config.mixed_size, config.val_samples, 0);

    nn::Normalization norm;
    norm.coord_scale = config.generator.domain_size;
    norm.time_cost_scale = std::max(1.0, config.generator.time_cost_max);
    nn::ModelParams<T> params =
        nn::init_params<T>(config.model, norm, splitmix64(config.seed ^ detail::kInitSalt));
    nn::ModelParams<T> baseline = params;
    nn::ModelParams<T> best_params = params;

    Adam<T> adam(params, config.learning_rate);
    const bool use_adam = config.optimizer == "adam";

    TrainReport report;
    report.optimizer = config.optimizer;
    report.threads = config.threads;
    report.mixed_size = config.mixed_size;

    int patience_left = config.early_stop_patience;
    std::uint64_t batch_counter = 0;

    for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
        const auto epoch_start = std::chrono::steady_clock::now();
        double train_cost_sum = 0.0;
        long train_count = 0;

        const std::uint64_t epoch_base =
            static_cast<std::uint64_t>(epoch - 1) * static_cast<std::uint64_t>(config.train_samples);
        for (long offset = 0; offset < config.train_samples; offset += config.batch_size) {
            const long count = std::min<long>(config.batch_size, config.train_samples - offset);
            const std::vector<PaddedScenario> batch =
                make_batch(gen_train, config.mixed_size, count, epoch_base + offset);
            const std::uint64_t salt =
                splitmix64(splitmix64(config.seed ^ detail::kSampleSalt) + batch_counter++);
            nn::ModelParams<T> grads = nn::zeros_like(params);
            const BatchStats stats =
                reinforce_batch(params, baseline, batch, salt, grads, config.threads);
            if (use_adam) {
                adam.step(params, grads);
            } else {
                sgd_step(params, grads, config.learning_rate);
            }
            train_cost_sum += stats.mean_sampled_max_time * static_cast<double>(count);
            train_count += count;
        }
        const double train_mean = train_cost_sum / static_cast<double>(train_count);
        if (!std::isfinite(train_mean)) {
            throw TrainingDiverged("training loss became non-finite at epoch " +
                                       std::to_string(epoch),
                                   report);
        }

        spot_check_reward(params, val);
        const std::vector<double> val_costs = greedy_costs(params, val, config.threads);
        double val_mean = 0.0;
        for (double c : val_costs) val_mean += c;
        val_mean /= static_cast<double>(val_costs.size());

        const BaselineDecision decision = detail::baseline_decide(
            params, baseline, val, config.baseline_significance, config.threads, &val_costs);

        EpochRow row;
        row.epoch = epoch;
        row.train_mean_max_time = train_mean;
        row.val_mean_max_time = val_mean;
        row.baseline_swapped = decision.swapped;
        row.t_stat = decision.t_stat;
        row.p_value = decision.p_value;
        row.wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - epoch_start)
                         .count();
        report.epochs.push_back(row);

        if (val_mean < report.best_val_mean) {
            report.best_val_mean = val_mean;
            report.best_epoch = epoch;
            best_params = params;
            patience_left = config.early_stop_patience;
        } else {
            --patience_left;
            if (patience_left <= 0) break;
        }
    }
    return {std::move(best_params), std::move(report)};
}

template std::pair<nn::ModelParams<float>, TrainReport> train<float>(const TrainConfig&);
template std::pair<nn::ModelParams<double>, TrainReport> train<double>(const TrainConfig&);

}  // namespace cmrp
