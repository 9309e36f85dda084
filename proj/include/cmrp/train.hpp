#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "cmrp/generator.hpp"
#include "cmrp/nn.hpp"
#include "cmrp/parallel.hpp"

namespace cmrp {

// Reward: negative of the largest per-agent mission time.
inline double reward(const MissionTimes& times) { return -times.max_time; }

struct TrainConfig {
    int batch_size = 5000;
    double learning_rate = 1e-4;
    int max_epochs = 50;
    long train_samples = 1'000'000;  // fresh scenarios per epoch
    long val_samples = 100'000;
    double baseline_significance = 0.05;
    int early_stop_patience = 5;
    std::uint64_t seed = 0;
    bool mixed_size = false;

    GeneratorConfig generator;  // sizes/ranges; its seed field is derived, not used
    nn::ModelConfig model;
    std::string optimizer = "adam";  // "adam" | "sgd"
    int threads = 1;

    void validate() const {
        if (batch_size < 1 || max_epochs < 1 || train_samples < 1 || val_samples < 1) {
            throw std::invalid_argument("train config sizes must be positive");
        }
        if (!(learning_rate > 0.0)) throw std::invalid_argument("learning rate must be positive");
        if (!(baseline_significance > 0.0 && baseline_significance < 1.0)) {
            throw std::invalid_argument("baseline significance must lie in (0, 1)");
        }
        if (early_stop_patience < 1) throw std::invalid_argument("patience must be >= 1");
        if (optimizer != "adam" && optimizer != "sgd") {
            throw std::invalid_argument("optimizer must be adam or sgd");
        }
        model.validate();
    }
};

// Mirrors TrainConfig field for field, with nested "generator" and "model"
// sections; see README for the schema.
TrainConfig train_config_from_json_text(const std::string& json_text);
TrainConfig load_train_config(const std::string& path);

struct EpochRow {
    int epoch = 0;
    double train_mean_max_time = 0.0;
    double val_mean_max_time = 0.0;
    bool baseline_swapped = false;
    double t_stat = 0.0;
    double p_value = 1.0;
    double wall_s = 0.0;  // timing data; excluded from determinism comparisons
};

struct TrainReport {
    std::vector<EpochRow> epochs;
    int best_epoch = 0;
    double best_val_mean = std::numeric_limits<double>::infinity();
    std::string optimizer = "adam";
    int threads = 1;
    bool mixed_size = false;

    std::string to_csv() const;
};

class TrainingDiverged : public std::runtime_error {
public:
    TrainingDiverged(const std::string& what, TrainReport partial)
        : std::runtime_error(what), report(std::move(partial)) {}

    TrainReport report;
};

struct BaselineDecision {
    bool swapped = false;
    double t_stat = 0.0;
    double p_value = 1.0;
    double mean_current = 0.0;
    double mean_baseline = 0.0;
};

// One-sided paired t-test on diffs (baseline minus current; positive = current
// better). Zero-variance diffs give p = 1 when the mean is zero and p = 0 when
// strictly positive.
double paired_one_sided_p_value(const std::vector<double>& diffs, double* t_stat_out);

struct BatchStats {
    double mean_sampled_max_time = 0.0;
    double mean_baseline_max_time = 0.0;
};

namespace detail {

// Seed-space salts so the validation set, parameter init, and per-batch action
// sampling draw from disjoint streams of the one user seed.
inline constexpr std::uint64_t kValSalt = 0x76616c5f736574ull;
inline constexpr std::uint64_t kInitSalt = 0x696e69745f7731ull;
inline constexpr std::uint64_t kSampleSalt = 0x73616d706c6573ull;

template <class T>
std::vector<T*> tensor_data(nn::ModelParams<T>& params, std::vector<long>* sizes = nullptr) {
    std::vector<T*> data;
    nn::for_each_tensor(params, [&](const std::string&, auto& t) {
        data.push_back(t.data());
        if (sizes) sizes->push_back(t.size());
    });
    return data;
}

}  // namespace detail

// Per-instance: sample-rollout cost vs frozen-baseline greedy cost; loss is
// mean((cost_sampled - cost_baseline) * sum of step log-probs) with the
// advantage treated as a constant. Gradients accumulate into `grads`
// (zeroed here). Instance i samples from stream (salt, i), so results do not
// depend on the thread count; block sums merge in block order.
template <class T>
BatchStats reinforce_batch(const nn::ModelParams<T>& params, const nn::ModelParams<T>& baseline,
                           const std::vector<PaddedScenario>& batch, std::uint64_t salt,
                           nn::ModelParams<T>& grads, int threads = 1,
                           nn::DecodeMode sample_mode = nn::DecodeMode::Sample) {
    if (batch.empty()) throw std::invalid_argument("reinforce_batch: empty batch");
    const long n = static_cast<long>(batch.size());
    const int workers = std::max(1, std::min<int>(threads, static_cast<int>(n)));

    std::vector<nn::ModelParams<T>> block_grads;
    block_grads.reserve(workers);
    for (int b = 0; b < workers; ++b) block_grads.push_back(nn::zeros_like(params));
    std::vector<double> sampled_cost(n), baseline_cost(n);

    parallel_blocks(n, workers, [&](long begin, long end, int block) {
        for (long i = begin; i < end; ++i) {
            Rng rng = Rng::for_index(salt, static_cast<std::uint64_t>(i));
            nn::RolloutCache<T> cache;
            const nn::RolloutResult sampled =
                nn::rollout(batch[i], params, sample_mode, &rng, &cache);
            const nn::RolloutResult greedy =
                nn::rollout(batch[i], baseline, nn::DecodeMode::Greedy, nullptr);
            sampled_cost[i] = sampled.times.max_time;
            baseline_cost[i] = greedy.times.max_time;
            const T weight =
                static_cast<T>((sampled_cost[i] - baseline_cost[i]) / static_cast<double>(n));
            if (weight != T(0)) {
                nn::rollout_backward(params, cache, weight, block_grads[block]);
            }
        }
    });

    grads = std::move(block_grads[0]);
    std::vector<T*> acc = detail::tensor_data(grads);
    std::vector<long> sizes;
    detail::tensor_data(grads, &sizes);
    for (int b = 1; b < workers; ++b) {
        std::vector<T*> src = detail::tensor_data(block_grads[b]);
        for (std::size_t t = 0; t < acc.size(); ++t) {
            for (long i = 0; i < sizes[t]; ++i) acc[t][i] += src[t][i];
        }
    }

    bool finite = true;
    nn::for_each_tensor(grads, [&](const std::string&, const auto& t) {
        finite = finite && t.allFinite();
    });
    BatchStats stats;
    for (long i = 0; i < n; ++i) {
        stats.mean_sampled_max_time += sampled_cost[i];
        stats.mean_baseline_max_time += baseline_cost[i];
    }
    stats.mean_sampled_max_time /= static_cast<double>(n);
    stats.mean_baseline_max_time /= static_cast<double>(n);
    if (!finite || !std::isfinite(stats.mean_sampled_max_time)) {
        throw std::runtime_error("non-finite gradient in batch of " + std::to_string(n) +
                                 " (salt " + std::to_string(salt) + ", mean sampled cost " +
                                 std::to_string(stats.mean_sampled_max_time) + ")");
    }
    return stats;
}

template <class T>
std::vector<double> greedy_costs(const nn::ModelParams<T>& params,
                                 const std::vector<PaddedScenario>& scenarios, int threads = 1) {
    std::vector<double> costs(scenarios.size());
    parallel_blocks(static_cast<long>(scenarios.size()), threads, [&](long begin, long end, int) {
        for (long i = begin; i < end; ++i) {
            costs[i] = nn::rollout(scenarios[i], params, nn::DecodeMode::Greedy, nullptr)
                           .times.max_time;
        }
    });
    return costs;
}

namespace detail {

template <class T>
BaselineDecision baseline_decide(const nn::ModelParams<T>& params, nn::ModelParams<T>& baseline,
                                 const std::vector<PaddedScenario>& val, double alpha, int threads,
                                 const std::vector<double>* current_costs) {
    if (val.empty()) throw std::invalid_argument("baseline_update: empty validation set");
    const std::vector<double> current =
        current_costs ? *current_costs : greedy_costs(params, val, threads);
    const std::vector<double> base = greedy_costs(baseline, val, threads);

    std::vector<double> diffs(val.size());
    BaselineDecision decision;
    for (std::size_t i = 0; i < val.size(); ++i) {
        diffs[i] = base[i] - current[i];
        decision.mean_current += current[i];
        decision.mean_baseline += base[i];
    }
    decision.mean_current /= static_cast<double>(val.size());
    decision.mean_baseline /= static_cast<double>(val.size());
    decision.p_value = paired_one_sided_p_value(diffs, &decision.t_stat);
    decision.swapped =
        decision.mean_current < decision.mean_baseline && decision.p_value < alpha;
    if (decision.swapped) baseline = params;
    return decision;
}

}  // namespace detail

// Greedy-decodes both parameter sets on the validation set and replaces the
// baseline when the current policy's improvement is significant under a paired
// one-sided t-test at level alpha.
template <class T>
BaselineDecision baseline_update(const nn::ModelParams<T>& params, nn::ModelParams<T>& baseline,
                                 const std::vector<PaddedScenario>& val, double alpha,
                                 int threads = 1) {
    return detail::baseline_decide(params, baseline, val, alpha, threads, nullptr);
}

// Adam with bias correction; the moment estimates follow the tensor order of
// for_each_tensor.
template <class T>
class Adam {
public:
    Adam(const nn::ModelParams<T>& params, double lr)
        : lr_(lr), m_(nn::zeros_like(params)), v_(nn::zeros_like(params)) {}

    void step(nn::ModelParams<T>& params, nn::ModelParams<T>& grads) {
        ++t_;
        const double bc1 = 1.0 - std::pow(beta1_, t_);
        const double bc2 = 1.0 - std::pow(beta2_, t_);
        std::vector<long> sizes;
        std::vector<T*> p = detail::tensor_data(params, &sizes);
        std::vector<T*> g = detail::tensor_data(grads);
        std::vector<T*> m = detail::tensor_data(m_);
        std::vector<T*> v = detail::tensor_data(v_);
        for (std::size_t t = 0; t < p.size(); ++t) {
            for (long i = 0; i < sizes[t]; ++i) {
                m[t][i] = static_cast<T>(beta1_) * m[t][i] + static_cast<T>(1 - beta1_) * g[t][i];
                v[t][i] = static_cast<T>(beta2_) * v[t][i] +
                          static_cast<T>(1 - beta2_) * g[t][i] * g[t][i];
                const double m_hat = m[t][i] / bc1;
                const double v_hat = v[t][i] / bc2;
                p[t][i] -= static_cast<T>(lr_ * m_hat / (std::sqrt(v_hat) + eps_));
            }
        }
    }

private:
    double lr_;
    double beta1_ = 0.9;
    double beta2_ = 0.999;
    double eps_ = 1e-8;
    long t_ = 0;
    nn::ModelParams<T> m_, v_;
};

template <class T>
void sgd_step(nn::ModelParams<T>& params, nn::ModelParams<T>& grads, double lr) {
    std::vector<long> sizes;
    std::vector<T*> p = detail::tensor_data(params, &sizes);
    std::vector<T*> g = detail::tensor_data(grads);
    for (std::size_t t = 0; t < p.size(); ++t) {
        for (long i = 0; i < sizes[t]; ++i) p[t][i] -= static_cast<T>(lr) * g[t][i];
    }
}

template <class T>
std::pair<nn::ModelParams<T>, TrainReport> train(const TrainConfig& config);

extern template std::pair<nn::ModelParams<float>, TrainReport> train<float>(const TrainConfig&);
extern template std::pair<nn::ModelParams<double>, TrainReport> train<double>(const TrainConfig&);

}  // namespace cmrp
