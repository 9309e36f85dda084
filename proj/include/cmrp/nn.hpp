#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "cmrp/cost_matrix.hpp"
#include "cmrp/generator.hpp"
#include "cmrp/plan.hpp"
#include "cmrp/rng.hpp"
#include "cmrp/scenario.hpp"

namespace cmrp::nn {

template <class T>
using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <class T>
using RowVec = Eigen::Matrix<T, 1, Eigen::Dynamic>;

// Per-vertex input features: normalized x, y, time cost, then one-hot role
// flags (depot, start, sub-task). Role flags are appended so the encoder can
// tell the vertex kinds apart; without them the formulation is ambiguous.
inline constexpr int kInputDim = 6;
// Mission-state features: agents remaining, accumulated time of the current
// agent, max agent time so far, distance from the current vertex to the depot.
inline constexpr int kStateDim = 4;

struct ModelConfig {
    int hidden_dim = 128;
    int heads = 8;
    int encoder_layers = 3;
    int feedforward_dim = 512;
    double logit_clip = 10.0;
    // When true (default) the depot -> start_k transition is taken
    // deterministically with probability one. When false the policy picks the
    // next start vertex itself whenever the current vertex is the depot.
    bool forced_start = true;

    int key_dim() const { return hidden_dim / heads; }

    void validate() const {
        if (hidden_dim <= 0 || heads <= 0 || hidden_dim % heads != 0) {
            throw std::invalid_argument("hidden_dim must be a positive multiple of heads");
        }
        if (encoder_layers < 1) throw std::invalid_argument("encoder_layers must be >= 1");
        if (feedforward_dim <= 0) throw std::invalid_argument("feedforward_dim must be positive");
        if (!(logit_clip > 0.0)) throw std::invalid_argument("logit_clip must be positive");
    }

    bool operator==(const ModelConfig&) const = default;
};

// Feature scaling constants; stored alongside the weights so inference applies
// exactly the scaling the model was trained with.
struct Normalization {
    double coord_scale = 10.0;
    double time_cost_scale = 10.0;

    bool operator==(const Normalization&) const = default;
};

template <class T>
struct AttnParams {
    Mat<T> wq, wk, wv, wo;  // each (in x out); pointer layers omit wv/wo
};

template <class T>
struct EncoderLayerParams {
    AttnParams<T> attn;
    RowVec<T> ln1_gamma, ln1_beta;
    Mat<T> ff_w1;
    RowVec<T> ff_b1;
    Mat<T> ff_w2;
    RowVec<T> ff_b2;
    RowVec<T> ln2_gamma, ln2_beta;
};

template <class T>
struct ModelParams {
    ModelConfig config;
    Normalization norm;

    Mat<T> w_in;  // kInputDim x d
    RowVec<T> b_in;
    std::vector<EncoderLayerParams<T>> layers;

    Mat<T> w_state;  // kStateDim x d
    RowVec<T> b_state;
    Mat<T> w_ctx;  // 2d x d
    RowVec<T> b_ctx;
    AttnParams<T> glimpse;  // cross-attention of the context over the nodes
    Mat<T> w_pq, w_pk;      // single-head pointer projections, d x d
};

// Visits every learnable tensor in a fixed order with a stable name. The
// order is the contract for the optimizer state and the weight file.
template <class T, class Fn>
void for_each_tensor(ModelParams<T>& params, Fn&& fn) {
    fn("input.w", params.w_in);
    fn("input.b", params.b_in);
    for (std::size_t i = 0; i < params.layers.size(); ++i) {
        auto& layer = params.layers[i];
        const std::string prefix = "encoder" + std::to_string(i) + ".";
        fn(prefix + "attn.wq", layer.attn.wq);
        fn(prefix + "attn.wk", layer.attn.wk);
        fn(prefix + "attn.wv", layer.attn.wv);
        fn(prefix + "attn.wo", layer.attn.wo);
        fn(prefix + "norm1.gamma", layer.ln1_gamma);
        fn(prefix + "norm1.beta", layer.ln1_beta);
        fn(prefix + "ff.w1", layer.ff_w1);
        fn(prefix + "ff.b1", layer.ff_b1);
        fn(prefix + "ff.w2", layer.ff_w2);
        fn(prefix + "ff.b2", layer.ff_b2);
        fn(prefix + "norm2.gamma", layer.ln2_gamma);
        fn(prefix + "norm2.beta", layer.ln2_beta);
    }
    fn("state.w", params.w_state);
    fn("state.b", params.b_state);
    fn("context.w", params.w_ctx);
    fn("context.b", params.b_ctx);
    fn("glimpse.wq", params.glimpse.wq);
    fn("glimpse.wk", params.glimpse.wk);
    fn("glimpse.wv", params.glimpse.wv);
    fn("glimpse.wo", params.glimpse.wo);
    fn("pointer.wq", params.w_pq);
    fn("pointer.wk", params.w_pk);
}

template <class T, class Fn>
void for_each_tensor(const ModelParams<T>& params, Fn&& fn) {
    for_each_tensor(const_cast<ModelParams<T>&>(params),
                    [&](const std::string& name, const auto& tensor) { fn(name, tensor); });
}

template <class T>
long parameter_count(const ModelParams<T>& params) {
    long count = 0;
    for_each_tensor(params, [&](const std::string&, const auto& t) { count += t.size(); });
    return count;
}

template <class T>
ModelParams<T> zeros_like(const ModelParams<T>& params) {
    ModelParams<T> zero = params;
    for_each_tensor(zero, [](const std::string&, auto& t) { t.setZero(); });
    return zero;
}

template <class T>
ModelParams<T> init_params(const ModelConfig& config, const Normalization& norm,
                           std::uint64_t seed) {
    config.validate();
    const int d = config.hidden_dim;
    ModelParams<T> params;
    params.config = config;
    params.norm = norm;
    params.w_in.resize(kInputDim, d);
    params.b_in = RowVec<T>::Zero(d);
    params.layers.resize(config.encoder_layers);
    for (auto& layer : params.layers) {
        layer.attn.wq.resize(d, d);
        layer.attn.wk.resize(d, d);
        layer.attn.wv.resize(d, d);
        layer.attn.wo.resize(d, d);
        layer.ln1_gamma = RowVec<T>::Ones(d);
        layer.ln1_beta = RowVec<T>::Zero(d);
        layer.ff_w1.resize(d, config.feedforward_dim);
        layer.ff_b1 = RowVec<T>::Zero(config.feedforward_dim);
        layer.ff_w2.resize(config.feedforward_dim, d);
        layer.ff_b2 = RowVec<T>::Zero(d);
        layer.ln2_gamma = RowVec<T>::Ones(d);
        layer.ln2_beta = RowVec<T>::Zero(d);
    }
    params.w_state.resize(kStateDim, d);
    params.b_state = RowVec<T>::Zero(d);
    params.w_ctx.resize(2 * d, d);
    params.b_ctx = RowVec<T>::Zero(d);
    params.glimpse.wq.resize(d, d);
    params.glimpse.wk.resize(d, d);
    params.glimpse.wv.resize(d, d);
    params.glimpse.wo.resize(d, d);
    params.w_pq.resize(d, d);
    params.w_pk.resize(d, d);

    Rng rng(seed);
    for_each_tensor(params, [&](const std::string& name, auto& tensor) {
        if (name.find("gamma") != std::string::npos || name.find(".b") != std::string::npos ||
            name.find("beta") != std::string::npos) {
            return;  // biases zero, norm scales one
        }
        const double bound = 1.0 / std::sqrt(static_cast<double>(tensor.rows()));
        for (Eigen::Index i = 0; i < tensor.size(); ++i) {
            tensor.data()[i] = static_cast<T>(rng.uniform(-bound, bound));
        }
    });
    return params;
}

// ---------------------------------------------------------------------------
// Features

template <class T>
Mat<T> node_features(const Scenario& scenario, const Normalization& norm) {
    const int m = scenario.agent_count();
    const std::vector<SubTask> subtasks = discretize(scenario.tasks, scenario.discretization);
    Mat<T> features = Mat<T>::Zero(scenario.vertex_count(), kInputDim);
    const double cs = norm.coord_scale;
    const double ts = norm.time_cost_scale;

    features(0, 0) = static_cast<T>(scenario.depot.x / cs);
    features(0, 1) = static_cast<T>(scenario.depot.y / cs);
    features(0, 3) = static_cast<T>(1);
    for (int k = 0; k < m; ++k) {
        const int v = scenario.start_vertex(k);
        features(v, 0) = static_cast<T>(scenario.starts[k].x / cs);
        features(v, 1) = static_cast<T>(scenario.starts[k].y / cs);
        features(v, 4) = static_cast<T>(1);
    }
    for (int s = 0; s < static_cast<int>(subtasks.size()); ++s) {
        const int v = scenario.subtask_vertex(s);
        features(v, 0) = static_cast<T>(subtasks[s].location.x / cs);
        features(v, 1) = static_cast<T>(subtasks[s].location.y / cs);
        features(v, 2) = static_cast<T>(subtasks[s].time_cost / ts);
        features(v, 5) = static_cast<T>(1);
    }
    return features;
}

// ---------------------------------------------------------------------------
// Attention building blocks

using Mask = std::vector<std::uint8_t>;  // 1 = attend / selectable

// Row softmax over unmasked entries; masked entries get exactly zero
// probability. Sums run in ascending index order so results do not depend on
// how many trailing masked entries follow.
template <class T>
void masked_softmax_row(const T* scores, const std::uint8_t* mask, int count, T* out) {
    T max_score = -std::numeric_limits<T>::infinity();
    for (int j = 0; j < count; ++j) {
        if (mask[j] && scores[j] > max_score) max_score = scores[j];
    }
    if (max_score == -std::numeric_limits<T>::infinity()) {
        throw std::invalid_argument("softmax row has no unmasked entry");
    }
    T sum = 0;
    for (int j = 0; j < count; ++j) {
        out[j] = mask[j] ? std::exp(scores[j] - max_score) : T(0);
        sum += out[j];
    }
    const T inv = T(1) / sum;
    for (int j = 0; j < count; ++j) out[j] *= inv;
}

// Multi-head attention: project queries/keys/values, per-head scaled-dot
// scores with masked keys set to -infinity before the softmax, weighted value
// sums, concatenated heads, output projection. key_mask may be empty (attend
// to everything). A query facing an all-masked key set is a contract
// violation and throws.
template <class T>
Mat<T> mha(const Mat<T>& queries, const Mat<T>& keys, const Mat<T>& values, const Mask& key_mask,
           const AttnParams<T>& params, int heads, std::vector<Mat<T>>* attn_cache = nullptr,
           Mat<T>* z_cache = nullptr) {
    const int n_q = static_cast<int>(queries.rows());
    const int n_k = static_cast<int>(keys.rows());
    const int d = static_cast<int>(params.wq.cols());
    if (heads <= 0 || d % heads != 0) throw std::invalid_argument("bad head count");
    if (!key_mask.empty() && static_cast<int>(key_mask.size()) < n_k) {
        throw std::invalid_argument("key mask shorter than key count");
    }
    const int dk = d / heads;
    const T scale = T(1) / std::sqrt(static_cast<T>(dk));
    Mask all_on;
    const std::uint8_t* mask_data;
    if (key_mask.empty()) {
        all_on.assign(n_k, 1);
        mask_data = all_on.data();
    } else {
        mask_data = key_mask.data();
    }

    Mat<T> q(n_q, d), k(n_k, d), v(n_k, d);
    for (int i = 0; i < n_q; ++i) q.row(i).noalias() = queries.row(i) * params.wq;
    for (int i = 0; i < n_k; ++i) k.row(i).noalias() = keys.row(i) * params.wk;
    for (int i = 0; i < n_k; ++i) v.row(i).noalias() = values.row(i) * params.wv;

    Mat<T> z = Mat<T>::Zero(n_q, d);
    if (attn_cache) attn_cache->assign(heads, Mat<T>::Zero(n_q, n_k));
    std::vector<T> scores(n_k), weights(n_k);
    for (int h = 0; h < heads; ++h) {
        const auto qh = q.middleCols(h * dk, dk);
        const auto kh = k.middleCols(h * dk, dk);
        const auto vh = v.middleCols(h * dk, dk);
        for (int i = 0; i < n_q; ++i) {
            for (int j = 0; j < n_k; ++j) {
                scores[j] = mask_data[j] ? scale * qh.row(i).dot(kh.row(j))
                                         : -std::numeric_limits<T>::infinity();
            }
            masked_softmax_row(scores.data(), mask_data, n_k, weights.data());
            auto zh = z.row(i).segment(h * dk, dk);
            for (int j = 0; j < n_k; ++j) {
                if (weights[j] != T(0)) zh += weights[j] * vh.row(j);
            }
            if (attn_cache) {
                for (int j = 0; j < n_k; ++j) (*attn_cache)[h](i, j) = weights[j];
            }
        }
    }
    if (z_cache) *z_cache = z;
    Mat<T> out(n_q, d);
    for (int i = 0; i < n_q; ++i) out.row(i).noalias() = z.row(i) * params.wo;
    return out;
}

// ---------------------------------------------------------------------------
// Encoder

template <class T>
struct LayerNormCache {
    Mat<T> x_hat;
    Eigen::Matrix<T, Eigen::Dynamic, 1> inv_std;
};

inline constexpr double kLayerNormEps = 1e-5;

// Per-node feature standardization with learned scale/shift.
template <class T>
Mat<T> layer_norm(const Mat<T>& x, const RowVec<T>& gamma, const RowVec<T>& beta,
                  LayerNormCache<T>* cache = nullptr) {
    const int rows = static_cast<int>(x.rows());
    const int d = static_cast<int>(x.cols());
    Mat<T> out(rows, d);
    if (cache) {
        cache->x_hat.resize(rows, d);
        cache->inv_std.resize(rows);
    }
    for (int i = 0; i < rows; ++i) {
        const T mean = x.row(i).mean();
        const T var = (x.row(i).array() - mean).square().sum() / static_cast<T>(d);
        const T inv_std = T(1) / std::sqrt(var + static_cast<T>(kLayerNormEps));
        auto x_hat = ((x.row(i).array() - mean) * inv_std).matrix();
        out.row(i) = (x_hat.array() * gamma.array()).matrix() + beta;
        if (cache) {
            cache->x_hat.row(i) = x_hat;
            cache->inv_std(i) = inv_std;
        }
    }
    return out;
}

template <class T>
struct EncoderLayerCache {
    Mat<T> input;
    std::vector<Mat<T>> attn;  // per head, rows = queries
    Mat<T> z;                  // concatenated head outputs
    Mat<T> res1;
    LayerNormCache<T> ln1;
    Mat<T> ln1_out;
    Mat<T> ff_pre;  // before the ReLU
    Mat<T> res2;
    LayerNormCache<T> ln2;
};

template <class T>
struct EncodeCache {
    Mat<T> features;
    std::vector<EncoderLayerCache<T>> layers;
    Mat<T> nodes;  // final node embeddings
};

template <class T>
struct Embeddings {
    Mat<T> nodes;    // V_real x d; embeddings of real vertices only
    RowVec<T> graph;  // mean over real vertices

    // Fixed-budget view with zero rows on padding.
    Mat<T> padded_nodes(int v_max) const {
        Mat<T> out = Mat<T>::Zero(v_max, nodes.cols());
        out.topRows(nodes.rows()) = nodes;
        return out;
    }
};

// h0 = W x + b per vertex, then N layers of (self-attention, residual, norm,
// feedforward, residual, norm), then the mean graph embedding. Operates on
// real vertices only; padded rows are excluded by construction, which is what
// the attention mask would do.
template <class T>
Embeddings<T> encode(const Mat<T>& features, const ModelParams<T>& params,
                     EncodeCache<T>* cache = nullptr) {
    const int v = static_cast<int>(features.rows());
    const int d = static_cast<int>(params.w_in.cols());
    if (features.cols() != kInputDim) throw std::invalid_argument("bad feature width");

    Mat<T> h(v, d);
    for (int i = 0; i < v; ++i) h.row(i).noalias() = features.row(i) * params.w_in + params.b_in;
    if (cache) {
        cache->features = features;
        cache->layers.resize(params.layers.size());
    }

    for (std::size_t l = 0; l < params.layers.size(); ++l) {
        const auto& layer = params.layers[l];
        EncoderLayerCache<T>* lc = cache ? &cache->layers[l] : nullptr;
        if (lc) lc->input = h;

        Mat<T> attn_out = mha(h, h, h, Mask{}, layer.attn, params.config.heads,
                              lc ? &lc->attn : nullptr, lc ? &lc->z : nullptr);
        Mat<T> res1 = h + attn_out;
        if (lc) lc->res1 = res1;
        Mat<T> ln1_out = layer_norm(res1, layer.ln1_gamma, layer.ln1_beta, lc ? &lc->ln1 : nullptr);
        if (lc) lc->ln1_out = ln1_out;

        Mat<T> ff_pre(v, params.config.feedforward_dim);
        for (int i = 0; i < v; ++i) {
            ff_pre.row(i).noalias() = ln1_out.row(i) * layer.ff_w1 + layer.ff_b1;
        }
        if (lc) lc->ff_pre = ff_pre;
        Mat<T> ff_act = ff_pre.cwiseMax(T(0));
        Mat<T> res2 = ln1_out;
        for (int i = 0; i < v; ++i) res2.row(i).noalias() += ff_act.row(i) * layer.ff_w2 + layer.ff_b2;
        if (lc) lc->res2 = res2;
        h = layer_norm(res2, layer.ln2_gamma, layer.ln2_beta, lc ? &lc->ln2 : nullptr);

        if (!h.allFinite()) {
            throw std::runtime_error("encoder produced non-finite values at layer " +
                                     std::to_string(l));
        }
    }
    if (cache) cache->nodes = h;

    Embeddings<T> emb;
    emb.nodes = std::move(h);
    emb.graph = RowVec<T>::Zero(d);
    for (int i = 0; i < v; ++i) emb.graph += emb.nodes.row(i);
    emb.graph /= static_cast<T>(v);
    return emb;
}

// ---------------------------------------------------------------------------
// Decoding

struct DecodeState {
    int current_vertex = Scenario::kDepotVertex;
    int current_agent = 0;
    int agents_remaining = 0;  // current agent included
    double t_cur = 0.0;
    double t_max = 0.0;
    std::vector<char> visited;  // per sub-task
    int unvisited = 0;
    double dist_to_depot = 0.0;
    int step = 0;
    std::vector<char> start_used;  // for the policy-selected-start variant
};

enum class DecodeMode { Greedy, Sample };

// Scales that turn raw state quantities into O(1) features. Derived from the
// scenario itself (not the padding budget) so padding cannot change them.
struct StateScale {
    double agents = 1.0;
    double time = 1.0;
    double dist = 1.0;

    static StateScale from(const Scenario& scenario, const Normalization& norm) {
        StateScale scale;
        scale.agents = std::max(1, scenario.agent_count());
        const double diag = norm.coord_scale * std::sqrt(2.0);
        double total_task_time = 0.0;
        for (const Task& task : scenario.tasks) total_task_time += task.time_cost;
        scale.dist = diag;
        scale.time = diag / scenario.speed + total_task_time;
        if (!(scale.time > 0.0)) scale.time = 1.0;
        return scale;
    }
};

template <class T>
RowVec<T> state_features(const DecodeState& state, const StateScale& scale) {
    RowVec<T> features(kStateDim);
    features(0) = static_cast<T>(state.agents_remaining / scale.agents);
    features(1) = static_cast<T>(state.t_cur / scale.time);
    features(2) = static_cast<T>(state.t_max / scale.time);
    features(3) = static_cast<T>(state.dist_to_depot / scale.dist);
    return features;
}

// Selectable vertices for the next action:
//  - at the depot (policy-start variant only): exactly the unused starts;
//  - elsewhere: unvisited sub-tasks, plus the depot unless the current agent
//    is the last one available and unvisited sub-tasks remain.
// Start vertices are never selectable away from the depot, and padded vertices
// are never selectable at all.
inline Mask action_mask(const PaddedScenario& padded, const DecodeState& state) {
    const Scenario& scenario = padded.scenario;
    Mask mask(padded.v_max, 0);
    if (state.current_vertex == Scenario::kDepotVertex) {
        for (int k = 0; k < scenario.agent_count(); ++k) {
            if (!state.start_used[k]) mask[scenario.start_vertex(k)] = 1;
        }
        return mask;
    }
    for (int s = 0; s < scenario.subtask_count(); ++s) {
        if (!state.visited[s]) mask[scenario.subtask_vertex(s)] = 1;
    }
    if (!(state.agents_remaining == 1 && state.unvisited > 0)) {
        mask[Scenario::kDepotVertex] = 1;
    }
    return mask;
}

template <class T>
struct DecoderPrecomp {
    Mat<T> kg, vg;  // glimpse keys/values, V_real x d
    Mat<T> kp;      // pointer keys, V_real x d

    static DecoderPrecomp compute(const Mat<T>& nodes, const ModelParams<T>& params) {
        const int v = static_cast<int>(nodes.rows());
        DecoderPrecomp pre;
        pre.kg.resize(v, nodes.cols());
        pre.vg.resize(v, nodes.cols());
        pre.kp.resize(v, nodes.cols());
        for (int i = 0; i < v; ++i) {
            pre.kg.row(i).noalias() = nodes.row(i) * params.glimpse.wk;
            pre.vg.row(i).noalias() = nodes.row(i) * params.glimpse.wv;
            pre.kp.row(i).noalias() = nodes.row(i) * params.w_pk;
        }
        return pre;
    }
};

template <class T>
struct StepCache {
    RowVec<T> state_feats;
    RowVec<T> h_state;
    RowVec<T> concat;
    RowVec<T> hc;
    RowVec<T> gq;
    Mat<T> attn;  // heads x V_real
    RowVec<T> z;
    RowVec<T> glimpse_out;
    RowVec<T> pq;
    RowVec<T> dots;  // pre-tanh scaled pointer scores (0 where masked)
    RowVec<T> probs;
    Mask mask;
    int chosen = -1;
    int current_vertex = -1;
};

// Context embedding: state features through the state projection,
// concatenated with the current vertex embedding, projected, plus the graph
// embedding.
template <class T>
RowVec<T> build_context(const Embeddings<T>& emb, const RowVec<T>& state_feats, int current_vertex,
                        const ModelParams<T>& params, StepCache<T>* cache = nullptr) {
    const int d = static_cast<int>(params.w_state.cols());
    RowVec<T> h_state = state_feats * params.w_state + params.b_state;
    RowVec<T> concat(2 * d);
    concat.leftCols(d) = h_state;
    concat.rightCols(d) = emb.nodes.row(current_vertex);
    RowVec<T> hc = concat * params.w_ctx + params.b_ctx + emb.graph;
    if (cache) {
        cache->state_feats = state_feats;
        cache->h_state = std::move(h_state);
        cache->concat = std::move(concat);
        cache->hc = hc;
        cache->current_vertex = current_vertex;
    }
    return hc;
}

// One decode step: a masked multi-head glimpse refines the context, then
// single-head pointer logits C*tanh(q.k/sqrt(d)) are softmaxed over the
// selectable vertices. Returns the chosen vertex and its log-probability.
template <class T>
std::pair<int, double> decode_step(const Embeddings<T>& emb, const DecoderPrecomp<T>& pre,
                                   const RowVec<T>& context, const Mask& mask,
                                   const ModelParams<T>& params, DecodeMode mode, Rng* rng,
                                   StepCache<T>* cache = nullptr, int forced_action = -1) {
    const int v = static_cast<int>(emb.nodes.rows());
    const int d = static_cast<int>(params.w_pq.rows());
    const int heads = params.config.heads;
    const int dk = d / heads;
    const T scale_g = T(1) / std::sqrt(static_cast<T>(dk));
    const T scale_p = T(1) / std::sqrt(static_cast<T>(d));
    const T clip = static_cast<T>(params.config.logit_clip);

    bool any = false;
    for (int j = 0; j < v; ++j) any = any || (j < static_cast<int>(mask.size()) && mask[j]);
    if (!any) throw std::invalid_argument("decode_step: empty action mask");

    // Glimpse.
    RowVec<T> gq = context * params.glimpse.wq;
    RowVec<T> z = RowVec<T>::Zero(d);
    Mat<T> attn;
    if (cache) attn = Mat<T>::Zero(heads, v);
    std::vector<T> scores(v), weights(v);
    for (int h = 0; h < heads; ++h) {
        const auto qh = gq.segment(h * dk, dk);
        const auto kh = pre.kg.middleCols(h * dk, dk);
        const auto vh = pre.vg.middleCols(h * dk, dk);
        for (int j = 0; j < v; ++j) {
            scores[j] =
                mask[j] ? scale_g * qh.dot(kh.row(j)) : -std::numeric_limits<T>::infinity();
        }
        masked_softmax_row(scores.data(), mask.data(), v, weights.data());
        auto zh = z.segment(h * dk, dk);
        for (int j = 0; j < v; ++j) {
            if (weights[j] != T(0)) zh += weights[j] * vh.row(j);
        }
        if (cache) {
            for (int j = 0; j < v; ++j) attn(h, j) = weights[j];
        }
    }
    RowVec<T> glimpse_out = z * params.glimpse.wo;

    // Pointer logits with tanh clipping.
    RowVec<T> pq = glimpse_out * params.w_pq;
    RowVec<T> dots = RowVec<T>::Zero(v);
    T max_logit = -std::numeric_limits<T>::infinity();
    std::vector<T> logits(v);
    for (int j = 0; j < v; ++j) {
        if (mask[j]) {
            dots(j) = scale_p * pq.dot(pre.kp.row(j));
            logits[j] = clip * std::tanh(dots(j));
            if (logits[j] > max_logit) max_logit = logits[j];
        } else {
            logits[j] = -std::numeric_limits<T>::infinity();
        }
    }
    T sum = 0;
    RowVec<T> probs = RowVec<T>::Zero(v);
    for (int j = 0; j < v; ++j) {
        if (mask[j]) {
            probs(j) = std::exp(logits[j] - max_logit);
            sum += probs(j);
        }
    }
    probs /= sum;

    int chosen;
    if (forced_action >= 0) {
        if (forced_action >= v || !mask[forced_action]) {
            throw std::invalid_argument("replayed action is not selectable");
        }
        chosen = forced_action;
    } else if (mode == DecodeMode::Greedy) {
        chosen = 0;
        T best = -std::numeric_limits<T>::infinity();
        for (int j = 0; j < v; ++j) {
            if (mask[j] && logits[j] > best) {
                best = logits[j];
                chosen = j;
            }
        }
    } else {
        if (!rng) throw std::invalid_argument("sampling requires an rng");
        const double r = rng->uniform();
        double cum = 0.0;
        chosen = -1;
        for (int j = 0; j < v; ++j) {
            if (!mask[j]) continue;
            cum += static_cast<double>(probs(j));
            chosen = j;
            if (r < cum) break;
        }
    }
    const double log_prob =
        static_cast<double>(logits[chosen] - max_logit) - std::log(static_cast<double>(sum));

    if (cache) {
        cache->gq = std::move(gq);
        cache->attn = std::move(attn);
        cache->z = std::move(z);
        cache->glimpse_out = std::move(glimpse_out);
        cache->pq = std::move(pq);
        cache->dots = std::move(dots);
        cache->probs = std::move(probs);
        cache->mask = mask;
        cache->chosen = chosen;
    }
    return {chosen, log_prob};
}

template <class T>
struct RolloutCache {
    EncodeCache<T> enc;
    Embeddings<T> emb;
    DecoderPrecomp<T> pre;
    std::vector<StepCache<T>> steps;
    StateScale scale;
};

struct RolloutResult {
    Plan plan;
    double total_log_prob = 0.0;
    MissionTimes times;
    long decision_steps = 0;
    std::vector<int> actions;  // chosen vertex per decision step
};

// Full autoregressive decode. Agents run in index order; each begins at its
// start vertex (deterministic depot->start transition unless the config says
// the policy chooses), selecting the depot hands over to the next agent. The
// mask guarantees a feasible plan for arbitrary finite weights.
template <class T>
RolloutResult rollout(const PaddedScenario& padded, const ModelParams<T>& params, DecodeMode mode,
                      Rng* rng, RolloutCache<T>* cache = nullptr,
                      const std::vector<int>* replay = nullptr) {
    const Scenario& scenario = padded.scenario;
    const int m = scenario.agent_count();
    const int n_prime = scenario.subtask_count();
    const CostMatrix matrix = build_cost_matrix(scenario);
    const StateScale scale = StateScale::from(scenario, params.norm);

    const Mat<T> features = node_features<T>(scenario, params.norm);
    Embeddings<T> emb = encode(features, params, cache ? &cache->enc : nullptr);
    DecoderPrecomp<T> pre = DecoderPrecomp<T>::compute(emb.nodes, params);

    DecodeState state;
    state.visited.assign(n_prime, 0);
    state.unvisited = n_prime;
    state.start_used.assign(m, 0);
    state.agents_remaining = m;

    RolloutResult result;
    result.plan.routes.resize(m);
    result.times.per_agent.assign(m, 0.0);
    if (cache) cache->scale = scale;

    std::size_t replay_pos = 0;
    auto next_action = [&]() -> int {
        StepCache<T>* step_cache = nullptr;
        if (cache) {
            cache->steps.emplace_back();
            step_cache = &cache->steps.back();
        }
        int forced = -1;
        if (replay) {
            if (replay_pos >= replay->size()) {
                throw std::invalid_argument("replayed action stream exhausted");
            }
            forced = (*replay)[replay_pos++];
        }
        const RowVec<T> feats = state_features<T>(state, scale);
        const RowVec<T> hc = build_context(emb, feats, state.current_vertex, params, step_cache);
        const auto [vertex, log_prob] = decode_step(emb, pre, hc, action_mask(padded, state),
                                                    params, mode, rng, step_cache, forced);
        result.total_log_prob += log_prob;
        ++result.decision_steps;
        ++state.step;
        result.actions.push_back(vertex);
        return vertex;
    };

    double completed_max = 0.0;
    for (int dispatch = 0; dispatch < m; ++dispatch) {
        int agent;
        if (params.config.forced_start) {
            agent = dispatch;  // deterministic depot -> start_k, probability 1
        } else {
            state.current_vertex = Scenario::kDepotVertex;
            state.current_agent = dispatch;
            state.t_cur = 0.0;
            state.t_max = completed_max;
            state.dist_to_depot = 0.0;
            agent = matrix.role_arg(next_action());
        }
        state.start_used[agent] = 1;
        state.current_agent = agent;
        state.current_vertex = scenario.start_vertex(agent);
        state.t_cur = 0.0;
        state.t_max = completed_max;
        state.dist_to_depot = distance(scenario.starts[agent], scenario.depot);

        for (;;) {
            const int vertex = next_action();
            if (vertex == Scenario::kDepotVertex) {
                state.t_cur += matrix(state.current_vertex, Scenario::kDepotVertex);
                result.times.per_agent[agent] = state.t_cur;
                completed_max = std::max(completed_max, state.t_cur);
                --state.agents_remaining;
                break;
            }
            const int s = matrix.role_arg(vertex);
            state.t_cur += matrix(state.current_vertex, vertex);
            state.visited[s] = 1;
            --state.unvisited;
            result.plan.routes[agent].push_back(s);
            state.current_vertex = vertex;
            state.t_max = std::max(completed_max, state.t_cur);
            state.dist_to_depot = distance(
                scenario.tasks[s / scenario.discretization].location, scenario.depot);
        }
    }
    result.times.max_time = completed_max;
    if (cache) cache->emb = std::move(emb), cache->pre = std::move(pre);
    return result;
}

template <class T>
RolloutResult rollout(const Scenario& scenario, const ModelParams<T>& params, DecodeMode mode,
                      Rng* rng, RolloutCache<T>* cache = nullptr,
                      const std::vector<int>* replay = nullptr) {
    return rollout(pad(scenario, scenario.vertex_count()), params, mode, rng, cache, replay);
}

// ---------------------------------------------------------------------------
// Backward pass: gradient of weight * sum(step log-probs) with respect to
// every parameter, accumulated into grads. The action sequence, rewards and
// mission state are constants of the rollout.

template <class T>
void layer_norm_backward(const Mat<T>& dout, const LayerNormCache<T>& cache,
                         const RowVec<T>& gamma, RowVec<T>& dgamma, RowVec<T>& dbeta, Mat<T>& dx) {
    const int rows = static_cast<int>(dout.rows());
    const int d = static_cast<int>(dout.cols());
    dx.resize(rows, d);
    for (int i = 0; i < rows; ++i) {
        dgamma += (dout.row(i).array() * cache.x_hat.row(i).array()).matrix();
        dbeta += dout.row(i);
        const auto dx_hat = (dout.row(i).array() * gamma.array()).matrix();
        const T mean_dx_hat = dx_hat.mean();
        const T mean_dx_hat_xhat =
            (dx_hat.array() * cache.x_hat.row(i).array()).mean();
        dx.row(i) = ((dx_hat.array() - mean_dx_hat -
                      cache.x_hat.row(i).array() * mean_dx_hat_xhat) *
                     cache.inv_std(i))
                        .matrix();
    }
}

template <class T>
void rollout_backward(const ModelParams<T>& params, const RolloutCache<T>& cache, T weight,
                      ModelParams<T>& grads) {
    const int d = params.config.hidden_dim;
    const int heads = params.config.heads;
    const int dk = d / heads;
    const T scale_g = T(1) / std::sqrt(static_cast<T>(dk));
    const T scale_p = T(1) / std::sqrt(static_cast<T>(d));
    const T clip = static_cast<T>(params.config.logit_clip);
    const Mat<T>& nodes = cache.emb.nodes;
    const int v = static_cast<int>(nodes.rows());

    Mat<T> d_nodes = Mat<T>::Zero(v, d);
    RowVec<T> d_graph = RowVec<T>::Zero(d);
    Mat<T> d_kg = Mat<T>::Zero(v, d), d_vg = Mat<T>::Zero(v, d), d_kp = Mat<T>::Zero(v, d);

    for (auto it = cache.steps.rbegin(); it != cache.steps.rend(); ++it) {
        const StepCache<T>& step = *it;
        // d logits: weight * (onehot(chosen) - p)
        RowVec<T> d_dots = RowVec<T>::Zero(v);
        for (int j = 0; j < v; ++j) {
            if (!step.mask[j]) continue;
            T du = -weight * step.probs(j);
            if (j == step.chosen) du += weight;
            const T t = std::tanh(step.dots(j));
            d_dots(j) = du * clip * (T(1) - t * t);
        }
        RowVec<T> d_pq = RowVec<T>::Zero(d);
        for (int j = 0; j < v; ++j) {
            if (d_dots(j) == T(0)) continue;
            d_pq += (scale_p * d_dots(j)) * cache.pre.kp.row(j);
            d_kp.row(j) += (scale_p * d_dots(j)) * step.pq;
        }
        grads.w_pq.noalias() += step.glimpse_out.transpose() * d_pq;
        RowVec<T> d_glimpse_out = d_pq * params.w_pq.transpose();

        grads.glimpse.wo.noalias() += step.z.transpose() * d_glimpse_out;
        RowVec<T> d_z = d_glimpse_out * params.glimpse.wo.transpose();

        RowVec<T> d_gq = RowVec<T>::Zero(d);
        for (int h = 0; h < heads; ++h) {
            const auto a = step.attn.row(h);
            const auto dz_h = d_z.segment(h * dk, dk);
            const auto kg_h = cache.pre.kg.middleCols(h * dk, dk);
            const auto vg_h = cache.pre.vg.middleCols(h * dk, dk);
            // d a_j = dz . v_j ; softmax backward
            T dot_a_da = 0;
            RowVec<T> da(v);
            for (int j = 0; j < v; ++j) {
                da(j) = (a(j) != T(0)) ? dz_h.dot(vg_h.row(j)) : T(0);
                dot_a_da += a(j) * da(j);
            }
            auto d_gq_h = d_gq.segment(h * dk, dk);
            const auto gq_h = step.gq.segment(h * dk, dk);
            for (int j = 0; j < v; ++j) {
                if (a(j) == T(0)) continue;
                d_vg.row(j).segment(h * dk, dk) += a(j) * dz_h;
                const T ds = a(j) * (da(j) - dot_a_da);
                d_gq_h += (scale_g * ds) * kg_h.row(j);
                d_kg.row(j).segment(h * dk, dk) += (scale_g * ds) * gq_h;
            }
        }
        grads.glimpse.wq.noalias() += step.hc.transpose() * d_gq;
        RowVec<T> d_hc = d_gq * params.glimpse.wq.transpose();

        d_graph += d_hc;
        grads.w_ctx.noalias() += step.concat.transpose() * d_hc;
        grads.b_ctx += d_hc;
        RowVec<T> d_concat = d_hc * params.w_ctx.transpose();
        const auto d_h_state = d_concat.leftCols(d);
        d_nodes.row(step.current_vertex) += d_concat.rightCols(d);
        grads.w_state.noalias() += step.state_feats.transpose() * d_h_state;
        grads.b_state += d_h_state;
    }

    // Decoder precomputations feed back into the node embeddings.
    grads.glimpse.wk.noalias() += nodes.transpose() * d_kg;
    grads.glimpse.wv.noalias() += nodes.transpose() * d_vg;
    grads.w_pk.noalias() += nodes.transpose() * d_kp;
    d_nodes.noalias() += d_kg * params.glimpse.wk.transpose();
    d_nodes.noalias() += d_vg * params.glimpse.wv.transpose();
    d_nodes.noalias() += d_kp * params.w_pk.transpose();

    // Graph embedding is the mean of the node rows.
    const T inv_v = T(1) / static_cast<T>(v);
    for (int i = 0; i < v; ++i) d_nodes.row(i) += d_graph * inv_v;

    // Encoder layers in reverse.
    Mat<T> d_h = std::move(d_nodes);
    for (int l = static_cast<int>(params.layers.size()) - 1; l >= 0; --l) {
        const auto& layer = params.layers[l];
        auto& g_layer = grads.layers[l];
        const EncoderLayerCache<T>& lc = cache.enc.layers[l];

        Mat<T> d_res2;
        layer_norm_backward(d_h, lc.ln2, layer.ln2_gamma, g_layer.ln2_gamma, g_layer.ln2_beta,
                            d_res2);
        // res2 = ln1_out + relu(ff_pre) * w2 + b2
        Mat<T> d_ln1_out = d_res2;
        Mat<T> ff_act = lc.ff_pre.cwiseMax(T(0));
        g_layer.ff_w2.noalias() += ff_act.transpose() * d_res2;
        g_layer.ff_b2 += d_res2.colwise().sum();
        Mat<T> d_act = d_res2 * layer.ff_w2.transpose();
        Mat<T> d_pre =
            (d_act.array() * (lc.ff_pre.array() > T(0)).template cast<T>()).matrix();
        g_layer.ff_w1.noalias() += lc.ln1_out.transpose() * d_pre;
        g_layer.ff_b1 += d_pre.colwise().sum();
        d_ln1_out.noalias() += d_pre * layer.ff_w1.transpose();

        Mat<T> d_res1;
        layer_norm_backward(d_ln1_out, lc.ln1, layer.ln1_gamma, g_layer.ln1_gamma,
                            g_layer.ln1_beta, d_res1);

        // res1 = input + z * wo
        Mat<T> d_input = d_res1;
        g_layer.attn.wo.noalias() += lc.z.transpose() * d_res1;
        Mat<T> d_z = d_res1 * layer.attn.wo.transpose();

        // Recompute the projections (cheaper than caching them).
        Mat<T> q(v, d), k(v, d), val(v, d);
        for (int i = 0; i < v; ++i) {
            q.row(i).noalias() = lc.input.row(i) * layer.attn.wq;
            k.row(i).noalias() = lc.input.row(i) * layer.attn.wk;
            val.row(i).noalias() = lc.input.row(i) * layer.attn.wv;
        }
        Mat<T> d_q = Mat<T>::Zero(v, d), d_k = Mat<T>::Zero(v, d), d_val = Mat<T>::Zero(v, d);
        const T scale = T(1) / std::sqrt(static_cast<T>(dk));
        for (int h = 0; h < heads; ++h) {
            const Mat<T>& a = lc.attn[h];
            const auto dz_h = d_z.middleCols(h * dk, dk);
            const auto vh = val.middleCols(h * dk, dk);
            const auto kh = k.middleCols(h * dk, dk);
            const auto qh = q.middleCols(h * dk, dk);
            Mat<T> da = dz_h * vh.transpose();           // v x v
            d_val.middleCols(h * dk, dk).noalias() += a.transpose() * dz_h;
            // softmax rows backward
            Mat<T> ds(v, v);
            for (int i = 0; i < v; ++i) {
                const T dot = a.row(i).dot(da.row(i));
                ds.row(i) = (a.row(i).array() * (da.row(i).array() - dot)).matrix() * scale;
            }
            d_q.middleCols(h * dk, dk).noalias() += ds * kh;
            d_k.middleCols(h * dk, dk).noalias() += ds.transpose() * qh;
        }
        g_layer.attn.wq.noalias() += lc.input.transpose() * d_q;
        g_layer.attn.wk.noalias() += lc.input.transpose() * d_k;
        g_layer.attn.wv.noalias() += lc.input.transpose() * d_val;
        d_input.noalias() += d_q * layer.attn.wq.transpose();
        d_input.noalias() += d_k * layer.attn.wk.transpose();
        d_input.noalias() += d_val * layer.attn.wv.transpose();

        d_h = std::move(d_input);
    }
    grads.w_in.noalias() += cache.enc.features.transpose() * d_h;
    grads.b_in += d_h.colwise().sum();
}

}  // namespace cmrp::nn
