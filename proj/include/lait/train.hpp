#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "lait/pipeline.hpp"

namespace lait {

// ---------------------------------------------------------------------------
// Synthetic tasks
//
// copy_vs_shuffle: segment 2 is either an exact copy of segment 1 ("same")
// or a random permutation that changes the sequence ("diff"). Telling the
// two apart requires position-sensitive cross-segment comparison, which is
// what joint layers provide and parallel layers cannot.
//
// shared_token: "yes" iff the segments share at least one token id; a
// weaker, content-only cross-segment signal.
// ---------------------------------------------------------------------------

struct SyntheticTaskSpec {
    enum class Kind { copy_vs_shuffle, shared_token };

    Kind kind = Kind::copy_vs_shuffle;
    uint32_t seq_len = 8;
    uint32_t vocab = 50;  // ids are drawn from [2, vocab)
    uint32_t n_train = 4096;
    uint32_t n_eval = 1024;
    uint64_t seed = 1;
};

inline const char* to_string(SyntheticTaskSpec::Kind k) {
    return k == SyntheticTaskSpec::Kind::copy_vs_shuffle ? "copy_vs_shuffle" : "shared_token";
}

struct SyntheticData {
    std::vector<SegmentedExample> train;
    std::vector<SegmentedExample> eval;
    std::vector<std::string> labels;
};

SyntheticData gen_synthetic(const SyntheticTaskSpec& spec);

// ---------------------------------------------------------------------------
// Gradients and Adam
// ---------------------------------------------------------------------------

template <typename T>
struct LayerGrads {
    Matrix<T> wq, wk, wv, wo, w1, w2;
    std::vector<T> gain_attn, gain_ff;
    Matrix<T> rel_bias;
};

template <typename T>
struct Gradients {
    Matrix<T> embedding;
    std::vector<LayerGrads<T>> layers;
    Matrix<T> head_w;
    std::vector<T> head_b;

    static Gradients zeros_like(const ModelWeights<T>& w) {
        Gradients g;
        g.embedding = Matrix<T>(w.embedding.rows, w.embedding.cols);
        g.layers.resize(w.layers.size());
        for (size_t l = 0; l < w.layers.size(); ++l) {
            const auto& lw = w.layers[l];
            auto& gl = g.layers[l];
            gl.wq = Matrix<T>(lw.wq.rows, lw.wq.cols);
            gl.wk = Matrix<T>(lw.wk.rows, lw.wk.cols);
            gl.wv = Matrix<T>(lw.wv.rows, lw.wv.cols);
            gl.wo = Matrix<T>(lw.wo.rows, lw.wo.cols);
            gl.w1 = Matrix<T>(lw.w1.rows, lw.w1.cols);
            gl.w2 = Matrix<T>(lw.w2.rows, lw.w2.cols);
            gl.gain_attn.assign(lw.gain_attn.size(), T(0));
            gl.gain_ff.assign(lw.gain_ff.size(), T(0));
            if (lw.rel_bias.rows) gl.rel_bias = Matrix<T>(lw.rel_bias.rows, lw.rel_bias.cols);
        }
        if (w.head.n_labels()) {
            g.head_w = Matrix<T>(w.head.w.rows, w.head.w.cols);
            g.head_b.assign(w.head.b.size(), T(0));
        }
        return g;
    }

    void zero() {
        auto wipe = [](auto& v) { std::fill(v.begin(), v.end(), T(0)); };
        wipe(embedding.data);
        for (auto& gl : layers) {
            wipe(gl.wq.data);
            wipe(gl.wk.data);
            wipe(gl.wv.data);
            wipe(gl.wo.data);
            wipe(gl.w1.data);
            wipe(gl.w2.data);
            wipe(gl.gain_attn);
            wipe(gl.gain_ff);
            wipe(gl.rel_bias.data);
        }
        wipe(head_w.data);
        wipe(head_b);
    }

    void scale(T factor) {
        auto mul = [factor](auto& v) {
            for (T& x : v) x *= factor;
        };
        mul(embedding.data);
        for (auto& gl : layers) {
            mul(gl.wq.data);
            mul(gl.wk.data);
            mul(gl.wv.data);
            mul(gl.wo.data);
            mul(gl.w1.data);
            mul(gl.w2.data);
            mul(gl.gain_attn);
            mul(gl.gain_ff);
            mul(gl.rel_bias.data);
        }
        mul(head_w.data);
        mul(head_b);
    }

    bool all_finite() const {
        bool ok = embedding.all_finite();
        for (const auto& gl : layers)
            ok = ok && gl.wq.all_finite() && gl.wk.all_finite() && gl.wv.all_finite() &&
                 gl.wo.all_finite() && gl.w1.all_finite() && gl.w2.all_finite() &&
                 gl.rel_bias.all_finite();
        return ok && head_w.all_finite();
    }
};

namespace detail {

// Tensors in weight-file declaration order, so weights, gradients and Adam
// moments zip coordinate by coordinate.
template <typename T>
std::vector<std::vector<T>*> tensor_list(ModelWeights<T>& w) {
    std::vector<std::vector<T>*> out;
    for_each_tensor(w, [&out](std::vector<T>& v) { out.push_back(&v); });
    return out;
}

template <typename T>
std::vector<std::vector<T>*> tensor_list(Gradients<T>& g, const ModelWeights<T>& w) {
    std::vector<std::vector<T>*> out;
    out.push_back(&g.embedding.data);
    for (size_t l = 0; l < g.layers.size(); ++l) {
        auto& gl = g.layers[l];
        out.push_back(&gl.wq.data);
        out.push_back(&gl.wk.data);
        out.push_back(&gl.wv.data);
        out.push_back(&gl.wo.data);
        out.push_back(&gl.w1.data);
        out.push_back(&gl.w2.data);
        out.push_back(&gl.gain_attn);
        out.push_back(&gl.gain_ff);
        if (w.layers[l].rel_bias.rows) out.push_back(&gl.rel_bias.data);
    }
    if (w.head.n_labels()) {
        out.push_back(&g.head_w.data);
        out.push_back(&g.head_b);
    }
    return out;
}

}  // namespace detail

template <typename T>
struct AdamState {
    Gradients<T> m;
    Gradients<T> v;
    uint64_t t = 0;

    static AdamState zeros_like(const ModelWeights<T>& w) {
        return AdamState{Gradients<T>::zeros_like(w), Gradients<T>::zeros_like(w), 0};
    }
};

// Standard Adam with bias correction. Refreshes the weight fingerprint,
// since the weights mutate.
template <typename T>
void adam_step(ModelWeights<T>& weights, const Gradients<T>& grads, AdamState<T>& state,
               double lr = 1e-3, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8) {
    state.t += 1;
    auto ws = detail::tensor_list(weights);
    auto gs = detail::tensor_list(const_cast<Gradients<T>&>(grads), weights);
    auto ms = detail::tensor_list(state.m, weights);
    auto vs = detail::tensor_list(state.v, weights);
    if (ws.size() != gs.size() || ws.size() != ms.size())
        throw ShapeError("adam_step: gradient/state layout does not mirror the weights");
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(state.t));
    for (size_t tix = 0; tix < ws.size(); ++tix) {
        std::vector<T>& w = *ws[tix];
        const std::vector<T>& g = *gs[tix];
        std::vector<T>& m = *ms[tix];
        std::vector<T>& v = *vs[tix];
        if (w.size() != g.size())
            throw ShapeError("adam_step: gradient tensor shape mismatch");
        for (size_t i = 0; i < w.size(); ++i) {
            const double gi = static_cast<double>(g[i]);
            const double mi = beta1 * static_cast<double>(m[i]) + (1.0 - beta1) * gi;
            const double vi = beta2 * static_cast<double>(v[i]) + (1.0 - beta2) * gi * gi;
            m[i] = static_cast<T>(mi);
            v[i] = static_cast<T>(vi);
            w[i] -= static_cast<T>(lr * (mi / bc1) / (std::sqrt(vi / bc2) + eps));
        }
    }
    weights.refresh_fingerprint();
}

// ---------------------------------------------------------------------------
// Forward with trace, loss, backward
// ---------------------------------------------------------------------------

template <typename T>
struct PhaseTrace {
    AttentionMask mask;
    std::vector<int64_t> positions;
    std::vector<LayerTrace<T>> layers;
};

template <typename T>
struct ForwardTrace {
    std::vector<PhaseTrace<T>> parallel;  // one per segment
    PhaseTrace<T> joint;
    Matrix<T> encoded;      // m x d_model
    std::vector<T> pooled;  // d_model
    std::vector<T> probs;   // n_labels
    size_t label_index = 0;
    T loss = T(0);
};

namespace detail {

template <typename T>
size_t resolve_label(const SegmentedExample& ex, const std::vector<std::string>& labels,
                     const ModelWeights<T>& weights) {
    if (weights.head.n_labels() != labels.size())
        throw ConfigError("label set size does not match the classification head");
    if (!ex.label) throw InputError("example has no label");
    for (size_t i = 0; i < labels.size(); ++i)
        if (labels[i] == *ex.label) return i;
    throw InputError("unknown label: " + *ex.label);
}

}  // namespace detail

// Softmax cross-entropy on classify(lait_encode(...)), via the
// separate-then-concatenate route, recording activations for backward.
template <typename T>
void forward_traced(const ModelWeights<T>& weights, const SegmentedExample& ex,
                    size_t label_index, const ModelConfig& cfg, ForwardTrace<T>& tr) {
    detail::check_runnable(weights, cfg);
    ex.validate();
    const size_t m = ex.total_tokens();

    tr.parallel.assign(ex.segments.size(), PhaseTrace<T>{});
    Matrix<T> concat(m, cfg.d_model);
    size_t row = 0;
    for (size_t s = 0; s < ex.segments.size(); ++s) {
        const auto& seg = ex.segments[s];
        PhaseTrace<T>& phase = tr.parallel[s];
        phase.positions = iota_positions(seg.size());
        phase.mask = AttentionMask::full_mask(seg.size());
        Matrix<T> x = embed(seg, phase.positions, weights, cfg);
        Matrix<T> rep =
            run_layers(x, phase.mask, phase.positions, weights, 0, cfg.parallel, cfg, nullptr,
                       &phase.layers);
        std::copy(rep.data.begin(), rep.data.end(), concat.data.begin() + row * cfg.d_model);
        row += rep.rows;
    }

    tr.joint.positions = iota_positions(m);
    tr.joint.mask = AttentionMask::full_mask(m);
    tr.joint.layers.clear();
    tr.encoded = run_layers(concat, tr.joint.mask, tr.joint.positions, weights, cfg.parallel,
                            cfg.layers, cfg, nullptr, &tr.joint.layers);

    tr.pooled.assign(cfg.d_model, T(0));
    for (size_t i = 0; i < m; ++i) {
        const T* r = tr.encoded.row(i);
        for (size_t c = 0; c < cfg.d_model; ++c) tr.pooled[c] += r[c];
    }
    for (T& v : tr.pooled) v /= static_cast<T>(m);

    const size_t k = weights.head.n_labels();
    std::vector<T> logits(k);
    for (size_t j = 0; j < k; ++j) {
        T acc = weights.head.b[j];
        for (size_t c = 0; c < cfg.d_model; ++c) acc += tr.pooled[c] * weights.head.w(c, j);
        logits[j] = acc;
    }
    T mx = logits[0];
    for (T v : logits) mx = std::max(mx, v);
    T sum = T(0);
    tr.probs.assign(k, T(0));
    for (size_t j = 0; j < k; ++j) {
        tr.probs[j] = std::exp(logits[j] - mx);
        sum += tr.probs[j];
    }
    for (T& p : tr.probs) p /= sum;
    tr.label_index = label_index;
    tr.loss = -std::log(tr.probs[label_index]);
}

namespace detail {

// d(rms_norm(x, gain)) pushed back to x (accumulated into dx) and gain.
template <typename T>
void rms_backward(const Matrix<T>& x, const std::vector<T>& gain, const Matrix<T>& dout,
                  Matrix<T>& dx, std::vector<T>& dgain) {
    const T eps = T(1e-6);
    const size_t d = x.cols;
    for (size_t i = 0; i < x.rows; ++i) {
        const T* xr = x.row(i);
        const T* dr = dout.row(i);
        T* dxr = dx.row(i);
        T ms = T(0);
        for (size_t j = 0; j < d; ++j) ms += xr[j] * xr[j];
        ms /= static_cast<T>(d);
        const T inv = T(1) / std::sqrt(ms + eps);
        T dot = T(0);  // sum_j dout_j * gain_j * x_j
        for (size_t j = 0; j < d; ++j) dot += dr[j] * gain[j] * xr[j];
        const T coef = dot * inv * inv * inv / static_cast<T>(d);
        for (size_t j = 0; j < d; ++j) {
            dxr[j] += dr[j] * gain[j] * inv - xr[j] * coef;
            dgain[j] += dr[j] * xr[j] * inv;
        }
    }
}

template <typename T>
void attention_backward(const LayerTrace<T>& t, const AttentionMask& mask,
                        const std::vector<int64_t>& positions, const LayerWeights<T>& lw,
                        const ModelConfig& cfg, const Matrix<T>& da, Matrix<T>& du,
                        LayerGrads<T>& g) {
    const size_t m = da.rows;
    Matrix<T> docat = matmul_abt(da, lw.wo);
    accumulate_atb(g.wo, t.ocat, da);

    const bool use_bias = cfg.pos_scheme == PosScheme::relative_bucket;
    int64_t min_off = 0;
    std::vector<uint32_t> buckets;
    if (use_bias) buckets = bucket_lookup(positions, positions, cfg, min_off);

    const T inv_sqrt_dh = T(1) / std::sqrt(static_cast<T>(cfg.d_head));
    Matrix<T> dq(m, cfg.d_model), dk(m, cfg.d_model), dv(m, cfg.d_model);
    std::vector<T> dw(m), ds(m);

    for (uint32_t h = 0; h < cfg.n_heads; ++h) {
        const size_t off = static_cast<size_t>(h) * cfg.d_head;
        const Matrix<T>& w = t.attw[h];
        for (size_t i = 0; i < m; ++i) {
            const auto range = mask.row_range(i);
            const T* doi = docat.row(i) + off;
            T wd_sum = T(0);
            for (size_t j = range.begin; j < range.end; ++j) {
                const T* vj = t.v.row(j) + off;
                T acc = T(0);
                for (uint32_t c = 0; c < cfg.d_head; ++c) acc += doi[c] * vj[c];
                dw[j] = acc;
                wd_sum += w(i, j) * acc;
                T* dvj = dv.row(j) + off;
                const T wij = w(i, j);
                for (uint32_t c = 0; c < cfg.d_head; ++c) dvj[c] += wij * doi[c];
            }
            T* dqi = dq.row(i) + off;
            const T* qi = t.q.row(i) + off;
            for (size_t j = range.begin; j < range.end; ++j) {
                const T dsij = w(i, j) * (dw[j] - wd_sum);
                ds[j] = dsij;
                const T* kj = t.k.row(j) + off;
                T* dkj = dk.row(j) + off;
                const T scaled = dsij * inv_sqrt_dh;
                for (uint32_t c = 0; c < cfg.d_head; ++c) {
                    dqi[c] += scaled * kj[c];
                    dkj[c] += scaled * qi[c];
                }
                if (use_bias)
                    g.rel_bias(
                        buckets[static_cast<size_t>(positions[j] - positions[i] - min_off)], h) +=
                        dsij;
            }
        }
    }

    accumulate_atb(g.wq, t.u, dq);
    accumulate_atb(g.wk, t.u, dk);
    accumulate_atb(g.wv, t.u, dv);
    du = matmul_abt(dq, lw.wq);
    Matrix<T> dk_u = matmul_abt(dk, lw.wk);
    Matrix<T> dv_u = matmul_abt(dv, lw.wv);
    for (size_t i = 0; i < du.data.size(); ++i) du.data[i] += dk_u.data[i] + dv_u.data[i];
}

// Returns d(loss)/d(layer input) and accumulates parameter gradients.
template <typename T>
Matrix<T> encoder_layer_backward(const LayerTrace<T>& t, const AttentionMask& mask,
                                 const std::vector<int64_t>& positions, const LayerWeights<T>& lw,
                                 const ModelConfig& cfg, const Matrix<T>& dz, LayerGrads<T>& g) {
    // z = y + relu(vn w1) w2, vn = rms(y)
    Matrix<T> r = relu(t.h1);
    accumulate_atb(g.w2, r, dz);
    Matrix<T> dh1 = matmul_abt(dz, lw.w2);
    for (size_t i = 0; i < dh1.data.size(); ++i)
        if (t.h1.data[i] <= T(0)) dh1.data[i] = T(0);
    accumulate_atb(g.w1, t.vn, dh1);
    Matrix<T> dvn = matmul_abt(dh1, lw.w1);

    Matrix<T> dy = dz;  // residual branch
    rms_backward(t.y, lw.gain_ff, dvn, dy, g.gain_ff);

    // y = x + attention(rms(x))
    Matrix<T> dx = dy;  // residual branch
    Matrix<T> du;
    attention_backward(t, mask, positions, lw, cfg, dy, du, g);
    rms_backward(t.x_in, lw.gain_attn, du, dx, g.gain_attn);
    return dx;
}

}  // namespace detail

// Cross-entropy loss and full reverse-mode gradients for one example,
// accumulated into `grads` (callers batch by summing, then scale).
template <typename T>
T accumulate_loss_and_grads(const ModelWeights<T>& weights, const SegmentedExample& ex,
                            const std::vector<std::string>& labels, const ModelConfig& cfg,
                            Gradients<T>& grads) {
    const size_t target = detail::resolve_label(ex, labels, weights);
    ForwardTrace<T> tr;
    forward_traced(weights, ex, target, cfg, tr);

    const size_t m = ex.total_tokens();
    const size_t k = weights.head.n_labels();

    std::vector<T> dlogits = tr.probs;
    dlogits[target] -= T(1);
    for (size_t j = 0; j < k; ++j) {
        grads.head_b[j] += dlogits[j];
        for (size_t c = 0; c < cfg.d_model; ++c)
            grads.head_w(c, j) += tr.pooled[c] * dlogits[j];
    }
    std::vector<T> dpool(cfg.d_model, T(0));
    for (size_t c = 0; c < cfg.d_model; ++c) {
        T acc = T(0);
        for (size_t j = 0; j < k; ++j) acc += weights.head.w(c, j) * dlogits[j];
        dpool[c] = acc / static_cast<T>(m);
    }
    Matrix<T> dz(m, cfg.d_model);
    for (size_t i = 0; i < m; ++i)
        std::copy(dpool.begin(), dpool.end(), dz.row(i));

    for (size_t l = tr.joint.layers.size(); l-- > 0;)
        dz = detail::encoder_layer_backward(tr.joint.layers[l], tr.joint.mask, tr.joint.positions,
                                            weights.layers[cfg.parallel + l], cfg, dz,
                                            grads.layers[cfg.parallel + l]);

    size_t row = 0;
    for (size_t s = 0; s < ex.segments.size(); ++s) {
        const auto& seg = ex.segments[s];
        Matrix<T> dseg(seg.size(), cfg.d_model);
        std::copy(dz.data.begin() + row * cfg.d_model,
                  dz.data.begin() + (row + seg.size()) * cfg.d_model, dseg.data.begin());
        row += seg.size();
        PhaseTrace<T>& phase = tr.parallel[s];
        for (size_t l = phase.layers.size(); l-- > 0;)
            dseg = detail::encoder_layer_backward(phase.layers[l], phase.mask, phase.positions,
                                                  weights.layers[l], cfg, dseg, grads.layers[l]);
        for (size_t i = 0; i < seg.size(); ++i) {
            T* erow = grads.embedding.row(seg[i]);
            const T* drow = dseg.row(i);
            for (size_t c = 0; c < cfg.d_model; ++c) erow[c] += drow[c];
        }
    }
    return tr.loss;
}

template <typename T>
std::pair<T, Gradients<T>> loss_and_grads(const ModelWeights<T>& weights,
                                          const SegmentedExample& ex,
                                          const std::vector<std::string>& labels,
                                          const ModelConfig& cfg) {
    Gradients<T> grads = Gradients<T>::zeros_like(weights);
    T loss = accumulate_loss_and_grads(weights, ex, labels, cfg, grads);
    return {loss, std::move(grads)};
}

template <typename T>
T loss_only(const ModelWeights<T>& weights, const SegmentedExample& ex,
            const std::vector<std::string>& labels, const ModelConfig& cfg) {
    const size_t target = detail::resolve_label(ex, labels, weights);
    ForwardTrace<T> tr;
    forward_traced(weights, ex, target, cfg, tr);
    return tr.loss;
}

// Central finite differences over a random subsample of coordinates, at
// least `min_coords` in total and at least one from every weight tensor.
// Returns the maximum relative error against the analytic gradients. Only
// meaningful in 64-bit precision.
inline constexpr double kFiniteDiffStep = 1e-5;

template <typename T>
double finite_diff_check(const ModelWeights<T>& weights, const SegmentedExample& ex,
                         const std::vector<std::string>& labels, const ModelConfig& cfg,
                         double h = kFiniteDiffStep, size_t min_coords = 200,
                         uint64_t sample_seed = 1234) {
    static_assert(std::is_floating_point_v<T>);
    auto [loss, analytic] = loss_and_grads(weights, ex, labels, cfg);
    (void)loss;

    ModelWeights<T> probe = weights;
    auto tensors = detail::tensor_list(probe);
    auto grads = detail::tensor_list(analytic, probe);

    Rng rng(sample_seed);
    const size_t per_tensor = (min_coords + tensors.size() - 1) / tensors.size();
    double max_rel = 0.0;
    for (size_t tix = 0; tix < tensors.size(); ++tix) {
        std::vector<T>& tensor = *tensors[tix];
        const std::vector<T>& grad = *grads[tix];
        const size_t samples = std::min(per_tensor, tensor.size());
        for (size_t s = 0; s < samples; ++s) {
            const size_t i = static_cast<size_t>(rng.below(tensor.size()));
            const T saved = tensor[i];
            tensor[i] = saved + static_cast<T>(h);
            const double up = static_cast<double>(loss_only(probe, ex, labels, cfg));
            tensor[i] = saved - static_cast<T>(h);
            const double down = static_cast<double>(loss_only(probe, ex, labels, cfg));
            tensor[i] = saved;
            const double fd = (up - down) / (2.0 * h);
            const double an = static_cast<double>(grad[i]);
            const double rel =
                std::abs(an - fd) / std::max({std::abs(an), std::abs(fd), 1e-8});
            max_rel = std::max(max_rel, rel);
        }
    }
    return max_rel;
}

// ---------------------------------------------------------------------------
// Training loop
// ---------------------------------------------------------------------------

struct TrainOptions {
    uint64_t steps = 3000;
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    uint32_t batch_size = 32;
    uint64_t eval_every = 250;
    uint64_t seed = 1;
};

struct TrainPoint {
    uint64_t step = 0;
    double loss = 0;           // mean training loss since the previous point
    double eval_accuracy = 0;  // accuracy over the full eval split
};

struct TrainMetrics {
    std::vector<TrainPoint> curve;
    double final_accuracy = 0;
    double best_accuracy = 0;
};

template <typename T>
double evaluate_accuracy(const ModelWeights<T>& weights, const std::vector<SegmentedExample>& data,
                         const std::vector<std::string>& labels, const ModelConfig& cfg) {
    if (data.empty()) return 0.0;
    size_t correct = 0;
    for (const auto& ex : data) {
        Matrix<T> reps = lait_encode(ex, weights, cfg);
        auto [pred, scores] = classify(reps, weights.head);
        (void)scores;
        if (ex.label && labels[pred] == *ex.label) correct++;
    }
    return static_cast<double>(correct) / static_cast<double>(data.size());
}

// Deterministic single-threaded loop: shuffled minibatches, Adam updates,
// periodic eval checkpoints. Aborts on a non-finite loss. When
// `final_weights` is given it receives the weights after the last step.
template <typename T>
TrainMetrics train(const SyntheticTaskSpec& spec, const ModelConfig& cfg,
                   const TrainOptions& opt, ModelWeights<T>* final_weights = nullptr) {
    cfg.validate();
    SyntheticData data = gen_synthetic(spec);
    ModelWeights<T> weights = init_weights<T>(cfg, opt.seed, data.labels.size());
    AdamState<T> adam = AdamState<T>::zeros_like(weights);
    Gradients<T> batch_grads = Gradients<T>::zeros_like(weights);

    Rng shuffle_rng(opt.seed ^ 0x5e11ed);
    std::vector<size_t> order(data.train.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    shuffle_rng.shuffle(order);
    size_t cursor = 0;

    TrainMetrics metrics;
    double loss_sum = 0;
    uint64_t loss_count = 0;

    for (uint64_t step = 1; step <= opt.steps; ++step) {
        batch_grads.zero();
        double batch_loss = 0;
        for (uint32_t b = 0; b < opt.batch_size; ++b) {
            if (cursor == order.size()) {
                shuffle_rng.shuffle(order);
                cursor = 0;
            }
            const SegmentedExample& ex = data.train[order[cursor++]];
            batch_loss += static_cast<double>(
                accumulate_loss_and_grads(weights, ex, data.labels, cfg, batch_grads));
        }
        batch_loss /= opt.batch_size;
        if (!std::isfinite(batch_loss))
            throw TrainingDiverged("non-finite loss at step " + std::to_string(step));
        batch_grads.scale(T(1) / static_cast<T>(opt.batch_size));
        adam_step(weights, batch_grads, adam, opt.lr, opt.beta1, opt.beta2, opt.eps);

        loss_sum += batch_loss;
        loss_count++;
        if (step % opt.eval_every == 0 || step == opt.steps) {
            TrainPoint point;
            point.step = step;
            point.loss = loss_sum / static_cast<double>(loss_count);
            point.eval_accuracy = evaluate_accuracy(weights, data.eval, data.labels, cfg);
            metrics.curve.push_back(point);
            metrics.best_accuracy = std::max(metrics.best_accuracy, point.eval_accuracy);
            metrics.final_accuracy = point.eval_accuracy;
            loss_sum = 0;
            loss_count = 0;
        }
    }
    if (final_weights) *final_weights = std::move(weights);
    return metrics;
}

template <typename T>
TrainMetrics train(const SyntheticTaskSpec& spec, const ModelConfig& cfg, uint64_t steps,
                   double lr, uint64_t seed) {
    TrainOptions opt;
    opt.steps = steps;
    opt.lr = lr;
    opt.seed = seed;
    return train<T>(spec, cfg, opt);
}

}  // namespace lait
