#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "hitcast/binio.hpp"
#include "hitcast/errors.hpp"
#include "hitcast/rng.hpp"
#include "hitcast/tensor.hpp"

namespace hitcast {

// ---------------------------------------------------------------------------
// Layers and configuration

struct ConvLayer {
    std::size_t in_channels = 0, out_channels = 0;
    std::vector<double> w;  // [out][in][3][3]
    std::vector<double> b;  // [out]
};

struct DenseLayer {
    std::size_t in_width = 0, out_width = 0;
    std::vector<double> w;  // [out][in]
    std::vector<double> b;  // [out]
};

/// Architecture knobs. The four conv blocks are the model; smaller stacks are
/// for tests. Spatial input dims must survive one 2x pool per block.
struct NetConfig {
    std::vector<std::size_t> conv_filters{16, 32, 64, 128};
    std::size_t kernel = 3;  // only 3x3 is implemented
    std::size_t meta_dim = 14;
    std::vector<std::size_t> meta_hidden{32, 32};
    std::vector<std::size_t> head_hidden{128, 64};
    std::size_t input_mels = 128;
    std::size_t input_frames = 256;
};

inline void validate_net_config(const NetConfig& cfg) {
    if (cfg.kernel != 3) throw ConfigError("net: only 3x3 kernels are supported");
    if (cfg.conv_filters.empty()) throw ConfigError("net: need at least one conv block");
    for (std::size_t f : cfg.conv_filters)
        if (f == 0) throw ConfigError("net: conv filter counts must be positive");
    if (cfg.meta_dim == 0) throw ConfigError("net: meta_dim must be positive");
    for (std::size_t wdt : cfg.meta_hidden)
        if (wdt == 0) throw ConfigError("net: meta_hidden widths must be positive");
    for (std::size_t wdt : cfg.head_hidden)
        if (wdt == 0) throw ConfigError("net: head_hidden widths must be positive");
    const std::size_t div = std::size_t{1} << cfg.conv_filters.size();
    if (cfg.input_mels % div != 0 || cfg.input_mels / div == 0 ||
        cfg.input_frames % div != 0 || cfg.input_frames / div == 0)
        throw ConfigError("net: input dims must be positive multiples of 2^blocks");
}

inline std::size_t flatten_width(const NetConfig& cfg) {
    const std::size_t div = std::size_t{1} << cfg.conv_filters.size();
    return cfg.conv_filters.back() * (cfg.input_mels / div) * (cfg.input_frames / div);
}

inline std::size_t meta_out_width(const NetConfig& cfg) {
    return cfg.meta_hidden.empty() ? cfg.meta_dim : cfg.meta_hidden.back();
}

inline std::size_t fused_width(const NetConfig& cfg) {
    return flatten_width(cfg) + meta_out_width(cfg);
}

struct PopularityNet {
    NetConfig config;
    std::vector<ConvLayer> conv;
    std::vector<DenseLayer> meta;
    std::vector<DenseLayer> head;  // hidden widths, then the final 1-wide layer
};

/// Allocate a net of the right shapes, all parameters zero.
inline PopularityNet build_net(const NetConfig& cfg) {
    validate_net_config(cfg);
    PopularityNet net;
    net.config = cfg;
    std::size_t in_ch = 1;
    for (std::size_t f : cfg.conv_filters) {
        ConvLayer layer;
        layer.in_channels = in_ch;
        layer.out_channels = f;
        layer.w.assign(f * in_ch * 9, 0.0);
        layer.b.assign(f, 0.0);
        net.conv.push_back(std::move(layer));
        in_ch = f;
    }
    std::size_t wdt = cfg.meta_dim;
    for (std::size_t h : cfg.meta_hidden) {
        net.meta.push_back({wdt, h, std::vector<double>(h * wdt, 0.0), std::vector<double>(h, 0.0)});
        wdt = h;
    }
    wdt = fused_width(cfg);
    std::vector<std::size_t> head_widths = cfg.head_hidden;
    head_widths.push_back(1);
    for (std::size_t h : head_widths) {
        net.head.push_back({wdt, h, std::vector<double>(h * wdt, 0.0), std::vector<double>(h, 0.0)});
        wdt = h;
    }
    return net;
}

// ---------------------------------------------------------------------------
// Layer primitives

/// Zero-padded same convolution, cross-correlation orientation (no kernel
/// flip), stride 1.
inline Tensor conv2d_forward(const Tensor& input, const ConvLayer& layer) {
    require_rank3(input, "conv2d");
    if (input.shape[0] != layer.in_channels)
        throw ShapeError("conv2d: input has " + std::to_string(input.shape[0]) +
                         " channels, layer expects " + std::to_string(layer.in_channels));
    const std::size_t C = layer.in_channels, H = input.shape[1], W = input.shape[2];
    const std::size_t F = layer.out_channels;
    Tensor out({F, H, W});
    for (std::size_t f = 0; f < F; ++f) {
        for (std::size_t y = 0; y < H; ++y) {
            for (std::size_t x = 0; x < W; ++x) {
                double acc = layer.b[f];
                for (std::size_t c = 0; c < C; ++c) {
                    const std::size_t wbase = (f * C + c) * 9;
                    for (int ky = 0; ky < 3; ++ky) {
                        const int iy = static_cast<int>(y) + ky - 1;
                        if (iy < 0 || iy >= static_cast<int>(H)) continue;
                        for (int kx = 0; kx < 3; ++kx) {
                            const int ix = static_cast<int>(x) + kx - 1;
                            if (ix < 0 || ix >= static_cast<int>(W)) continue;
                            acc += layer.w[wbase + static_cast<std::size_t>(ky * 3 + kx)] *
                                   input.at3(c, static_cast<std::size_t>(iy),
                                             static_cast<std::size_t>(ix));
                        }
                    }
                }
                out.at3(f, y, x) = acc;
            }
        }
    }
    return out;
}

/// Gradients of a same convolution. dw/db are allocated (zeroed) on first use
/// and accumulated into otherwise; returns the gradient w.r.t. the input.
inline Tensor conv2d_backward(const Tensor& input, const ConvLayer& layer, const Tensor& dout,
                              std::vector<double>& dw, std::vector<double>& db) {
    const std::size_t C = layer.in_channels, H = input.shape[1], W = input.shape[2];
    const std::size_t F = layer.out_channels;
    if (dw.empty()) dw.assign(layer.w.size(), 0.0);
    if (db.empty()) db.assign(layer.b.size(), 0.0);
    Tensor din(input.shape);
    for (std::size_t f = 0; f < F; ++f) {
        for (std::size_t y = 0; y < H; ++y) {
            for (std::size_t x = 0; x < W; ++x) {
                const double g = dout.at3(f, y, x);
                if (g == 0.0) continue;
                db[f] += g;
                for (std::size_t c = 0; c < C; ++c) {
                    const std::size_t wbase = (f * C + c) * 9;
                    for (int ky = 0; ky < 3; ++ky) {
                        const int iy = static_cast<int>(y) + ky - 1;
                        if (iy < 0 || iy >= static_cast<int>(H)) continue;
                        for (int kx = 0; kx < 3; ++kx) {
                            const int ix = static_cast<int>(x) + kx - 1;
                            if (ix < 0 || ix >= static_cast<int>(W)) continue;
                            const std::size_t wi = wbase + static_cast<std::size_t>(ky * 3 + kx);
                            const std::size_t ii =
                                (c * H + static_cast<std::size_t>(iy)) * W +
                                static_cast<std::size_t>(ix);
                            dw[wi] += g * input.values[ii];
                            din.values[ii] += g * layer.w[wi];
                        }
                    }
                }
            }
        }
    }
    return din;
}

inline Tensor relu(const Tensor& t) {
    Tensor out = t;
    out.grad.clear();
    for (double& x : out.values) x = std::max(0.0, x);
    return out;
}

inline std::vector<double> relu_vec(const std::vector<double>& x) {
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = std::max(0.0, x[i]);
    return out;
}

struct PoolResult {
    Tensor out;
    std::vector<std::size_t> argmax;  // flat index into the pool input, per output cell
};

/// Non-overlapping 2x2 max pool, stride 2; a trailing odd row/column is
/// dropped. Records where each max came from.
inline PoolResult maxpool2(const Tensor& input) {
    require_rank3(input, "maxpool2");
    const std::size_t C = input.shape[0], H = input.shape[1], W = input.shape[2];
    if (H < 2 || W < 2) throw ShapeError("maxpool2: spatial dims must be >= 2");
    const std::size_t OH = H / 2, OW = W / 2;
    PoolResult res;
    res.out = Tensor({C, OH, OW});
    res.argmax.resize(C * OH * OW);
    for (std::size_t c = 0; c < C; ++c) {
        for (std::size_t oy = 0; oy < OH; ++oy) {
            for (std::size_t ox = 0; ox < OW; ++ox) {
                std::size_t best_i = (c * H + oy * 2) * W + ox * 2;
                double best = input.values[best_i];
                for (int dy = 0; dy < 2; ++dy) {
                    for (int dx = 0; dx < 2; ++dx) {
                        const std::size_t i =
                            (c * H + oy * 2 + static_cast<std::size_t>(dy)) * W + ox * 2 +
                            static_cast<std::size_t>(dx);
                        if (input.values[i] > best) {
                            best = input.values[i];
                            best_i = i;
                        }
                    }
                }
                res.out.at3(c, oy, ox) = best;
                res.argmax[(c * OH + oy) * OW + ox] = best_i;
            }
        }
    }
    return res;
}

inline Tensor maxpool2_backward(const std::vector<std::size_t>& input_shape,
                                const std::vector<std::size_t>& argmax, const Tensor& dout) {
    Tensor din(input_shape);
    for (std::size_t i = 0; i < argmax.size(); ++i) din.values[argmax[i]] += dout.values[i];
    return din;
}

inline std::vector<double> dense_forward(const std::vector<double>& x, const DenseLayer& layer) {
    if (x.size() != layer.in_width)
        throw ShapeError("dense: input width " + std::to_string(x.size()) + ", layer expects " +
                         std::to_string(layer.in_width));
    std::vector<double> y(layer.out_width);
    for (std::size_t o = 0; o < layer.out_width; ++o) {
        double acc = layer.b[o];
        const std::size_t base = o * layer.in_width;
        for (std::size_t i = 0; i < layer.in_width; ++i) acc += layer.w[base + i] * x[i];
        y[o] = acc;
    }
    return y;
}

inline std::vector<double> dense_backward(const std::vector<double>& x, const DenseLayer& layer,
                                          const std::vector<double>& dout,
                                          std::vector<double>& dw, std::vector<double>& db) {
    if (dw.empty()) dw.assign(layer.w.size(), 0.0);
    if (db.empty()) db.assign(layer.b.size(), 0.0);
    std::vector<double> dx(layer.in_width, 0.0);
    for (std::size_t o = 0; o < layer.out_width; ++o) {
        const double g = dout[o];
        db[o] += g;
        const std::size_t base = o * layer.in_width;
        for (std::size_t i = 0; i < layer.in_width; ++i) {
            dw[base + i] += g * x[i];
            dx[i] += g * layer.w[base + i];
        }
    }
    return dx;
}

/// Audio features first, metadata second.
inline std::vector<double> concat_features(const std::vector<double>& audio_vec,
                                           const std::vector<double>& meta_vec) {
    if (audio_vec.empty() || meta_vec.empty())
        throw InvalidInputError("concat_features: both inputs must be non-empty");
    std::vector<double> out;
    out.reserve(audio_vec.size() + meta_vec.size());
    out.insert(out.end(), audio_vec.begin(), audio_vec.end());
    out.insert(out.end(), meta_vec.begin(), meta_vec.end());
    return out;
}

// ---------------------------------------------------------------------------
// Whole-net forward and backward

/// Everything the backward pass needs: layer inputs, pre-activation outputs,
/// and pool routing.
struct ForwardTrace {
    bool valid = false;
    Tensor input;
    std::vector<Tensor> conv_pre;   // per block, conv output before ReLU
    std::vector<Tensor> conv_post;  // per block, after ReLU (pool input)
    std::vector<Tensor> pool_out;
    std::vector<std::vector<std::size_t>> pool_argmax;
    std::vector<double> meta_in;
    std::vector<std::vector<double>> meta_layer_in;   // actual input handed to each layer
    std::vector<std::vector<double>> meta_layer_out;  // raw (pre-ReLU) layer output
    std::vector<double> fused;
    std::vector<std::vector<double>> head_layer_in;
    std::vector<std::vector<double>> head_layer_out;
    double prediction = 0.0;
};

inline void check_forward_shapes(const PopularityNet& net, const Tensor& input,
                                 const std::vector<double>& meta) {
    require_rank3(input, "forward");
    if (input.shape[0] != 1 || input.shape[1] != net.config.input_mels ||
        input.shape[2] != net.config.input_frames)
        throw ShapeError("forward: input tensor does not match configured spectrogram dims");
    if (meta.size() != net.config.meta_dim)
        throw ShapeError("forward: metadata width " + std::to_string(meta.size()) +
                         ", config expects " + std::to_string(net.config.meta_dim));
}

inline ForwardTrace forward_traced(const PopularityNet& net, const Tensor& input,
                                   const std::vector<double>& meta) {
    check_forward_shapes(net, input, meta);
    ForwardTrace tr;
    tr.input = input;
    tr.meta_in = meta;

    const Tensor* cur = &tr.input;
    for (const auto& layer : net.conv) {
        tr.conv_pre.push_back(conv2d_forward(*cur, layer));
        tr.conv_post.push_back(relu(tr.conv_pre.back()));
        auto pooled = maxpool2(tr.conv_post.back());
        tr.pool_out.push_back(std::move(pooled.out));
        tr.pool_argmax.push_back(std::move(pooled.argmax));
        cur = &tr.pool_out.back();
    }
    std::vector<double> flat = tr.pool_out.back().values;

    std::vector<double> m = meta;
    for (std::size_t j = 0; j < net.meta.size(); ++j) {
        if (j > 0) m = relu_vec(m);
        tr.meta_layer_in.push_back(m);
        m = dense_forward(m, net.meta[j]);
        tr.meta_layer_out.push_back(m);
    }

    tr.fused = concat_features(flat, m);
    std::vector<double> h = tr.fused;
    for (std::size_t k = 0; k < net.head.size(); ++k) {
        if (k > 0) h = relu_vec(h);
        tr.head_layer_in.push_back(h);
        h = dense_forward(h, net.head[k]);
        tr.head_layer_out.push_back(h);
    }
    tr.prediction = h[0];
    tr.valid = true;
    return tr;
}

inline double forward(const PopularityNet& net, const Tensor& input,
                      const std::vector<double>& meta) {
    return forward_traced(net, input, meta).prediction;
}

/// Per-parameter gradient buffers, shaped like the net's layers.
struct NetGradients {
    std::vector<std::vector<double>> conv_w, conv_b;
    std::vector<std::vector<double>> meta_w, meta_b;
    std::vector<std::vector<double>> head_w, head_b;
    bool empty() const { return conv_w.empty() && meta_w.empty() && head_w.empty(); }
};

inline NetGradients zero_gradients(const PopularityNet& net) {
    NetGradients g;
    for (const auto& l : net.conv) {
        g.conv_w.emplace_back(l.w.size(), 0.0);
        g.conv_b.emplace_back(l.b.size(), 0.0);
    }
    for (const auto& l : net.meta) {
        g.meta_w.emplace_back(l.w.size(), 0.0);
        g.meta_b.emplace_back(l.b.size(), 0.0);
    }
    for (const auto& l : net.head) {
        g.head_w.emplace_back(l.w.size(), 0.0);
        g.head_b.emplace_back(l.b.size(), 0.0);
    }
    return g;
}

/// Gradients of the loss w.r.t. the net inputs; useful for checking that
/// fused-feature gradients split back onto their sources.
struct InputGradients {
    Tensor input;
    std::vector<double> meta;
};

/// Chain rule from d(loss)/d(prediction) back through every layer,
/// accumulating parameter gradients into acc.
inline void backward_into(const PopularityNet& net, const ForwardTrace& tr, double upstream,
                          NetGradients& acc, InputGradients* input_grads = nullptr) {
    if (!tr.valid) throw StateError("backward: no forward trace for this sample");
    if (acc.empty()) acc = zero_gradients(net);

    std::vector<double> d{upstream};
    for (std::size_t k = net.head.size(); k-- > 0;) {
        d = dense_backward(tr.head_layer_in[k], net.head[k], d, acc.head_w[k], acc.head_b[k]);
        if (k > 0) {
            const auto& pre = tr.head_layer_out[k - 1];
            for (std::size_t i = 0; i < d.size(); ++i)
                if (pre[i] <= 0.0) d[i] = 0.0;
        }
    }

    const std::size_t flat_len = tr.pool_out.back().numel();
    std::vector<double> dmeta(d.begin() + static_cast<std::ptrdiff_t>(flat_len), d.end());
    for (std::size_t j = net.meta.size(); j-- > 0;) {
        dmeta = dense_backward(tr.meta_layer_in[j], net.meta[j], dmeta, acc.meta_w[j],
                               acc.meta_b[j]);
        if (j > 0) {
            const auto& pre = tr.meta_layer_out[j - 1];
            for (std::size_t i = 0; i < dmeta.size(); ++i)
                if (pre[i] <= 0.0) dmeta[i] = 0.0;
        }
    }

    Tensor dcur(tr.pool_out.back().shape);
    std::copy(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(flat_len),
              dcur.values.begin());
    for (std::size_t i = net.conv.size(); i-- > 0;) {
        Tensor dpost = maxpool2_backward(tr.conv_post[i].shape, tr.pool_argmax[i], dcur);
        for (std::size_t k = 0; k < dpost.values.size(); ++k)
            if (tr.conv_pre[i].values[k] <= 0.0) dpost.values[k] = 0.0;
        const Tensor& layer_in = i == 0 ? tr.input : tr.pool_out[i - 1];
        dcur = conv2d_backward(layer_in, net.conv[i], dpost, acc.conv_w[i], acc.conv_b[i]);
    }

    if (input_grads) {
        input_grads->input = std::move(dcur);
        input_grads->meta = std::move(dmeta);
    }
}

inline NetGradients backward(const PopularityNet& net, const ForwardTrace& tr, double upstream,
                             InputGradients* input_grads = nullptr) {
    NetGradients acc;
    backward_into(net, tr, upstream, acc, input_grads);
    return acc;
}

// ---------------------------------------------------------------------------
// Loss

inline double mse_loss(double pred, double target) {
    const double e = pred - target;
    return e * e;
}

inline double mse_loss(const std::vector<double>& preds, const std::vector<double>& targets) {
    if (preds.size() != targets.size() || preds.empty())
        throw InvalidInputError("mse_loss: need equal-length non-empty prediction/target lists");
    double acc = 0.0;
    for (std::size_t i = 0; i < preds.size(); ++i) acc += mse_loss(preds[i], targets[i]);
    return acc / static_cast<double>(preds.size());
}

/// One training example: scaled spectrogram tensor, scaled metadata, and the
/// target in normalized [0,1] units.
struct TrainSample {
    Tensor input;
    std::vector<double> meta;
    double target = 0.0;
};

struct BatchGradients {
    double loss = 0.0;
    NetGradients grads;
};

/// Mean-MSE forward/backward over a batch; gradients are of the mean loss.
inline BatchGradients backward_batch(const PopularityNet& net,
                                     const std::vector<const TrainSample*>& batch) {
    if (batch.empty()) throw InvalidInputError("backward_batch: empty batch");
    BatchGradients out;
    out.grads = zero_gradients(net);
    const double n = static_cast<double>(batch.size());
    for (const TrainSample* s : batch) {
        ForwardTrace tr = forward_traced(net, s->input, s->meta);
        out.loss += mse_loss(tr.prediction, s->target) / n;
        backward_into(net, tr, 2.0 * (tr.prediction - s->target) / n, out.grads);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Parameter traversal, optimizer, initialization

inline std::vector<std::pair<std::string, std::vector<double>*>> parameter_views(
    PopularityNet& net) {
    std::vector<std::pair<std::string, std::vector<double>*>> views;
    for (std::size_t i = 0; i < net.conv.size(); ++i) {
        views.emplace_back("conv" + std::to_string(i) + ".w", &net.conv[i].w);
        views.emplace_back("conv" + std::to_string(i) + ".b", &net.conv[i].b);
    }
    for (std::size_t i = 0; i < net.meta.size(); ++i) {
        views.emplace_back("meta" + std::to_string(i) + ".w", &net.meta[i].w);
        views.emplace_back("meta" + std::to_string(i) + ".b", &net.meta[i].b);
    }
    for (std::size_t i = 0; i < net.head.size(); ++i) {
        views.emplace_back("head" + std::to_string(i) + ".w", &net.head[i].w);
        views.emplace_back("head" + std::to_string(i) + ".b", &net.head[i].b);
    }
    return views;
}

inline std::vector<const std::vector<double>*> gradient_views(const NetGradients& g) {
    std::vector<const std::vector<double>*> views;
    for (std::size_t i = 0; i < g.conv_w.size(); ++i) {
        views.push_back(&g.conv_w[i]);
        views.push_back(&g.conv_b[i]);
    }
    for (std::size_t i = 0; i < g.meta_w.size(); ++i) {
        views.push_back(&g.meta_w[i]);
        views.push_back(&g.meta_b[i]);
    }
    for (std::size_t i = 0; i < g.head_w.size(); ++i) {
        views.push_back(&g.head_w[i]);
        views.push_back(&g.head_b[i]);
    }
    return views;
}

/// First and second moment estimates plus the step counter, one slot per
/// parameter block. Sized lazily on the first step.
struct AdamState {
    std::size_t step = 0;
    std::vector<std::vector<double>> m, v;
};

/// Bias-corrected Adam update, beta1=0.9, beta2=0.999, eps=1e-8.
inline void optimizer_step(PopularityNet& net, const NetGradients& grads, AdamState& state,
                           double lr) {
    constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    auto params = parameter_views(net);
    auto gviews = gradient_views(grads);
    if (gviews.size() != params.size())
        throw StateError("optimizer_step: gradients missing or shaped for a different net");
    for (std::size_t i = 0; i < params.size(); ++i)
        if (gviews[i]->size() != params[i].second->size())
            throw StateError("optimizer_step: gradient block " + params[i].first +
                             " has the wrong size");
    if (state.m.empty()) {
        for (const auto& [name, p] : params) {
            (void)name;
            state.m.emplace_back(p->size(), 0.0);
            state.v.emplace_back(p->size(), 0.0);
        }
    } else if (state.m.size() != params.size()) {
        throw StateError("optimizer_step: state was built for a different net");
    }

    ++state.step;
    const double c1 = 1.0 - std::pow(beta1, static_cast<double>(state.step));
    const double c2 = 1.0 - std::pow(beta2, static_cast<double>(state.step));
    for (std::size_t i = 0; i < params.size(); ++i) {
        auto& p = *params[i].second;
        const auto& g = *gviews[i];
        auto& m = state.m[i];
        auto& v = state.v[i];
        for (std::size_t k = 0; k < p.size(); ++k) {
            m[k] = beta1 * m[k] + (1.0 - beta1) * g[k];
            v[k] = beta2 * v[k] + (1.0 - beta2) * g[k] * g[k];
            p[k] -= lr * (m[k] / c1) / (std::sqrt(v[k] / c2) + eps);
        }
    }
}

/// He-uniform weights (limit sqrt(6/fan_in)), zero biases, one RNG stream
/// drawn in declaration order so a seed pins every parameter.
inline PopularityNet init_parameters(const NetConfig& cfg, std::uint64_t seed) {
    PopularityNet net = build_net(cfg);
    Rng rng(mix_seed(seed, 0x696e6974));  // dedicated init stream
    auto fill = [&rng](std::vector<double>& w, std::size_t fan_in) {
        const double limit = std::sqrt(6.0 / static_cast<double>(fan_in));
        for (double& x : w) x = uniform_range(rng, -limit, limit);
    };
    for (auto& layer : net.conv) fill(layer.w, layer.in_channels * 9);
    for (auto& layer : net.meta) fill(layer.w, layer.in_width);
    for (auto& layer : net.head) fill(layer.w, layer.in_width);
    return net;
}

// ---------------------------------------------------------------------------
// Checkpoints: "HCKP" magic, version, config echo, seed, epoch, then named
// float64 parameter blocks in declaration order. Byte-exact round trip.

inline constexpr std::uint32_t kCheckpointVersion = 1;

namespace detail {

inline void write_size_list(std::ostream& os, const std::vector<std::size_t>& xs) {
    write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(xs.size()));
    for (std::size_t x : xs) write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(x));
}

inline std::vector<std::size_t> read_size_list(std::istream& is) {
    const auto n = read_pod<std::uint32_t>(is);
    std::vector<std::size_t> xs(n);
    for (auto& x : xs) x = read_pod<std::uint32_t>(is);
    return xs;
}

}  // namespace detail

inline void save_checkpoint(const std::filesystem::path& path, const PopularityNet& net,
                            std::uint64_t seed, std::uint32_t epoch) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot write " + path.string());
    os.write("HCKP", 4);
    detail::write_pod<std::uint32_t>(os, kCheckpointVersion);
    detail::write_size_list(os, net.config.conv_filters);
    detail::write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(net.config.kernel));
    detail::write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(net.config.meta_dim));
    detail::write_size_list(os, net.config.meta_hidden);
    detail::write_size_list(os, net.config.head_hidden);
    detail::write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(net.config.input_mels));
    detail::write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(net.config.input_frames));
    detail::write_pod<std::uint64_t>(os, seed);
    detail::write_pod<std::uint32_t>(os, epoch);

    auto views = parameter_views(const_cast<PopularityNet&>(net));
    detail::write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(views.size()));
    for (const auto& [name, p] : views) {
        detail::write_pod<std::uint16_t>(os, static_cast<std::uint16_t>(name.size()));
        os.write(name.data(), static_cast<std::streamsize>(name.size()));
        detail::write_pod<std::uint64_t>(os, p->size());
        for (double x : *p) detail::write_pod<double>(os, x);
    }
    if (!os) throw IoError("failed writing " + path.string());
}

struct Checkpoint {
    PopularityNet net;
    std::uint64_t seed = 0;
    std::uint32_t epoch = 0;
};

inline Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open " + path.string());
    char magic[4];
    is.read(magic, 4);
    if (!is || std::string(magic, 4) != "HCKP") throw FormatError("not a checkpoint file");
    const auto version = detail::read_pod<std::uint32_t>(is);
    if (version != kCheckpointVersion) throw VersionError("unsupported checkpoint version");

    NetConfig cfg;
    cfg.conv_filters = detail::read_size_list(is);
    cfg.kernel = detail::read_pod<std::uint32_t>(is);
    cfg.meta_dim = detail::read_pod<std::uint32_t>(is);
    cfg.meta_hidden = detail::read_size_list(is);
    cfg.head_hidden = detail::read_size_list(is);
    cfg.input_mels = detail::read_pod<std::uint32_t>(is);
    cfg.input_frames = detail::read_pod<std::uint32_t>(is);

    Checkpoint ck;
    ck.seed = detail::read_pod<std::uint64_t>(is);
    ck.epoch = detail::read_pod<std::uint32_t>(is);
    ck.net = build_net(cfg);

    auto views = parameter_views(ck.net);
    const auto n_blocks = detail::read_pod<std::uint32_t>(is);
    if (n_blocks != views.size()) throw FormatError("checkpoint block count mismatch");
    for (auto& [name, p] : views) {
        const auto name_len = detail::read_pod<std::uint16_t>(is);
        std::string got(name_len, '\0');
        is.read(got.data(), name_len);
        if (!is || got != name) throw FormatError("checkpoint block order mismatch at " + name);
        const auto count = detail::read_pod<std::uint64_t>(is);
        if (count != p->size()) throw FormatError("checkpoint block size mismatch at " + name);
        for (double& x : *p) x = detail::read_pod<double>(is);
    }
    return ck;
}

}  // namespace hitcast
