#ifndef HANTEXT_MODEL_HPP
#define HANTEXT_MODEL_HPP

#include <algorithm>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "tensor.hpp"
#include "textprep.hpp"

namespace hantext {

enum class Activation { Relu, Tanh };

inline const char* activation_name(Activation a) {
    return a == Activation::Relu ? "relu" : "tanh";
}
inline Activation activation_from_name(const std::string& s) {
    if (s == "relu") return Activation::Relu;
    if (s == "tanh") return Activation::Tanh;
    throw std::invalid_argument("unknown activation: " + s);
}

struct ChannelSpec {
    Channel channel = Channel::Character;
    std::size_t vocab_size = 0;  // including PAD/UNK
    std::size_t embed_dim = 300;
    std::vector<std::size_t> window_sizes = {2, 3, 4};  // kept sorted ascending
    std::size_t feature_maps = 256;

    void validate() const {
        if (embed_dim < 1) throw std::invalid_argument("ChannelSpec: embed_dim must be >= 1");
        if (vocab_size < 2) throw std::invalid_argument("ChannelSpec: vocab_size must include PAD/UNK");
        if (window_sizes.empty()) throw std::invalid_argument("ChannelSpec: empty window set");
        for (std::size_t w : window_sizes)
            if (w < 1) throw std::invalid_argument("ChannelSpec: window size must be >= 1");
        if (feature_maps < 1) throw std::invalid_argument("ChannelSpec: feature_maps must be >= 1");
    }
    std::size_t pooled_width() const { return window_sizes.size() * feature_maps; }
    std::size_t max_window() const { return *std::max_element(window_sizes.begin(), window_sizes.end()); }
};

struct ConvFilter {
    std::size_t window = 0;
    Matrix weights;  // feature_maps x (window * embed_dim)
    Matrix bias;     // 1 x feature_maps
};

struct ChannelParams {
    ChannelSpec spec;
    Matrix embedding;  // vocab_size x embed_dim, PAD row all-zero
    std::vector<ConvFilter> filters;  // one per window size, ascending
};

struct ModelParams {
    std::vector<ChannelParams> channels;  // fixed order: Pinyin, Character, Word
    std::size_t hidden_dim = 0;           // 0 = direct concat -> classes projection
    Matrix hidden_w, hidden_b;            // used when hidden_dim > 0
    Matrix out_w;                         // (concat or hidden) x n_classes
    Matrix out_b;                         // 1 x n_classes
    std::size_t n_classes = 0;
    Activation activation = Activation::Relu;

    std::size_t concat_width() const {
        std::size_t w = 0;
        for (const auto& ch : channels) w += ch.spec.pooled_width();
        return w;
    }

    static ModelParams init(const std::vector<ChannelSpec>& specs, std::size_t n_classes,
                            Rng& rng, std::size_t hidden_dim = 0,
                            Activation activation = Activation::Relu,
                            double init_lo = -0.05, double init_hi = 0.05) {
        if (specs.empty()) throw std::invalid_argument("ModelParams: at least one channel required");
        if (n_classes < 2) throw std::invalid_argument("ModelParams: need >= 2 classes");
        ModelParams p;
        p.n_classes = n_classes;
        p.hidden_dim = hidden_dim;
        p.activation = activation;
        std::vector<ChannelSpec> ordered = specs;
        std::sort(ordered.begin(), ordered.end(), [](const ChannelSpec& a, const ChannelSpec& b) {
            return static_cast<int>(a.channel) < static_cast<int>(b.channel);
        });
        for (const auto& spec : ordered) {
            spec.validate();
            ChannelParams ch;
            ch.spec = spec;
            ch.spec.window_sizes = spec.window_sizes;
            std::sort(ch.spec.window_sizes.begin(), ch.spec.window_sizes.end());
            ch.embedding = uniform_init(spec.vocab_size, spec.embed_dim, init_lo, init_hi, rng);
            for (std::size_t c = 0; c < spec.embed_dim; ++c) ch.embedding(kPadId, c) = 0.0;
            for (std::size_t w : ch.spec.window_sizes) {
                ConvFilter f;
                f.window = w;
                f.weights = uniform_init(spec.feature_maps, w * spec.embed_dim, init_lo, init_hi, rng);
                f.bias = Matrix(1, spec.feature_maps);
                ch.filters.push_back(std::move(f));
            }
            p.channels.push_back(std::move(ch));
        }
        const std::size_t concat = p.concat_width();
        if (hidden_dim > 0) {
            p.hidden_w = uniform_init(concat, hidden_dim, init_lo, init_hi, rng);
            p.hidden_b = Matrix(1, hidden_dim);
            p.out_w = uniform_init(hidden_dim, n_classes, init_lo, init_hi, rng);
        } else {
            p.out_w = uniform_init(concat, n_classes, init_lo, init_hi, rng);
        }
        p.out_b = Matrix(1, n_classes);
        return p;
    }

    static ModelParams zeros_like(const ModelParams& other) {
        ModelParams p = other;
        for (auto& ch : p.channels) {
            ch.embedding.fill(0.0);
            for (auto& f : ch.filters) { f.weights.fill(0.0); f.bias.fill(0.0); }
        }
        p.hidden_w.fill(0.0);
        p.hidden_b.fill(0.0);
        p.out_w.fill(0.0);
        p.out_b.fill(0.0);
        return p;
    }

    // All learnable arrays in a fixed order; the order defines the checkpoint
    // layout and the optimizer state alignment.
    std::vector<Matrix*> param_list() {
        std::vector<Matrix*> out;
        for (auto& ch : channels) {
            out.push_back(&ch.embedding);
            for (auto& f : ch.filters) {
                out.push_back(&f.weights);
                out.push_back(&f.bias);
            }
        }
        if (hidden_dim > 0) {
            out.push_back(&hidden_w);
            out.push_back(&hidden_b);
        }
        out.push_back(&out_w);
        out.push_back(&out_b);
        return out;
    }
    std::vector<const Matrix*> param_list() const {
        auto mut = const_cast<ModelParams*>(this)->param_list();
        return {mut.begin(), mut.end()};
    }
};

struct ForwardTrace {
    struct ChannelTrace {
        std::vector<std::size_t> ids;   // after PAD extension to max window
        Matrix embedded;                // len x embed_dim
        struct WindowTrace {
            Matrix pre_activation;      // positions x maps
            std::vector<std::size_t> pool_argmax;  // per map
        };
        std::vector<WindowTrace> windows;
    };
    std::vector<ChannelTrace> channels;
    std::vector<double> concat;          // pooled, before dropout
    std::vector<double> dropout_mask;    // empty = no dropout
    std::vector<double> hidden_pre;      // hidden_dim > 0 only
    std::vector<double> hidden_act;
    std::vector<double> probs;
};

// --- layer primitives -------------------------------------------------------

inline Matrix embed(const std::vector<std::size_t>& ids, const Matrix& embedding) {
    Matrix out(ids.size(), embedding.cols());
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (ids[i] >= embedding.rows())
            throw std::out_of_range("embed: token id " + std::to_string(ids[i]) + " out of range");
        for (std::size_t c = 0; c < embedding.cols(); ++c)
            out(i, c) = embedding(ids[i], c);
    }
    return out;
}

// Valid-mode 1-D convolution over the sequence axis. Returns pre-activation;
// the caller applies the nonlinearity so backprop can see the pre-activation.
inline Matrix conv_1d(const Matrix& x, const ConvFilter& f) {
    const std::size_t d = x.cols();
    const std::size_t w = f.window;
    if (x.rows() < 1) throw std::invalid_argument("conv_1d: empty input");
    if (x.rows() < w) throw std::invalid_argument("conv_1d: sequence shorter than window");
    if (f.weights.cols() != w * d) throw std::invalid_argument("conv_1d: filter/input dim mismatch");
    const std::size_t positions = x.rows() - w + 1;
    const std::size_t maps = f.weights.rows();
    Matrix out(positions, maps);
    for (std::size_t p = 0; p < positions; ++p)
        for (std::size_t m = 0; m < maps; ++m) {
            double acc = f.bias(0, m);
            const double* wt = f.weights.data() + m * f.weights.cols();
            const double* xv = x.data() + p * d;
            for (std::size_t j = 0; j < w * d; ++j) acc += xv[j] * wt[j];
            out(p, m) = acc;
        }
    return out;
}

inline double apply_activation(double z, Activation a) {
    return a == Activation::Relu ? std::max(z, 0.0) : std::tanh(z);
}
inline double activation_grad(double z, Activation a) {
    if (a == Activation::Relu) return z > 0.0 ? 1.0 : 0.0;
    const double t = std::tanh(z);
    return 1.0 - t * t;
}

// Per-feature-map maximum over positions, first occurrence on ties.
inline std::pair<std::vector<double>, std::vector<std::size_t>> global_max_pool(const Matrix& a) {
    return colwise_max(a);
}

// --- forward / backward -----------------------------------------------------

// channel_ids[i] pairs with params.channels[i]. Sequences shorter than the
// channel's largest window are right-extended with PAD.
inline std::vector<double> forward(const std::vector<std::vector<std::size_t>>& channel_ids,
                                   const ModelParams& params,
                                   const std::vector<double>* dropout_mask = nullptr,
                                   ForwardTrace* trace = nullptr) {
    if (channel_ids.size() != params.channels.size())
        throw std::invalid_argument("forward: channel count mismatch");
    if (trace) *trace = ForwardTrace{};

    std::vector<double> concat;
    concat.reserve(params.concat_width());
    for (std::size_t ci = 0; ci < params.channels.size(); ++ci) {
        const ChannelParams& ch = params.channels[ci];
        std::vector<std::size_t> ids = channel_ids[ci];
        while (ids.size() < ch.spec.max_window()) ids.push_back(kPadId);

        Matrix x = embed(ids, ch.embedding);
        ForwardTrace::ChannelTrace ctrace;
        if (trace) {
            ctrace.ids = ids;
            ctrace.embedded = x;
        }
        for (const ConvFilter& f : ch.filters) {
            Matrix z = conv_1d(x, f);
            Matrix a = z;
            for (double& v : a.raw()) v = apply_activation(v, params.activation);
            auto [pooled, arg] = global_max_pool(a);
            concat.insert(concat.end(), pooled.begin(), pooled.end());
            if (trace) ctrace.windows.push_back({std::move(z), std::move(arg)});
        }
        if (trace) trace->channels.push_back(std::move(ctrace));
    }

    std::vector<double> dropped = concat;
    if (dropout_mask) {
        if (dropout_mask->size() != concat.size())
            throw std::invalid_argument("forward: dropout mask width mismatch");
        for (std::size_t i = 0; i < dropped.size(); ++i) dropped[i] *= (*dropout_mask)[i];
    }

    std::vector<double> logits(params.n_classes, 0.0);
    std::vector<double> hidden_pre, hidden_act;
    if (params.hidden_dim > 0) {
        hidden_pre.assign(params.hidden_dim, 0.0);
        for (std::size_t j = 0; j < params.hidden_dim; ++j) {
            double acc = params.hidden_b(0, j);
            for (std::size_t i = 0; i < dropped.size(); ++i) acc += dropped[i] * params.hidden_w(i, j);
            hidden_pre[j] = acc;
        }
        hidden_act.resize(params.hidden_dim);
        for (std::size_t j = 0; j < params.hidden_dim; ++j)
            hidden_act[j] = apply_activation(hidden_pre[j], params.activation);
        for (std::size_t k = 0; k < params.n_classes; ++k) {
            double acc = params.out_b(0, k);
            for (std::size_t j = 0; j < params.hidden_dim; ++j) acc += hidden_act[j] * params.out_w(j, k);
            logits[k] = acc;
        }
    } else {
        for (std::size_t k = 0; k < params.n_classes; ++k) {
            double acc = params.out_b(0, k);
            for (std::size_t i = 0; i < dropped.size(); ++i) acc += dropped[i] * params.out_w(i, k);
            logits[k] = acc;
        }
    }

    std::vector<double> probs = softmax(logits);
    if (trace) {
        trace->concat = std::move(concat);
        if (dropout_mask) trace->dropout_mask = *dropout_mask;
        trace->hidden_pre = std::move(hidden_pre);
        trace->hidden_act = std::move(hidden_act);
        trace->probs = probs;
    }
    return probs;
}

// Analytic gradients of cross-entropy loss w.r.t. every learnable array.
// Pooling routes gradient to the recorded argmax position; the PAD embedding
// row gradient is forced to zero.
inline ModelParams backward(const ForwardTrace& trace, const ModelParams& params, int true_label) {
    if (trace.probs.empty())
        throw std::invalid_argument("backward: trace missing (forward must retain gradients)");
    if (true_label < 0 || static_cast<std::size_t>(true_label) >= params.n_classes)
        throw std::out_of_range("backward: label out of range");

    ModelParams grads = ModelParams::zeros_like(params);

    // d loss / d logits
    std::vector<double> dlogits = trace.probs;
    dlogits[static_cast<std::size_t>(true_label)] -= 1.0;

    const std::vector<double>& dropped_input = [&]() -> std::vector<double> {
        std::vector<double> d = trace.concat;
        if (!trace.dropout_mask.empty())
            for (std::size_t i = 0; i < d.size(); ++i) d[i] *= trace.dropout_mask[i];
        return d;
    }();

    std::vector<double> dconcat(trace.concat.size(), 0.0);
    if (params.hidden_dim > 0) {
        std::vector<double> dhidden(params.hidden_dim, 0.0);
        for (std::size_t j = 0; j < params.hidden_dim; ++j)
            for (std::size_t k = 0; k < params.n_classes; ++k) {
                grads.out_w(j, k) += trace.hidden_act[j] * dlogits[k];
                dhidden[j] += params.out_w(j, k) * dlogits[k];
            }
        for (std::size_t k = 0; k < params.n_classes; ++k) grads.out_b(0, k) += dlogits[k];
        for (std::size_t j = 0; j < params.hidden_dim; ++j)
            dhidden[j] *= activation_grad(trace.hidden_pre[j], params.activation);
        for (std::size_t i = 0; i < dconcat.size(); ++i)
            for (std::size_t j = 0; j < params.hidden_dim; ++j) {
                grads.hidden_w(i, j) += dropped_input[i] * dhidden[j];
                dconcat[i] += params.hidden_w(i, j) * dhidden[j];
            }
        for (std::size_t j = 0; j < params.hidden_dim; ++j) grads.hidden_b(0, j) += dhidden[j];
    } else {
        for (std::size_t i = 0; i < dconcat.size(); ++i)
            for (std::size_t k = 0; k < params.n_classes; ++k) {
                grads.out_w(i, k) += dropped_input[i] * dlogits[k];
                dconcat[i] += params.out_w(i, k) * dlogits[k];
            }
        for (std::size_t k = 0; k < params.n_classes; ++k) grads.out_b(0, k) += dlogits[k];
    }

    if (!trace.dropout_mask.empty())
        for (std::size_t i = 0; i < dconcat.size(); ++i) dconcat[i] *= trace.dropout_mask[i];

    std::size_t offset = 0;
    for (std::size_t ci = 0; ci < params.channels.size(); ++ci) {
        const ChannelParams& ch = params.channels[ci];
        ChannelParams& gch = grads.channels[ci];
        const ForwardTrace::ChannelTrace& ctrace = trace.channels[ci];
        const std::size_t d = ch.spec.embed_dim;
        Matrix dx(ctrace.embedded.rows(), d);

        for (std::size_t wi = 0; wi < ch.filters.size(); ++wi) {
            const ConvFilter& f = ch.filters[wi];
            ConvFilter& gf = gch.filters[wi];
            const auto& wtrace = ctrace.windows[wi];
            const std::size_t maps = ch.spec.feature_maps;
            for (std::size_t m = 0; m < maps; ++m) {
                const double g = dconcat[offset + m];
                if (g == 0.0) continue;
                const std::size_t p = wtrace.pool_argmax[m];
                const double gz = g * activation_grad(wtrace.pre_activation(p, m), params.activation);
                if (gz == 0.0) continue;
                gf.bias(0, m) += gz;
                double* gw = gf.weights.data() + m * gf.weights.cols();
                const double* wt = f.weights.data() + m * f.weights.cols();
                const double* xv = ctrace.embedded.data() + p * d;
                double* dxv = dx.data() + p * d;
                for (std::size_t j = 0; j < f.window * d; ++j) {
                    gw[j] += gz * xv[j];
                    dxv[j] += gz * wt[j];
                }
            }
            offset += maps;
        }

        for (std::size_t i = 0; i < ctrace.ids.size(); ++i) {
            const std::size_t id = ctrace.ids[i];
            if (id == kPadId) continue;
            for (std::size_t c = 0; c < d; ++c) gch.embedding(id, c) += dx(i, c);
        }
    }
    return grads;
}

}  // namespace hantext

#endif
