#ifndef HANTEXT_TRAIN_HPP
#define HANTEXT_TRAIN_HPP

#include <cmath>
#include <cstddef>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "model.hpp"
#include "tensor.hpp"
#include "textprep.hpp"

namespace hantext {

struct TrainConfig {
    std::size_t batch_size = 128;
    double dropout_rate = 0.6;
    double adadelta_rho = 0.95;
    double adadelta_eps = 1e-6;
    std::size_t max_epochs = 50;
    std::size_t patience = 5;
    std::uint64_t seed = 1;

    void validate() const {
        if (!(dropout_rate >= 0.0 && dropout_rate < 1.0))
            throw std::invalid_argument("TrainConfig: dropout_rate must be in [0,1)");
        if (!(adadelta_rho > 0.0 && adadelta_rho < 1.0))
            throw std::invalid_argument("TrainConfig: adadelta_rho must be in (0,1)");
        if (!(adadelta_eps > 0.0))
            throw std::invalid_argument("TrainConfig: adadelta_eps must be > 0");
        if (batch_size < 1) throw std::invalid_argument("TrainConfig: batch_size must be >= 1");
        if (max_epochs < 1) throw std::invalid_argument("TrainConfig: max_epochs must be >= 1");
    }
};

inline double cross_entropy(const std::vector<double>& probs, int label) {
    if (label < 0 || static_cast<std::size_t>(label) >= probs.size())
        throw std::out_of_range("cross_entropy: label out of range");
    return -std::log(std::max(probs[static_cast<std::size_t>(label)], 1e-12));
}

// Inverted dropout: zeros with probability `rate`, survivors scaled by
// 1/(1-rate). Evaluation uses no mask.
inline std::vector<double> dropout_mask(std::size_t width, double rate, Rng& rng) {
    if (!(rate >= 0.0 && rate < 1.0))
        throw std::invalid_argument("dropout_mask: rate must be in [0,1)");
    std::vector<double> mask(width);
    const double keep = 1.0 / (1.0 - rate);
    for (double& v : mask) v = rng.next_double() < rate ? 0.0 : keep;
    return mask;
}

struct AdadeltaState {
    std::vector<Matrix> sq_grad;    // E[g^2], aligned with ModelParams::param_list()
    std::vector<Matrix> sq_update;  // E[dx^2]

    static AdadeltaState zeros_like(const ModelParams& params) {
        AdadeltaState s;
        for (const Matrix* m : params.param_list()) {
            s.sq_grad.emplace_back(m->rows(), m->cols());
            s.sq_update.emplace_back(m->rows(), m->cols());
        }
        return s;
    }
};

// One elementwise adadelta update:
//   Eg <- rho*Eg + (1-rho)*g^2
//   dx  = -sqrt(Edx + eps)/sqrt(Eg + eps) * g
//   Edx <- rho*Edx + (1-rho)*dx^2
//   x  += dx
inline void adadelta_step(Matrix& param, const Matrix& grad,
                          Matrix& sq_grad, Matrix& sq_update,
                          double rho, double eps) {
    param.require_same_shape(grad, "adadelta_step");
    param.require_same_shape(sq_grad, "adadelta_step");
    param.require_same_shape(sq_update, "adadelta_step");
    for (std::size_t i = 0; i < param.size(); ++i) {
        const double g = grad.raw()[i];
        double& eg = sq_grad.raw()[i];
        double& ed = sq_update.raw()[i];
        eg = rho * eg + (1.0 - rho) * g * g;
        const double dx = -std::sqrt(ed + eps) / std::sqrt(eg + eps) * g;
        ed = rho * ed + (1.0 - rho) * dx * dx;
        param.raw()[i] += dx;
    }
}

inline void adadelta_step_all(ModelParams& params, const ModelParams& grads,
                              AdadeltaState& state, double rho, double eps) {
    auto plist = params.param_list();
    auto glist = grads.param_list();
    for (std::size_t i = 0; i < plist.size(); ++i)
        adadelta_step(*plist[i], *glist[i], state.sq_grad[i], state.sq_update[i], rho, eps);
}

// --- pretrained embeddings --------------------------------------------------

struct EmbeddingLoadReport {
    std::size_t hits = 0;
    std::size_t vocab_tokens = 0;  // excluding PAD/UNK
    double coverage = 0.0;
};

// Text vector format: optional first line `count dim`, then
// `token v1 v2 ... v_dim`. Tokens found in the file overwrite their
// randomly initialized rows; PAD stays zero.
inline EmbeddingLoadReport load_pretrained_embeddings(const std::string& path,
                                                      const Vocabulary& vocab,
                                                      Matrix& embedding) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open embedding file: " + path);
    const std::size_t embed_dim = embedding.cols();

    EmbeddingLoadReport report;
    report.vocab_tokens = vocab.token_count();

    std::string line;
    std::size_t lineno = 0;
    bool first = true;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::istringstream ss(line);
        if (first) {
            first = false;
            // header line: exactly two integers
            std::size_t cnt, dim;
            char extra;
            std::istringstream hs(line);
            if ((hs >> cnt >> dim) && !(hs >> extra)) {
                if (dim != embed_dim)
                    throw std::runtime_error(path + ": embedding dimension " + std::to_string(dim) +
                                             " does not match model dimension " + std::to_string(embed_dim));
                continue;
            }
        }
        std::string token;
        if (!(ss >> token))
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": malformed line");
        std::vector<double> vec;
        double v;
        while (ss >> v) vec.push_back(v);
        if (vec.size() != embed_dim)
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected " +
                                     std::to_string(embed_dim) + " values, got " + std::to_string(vec.size()));
        if (!vocab.contains(token)) continue;
        const std::size_t id = vocab.id_of(token);
        for (std::size_t c = 0; c < embed_dim; ++c) embedding(id, c) = vec[c];
        ++report.hits;
    }
    report.coverage = report.vocab_tokens == 0
                          ? 0.0
                          : static_cast<double>(report.hits) / static_cast<double>(report.vocab_tokens);
    return report;
}

// --- training loop ----------------------------------------------------------

struct EncodedDoc {
    std::vector<std::vector<std::size_t>> channel_ids;  // aligned with ModelParams::channels
    int label = 0;
};

struct EpochRecord {
    std::size_t epoch = 0;
    double mean_loss = 0.0;
    double val_accuracy = 0.0;
};

struct TrainResult {
    ModelParams params;
    std::vector<EpochRecord> log;
    double best_val_accuracy = 0.0;
    std::size_t best_epoch = 0;
};

inline double evaluate_accuracy(const std::vector<EncodedDoc>& docs, const ModelParams& params) {
    if (docs.empty()) return 0.0;
    std::size_t correct = 0;
    for (const auto& doc : docs) {
        const auto probs = forward(doc.channel_ids, params);
        if (static_cast<int>(argmax(probs)) == doc.label) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(docs.size());
}

inline std::string render_log_line(const EpochRecord& r) {
    std::ostringstream ss;
    ss << "epoch=" << r.epoch << " loss=" << r.mean_loss << " val_acc=" << r.val_accuracy;
    return ss.str();
}

// Minibatch training with gradient averaging, adadelta updates and early
// stopping on validation accuracy. Deterministic given (seed, corpus, config).
inline TrainResult train(const std::vector<EncodedDoc>& train_docs,
                         const std::vector<EncodedDoc>& val_docs,
                         ModelParams params, const TrainConfig& cfg,
                         std::ostream* log_out = nullptr) {
    cfg.validate();
    if (train_docs.empty() || val_docs.empty())
        throw std::invalid_argument("train: empty train or validation split");

    Rng rng(cfg.seed);
    AdadeltaState state = AdadeltaState::zeros_like(params);
    const std::size_t concat_width = params.concat_width();

    TrainResult result;
    result.params = params;
    std::size_t since_best = 0;

    std::vector<std::size_t> order(train_docs.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        rng.shuffle(order);
        double loss_sum = 0.0;
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const std::size_t end = std::min(start + cfg.batch_size, order.size());
            ModelParams grads = ModelParams::zeros_like(params);
            for (std::size_t i = start; i < end; ++i) {
                const EncodedDoc& doc = train_docs[order[i]];
                std::optional<std::vector<double>> mask;
                if (cfg.dropout_rate > 0.0)
                    mask = dropout_mask(concat_width, cfg.dropout_rate, rng);
                ForwardTrace trace;
                const auto probs = forward(doc.channel_ids, params, mask ? &*mask : nullptr, &trace);
                loss_sum += cross_entropy(probs, doc.label);
                const ModelParams doc_grads = backward(trace, params, doc.label);
                auto glist = grads.param_list();
                auto dlist = doc_grads.param_list();
                for (std::size_t k = 0; k < glist.size(); ++k) *glist[k] += *dlist[k];
            }
            const double scale = 1.0 / static_cast<double>(end - start);
            for (Matrix* g : grads.param_list()) *g *= scale;
            adadelta_step_all(params, grads, state, cfg.adadelta_rho, cfg.adadelta_eps);
        }

        EpochRecord rec;
        rec.epoch = epoch;
        rec.mean_loss = loss_sum / static_cast<double>(train_docs.size());
        rec.val_accuracy = evaluate_accuracy(val_docs, params);
        result.log.push_back(rec);
        if (log_out) *log_out << render_log_line(rec) << "\n";

        if (result.log.size() == 1 || rec.val_accuracy > result.best_val_accuracy) {
            result.best_val_accuracy = rec.val_accuracy;
            result.best_epoch = epoch;
            result.params = params;
            since_best = 0;
        } else if (++since_best >= cfg.patience) {
            break;
        }
    }
    return result;
}

}  // namespace hantext

#endif
