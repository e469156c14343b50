#ifndef HANTEXT_BASELINE_HPP
#define HANTEXT_BASELINE_HPP

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "tensor.hpp"
#include "textprep.hpp"

namespace hantext {

// Hashed bag-of-ngrams featurizer: exact min_count-filtered unigram
// vocabulary plus 2..max_ngram grams hashed into a power-of-two bucket range
// above the vocabulary.
struct NgramFeaturizer {
    std::size_t max_ngram = 4;
    std::size_t min_count = 5;
    std::size_t bucket_count = 1u << 21;
    std::unordered_map<std::string, std::size_t> unigram_ids;  // 0-based
    std::vector<std::string> unigrams;

    static constexpr const char* kHashName = "fnv1a64";

    void validate() const {
        if (bucket_count == 0 || (bucket_count & (bucket_count - 1)) != 0)
            throw std::invalid_argument("NgramFeaturizer: bucket_count must be a power of two");
        if (max_ngram < 1) throw std::invalid_argument("NgramFeaturizer: max_ngram must be >= 1");
    }

    // FNV-1a, 64-bit, fixed constants
    static std::uint64_t hash(const std::string& s) {
        std::uint64_t h = 0xcbf29ce484222325ULL;
        for (unsigned char c : s) {
            h ^= c;
            h *= 0x100000001b3ULL;
        }
        return h;
    }

    void fit(const std::vector<std::vector<std::string>>& train_token_lists) {
        validate();
        std::unordered_map<std::string, std::size_t> counts;
        for (const auto& toks : train_token_lists)
            for (const auto& t : toks) ++counts[t];
        std::vector<std::string> kept;
        for (const auto& [tok, n] : counts)
            if (n >= min_count) kept.push_back(tok);
        std::sort(kept.begin(), kept.end());
        unigrams = std::move(kept);
        unigram_ids.clear();
        for (std::size_t i = 0; i < unigrams.size(); ++i) unigram_ids[unigrams[i]] = i;
    }

    std::size_t feature_count() const { return unigrams.size() + bucket_count; }

    // Unigram ids from the exact vocabulary (unknown unigrams dropped), then
    // each contiguous n-gram for n in 2..max_ngram hashed into the bucket
    // range. Ngram key joins tokens with '\x01'.
    std::vector<std::size_t> featurize(const std::vector<std::string>& tokens) const {
        std::vector<std::size_t> ids;
        for (const auto& t : tokens) {
            auto it = unigram_ids.find(t);
            if (it != unigram_ids.end()) ids.push_back(it->second);
        }
        for (std::size_t n = 2; n <= max_ngram; ++n) {
            if (tokens.size() < n) break;
            for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
                std::string key = tokens[i];
                for (std::size_t j = 1; j < n; ++j) {
                    key.push_back('\x01');
                    key += tokens[i + j];
                }
                ids.push_back(unigrams.size() + (hash(key) & (bucket_count - 1)));
            }
        }
        return ids;
    }
};

struct LinearModel {
    Matrix input_embedding;  // feature_count x dim
    Matrix output_w;         // dim x n_classes
    Matrix output_b;         // 1 x n_classes
    std::size_t n_classes = 0;

    static LinearModel init(std::size_t feature_count, std::size_t dim,
                            std::size_t n_classes, Rng& rng) {
        LinearModel m;
        m.n_classes = n_classes;
        m.input_embedding = uniform_init(feature_count, dim, -1.0 / dim, 1.0 / dim, rng);
        m.output_w = Matrix(dim, n_classes);
        m.output_b = Matrix(1, n_classes);
        return m;
    }
};

// Mean of feature embedding rows -> linear projection -> softmax.
// An empty feature list predicts the uniform distribution.
inline std::vector<double> baseline_predict(const std::vector<std::size_t>& feature_ids,
                                            const LinearModel& model) {
    const std::size_t dim = model.input_embedding.cols();
    std::vector<double> mean(dim, 0.0);
    if (!feature_ids.empty()) {
        for (std::size_t id : feature_ids)
            for (std::size_t c = 0; c < dim; ++c) mean[c] += model.input_embedding(id, c);
        const double inv = 1.0 / static_cast<double>(feature_ids.size());
        for (double& v : mean) v *= inv;
    }
    std::vector<double> logits(model.n_classes);
    for (std::size_t k = 0; k < model.n_classes; ++k) {
        double acc = model.output_b(0, k);
        for (std::size_t c = 0; c < dim; ++c) acc += mean[c] * model.output_w(c, k);
        logits[k] = acc;
    }
    return softmax(logits);
}

struct BaselineConfig {
    std::size_t dim = 10;
    std::size_t epochs = 50;
    double lr0 = 0.1;
    std::uint64_t seed = 1;
};

// SGD over documents with a learning rate decaying linearly from lr0 to 0
// across the total update count. Deterministic given the seed.
inline LinearModel train_baseline(const std::vector<std::vector<std::size_t>>& featurized_docs,
                                  const std::vector<int>& labels,
                                  std::size_t feature_count, std::size_t n_classes,
                                  const BaselineConfig& cfg) {
    if (featurized_docs.empty()) throw std::invalid_argument("train_baseline: empty corpus");
    if (featurized_docs.size() != labels.size())
        throw std::invalid_argument("train_baseline: label count mismatch");

    Rng rng(cfg.seed);
    LinearModel model = LinearModel::init(feature_count, cfg.dim, n_classes, rng);
    const std::size_t dim = cfg.dim;

    std::vector<std::size_t> order(featurized_docs.size());
    std::iota(order.begin(), order.end(), 0);

    const std::size_t total_updates = cfg.epochs * featurized_docs.size();
    std::size_t update = 0;
    std::vector<double> mean(dim), dmean(dim);
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        rng.shuffle(order);
        for (std::size_t idx : order) {
            const auto& ids = featurized_docs[idx];
            const int label = labels[idx];
            const double lr = cfg.lr0 * (1.0 - static_cast<double>(update) / static_cast<double>(total_updates));
            ++update;

            std::fill(mean.begin(), mean.end(), 0.0);
            if (!ids.empty()) {
                for (std::size_t id : ids)
                    for (std::size_t c = 0; c < dim; ++c) mean[c] += model.input_embedding(id, c);
                const double inv = 1.0 / static_cast<double>(ids.size());
                for (double& v : mean) v *= inv;
            }
            std::vector<double> logits(n_classes);
            for (std::size_t k = 0; k < n_classes; ++k) {
                double acc = model.output_b(0, k);
                for (std::size_t c = 0; c < dim; ++c) acc += mean[c] * model.output_w(c, k);
                logits[k] = acc;
            }
            std::vector<double> probs = softmax(logits);
            probs[static_cast<std::size_t>(label)] -= 1.0;  // dlogits

            std::fill(dmean.begin(), dmean.end(), 0.0);
            for (std::size_t k = 0; k < n_classes; ++k) {
                const double g = probs[k];
                for (std::size_t c = 0; c < dim; ++c) {
                    dmean[c] += model.output_w(c, k) * g;
                    model.output_w(c, k) -= lr * mean[c] * g;
                }
                model.output_b(0, k) -= lr * g;
            }
            if (!ids.empty()) {
                const double scale = lr / static_cast<double>(ids.size());
                for (std::size_t id : ids)
                    for (std::size_t c = 0; c < dim; ++c)
                        model.input_embedding(id, c) -= scale * dmean[c];
            }
        }
    }
    return model;
}

}  // namespace hantext

#endif
