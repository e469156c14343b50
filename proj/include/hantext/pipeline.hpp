#ifndef HANTEXT_PIPELINE_HPP
#define HANTEXT_PIPELINE_HPP

#include <algorithm>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "baseline.hpp"
#include "checkpoint.hpp"
#include "eval.hpp"
#include "model.hpp"
#include "textprep.hpp"
#include "train.hpp"

namespace hantext {

// Shared tokenization resources. The pinyin table is required for the pinyin
// channel, the dictionary for the word channel.
struct TokenizerSet {
    const PinyinTable* pinyin_table = nullptr;
    const WordDictionary* word_dict = nullptr;

    TokenSequence tokenize(Channel channel, const std::string& text) const {
        switch (channel) {
            case Channel::Character:
                return tokenize_characters(text);
            case Channel::Pinyin:
                if (!pinyin_table) throw std::invalid_argument("pinyin channel requires a pinyin table");
                return tokenize_pinyin(text, *pinyin_table);
            case Channel::Word:
                if (!word_dict) throw std::invalid_argument("word channel requires a word dictionary");
                return tokenize_words(text, *word_dict);
        }
        throw std::invalid_argument("unknown channel");
    }
};

struct McnnConfig {
    std::vector<Channel> channels = {Channel::Pinyin, Channel::Character, Channel::Word};
    std::size_t embed_dim = 300;
    std::vector<std::size_t> window_sizes = {2, 3, 4};
    std::size_t feature_maps = 256;
    std::size_t hidden_dim = 0;
    Activation activation = Activation::Relu;
    std::size_t max_len = 256;
    std::size_t min_count = 1;
    std::string pretrained_word_path;  // empty = random init
    double val_fraction = 0.1;         // carved from the training split when no explicit val set

    std::vector<Channel> sorted_channels() const {
        std::vector<Channel> out = channels;
        std::sort(out.begin(), out.end(), [](Channel a, Channel b) {
            return static_cast<int>(a) < static_cast<int>(b);
        });
        out.erase(std::unique(out.begin(), out.end()), out.end());
        if (out.empty()) throw std::invalid_argument("McnnConfig: at least one channel required");
        return out;
    }
};

inline std::vector<TokenSequence> tokenize_all(const std::vector<Document>& docs,
                                               Channel channel, const TokenizerSet& tok) {
    std::vector<TokenSequence> out;
    out.reserve(docs.size());
    for (const auto& d : docs) out.push_back(tok.tokenize(channel, d.text));
    return out;
}

inline EncodedDoc encode_doc(const Document& doc, const std::vector<Channel>& channels,
                             const std::vector<Vocabulary>& vocabs,
                             const TokenizerSet& tok, std::size_t max_len) {
    EncodedDoc enc;
    enc.label = doc.label;
    for (std::size_t ci = 0; ci < channels.size(); ++ci) {
        TokenSequence seq = tok.tokenize(channels[ci], doc.text);
        enc.channel_ids.push_back(encode(seq, vocabs[ci], max_len).ids);
    }
    return enc;
}

struct McnnTrainOutput {
    McnnModelFile file;
    TrainResult result;
    std::optional<EmbeddingLoadReport> pretrained_report;
};

// Full pipeline on raw documents: per-channel vocabularies from the training
// split, optional pretrained word vectors, validation slice carve-out when no
// explicit validation set is given, then the minibatch training loop.
inline McnnTrainOutput train_mccnn(std::vector<Document> train_docs,
                                   std::vector<Document> val_docs,
                                   const McnnConfig& cfg, const TrainConfig& tcfg,
                                   const TokenizerSet& tok,
                                   const std::vector<std::string>& label_names,
                                   std::ostream* log_out = nullptr) {
    if (train_docs.empty()) throw std::invalid_argument("train_mccnn: empty training split");
    const std::vector<Channel> channels = cfg.sorted_channels();

    if (val_docs.empty()) {
        Rng rng(derive_seed(tcfg.seed, 0x5A11));
        rng.shuffle(train_docs);
        std::size_t n_val = static_cast<std::size_t>(cfg.val_fraction * static_cast<double>(train_docs.size()));
        n_val = std::max<std::size_t>(1, std::min(n_val, train_docs.size() - 1));
        val_docs.assign(train_docs.end() - static_cast<std::ptrdiff_t>(n_val), train_docs.end());
        train_docs.resize(train_docs.size() - n_val);
    }

    std::vector<Vocabulary> vocabs;
    std::vector<ChannelSpec> specs;
    for (Channel ch : channels) {
        Vocabulary v = Vocabulary::build(tokenize_all(train_docs, ch, tok), cfg.min_count);
        ChannelSpec spec;
        spec.channel = ch;
        spec.vocab_size = v.size();
        spec.embed_dim = cfg.embed_dim;
        spec.window_sizes = cfg.window_sizes;
        spec.feature_maps = cfg.feature_maps;
        specs.push_back(spec);
        vocabs.push_back(std::move(v));
    }

    Rng init_rng(derive_seed(tcfg.seed, 0xC0DE));
    ModelParams params = ModelParams::init(specs, label_names.size(), init_rng,
                                           cfg.hidden_dim, cfg.activation);

    std::optional<EmbeddingLoadReport> pretrained_report;
    if (!cfg.pretrained_word_path.empty()) {
        bool applied = false;
        for (std::size_t ci = 0; ci < channels.size(); ++ci)
            if (channels[ci] == Channel::Word) {
                pretrained_report = load_pretrained_embeddings(cfg.pretrained_word_path, vocabs[ci],
                                                              params.channels[ci].embedding);
                for (std::size_t c = 0; c < cfg.embed_dim; ++c)
                    params.channels[ci].embedding(kPadId, c) = 0.0;
                applied = true;
            }
        if (!applied)
            throw std::invalid_argument("pretrained embeddings given but the word channel is not active");
    }

    std::vector<EncodedDoc> enc_train, enc_val;
    for (const auto& d : train_docs) enc_train.push_back(encode_doc(d, channels, vocabs, tok, cfg.max_len));
    for (const auto& d : val_docs) enc_val.push_back(encode_doc(d, channels, vocabs, tok, cfg.max_len));

    McnnTrainOutput out;
    out.result = train(enc_train, enc_val, std::move(params), tcfg, log_out);
    out.file.params = out.result.params;
    out.file.vocabs = std::move(vocabs);
    out.file.label_names = label_names;
    out.file.max_len = cfg.max_len;
    out.pretrained_report = pretrained_report;
    return out;
}

inline std::vector<int> predict_mccnn(const McnnModelFile& file, const TokenizerSet& tok,
                                      const std::vector<Document>& docs) {
    std::vector<Channel> channels;
    for (const auto& ch : file.params.channels) channels.push_back(ch.spec.channel);
    std::vector<int> preds;
    preds.reserve(docs.size());
    for (const auto& d : docs) {
        const EncodedDoc enc = encode_doc(d, channels, file.vocabs, tok, file.max_len);
        preds.push_back(static_cast<int>(argmax(forward(enc.channel_ids, file.params))));
    }
    return preds;
}

// FoldRunner adapter so the CV harness can drive the full MCCNN pipeline.
inline FoldRunner make_mccnn_runner(McnnConfig cfg, TrainConfig tcfg,
                                    const TokenizerSet& tok,
                                    std::vector<std::string> label_names) {
    return [cfg, tcfg, &tok, label_names](const std::vector<Document>& train_docs,
                                          const std::vector<Document>& test_docs,
                                          std::uint64_t fold_seed) {
        TrainConfig fold_tcfg = tcfg;
        fold_tcfg.seed = fold_seed;
        const McnnTrainOutput out = train_mccnn(train_docs, {}, cfg, fold_tcfg, tok, label_names);
        return predict_mccnn(out.file, tok, test_docs);
    };
}

// --- baseline pipeline ------------------------------------------------------

struct BaselinePipelineConfig {
    Channel channel = Channel::Word;
    std::size_t max_ngram = 4;
    std::size_t min_count = 5;
    std::size_t bucket_count = 1u << 21;
    BaselineConfig train;
};

inline BaselineModelFile train_baseline_pipeline(const std::vector<Document>& train_docs,
                                                 const BaselinePipelineConfig& cfg,
                                                 const TokenizerSet& tok,
                                                 const std::vector<std::string>& label_names) {
    if (train_docs.empty()) throw std::invalid_argument("train_baseline: empty corpus");
    BaselineModelFile file;
    file.channel = cfg.channel;
    file.label_names = label_names;
    file.featurizer.max_ngram = cfg.max_ngram;
    file.featurizer.min_count = cfg.min_count;
    file.featurizer.bucket_count = cfg.bucket_count;

    std::vector<std::vector<std::string>> token_lists;
    std::vector<int> labels;
    for (const auto& d : train_docs) {
        token_lists.push_back(tok.tokenize(cfg.channel, d.text).tokens);
        labels.push_back(d.label);
    }
    file.featurizer.fit(token_lists);

    std::vector<std::vector<std::size_t>> featurized;
    featurized.reserve(token_lists.size());
    for (const auto& toks : token_lists) featurized.push_back(file.featurizer.featurize(toks));

    file.model = train_baseline(featurized, labels, file.featurizer.feature_count(),
                                label_names.size(), cfg.train);
    return file;
}

inline std::vector<int> predict_baseline(const BaselineModelFile& file, const TokenizerSet& tok,
                                         const std::vector<Document>& docs) {
    std::vector<int> preds;
    preds.reserve(docs.size());
    for (const auto& d : docs) {
        const auto ids = file.featurizer.featurize(tok.tokenize(file.channel, d.text).tokens);
        preds.push_back(static_cast<int>(argmax(baseline_predict(ids, file.model))));
    }
    return preds;
}

inline FoldRunner make_baseline_runner(BaselinePipelineConfig cfg, const TokenizerSet& tok,
                                       std::vector<std::string> label_names) {
    return [cfg, &tok, label_names](const std::vector<Document>& train_docs,
                                    const std::vector<Document>& test_docs,
                                    std::uint64_t fold_seed) {
        BaselinePipelineConfig fold_cfg = cfg;
        fold_cfg.train.seed = fold_seed;
        const BaselineModelFile file = train_baseline_pipeline(train_docs, fold_cfg, tok, label_names);
        return predict_baseline(file, tok, test_docs);
    };
}

// --- embedding export -------------------------------------------------------

// Writes the channel's embedding table in the pretrained text vector format
// (`count dim` header, then `token v1 .. v_dim`), round-trippable by
// load_pretrained_embeddings. PAD and UNK rows are included.
inline void export_embeddings(const McnnModelFile& file, Channel channel, std::ostream& out) {
    for (std::size_t ci = 0; ci < file.params.channels.size(); ++ci) {
        if (file.params.channels[ci].spec.channel != channel) continue;
        const Matrix& emb = file.params.channels[ci].embedding;
        const auto& tokens = file.vocabs[ci].id_to_token();
        out << tokens.size() << " " << emb.cols() << "\n";
        out.precision(17);
        for (std::size_t id = 0; id < tokens.size(); ++id) {
            out << tokens[id];
            for (std::size_t c = 0; c < emb.cols(); ++c) out << " " << emb(id, c);
            out << "\n";
        }
        return;
    }
    throw std::invalid_argument(std::string("checkpoint has no ") + channel_name(channel) + " channel");
}

}  // namespace hantext

#endif
