#ifndef HANTEXT_CHECKPOINT_HPP
#define HANTEXT_CHECKPOINT_HPP

#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "baseline.hpp"
#include "model.hpp"
#include "textprep.hpp"

namespace hantext {

// Versioned checkpoint container: a line-oriented UTF-8 text header followed
// by the learnable arrays as little-endian 64-bit floats, each array prefixed
// with its row/col counts as little-endian uint64 so the loader can reject
// shape mismatches. Array order is ModelParams::param_list() order.

constexpr int kCheckpointVersion = 1;
inline const char* kCheckpointMagic = "hantext-checkpoint";

namespace detail {

inline void write_u64(std::ostream& out, std::uint64_t v) {
    char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
    out.write(buf, 8);
}

inline std::uint64_t read_u64(std::istream& in) {
    unsigned char buf[8];
    in.read(reinterpret_cast<char*>(buf), 8);
    if (!in) throw std::runtime_error("checkpoint: truncated binary section");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
    return v;
}

inline void write_f64(std::ostream& out, double d) {
    std::uint64_t bits;
    std::memcpy(&bits, &d, 8);
    write_u64(out, bits);
}

inline double read_f64(std::istream& in) {
    const std::uint64_t bits = read_u64(in);
    double d;
    std::memcpy(&d, &bits, 8);
    return d;
}

inline void write_matrix(std::ostream& out, const Matrix& m) {
    write_u64(out, m.rows());
    write_u64(out, m.cols());
    for (double v : m.raw()) write_f64(out, v);
}

inline Matrix read_matrix(std::istream& in, std::size_t expect_rows, std::size_t expect_cols) {
    const std::uint64_t rows = read_u64(in);
    const std::uint64_t cols = read_u64(in);
    if (rows != expect_rows || cols != expect_cols)
        throw std::runtime_error("checkpoint: array shape " + std::to_string(rows) + "x" +
                                 std::to_string(cols) + " does not match header (" +
                                 std::to_string(expect_rows) + "x" + std::to_string(expect_cols) + ")");
    Matrix m(rows, cols);
    for (double& v : m.raw()) v = read_f64(in);
    return m;
}

inline std::string expect_line(std::istream& in, const std::string& what) {
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("checkpoint: missing " + what);
    return line;
}

inline std::vector<std::string> split_ws(const std::string& s) {
    std::istringstream ss(s);
    std::vector<std::string> out;
    std::string tok;
    while (ss >> tok) out.push_back(tok);
    return out;
}

}  // namespace detail

// --- MCCNN checkpoint -------------------------------------------------------

struct McnnModelFile {
    ModelParams params;
    std::vector<Vocabulary> vocabs;  // aligned with params.channels
    std::vector<std::string> label_names;
    std::size_t max_len = 256;
};

inline void save_mccnn(const McnnModelFile& file, std::ostream& out) {
    out << kCheckpointMagic << " " << kCheckpointVersion << "\n";
    out << "model mccnn\n";
    out << "classes " << file.params.n_classes << "\n";
    out << "activation " << activation_name(file.params.activation) << "\n";
    out << "hidden " << file.params.hidden_dim << "\n";
    out << "max_len " << file.max_len << "\n";
    out << "labels " << file.label_names.size() << "\n";
    for (const auto& name : file.label_names) out << name << "\n";
    out << "channels " << file.params.channels.size() << "\n";
    for (std::size_t ci = 0; ci < file.params.channels.size(); ++ci) {
        const ChannelSpec& spec = file.params.channels[ci].spec;
        out << "channel " << channel_name(spec.channel)
            << " vocab " << spec.vocab_size
            << " dim " << spec.embed_dim
            << " maps " << spec.feature_maps
            << " windows";
        for (std::size_t w : spec.window_sizes) out << " " << w;
        out << "\n";
        const auto& tokens = file.vocabs[ci].id_to_token();
        out << "tokens " << tokens.size() - 2 << "\n";
        for (std::size_t i = 2; i < tokens.size(); ++i) out << tokens[i] << "\n";
    }
    out << "arrays\n";
    for (const Matrix* m : file.params.param_list()) detail::write_matrix(out, *m);
}

inline void save_mccnn(const McnnModelFile& file, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
    save_mccnn(file, out);
}

inline McnnModelFile load_mccnn(std::istream& in) {
    using detail::expect_line;
    using detail::split_ws;

    auto head = split_ws(expect_line(in, "magic"));
    if (head.size() != 2 || head[0] != kCheckpointMagic)
        throw std::runtime_error("checkpoint: bad magic");
    if (std::stoi(head[1]) != kCheckpointVersion)
        throw std::runtime_error("checkpoint: unsupported version " + head[1]);
    auto model_line = split_ws(expect_line(in, "model line"));
    if (model_line.size() != 2 || model_line[1] != "mccnn")
        throw std::runtime_error("checkpoint: not an mccnn checkpoint");

    McnnModelFile file;
    auto read_kv = [&](const std::string& key) -> std::string {
        auto parts = split_ws(expect_line(in, key));
        if (parts.size() != 2 || parts[0] != key)
            throw std::runtime_error("checkpoint: expected '" + key + "' line");
        return parts[1];
    };
    file.params.n_classes = std::stoul(read_kv("classes"));
    file.params.activation = activation_from_name(read_kv("activation"));
    file.params.hidden_dim = std::stoul(read_kv("hidden"));
    file.max_len = std::stoul(read_kv("max_len"));
    const std::size_t n_labels = std::stoul(read_kv("labels"));
    for (std::size_t i = 0; i < n_labels; ++i)
        file.label_names.push_back(expect_line(in, "label name"));

    const std::size_t n_channels = std::stoul(read_kv("channels"));
    for (std::size_t ci = 0; ci < n_channels; ++ci) {
        auto parts = split_ws(expect_line(in, "channel line"));
        if (parts.size() < 10 || parts[0] != "channel")
            throw std::runtime_error("checkpoint: malformed channel line");
        ChannelParams ch;
        ch.spec.channel = channel_from_name(parts[1]);
        ch.spec.vocab_size = std::stoul(parts[3]);
        ch.spec.embed_dim = std::stoul(parts[5]);
        ch.spec.feature_maps = std::stoul(parts[7]);
        ch.spec.window_sizes.clear();
        for (std::size_t i = 9; i < parts.size(); ++i)
            ch.spec.window_sizes.push_back(std::stoul(parts[i]));
        const std::size_t n_tokens = std::stoul(read_kv("tokens"));
        std::vector<std::string> tokens;
        for (std::size_t i = 0; i < n_tokens; ++i)
            tokens.push_back(expect_line(in, "vocab token"));
        if (n_tokens + 2 != ch.spec.vocab_size)
            throw std::runtime_error("checkpoint: vocabulary size does not match channel header");
        file.vocabs.push_back(Vocabulary::from_tokens(ch.spec.channel, tokens));
        file.params.channels.push_back(std::move(ch));
    }
    if (expect_line(in, "arrays marker") != "arrays")
        throw std::runtime_error("checkpoint: missing arrays marker");

    // materialize arrays with the shapes implied by the header
    for (auto& ch : file.params.channels) {
        ch.embedding = Matrix(ch.spec.vocab_size, ch.spec.embed_dim);
        for (std::size_t w : ch.spec.window_sizes) {
            ConvFilter f;
            f.window = w;
            f.weights = Matrix(ch.spec.feature_maps, w * ch.spec.embed_dim);
            f.bias = Matrix(1, ch.spec.feature_maps);
            ch.filters.push_back(std::move(f));
        }
    }
    const std::size_t concat = file.params.concat_width();
    if (file.params.hidden_dim > 0) {
        file.params.hidden_w = Matrix(concat, file.params.hidden_dim);
        file.params.hidden_b = Matrix(1, file.params.hidden_dim);
        file.params.out_w = Matrix(file.params.hidden_dim, file.params.n_classes);
    } else {
        file.params.out_w = Matrix(concat, file.params.n_classes);
    }
    file.params.out_b = Matrix(1, file.params.n_classes);

    for (Matrix* m : file.params.param_list())
        *m = detail::read_matrix(in, m->rows(), m->cols());
    return file;
}

inline McnnModelFile load_mccnn(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
    return load_mccnn(in);
}

// --- baseline checkpoint ----------------------------------------------------

struct BaselineModelFile {
    NgramFeaturizer featurizer;
    LinearModel model;
    std::vector<std::string> label_names;
    Channel channel = Channel::Word;
};

inline void save_baseline(const BaselineModelFile& file, std::ostream& out) {
    out << kCheckpointMagic << " " << kCheckpointVersion << "\n";
    out << "model baseline\n";
    out << "classes " << file.model.n_classes << "\n";
    out << "channel " << channel_name(file.channel) << "\n";
    out << "labels " << file.label_names.size() << "\n";
    for (const auto& name : file.label_names) out << name << "\n";
    out << "max_ngram " << file.featurizer.max_ngram << "\n";
    out << "min_count " << file.featurizer.min_count << "\n";
    out << "buckets " << file.featurizer.bucket_count << "\n";
    out << "hash " << NgramFeaturizer::kHashName << "\n";
    out << "unigrams " << file.featurizer.unigrams.size() << "\n";
    for (const auto& tok : file.featurizer.unigrams) out << tok << "\n";
    out << "arrays\n";
    detail::write_matrix(out, file.model.input_embedding);
    detail::write_matrix(out, file.model.output_w);
    detail::write_matrix(out, file.model.output_b);
}

inline void save_baseline(const BaselineModelFile& file, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
    save_baseline(file, out);
}

inline BaselineModelFile load_baseline(std::istream& in) {
    using detail::expect_line;
    using detail::split_ws;

    auto head = split_ws(expect_line(in, "magic"));
    if (head.size() != 2 || head[0] != kCheckpointMagic)
        throw std::runtime_error("checkpoint: bad magic");
    if (std::stoi(head[1]) != kCheckpointVersion)
        throw std::runtime_error("checkpoint: unsupported version " + head[1]);
    auto model_line = split_ws(expect_line(in, "model line"));
    if (model_line.size() != 2 || model_line[1] != "baseline")
        throw std::runtime_error("checkpoint: not a baseline checkpoint");

    BaselineModelFile file;
    auto read_kv = [&](const std::string& key) -> std::string {
        auto parts = split_ws(expect_line(in, key));
        if (parts.size() != 2 || parts[0] != key)
            throw std::runtime_error("checkpoint: expected '" + key + "' line");
        return parts[1];
    };
    file.model.n_classes = std::stoul(read_kv("classes"));
    file.channel = channel_from_name(read_kv("channel"));
    const std::size_t n_labels = std::stoul(read_kv("labels"));
    for (std::size_t i = 0; i < n_labels; ++i)
        file.label_names.push_back(expect_line(in, "label name"));
    file.featurizer.max_ngram = std::stoul(read_kv("max_ngram"));
    file.featurizer.min_count = std::stoul(read_kv("min_count"));
    file.featurizer.bucket_count = std::stoul(read_kv("buckets"));
    if (read_kv("hash") != NgramFeaturizer::kHashName)
        throw std::runtime_error("checkpoint: unknown hash function");
    const std::size_t n_unigrams = std::stoul(read_kv("unigrams"));
    for (std::size_t i = 0; i < n_unigrams; ++i) {
        std::string tok = expect_line(in, "unigram");
        file.featurizer.unigram_ids[tok] = file.featurizer.unigrams.size();
        file.featurizer.unigrams.push_back(std::move(tok));
    }
    if (expect_line(in, "arrays marker") != "arrays")
        throw std::runtime_error("checkpoint: missing arrays marker");

    const std::size_t features = file.featurizer.feature_count();
    const std::uint64_t rows = detail::read_u64(in);
    const std::uint64_t cols = detail::read_u64(in);
    if (rows != features) throw std::runtime_error("checkpoint: embedding rows do not match featurizer");
    Matrix emb(rows, cols);
    for (double& v : emb.raw()) v = detail::read_f64(in);
    file.model.input_embedding = std::move(emb);
    file.model.output_w = detail::read_matrix(in, cols, file.model.n_classes);
    file.model.output_b = detail::read_matrix(in, 1, file.model.n_classes);
    return file;
}

inline BaselineModelFile load_baseline(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
    return load_baseline(in);
}

// Peek the model type tag without consuming the stream position guarantees.
inline std::string checkpoint_model_type(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
    std::string magic_line, model_line;
    std::getline(in, magic_line);
    std::getline(in, model_line);
    auto parts = detail::split_ws(model_line);
    if (parts.size() != 2 || parts[0] != "model")
        throw std::runtime_error("checkpoint: malformed header in " + path);
    return parts[1];
}

}  // namespace hantext

#endif
