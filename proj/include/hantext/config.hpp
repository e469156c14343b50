#ifndef HANTEXT_CONFIG_HPP
#define HANTEXT_CONFIG_HPP

#include <cstdlib>
#include <fstream>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "model.hpp"
#include "pipeline.hpp"
#include "train.hpp"

namespace hantext {

// Run configuration: a JSON file with a fixed key set (unknown keys are
// rejected) merged with command-line overrides by the CLI. Paths that do not
// exist as given are retried under $HANTEXT_DATA_DIR.
struct RunConfig {
    std::string name = "default";
    std::string corpus;
    std::string test_corpus;
    std::string pinyin_table;
    std::string word_dict;
    std::string model = "mccnn";  // or "baseline"

    McnnConfig mccnn;
    TrainConfig train;
    BaselinePipelineConfig baseline;

    std::size_t folds = 10;
    std::size_t repetitions = 1;
    bool stratified = true;
    std::size_t jobs = 1;

    static RunConfig from_json(const nlohmann::json& j);
    static RunConfig load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw std::invalid_argument("cannot open config: " + path);
        nlohmann::json j;
        in >> j;
        return from_json(j);
    }
    nlohmann::json to_json() const;
};

inline std::string resolve_data_path(const std::string& path) {
    if (path.empty()) return path;
    if (std::ifstream(path).good()) return path;
    if (const char* dir = std::getenv("HANTEXT_DATA_DIR")) {
        const std::string alt = std::string(dir) + "/" + path;
        if (std::ifstream(alt).good()) return alt;
    }
    return path;
}

inline RunConfig RunConfig::from_json(const nlohmann::json& j) {
    static const std::set<std::string> known = {
        "name", "corpus", "test_corpus", "pinyin_table", "word_dict", "model",
        "channels", "embed_dim", "window_sizes", "feature_maps", "hidden_dim",
        "activation", "max_len", "min_count", "pretrained_word_path", "val_fraction",
        "batch_size", "dropout_rate", "adadelta_rho", "adadelta_eps", "max_epochs",
        "patience", "seed", "folds", "repetitions", "stratified", "jobs", "baseline"};
    static const std::set<std::string> known_baseline = {
        "channel", "max_ngram", "min_count", "buckets", "dim", "lr0", "epochs"};
    for (const auto& [key, value] : j.items())
        if (!known.count(key)) throw std::invalid_argument("config: unknown key '" + key + "'");

    RunConfig c;
    auto get = [&](const char* key, auto& dst) {
        if (j.contains(key)) dst = j.at(key).template get<std::decay_t<decltype(dst)>>();
    };
    get("name", c.name);
    get("corpus", c.corpus);
    get("test_corpus", c.test_corpus);
    get("pinyin_table", c.pinyin_table);
    get("word_dict", c.word_dict);
    get("model", c.model);
    if (c.model != "mccnn" && c.model != "baseline")
        throw std::invalid_argument("config: model must be 'mccnn' or 'baseline'");

    if (j.contains("channels")) {
        c.mccnn.channels.clear();
        for (const auto& name : j.at("channels"))
            c.mccnn.channels.push_back(channel_from_name(name.get<std::string>()));
    }
    get("embed_dim", c.mccnn.embed_dim);
    if (j.contains("window_sizes"))
        c.mccnn.window_sizes = j.at("window_sizes").get<std::vector<std::size_t>>();
    get("feature_maps", c.mccnn.feature_maps);
    get("hidden_dim", c.mccnn.hidden_dim);
    if (j.contains("activation"))
        c.mccnn.activation = activation_from_name(j.at("activation").get<std::string>());
    get("max_len", c.mccnn.max_len);
    get("min_count", c.mccnn.min_count);
    get("pretrained_word_path", c.mccnn.pretrained_word_path);
    get("val_fraction", c.mccnn.val_fraction);

    get("batch_size", c.train.batch_size);
    get("dropout_rate", c.train.dropout_rate);
    get("adadelta_rho", c.train.adadelta_rho);
    get("adadelta_eps", c.train.adadelta_eps);
    get("max_epochs", c.train.max_epochs);
    get("patience", c.train.patience);
    get("seed", c.train.seed);

    get("folds", c.folds);
    get("repetitions", c.repetitions);
    get("stratified", c.stratified);
    get("jobs", c.jobs);

    if (j.contains("baseline")) {
        const auto& b = j.at("baseline");
        for (const auto& [key, value] : b.items())
            if (!known_baseline.count(key))
                throw std::invalid_argument("config: unknown baseline key '" + key + "'");
        if (b.contains("channel"))
            c.baseline.channel = channel_from_name(b.at("channel").get<std::string>());
        if (b.contains("max_ngram")) c.baseline.max_ngram = b.at("max_ngram").get<std::size_t>();
        if (b.contains("min_count")) c.baseline.min_count = b.at("min_count").get<std::size_t>();
        if (b.contains("buckets")) c.baseline.bucket_count = b.at("buckets").get<std::size_t>();
        if (b.contains("dim")) c.baseline.train.dim = b.at("dim").get<std::size_t>();
        if (b.contains("lr0")) c.baseline.train.lr0 = b.at("lr0").get<double>();
        if (b.contains("epochs")) c.baseline.train.epochs = b.at("epochs").get<std::size_t>();
    }
    c.baseline.train.seed = c.train.seed;
    return c;
}

inline nlohmann::json RunConfig::to_json() const {
    nlohmann::json j;
    j["name"] = name;
    j["corpus"] = corpus;
    j["test_corpus"] = test_corpus;
    j["pinyin_table"] = pinyin_table;
    j["word_dict"] = word_dict;
    j["model"] = model;
    nlohmann::json channels = nlohmann::json::array();
    for (Channel ch : mccnn.channels) channels.push_back(channel_name(ch));
    j["channels"] = channels;
    j["embed_dim"] = mccnn.embed_dim;
    j["window_sizes"] = mccnn.window_sizes;
    j["feature_maps"] = mccnn.feature_maps;
    j["hidden_dim"] = mccnn.hidden_dim;
    j["activation"] = activation_name(mccnn.activation);
    j["max_len"] = mccnn.max_len;
    j["min_count"] = mccnn.min_count;
    j["pretrained_word_path"] = mccnn.pretrained_word_path;
    j["val_fraction"] = mccnn.val_fraction;
    j["batch_size"] = train.batch_size;
    j["dropout_rate"] = train.dropout_rate;
    j["adadelta_rho"] = train.adadelta_rho;
    j["adadelta_eps"] = train.adadelta_eps;
    j["max_epochs"] = train.max_epochs;
    j["patience"] = train.patience;
    j["seed"] = train.seed;
    j["folds"] = folds;
    j["repetitions"] = repetitions;
    j["stratified"] = stratified;
    j["jobs"] = jobs;
    j["baseline"] = {
        {"channel", channel_name(baseline.channel)},
        {"max_ngram", baseline.max_ngram},
        {"min_count", baseline.min_count},
        {"buckets", baseline.bucket_count},
        {"dim", baseline.train.dim},
        {"lr0", baseline.train.lr0},
        {"epochs", baseline.train.epochs}};
    return j;
}

}  // namespace hantext

#endif
