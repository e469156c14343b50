// Command-line front end for the Chinese text-classification lab: corpus
// statistics, model training, evaluation, cross-validation comparison grids,
// paired significance tests and embedding export.
//
// Exit codes: 0 success, 2 usage/validation error, 1 runtime error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hantext/checkpoint.hpp"
#include "hantext/config.hpp"
#include "hantext/eval.hpp"
#include "hantext/pipeline.hpp"
#include "hantext/textprep.hpp"

namespace fs = std::filesystem;
using namespace hantext;

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct LoadedResources {
    std::optional<PinyinTable> table;
    std::optional<WordDictionary> dict;
    TokenizerSet tok;

    void load(const std::string& table_path, const std::string& dict_path,
              const std::vector<Channel>& channels) {
        bool need_pinyin = false, need_word = false;
        for (Channel ch : channels) {
            need_pinyin |= ch == Channel::Pinyin;
            need_word |= ch == Channel::Word;
        }
        if (need_pinyin) {
            if (table_path.empty())
                throw UsageError("pinyin channel requested but no pinyin table given");
            table = PinyinTable::load(resolve_data_path(table_path));
            tok.pinyin_table = &*table;
        }
        if (need_word) {
            if (dict_path.empty())
                throw UsageError("word channel requested but no word dictionary given");
            dict = WordDictionary::load(resolve_data_path(dict_path));
            tok.word_dict = &*dict;
        }
    }
};

std::string fmt6(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

// --- stats ------------------------------------------------------------------

int cmd_stats(const std::string& corpus_path, const std::string& test_path,
              std::vector<std::string> channel_names, const std::string& table_path,
              const std::string& dict_path, std::size_t min_count, bool type_based,
              std::uint64_t seed) {
    std::vector<Channel> channels;
    for (const auto& n : channel_names) channels.push_back(channel_from_name(n));
    if (channels.empty())
        channels = {Channel::Pinyin, Channel::Character, Channel::Word};

    LoadedResources res;
    res.load(table_path, dict_path, channels);

    Corpus train = load_corpus(resolve_data_path(corpus_path));
    if (train.docs.empty()) throw UsageError("empty corpus: " + corpus_path);

    Corpus test;
    if (!test_path.empty()) {
        test = load_corpus(resolve_data_path(test_path));
        if (test.docs.empty()) throw UsageError("empty test corpus: " + test_path);
    } else {
        // hold out a seeded 20% as the test split
        Rng rng(seed);
        std::vector<Document> docs = train.docs;
        rng.shuffle(docs);
        const std::size_t n_test = std::max<std::size_t>(1, docs.size() / 5);
        if (docs.size() < 2) throw UsageError("corpus too small to split; give --test");
        test.docs.assign(docs.end() - static_cast<std::ptrdiff_t>(n_test), docs.end());
        docs.resize(docs.size() - n_test);
        train.docs = std::move(docs);
    }

    const OovMode mode = type_based ? OovMode::Type : OovMode::Occurrence;
    std::cout << "channel\tvocab_size\tavg_length\toov_rate\n";
    for (Channel ch : channels) {
        const auto train_seqs = tokenize_all(train.docs, ch, res.tok);
        const auto test_seqs = tokenize_all(test.docs, ch, res.tok);
        const ChannelStats s = corpus_stats(train_seqs, test_seqs, min_count, mode);
        std::cout << channel_name(ch) << "\t" << s.vocab_size << "\t"
                  << fmt6(s.avg_length) << "\t" << fmt6(s.oov_rate) << "\n";
    }
    return 0;
}

// --- train ------------------------------------------------------------------

void echo_config(const RunConfig& cfg, const fs::path& out_dir) {
    std::ofstream out(out_dir / "effective-config.json");
    out << cfg.to_json().dump(2) << "\n";
}

int cmd_train(RunConfig cfg, const std::string& out_dir_str) {
    const fs::path out_dir = out_dir_str;
    fs::create_directories(out_dir);

    if (cfg.corpus.empty()) throw UsageError("no corpus given");
    const Corpus corpus = load_corpus(resolve_data_path(cfg.corpus));
    if (corpus.docs.empty()) throw UsageError("empty corpus: " + cfg.corpus);

    if (cfg.model == "baseline") {
        LoadedResources res;
        res.load(cfg.pinyin_table, cfg.word_dict, {cfg.baseline.channel});
        const BaselineModelFile file =
            train_baseline_pipeline(corpus.docs, cfg.baseline, res.tok, corpus.label_names);
        save_baseline(file, (out_dir / "model.ckpt").string());
        echo_config(cfg, out_dir);
        std::cout << "checkpoint written to " << (out_dir / "model.ckpt").string() << "\n";
        return 0;
    }

    LoadedResources res;
    res.load(cfg.pinyin_table, cfg.word_dict, cfg.mccnn.sorted_channels());
    if (!cfg.mccnn.pretrained_word_path.empty())
        cfg.mccnn.pretrained_word_path = resolve_data_path(cfg.mccnn.pretrained_word_path);

    std::ofstream log(out_dir / "train.log");
    const McnnTrainOutput out =
        train_mccnn(corpus.docs, {}, cfg.mccnn, cfg.train, res.tok, corpus.label_names, &log);
    save_mccnn(out.file, (out_dir / "model.ckpt").string());
    echo_config(cfg, out_dir);
    if (out.pretrained_report)
        std::cout << "pretrained coverage " << fmt6(out.pretrained_report->coverage) << "\n";
    std::cout << "best_epoch=" << out.result.best_epoch
              << " best_val_acc=" << fmt6(out.result.best_val_accuracy) << "\n";
    std::cout << "checkpoint written to " << (out_dir / "model.ckpt").string() << "\n";
    return 0;
}

// --- eval -------------------------------------------------------------------

int cmd_eval(const std::string& ckpt_path, const std::string& corpus_path,
             const std::string& table_path, const std::string& dict_path) {
    const Corpus corpus = load_corpus(resolve_data_path(corpus_path));
    if (corpus.docs.empty()) throw UsageError("empty corpus: " + corpus_path);

    const std::string kind = checkpoint_model_type(resolve_data_path(ckpt_path));
    std::vector<int> y_pred;
    std::size_t n_classes = 0;
    if (kind == "mccnn") {
        const McnnModelFile file = load_mccnn(resolve_data_path(ckpt_path));
        std::vector<Channel> channels;
        for (const auto& ch : file.params.channels) channels.push_back(ch.spec.channel);
        LoadedResources res;
        res.load(table_path, dict_path, channels);
        y_pred = predict_mccnn(file, res.tok, corpus.docs);
        n_classes = file.params.n_classes;
    } else {
        const BaselineModelFile file = load_baseline(resolve_data_path(ckpt_path));
        LoadedResources res;
        res.load(table_path, dict_path, {file.channel});
        y_pred = predict_baseline(file, res.tok, corpus.docs);
        n_classes = file.model.n_classes;
    }
    std::vector<int> y_true;
    for (const auto& d : corpus.docs) y_true.push_back(d.label);

    MetricsReport report;
    report.config_name = "eval";
    report.folds.push_back(compute_metrics(y_true, y_pred, n_classes));
    report.aggregate();
    std::cout << render_report(report);
    return 0;
}

// --- cv ---------------------------------------------------------------------

int cmd_cv(const std::vector<std::string>& config_paths, const std::string& out_dir_str,
           std::size_t jobs_override, std::uint64_t seed_override, bool have_seed) {
    if (config_paths.empty()) throw UsageError("at least one --config required");
    const fs::path out_dir = out_dir_str;
    fs::create_directories(out_dir);

    std::vector<RunConfig> configs;
    for (const auto& p : config_paths) configs.push_back(RunConfig::load(p));
    for (auto& c : configs) {
        if (have_seed) c.train.seed = c.baseline.train.seed = seed_override;
        if (jobs_override > 0) c.jobs = jobs_override;
    }
    for (std::size_t i = 1; i < configs.size(); ++i) {
        if (configs[i].folds != configs[0].folds ||
            configs[i].repetitions != configs[0].repetitions ||
            configs[i].stratified != configs[0].stratified ||
            configs[i].train.seed != configs[0].train.seed ||
            configs[i].corpus != configs[0].corpus)
            throw UsageError("configurations must share corpus and fold plan for comparison");
    }

    const Corpus corpus = load_corpus(resolve_data_path(configs[0].corpus));
    if (corpus.docs.empty()) throw UsageError("empty corpus: " + configs[0].corpus);
    std::vector<int> labels;
    for (const auto& d : corpus.docs) labels.push_back(d.label);
    const FoldPlan plan = make_folds(corpus.docs.size(), labels, configs[0].folds,
                                     configs[0].repetitions, configs[0].train.seed,
                                     configs[0].stratified);

    std::vector<MetricsReport> reports;
    std::vector<LoadedResources> resources(configs.size());
    for (std::size_t i = 0; i < configs.size(); ++i) {
        RunConfig& cfg = configs[i];
        FoldRunner runner;
        if (cfg.model == "baseline") {
            resources[i].load(cfg.pinyin_table, cfg.word_dict, {cfg.baseline.channel});
            runner = make_baseline_runner(cfg.baseline, resources[i].tok, corpus.label_names);
        } else {
            resources[i].load(cfg.pinyin_table, cfg.word_dict, cfg.mccnn.sorted_channels());
            if (!cfg.mccnn.pretrained_word_path.empty())
                cfg.mccnn.pretrained_word_path = resolve_data_path(cfg.mccnn.pretrained_word_path);
            runner = make_mccnn_runner(cfg.mccnn, cfg.train, resources[i].tok, corpus.label_names);
        }
        MetricsReport report = run_cv(corpus, plan, runner, cfg.jobs, cfg.name);
        std::ofstream rf(out_dir / (cfg.name + ".report.txt"));
        rf << render_report(report);
        reports.push_back(std::move(report));
        std::ofstream(out_dir / (cfg.name + ".config.json")) << cfg.to_json().dump(2) << "\n";
    }

    // one comparison-grid row per configuration
    std::ostringstream grid;
    grid << "configuration\tF1\taccuracy\n";
    for (const auto& r : reports)
        grid << r.config_name << "\t" << fmt6(r.mean_weighted_f1) << "\t"
             << fmt6(r.mean_accuracy) << "\n";

    // pairwise significance over shared folds, on both scores
    std::ostringstream sig;
    sig << "a\tb\tmetric\tt\tdf\tp\n";
    for (std::size_t i = 0; i < reports.size(); ++i)
        for (std::size_t j = i + 1; j < reports.size(); ++j) {
            const auto ta = paired_ttest(reports[i].fold_accuracies(), reports[j].fold_accuracies());
            sig << reports[i].config_name << "\t" << reports[j].config_name << "\taccuracy\t"
                << fmt6(ta.t) << "\t" << fmt6(ta.df) << "\t" << fmt6(ta.p) << "\n";
            const auto tf = paired_ttest(reports[i].fold_f1s(), reports[j].fold_f1s());
            sig << reports[i].config_name << "\t" << reports[j].config_name << "\tweighted_f1\t"
                << fmt6(tf.t) << "\t" << fmt6(tf.df) << "\t" << fmt6(tf.p) << "\n";
        }

    std::ofstream(out_dir / "grid.tsv") << grid.str();
    std::ofstream(out_dir / "significance.tsv") << sig.str();
    std::cout << grid.str();
    if (reports.size() > 1) std::cout << "\n" << sig.str();
    return 0;
}

// --- ttest ------------------------------------------------------------------

std::vector<double> parse_fold_scores(const std::string& path, const std::string& metric) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open report: " + path);
    std::vector<double> scores;
    std::string line;
    const std::string key = metric + "=";
    while (std::getline(in, line)) {
        if (line.rfind("fold ", 0) != 0) continue;
        const auto pos = line.find(key);
        if (pos == std::string::npos)
            throw UsageError(path + ": fold line without " + metric);
        scores.push_back(std::stod(line.substr(pos + key.size())));
    }
    if (scores.empty()) throw UsageError(path + ": no fold lines found");
    return scores;
}

int cmd_ttest(const std::string& report_a, const std::string& report_b, const std::string& metric) {
    if (metric != "accuracy" && metric != "weighted_f1")
        throw UsageError("--metric must be accuracy or weighted_f1");
    const auto a = parse_fold_scores(resolve_data_path(report_a), metric);
    const auto b = parse_fold_scores(resolve_data_path(report_b), metric);
    if (a.size() != b.size())
        throw UsageError("reports have different fold counts (" + std::to_string(a.size()) +
                         " vs " + std::to_string(b.size()) + ")");
    const TTestResult r = paired_ttest(a, b);
    std::cout << "t=" << fmt6(r.t) << " df=" << fmt6(r.df) << " p=" << fmt6(r.p) << "\n";
    return 0;
}

// --- export-embeddings ------------------------------------------------------

int cmd_export(const std::string& ckpt_path, const std::string& channel_name_str,
               const std::string& out_path) {
    const McnnModelFile file = load_mccnn(resolve_data_path(ckpt_path));
    const Channel channel = channel_from_name(channel_name_str);
    if (out_path.empty()) {
        export_embeddings(file, channel, std::cout);
    } else {
        std::ofstream out(out_path);
        if (!out) throw std::runtime_error("cannot write " + out_path);
        export_embeddings(file, channel, out);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Chinese text classification lab: multi-channel CNN, hashed-ngram baseline, "
                 "cross-validation and significance testing over word/character/pinyin channels"};
    app.require_subcommand(1);

    // stats
    auto* stats = app.add_subcommand("stats", "Per-channel corpus statistics (vocab size, length, OOV rate)");
    std::string s_corpus, s_test, s_table, s_dict;
    std::vector<std::string> s_channels;
    std::size_t s_min_count = 1;
    bool s_type_based = false;
    std::uint64_t s_seed = 1;
    stats->add_option("corpus", s_corpus, "corpus file (label<TAB>text per line)")->required();
    stats->add_option("--test", s_test, "test corpus; default holds out a seeded 20%");
    stats->add_option("--channel", s_channels, "channels to report (default all three)");
    stats->add_option("--pinyin-table", s_table, "char<TAB>pinyin table");
    stats->add_option("--word-dict", s_dict, "dictionary, one word per line");
    stats->add_option("--min-count", s_min_count, "vocabulary frequency threshold");
    stats->add_flag("--oov-types", s_type_based, "type-based instead of occurrence-based OOV rate");
    stats->add_option("--seed", s_seed, "seed for the held-out split");

    // train
    auto* train_cmd = app.add_subcommand("train", "Train a model and write a checkpoint");
    std::string t_config, t_out = "out";
    std::string t_corpus, t_table, t_dict, t_pretrained;
    std::vector<std::string> t_channels;
    std::uint64_t t_seed = 0;
    bool t_have_seed = false;
    train_cmd->add_option("--config", t_config, "JSON run configuration")->required();
    train_cmd->add_option("--out", t_out, "output directory");
    train_cmd->add_option("--corpus", t_corpus, "override corpus path");
    train_cmd->add_option("--pinyin-table", t_table, "override pinyin table path");
    train_cmd->add_option("--word-dict", t_dict, "override word dictionary path");
    train_cmd->add_option("--pretrained", t_pretrained, "override pretrained word vectors");
    train_cmd->add_option("--channel", t_channels, "override channel set");
    train_cmd->add_option("--seed", t_seed, "override seed")->each([&](const std::string&) { t_have_seed = true; });

    // eval
    auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint on a labeled corpus");
    std::string e_ckpt, e_corpus, e_table, e_dict;
    eval_cmd->add_option("checkpoint", e_ckpt)->required();
    eval_cmd->add_option("corpus", e_corpus)->required();
    eval_cmd->add_option("--pinyin-table", e_table, "char<TAB>pinyin table");
    eval_cmd->add_option("--word-dict", e_dict, "dictionary, one word per line");

    // cv
    auto* cv_cmd = app.add_subcommand("cv", "Cross-validated comparison of one or more configurations");
    std::vector<std::string> c_configs;
    std::string c_out = "out";
    std::size_t c_jobs = 0;
    std::uint64_t c_seed = 0;
    bool c_have_seed = false;
    cv_cmd->add_option("--config", c_configs, "JSON run configuration (repeatable)")->required();
    cv_cmd->add_option("--out", c_out, "output directory");
    cv_cmd->add_option("--jobs", c_jobs, "parallel fold workers");
    cv_cmd->add_option("--seed", c_seed, "override seed for all configurations")
        ->each([&](const std::string&) { c_have_seed = true; });

    // ttest
    auto* tt_cmd = app.add_subcommand("ttest", "Paired t-test between two CV reports");
    std::string tt_a, tt_b, tt_metric = "accuracy";
    tt_cmd->add_option("report_a", tt_a)->required();
    tt_cmd->add_option("report_b", tt_b)->required();
    tt_cmd->add_option("--metric", tt_metric, "accuracy or weighted_f1");

    // export-embeddings
    auto* ex_cmd = app.add_subcommand("export-embeddings", "Write a channel's embedding table as text vectors");
    std::string ex_ckpt, ex_channel, ex_out;
    ex_cmd->add_option("checkpoint", ex_ckpt)->required();
    ex_cmd->add_option("--channel", ex_channel, "pinyin, character or word")->required();
    ex_cmd->add_option("--out", ex_out, "output file (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (stats->parsed())
            return cmd_stats(s_corpus, s_test, s_channels, s_table, s_dict, s_min_count,
                             s_type_based, s_seed);
        if (train_cmd->parsed()) {
            RunConfig cfg = RunConfig::load(t_config);
            if (!t_corpus.empty()) cfg.corpus = t_corpus;
            if (!t_table.empty()) cfg.pinyin_table = t_table;
            if (!t_dict.empty()) cfg.word_dict = t_dict;
            if (!t_pretrained.empty()) cfg.mccnn.pretrained_word_path = t_pretrained;
            if (!t_channels.empty()) {
                cfg.mccnn.channels.clear();
                for (const auto& n : t_channels) cfg.mccnn.channels.push_back(channel_from_name(n));
            }
            if (t_have_seed) cfg.train.seed = cfg.baseline.train.seed = t_seed;
            return cmd_train(std::move(cfg), t_out);
        }
        if (eval_cmd->parsed()) return cmd_eval(e_ckpt, e_corpus, e_table, e_dict);
        if (cv_cmd->parsed()) return cmd_cv(c_configs, c_out, c_jobs, c_seed, c_have_seed);
        if (tt_cmd->parsed()) return cmd_ttest(tt_a, tt_b, tt_metric);
        if (ex_cmd->parsed()) return cmd_export(ex_ckpt, ex_channel, ex_out);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
