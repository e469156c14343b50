#include "fixtures.hpp"

#include <unistd.h>

#include <atomic>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "hantext/tensor.hpp"

namespace fixtures {

using namespace hantext;

const std::vector<std::pair<std::string, std::string>>& pinyin_pairs() {
    static const std::vector<std::pair<std::string, std::string>> pairs = {
        {"中", "zhong"}, {"国", "guo"}, {"人", "ren"}, {"民", "min"}, {"好", "hao"},
        {"大", "da"}, {"学", "xue"}, {"生", "sheng"}, {"天", "tian"}, {"地", "di"},
        {"山", "shan"}, {"水", "shui"}, {"火", "huo"}, {"木", "mu"}, {"金", "jin"},
        {"土", "tu"}, {"日", "ri"}, {"月", "yue"}, {"星", "xing"}, {"风", "feng"},
        {"云", "yun"}, {"雨", "yu"}, {"电", "dian"}, {"车", "che"}, {"马", "ma"},
        {"牛", "niu"}, {"羊", "yang"}, {"鱼", "yu"}, {"鸟", "niao"}, {"花", "hua"},
        {"草", "cao"}, {"树", "shu"}, {"书", "shu"}, {"门", "men"}, {"一", "yi"},
        {"二", "er"}, {"三", "san"}, {"四", "si"}, {"五", "wu"}, {"六", "liu"},
        {"七", "qi"}, {"八", "ba"}, {"九", "jiu"}, {"十", "shi"}, {"是", "shi"},
        {"时", "shi"}, {"东", "dong"}, {"西", "xi"}, {"南", "nan"}, {"北", "bei"},
        {"上", "shang"}, {"下", "xia"}, {"左", "zuo"}, {"右", "you"}, {"前", "qian"},
        {"后", "hou"}, {"红", "hong"}, {"黄", "huang"}, {"蓝", "lan"}, {"绿", "lv"},
        {"白", "bai"}, {"黑", "hei"}, {"甲", "jia"}, {"乙", "yi"}, {"丙", "bing"},
        {"丁", "ding"}, {"戊", "wu"}, {"己", "ji"}, {"庚", "geng"}, {"辛", "xin"},
        {"壬", "ren"}, {"癸", "gui"}};
    return pairs;
}

PinyinTable demo_table() {
    PinyinTable t;
    for (const auto& [ch, py] : pinyin_pairs()) {
        const auto cps = decode_utf8(ch);
        t.add(cps[0], py);
    }
    return t;
}

std::string table_tsv() {
    std::ostringstream out;
    out << "# char<TAB>pinyin\n";
    for (const auto& [ch, py] : pinyin_pairs()) out << ch << "\t" << py << "\n";
    return out.str();
}

TempDir::TempDir() {
    static std::atomic<unsigned> counter{0};
    const auto base = std::filesystem::temp_directory_path();
    path_ = base / ("hantext-test-" + std::to_string(::getpid()) + "-" +
                    std::to_string(counter.fetch_add(1)));
    std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
}

std::string TempDir::write(const std::string& name, const std::string& content) const {
    const auto p = path_ / name;
    std::ofstream out(p, std::ios::binary);
    out << content;
    return p.string();
}

std::string corpus_tsv(const Corpus& corpus) {
    std::ostringstream out;
    for (const auto& d : corpus.docs)
        out << corpus.label_names[static_cast<std::size_t>(d.label)] << "\t" << d.text << "\n";
    return out.str();
}

Corpus separable_corpus(std::size_t n_docs, std::uint64_t seed) {
    static const std::vector<std::string> signal = {"红", "蓝", "绿"};
    static const std::vector<std::string> filler = {"天", "地", "山", "水", "木",
                                                    "金", "土", "日", "月", "星"};
    Rng rng(seed);
    Corpus corpus;
    corpus.label_names = {"neg", "neu", "pos"};
    for (std::size_t i = 0; i < n_docs; ++i) {
        const int label = static_cast<int>(i % 3);
        std::string text;
        for (int t = 0; t < 10; ++t) {
            // three signal characters at random slots, fillers elsewhere
            if (t == 2 || t == 5 || t == 8)
                text += signal[static_cast<std::size_t>(label)];
            else
                text += filler[rng.next_index(filler.size())];
        }
        Document doc;
        doc.id = "sep-" + std::to_string(i);
        doc.text = text;
        doc.label = label;
        corpus.docs.push_back(std::move(doc));
    }
    return corpus;
}

SplitSignalFixture split_signal_fixture(std::size_t docs_per_class_per_type, std::uint64_t seed) {
    SplitSignalFixture fx;
    fx.table = demo_table();
    fx.corpus.label_names = {"a", "b", "c"};

    // word-signal: three 6-character windows of the cyclic string 甲乙丙...
    static const std::vector<std::string> cycle = {"甲", "乙", "丙"};
    std::vector<std::string> words;
    for (int off = 0; off < 3; ++off) {
        std::string w;
        for (int j = 0; j < 6; ++j) w += cycle[static_cast<std::size_t>((off + j) % 3)];
        words.push_back(w);
    }
    // char-signal: one class character, merged with a document-unique partner
    static const std::vector<std::string> class_chars = {"丁", "戊", "己"};

    std::ostringstream dict_text;
    for (const auto& w : words) {
        fx.dict.add(w);
        dict_text << w << "\n";
    }

    Rng rng(seed);
    char32_t unique_cp = 0x5100;  // CJK block, disjoint from the table chars
    std::size_t doc_id = 0;
    for (int label = 0; label < 3; ++label) {
        for (std::size_t i = 0; i < docs_per_class_per_type; ++i) {
            Document doc;
            doc.id = "word-" + std::to_string(doc_id++);
            doc.text = words[static_cast<std::size_t>(label)] + words[static_cast<std::size_t>(label)];
            doc.label = label;
            fx.corpus.docs.push_back(std::move(doc));
        }
        for (std::size_t i = 0; i < docs_per_class_per_type; ++i) {
            const std::string partner = encode_utf8(unique_cp++);
            const std::string merged = class_chars[static_cast<std::size_t>(label)] + partner;
            fx.dict.add(merged);
            dict_text << merged << "\n";
            Document doc;
            doc.id = "char-" + std::to_string(doc_id++);
            doc.text = merged + merged + merged;
            doc.label = label;
            fx.corpus.docs.push_back(std::move(doc));
        }
    }
    // deterministic shuffle so folds mix the two document types
    rng.shuffle(fx.corpus.docs);
    fx.dict_text = dict_text.str();
    return fx;
}

}  // namespace fixtures
