#ifndef HANTEXT_TEST_FIXTURES_HPP
#define HANTEXT_TEST_FIXTURES_HPP

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "hantext/textprep.hpp"

namespace fixtures {

// character -> tone-stripped pinyin pairs used by all test corpora
const std::vector<std::pair<std::string, std::string>>& pinyin_pairs();

hantext::PinyinTable demo_table();
std::string table_tsv();

// Temporary directory removed on destruction.
class TempDir {
public:
    TempDir();
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::string write(const std::string& name, const std::string& content) const;

private:
    std::filesystem::path path_;
};

std::string corpus_tsv(const hantext::Corpus& corpus);

// 3-class corpus separable in every single channel: one class-specific
// character per class plus shared filler characters, all pinyin-covered,
// no multi-character dictionary words.
hantext::Corpus separable_corpus(std::size_t n_docs, std::uint64_t seed);

// Corpus whose class signal is split across channels: half the documents are
// classifiable only from whole-word tokens (period-3 cyclic 6-character words
// whose character n-grams up to length 5 are identical across classes), half
// only at character level (a per-class character always merged by the
// dictionary into a document-unique word, so the word channel sees it as UNK
// at test time).
struct SplitSignalFixture {
    hantext::Corpus corpus;
    hantext::WordDictionary dict;
    hantext::PinyinTable table;
    std::string dict_text;  // dictionary file content, for CLI-level tests
};
SplitSignalFixture split_signal_fixture(std::size_t docs_per_class_per_type, std::uint64_t seed);

}  // namespace fixtures

#endif
