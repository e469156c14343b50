#ifndef HANTEXT_TEXTPREP_HPP
#define HANTEXT_TEXTPREP_HPP

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace hantext {

enum class Channel { Pinyin, Character, Word };

inline const char* channel_name(Channel c) {
    switch (c) {
        case Channel::Pinyin: return "pinyin";
        case Channel::Character: return "character";
        case Channel::Word: return "word";
    }
    return "?";
}

inline Channel channel_from_name(const std::string& s) {
    if (s == "pinyin") return Channel::Pinyin;
    if (s == "character") return Channel::Character;
    if (s == "word") return Channel::Word;
    throw std::invalid_argument("unknown channel: " + s);
}

struct Document {
    std::string id;
    std::string text;
    int label = 0;
};

struct TokenSequence {
    Channel channel = Channel::Character;
    std::vector<std::string> tokens;
    std::vector<std::size_t> ids;  // filled by encode()
};

constexpr std::size_t kPadId = 0;
constexpr std::size_t kUnkId = 1;
inline const char* kPadToken = "<pad>";
inline const char* kUnkToken = "<unk>";

// --- UTF-8 ------------------------------------------------------------------

// Decode one UTF-8 scalar starting at s[i]; advances i. Throws on malformed
// input (truncated sequences, overlong encodings, surrogates, > U+10FFFF).
inline char32_t utf8_next(const std::string& s, std::size_t& i) {
    auto fail = [&]() -> char32_t {
        throw std::invalid_argument("invalid UTF-8 at byte offset " + std::to_string(i));
    };
    const unsigned char b0 = static_cast<unsigned char>(s[i]);
    if (b0 < 0x80) { ++i; return b0; }
    int len;
    char32_t cp;
    if ((b0 & 0xE0) == 0xC0) { len = 2; cp = b0 & 0x1F; }
    else if ((b0 & 0xF0) == 0xE0) { len = 3; cp = b0 & 0x0F; }
    else if ((b0 & 0xF8) == 0xF0) { len = 4; cp = b0 & 0x07; }
    else return fail();
    if (i + len > s.size()) return fail();
    for (int k = 1; k < len; ++k) {
        const unsigned char b = static_cast<unsigned char>(s[i + k]);
        if ((b & 0xC0) != 0x80) return fail();
        cp = (cp << 6) | (b & 0x3F);
    }
    static constexpr char32_t kMin[5] = {0, 0, 0x80, 0x800, 0x10000};
    if (cp < kMin[len] || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) return fail();
    i += len;
    return cp;
}

inline std::string encode_utf8(char32_t cp) {
    std::string out;
    if (cp < 0x80) out.push_back(static_cast<char>(cp));
    else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
    return out;
}

inline std::vector<char32_t> decode_utf8(const std::string& s) {
    std::vector<char32_t> out;
    std::size_t i = 0;
    while (i < s.size()) out.push_back(utf8_next(s, i));
    return out;
}

inline bool is_unicode_space(char32_t cp) {
    switch (cp) {
        case U' ': case U'\t': case U'\n': case U'\r': case U'\f': case U'\v':
        case 0x00A0: case 0x2000: case 0x2001: case 0x2002: case 0x2003:
        case 0x2004: case 0x2005: case 0x2006: case 0x2007: case 0x2008:
        case 0x2009: case 0x200A: case 0x2028: case 0x2029: case 0x202F:
        case 0x205F: case 0x3000:
            return true;
        default:
            return false;
    }
}

inline bool is_cjk(char32_t cp) {
    return (cp >= 0x4E00 && cp <= 0x9FFF) ||    // CJK Unified Ideographs
           (cp >= 0x3400 && cp <= 0x4DBF) ||    // Extension A
           (cp >= 0xF900 && cp <= 0xFAFF) ||    // Compatibility Ideographs
           (cp >= 0x20000 && cp <= 0x2A6DF);    // Extension B
}

// --- pinyin table -----------------------------------------------------------

// One pinyin per character (the most common reading, tones already stripped
// at table-build time). Rows: `char<TAB>pinyin`, `#` starts a comment line.
class PinyinTable {
public:
    static PinyinTable from_stream(std::istream& in, const std::string& origin = "<stream>") {
        PinyinTable t;
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty() || line[0] == '#') continue;
            const auto tab = line.find('\t');
            if (tab == std::string::npos)
                throw std::runtime_error(origin + ":" + std::to_string(lineno) + ": expected char<TAB>pinyin");
            const std::string ch = line.substr(0, tab);
            const std::string py = line.substr(tab + 1);
            const auto cps = decode_utf8(ch);
            if (cps.size() != 1 || py.empty())
                throw std::runtime_error(origin + ":" + std::to_string(lineno) + ": malformed row");
            t.map_[cps[0]] = py;
        }
        return t;
    }

    static PinyinTable load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("cannot open pinyin table: " + path);
        return from_stream(in, path);
    }

    const std::string* lookup(char32_t cp) const {
        auto it = map_.find(cp);
        return it == map_.end() ? nullptr : &it->second;
    }

    std::size_t size() const { return map_.size(); }

    void add(char32_t cp, const std::string& pinyin) { map_[cp] = pinyin; }

private:
    std::unordered_map<char32_t, std::string> map_;
};

// --- word dictionary --------------------------------------------------------

// Dictionary for forward maximum matching, one word per line. Words are kept
// as code point sequences so matching advances by scalars, not bytes.
class WordDictionary {
public:
    static WordDictionary from_stream(std::istream& in) {
        WordDictionary d;
        std::string line;
        while (std::getline(in, line)) {
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty() || line[0] == '#') continue;
            d.add(line);
        }
        return d;
    }

    static WordDictionary load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("cannot open word dictionary: " + path);
        return from_stream(in);
    }

    void add(const std::string& word) {
        const std::size_t len = decode_utf8(word).size();
        if (len == 0) return;
        words_.insert(word);
        max_len_ = std::max(max_len_, len);
    }

    bool contains(const std::string& word) const { return words_.count(word) != 0; }
    std::size_t max_word_len() const { return max_len_; }
    std::size_t size() const { return words_.size(); }

private:
    std::unordered_set<std::string> words_;
    std::size_t max_len_ = 0;
};

// --- tokenizers -------------------------------------------------------------

// One token per Unicode scalar, whitespace dropped.
inline TokenSequence tokenize_characters(const std::string& text) {
    TokenSequence seq;
    seq.channel = Channel::Character;
    for (char32_t cp : decode_utf8(text))
        if (!is_unicode_space(cp)) seq.tokens.push_back(encode_utf8(cp));
    return seq;
}

// Per-character pinyin lookup; characters without a table entry (including
// all non-CJK) pass through as their own token.
inline TokenSequence tokenize_pinyin(const std::string& text, const PinyinTable& table) {
    TokenSequence seq;
    seq.channel = Channel::Pinyin;
    for (char32_t cp : decode_utf8(text)) {
        if (is_unicode_space(cp)) continue;
        if (const std::string* py = table.lookup(cp))
            seq.tokens.push_back(*py);
        else
            seq.tokens.push_back(encode_utf8(cp));
    }
    return seq;
}

// Forward maximum matching: at each position emit the longest dictionary word
// starting there, falling back to the single character.
inline TokenSequence tokenize_words(const std::string& text, const WordDictionary& dict) {
    TokenSequence seq;
    seq.channel = Channel::Word;
    std::vector<char32_t> cps;
    for (char32_t cp : decode_utf8(text))
        if (!is_unicode_space(cp)) cps.push_back(cp);

    std::size_t pos = 0;
    while (pos < cps.size()) {
        const std::size_t longest = std::min(dict.max_word_len(), cps.size() - pos);
        std::size_t matched = 0;
        std::string candidate;
        for (std::size_t len = longest; len >= 1 && matched == 0; --len) {
            candidate.clear();
            for (std::size_t k = 0; k < len; ++k) candidate += encode_utf8(cps[pos + k]);
            if (len == 1 || dict.contains(candidate)) matched = len;
        }
        if (matched == 0) {  // dict.max_word_len() == 0
            candidate = encode_utf8(cps[pos]);
            matched = 1;
        }
        seq.tokens.push_back(candidate);
        pos += matched;
    }
    return seq;
}

// --- vocabulary -------------------------------------------------------------

class Vocabulary {
public:
    Vocabulary() = default;

    // Built from training-split sequences only. Ids by descending frequency,
    // ties by lexicographic token order; PAD=0, UNK=1.
    static Vocabulary build(const std::vector<TokenSequence>& train_seqs, std::size_t min_count) {
        if (train_seqs.empty())
            throw std::invalid_argument("build_vocabulary: empty training set");
        Vocabulary v;
        v.channel_ = train_seqs.front().channel;
        v.min_count_ = min_count;
        std::unordered_map<std::string, std::size_t> counts;
        for (const auto& seq : train_seqs) {
            if (seq.channel != v.channel_)
                throw std::invalid_argument("build_vocabulary: mixed channels");
            for (const auto& tok : seq.tokens) ++counts[tok];
        }
        std::vector<std::pair<std::string, std::size_t>> kept;
        for (const auto& [tok, n] : counts)
            if (n >= min_count) kept.emplace_back(tok, n);
        std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
            if (a.second != b.second) return a.second > b.second;
            return a.first < b.first;
        });
        v.id_to_token_ = {kPadToken, kUnkToken};
        for (const auto& [tok, n] : kept) {
            v.token_to_id_[tok] = v.id_to_token_.size();
            v.id_to_token_.push_back(tok);
            v.frequencies_[tok] = n;
        }
        return v;
    }

    Channel channel() const { return channel_; }
    void set_channel(Channel c) { channel_ = c; }

    // total ids including PAD and UNK
    std::size_t size() const { return id_to_token_.size(); }
    // stored tokens only, the quantity reported as "vocabulary size"
    std::size_t token_count() const { return id_to_token_.size() - 2; }

    bool contains(const std::string& tok) const { return token_to_id_.count(tok) != 0; }

    std::size_t id_of(const std::string& tok) const {
        auto it = token_to_id_.find(tok);
        return it == token_to_id_.end() ? kUnkId : it->second;
    }

    const std::string& token_of(std::size_t id) const {
        if (id >= id_to_token_.size())
            throw std::out_of_range("token_of: id out of range");
        return id_to_token_[id];
    }

    std::size_t frequency(const std::string& tok) const {
        auto it = frequencies_.find(tok);
        return it == frequencies_.end() ? 0 : it->second;
    }

    std::size_t min_count() const { return min_count_; }

    // ids 2.. in order, for serialization and embedding export
    const std::vector<std::string>& id_to_token() const { return id_to_token_; }

    // Rebuild from an ordered token list (ids 2..n+1), e.g. from a checkpoint.
    static Vocabulary from_tokens(Channel channel, const std::vector<std::string>& tokens) {
        Vocabulary v;
        v.channel_ = channel;
        v.id_to_token_ = {kPadToken, kUnkToken};
        for (const auto& tok : tokens) {
            v.token_to_id_[tok] = v.id_to_token_.size();
            v.id_to_token_.push_back(tok);
        }
        return v;
    }

private:
    Channel channel_ = Channel::Character;
    std::unordered_map<std::string, std::size_t> token_to_id_;
    std::vector<std::string> id_to_token_;
    std::unordered_map<std::string, std::size_t> frequencies_;
    std::size_t min_count_ = 1;
};

// Unknown tokens map to UNK; truncation at max_len. PAD-filling happens at
// batch assembly, not here.
inline TokenSequence encode(const TokenSequence& seq, const Vocabulary& vocab, std::size_t max_len) {
    if (seq.channel != vocab.channel())
        throw std::invalid_argument("encode: channel mismatch");
    if (max_len < 1) throw std::invalid_argument("encode: max_len must be >= 1");
    TokenSequence out;
    out.channel = seq.channel;
    const std::size_t n = std::min(seq.tokens.size(), max_len);
    out.tokens.assign(seq.tokens.begin(), seq.tokens.begin() + n);
    out.ids.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.ids.push_back(vocab.id_of(out.tokens[i]));
    return out;
}

// --- corpus stats -----------------------------------------------------------

struct ChannelStats {
    std::size_t vocab_size = 0;  // excluding PAD/UNK
    double avg_length = 0.0;     // mean tokens per document over train+test
    double oov_rate = 0.0;       // test-set occurrences (or types) unseen in training
};

enum class OovMode { Occurrence, Type };

inline ChannelStats corpus_stats(const std::vector<TokenSequence>& train,
                                 const std::vector<TokenSequence>& test,
                                 std::size_t min_count = 1,
                                 OovMode mode = OovMode::Occurrence) {
    if (test.empty()) throw std::invalid_argument("corpus_stats: empty test set");
    const Vocabulary vocab = Vocabulary::build(train, min_count);
    ChannelStats s;
    s.vocab_size = vocab.token_count();

    std::size_t total_tokens = 0;
    for (const auto& seq : train) total_tokens += seq.tokens.size();
    for (const auto& seq : test) total_tokens += seq.tokens.size();
    s.avg_length = static_cast<double>(total_tokens) / static_cast<double>(train.size() + test.size());

    if (mode == OovMode::Occurrence) {
        std::size_t unseen = 0, total = 0;
        for (const auto& seq : test)
            for (const auto& tok : seq.tokens) {
                ++total;
                if (!vocab.contains(tok)) ++unseen;
            }
        s.oov_rate = total == 0 ? 0.0 : static_cast<double>(unseen) / static_cast<double>(total);
    } else {
        std::unordered_set<std::string> types, unseen;
        for (const auto& seq : test)
            for (const auto& tok : seq.tokens) {
                types.insert(tok);
                if (!vocab.contains(tok)) unseen.insert(tok);
            }
        s.oov_rate = types.empty() ? 0.0 : static_cast<double>(unseen.size()) / static_cast<double>(types.size());
    }
    return s;
}

// --- corpus file ------------------------------------------------------------

struct Corpus {
    std::vector<Document> docs;
    std::vector<std::string> label_names;  // index = class id, first-appearance order
    std::size_t n_classes() const { return label_names.size(); }
};

/// One document per line: `label<TAB>text`. Labels are arbitrary strings
// mapped to contiguous indices by first appearance.
inline Corpus load_corpus_stream(std::istream& in, const std::string& origin = "<stream>") {
    Corpus corpus;
    std::map<std::string, int> label_ids;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto tab = line.find('\t');
        if (tab == std::string::npos)
            throw std::runtime_error(origin + ":" + std::to_string(lineno) + ": expected label<TAB>text");
        std::string label = line.substr(0, tab);
        std::string text = line.substr(tab + 1);
        const auto first = text.find_first_not_of(" \t");
        if (first == std::string::npos)
            throw std::runtime_error(origin + ":" + std::to_string(lineno) + ": empty document text");
        auto it = label_ids.find(label);
        if (it == label_ids.end()) {
            it = label_ids.emplace(label, static_cast<int>(corpus.label_names.size())).first;
            corpus.label_names.push_back(label);
        }
        Document doc;
        doc.id = origin + ":" + std::to_string(lineno);
        doc.text = text;
        doc.label = it->second;
        corpus.docs.push_back(std::move(doc));
    }
    return corpus;
}

inline Corpus load_corpus(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open corpus: " + path);
    return load_corpus_stream(in, path);
}

}  // namespace hantext

#endif
