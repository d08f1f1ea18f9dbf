#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

namespace clustval {

/// Text preprocessing switches. Stages run in the order the fields are listed.
struct TokenizerConfig {
    bool emoji_to_cldr = true;
    bool lowercase = true;
    bool strip_punctuation = true;
    bool remove_stopwords = true;
    bool stem = false;
    std::string stopword_list_id = "en_v1";

    bool operator==(const TokenizerConfig&) const = default;

    /// Defaults used for top words, keyness and coherence.
    static TokenizerConfig analysis() { return {}; }
    /// Topic-model path: stopwords removed and words stemmed.
    static TokenizerConfig topic_model() {
        TokenizerConfig c;
        c.stem = true;
        return c;
    }
    /// Only lowercasing and punctuation stripping.
    static TokenizerConfig minimal() {
        TokenizerConfig c;
        c.remove_stopwords = false;
        return c;
    }
};

void to_json(nlohmann::json& j, const TokenizerConfig& c);
void from_json(const nlohmann::json& j, TokenizerConfig& c);

/// Emoji codepoint sequences mapped to hyphenated CLDR short names.
class EmojiTable {
public:
    EmojiTable() = default;
    /// Parses lines of `<hex> <hex>...\t<short-name>`.
    static EmojiTable load(const std::filesystem::path& path);
    void add(std::u32string sequence, std::string name);

    /// Longest entry matching `text` at `pos`; returns its length (0 if none).
    std::size_t match(std::u32string_view text, std::size_t pos, const std::string** name) const;
    std::size_t size() const noexcept { return names_.size(); }

private:
    std::unordered_map<std::u32string, std::string> names_;
    std::unordered_set<char32_t> first_codepoints_;
    std::size_t max_length_ = 0;
};

class StopwordList {
public:
    StopwordList() = default;
    explicit StopwordList(std::unordered_set<std::string> words) : words_(std::move(words)) {}
    static StopwordList load(const std::filesystem::path& path);

    bool contains(std::string_view word) const { return words_.count(std::string(word)) > 0; }
    std::size_t size() const noexcept { return words_.size(); }

private:
    std::unordered_set<std::string> words_;
};

/// Bundled tables, loaded once from the data directory.
const EmojiTable& default_emoji_table();
const StopwordList& stopword_list(const std::string& id);

// UTF-8 helpers. Invalid bytes decode to U+FFFD.
std::u32string utf8_decode(std::string_view text);
std::string utf8_encode(std::u32string_view text);
void utf8_append(std::string& out, char32_t cp);

/// Replaces every mapped emoji sequence by its short name. Everything else,
/// including unmapped emoji, is copied through unchanged.
std::string normalize_emoji(std::string_view text);
std::string normalize_emoji(std::string_view text, const EmojiTable& table);

/// Deterministic tokenization: emoji names, lowercasing, punctuation
/// stripping, stopword removal, stemming, then whitespace splitting.
std::vector<std::string> tokenize(std::string_view text, const TokenizerConfig& config);

/// Porter stemmer (reference C implementation rules). Input must be lowercase.
std::string stem(std::string_view token);

/// Counts whitespace-separated words.
std::size_t word_count(std::string_view text);

}  // namespace clustval
