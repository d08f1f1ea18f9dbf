#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "clustval/text.hpp"

namespace clustval {

struct Document {
    std::string id;
    std::string raw_text;
    std::vector<std::string> tokens;
};

enum class CorpusFormat { ndjson, csv };

CorpusFormat parse_corpus_format(std::string_view name);
/// ndjson unless the extension is .csv.
CorpusFormat corpus_format_for(const std::filesystem::path& path);

/// Ordered collection of documents with a token-count vocabulary.
///
/// Immutable once built; `vocab` always equals a recount over `documents`.
class Corpus {
public:
    Corpus() = default;

    /// Tokenizes each raw text with `config`. Throws Error on empty or
    /// duplicate ids.
    static Corpus from_texts(std::vector<std::pair<std::string, std::string>> records,
                             const TokenizerConfig& config);
    /// Uses the tokens already present on each document.
    static Corpus from_documents(std::vector<Document> documents);

    /// Same documents re-tokenized under a different config.
    Corpus retokenized(const TokenizerConfig& config) const;

    const std::vector<Document>& documents() const noexcept { return documents_; }
    const Document& operator[](std::size_t i) const { return documents_[i]; }
    std::size_t size() const noexcept { return documents_.size(); }
    bool empty() const noexcept { return documents_.empty(); }

    const std::map<std::string, std::size_t>& vocab() const noexcept { return vocab_; }
    std::size_t n_tokens() const noexcept { return n_tokens_; }

    std::optional<std::size_t> index_of(std::string_view id) const;
    std::vector<std::string> ids() const;

private:
    std::vector<Document> documents_;
    std::map<std::string, std::size_t> vocab_;
    std::unordered_map<std::string, std::size_t> index_;
    std::size_t n_tokens_ = 0;

    void index();
};

struct CorpusLoadOptions {
    TokenizerConfig tokenizer = TokenizerConfig::analysis();
    /// Longest accepted raw text, in Unicode codepoints.
    std::size_t max_text_length = 10000;
};

/// Reads an NDJSON (`{"id":..,"text":..}` per line) or CSV (`id,text`) corpus.
/// Errors carry the 1-based line number of the offending record.
Corpus load_corpus(const std::filesystem::path& path, CorpusFormat format, const CorpusLoadOptions& options = {});

/// Writes NDJSON with id, text and tokens per line.
void save_corpus_ndjson(const Corpus& corpus, const std::filesystem::path& path);

}  // namespace clustval
