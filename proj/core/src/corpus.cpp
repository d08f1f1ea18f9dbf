#include "clustval/corpus.hpp"

#include <fstream>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "clustval/csv.hpp"
#include "clustval/error.hpp"

namespace clustval {

using json = nlohmann::json;

CorpusFormat parse_corpus_format(std::string_view name) {
    if (name == "ndjson" || name == "jsonl") return CorpusFormat::ndjson;
    if (name == "csv") return CorpusFormat::csv;
    throw Error("unknown corpus format: " + std::string(name));
}

CorpusFormat corpus_format_for(const std::filesystem::path& path) {
    return path.extension() == ".csv" ? CorpusFormat::csv : CorpusFormat::ndjson;
}

void Corpus::index() {
    vocab_.clear();
    index_.clear();
    n_tokens_ = 0;
    for (std::size_t i = 0; i < documents_.size(); ++i) {
        const auto& doc = documents_[i];
        if (doc.id.empty()) throw Error("document " + std::to_string(i) + " has an empty id");
        if (!index_.emplace(doc.id, i).second) throw Error("duplicate document id: " + doc.id);
        for (const auto& t : doc.tokens) ++vocab_[t];
        n_tokens_ += doc.tokens.size();
    }
}

Corpus Corpus::from_texts(std::vector<std::pair<std::string, std::string>> records, const TokenizerConfig& config) {
    Corpus c;
    c.documents_.reserve(records.size());
    for (auto& [id, text] : records) {
        auto tokens = tokenize(text, config);
        c.documents_.push_back({std::move(id), std::move(text), std::move(tokens)});
    }
    c.index();
    return c;
}

Corpus Corpus::from_documents(std::vector<Document> documents) {
    Corpus c;
    c.documents_ = std::move(documents);
    c.index();
    return c;
}

Corpus Corpus::retokenized(const TokenizerConfig& config) const {
    std::vector<Document> docs;
    docs.reserve(documents_.size());
    for (const auto& d : documents_) docs.push_back({d.id, d.raw_text, tokenize(d.raw_text, config)});
    return from_documents(std::move(docs));
}

std::optional<std::size_t> Corpus::index_of(std::string_view id) const {
    if (auto it = index_.find(std::string(id)); it != index_.end()) return it->second;
    return std::nullopt;
}

std::vector<std::string> Corpus::ids() const {
    std::vector<std::string> out;
    out.reserve(documents_.size());
    for (const auto& d : documents_) out.push_back(d.id);
    return out;
}

namespace {

struct RawRecord {
    std::string id;
    std::string text;
    std::size_t line;
};

std::vector<RawRecord> read_ndjson(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open corpus: " + path.string());
    std::vector<RawRecord> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw ParseError(std::string("malformed JSON record: ") + e.what(), line_no);
        }
        if (!j.is_object() || !j.contains("id") || !j.contains("text"))
            throw ParseError("record needs \"id\" and \"text\" fields", line_no);
        const auto& id = j["id"];
        if (!j["text"].is_string()) throw ParseError("\"text\" must be a string", line_no);
        std::string id_str = id.is_string() ? id.get<std::string>() : id.is_number_integer() ? id.dump() : "";
        out.push_back({std::move(id_str), j["text"].get<std::string>(), line_no});
    }
    return out;
}

std::vector<RawRecord> read_csv(const std::filesystem::path& path) {
    auto records = csv::read_file(path);
    if (records.empty()) return {};
    const auto& header = records.front().fields;
    int id_col = -1, text_col = -1;
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == "id") id_col = static_cast<int>(i);
        if (header[i] == "text") text_col = static_cast<int>(i);
    }
    if (id_col < 0 || text_col < 0) throw ParseError("CSV header must contain id and text", 1);
    std::vector<RawRecord> out;
    for (std::size_t r = 1; r < records.size(); ++r) {
        const auto& rec = records[r];
        if (rec.fields.size() != header.size())
            throw ParseError("expected " + std::to_string(header.size()) + " fields, got " +
                                 std::to_string(rec.fields.size()),
                             rec.line);
        out.push_back({rec.fields[id_col], rec.fields[text_col], rec.line});
    }
    return out;
}

}  // namespace

Corpus load_corpus(const std::filesystem::path& path, CorpusFormat format, const CorpusLoadOptions& options) {
    auto raw = format == CorpusFormat::ndjson ? read_ndjson(path) : read_csv(path);
    if (raw.empty()) throw Error("corpus file is empty: " + path.string());

    std::unordered_set<std::string> seen;
    std::vector<std::pair<std::string, std::string>> records;
    records.reserve(raw.size());
    for (auto& r : raw) {
        if (r.id.empty()) throw ParseError("empty id", r.line);
        if (r.text.empty()) throw ParseError("empty text for id " + r.id, r.line);
        if (!seen.insert(r.id).second) throw ParseError("duplicate id \"" + r.id + "\"", r.line);
        if (utf8_decode(r.text).size() > options.max_text_length)
            throw ParseError("text for id " + r.id + " exceeds " + std::to_string(options.max_text_length) +
                                 " characters",
                             r.line);
        records.emplace_back(std::move(r.id), std::move(r.text));
    }
    return Corpus::from_texts(std::move(records), options.tokenizer);
}

void save_corpus_ndjson(const Corpus& corpus, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    for (const auto& d : corpus.documents()) {
        out << json{{"id", d.id}, {"text", d.raw_text}, {"tokens", d.tokens}}.dump() << '\n';
    }
}

}  // namespace clustval
