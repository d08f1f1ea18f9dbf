#include "clustval/embed.hpp"

#include <atomic>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <mutex>
#include <thread>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "clustval/error.hpp"

namespace clustval {

using json = nlohmann::json;

namespace {

void validate_row(std::span<const double> row, std::size_t index) {
    bool nonzero = false;
    for (double x : row) {
        if (!std::isfinite(x)) throw ParseError("non-finite component in embedding row " + std::to_string(index));
        if (x != 0.0) nonzero = true;
    }
    if (!nonzero) throw ParseError("all-zero embedding row " + std::to_string(index));
}

}  // namespace

EmbeddingMatrix::EmbeddingMatrix(std::vector<std::string> ids, Matrix vectors)
    : ids_(std::move(ids)), vectors_(std::move(vectors)) {
    if (ids_.size() != vectors_.rows())
        throw Error("embedding ids (" + std::to_string(ids_.size()) + ") and rows (" +
                    std::to_string(vectors_.rows()) + ") differ");
    for (std::size_t i = 0; i < vectors_.rows(); ++i) validate_row(vectors_.row(i), i);
}

EmbeddingMatrix EmbeddingMatrix::aligned_to(const std::vector<std::string>& ids) const {
    if (ids == ids_) return *this;
    std::unordered_map<std::string, std::size_t> pos;
    for (std::size_t i = 0; i < ids_.size(); ++i) pos.emplace(ids_[i], i);
    Matrix out(ids.size(), dim());
    for (std::size_t i = 0; i < ids.size(); ++i) {
        auto it = pos.find(ids[i]);
        if (it == pos.end()) throw Error("no embedding for document id " + ids[i]);
        auto src = row(it->second);
        std::copy(src.begin(), src.end(), out.row(i).begin());
    }
    return EmbeddingMatrix(ids, std::move(out));
}

EmbeddingFormat parse_embedding_format(std::string_view name) {
    if (name == "ndjson" || name == "jsonl") return EmbeddingFormat::ndjson;
    if (name == "bin") return EmbeddingFormat::bin;
    throw Error("unknown embedding format: " + std::string(name));
}

EmbeddingFormat embedding_format_for(const std::filesystem::path& path) {
    auto ext = path.extension();
    return ext == ".bin" || ext == ".bemb" ? EmbeddingFormat::bin : EmbeddingFormat::ndjson;
}

std::filesystem::path ids_sidecar(const std::filesystem::path& bin_path) {
    return bin_path.string() + ".ids.ndjson";
}

namespace {

constexpr char kMagic[4] = {'B', 'E', 'M', 'B'};
constexpr std::uint8_t kVersion = 0x01;

static_assert(std::endian::native == std::endian::little, "binary embedding I/O assumes a little-endian host");

EmbeddingMatrix load_ndjson(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open embeddings: " + path.string());
    std::vector<std::string> ids;
    Matrix m;
    std::string line;
    std::size_t line_no = 0;
    std::vector<double> buf;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw ParseError(std::string("malformed embedding record: ") + e.what(), line_no);
        }
        if (!j.contains("id") || !j.contains("vector") || !j["vector"].is_array())
            throw ParseError("record needs \"id\" and \"vector\"", line_no);
        buf.clear();
        for (const auto& x : j["vector"]) {
            if (!x.is_number()) throw ParseError("non-numeric component in row " + std::to_string(ids.size()), line_no);
            buf.push_back(x.get<double>());
        }
        if (!ids.empty() && buf.size() != m.cols())
            throw ParseError("dimension mismatch in row " + std::to_string(ids.size()) + ": expected " +
                                 std::to_string(m.cols()) + ", got " + std::to_string(buf.size()),
                             line_no);
        if (buf.empty()) throw ParseError("empty vector in row " + std::to_string(ids.size()), line_no);
        validate_row(buf, ids.size());
        ids.push_back(j["id"].is_string() ? j["id"].get<std::string>() : j["id"].dump());
        m.push_row(buf);
    }
    return EmbeddingMatrix(std::move(ids), std::move(m));
}

std::vector<std::string> load_ids(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("missing id sidecar: " + path.string());
    std::vector<std::string> ids;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            auto j = json::parse(line);
            ids.push_back(j.at("id").is_string() ? j["id"].get<std::string>() : j["id"].dump());
        } catch (const json::exception& e) {
            throw ParseError(std::string("bad id sidecar record: ") + e.what(), line_no);
        }
    }
    return ids;
}

EmbeddingMatrix load_bin(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open embeddings: " + path.string());
    char magic[4];
    std::uint8_t version = 0;
    std::uint32_t n = 0, d = 0;
    in.read(magic, 4);
    in.read(reinterpret_cast<char*>(&version), 1);
    in.read(reinterpret_cast<char*>(&n), 4);
    in.read(reinterpret_cast<char*>(&d), 4);
    if (!in || std::memcmp(magic, kMagic, 4) != 0) throw ParseError("not a BEMB file: " + path.string());
    if (version != kVersion) throw ParseError("unsupported BEMB version " + std::to_string(version));
    if (n > 0 && d == 0) throw ParseError("BEMB dimension is zero");
    std::vector<float> raw(static_cast<std::size_t>(n) * d);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size() * sizeof(float)));
    if (!in) throw ParseError("BEMB file truncated: " + path.string());
    Matrix m(n, d);
    for (std::size_t i = 0; i < raw.size(); ++i) m.data()[i] = raw[i];
    auto ids = load_ids(ids_sidecar(path));
    if (ids.size() != n)
        throw ParseError("id sidecar has " + std::to_string(ids.size()) + " rows, matrix has " + std::to_string(n));
    return EmbeddingMatrix(std::move(ids), std::move(m));
}

}  // namespace

EmbeddingMatrix load_embeddings(const std::filesystem::path& path, EmbeddingFormat format) {
    return format == EmbeddingFormat::ndjson ? load_ndjson(path) : load_bin(path);
}

void save_embeddings(const EmbeddingMatrix& m, const std::filesystem::path& path, EmbeddingFormat format) {
    if (format == EmbeddingFormat::ndjson) {
        std::ofstream out(path);
        if (!out) throw Error("cannot write " + path.string());
        for (std::size_t i = 0; i < m.size(); ++i) {
            auto r = m.row(i);
            out << json{{"id", m.ids()[i]}, {"vector", std::vector<double>(r.begin(), r.end())}}.dump() << '\n';
        }
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    auto n = static_cast<std::uint32_t>(m.size());
    auto d = static_cast<std::uint32_t>(m.dim());
    out.write(kMagic, 4);
    out.write(reinterpret_cast<const char*>(&kVersion), 1);
    out.write(reinterpret_cast<const char*>(&n), 4);
    out.write(reinterpret_cast<const char*>(&d), 4);
    for (double x : m.vectors().data()) {
        auto f = static_cast<float>(x);
        out.write(reinterpret_cast<const char*>(&f), sizeof f);
    }
    std::ofstream ids(ids_sidecar(path));
    for (const auto& id : m.ids()) ids << json{{"id", id}}.dump() << '\n';
}

EmbeddingMatrix fetch_embeddings(const EmbedServiceConfig& config, const std::vector<std::string>& ids,
                                 const std::vector<std::string>& texts) {
    if (ids.size() != texts.size()) throw Error("fetch_embeddings: ids and texts differ in length");
    if (config.batch_size == 0) throw Error("batch_size must be at least 1");
    if (texts.empty()) return {};

    http::Endpoint endpoint = config.endpoint;
    if (endpoint.bearer_token.empty()) endpoint.bearer_token = http::env_or_empty("EMBED_API_KEY");

    const std::size_t n_batches = (texts.size() + config.batch_size - 1) / config.batch_size;
    std::vector<std::vector<std::vector<double>>> results(n_batches);
    std::atomic<std::size_t> next{0};
    std::mutex error_mutex;
    std::exception_ptr first_error;

    auto worker = [&] {
        while (true) {
            std::size_t b = next.fetch_add(1);
            if (b >= n_batches) return;
            {
                std::lock_guard lock(error_mutex);
                if (first_error) return;
            }
            try {
                std::size_t lo = b * config.batch_size;
                std::size_t hi = std::min(texts.size(), lo + config.batch_size);
                json body{{"model", config.model},
                          {"input", std::vector<std::string>(texts.begin() + lo, texts.begin() + hi)}};
                json res = http::post_json(endpoint, "/embeddings", body, config.retry);
                if (!res.contains("data") || !res["data"].is_array())
                    throw HttpError("embedding response lacks a data array", 200);
                const auto& data = res["data"];
                if (data.size() != hi - lo)
                    throw HttpError("embedding service returned " + std::to_string(data.size()) + " vectors for " +
                                        std::to_string(hi - lo) + " inputs",
                                    200);
                auto& out = results[b];
                for (const auto& item : data) out.push_back(item.at("embedding").get<std::vector<double>>());
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        }
    };

    std::size_t n_workers = std::max<std::size_t>(1, std::min(config.max_concurrent, n_batches));
    std::vector<std::thread> pool;
    for (std::size_t i = 0; i < n_workers; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);

    Matrix m;
    for (const auto& batch : results) {
        for (const auto& v : batch) {
            if (!m.empty() && v.size() != m.cols())
                throw ParseError("dimension mismatch in row " + std::to_string(m.rows()));
            m.push_row(v);
        }
    }
    return EmbeddingMatrix(ids, std::move(m));
}

DistanceMetric parse_metric(std::string_view name) {
    if (name == "cosine") return DistanceMetric::cosine;
    if (name == "euclidean") return DistanceMetric::euclidean;
    throw Error("unknown distance metric: " + std::string(name));
}

std::string to_string(DistanceMetric m) { return m == DistanceMetric::cosine ? "cosine" : "euclidean"; }

double dot(std::span<const double> u, std::span<const double> v) {
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) s += u[i] * v[i];
    return s;
}

double norm(std::span<const double> u) { return std::sqrt(dot(u, u)); }

double cosine_distance(std::span<const double> u, std::span<const double> v) {
    if (u.size() != v.size()) throw Error("cosine_distance: dimension mismatch");
    double nu = norm(u), nv = norm(v);
    if (nu == 0.0 || nv == 0.0) throw Error("cosine_distance: zero-norm vector");
    double c = dot(u, v) / (nu * nv);
    return 1.0 - std::clamp(c, -1.0, 1.0);
}

double euclidean_distance(std::span<const double> u, std::span<const double> v) {
    if (u.size() != v.size()) throw Error("euclidean_distance: dimension mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        double d = u[i] - v[i];
        s += d * d;
    }
    return std::sqrt(s);
}

double distance(DistanceMetric metric, std::span<const double> u, std::span<const double> v) {
    return metric == DistanceMetric::cosine ? cosine_distance(u, v) : euclidean_distance(u, v);
}

}  // namespace clustval
