#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "clustval/http.hpp"
#include "clustval/matrix.hpp"

namespace clustval {

/// n x d embedding vectors aligned to document ids.
///
/// Construction validates: consistent dimension, finite values and no
/// all-zero row.
class EmbeddingMatrix {
public:
    EmbeddingMatrix() = default;
    EmbeddingMatrix(std::vector<std::string> ids, Matrix vectors);

    const std::vector<std::string>& ids() const noexcept { return ids_; }
    const Matrix& vectors() const noexcept { return vectors_; }
    std::size_t size() const noexcept { return vectors_.rows(); }
    std::size_t dim() const noexcept { return vectors_.cols(); }
    std::span<const double> row(std::size_t i) const { return vectors_.row(i); }

    /// Rows reordered to follow `ids`; throws when an id is missing.
    EmbeddingMatrix aligned_to(const std::vector<std::string>& ids) const;

private:
    std::vector<std::string> ids_;
    Matrix vectors_;
};

enum class EmbeddingFormat { ndjson, bin };

EmbeddingFormat parse_embedding_format(std::string_view name);
/// bin for .bin/.bemb extensions, ndjson otherwise.
EmbeddingFormat embedding_format_for(const std::filesystem::path& path);

/// NDJSON: {"id": .., "vector": [..]} per line.
/// Binary: "BEMB", 0x01, u32 n, u32 d (little endian), n*d f32 row-major,
/// ids in the sidecar `<file>.ids.ndjson`.
EmbeddingMatrix load_embeddings(const std::filesystem::path& path, EmbeddingFormat format);
void save_embeddings(const EmbeddingMatrix& m, const std::filesystem::path& path, EmbeddingFormat format);
std::filesystem::path ids_sidecar(const std::filesystem::path& bin_path);

struct EmbedServiceConfig {
    http::Endpoint endpoint;  // token defaults to $EMBED_API_KEY
    std::string model = "all-MiniLM-L6-v2";
    std::size_t batch_size = 64;
    std::size_t max_concurrent = 4;
    http::RetryPolicy retry;
};

/// Embeds `texts` through an OpenAI-compatible `/embeddings` endpoint.
/// Batches may run concurrently; rows come back in input order.
EmbeddingMatrix fetch_embeddings(const EmbedServiceConfig& config, const std::vector<std::string>& ids,
                                 const std::vector<std::string>& texts);

enum class DistanceMetric { cosine, euclidean };

DistanceMetric parse_metric(std::string_view name);
std::string to_string(DistanceMetric m);

double dot(std::span<const double> u, std::span<const double> v);
double norm(std::span<const double> u);

/// 1 - u.v / (|u||v|), in [0, 2]. Throws on zero-norm input or size mismatch.
double cosine_distance(std::span<const double> u, std::span<const double> v);
/// |u - v|_2. Throws on size mismatch.
double euclidean_distance(std::span<const double> u, std::span<const double> v);
double distance(DistanceMetric metric, std::span<const double> u, std::span<const double> v);

}  // namespace clustval
