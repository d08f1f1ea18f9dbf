#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace clustval {

enum class ModelTag { gmm, lda, random, external };

std::string to_string(ModelTag tag);
ModelTag parse_model_tag(std::string_view name);

/// Hard assignment of documents to clusters 0..k-1.
struct Clustering {
    std::vector<std::string> ids;
    std::vector<int> labels;  // parallel to ids
    int k = 0;
    ModelTag model_tag = ModelTag::external;
    std::uint64_t seed = 0;
    nlohmann::json meta = nlohmann::json::object();

    std::size_t size() const noexcept { return ids.size(); }
    /// Throws Error if lengths differ, labels are out of range or ids repeat.
    void validate() const;
    std::vector<std::size_t> cluster_sizes() const;
    /// Row indices per cluster, in id order.
    std::vector<std::vector<std::size_t>> members() const;
    /// Labels reordered to follow `order`; throws when the id sets differ.
    std::vector<int> labels_for(const std::vector<std::string>& order) const;
};

/// `id,cluster` CSV plus `<file>.meta.json` = {model_tag, K, seed, params}.
void save_clustering(const Clustering& c, const std::filesystem::path& csv_path);
Clustering load_clustering(const std::filesystem::path& csv_path);
std::filesystem::path clustering_meta_path(const std::filesystem::path& csv_path);

}  // namespace clustval
