#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "clustval/clustering.hpp"
#include "clustval/corpus.hpp"

namespace clustval {

/// Uniform i.i.d. assignment of every id to one of K clusters.
Clustering random_partition(const std::vector<std::string>& ids, int k, std::uint64_t seed);

/// The `n` most frequent tokens among member documents of `cluster` after
/// tokenizing raw text with `config`. Descending count, lexicographic ties.
std::vector<std::string> top_frequent_words(const Corpus& corpus, const Clustering& clustering, int cluster,
                                            std::size_t n = 10,
                                            const TokenizerConfig& config = TokenizerConfig::analysis());

/// Uniform sample without replacement of member raw texts; all members when
/// the cluster holds fewer than `n`.
std::vector<std::string> sample_bios(const Corpus& corpus, const Clustering& clustering, int cluster,
                                     std::size_t n, std::uint64_t seed);

struct SampleSource {
    std::string model;  // model name within the run
    int cluster = 0;
    bool operator==(const SampleSource&) const = default;
};

/// What a reviewer or the judge is shown for one cluster.
struct ClusterSample {
    std::string cluster_key;
    SampleSource source;  // never serialized into the public packet
    std::vector<std::string> top_words;
    std::vector<std::string> sample_bios;
    std::uint64_t sample_seed = 0;
};

struct ReviewPacket {
    std::string packet_id;
    std::vector<ClusterSample> samples;
    std::vector<std::string> skipped;  // "<model>/<cluster>" for empty clusters

    std::map<std::string, SampleSource> key_map() const;
    const ClusterSample* find(const std::string& key) const;
};

/// A clustering to include in a packet. `top_words`, when given, overrides
/// frequency-based top words (LDA uses its topic-word distribution).
struct PacketModel {
    std::string name;
    const Corpus* corpus = nullptr;
    const Clustering* clustering = nullptr;
    std::optional<std::vector<std::vector<std::string>>> top_words;
};

struct PacketOptions {
    std::size_t top_words = 10;
    std::size_t bios_per_cluster = 20;
    TokenizerConfig tokenizer = TokenizerConfig::analysis();
};

/// One sample per non-empty cluster per model, in a seeded random order and
/// under opaque random keys.
ReviewPacket make_review_packet(const std::vector<PacketModel>& models, std::uint64_t seed,
                                const PacketOptions& options = {});

/// Public packet JSON: {"packet_id", "samples":[{"cluster_key","top_words","sample_bios"}]}.
nlohmann::json packet_to_json(const ReviewPacket& packet);
/// Confidential map: {"<key>": {"model": .., "cluster": ..}}.
nlohmann::json key_map_to_json(const ReviewPacket& packet);
/// Rebuilds a packet; sources are filled in when `key_map` is given.
ReviewPacket packet_from_json(const nlohmann::json& packet, const nlohmann::json* key_map = nullptr);

void save_review_packet(const ReviewPacket& packet, const std::filesystem::path& packet_path,
                        const std::filesystem::path& key_map_path);
ReviewPacket load_review_packet(const std::filesystem::path& packet_path,
                                const std::optional<std::filesystem::path>& key_map_path = std::nullopt);
std::map<std::string, SampleSource> load_key_map(const std::filesystem::path& path);

}  // namespace clustval
