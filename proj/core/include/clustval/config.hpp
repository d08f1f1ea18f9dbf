#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "clustval/autometrics.hpp"
#include "clustval/clustering.hpp"
#include "clustval/corpus.hpp"
#include "clustval/embed.hpp"
#include "clustval/gmm.hpp"
#include "clustval/judge.hpp"
#include "clustval/lda.hpp"
#include "clustval/partition.hpp"

namespace clustval {

/// Reads a .json or .toml file into a JSON value (TOML tables become objects).
nlohmann::json load_config_document(const std::filesystem::path& path);

void to_json(nlohmann::json& j, const GmmConfig& c);
void from_json(const nlohmann::json& j, GmmConfig& c);
void to_json(nlohmann::json& j, const LdaConfig& c);
void from_json(const nlohmann::json& j, LdaConfig& c);
void to_json(nlohmann::json& j, const MetricOptions& c);
void from_json(const nlohmann::json& j, MetricOptions& c);
void to_json(nlohmann::json& j, const EmbedServiceConfig& c);
void from_json(const nlohmann::json& j, EmbedServiceConfig& c);

struct PipelineConfig {
    std::filesystem::path corpus;
    std::optional<CorpusFormat> corpus_format;  // by extension when unset
    std::size_t max_text_length = 10000;
    /// Precomputed embeddings; otherwise `embed_service` is called when a
    /// model or metric needs vectors.
    std::optional<std::filesystem::path> embeddings;
    std::optional<EmbedServiceConfig> embed_service;

    std::vector<ModelTag> models{ModelTag::gmm, ModelTag::lda, ModelTag::random};
    int k = 10;
    std::uint64_t seed = 0;
    /// Per-model seed overrides; other models derive theirs from `seed`.
    std::map<std::string, std::uint64_t> seeds;

    TokenizerConfig tokenizer = TokenizerConfig::analysis();
    TokenizerConfig topic_tokenizer = TokenizerConfig::topic_model();
    GmmConfig gmm;
    LdaConfig lda;
    MetricOptions metrics;
    /// Report the fitted component sigma as the GMM mean SD.
    bool gmm_sigma = true;
    PacketOptions packet;

    std::optional<JudgeConfig> judge;
    bool run_judge = false;

    std::filesystem::path out_dir = "run";
    bool deterministic = false;
    std::size_t threads = 0;

    /// Throws on an empty model list, K < 2 or a missing corpus path.
    void validate() const;
    std::uint64_t model_seed(ModelTag tag) const;
};

/// Relative paths resolve against `base_dir`.
PipelineConfig pipeline_config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
PipelineConfig load_pipeline_config(const std::filesystem::path& path);
nlohmann::json to_json(const PipelineConfig& c);

}  // namespace clustval
