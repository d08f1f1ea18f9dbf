#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "clustval/autometrics.hpp"
#include "clustval/config.hpp"
#include "clustval/namemetrics.hpp"
#include "clustval/partition.hpp"
#include "clustval/stats.hpp"

namespace clustval {

/// Relative locations inside a run directory.
namespace run_layout {
inline constexpr const char* kConfig = "config.json";
inline constexpr const char* kCorpus = "corpus.ndjson";
inline constexpr const char* kEmbeddings = "embeddings.bin";
inline constexpr const char* kPacket = "packet/packet.json";
inline constexpr const char* kKeyMap = "packet/key_map.json";
inline constexpr const char* kJudgeLog = "judge/responses.ndjson";
inline constexpr const char* kJudgeNames = "judge/names.json";
inline constexpr const char* kJudgeNameMetrics = "judge/name_metrics.json";
inline constexpr const char* kHumanResponses = "review/responses.csv";
inline constexpr const char* kAuthorNames = "author_names.csv";
inline constexpr const char* kManifest = "manifest.json";

std::string clustering(const std::string& model);  // clusterings/<model>.csv
std::string model_file(const std::string& model);  // models/<model>.json
std::string metrics(const std::string& model);     // metrics/<model>.json
}  // namespace run_layout

/// Reads metrics/<model>.json.
std::vector<ClusterMetrics> load_cluster_metrics(const std::filesystem::path& path);

/// Rows keyed by cluster_key, for correlating reviewer ratings with metrics.
MetricTable metric_table(const std::map<std::string, std::vector<ClusterMetrics>>& per_model,
                         const std::map<std::string, SampleSource>& key_map);

/// ICC(2,k) per question over the cluster x reviewer grids, plus reviewer x
/// question x metric Spearman correlations when `metrics` is given.
nlohmann::json study_statistics(const RatingSet& ratings, const MetricTable* metrics, std::size_t threads = 0);

/// Loads the corpus named by the config with its analysis tokenizer.
Corpus load_pipeline_corpus(const PipelineConfig& config);

/// Embeddings from the configured file or service, aligned to `ids`.
/// Returns nothing when neither is configured.
std::optional<EmbeddingMatrix> obtain_embeddings(const PipelineConfig& config, const std::vector<std::string>& ids);

struct FittedModel {
    ModelTag tag = ModelTag::external;
    Clustering clustering;
    std::vector<std::vector<std::string>> top_words;  // per cluster
    std::optional<std::vector<double>> sigma;         // GMM component sigma
    nlohmann::json model_json;                        // null for random
};

/// Fits one model. GMM needs `embeddings`; LDA retokenizes with the topic
/// tokenizer and maps its stemmed top words back to surface forms.
FittedModel fit_model(ModelTag tag, const PipelineConfig& config, const Corpus& corpus,
                      const EmbeddingMatrix* embeddings, std::uint64_t seed);

/// For each stem, the most frequent surface token in `corpus` with that
/// stem (lexicographic ties); the stem itself when none occurs.
std::vector<std::string> surface_forms(const std::vector<std::string>& stems, const Corpus& corpus);

struct RunResult {
    std::filesystem::path run_dir;
    std::vector<FittedModel> models;
    std::map<std::string, std::vector<ClusterMetrics>> metrics;
    ReviewPacket packet;
    std::optional<NameSet> judge_names;
    nlohmann::json manifest;
};

/// Runs ingest, embeddings, clustering, metrics, packet and (optionally) the
/// judge into config.out_dir and writes a manifest of SHA-256 content hashes.
/// A failing stage is reported as "stage <name>: ..." after the manifest of
/// the outputs written so far is saved.
RunResult run_pipeline(const PipelineConfig& config);

/// {"files": {relative path: sha256}, ...}; no timestamps.
nlohmann::json build_manifest(const std::filesystem::path& run_dir, const std::vector<std::string>& stages,
                              const nlohmann::json& inputs, const std::optional<std::string>& failed_stage);
/// Paths whose hash no longer matches or that are missing.
std::vector<std::string> verify_manifest(const std::filesystem::path& run_dir);

struct StabilityResult {
    ModelTag model = ModelTag::gmm;
    std::vector<std::uint64_t> seeds;
    PairwiseAmi ami;
    std::vector<std::size_t> histogram;  // 20 bins over [0, 1]
    std::vector<std::pair<std::uint64_t, std::string>> failures;
};

/// Fits `model` once per seed and compares all pairs by AMI. Seeds default to
/// derive_seed(config.seed, i) for i < n_seeds.
StabilityResult stability_study(const PipelineConfig& config, ModelTag model, int n_seeds,
                                const std::vector<std::uint64_t>& seeds = {});
nlohmann::json to_json(const StabilityResult& r);

/// One Table S2 row.
struct ReportRow {
    std::string model;
    int cluster = 0;
    std::string cluster_key;
    std::string author_name;
    std::string judge_name;
    ClusterMetrics metrics;
};

inline constexpr std::array<std::string_view, 10> kReportColumns{
    "model", "cluster", "author_name", "judge_name", "keywords", "cv", "umass", "distance", "silhouette", "mean_sd"};

struct Report {
    std::vector<ReportRow> rows;
    std::optional<nlohmann::json> judge_name_metrics;
    std::optional<nlohmann::json> human_name_metrics;
};

/// Reads a completed run. Judge names, human responses and author names are
/// used when present. Throws naming the first missing required file.
Report build_report(const std::filesystem::path& run_dir);
nlohmann::json to_json(const Report& r);
std::string report_csv(const Report& r);
/// Writes report.json and report.csv into the run directory.
void write_report(const Report& r, const std::filesystem::path& run_dir);

}  // namespace clustval
