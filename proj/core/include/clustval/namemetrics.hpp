#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "clustval/partition.hpp"
#include "clustval/text.hpp"

namespace clustval {

/// N_R raw names per cluster key. A missing response is an empty string and
/// still counts towards N_R.
struct NameSet {
    std::string source;  // e.g. "human" or "judge:<model>"
    std::size_t n_reviewers = 0;
    std::map<std::string, std::vector<std::string>> names;

    /// Throws unless every cluster holds exactly n_reviewers names.
    void validate() const;
};

void to_json(nlohmann::json& j, const NameSet& s);
void from_json(const nlohmann::json& j, NameSet& s);
void save_name_set(const NameSet& s, const std::filesystem::path& path);
NameSet load_name_set(const std::filesystem::path& path);

/// Tokens of one name: lowercased, punctuation and stopwords removed. An empty
/// response or a literal "None" becomes the single token "none".
std::vector<std::string> normalize_name(std::string_view raw,
                                        const TokenizerConfig& config = TokenizerConfig::analysis());

using ConsistencyMap = std::map<std::string, double>;

/// S_j = (occurrences of type j over all names) / N_R, with N_R the number of
/// names. `once_per_name` counts a type at most once per name.
ConsistencyMap consistency(const std::vector<std::vector<std::string>>& names, bool once_per_name = false);

/// max_j S_j. Throws on an empty map.
double interpretability(const ConsistencyMap& s);

/// Highest-S types, ties broken lexicographically.
std::vector<std::pair<std::string, double>> top_named_words(const ConsistencyMap& s, std::size_t n = 5);

/// D_i = min over j != i of JSD(stemmed corpus_i, stemmed corpus_j), base 2.
/// Throws with fewer than two corpora or an empty corpus.
std::vector<double> name_distinctiveness(const std::vector<std::vector<std::string>>& corpora);

struct ModelSummary {
    double mean_i = 0.0, sd_i = 0.0;
    double mean_d = 0.0, sd_d = 0.0;
    std::size_t n_clusters = 0;
};

/// Means and population SDs. Empty D values are skipped.
ModelSummary model_summary(const std::vector<double>& interpretability, const std::vector<double>& distinctiveness);

struct ClusterNameMetrics {
    std::string cluster_key;
    std::string model;  // empty when no key map was given
    int cluster = -1;
    std::size_t n_tokens = 0;  // N_w
    std::size_t n_types = 0;   // N_W
    ConsistencyMap consistency;
    std::vector<std::pair<std::string, double>> top_named_words;
    double interpretability = 0.0;
    std::optional<double> distinctiveness;
};

struct NameMetricsReport {
    std::string source;
    std::size_t n_reviewers = 0;
    std::vector<ClusterNameMetrics> clusters;  // key order
    std::map<std::string, ModelSummary> models;
};

struct NameMetricOptions {
    TokenizerConfig tokenizer = TokenizerConfig::analysis();
    bool once_per_name = false;
    std::size_t top_n = 5;
};

/// Per-cluster S, I, top words and D. D compares clusters of the same model
/// (from `key_map`); without a key map every cluster is treated as one model.
NameMetricsReport compute_name_metrics(const NameSet& names, const std::map<std::string, SampleSource>* key_map,
                                       const NameMetricOptions& options = {});

nlohmann::json to_json(const NameMetricsReport& r);

}  // namespace clustval
