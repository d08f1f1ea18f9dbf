#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "clustval/clustering.hpp"
#include "clustval/corpus.hpp"
#include "clustval/embed.hpp"

namespace clustval {

// ---------------------------------------------------------------------------
// Embedding-space metrics

struct SilhouetteReport {
    std::vector<std::string> ids;
    std::vector<double> per_point;  // s(i), parallel to ids
    std::vector<double> a_values;   // mean distance to own cluster
    std::vector<double> b_values;   // mean distance to nearest other cluster
    /// Mean s(i) over members; NaN for empty clusters.
    std::vector<double> per_cluster_mean;
    double mean = 0.0;
};

/// s(i) = (b - a) / max(a, b). Members of singleton clusters get s = 0.
/// Needs at least two non-empty clusters. The cosine path is O(n K d) using
/// per-cluster sums of unit vectors; euclidean is the O(n^2 d) pair loop.
SilhouetteReport silhouette(const Matrix& x, const std::vector<int>& labels, int k, DistanceMetric metric,
                            std::size_t threads = 0);
SilhouetteReport silhouette(const EmbeddingMatrix& x, const Clustering& clustering, DistanceMetric metric,
                            std::size_t threads = 0);

struct CentroidDistances {
    Matrix distances;                  // K x K between cluster centroids
    std::vector<double> min_distance;  // per cluster, over the other clusters
};

/// Centroid = arithmetic mean of member vectors. Throws on an empty cluster.
CentroidDistances centroid_distances(const EmbeddingMatrix& x, const Clustering& clustering, DistanceMetric metric);

/// Mean over dimensions of the population SD of member coordinates.
/// Throws when the cluster has fewer than two members.
double empirical_mean_sd(const EmbeddingMatrix& x, const Clustering& clustering, int cluster);

// ---------------------------------------------------------------------------
// Keyness

/// G^2 of the 2x2 table (k_c, n_c - k_c; k_r, n_r - k_r) with expected counts
/// from the pooled rate. Empty observed cells contribute 0.
double log_likelihood_g2(double k_c, double n_c, double k_r, double n_r);

/// BIC approximation: BF = exp((G^2 - ln(n_c + n_r)) / 2).
double bayes_factor_keyness(double k_c, double n_c, double k_r, double n_r);
/// ln BF, finite where the BF itself would overflow.
double log_bayes_factor_keyness(double k_c, double n_c, double k_r, double n_r);

enum class KeynessReference { complement, whole };
KeynessReference parse_keyness_reference(std::string_view name);

struct Keyword {
    std::string word;
    double bayes_factor = 0.0;  // may be +inf; compare log_bayes_factor
    double log_bayes_factor = 0.0;
    double cluster_rel_freq = 0.0;
    double reference_rel_freq = 0.0;
};

struct KeywordReport {
    std::vector<std::vector<Keyword>> per_cluster;  // sorted by descending BF
    std::vector<std::size_t> counts;
};

/// Words whose BF exceeds `threshold` and that are relatively more frequent
/// in the cluster than in the reference corpus. Uses the corpus tokens.
std::vector<Keyword> cluster_keywords(const Corpus& corpus, const Clustering& clustering, int cluster,
                                      double threshold = 10.0,
                                      KeynessReference reference = KeynessReference::complement);
KeywordReport keywords(const Corpus& corpus, const Clustering& clustering, double threshold = 10.0,
                       KeynessReference reference = KeynessReference::complement);

// ---------------------------------------------------------------------------
// Coherence

using TokenDocs = std::vector<std::span<const std::string>>;
TokenDocs token_docs(const Corpus& corpus);
TokenDocs token_docs(const std::vector<std::vector<std::string>>& docs);

/// Mean over ordered pairs (i > j) of log((D(w_i, w_j) + 1) / D(w_j)), where D
/// counts documents. An absent w_j uses denominator 1.
double coherence_umass(const std::vector<std::string>& top_words, const TokenDocs& docs);
double coherence_umass(const std::vector<std::string>& top_words, const Corpus& corpus);

/// Boolean sliding windows (step 1; shorter documents form one window; every
/// document counts toward the window total), NPMI with epsilon 1e-12, and the
/// mean cosine between each word's NPMI vector and their sum.
double coherence_cv(const std::vector<std::string>& top_words, const TokenDocs& docs, std::size_t window = 110);
double coherence_cv(const std::vector<std::string>& top_words, const Corpus& corpus, std::size_t window = 110);

// ---------------------------------------------------------------------------
// Corpus divergence

struct WordDistribution {
    std::vector<std::string> support;  // sorted
    std::vector<double> probs;
};

WordDistribution word_distribution(std::span<const std::string> tokens);

/// Jensen-Shannon divergence of the token-frequency distributions. Base 2
/// gives values in [0, 1]. Throws on an empty corpus.
double jsd(std::span<const std::string> a, std::span<const std::string> b, double base = 2.0);
double jsd(const WordDistribution& a, const WordDistribution& b, double base = 2.0);

// ---------------------------------------------------------------------------
// Per-cluster report

/// One row of the per-cluster metric table. Absent values are metrics that
/// could not be computed (no embeddings, empty or singleton cluster).
struct ClusterMetrics {
    int cluster = 0;
    std::size_t size = 0;
    std::optional<std::size_t> keywords;
    std::optional<double> cv;
    std::optional<double> umass;
    std::optional<double> min_centroid_distance;
    std::optional<double> mean_silhouette;
    std::optional<double> mean_sd;
    std::vector<std::string> top_words;
};

nlohmann::json to_json(const ClusterMetrics& m);
/// Value of a report metric by its column name (see kMetricNames).
std::optional<double> metric_value(const ClusterMetrics& m, std::string_view name);
ClusterMetrics cluster_metrics_from_json(const nlohmann::json& j);

struct MetricOptions {
    DistanceMetric metric = DistanceMetric::cosine;
    KeynessReference reference = KeynessReference::complement;
    double keyword_threshold = 10.0;
    std::size_t cv_window = 110;
    std::size_t threads = 0;
};

/// Computes every metric for every cluster. `corpus` must be tokenized with
/// stopwords and punctuation removed. `top_words[c]` feeds the coherence
/// scores. `embeddings` may be null; `gmm_sigma`, when given, replaces the
/// empirical mean SD.
std::vector<ClusterMetrics> compute_cluster_metrics(const Corpus& corpus, const Clustering& clustering,
                                                    const std::vector<std::vector<std::string>>& top_words,
                                                    const EmbeddingMatrix* embeddings,
                                                    const std::optional<std::vector<double>>& gmm_sigma,
                                                    const MetricOptions& options);

}  // namespace clustval
