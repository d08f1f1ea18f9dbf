#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "clustval/clustering.hpp"
#include "clustval/matrix.hpp"
#include "clustval/namemetrics.hpp"

namespace clustval {

// ---------------------------------------------------------------------------
// Likert responses

enum class Question { confidence, coh_top_words, coh_bios, coh_match };
inline constexpr std::array<Question, 4> kQuestions{Question::confidence, Question::coh_top_words,
                                                    Question::coh_bios, Question::coh_match};

std::string to_string(Question q);
Question parse_question(std::string_view name);

/// "Not at all Confident" .. "Very Confident" for confidence, "Strongly
/// Disagree" .. "Strongly Agree" for the agreement questions; case-insensitive.
/// Integers "1".."5" are accepted for either scale.
int encode_likert(std::string_view label, Question q);

/// Label for a value on the scale of `q`.
std::string likert_label(int value, Question q);

/// True when a name counts as "None" (the override forces confidence to 1).
bool is_none_name(std::string_view name);

struct Rating {
    std::string reviewer_id;
    std::string cluster_key;
    std::string name;
    std::array<int, 4> values{};  // indexed like kQuestions

    int value(Question q) const { return values[static_cast<std::size_t>(q)]; }
};

struct RatingSet {
    std::vector<Rating> rows;

    std::vector<std::string> reviewers() const;     // sorted
    std::vector<std::string> cluster_keys() const;  // sorted
    const Rating* find(std::string_view reviewer, std::string_view cluster) const;
    /// Throws on duplicate (reviewer, cluster) or values outside 1..5.
    void validate() const;
    /// n_clusters x n_reviewers grid in sorted key order. Throws when any
    /// reviewer skipped a cluster.
    Matrix grid(Question q) const;
};

inline constexpr std::string_view kResponsesHeader =
    "reviewer_id,cluster_key,name,confidence,coh_top_words,coh_bios,coh_match";

/// Reads the reviewer responses CSV. Likert cells hold labels or 1..5. With
/// `none_override`, rows whose name is "None" get confidence 1.
RatingSet load_responses(const std::filesystem::path& path, bool none_override = true);
void save_responses(const RatingSet& ratings, const std::filesystem::path& path);

/// One name per reviewer per cluster; missing responses become "".
NameSet names_from_ratings(const RatingSet& ratings, std::string source = "human");

// ---------------------------------------------------------------------------
// Rank correlation

/// 1-based ranks with ties given their average rank.
std::vector<double> average_ranks(std::span<const double> x);

struct SpearmanResult {
    std::optional<double> rho;
    std::string reason;  // set when rho is undefined
};

/// Pearson correlation of average ranks. Throws on length mismatch or fewer
/// than three pairs; a constant input yields an undefined rho with a reason.
SpearmanResult spearman(std::span<const double> x, std::span<const double> y);

inline constexpr std::array<std::string_view, 6> kMetricNames{"keywords", "cv",         "umass",
                                                              "distance", "silhouette", "mean_sd"};

/// cluster_key -> metric name -> value. Missing or null values drop that
/// cluster from the affected correlation.
using MetricTable = std::map<std::string, std::map<std::string, std::optional<double>>>;

struct CorrelationEntry {
    std::string reviewer_id;
    Question question = Question::confidence;
    std::string metric;
    std::size_t n = 0;
    SpearmanResult result;
};

/// One entry per (reviewer, question, metric), N_R x 4 x |metrics| in total.
std::vector<CorrelationEntry> reviewer_metric_correlations(
    const RatingSet& ratings, const MetricTable& metrics,
    std::span<const std::string_view> metric_names = kMetricNames, std::size_t threads = 0);

nlohmann::json to_json(const std::vector<CorrelationEntry>& entries);

// ---------------------------------------------------------------------------
// Adjusted mutual information

/// AMI with arithmetic-mean normalization and the hypergeometric expected MI.
/// Labels are arbitrary non-negative integers. Two single-cluster partitions
/// score 1.
double ami(std::span<const int> a, std::span<const int> b);
/// Aligns on ids; throws when the id sets differ.
double ami(const Clustering& a, const Clustering& b);

double mutual_information(std::span<const int> a, std::span<const int> b);
double expected_mutual_information(std::span<const int> a, std::span<const int> b);
double entropy(std::span<const int> labels);

struct PairwiseAmi {
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    std::vector<double> values;
    double mean = 0.0;
    double sd = 0.0;  // population SD
};

PairwiseAmi pairwise_ami(const std::vector<Clustering>& clusterings, std::size_t threads = 0);

// ---------------------------------------------------------------------------
// Inter-rater reliability

struct IccResult {
    double icc = 0.0;
    double f_value = 0.0;
    std::size_t df1 = 0, df2 = 0;
    std::optional<double> ci_low, ci_high;  // 95%
    double ssr = 0.0, ssc = 0.0, sse = 0.0, sst = 0.0;
    double msr = 0.0, msc = 0.0, mse = 0.0;
    /// Zero-variance grid: reported as 1.
    bool degenerate = false;
};

/// Two-way random effects, absolute agreement, average of k raters, from an
/// n_subjects x n_raters grid. The interval follows McGraw and Wong.
IccResult icc2k(const Matrix& grid);

nlohmann::json to_json(const IccResult& r);

/// Regularized incomplete beta I_x(a, b).
double incomplete_beta(double a, double b, double x);
/// CDF and quantile of the F distribution with (d1, d2) degrees of freedom.
double f_cdf(double x, double d1, double d2);
double f_quantile(double p, double d1, double d2);

}  // namespace clustval
