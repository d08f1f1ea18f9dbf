#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "clustval/clustering.hpp"
#include "clustval/corpus.hpp"
#include "clustval/matrix.hpp"

namespace clustval {

struct LdaConfig {
    /// Symmetric document-topic prior; negative means 50 / K.
    double alpha = -1.0;
    double beta = 0.01;
    int sweeps = 1000;
    int burn_in = 800;
    int sample_lag = 10;
    /// Recount the topic tables from the assignments after every sweep and
    /// throw on mismatch. Always on in debug builds.
    bool verify_counts = false;
};

struct LdaModel {
    int k = 0;
    double alpha = 0.0;
    double beta = 0.0;
    std::uint64_t seed = 0;
    int n_sweeps = 0;
    int n_samples = 0;
    std::vector<std::string> vocab;      // sorted
    Matrix phi;                          // K x V
    std::vector<std::string> doc_ids;
    Matrix doc_topic;                    // n x K
    /// Random topic for documents with no tokens, -1 otherwise.
    std::vector<int> empty_doc_topic;
};

void to_json(nlohmann::json& j, const LdaModel& m);
void from_json(const nlohmann::json& j, LdaModel& m);

/// Collapsed Gibbs sampling over token-topic assignments. phi and doc_topic
/// are posterior means averaged over the samples taken every `sample_lag`
/// sweeps after `burn_in`.
LdaModel fit_lda(const Corpus& corpus, int k, const LdaConfig& config, std::uint64_t seed);

/// `n` words of `topic` by descending phi, ties in lexicographic order.
std::vector<std::string> lda_top_words(const LdaModel& model, int topic, std::size_t n = 10);

/// Argmax topic per document, lowest index on ties.
Clustering lda_assign(const LdaModel& model);

}  // namespace clustval
