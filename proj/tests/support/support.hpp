#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "clustval/corpus.hpp"
#include "clustval/matrix.hpp"

namespace testsupport {

std::filesystem::path data_dir();          // tests/data
std::filesystem::path project_data_dir();  // data/
const nlohmann::json& fixtures();          // tests/data/oracle_fixtures.json

class TempDir {
public:
    TempDir();
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    const std::filesystem::path& path() const noexcept { return path_; }
    std::filesystem::path operator/(const std::string& rel) const { return path_ / rel; }

private:
    std::filesystem::path path_;
};

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

struct PlantedCorpus {
    clustval::Corpus corpus;
    std::vector<int> topic;  // planted topic per document
    int n_topics = 0;
};

/// Documents whose tokens come from topic-specific vocabularies with
/// probability `topic_share`, otherwise from a shared background list.
PlantedCorpus planted_corpus(std::size_t n_docs, int n_topics, std::uint64_t seed, double topic_share = 0.6,
                             std::size_t min_len = 6, std::size_t max_len = 14);

/// Every document drawn from one vocabulary distribution.
clustval::Corpus homogeneous_corpus(std::size_t n_docs, std::uint64_t seed, std::size_t vocab = 300,
                                    std::size_t min_len = 6, std::size_t max_len = 14);

/// Isotropic Gaussian blobs, one per label.
clustval::Matrix gaussian_blobs(const std::vector<int>& labels, std::size_t dim, double spread, std::uint64_t seed);

/// Direct O(n^2) silhouette: pairwise distances in long double, singleton
/// members get 0.
std::vector<double> brute_silhouette(const clustval::Matrix& x, const std::vector<int>& labels, bool cosine);

/// OpenAI-compatible mock: POST /v1/chat/completions and /v1/embeddings.
/// Chat replies cycle through name variants built from the prompt's top words,
/// per distinct prompt, so a serial run is reproducible.
class MockOpenAi {
public:
    struct Options {
        std::string token;           // required bearer token when non-empty
        int fail_first = 0;          // first N requests get fail_status
        int fail_status = 503;
        std::size_t embedding_dim = 8;
        int delay_ms = 0;            // per-request service time
        bool drop_last_embedding = false;
    };
    MockOpenAi();
    explicit MockOpenAi(Options options);
    ~MockOpenAi();
    MockOpenAi(const MockOpenAi&) = delete;
    MockOpenAi& operator=(const MockOpenAi&) = delete;

    std::string base_url() const;  // http://127.0.0.1:<port>/v1
    std::size_t chat_requests() const noexcept { return chat_requests_; }
    std::size_t embed_requests() const noexcept { return embed_requests_; }
    std::size_t total_requests() const noexcept { return total_requests_; }
    std::size_t max_in_flight() const noexcept { return max_in_flight_; }
    std::vector<nlohmann::json> chat_bodies() const;

    /// Reply text for the n-th request (0-based) carrying this user prompt.
    static std::string scripted_name(const std::string& user_prompt, std::size_t n);
    static std::vector<double> scripted_embedding(const std::string& text, std::size_t dim);

private:
    struct Impl;
    Options options_;
    std::unique_ptr<Impl> impl_;
    std::thread thread_;
    int port_ = 0;
    std::atomic<std::size_t> chat_requests_{0}, embed_requests_{0}, total_requests_{0};
    std::atomic<std::size_t> in_flight_{0}, max_in_flight_{0};
    mutable std::mutex mutex_;
    std::map<std::string, std::size_t> per_prompt_;
    std::vector<nlohmann::json> bodies_;
};

}  // namespace testsupport
