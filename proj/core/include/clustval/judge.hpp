#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <mutex>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "clustval/error.hpp"
#include "clustval/http.hpp"
#include "clustval/namemetrics.hpp"
#include "clustval/partition.hpp"

namespace clustval {

/// Prompt template file under data/prompts/.
inline constexpr std::string_view kJudgePromptVersion = "judge_v1";

struct JudgeConfig {
    http::Endpoint endpoint;  // token defaults to $JUDGE_API_KEY
    std::string model_id = "gpt-3.5-turbo";
    double temperature = 1.0;
    int repetitions = 39;
    std::size_t max_name_words = 5;
    std::size_t sample_bios_n = 20;
    std::size_t max_concurrent = 4;
    http::RetryPolicy retry;
    /// Picks which bios are shown when a sample holds more than sample_bios_n.
    std::uint64_t seed = 0;
    std::string prompt_version{kJudgePromptVersion};
    /// Off in deterministic runs so the response log is reproducible.
    bool record_latency = true;

    /// Throws on repetitions < 1, negative temperature or zero limits.
    void validate() const;
};

void to_json(nlohmann::json& j, const JudgeConfig& c);
/// Reads the fields present in `j` over the defaults.
void from_json(const nlohmann::json& j, JudgeConfig& c);

struct ChatPrompt {
    std::string system;
    std::string user;
};

/// Renders the versioned template. The prompt holds the top words and the
/// chosen bios verbatim and nothing that identifies the model or cluster.
ChatPrompt build_prompt(const ClusterSample& sample, const JudgeConfig& config);

/// Bios shown to the judge: all of them, or a seeded subset of sample_bios_n.
std::vector<std::string> judge_bios(const ClusterSample& sample, const JudgeConfig& config);

struct ParsedName {
    std::string name;
    bool is_none = false;
    std::size_t word_count = 0;
};

/// First non-empty line, stripped of surrounding whitespace, quotes and
/// punctuation. Throws on an empty completion.
ParsedName parse_name(std::string_view raw);

struct JudgeResponse {
    std::string cluster_key;
    int run_index = 0;
    std::string raw_text;
    std::string parsed_name;
    bool is_none = false;
    std::size_t word_count = 0;
    bool constraint_violation = false;
    double latency_ms = 0.0;
    long long prompt_tokens = -1;
    long long completion_tokens = -1;
};

void to_json(nlohmann::json& j, const JudgeResponse& r);
void from_json(const nlohmann::json& j, JudgeResponse& r);

/// One chat completion for one sample.
JudgeResponse request_name(const JudgeConfig& config, const ClusterSample& sample, int run_index);

/// Append-only NDJSON log of responses; safe to share between threads.
class ResponseLog {
public:
    explicit ResponseLog(std::filesystem::path path);
    /// Entries already on disk. A truncated last line is ignored.
    std::vector<JudgeResponse> read() const;
    void append(const JudgeResponse& r);
    const std::filesystem::path& path() const noexcept { return path_; }

private:
    std::filesystem::path path_;
    std::mutex mutex_;
};

std::vector<JudgeResponse> load_response_log(const std::filesystem::path& path);

/// Raised after a collection run when some (cluster, run) pairs still failed.
/// Successful responses are already in the log.
class JudgeError : public Error {
public:
    JudgeError(const std::string& what, std::vector<std::pair<std::string, int>> failed)
        : Error(what), failed_(std::move(failed)) {}
    const std::vector<std::pair<std::string, int>>& failed() const noexcept { return failed_; }

private:
    std::vector<std::pair<std::string, int>> failed_;
};

struct CollectStats {
    std::size_t requested = 0;  // pairs sent this run
    std::size_t resumed = 0;    // pairs already in the log
    std::size_t violations = 0;
    std::size_t none_answers = 0;
};

/// Asks for `repetitions` names per sample with at most max_concurrent
/// requests in flight. Pairs already in the log are skipped. Returns the
/// NameSet rebuilt from the log.
NameSet collect_names(const JudgeConfig& config, const ReviewPacket& packet, const std::filesystem::path& log_path,
                      CollectStats* stats = nullptr);

/// NameSet from logged responses: names[key][run] = parsed name. Throws when
/// a (key, run) pair for run < repetitions is missing. Later duplicates of a
/// pair are ignored.
NameSet names_from_responses(const std::vector<JudgeResponse>& responses, const std::vector<std::string>& keys,
                             int repetitions, std::string source);

}  // namespace clustval
