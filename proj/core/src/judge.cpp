#include "clustval/judge.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <fstream>
#include <iterator>
#include <map>
#include <sstream>
#include <thread>

#include "clustval/random.hpp"
#include "clustval/resources.hpp"

namespace clustval {

using json = nlohmann::json;

void JudgeConfig::validate() const {
    if (repetitions < 1) throw Error("judge repetitions must be at least 1");
    if (!(temperature >= 0)) throw Error("judge temperature must be non-negative");
    if (max_name_words == 0) throw Error("max_name_words must be positive");
    if (sample_bios_n == 0) throw Error("sample_bios_n must be positive");
    if (max_concurrent == 0) throw Error("max_concurrent must be positive");
    if (endpoint.base_url.empty()) throw Error("judge api_base is not set");
}

void to_json(json& j, const JudgeConfig& c) {
    j = json{{"api_base", c.endpoint.base_url},
             {"model_id", c.model_id},
             {"temperature", c.temperature},
             {"repetitions", c.repetitions},
             {"max_name_words", c.max_name_words},
             {"sample_bios_n", c.sample_bios_n},
             {"request_timeout", c.endpoint.timeout.count()},
             {"max_retries", c.retry.max_retries},
             {"max_concurrent", c.max_concurrent},
             {"seed", c.seed},
             {"prompt_version", c.prompt_version}};
}

void from_json(const json& j, JudgeConfig& c) {
    c.endpoint.base_url = j.value("api_base", c.endpoint.base_url);
    c.model_id = j.value("model_id", c.model_id);
    c.temperature = j.value("temperature", c.temperature);
    c.repetitions = j.value("repetitions", c.repetitions);
    c.max_name_words = j.value("max_name_words", c.max_name_words);
    c.sample_bios_n = j.value("sample_bios_n", c.sample_bios_n);
    c.endpoint.timeout = std::chrono::seconds(j.value("request_timeout", c.endpoint.timeout.count()));
    c.retry.max_retries = j.value("max_retries", c.retry.max_retries);
    if (j.contains("initial_backoff_ms"))
        c.retry.initial_backoff = std::chrono::milliseconds(j["initial_backoff_ms"].get<long long>());
    c.max_concurrent = j.value("max_concurrent", c.max_concurrent);
    c.seed = j.value("seed", c.seed);
    c.prompt_version = j.value("prompt_version", c.prompt_version);
}

// ---------------------------------------------------------------------------

namespace {

struct Template {
    std::string system;
    std::string user;
};

Template load_template(const std::string& version) {
    auto path = data_file(std::filesystem::path("prompts") / (version + ".txt"));
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    std::string text = ss.str();
    auto sys = text.find("[system]\n");
    auto usr = text.find("[user]\n");
    if (sys == std::string::npos || usr == std::string::npos || usr < sys)
        throw Error("prompt template needs [system] and [user] sections: " + path.string());
    Template t;
    t.system = text.substr(sys + 9, usr - sys - 9);
    t.user = text.substr(usr + 7);
    auto trim = [](std::string& s) {
        while (!s.empty() && (s.back() == '\n' || s.back() == ' ')) s.pop_back();
    };
    trim(t.system);
    trim(t.user);
    return t;
}

const Template& cached_template(const std::string& version) {
    static std::mutex mutex;
    static std::map<std::string, Template> cache;
    std::lock_guard lock(mutex);
    auto it = cache.find(version);
    if (it == cache.end()) it = cache.emplace(version, load_template(version)).first;
    return it->second;
}

void replace_all(std::string& s, std::string_view from, const std::string& to) {
    for (std::size_t pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size()))
        s.replace(pos, from.size(), to);
}

}  // namespace

std::vector<std::string> judge_bios(const ClusterSample& sample, const JudgeConfig& config) {
    if (sample.sample_bios.size() <= config.sample_bios_n) return sample.sample_bios;
    std::vector<std::size_t> idx(sample.sample_bios.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    Rng rng(derive_seed(config.seed, fnv1a(sample.cluster_key.data(), sample.cluster_key.size())));
    for (std::size_t i = 0; i < config.sample_bios_n; ++i) std::swap(idx[i], idx[i + rng.index(idx.size() - i)]);
    idx.resize(config.sample_bios_n);
    std::sort(idx.begin(), idx.end());
    std::vector<std::string> out;
    for (auto i : idx) out.push_back(sample.sample_bios[i]);
    return out;
}

ChatPrompt build_prompt(const ClusterSample& sample, const JudgeConfig& config) {
    const auto& t = cached_template(config.prompt_version);
    std::string words, bios;
    for (const auto& w : sample.top_words) words += "- " + w + "\n";
    auto chosen = judge_bios(sample, config);
    for (std::size_t i = 0; i < chosen.size(); ++i) {
        std::string bio = chosen[i];
        std::replace(bio.begin(), bio.end(), '\n', ' ');
        bios += std::to_string(i + 1) + ". " + bio + "\n";
    }
    if (!words.empty()) words.pop_back();
    if (!bios.empty()) bios.pop_back();
    ChatPrompt p{t.system, t.user};
    // Bios are substituted last so their text is never re-scanned.
    replace_all(p.user, "{max_name_words}", std::to_string(config.max_name_words));
    replace_all(p.user, "{top_words}", words);
    replace_all(p.user, "{bios}", bios);
    replace_all(p.system, "{max_name_words}", std::to_string(config.max_name_words));
    return p;
}

namespace {

bool is_strip_char(char32_t c) {
    switch (c) {
        case U'"': case U'\'': case U'`': case U'.': case U',': case U';': case U':': case U'!': case U'?':
        case U'*': case U'_': case U'(': case U')': case U'[': case U']': case U'{': case U'}':
        case U'“': case U'”': case U'‘': case U'’': case U'«': case U'»':
        case U' ': case U'\t': case U'\r': case U' ':
            return true;
        default:
            return false;
    }
}

}  // namespace

ParsedName parse_name(std::string_view raw) {
    std::string_view line;
    std::size_t pos = 0;
    while (pos <= raw.size()) {
        auto end = raw.find('\n', pos);
        if (end == std::string_view::npos) end = raw.size();
        auto candidate = raw.substr(pos, end - pos);
        if (candidate.find_first_not_of(" \t\r") != std::string_view::npos) {
            line = candidate;
            break;
        }
        pos = end + 1;
    }
    auto cps = utf8_decode(line);
    std::size_t b = 0, e = cps.size();
    while (b < e && is_strip_char(cps[b])) ++b;
    while (e > b && is_strip_char(cps[e - 1])) --e;
    ParsedName p;
    p.name = utf8_encode(std::u32string_view(cps).substr(b, e - b));
    if (p.name.empty()) throw Error("empty completion");
    p.word_count = word_count(p.name);
    auto tokens = normalize_name(p.name);
    p.is_none = tokens.size() == 1 && tokens[0] == "none";
    return p;
}

void to_json(json& j, const JudgeResponse& r) {
    j = json{{"cluster_key", r.cluster_key},
             {"run_index", r.run_index},
             {"raw_text", r.raw_text},
             {"parsed_name", r.parsed_name},
             {"is_none", r.is_none},
             {"word_count", r.word_count},
             {"constraint_violation", r.constraint_violation},
             {"latency_ms", r.latency_ms},
             {"prompt_tokens", r.prompt_tokens},
             {"completion_tokens", r.completion_tokens}};
}

void from_json(const json& j, JudgeResponse& r) {
    r.cluster_key = j.at("cluster_key").get<std::string>();
    r.run_index = j.at("run_index").get<int>();
    r.raw_text = j.value("raw_text", std::string{});
    r.parsed_name = j.at("parsed_name").get<std::string>();
    r.is_none = j.value("is_none", false);
    r.word_count = j.value("word_count", std::size_t{0});
    r.constraint_violation = j.value("constraint_violation", false);
    r.latency_ms = j.value("latency_ms", 0.0);
    r.prompt_tokens = j.value("prompt_tokens", -1LL);
    r.completion_tokens = j.value("completion_tokens", -1LL);
}

JudgeResponse request_name(const JudgeConfig& config, const ClusterSample& sample, int run_index) {
    auto prompt = build_prompt(sample, config);
    json body{{"model", config.model_id},
              {"temperature", config.temperature},
              {"messages", json::array({json{{"role", "system"}, {"content", prompt.system}},
                                        json{{"role", "user"}, {"content", prompt.user}}})}};
    auto start = std::chrono::steady_clock::now();
    auto reply = http::post_json(config.endpoint, "/chat/completions", body, config.retry);
    auto elapsed = std::chrono::steady_clock::now() - start;

    JudgeResponse r;
    r.cluster_key = sample.cluster_key;
    r.run_index = run_index;
    try {
        r.raw_text = reply.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const json::exception&) {
        throw HttpError("chat completion response lacks choices[0].message.content", 200);
    }
    auto parsed = parse_name(r.raw_text);
    r.parsed_name = parsed.name;
    r.is_none = parsed.is_none;
    r.word_count = parsed.word_count;
    r.constraint_violation = parsed.word_count > config.max_name_words;
    if (config.record_latency) r.latency_ms = std::chrono::duration<double, std::milli>(elapsed).count();
    if (reply.contains("usage") && reply["usage"].is_object()) {
        r.prompt_tokens = reply["usage"].value("prompt_tokens", -1LL);
        r.completion_tokens = reply["usage"].value("completion_tokens", -1LL);
    }
    return r;
}

// ---------------------------------------------------------------------------

ResponseLog::ResponseLog(std::filesystem::path path) : path_(std::move(path)) {
    // Drop a partial last line left by an interrupted write, so later appends
    // keep the log parseable.
    std::ifstream in(path_, std::ios::binary);
    if (!in) return;
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    in.close();
    if (text.empty() || text.back() == '\n') return;
    auto cut = text.rfind('\n');
    std::string last = text.substr(cut == std::string::npos ? 0 : cut + 1);
    bool ok = true;
    try {
        (void)json::parse(last).get<JudgeResponse>();
    } catch (const json::exception&) {
        ok = false;
    }
    std::filesystem::resize_file(path_, ok ? text.size() : (cut == std::string::npos ? 0 : cut + 1));
    if (ok) std::ofstream(path_, std::ios::app) << '\n';
}

std::vector<JudgeResponse> ResponseLog::read() const { return load_response_log(path_); }

void ResponseLog::append(const JudgeResponse& r) {
    std::lock_guard lock(mutex_);
    std::ofstream out(path_, std::ios::app);
    if (!out) throw Error("cannot append to " + path_.string());
    out << json(r).dump() << '\n';
    out.flush();
}

std::vector<JudgeResponse> load_response_log(const std::filesystem::path& path) {
    std::vector<JudgeResponse> out;
    std::ifstream in(path);
    if (!in) return out;
    std::string line;
    std::size_t line_no = 0;
    bool pending_error = false;
    std::size_t error_line = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        // A malformed line is only tolerated as the last one (interrupted write).
        if (pending_error) throw ParseError("malformed response log entry", error_line);
        try {
            out.push_back(json::parse(line).get<JudgeResponse>());
        } catch (const json::exception&) {
            pending_error = true;
            error_line = line_no;
        }
    }
    return out;
}

NameSet names_from_responses(const std::vector<JudgeResponse>& responses, const std::vector<std::string>& keys,
                             int repetitions, std::string source) {
    if (repetitions < 1) throw Error("repetitions must be at least 1");
    std::map<std::string, std::vector<const JudgeResponse*>> slots;
    for (const auto& k : keys) slots[k].assign(static_cast<std::size_t>(repetitions), nullptr);
    for (const auto& r : responses) {
        auto it = slots.find(r.cluster_key);
        if (it == slots.end() || r.run_index < 0 || r.run_index >= repetitions) continue;
        auto& slot = it->second[static_cast<std::size_t>(r.run_index)];
        if (!slot) slot = &r;
    }
    NameSet s;
    s.source = std::move(source);
    s.n_reviewers = static_cast<std::size_t>(repetitions);
    for (const auto& [key, list] : slots) {
        auto& names = s.names[key];
        for (std::size_t i = 0; i < list.size(); ++i) {
            if (!list[i]) throw Error("no judge response for cluster " + key + ", run " + std::to_string(i));
            names.push_back(list[i]->parsed_name);
        }
    }
    return s;
}

NameSet collect_names(const JudgeConfig& config, const ReviewPacket& packet, const std::filesystem::path& log_path,
                      CollectStats* stats) {
    config.validate();
    if (packet.samples.empty()) throw Error("review packet has no samples");

    ResponseLog log(log_path);
    std::set<std::pair<std::string, int>> done;
    for (const auto& r : log.read()) done.emplace(r.cluster_key, r.run_index);

    std::vector<std::pair<const ClusterSample*, int>> pending;
    std::size_t resumed = 0;
    for (const auto& s : packet.samples)
        for (int run = 0; run < config.repetitions; ++run) {
            if (done.count({s.cluster_key, run}))
                ++resumed;
            else
                pending.emplace_back(&s, run);
        }

    std::atomic<std::size_t> next{0};
    std::atomic<bool> abort{false};
    std::mutex failed_mutex;
    std::vector<std::pair<std::string, int>> failed;
    std::exception_ptr fatal;
    std::atomic<std::size_t> violations{0}, nones{0};

    auto worker = [&] {
        while (!abort) {
            std::size_t i = next++;
            if (i >= pending.size()) return;
            const auto& [sample, run] = pending[i];
            try {
                auto r = request_name(config, *sample, run);
                if (r.constraint_violation) ++violations;
                if (r.is_none) ++nones;
                log.append(r);
            } catch (const AuthError&) {
                std::lock_guard lock(failed_mutex);
                if (!fatal) fatal = std::current_exception();
                abort = true;
            } catch (const Error&) {
                std::lock_guard lock(failed_mutex);
                failed.emplace_back(sample->cluster_key, run);
            }
        }
    };
    std::size_t n_threads = std::min(config.max_concurrent, std::max<std::size_t>(1, pending.size()));
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (fatal) std::rethrow_exception(fatal);

    if (stats) {
        stats->requested = pending.size();
        stats->resumed = resumed;
        stats->violations = violations;
        stats->none_answers = nones;
    }
    if (!failed.empty()) {
        std::sort(failed.begin(), failed.end());
        std::string msg = std::to_string(failed.size()) + " judge requests failed:";
        for (std::size_t i = 0; i < failed.size() && i < 20; ++i)
            msg += " " + failed[i].first + "#" + std::to_string(failed[i].second);
        if (failed.size() > 20) msg += " ...";
        throw JudgeError(msg, std::move(failed));
    }

    std::vector<std::string> keys;
    for (const auto& s : packet.samples) keys.push_back(s.cluster_key);
    return names_from_responses(log.read(), keys, config.repetitions, "judge:" + config.model_id);
}

}  // namespace clustval
