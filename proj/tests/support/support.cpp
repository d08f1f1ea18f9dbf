#include "support.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include <httplib.h>

#include "clustval/random.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace testsupport {

fs::path data_dir() { return CLUSTVAL_TEST_DATA_DIR; }
fs::path project_data_dir() { return CLUSTVAL_PROJECT_DATA_DIR; }

const json& fixtures() {
    static const json j = [] {
        std::ifstream in(data_dir() / "oracle_fixtures.json");
        return json::parse(in);
    }();
    return j;
}

TempDir::TempDir() {
    static std::atomic<unsigned> counter{0};
    std::random_device rd;
    path_ = fs::temp_directory_path() /
            ("clustval-test-" + std::to_string(rd()) + "-" + std::to_string(counter++));
    fs::create_directories(path_);
}

TempDir::~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
}

void write_text(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    out << text;
}

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

namespace {

// Letter strings such as "bgab"; no stopword list contains them.
std::string synth_word(const std::string& prefix, std::size_t i) {
    std::string s = prefix;
    do {
        s.push_back(static_cast<char>('a' + i % 26));
        i /= 26;
    } while (i);
    return s;
}

}  // namespace

PlantedCorpus planted_corpus(std::size_t n_docs, int n_topics, std::uint64_t seed, double topic_share,
                             std::size_t min_len, std::size_t max_len) {
    clustval::Rng rng(seed);
    const std::size_t topic_vocab = 40, background_vocab = 200;
    PlantedCorpus pc;
    pc.n_topics = n_topics;
    std::vector<std::pair<std::string, std::string>> records;
    for (std::size_t d = 0; d < n_docs; ++d) {
        int t = static_cast<int>(d % static_cast<std::size_t>(n_topics));
        pc.topic.push_back(t);
        std::size_t len = min_len + rng.index(max_len - min_len + 1);
        std::string text;
        for (std::size_t i = 0; i < len; ++i) {
            if (i) text.push_back(' ');
            if (rng.uniform() < topic_share)
                text += synth_word("t" + synth_word("", static_cast<std::size_t>(t)) + "x", rng.index(topic_vocab));
            else
                text += synth_word("bg", rng.index(background_vocab));
        }
        records.emplace_back("d" + std::to_string(d), text);
    }
    pc.corpus = clustval::Corpus::from_texts(std::move(records), clustval::TokenizerConfig::analysis());
    return pc;
}

clustval::Corpus homogeneous_corpus(std::size_t n_docs, std::uint64_t seed, std::size_t vocab, std::size_t min_len,
                                    std::size_t max_len) {
    clustval::Rng rng(seed);
    // Zipf-like weights so the distribution has frequent and rare words.
    std::vector<double> cdf(vocab);
    double total = 0.0;
    for (std::size_t i = 0; i < vocab; ++i) cdf[i] = (total += 1.0 / static_cast<double>(i + 1));
    std::vector<std::pair<std::string, std::string>> records;
    for (std::size_t d = 0; d < n_docs; ++d) {
        std::size_t len = min_len + rng.index(max_len - min_len + 1);
        std::string text;
        for (std::size_t i = 0; i < len; ++i) {
            double u = rng.uniform() * total;
            auto w = static_cast<std::size_t>(std::lower_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
            if (i) text.push_back(' ');
            text += synth_word("hw", std::min(w, vocab - 1));
        }
        records.emplace_back("h" + std::to_string(d), text);
    }
    return clustval::Corpus::from_texts(std::move(records), clustval::TokenizerConfig::analysis());
}

clustval::Matrix gaussian_blobs(const std::vector<int>& labels, std::size_t dim, double spread, std::uint64_t seed) {
    clustval::Rng rng(seed);
    int k = 0;
    for (int l : labels) k = std::max(k, l + 1);
    clustval::Matrix centers(static_cast<std::size_t>(k), dim);
    for (auto& v : centers.data()) v = rng.normal() * spread;
    clustval::Matrix x(labels.size(), dim);
    for (std::size_t i = 0; i < labels.size(); ++i)
        for (std::size_t j = 0; j < dim; ++j) x(i, j) = centers(static_cast<std::size_t>(labels[i]), j) + rng.normal();
    return x;
}

// ---------------------------------------------------------------------------

struct MockOpenAi::Impl {
    httplib::Server server;
};

MockOpenAi::MockOpenAi() : MockOpenAi(Options{}) {}

MockOpenAi::MockOpenAi(Options options) : options_(std::move(options)), impl_(std::make_unique<Impl>()) {
    auto& svr = impl_->server;
    auto guard = [this](const httplib::Request& req, httplib::Response& res) {
        std::size_t n = total_requests_++;
        std::size_t now = ++in_flight_;
        for (auto seen = max_in_flight_.load(); now > seen && !max_in_flight_.compare_exchange_weak(seen, now);) {
        }
        if (options_.delay_ms) std::this_thread::sleep_for(std::chrono::milliseconds(options_.delay_ms));
        struct Leave {
            std::atomic<std::size_t>& c;
            ~Leave() { --c; }
        } leave{in_flight_};
        if (!options_.token.empty() && req.get_header_value("Authorization") != "Bearer " + options_.token) {
            res.status = 401;
            res.set_content(R"({"error":{"message":"bad key"}})", "application/json");
            return false;
        }
        if (static_cast<int>(n) < options_.fail_first) {
            res.status = options_.fail_status;
            res.set_content(R"({"error":{"message":"try later"}})", "application/json");
            return false;
        }
        return true;
    };
    svr.Post("/v1/chat/completions", [this, guard](const httplib::Request& req, httplib::Response& res) {
        if (!guard(req, res)) return;
        ++chat_requests_;
        auto body = json::parse(req.body);
        std::string user;
        for (const auto& m : body.at("messages"))
            if (m.at("role") == "user") user = m.at("content").get<std::string>();
        std::size_t n;
        {
            std::lock_guard lock(mutex_);
            n = per_prompt_[user]++;
            bodies_.push_back(body);
        }
        json reply{{"id", "mock"},
                   {"object", "chat.completion"},
                   {"model", body.value("model", "")},
                   {"choices", json::array({json{{"index", 0},
                                                 {"message", {{"role", "assistant"}, {"content", scripted_name(user, n)}}},
                                                 {"finish_reason", "stop"}}})},
                   {"usage", {{"prompt_tokens", user.size() / 4}, {"completion_tokens", 4}}}};
        res.set_content(reply.dump(), "application/json");
    });
    svr.Post("/v1/embeddings", [this, guard](const httplib::Request& req, httplib::Response& res) {
        if (!guard(req, res)) return;
        ++embed_requests_;
        auto body = json::parse(req.body);
        json data = json::array();
        std::size_t i = 0;
        for (const auto& text : body.at("input"))
            data.push_back({{"object", "embedding"},
                            {"index", i++},
                            {"embedding", scripted_embedding(text.get<std::string>(), options_.embedding_dim)}});
        if (options_.drop_last_embedding && !data.empty()) data.erase(data.size() - 1);
        res.set_content(json{{"object", "list"}, {"data", data}}.dump(), "application/json");
    });
    port_ = svr.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { impl_->server.listen_after_bind(); });
    svr.wait_until_ready();
}

MockOpenAi::~MockOpenAi() {
    impl_->server.stop();
    if (thread_.joinable()) thread_.join();
}

std::string MockOpenAi::base_url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1"; }

std::vector<json> MockOpenAi::chat_bodies() const {
    std::lock_guard lock(mutex_);
    return bodies_;
}

std::string MockOpenAi::scripted_name(const std::string& user_prompt, std::size_t n) {
    std::vector<std::string> words;
    std::istringstream in(user_prompt);
    std::string line;
    while (std::getline(in, line)) {
        if (line.rfind("Sample bios", 0) == 0) break;
        if (line.rfind("- ", 0) == 0) words.push_back(line.substr(2));
    }
    while (words.size() < 2) words.push_back("misc");
    switch (n % 6) {
        case 0: return words[0] + " " + words[1];
        case 1: return "\"" + words[0] + " fans\"";
        case 2: return words[0] + " lovers.";
        case 3: return "None";
        case 4: return words[1] + " and " + words[0] + " people who really love it";
        default: return "\n" + words[1] + " crowd\nThese bios share a theme.";
    }
}

std::vector<double> MockOpenAi::scripted_embedding(const std::string& text, std::size_t dim) {
    clustval::Rng rng(clustval::fnv1a(text.data(), text.size()));
    std::vector<double> v(dim);
    for (auto& x : v) x = rng.normal();
    return v;
}

}  // namespace testsupport

namespace testsupport {

std::vector<double> brute_silhouette(const clustval::Matrix& x, const std::vector<int>& labels, bool cosine) {
    const std::size_t n = x.rows(), d = x.cols();
    auto dist = [&](std::size_t i, std::size_t j) -> long double {
        long double dot = 0, ni = 0, nj = 0, sq = 0;
        for (std::size_t c = 0; c < d; ++c) {
            long double a = x(i, c), b = x(j, c);
            dot += a * b;
            ni += a * a;
            nj += b * b;
            sq += (a - b) * (a - b);
        }
        if (cosine) return 1.0L - dot / (std::sqrt(ni) * std::sqrt(nj));
        return std::sqrt(sq);
    };
    int k = 0;
    for (int l : labels) k = std::max(k, l + 1);
    std::vector<double> s(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<long double> sum(k, 0.0L);
        std::vector<std::size_t> cnt(k, 0);
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            sum[labels[j]] += dist(i, j);
            ++cnt[labels[j]];
        }
        if (cnt[labels[i]] == 0) continue;
        long double a = sum[labels[i]] / cnt[labels[i]];
        long double b = std::numeric_limits<long double>::infinity();
        for (int c = 0; c < k; ++c)
            if (c != labels[i] && cnt[c] > 0) b = std::min(b, sum[c] / cnt[c]);
        long double m = std::max(a, b);
        s[i] = m > 0 ? static_cast<double>((b - a) / m) : 0.0;
    }
    return s;
}

}  // namespace testsupport
