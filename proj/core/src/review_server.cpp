#include "clustval/review_server.hpp"

#include <fstream>

#include <httplib.h>

#include "clustval/csv.hpp"
#include "clustval/error.hpp"
#include "clustval/random.hpp"
#include "clustval/stats.hpp"

namespace clustval {

using json = nlohmann::json;

std::vector<std::string> presentation_order(const ReviewPacket& packet, const std::string& reviewer_id) {
    std::string seed_text = packet.packet_id + '\x1f' + reviewer_id;
    Rng rng(fnv1a(seed_text.data(), seed_text.size()));
    std::vector<std::string> keys;
    for (const auto& s : packet.samples) keys.push_back(s.cluster_key);
    rng.shuffle(keys);
    return keys;
}

struct ReviewServer::Impl {
    httplib::Server server;
};

ReviewServer::ReviewServer(ReviewPacket packet, std::filesystem::path responses_path, ReviewServerOptions options)
    : packet_(std::move(packet)), responses_path_(std::move(responses_path)), options_(std::move(options)) {
    if (std::filesystem::exists(responses_path_) && std::filesystem::file_size(responses_path_) > 0) {
        auto existing = load_responses(responses_path_, false);
        for (const auto& r : existing.rows) completed_.emplace(r.reviewer_id, r.cluster_key);
    }
}

ReviewServer::~ReviewServer() { stop(); }

ApiResponse ReviewServer::get_packet(const std::string& reviewer_id) const {
    if (reviewer_id.empty()) return {422, {{"errors", {{"reviewer", "required"}}}}};
    json samples = json::array();
    for (const auto& key : presentation_order(packet_, reviewer_id)) {
        const auto* s = packet_.find(key);
        samples.push_back({{"cluster_key", s->cluster_key}, {"top_words", s->top_words}, {"sample_bios", s->sample_bios}});
    }
    return {200, {{"packet_id", packet_.packet_id}, {"reviewer_id", reviewer_id}, {"samples", samples}}};
}

ApiResponse ReviewServer::get_progress(const std::string& reviewer_id) const {
    if (reviewer_id.empty()) return {422, {{"errors", {{"reviewer", "required"}}}}};
    json done = json::array();
    std::lock_guard lock(mutex_);
    for (const auto& key : presentation_order(packet_, reviewer_id))
        if (completed_.count({reviewer_id, key})) done.push_back(key);
    return {200, {{"reviewer_id", reviewer_id}, {"completed", done}, {"total", packet_.samples.size()}}};
}

ApiResponse ReviewServer::post_response(const std::string& body) {
    json in;
    try {
        in = json::parse(body);
    } catch (const json::parse_error&) {
        return {422, {{"errors", {{"body", "not valid JSON"}}}}};
    }
    if (!in.is_object()) return {422, {{"errors", {{"body", "expected a JSON object"}}}}};

    json errors = json::object();
    auto text = [&](const char* field) -> std::string {
        if (!in.contains(field) || in[field].is_null()) {
            errors[field] = "required";
            return {};
        }
        if (!in[field].is_string()) {
            errors[field] = "must be a string";
            return {};
        }
        return in[field].get<std::string>();
    };
    Rating r;
    r.reviewer_id = text("reviewer_id");
    r.cluster_key = text("cluster_key");
    r.name = text("name");
    if (!errors.contains("reviewer_id") && r.reviewer_id.empty()) errors["reviewer_id"] = "required";
    if (!errors.contains("cluster_key") && !packet_.find(r.cluster_key)) errors["cluster_key"] = "unknown cluster";
    if (!errors.contains("name")) {
        std::size_t words = word_count(r.name);
        if (words == 0)
            errors["name"] = "required (answer \"None\" if the cluster cannot be named)";
        else if (words > options_.max_name_words)
            errors["name"] = "at most " + std::to_string(options_.max_name_words) + " words";
    }
    for (auto q : kQuestions) {
        const auto field = to_string(q);
        if (!in.contains(field) || in[field].is_null()) {
            errors[field] = "required";
            continue;
        }
        const auto& v = in[field];
        try {
            if (v.is_number_integer()) {
                int x = v.get<int>();
                if (x < 1 || x > 5) throw Error("out of range");
                r.values[static_cast<std::size_t>(q)] = x;
            } else if (v.is_string()) {
                r.values[static_cast<std::size_t>(q)] = encode_likert(v.get<std::string>(), q);
            } else {
                throw Error("bad type");
            }
        } catch (const Error&) {
            errors[field] = "expected a scale label or an integer 1-5";
        }
    }
    if (!errors.empty()) return {422, {{"errors", errors}}};
    if (options_.none_override && is_none_name(r.name)) r.values[0] = 1;

    std::lock_guard lock(mutex_);
    if (completed_.count({r.reviewer_id, r.cluster_key}))
        return {409, {{"error", "response already recorded for this reviewer and cluster"}}};
    bool fresh = !std::filesystem::exists(responses_path_) || std::filesystem::file_size(responses_path_) == 0;
    std::ofstream out(responses_path_, std::ios::app);
    if (!out) return {500, {{"error", "cannot write responses"}}};
    if (fresh) out << kResponsesHeader << '\n';
    std::vector<std::string> row{r.reviewer_id, r.cluster_key, r.name};
    for (int v : r.values) row.push_back(std::to_string(v));
    csv::write_row(out, row);
    out.flush();
    completed_.emplace(r.reviewer_id, r.cluster_key);

    json stored{{"reviewer_id", r.reviewer_id}, {"cluster_key", r.cluster_key}, {"name", r.name}};
    for (auto q : kQuestions) stored[to_string(q)] = r.value(q);
    return {200, {{"status", "ok"}, {"stored", stored}}};
}

void ReviewServer::bind() {
    if (impl_) return;
    impl_ = std::make_unique<Impl>();
    auto& svr = impl_->server;
    auto reply = [](httplib::Response& res, const ApiResponse& r) {
        res.status = r.status;
        res.set_content(r.body.dump(), "application/json");
    };
    svr.Get("/api/packet", [this, reply](const httplib::Request& req, httplib::Response& res) {
        reply(res, get_packet(req.get_param_value("reviewer")));
    });
    svr.Get("/api/progress", [this, reply](const httplib::Request& req, httplib::Response& res) {
        reply(res, get_progress(req.get_param_value("reviewer")));
    });
    svr.Post("/api/responses", [this, reply](const httplib::Request& req, httplib::Response& res) {
        reply(res, post_response(req.body));
    });
    if (options_.static_dir && !svr.set_mount_point("/", options_.static_dir->string()))
        throw Error("static directory not found: " + options_.static_dir->string());
    if (options_.port == 0) {
        port_ = svr.bind_to_any_port(options_.host);
    } else {
        port_ = svr.bind_to_port(options_.host, options_.port) ? options_.port : -1;
    }
    if (port_ <= 0) {
        impl_.reset();
        throw Error("cannot bind " + options_.host + ":" + std::to_string(options_.port));
    }
}

int ReviewServer::start() {
    bind();
    thread_ = std::thread([this] { impl_->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
    return port_;
}

void ReviewServer::listen() {
    bind();
    impl_->server.listen_after_bind();
}

void ReviewServer::stop() {
    if (impl_) impl_->server.stop();
    if (thread_.joinable()) thread_.join();
}

}  // namespace clustval
