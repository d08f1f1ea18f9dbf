#pragma once

#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "clustval/partition.hpp"

namespace clustval {

struct ReviewServerOptions {
    std::string host = "127.0.0.1";
    int port = 8080;  // 0 picks a free port
    std::optional<std::filesystem::path> static_dir;
    /// Longest accepted name, in words.
    std::size_t max_name_words = 10;
    /// Store confidence 1 when the name is "None".
    bool none_override = true;
};

/// Cluster keys in the order a reviewer sees them; a deterministic shuffle
/// seeded by (packet id, reviewer id).
std::vector<std::string> presentation_order(const ReviewPacket& packet, const std::string& reviewer_id);

struct ApiResponse {
    int status = 200;
    nlohmann::json body;
};

/// Backs the review UI. Responses are appended to a CSV file with the
/// reviewer-responses header; existing rows are loaded at start so duplicate
/// submissions are rejected across restarts.
class ReviewServer {
public:
    ReviewServer(ReviewPacket packet, std::filesystem::path responses_path, ReviewServerOptions options = {});
    ~ReviewServer();
    ReviewServer(const ReviewServer&) = delete;
    ReviewServer& operator=(const ReviewServer&) = delete;

    // Handlers, callable without a socket.
    ApiResponse get_packet(const std::string& reviewer_id) const;
    ApiResponse post_response(const std::string& body);
    ApiResponse get_progress(const std::string& reviewer_id) const;

    /// Binds and serves on a background thread; returns the bound port.
    int start();
    /// Binds and serves on the calling thread until stop().
    void listen();
    void stop();
    int port() const noexcept { return port_; }

private:
    struct Impl;
    ReviewPacket packet_;
    std::filesystem::path responses_path_;
    ReviewServerOptions options_;
    mutable std::mutex mutex_;
    std::set<std::pair<std::string, std::string>> completed_;  // (reviewer, cluster)
    std::unique_ptr<Impl> impl_;
    std::thread thread_;
    int port_ = 0;

    void bind();
};

}  // namespace clustval
