#include "clustval/http.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <thread>

#include <httplib.h>

#include "clustval/error.hpp"

namespace clustval::http {

std::chrono::milliseconds RetryPolicy::backoff(int retry) const {
    double ms = static_cast<double>(initial_backoff.count()) * std::pow(multiplier, retry);
    ms = std::min(ms, static_cast<double>(max_backoff.count()));
    return std::chrono::milliseconds(static_cast<long long>(ms));
}

std::pair<std::string, std::string> split_url(const std::string& url) {
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw Error("URL needs a scheme: " + url);
    auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, ""};
    std::string path = url.substr(path_start);
    while (!path.empty() && path.back() == '/') path.pop_back();
    return {url.substr(0, path_start), path};
}

namespace {

bool transient(int status) { return status == 408 || status == 429 || status >= 500; }

}  // namespace

nlohmann::json post_json(const Endpoint& endpoint, const std::string& path, const nlohmann::json& body,
                         const RetryPolicy& policy) {
    auto [host, prefix] = split_url(endpoint.base_url);
    httplib::Client client(host);
    client.set_connection_timeout(endpoint.timeout);
    client.set_read_timeout(endpoint.timeout);
    client.set_write_timeout(endpoint.timeout);
    httplib::Headers headers;
    if (!endpoint.bearer_token.empty()) headers.emplace("Authorization", "Bearer " + endpoint.bearer_token);

    const std::string payload = body.dump();
    std::string last_error;
    int last_status = -1;
    for (int attempt = 0; attempt <= policy.max_retries; ++attempt) {
        if (attempt > 0) std::this_thread::sleep_for(policy.backoff(attempt - 1));
        auto res = client.Post(prefix + path, headers, payload, "application/json");
        if (!res) {
            last_status = -1;
            last_error = "transport error: " + httplib::to_string(res.error());
            continue;
        }
        last_status = res->status;
        if (res->status == 401 || res->status == 403)
            throw AuthError("authentication failed (HTTP " + std::to_string(res->status) + ")", res->status);
        if (res->status >= 200 && res->status < 300) {
            try {
                return nlohmann::json::parse(res->body);
            } catch (const nlohmann::json::parse_error& e) {
                throw HttpError(std::string("response is not JSON: ") + e.what(), res->status);
            }
        }
        last_error = "HTTP " + std::to_string(res->status);
        if (!transient(res->status)) break;
    }
    throw HttpError("POST " + endpoint.base_url + path + " failed: " + last_error, last_status);
}

std::string env_or_empty(const char* name) {
    const char* v = std::getenv(name);
    return v ? v : "";
}

}  // namespace clustval::http
