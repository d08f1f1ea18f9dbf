#pragma once

#include <chrono>
#include <string>

#include <nlohmann/json.hpp>

namespace clustval::http {

/// Exponential backoff: attempt n (0-based retry) sleeps
/// min(initial * multiplier^n, max_backoff).
struct RetryPolicy {
    int max_retries = 3;
    std::chrono::milliseconds initial_backoff{500};
    double multiplier = 2.0;
    std::chrono::milliseconds max_backoff{30000};

    std::chrono::milliseconds backoff(int retry) const;
};

struct Endpoint {
    /// e.g. "https://api.openai.com/v1" or "http://127.0.0.1:8080".
    std::string base_url;
    std::string bearer_token;
    std::chrono::seconds timeout{60};
};

/// Splits a base URL into scheme://host[:port] and a path prefix without
/// trailing slash.
std::pair<std::string, std::string> split_url(const std::string& url);

/// POSTs `body` to base_url + path and parses the JSON response.
///
/// Transport errors, 408, 429 and 5xx are retried per `policy`. 401/403 throw
/// AuthError immediately; other non-2xx statuses throw HttpError.
nlohmann::json post_json(const Endpoint& endpoint, const std::string& path, const nlohmann::json& body,
                         const RetryPolicy& policy);

/// Value of an environment variable or empty string.
std::string env_or_empty(const char* name);

}  // namespace clustval::http
