#include "hdlgen/llm_gateway.hpp"

#include <chrono>
#include <cstdlib>
#include <thread>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>
#include <json.hpp>

namespace hdlgen::llm {

using nlohmann::json;

LiveBackend::LiveBackend(LiveBackendConfig cfg) : cfg_(std::move(cfg)) {
    if (const char* key = std::getenv(cfg_.api_key_env.c_str()))
        api_key_ = key;
    int permits = std::clamp(cfg_.max_concurrent_requests, 1, 64);
    gate_ = std::make_unique<std::counting_semaphore<64>>(permits);
}

namespace {

// "https://host[:port]/base" -> {scheme://host[:port], /base}
std::pair<std::string, std::string> split_url(const std::string& url) {
    auto scheme_end = url.find("://");
    auto path_start = url.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
    if (path_start == std::string::npos)
        return {url, ""};
    return {url.substr(0, path_start), url.substr(path_start)};
}

} // namespace

std::string LiveBackend::complete(const std::vector<ChatMessage>& messages, Rat temperature) {
    if (api_key_.empty())
        throw BackendUnavailable("no API key in environment variable " + cfg_.api_key_env);

    json body;
    body["model"] = cfg_.model;
    body["temperature"] = temperature.to_double();
    body["max_tokens"] = cfg_.max_tokens;
    body["messages"] = json::array();
    for (const auto& m : messages)
        body["messages"].push_back({{"role", m.role}, {"content", m.content}});

    auto [host, base] = split_url(cfg_.base_url);
    gate_->acquire();
    struct Release {
        std::counting_semaphore<64>* g;
        ~Release() { g->release(); }
    } release{gate_.get()};

    std::string last_error;
    for (int attempt = 0; attempt < 2; ++attempt) {
        if (attempt > 0)
            std::this_thread::sleep_for(std::chrono::seconds(2));
        httplib::Client client(host);
        client.set_read_timeout(120, 0);
        httplib::Headers headers{{"Authorization", "Bearer " + api_key_}};
        auto res = client.Post(base + "/chat/completions", headers, body.dump(),
                               "application/json");
        if (!res) {
            last_error = "transport error: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status == 429 || res->status >= 500) {
            last_error = "HTTP " + std::to_string(res->status);
            continue;
        }
        if (res->status != 200)
            throw BackendUnavailable("chat completion failed: HTTP " +
                                     std::to_string(res->status) + " " + res->body);
        try {
            json j = json::parse(res->body);
            return j.at("choices").at(0).at("message").at("content").get<std::string>();
        } catch (const json::exception& e) {
            throw BackendUnavailable(std::string("malformed completion response: ") + e.what());
        }
    }
    throw BackendUnavailable("chat completion failed after retry: " + last_error);
}

} // namespace hdlgen::llm
