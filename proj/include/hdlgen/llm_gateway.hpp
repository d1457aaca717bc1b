#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <regex>
#include <semaphore>
#include <string>
#include <vector>

#include "hdlgen/domain.hpp"

namespace hdlgen::llm {

struct ChatMessage {
    std::string role;    // system | user | assistant
    std::string content;

    bool operator==(const ChatMessage&) const = default;
};

/// Upper-bound token estimate: ceil(characters / 4).
std::size_t estimate_tokens(std::string_view text);

/// Stable content hash (hex) of a serialized message list.
std::string digest_messages(const std::vector<ChatMessage>& messages);

/// Human-readable serialization of a message list, used as the transcript's
/// full_prompt field and as the scripted backend's match target.
std::string serialize_messages(const std::vector<ChatMessage>& messages);

class Backend {
public:
    virtual ~Backend() = default;
    virtual std::string complete(const std::vector<ChatMessage>& messages, Rat temperature) = 0;
    virtual std::string model_tag() const { return "backend"; }
};

/// Single-owner conversation. `complete` (below) keeps the message list
/// within max_context_tokens; on any backend error the session is unchanged.
class ChatSession {
public:
    ChatSession(Rat temperature, int max_context_tokens)
        : temperature_(temperature), max_context_tokens_(max_context_tokens) {}

    void set_system(const std::string& content);
    const std::vector<ChatMessage>& messages() const { return messages_; }
    Rat temperature() const { return temperature_; }
    int max_context_tokens() const { return max_context_tokens_; }

    std::vector<ChatMessage> snapshot() const { return messages_; }
    void restore(std::vector<ChatMessage> messages) { messages_ = std::move(messages); }

    friend std::string complete(ChatSession&, Backend&, const std::string&);

private:
    std::vector<ChatMessage> messages_;
    Rat temperature_{1, 2};
    int max_context_tokens_ = 4096;
};

/// Sends one user turn. If the conversation would exceed the context limit,
/// middle turns are dropped, keeping the leading system message, the first
/// user turn (the specification-bearing one) and the most recent exchange.
/// Throws ContextOverflow when that is still too long.
std::string complete(ChatSession& session, Backend& backend, const std::string& user_message);

struct TranscriptEntry {
    std::string prompt_digest;
    std::string full_prompt;
    std::string response;
    std::string model_tag;
};

/// Line-delimited record-and-replay store; digests are unambiguous keys.
class Transcript {
public:
    void add(TranscriptEntry entry);                 // throws ValueError on conflicting digest
    std::optional<std::string> lookup(const std::string& digest) const;
    const std::vector<TranscriptEntry>& entries() const { return entries_; }

    void save(const std::filesystem::path& file) const;
    static Transcript load(const std::filesystem::path& file);

private:
    std::vector<TranscriptEntry> entries_;
    std::map<std::string, std::size_t> by_digest_;
};

/// Deterministic test backend: ordered rules, first match wins. Rules match
/// against the serialized message list, so tests can key on the session
/// nonce, the latest prompt, or any earlier artifact.
class ScriptedBackend : public Backend {
public:
    void add_rule(const std::string& substring, const std::string& response);
    void add_regex_rule(const std::string& pattern, const std::string& response);
    void add_fn_rule(std::function<std::optional<std::string>(const std::vector<ChatMessage>&)> fn);

    static ScriptedBackend from_file(const std::filesystem::path& json_file);

    std::string complete(const std::vector<ChatMessage>& messages, Rat temperature) override;
    std::string model_tag() const override { return "scripted"; }

    /// All serialized prompts seen so far, for transcript-style audits.
    const std::vector<std::string>& calls() const { return calls_; }

private:
    struct Rule {
        std::optional<std::string> substring;
        std::optional<std::regex> regex;
        std::function<std::optional<std::string>(const std::vector<ChatMessage>&)> fn;
        std::string response;
    };
    std::vector<Rule> rules_;
    std::vector<std::string> calls_;
    std::unique_ptr<std::mutex> mutex_ = std::make_unique<std::mutex>();
};

/// Replays a recorded transcript; unknown digests raise ReplayMiss.
class ReplayBackend : public Backend {
public:
    explicit ReplayBackend(Transcript transcript) : transcript_(std::move(transcript)) {}

    std::string complete(const std::vector<ChatMessage>& messages, Rat temperature) override;
    std::string model_tag() const override;

private:
    Transcript transcript_;
};

/// Wraps any backend and appends every exchange to a transcript file.
/// Identical (digest, response) pairs are written once.
class RecordingBackend : public Backend {
public:
    RecordingBackend(std::shared_ptr<Backend> inner, std::filesystem::path transcript_file);

    std::string complete(const std::vector<ChatMessage>& messages, Rat temperature) override;
    std::string model_tag() const override { return inner_->model_tag(); }

private:
    std::shared_ptr<Backend> inner_;
    std::filesystem::path file_;
    std::mutex mutex_;
    std::map<std::string, std::string> seen_;
};

struct LiveBackendConfig {
    std::string base_url = "https://api.openai.com/v1";
    std::string model = "gpt-4";
    std::string api_key_env = "LLM_API_KEY";
    int max_tokens = 4096;
    int max_concurrent_requests = 4;
};

/// OpenAI-compatible chat-completions client. One retry with backoff on
/// transient failures, then BackendUnavailable.
class LiveBackend : public Backend {
public:
    explicit LiveBackend(LiveBackendConfig cfg);

    std::string complete(const std::vector<ChatMessage>& messages, Rat temperature) override;
    std::string model_tag() const override { return cfg_.model; }

private:
    LiveBackendConfig cfg_;
    std::string api_key_;
    std::unique_ptr<std::counting_semaphore<64>> gate_;
};

} // namespace hdlgen::llm
