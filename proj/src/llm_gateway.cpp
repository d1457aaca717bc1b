#include "hdlgen/llm_gateway.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include <json.hpp>

namespace hdlgen::llm {

using nlohmann::json;

std::size_t estimate_tokens(std::string_view text) {
    return (text.size() + 3) / 4;
}

std::string serialize_messages(const std::vector<ChatMessage>& messages) {
    std::ostringstream os;
    for (const auto& m : messages)
        os << m.role << ": " << m.content << "\n";
    return os.str();
}

std::string digest_messages(const std::vector<ChatMessage>& messages) {
    // FNV-1a 64 over role/content with unambiguous separators.
    std::uint64_t h = 1469598103934665603ull;
    auto mix = [&h](std::string_view s) {
        for (unsigned char c : s) {
            h ^= c;
            h *= 1099511628211ull;
        }
        h ^= 0x1f;
        h *= 1099511628211ull;
    };
    for (const auto& m : messages) {
        mix(m.role);
        mix(m.content);
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

void ChatSession::set_system(const std::string& content) {
    if (!messages_.empty() && messages_.front().role == "system")
        messages_.front().content = content;
    else
        messages_.insert(messages_.begin(), {"system", content});
}

namespace {

std::size_t total_tokens(const std::vector<ChatMessage>& msgs) {
    std::size_t t = 0;
    for (const auto& m : msgs)
        t += estimate_tokens(m.content);
    return t;
}

// Drop middle turns until the list fits: keep system, the first user turn
// and the tail of the conversation.
std::vector<ChatMessage> fit_to_context(std::vector<ChatMessage> msgs, std::size_t limit) {
    while (total_tokens(msgs) > limit) {
        std::size_t first_user = 0;
        while (first_user < msgs.size() && msgs[first_user].role == "system")
            ++first_user;
        // droppable range: after the first user turn, before the last two turns
        std::size_t drop = first_user + 1;
        if (drop + 2 >= msgs.size())
            throw ContextOverflow("conversation exceeds context limit after truncation");
        msgs.erase(msgs.begin() + static_cast<std::ptrdiff_t>(drop));
    }
    return msgs;
}

} // namespace

std::string complete(ChatSession& session, Backend& backend, const std::string& user_message) {
    auto candidate = session.messages_;
    candidate.push_back({"user", user_message});
    candidate = fit_to_context(std::move(candidate),
                               static_cast<std::size_t>(session.max_context_tokens_));
    std::string reply = backend.complete(candidate, session.temperature_);
    candidate.push_back({"assistant", reply});
    session.messages_ = std::move(candidate);
    return reply;
}

void Transcript::add(TranscriptEntry entry) {
    auto it = by_digest_.find(entry.prompt_digest);
    if (it != by_digest_.end()) {
        if (entries_[it->second].response != entry.response)
            throw ValueError("transcript digest collision with differing responses: " +
                             entry.prompt_digest);
        return;
    }
    by_digest_[entry.prompt_digest] = entries_.size();
    entries_.push_back(std::move(entry));
}

std::optional<std::string> Transcript::lookup(const std::string& digest) const {
    auto it = by_digest_.find(digest);
    if (it == by_digest_.end())
        return std::nullopt;
    return entries_[it->second].response;
}

void Transcript::save(const std::filesystem::path& file) const {
    std::ofstream os(file, std::ios::trunc);
    if (!os)
        throw ValueError("cannot write transcript: " + file.string());
    for (const auto& e : entries_) {
        json j{{"prompt_digest", e.prompt_digest},
               {"full_prompt", e.full_prompt},
               {"response", e.response},
               {"model_tag", e.model_tag}};
        os << j.dump() << "\n";
    }
}

Transcript Transcript::load(const std::filesystem::path& file) {
    std::ifstream is(file);
    if (!is)
        throw ReplayMiss("transcript file missing: " + file.string());
    Transcript t;
    std::string line;
    int line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty())
            continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw ParseError(std::string("bad transcript record: ") + e.what(), line_no);
        }
        t.add({j.value("prompt_digest", ""), j.value("full_prompt", ""),
               j.value("response", ""), j.value("model_tag", "")});
    }
    return t;
}

void ScriptedBackend::add_rule(const std::string& substring, const std::string& response) {
    Rule r;
    r.substring = substring;
    r.response = response;
    rules_.push_back(std::move(r));
}

void ScriptedBackend::add_regex_rule(const std::string& pattern, const std::string& response) {
    Rule r;
    r.regex = std::regex(pattern);
    r.response = response;
    rules_.push_back(std::move(r));
}

void ScriptedBackend::add_fn_rule(
    std::function<std::optional<std::string>(const std::vector<ChatMessage>&)> fn) {
    Rule r;
    r.fn = std::move(fn);
    rules_.push_back(std::move(r));
}

ScriptedBackend ScriptedBackend::from_file(const std::filesystem::path& json_file) {
    std::ifstream is(json_file);
    if (!is)
        throw ValueError("cannot read script file: " + json_file.string());
    json j = json::parse(is);
    ScriptedBackend b;
    for (const auto& rule : j) {
        if (rule.contains("regex"))
            b.add_regex_rule(rule.at("regex").get<std::string>(),
                             rule.at("response").get<std::string>());
        else
            b.add_rule(rule.at("match").get<std::string>(),
                       rule.at("response").get<std::string>());
    }
    return b;
}

std::string ScriptedBackend::complete(const std::vector<ChatMessage>& messages, Rat) {
    std::string target = serialize_messages(messages);
    std::lock_guard lock(*mutex_);
    calls_.push_back(target);
    for (const auto& r : rules_) {
        if (r.fn) {
            if (auto resp = r.fn(messages))
                return *resp;
            continue;
        }
        if (r.substring && target.find(*r.substring) != std::string::npos)
            return r.response;
        if (r.regex && std::regex_search(target, *r.regex))
            return r.response;
    }
    throw BackendUnavailable("scripted backend: no rule matched prompt:\n" + target);
}

std::string ReplayBackend::complete(const std::vector<ChatMessage>& messages, Rat) {
    auto digest = digest_messages(messages);
    auto resp = transcript_.lookup(digest);
    if (!resp)
        throw ReplayMiss("no transcript entry for digest " + digest);
    return *resp;
}

std::string ReplayBackend::model_tag() const {
    if (!transcript_.entries().empty())
        return transcript_.entries().front().model_tag;
    return "replay";
}

RecordingBackend::RecordingBackend(std::shared_ptr<Backend> inner,
                                   std::filesystem::path transcript_file)
    : inner_(std::move(inner)), file_(std::move(transcript_file)) {}

std::string RecordingBackend::complete(const std::vector<ChatMessage>& messages, Rat temperature) {
    std::string reply = inner_->complete(messages, temperature);
    std::string digest = digest_messages(messages);
    std::lock_guard lock(mutex_);
    auto it = seen_.find(digest);
    if (it != seen_.end()) {
        if (it->second != reply)
            throw ValueError("non-deterministic backend: digest " + digest +
                             " produced two different responses");
        return reply;
    }
    seen_[digest] = reply;
    json j{{"prompt_digest", digest},
           {"full_prompt", serialize_messages(messages)},
           {"response", reply},
           {"model_tag", inner_->model_tag()}};
    std::ofstream os(file_, std::ios::app);
    if (!os)
        throw ValueError("cannot append transcript: " + file_.string());
    os << j.dump() << "\n";
    return reply;
}

} // namespace hdlgen::llm
