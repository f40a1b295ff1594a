#include "dualdrive/agent/external_chat.hpp"

#include <cmath>
#include <cstdlib>
#include <httplib.h>
#include <json.hpp>
#include <sstream>

namespace dd::agent {

using nlohmann::json;

ChatEndpoint ChatEndpoint::from_env() {
    const char* spec = std::getenv("DUALDRIVE_CHAT_ENDPOINT");
    if (!spec)
        throw BackendError("external backend requires DUALDRIVE_CHAT_ENDPOINT (host:port/path)");
    ChatEndpoint ep = parse(spec);
    if (const char* key = std::getenv("DUALDRIVE_CHAT_KEY")) ep.api_key = key;
    return ep;
}

ChatEndpoint ChatEndpoint::parse(const std::string& spec) {
    ChatEndpoint ep;
    const std::size_t colon = spec.find(':');
    const std::size_t slash = spec.find('/', colon == std::string::npos ? 0 : colon);
    if (colon == std::string::npos)
        throw BackendError("chat endpoint spec must look like host:port/path, got '" + spec + "'");
    ep.host = spec.substr(0, colon);
    const std::string port_str =
        spec.substr(colon + 1, (slash == std::string::npos ? spec.size() : slash) - colon - 1);
    ep.port = std::stoi(port_str);
    if (slash != std::string::npos) ep.path = spec.substr(slash);
    return ep;
}

std::string chat_request_body(const std::string& system, const std::string& user) {
    return json{{"system", system},
                {"messages", json::array({{{"role", "user"}, {"content", user}}})}}
        .dump();
}

std::string chat_response_content(const std::string& body) {
    json j;
    try {
        j = json::parse(body);
    } catch (const json::parse_error& e) {
        throw BackendError(std::string("chat response is not valid JSON: ") + e.what(), body);
    }
    if (!j.contains("content") || !j["content"].is_string())
        throw BackendError("chat response lacks a string 'content' field", body);
    return j["content"].get<std::string>();
}

std::string ExternalChatBackend::post_chat(const std::string& system, const std::string& user) {
    httplib::Client client(endpoint_.host, endpoint_.port);
    const int secs = static_cast<int>(endpoint_.timeout_seconds);
    const int usecs = static_cast<int>((endpoint_.timeout_seconds - secs) * 1e6);
    client.set_connection_timeout(secs, usecs);
    client.set_read_timeout(secs, usecs);
    client.set_write_timeout(secs, usecs);

    httplib::Headers headers;
    if (!endpoint_.api_key.empty()) {
        headers.emplace("Authorization", "Bearer " + endpoint_.api_key);
    }
    const auto res = client.Post(endpoint_.path, headers, chat_request_body(system, user),
                                 "application/json");
    if (!res) {
        throw BackendError("chat endpoint unreachable or timed out: " + endpoint_.host + ":" +
                           std::to_string(endpoint_.port));
    }
    if (res->status != 200) {
        throw BackendError("chat endpoint returned status " + std::to_string(res->status),
                           res->body);
    }
    return chat_response_content(res->body);
}

Decision ExternalChatBackend::decide(const DecisionRequest& request) {
    const std::string content = post_chat(request.traffic_rules, request.prompt_text);
    return parse_decision(content);  // throws BackendError with the raw text
}

ReflectionFinding parse_reflection(const std::string& text, std::size_t queue_size) {
    const std::size_t spos = text.rfind("Step:");
    if (spos == std::string::npos)
        throw BackendError("reflection output has no 'Step:' line", text);
    std::size_t cur = spos + 5;
    while (cur < text.size() && text[cur] == ' ') ++cur;
    std::size_t end = cur;
    while (end < text.size() && std::isdigit(static_cast<unsigned char>(text[end]))) ++end;
    if (end == cur) throw BackendError("reflection output has a malformed 'Step:' line", text);
    const std::size_t step = std::stoul(text.substr(cur, end - cur));
    if (step >= queue_size)
        throw BackendError("reflection step " + std::to_string(step) + " outside the queue", text);

    const Decision d = parse_decision(text);
    ReflectionFinding f;
    f.step_index = step;
    f.corrected = d.action;
    f.reasoning = d.reasoning;
    return f;
}

ReflectionFinding ExternalChatBackend::reflect(const ReflectionRequest& request) {
    std::ostringstream os;
    os << "Accident: " << sim::to_string(request.accident.kind) << " at tick "
       << request.accident.timestep << ".\n\nRecent decision steps, oldest first:\n";
    for (std::size_t i = 0; i < request.queue.size(); ++i) {
        const HistoryRecord& r = request.queue[i];
        os << "--- step " << i << " (tick " << r.tick << ")\n"
           << "Scene: " << r.description.summary << "\n"
           << "Reasoning: " << r.reasoning << "\n"
           << "Decision: " << to_string(r.decision) << "\n";
    }
    const std::string content = post_chat(request.reflection_prompt, os.str());
    return parse_reflection(content, request.queue.size());
}

}  // namespace dd::agent
