#pragma once

#include <string>

#include "dualdrive/agent/reasoner.hpp"

namespace dd::agent {

// JSON-over-HTTP chat endpoint: POST {system, messages:[{role, content}]}
// to `path`, response {content: "..."}.
struct ChatEndpoint {
    std::string host = "127.0.0.1";
    int port = 8080;
    std::string path = "/chat";
    std::string api_key;          // sent as Authorization: Bearer <key> when set
    double timeout_seconds = 10;  // per call

    // DUALDRIVE_CHAT_ENDPOINT=host:port/path, DUALDRIVE_CHAT_KEY=<key>
    static ChatEndpoint from_env();
    static ChatEndpoint parse(const std::string& spec);
};

class ExternalChatBackend : public ReasonerBackend {
public:
    explicit ExternalChatBackend(ChatEndpoint endpoint) : endpoint_(std::move(endpoint)) {}

    std::string name() const override { return "external"; }
    Decision decide(const DecisionRequest& request) override;
    ReflectionFinding reflect(const ReflectionRequest& request) override;

private:
    std::string post_chat(const std::string& system, const std::string& user);
    ChatEndpoint endpoint_;
};

// Request/response bodies, exposed for tests of the wire format.
std::string chat_request_body(const std::string& system, const std::string& user);
std::string chat_response_content(const std::string& body);  // throws BackendError

// Reflection replies carry "Step: <n>" and "Decision: <ACTION>" lines.
ReflectionFinding parse_reflection(const std::string& text, std::size_t queue_size);

}  // namespace dd::agent
