#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <httplib.h>
#include <json.hpp>
#include <thread>

#include "dualdrive/agent/external_chat.hpp"

using namespace dd;
using namespace dd::agent;
using nlohmann::json;

TEST_CASE("endpoint spec parsing") {
    const ChatEndpoint ep = ChatEndpoint::parse("example.org:9001/v1/chat");
    CHECK(ep.host == "example.org");
    CHECK(ep.port == 9001);
    CHECK(ep.path == "/v1/chat");
    CHECK_THROWS_AS(ChatEndpoint::parse("garbage"), BackendError);
}

TEST_CASE("request body and response content wire format") {
    const std::string body = chat_request_body("sys", "hello");
    const json j = json::parse(body);
    CHECK(j["system"] == "sys");
    CHECK(j["messages"][0]["role"] == "user");
    CHECK(j["messages"][0]["content"] == "hello");

    CHECK(chat_response_content(R"({"content": "done"})") == "done");
    CHECK_THROWS_AS(chat_response_content("not json"), BackendError);
    CHECK_THROWS_AS(chat_response_content(R"({"data": 1})"), BackendError);
}

TEST_CASE("reflection reply parsing") {
    const ReflectionFinding f =
        parse_reflection("step 2 was wrong\nStep: 2\nDecision: DC", 5);
    CHECK(f.step_index == 2);
    CHECK(f.corrected == MetaAction::DC);
    CHECK_THROWS_AS(parse_reflection("Decision: DC", 5), BackendError);
    CHECK_THROWS_AS(parse_reflection("Step: 9\nDecision: DC", 5), BackendError);
}

TEST_CASE("decide and reflect round trip against a loopback chat server") {
    httplib::Server server;
    server.Post("/chat", [](const httplib::Request& req, httplib::Response& res) {
        const json body = json::parse(req.body);
        const std::string user = body["messages"][0]["content"];
        std::string content;
        if (user.find("Recent decision steps") != std::string::npos) {
            content = "the mistake was step 1\nStep: 1\nDecision: DC";
        } else if (user.find("red light") != std::string::npos) {
            content = "red means stop\nDecision: STOP";
        } else {
            content = "cruising is fine\nDecision: IDLE";
        }
        res.set_content(json{{"content", content}}.dump(), "application/json");
    });

    const int port = server.bind_to_any_port("127.0.0.1");
    if (port <= 0) {
        WARN("loopback bind unavailable in this sandbox; skipping server round trip");
        return;
    }
    std::thread io([&server] { server.listen_after_bind(); });
    server.wait_until_ready();

    ChatEndpoint ep;
    ep.host = "127.0.0.1";
    ep.port = port;
    ep.path = "/chat";
    ExternalChatBackend backend(ep);

    DecisionRequest req;
    req.prompt_text = "there is a red light ahead";
    const Decision d = backend.decide(req);
    CHECK(d.action == MetaAction::STOP);
    CHECK(d.reasoning == "red means stop");

    DecisionRequest plain;
    plain.prompt_text = "empty road";
    CHECK(backend.decide(plain).action == MetaAction::IDLE);

    ReflectionRequest refl;
    refl.reflection_prompt = "reflect";
    refl.accident.kind = sim::AccidentInfo::Kind::collision_vehicle;
    refl.queue.resize(3);
    const ReflectionFinding f = backend.reflect(refl);
    CHECK(f.step_index == 1);
    CHECK(f.corrected == MetaAction::DC);

    server.stop();
    io.join();
}

TEST_CASE("unreachable endpoint raises a typed error") {
    ChatEndpoint ep;
    ep.host = "127.0.0.1";
    ep.port = 1;  // nothing listens here
    ep.timeout_seconds = 0.2;
    ExternalChatBackend backend(ep);
    DecisionRequest req;
    req.prompt_text = "hello";
    CHECK_THROWS_AS(backend.decide(req), BackendError);
}
