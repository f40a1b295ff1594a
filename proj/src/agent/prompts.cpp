#include "dualdrive/agent/prompts.hpp"

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace dd::agent {

std::string fnv1a_hex(const std::string& text) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string PromptSet::system_hash() const { return fnv1a_hex(system); }
std::string PromptSet::traffic_rules_hash() const { return fnv1a_hex(traffic_rules); }
std::string PromptSet::reflection_hash() const { return fnv1a_hex(reflection); }

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open prompt file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

PromptSet PromptSet::load_dir(const std::string& dir) {
    PromptSet p;
    p.system = read_file(dir + "/system.txt");
    p.traffic_rules = read_file(dir + "/traffic_rules.txt");
    p.reflection = read_file(dir + "/reflection.txt");
    if (p.system.empty() || p.traffic_rules.empty() || p.reflection.empty())
        throw std::runtime_error("prompt files must not be empty in " + dir);
    return p;
}

PromptSet PromptSet::builtin() {
    PromptSet p;
    p.system =
        "You are the perception assistant of an autonomous car. Given the recent frames,\n"
        "list the critical objects that could influence the next driving decision. For each\n"
        "object report its category, lane relation, distance, motion trend and why it\n"
        "matters. Ignore everything that cannot affect the ego vehicle.\n";
    p.traffic_rules =
        "Driving policy:\n"
        "1. Never enter an intersection while the governing light is red; stop before the\n"
        "   stop line.\n"
        "2. Keep a safe following gap; slow down when the time to contact with the lead\n"
        "   vehicle drops below three seconds or the gap is shorter than eight meters.\n"
        "3. Yield to pedestrians and cyclists crossing the driving corridor.\n"
        "4. Change lanes only when navigation asks for it and the target lane gap is at\n"
        "   least fifteen meters ahead and ten meters behind.\n"
        "5. Do not exceed the commanded target speed; accelerate only on a clear road.\n"
        "6. When no rule applies, hold the current speed.\n"
        "Answer with a short justification followed by a final line of the form\n"
        "'Decision: <AC|DC|LCL|LCR|IDLE|STOP>'.\n";
    p.reflection =
        "An accident just occurred. You are given the recent decision steps, each with the\n"
        "scene description, the reasoning and the chosen action. Identify the earliest step\n"
        "where a different action would have prevented the accident, explain the mistake,\n"
        "and answer with two final lines of the form 'Step: <index>' and\n"
        "'Decision: <AC|DC|LCL|LCR|IDLE|STOP>' giving the corrected action for that step.\n";
    return p;
}

}  // namespace dd::agent
