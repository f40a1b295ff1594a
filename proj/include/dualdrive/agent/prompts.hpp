#pragma once

#include <string>

namespace dd::agent {

// Versioned text assets driving the decision backends; episode logs carry
// their hashes so a run can be matched to the exact prompt wording.
struct PromptSet {
    std::string system;        // perceiver guidance
    std::string traffic_rules;
    std::string reflection;

    std::string system_hash() const;
    std::string traffic_rules_hash() const;
    std::string reflection_hash() const;

    // Loads system.txt, traffic_rules.txt, reflection.txt from a directory;
    // throws when a file is missing or empty.
    static PromptSet load_dir(const std::string& dir);
    static PromptSet builtin();  // compiled-in defaults
};

std::string fnv1a_hex(const std::string& text);

}  // namespace dd::agent
