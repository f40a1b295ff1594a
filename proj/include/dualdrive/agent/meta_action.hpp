#pragma once

#include <optional>
#include <string>

namespace dd::agent {

// High-level driving command emitted by the decision module at 2 Hz.
enum class MetaAction { AC, DC, LCL, LCR, IDLE, STOP };

std::string to_string(MetaAction a);

// Strict parse of the canonical token ("AC", "DC", ...); nullopt otherwise.
std::optional<MetaAction> meta_action_from_string(const std::string& s);

}  // namespace dd::agent
