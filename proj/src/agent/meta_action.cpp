#include "dualdrive/agent/meta_action.hpp"

namespace dd::agent {

std::string to_string(MetaAction a) {
    switch (a) {
        case MetaAction::AC: return "AC";
        case MetaAction::DC: return "DC";
        case MetaAction::LCL: return "LCL";
        case MetaAction::LCR: return "LCR";
        case MetaAction::IDLE: return "IDLE";
        case MetaAction::STOP: return "STOP";
    }
    return "IDLE";
}

std::optional<MetaAction> meta_action_from_string(const std::string& s) {
    if (s == "AC") return MetaAction::AC;
    if (s == "DC") return MetaAction::DC;
    if (s == "LCL") return MetaAction::LCL;
    if (s == "LCR") return MetaAction::LCR;
    if (s == "IDLE") return MetaAction::IDLE;
    if (s == "STOP") return MetaAction::STOP;
    return std::nullopt;
}

}  // namespace dd::agent
