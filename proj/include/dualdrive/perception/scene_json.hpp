#pragma once

#include <json.hpp>

#include "dualdrive/perception/scene.hpp"

namespace dd::perception {

nlohmann::json to_json_value(const CriticalObject& o);
CriticalObject critical_object_from_json(const nlohmann::json& j);

nlohmann::json to_json_value(const SceneDescription& d);
SceneDescription scene_description_from_json(const nlohmann::json& j);

}  // namespace dd::perception
