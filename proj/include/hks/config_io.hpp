#pragma once

#include <string>

#include "hks/scenarios.hpp"
#include "json.hpp"

namespace hks {

// Keys match the ScenarioConfig field names; unknown keys raise std::invalid_argument.
ScenarioConfig config_from_json(const nlohmann::json& j, const ScenarioConfig& base);
ScenarioConfig config_from_json(const nlohmann::json& j);
ScenarioConfig load_config(const std::string& path);
nlohmann::json to_json(const ScenarioConfig& c);

nlohmann::json to_json(const NormReport& n);
nlohmann::json to_json(const ImageBounds& b);
nlohmann::json to_json(const DataCheckReport& d);
nlohmann::json to_json(const Classification& c);
nlohmann::json to_json(const ConeReport& c);
nlohmann::json propagation_json(const PropagationResult& p);
nlohmann::json report_json(const ScenarioResult& r);

}  // namespace hks
