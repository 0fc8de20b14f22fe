#pragma once

// JSON documents: detection records, ingested scenes/scenarios, fusion config.

#include <string>
#include <vector>

#include <json.hpp>

#include "cairo/ingestion/ingestion.hpp"

namespace cairo {

using json = nlohmann::ordered_json;

// Unknown fields are reported through `warnings` and otherwise ignored.
DetectionDocument parse_detection_document(const json& j, const TBox& tbox,
                                           std::vector<std::string>* warnings = nullptr);
ScenarioDocument parse_scenario_document(const json& j, const TBox& tbox,
                                         std::vector<std::string>* warnings = nullptr);
json detection_document_to_json(const DetectionDocument& doc);
json scenario_document_to_json(const ScenarioDocument& doc);

FusionConfig parse_fusion_config(const json& j, const NamespaceTable& ns);
json fusion_config_to_json(const FusionConfig& cfg);

// {"boolean": true} | {"integer": 1} | {"decimal": 42.0} | {"string": "x"} | {"enum": "phys:Gray"}
json data_value_to_json(const DataValue& v);
DataValue data_value_from_json(const json& j, const NamespaceTable& ns);

json assertion_to_json(const Assertion& a);
Assertion assertion_from_json(const json& j, const NamespaceTable& ns);

json individual_to_json(const Individual& ind);
Individual individual_from_json(const json& j, const NamespaceTable& ns);
json scene_to_json(const Scene& scene);
Scene scene_from_json(const json& j, const NamespaceTable& ns);
json scenario_to_json(const Scenario& scenario);
Scenario scenario_from_json(const json& j, const NamespaceTable& ns);

// Two-space indented, trailing newline. The canonical on-disk form.
std::string dump_document(const json& j);
// Parses text, rethrowing JSON errors as Error("InvalidDocument").
json parse_json_text(std::string_view text);

}  // namespace cairo
