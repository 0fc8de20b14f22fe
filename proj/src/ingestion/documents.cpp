#include "cairo/ingestion/documents.hpp"

#include <cmath>

namespace cairo {

namespace {

[[noreturn]] void bad(const std::string& msg) { throw Error("InvalidDocument", msg); }

const json& need(const json& j, const char* key, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) bad(where + ": missing field '" + key + "'");
  return *it;
}

double number(const json& j, const std::string& what) {
  if (!j.is_number()) bad(what + " must be a number");
  double d = j.get<double>();
  if (!std::isfinite(d)) bad(what + " must be finite");
  return d;
}

std::string text(const json& j, const std::string& what) {
  if (!j.is_string()) bad(what + " must be a string");
  return j.get<std::string>();
}

QName qname(const json& j, const NamespaceTable& ns, const std::string& what) {
  try {
    return ns.resolve(text(j, what));
  } catch (const Error& e) {
    if (e.code() == "InvalidDocument") throw;
    bad(what + ": " + e.what());
  }
}

BBox bbox_from(const json& j, const std::string& what) {
  if (!j.is_array() || j.size() != 4) bad(what + ": bbox must be [x, y, w, h]");
  return BBox{number(j[0], what), number(j[1], what), number(j[2], what), number(j[3], what)};
}

json bbox_to(const BBox& b) { return json::array({b.x, b.y, b.w, b.h}); }

Rgb rgb_from(const json& j, const std::string& what) {
  if (!j.is_array() || j.size() != 3) bad(what + ": dominant_color must be [r, g, b]");
  Rgb c;
  int* ch[] = {&c.r, &c.g, &c.b};
  for (int i = 0; i < 3; ++i) {
    if (!j[i].is_number_integer()) bad(what + ": colour channels must be integers");
    *ch[i] = j[i].get<int>();
    if (*ch[i] < 0 || *ch[i] > 255) bad(what + ": colour channel outside 0-255");
  }
  return c;
}

std::vector<double> logits_from(const json& j, const std::string& what) {
  if (!j.is_array()) bad(what + ": logits must be an array");
  std::vector<double> out;
  for (const auto& v : j) out.push_back(number(v, what + " logits"));
  return out;
}

void warn_unknown(const json& j, std::initializer_list<const char*> known, const std::string& where,
                  std::vector<std::string>* warnings) {
  if (!warnings || !j.is_object()) return;
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : known) ok = ok || it.key() == k;
    if (!ok) warnings->push_back(where + ": ignoring unknown field '" + it.key() + "'");
  }
}

const RoleDef* find_data_role(const TBox& tbox, const std::string& key) {
  if (key.find(':') != std::string::npos) {
    try {
      return tbox.role(tbox.namespaces.resolve(key));
    } catch (const Error&) {
      return nullptr;
    }
  }
  const RoleDef* found = nullptr;
  for (const auto& [name, def] : tbox.roles) {
    if (name.local != key || def.kind != RoleKind::Data) continue;
    if (found) return nullptr;  // ambiguous
    found = &def;
  }
  return found;
}

DataValue coerce(const json& v, const RoleDef& role, const NamespaceTable& ns, const std::string& what) {
  switch (role.datatype) {
    case Datatype::Boolean:
      if (!v.is_boolean()) bad(what + " expects a boolean");
      return DataValue::boolean(v.get<bool>());
    case Datatype::Integer:
      if (v.is_number_integer()) return DataValue::integer(v.get<std::int64_t>());
      if (v.is_number_float() && std::floor(v.get<double>()) == v.get<double>())
        return DataValue::integer(static_cast<std::int64_t>(v.get<double>()));
      bad(what + " expects an integer");
    case Datatype::Decimal:
      return DataValue::decimal(number(v, what));
    case Datatype::String:
      return DataValue::string(text(v, what));
    case Datatype::Enum: {
      std::string s = text(v, what);
      std::optional<QName> tok;
      if (s.find(':') != std::string::npos) {
        tok = qname(v, ns, what);
      } else {
        for (const auto& e : role.enum_values)
          if (e.local == s) tok = e;
      }
      if (!tok || !role.accepts(DataValue::enum_token(*tok))) bad(what + ": '" + s + "' is not in the value vocabulary");
      return DataValue::enum_token(*tok);
    }
  }
  bad(what + ": unsupported datatype");
}

DetectionRecord record_from(const json& j, const TBox& tbox, const std::string& where,
                            std::vector<std::string>* warnings) {
  if (!j.is_object()) bad(where + " must be an object");
  warn_unknown(j,
               {"detector", "label_text", "mapped_concept", "bbox", "mask_area", "confidence", "logits",
                "dominant_color", "depth_hint", "track_id", "extra"},
               where, warnings);
  const auto& ns = tbox.namespaces;
  DetectionRecord r;
  if (j.contains("detector")) r.detector = text(j["detector"], where + ".detector");
  r.label_text = text(need(j, "label_text", where), where + ".label_text");
  if (j.contains("mapped_concept") && !j["mapped_concept"].is_null())
    r.mapped_concept = qname(j["mapped_concept"], ns, where + ".mapped_concept");
  r.bbox = bbox_from(need(j, "bbox", where), where);
  if (!r.bbox.valid()) bad(where + ": bbox outside the unit square");
  if (j.contains("mask_area") && !j["mask_area"].is_null()) r.mask_area = number(j["mask_area"], where + ".mask_area");
  r.confidence = number(need(j, "confidence", where), where + ".confidence");
  if (r.confidence < 0 || r.confidence > 1) bad(where + ": confidence outside [0,1]");
  if (j.contains("logits") && !j["logits"].is_null()) r.logits = logits_from(j["logits"], where);
  if (j.contains("dominant_color") && !j["dominant_color"].is_null())
    r.dominant_color = rgb_from(j["dominant_color"], where);
  if (j.contains("depth_hint") && !j["depth_hint"].is_null()) r.depth_hint = number(j["depth_hint"], where + ".depth_hint");
  if (j.contains("track_id") && !j["track_id"].is_null()) r.track_id = text(j["track_id"], where + ".track_id");
  if (j.contains("extra")) {
    const auto& extra = j["extra"];
    if (!extra.is_object()) bad(where + ".extra must be an object");
    for (auto it = extra.begin(); it != extra.end(); ++it) {
      const RoleDef* role = find_data_role(tbox, it.key());
      if (!role || role->kind != RoleKind::Data) {
        if (warnings) warnings->push_back(where + ": ignoring extra '" + it.key() + "' (no such data role)");
        continue;
      }
      if (tbox.derived_spec(role->name)) {
        if (warnings)
          warnings->push_back(where + ": ignoring extra '" + it.key() + "' (derived under closed world)");
        continue;
      }
      r.extra[role->name] = coerce(it.value(), *role, ns, where + ".extra." + it.key());
    }
  }
  return r;
}

json record_to(const DetectionRecord& r) {
  json j;
  j["detector"] = r.detector;
  j["label_text"] = r.label_text;
  if (r.mapped_concept) j["mapped_concept"] = r.mapped_concept->str();
  j["bbox"] = bbox_to(r.bbox);
  if (r.mask_area) j["mask_area"] = *r.mask_area;
  j["confidence"] = r.confidence;
  if (r.logits) j["logits"] = *r.logits;
  if (r.dominant_color) j["dominant_color"] = json::array({r.dominant_color->r, r.dominant_color->g, r.dominant_color->b});
  if (r.depth_hint) j["depth_hint"] = *r.depth_hint;
  if (r.track_id) j["track_id"] = *r.track_id;
  if (!r.extra.empty()) {
    json e = json::object();
    for (const auto& [k, v] : r.extra) {
      switch (v.kind()) {
        case DataValue::Kind::Boolean: e[k.str()] = v.as_bool(); break;
        case DataValue::Kind::Integer: e[k.str()] = v.as_integer(); break;
        case DataValue::Kind::Decimal: e[k.str()] = v.as_number(); break;
        case DataValue::Kind::String: e[k.str()] = v.as_string(); break;
        case DataValue::Kind::Enum: e[k.str()] = v.as_enum().str(); break;
      }
    }
    j["extra"] = e;
  }
  return j;
}

}  // namespace

DetectionDocument parse_detection_document(const json& j, const TBox& tbox, std::vector<std::string>* warnings) {
  if (!j.is_object()) bad("detection document must be an object");
  warn_unknown(j, {"scene_id", "time_position", "frame_ref", "records"}, "scene", warnings);
  DetectionDocument doc;
  doc.scene_id = qname(need(j, "scene_id", "scene"), tbox.namespaces, "scene_id");
  if (j.contains("time_position")) doc.time_position = number(j["time_position"], "time_position");
  if (doc.time_position < 0) bad("time_position must be non-negative");
  if (j.contains("frame_ref")) doc.frame_ref = text(j["frame_ref"], "frame_ref");
  const auto& recs = need(j, "records", "scene");
  if (!recs.is_array()) bad("records must be an array");
  for (std::size_t i = 0; i < recs.size(); ++i)
    doc.records.push_back(record_from(recs[i], tbox, "records[" + std::to_string(i) + "]", warnings));
  return doc;
}

ScenarioDocument parse_scenario_document(const json& j, const TBox& tbox, std::vector<std::string>* warnings) {
  if (!j.is_object()) bad("scenario document must be an object");
  warn_unknown(j, {"scenario_id", "scenes"}, "scenario", warnings);
  ScenarioDocument doc;
  doc.scenario_id = qname(need(j, "scenario_id", "scenario"), tbox.namespaces, "scenario_id");
  const auto& scenes = need(j, "scenes", "scenario");
  if (!scenes.is_array() || scenes.empty()) bad("scenes must be a non-empty array");
  for (const auto& s : scenes) doc.scenes.push_back(parse_detection_document(s, tbox, warnings));
  return doc;
}

json detection_document_to_json(const DetectionDocument& doc) {
  json j;
  j["scene_id"] = doc.scene_id.str();
  j["time_position"] = doc.time_position;
  j["frame_ref"] = doc.frame_ref;
  j["records"] = json::array();
  for (const auto& r : doc.records) j["records"].push_back(record_to(r));
  return j;
}

json scenario_document_to_json(const ScenarioDocument& doc) {
  json j;
  j["scenario_id"] = doc.scenario_id.str();
  j["scenes"] = json::array();
  for (const auto& s : doc.scenes) j["scenes"].push_back(detection_document_to_json(s));
  return j;
}

FusionConfig parse_fusion_config(const json& j, const NamespaceTable& ns) {
  if (!j.is_object()) bad("fusion config must be an object");
  FusionConfig cfg;
  auto opt = [&](const char* key, double& field) {
    if (j.contains(key)) field = number(j[key], key);
  };
  opt("iou_merge_threshold", cfg.iou_merge_threshold);
  opt("near_threshold", cfg.near_threshold);
  opt("high_occlusion_threshold", cfg.high_occlusion_threshold);
  opt("part_of_containment", cfg.part_of_containment);
  opt("track_iou_threshold", cfg.track_iou_threshold);
  if (j.contains("label_map")) {
    const auto& m = j["label_map"];
    if (!m.is_object()) bad("label_map must be an object");
    for (auto it = m.begin(); it != m.end(); ++it) cfg.label_map[it.key()] = qname(it.value(), ns, "label_map");
  }
  cfg.validate();
  return cfg;
}

json fusion_config_to_json(const FusionConfig& cfg) {
  json j;
  j["iou_merge_threshold"] = cfg.iou_merge_threshold;
  j["near_threshold"] = cfg.near_threshold;
  j["high_occlusion_threshold"] = cfg.high_occlusion_threshold;
  j["part_of_containment"] = cfg.part_of_containment;
  j["track_iou_threshold"] = cfg.track_iou_threshold;
  json m = json::object();
  for (const auto& [k, v] : cfg.label_map) m[k] = v.str();
  j["label_map"] = m;
  return j;
}

json data_value_to_json(const DataValue& v) {
  switch (v.kind()) {
    case DataValue::Kind::Boolean: return {{"boolean", v.as_bool()}};
    case DataValue::Kind::Integer: return {{"integer", v.as_integer()}};
    case DataValue::Kind::Decimal: return {{"decimal", v.as_number()}};
    case DataValue::Kind::String: return {{"string", v.as_string()}};
    case DataValue::Kind::Enum: return {{"enum", v.as_enum().str()}};
  }
  return nullptr;
}

DataValue data_value_from_json(const json& j, const NamespaceTable& ns) {
  if (!j.is_object() || j.size() != 1) bad("typed value must be a single-key object");
  auto it = j.begin();
  const std::string& k = it.key();
  const json& v = it.value();
  if (k == "boolean" && v.is_boolean()) return DataValue::boolean(v.get<bool>());
  if (k == "integer" && v.is_number_integer()) return DataValue::integer(v.get<std::int64_t>());
  if (k == "decimal") return DataValue::decimal(number(v, "decimal value"));
  if (k == "string") return DataValue::string(text(v, "string value"));
  if (k == "enum") return DataValue::enum_token(qname(v, ns, "enum value"));
  bad("unrecognised typed value '" + k + "'");
}

json assertion_to_json(const Assertion& a) {
  json j;
  if (auto* c = std::get_if<ClassAssertion>(&a)) {
    j["type"] = "class";
    j["individual"] = c->individual.str();
    j["concept"] = c->concept_name.str();
    return j;
  }
  const auto& r = std::get<RoleAssertion>(a);
  j["type"] = r.is_object() ? "object" : "data";
  j["subject"] = r.subject.str();
  j["role"] = r.role.str();
  if (r.is_object()) j["object"] = r.object_name().str();
  else j["value"] = data_value_to_json(r.literal());
  return j;
}

Assertion assertion_from_json(const json& j, const NamespaceTable& ns) {
  std::string type = text(need(j, "type", "assertion"), "assertion type");
  if (type == "class")
    return ClassAssertion{qname(need(j, "individual", "assertion"), ns, "individual"),
                          qname(need(j, "concept", "assertion"), ns, "concept")};
  RoleAssertion r;
  r.subject = qname(need(j, "subject", "assertion"), ns, "subject");
  r.role = qname(need(j, "role", "assertion"), ns, "role");
  if (type == "object") r.object = qname(need(j, "object", "assertion"), ns, "object");
  else if (type == "data") r.object = data_value_from_json(need(j, "value", "assertion"), ns);
  else bad("unknown assertion type '" + type + "'");
  return r;
}

json individual_to_json(const Individual& ind) {
  json i;
  i["id"] = ind.id.str();
  i["label"] = ind.label;
  if (ind.track_id) i["track_id"] = *ind.track_id;
  const auto& s = ind.segment;
  json seg;
  seg["bbox"] = bbox_to(s.bbox);
  seg["mask_area"] = s.mask_area;
  seg["confidence"] = s.confidence;
  if (s.logits) seg["logits"] = *s.logits;
  if (s.dominant_color) seg["dominant_color"] = json::array({s.dominant_color->r, s.dominant_color->g, s.dominant_color->b});
  if (s.depth_hint) seg["depth_hint"] = *s.depth_hint;
  seg["source_detector"] = s.source_detector;
  i["segment"] = seg;
  i["candidates"] = json::array();
  for (const auto& c : ind.candidates) i["candidates"].push_back({{"concept", c.concept_name.str()}, {"score", c.score}});
  json attrs = json::object();
  for (const auto& [k, v] : ind.attributes) attrs[k.str()] = data_value_to_json(v);
  i["attributes"] = attrs;
  return i;
}

json scene_to_json(const Scene& scene) {
  json j;
  j["scene_id"] = scene.id.str();
  j["time_position"] = scene.time_position;
  j["frame_ref"] = scene.frame_ref;
  j["individuals"] = json::array();
  for (const auto& ind : scene.individuals) j["individuals"].push_back(individual_to_json(ind));
  j["assertions"] = json::array();
  for (const auto& a : scene.assertions) j["assertions"].push_back(assertion_to_json(a));
  return j;
}

Individual individual_from_json(const json& i, const NamespaceTable& ns) {
  if (!i.is_object()) bad("individual must be an object");
  Individual ind;
  ind.id = qname(need(i, "id", "individual"), ns, "individual id");
  ind.label = i.contains("label") ? text(i["label"], "label") : ind.id.local;
  if (i.contains("track_id") && !i["track_id"].is_null()) ind.track_id = text(i["track_id"], "track_id");
  const auto& s = need(i, "segment", "individual");
  ind.segment.id = ind.id;
  ind.segment.bbox = bbox_from(need(s, "bbox", "segment"), "segment");
  ind.segment.mask_area = s.contains("mask_area") ? number(s["mask_area"], "mask_area") : ind.segment.bbox.area();
  ind.segment.confidence = number(need(s, "confidence", "segment"), "confidence");
  if (s.contains("logits")) ind.segment.logits = logits_from(s["logits"], "segment");
  if (s.contains("dominant_color")) ind.segment.dominant_color = rgb_from(s["dominant_color"], "segment");
  if (s.contains("depth_hint")) ind.segment.depth_hint = number(s["depth_hint"], "depth_hint");
  if (s.contains("source_detector")) ind.segment.source_detector = text(s["source_detector"], "source_detector");
  if (i.contains("candidates"))
    for (const auto& c : i["candidates"])
      ind.candidates.push_back({qname(need(c, "concept", "candidate"), ns, "concept"),
                                number(need(c, "score", "candidate"), "score")});
  if (i.contains("attributes"))
    for (auto it = i["attributes"].begin(); it != i["attributes"].end(); ++it)
      ind.attributes[ns.resolve(it.key())] = data_value_from_json(it.value(), ns);
  return ind;
}

Scene scene_from_json(const json& j, const NamespaceTable& ns) {
  if (!j.is_object()) bad("scene must be an object");
  Scene scene;
  scene.id = qname(need(j, "scene_id", "scene"), ns, "scene_id");
  if (j.contains("time_position")) scene.time_position = number(j["time_position"], "time_position");
  if (j.contains("frame_ref")) scene.frame_ref = text(j["frame_ref"], "frame_ref");
  for (const auto& i : need(j, "individuals", "scene")) scene.individuals.push_back(individual_from_json(i, ns));
  if (j.contains("assertions"))
    for (const auto& a : j["assertions"]) scene.assertions.push_back(assertion_from_json(a, ns));
  canonicalize(scene.assertions);
  scene.validate();
  return scene;
}

json scenario_to_json(const Scenario& scenario) {
  json j;
  j["scenario_id"] = scenario.id.str();
  j["scenes"] = json::array();
  for (const auto& s : scenario.scenes) j["scenes"].push_back(scene_to_json(s));
  json tracks = json::object();
  for (const auto& [t, slots] : scenario.tracks.tracks) {
    json row;
    auto name = scenario.tracks.track_individuals.find(t);
    if (name != scenario.tracks.track_individuals.end()) row["name"] = name->second.str();
    row["scenes"] = json::array();
    for (const auto& s : slots) row["scenes"].push_back(s ? json(s->str()) : json(nullptr));
    tracks[t] = row;
  }
  j["tracks"] = tracks;
  return j;
}

Scenario scenario_from_json(const json& j, const NamespaceTable& ns) {
  if (!j.is_object()) bad("scenario must be an object");
  Scenario sc;
  sc.id = qname(need(j, "scenario_id", "scenario"), ns, "scenario_id");
  for (const auto& s : need(j, "scenes", "scenario")) sc.scenes.push_back(scene_from_json(s, ns));
  if (j.contains("tracks")) {
    for (auto it = j["tracks"].begin(); it != j["tracks"].end(); ++it) {
      auto& slots = sc.tracks.tracks[it.key()];
      for (const auto& s : need(it.value(), "scenes", "track"))
        slots.push_back(s.is_null() ? std::nullopt : std::optional<QName>(qname(s, ns, "track slot")));
      if (it.value().contains("name"))
        sc.tracks.track_individuals[it.key()] = qname(it.value()["name"], ns, "track name");
    }
  }
  sc.validate();
  return sc;
}

std::string dump_document(const json& j) { return j.dump(2) + "\n"; }

json parse_json_text(std::string_view t) {
  try {
    return json::parse(t.begin(), t.end());
  } catch (const json::exception& e) {
    throw Error("InvalidDocument", std::string("malformed JSON: ") + e.what());
  }
}

}  // namespace cairo
