#include "cairo/fixtures/fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "cairo/ingestion/documents.hpp"

namespace cairo {

namespace {

const QName kDistance{"phys", "has_distance"};
const QName kWheels{"phys", "number_of_wheels"};

double unit(std::mt19937_64& g) { return static_cast<double>(g() >> 11) * 0x1.0p-53; }
double round_to(double v, double q) { return std::round(v / q) * q; }

struct Rec {
  std::string label;
  BBox box;
  double confidence;
  double depth;
  std::optional<Rgb> color;
  std::optional<std::string> track;
  std::map<QName, DataValue> extra;
};

DetectionRecord to_record(const Rec& r, const std::string& detector) {
  DetectionRecord d;
  d.detector = detector;
  d.label_text = r.label;
  d.bbox = r.box;
  d.mask_area = round_to(r.box.area() * 0.85, 1e-6);
  d.confidence = r.confidence;
  d.dominant_color = r.color;
  d.depth_hint = r.depth;
  d.track_id = r.track;
  d.extra = r.extra;
  return d;
}

// Moves every box by at most 0.004 in x and y, staying inside the image.
void jitter(std::vector<Rec>& recs, std::uint64_t seed, std::uint64_t salt) {
  if (seed == 0) return;
  std::mt19937_64 g(seed * 0x9E3779B97F4A7C15ULL + salt);
  for (auto& r : recs) {
    double dx = round_to((unit(g) * 2 - 1) * 0.004, 1e-4), dy = round_to((unit(g) * 2 - 1) * 0.004, 1e-4);
    r.box.x = std::clamp(r.box.x + dx, 0.0, 1.0 - r.box.w);
    r.box.y = std::clamp(r.box.y + dy, 0.0, 1.0 - r.box.h);
  }
}

DetectionDocument make_doc(const QName& id, double t, const std::string& frame, const std::vector<Rec>& recs,
                           const std::string& detector) {
  DetectionDocument doc;
  doc.scene_id = id;
  doc.time_position = t;
  doc.frame_ref = frame;
  for (const auto& r : recs) doc.records.push_back(to_record(r, detector));
  return doc;
}

DataValue dec(double v) { return DataValue::decimal(v); }

std::vector<Rec> desert_records(bool with_lane) {
  std::vector<Rec> recs = {
      {"car", {0.30, 0.40, 0.40, 0.25}, 0.97, 42.0, Rgb{245, 245, 242}, std::nullopt,
       {{kDistance, dec(42.0)}, {kWheels, DataValue::integer(4)}}},
      {"wheel", {0.34, 0.52, 0.08, 0.15}, 0.91, 41.5, Rgb{20, 20, 20}, std::nullopt, {}},
      {"wheel", {0.58, 0.52, 0.08, 0.15}, 0.90, 41.5, Rgb{22, 22, 22}, std::nullopt, {}},
      {"traffic post", {0.88, 0.30, 0.02, 0.30}, 0.74, 55.0, Rgb{230, 225, 40}, std::nullopt, {}},
  };
  if (with_lane) recs.push_back({"road", {0.00, 0.62, 1.00, 0.38}, 0.88, 60.0, Rgb{130, 125, 120}, std::nullopt, {}});
  return recs;
}

}  // namespace

const std::vector<FixtureEntry>& fixture_entries() {
  static const std::vector<FixtureEntry> entries = {
      {"urban_intersection", FixtureKind::Scene,
       "busy intersection: gray pedestrian 62% occluded by a car, bicycle by a crossing, detached wheel by a lane"},
      {"desert_road", FixtureKind::Scene, "white car 42 m ahead, no plate, wheels 0.6 of the car height"},
      {"desert_road_perturbed", FixtureKind::Scene, "desert road with the lane removed"},
      {"adversarial_truck", FixtureKind::Scene, "truck 62% covered by a sign patch that is part of it"},
      {"stroller_scenario", FixtureKind::Scenario, "stroller t7 visible in scene1 only"},
      {"stroller_control", FixtureKind::Scenario, "stroller t7 visible in both scenes"},
  };
  return entries;
}

DetectionDocument urban_intersection_document(std::uint64_t seed) {
  std::vector<Rec> recs = {
      {"pedestrian", {0.10, 0.30, 0.06, 0.20}, 0.95, 12.0, Rgb{35, 30, 40}, std::nullopt, {}},
      {"pedestrian", {0.40, 0.30, 0.08, 0.25}, 0.81, 15.0, Rgb{126, 128, 131}, std::nullopt, {}},
      {"pedestrian", {0.78, 0.55, 0.05, 0.15}, 0.88, 10.0, std::nullopt, std::nullopt, {}},
      {"car", {0.4304, 0.28, 0.30, 0.30}, 0.96, 8.0, Rgb{200, 30, 25}, std::nullopt, {{kDistance, dec(8.0)}}},
      {"plate", {0.55, 0.50, 0.06, 0.03}, 0.79, 7.9, Rgb{250, 250, 245}, std::nullopt, {}},
      {"bicycle", {0.66, 0.50, 0.08, 0.12}, 0.89, 6.0, Rgb{30, 60, 190}, std::nullopt, {}},
      {"crosswalk", {0.60, 0.62, 0.20, 0.10}, 0.83, 25.0, Rgb{250, 250, 250}, std::nullopt, {}},
      {"wheel", {0.15, 0.70, 0.05, 0.05}, 0.77, 9.0, Rgb{15, 15, 15}, std::nullopt, {}},
      {"lane", {0.05, 0.75, 0.25, 0.15}, 0.86, 40.0, Rgb{120, 120, 118}, std::nullopt, {}},
      {"traffic light", {0.90, 0.05, 0.03, 0.10}, 0.92, 30.0, Rgb{20, 150, 60}, std::nullopt, {}},
  };
  jitter(recs, seed, 1);
  return make_doc(QName{"traf", "urban_intersection"}, 0, "frames/urban_intersection.png", recs, "fixture");
}

DetectionDocument desert_road_document(std::uint64_t seed) {
  auto recs = desert_records(true);
  jitter(recs, seed, 2);
  return make_doc(QName{"traf", "desert_road"}, 0, "frames/desert_road.png", recs, "fixture");
}

DetectionDocument desert_road_perturbed_document(std::uint64_t seed) {
  auto recs = desert_records(false);
  jitter(recs, seed, 3);
  return make_doc(QName{"traf", "desert_road_perturbed"}, 0, "frames/desert_road_perturbed.png", recs, "fixture");
}

DetectionDocument adversarial_truck_document(std::uint64_t seed) {
  std::vector<Rec> recs = {
      {"truck", {0.30, 0.40, 0.40, 0.30}, 0.93, 20.0, Rgb{240, 240, 235}, std::nullopt, {{kDistance, dec(20.0)}}},
      {"sign", {0.30, 0.38, 0.31, 0.26}, 0.71, 19.5, Rgb{215, 25, 25}, std::nullopt, {}},
      {"road", {0.00, 0.72, 1.00, 0.28}, 0.90, 50.0, Rgb{90, 90, 95}, std::nullopt, {}},
  };
  jitter(recs, seed, 4);
  return make_doc(QName{"traf", "adversarial_truck"}, 0, "frames/adversarial_truck.png", recs, "fixture");
}

namespace {

ScenarioDocument stroller_doc(const QName& id, bool stroller_in_second, std::uint64_t seed, std::uint64_t salt) {
  Rec stroller{"stroller", {0.40, 0.50, 0.06, 0.10}, 0.84, 14.0, Rgb{30, 60, 200}, std::string("t7"), {}};
  Rec walker{"pedestrian", {0.47, 0.42, 0.06, 0.20}, 0.93, 13.5, Rgb{40, 40, 40}, std::string("t3"), {}};
  Rec car{"car", {0.70, 0.45, 0.20, 0.15}, 0.95, 18.0, Rgb{30, 160, 60}, std::string("t1"), {{kDistance, dec(64.0)}}};
  Rec lane{"lane", {0.00, 0.65, 1.00, 0.35}, 0.87, 45.0, Rgb{125, 125, 125}, std::string("t2"), {}};

  std::vector<Rec> first = {stroller, walker, car, lane};
  Rec walker2 = walker, car2 = car, stroller2 = stroller;
  walker2.box.x = 0.49;
  car2.box.x = 0.66;
  car2.extra[kDistance] = dec(61.5);
  stroller2.box.x = 0.42;
  std::vector<Rec> second = {walker2, car2, lane};
  if (stroller_in_second) second.push_back(stroller2);
  jitter(first, seed, salt);
  jitter(second, seed, salt + 1);

  ScenarioDocument doc;
  doc.scenario_id = id;
  doc.scenes.push_back(make_doc(QName{"traf", "scene1"}, 0.0, "frames/" + id.local + "_0.png", first, "fixture"));
  doc.scenes.push_back(make_doc(QName{"traf", "scene2"}, 1.0, "frames/" + id.local + "_1.png", second, "fixture"));
  return doc;
}

}  // namespace

ScenarioDocument stroller_scenario_document(std::uint64_t seed) {
  return stroller_doc(QName{"traf", "stroller_scenario"}, false, seed, 5);
}

ScenarioDocument stroller_control_document(std::uint64_t seed) {
  return stroller_doc(QName{"traf", "stroller_control"}, true, seed, 7);
}

std::map<std::string, std::string> generate_fixtures(std::uint64_t seed) {
  std::map<std::string, std::string> files;
  files["urban_intersection.json"] = dump_document(detection_document_to_json(urban_intersection_document(seed)));
  files["desert_road.json"] = dump_document(detection_document_to_json(desert_road_document(seed)));
  files["desert_road_perturbed.json"] =
      dump_document(detection_document_to_json(desert_road_perturbed_document(seed)));
  files["adversarial_truck.json"] = dump_document(detection_document_to_json(adversarial_truck_document(seed)));
  files["stroller_scenario.json"] = dump_document(scenario_document_to_json(stroller_scenario_document(seed)));
  files["stroller_control.json"] = dump_document(scenario_document_to_json(stroller_control_document(seed)));
  files["fusion.json"] = dump_document(fusion_config_to_json(shipped_fusion_config()));

  json manifest;
  manifest["seed"] = seed;
  manifest["config"] = "fusion.json";
  manifest["fixtures"] = json::array();
  for (const auto& e : fixture_entries()) {
    json x;
    x["name"] = e.name;
    x["kind"] = e.kind == FixtureKind::Scene ? "scene" : "scenario";
    x["file"] = e.name + ".json";
    x["description"] = e.description;
    manifest["fixtures"].push_back(x);
  }
  files["manifest.json"] = dump_document(manifest);
  return files;
}

DetectionDocument synthetic_document(std::uint64_t seed, std::size_t individuals) {
  static const char* kWholes[] = {"car", "truck", "bus", "pedestrian", "bicycle", "stroller", "dog",
                                  "lane", "crosswalk", "sign", "traffic light", "sidewalk", "suv"};
  static const char* kParts[] = {"wheel", "plate", "sign", "brake light"};
  static const Rgb kColors[] = {{0, 0, 0},       {128, 128, 128}, {255, 255, 255}, {220, 20, 20},
                                {30, 160, 60},   {30, 60, 200},   {240, 220, 30},  {250, 140, 0}};
  std::mt19937_64 g(seed ^ 0xC0FFEE1234ULL);
  auto pick = [&](std::size_t n) { return static_cast<std::size_t>(g() % n); };
  auto r3 = [](double v) { return round_to(v, 1e-3); };

  std::vector<Rec> recs;
  std::vector<std::size_t> vehicles;
  for (std::size_t i = 0; i < individuals; ++i) {
    Rec r;
    bool part = !vehicles.empty() && unit(g) < 0.35;
    if (part) {
      const BBox& host = recs[vehicles[pick(vehicles.size())]].box;
      r.label = kParts[pick(std::size(kParts))];
      double w = r3(host.w * (0.1 + 0.3 * unit(g))), h = r3(host.h * (0.1 + 0.6 * unit(g)));
      w = std::max(w, 0.002);
      h = std::max(h, 0.002);
      r.box = {r3(host.x + (host.w - w) * unit(g)), r3(host.y + (host.h - h) * unit(g)), w, h};
      if (unit(g) < 0.2) r.box.x = r3(std::min(r.box.x + w * 0.5, 1.0 - w));
    } else {
      r.label = kWholes[pick(std::size(kWholes))];
      double w = r3(0.03 + 0.25 * unit(g)), h = r3(0.03 + 0.25 * unit(g));
      r.box = {r3((1 - w) * unit(g)), r3((1 - h) * unit(g)), w, h};
    }
    r.box.x = std::clamp(r.box.x, 0.0, 1.0 - r.box.w);
    r.box.y = std::clamp(r.box.y, 0.0, 1.0 - r.box.h);
    r.confidence = r3(0.5 + 0.5 * unit(g));
    r.depth = r3(1 + 60 * unit(g));
    if (unit(g) < 0.8) r.color = kColors[pick(std::size(kColors))];
    bool vehicle = r.label == "car" || r.label == "truck" || r.label == "bus" || r.label == "suv";
    if (vehicle) {
      if (unit(g) < 0.85) r.extra[kDistance] = dec(r3(5 + 90 * unit(g)));
      if (unit(g) < 0.3) r.extra[kWheels] = DataValue::integer(static_cast<std::int64_t>(2 + pick(6)));
      vehicles.push_back(recs.size());
    }
    recs.push_back(std::move(r));
  }
  return make_doc(QName{"traf", "synthetic_" + std::to_string(seed)}, 0, "synthetic/" + std::to_string(seed),
                  recs, "synthetic");
}

}  // namespace cairo
