#pragma once

// Detection records -> scene A-Box: fusion, spatial relations, closed-world
// derived properties and cross-scene track linking.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cairo/core/model.hpp"
#include "cairo/taxonomy/tbox.hpp"

namespace cairo {

struct DetectionRecord {
  std::string detector;
  std::string label_text;
  std::optional<QName> mapped_concept;
  BBox bbox;
  std::optional<double> mask_area;
  double confidence = 0;
  std::optional<std::vector<double>> logits;
  std::optional<Rgb> dominant_color;
  std::optional<double> depth_hint;
  std::optional<std::string> track_id;
  std::map<QName, DataValue> extra;  // resolved against the taxonomy's data roles
};

struct FusionConfig {
  double iou_merge_threshold = 0.5;
  double near_threshold = 0.10;  // fraction of the image diagonal
  double high_occlusion_threshold = 0.5;
  double part_of_containment = 0.8;
  double track_iou_threshold = 0.5;
  std::map<std::string, QName> label_map;

  void validate() const;  // thresholds in (0,1]; throws Error("InvalidConfig")
  // Value of a `$name` threshold parameter; throws Error("UnknownParameter").
  double parameter(const std::string& name) const;
  bool operator==(const FusionConfig&) const = default;
};

const FusionConfig& shipped_fusion_config();

double overlap_area(const BBox& a, const BBox& b);
double compute_iou(const BBox& a, const BBox& b);
// Rounded to 1e-4; strictly positive overlaps never round down to 0.
double quantize_rate(double r);

// Lower-case, non-alphanumerics collapsed to '_' ("traffic light" -> "traffic_light").
std::string sanitize_label(std::string_view label);

struct FusionResult {
  std::vector<Individual> individuals;
  std::vector<std::string> warnings;
};

FusionResult fuse_detections(const std::vector<DetectionRecord>& records, const FusionConfig& cfg,
                             const TBox& tbox);

// Class memberships, colour, confidence and pass-through attributes.
std::vector<Assertion> base_assertions(const Scene& scene, const TBox& tbox);
// Left/right, near/proximity, occlusion, part-of (+ has_part, relative_height).
std::vector<Assertion> derive_spatial_relations(const Scene& scene, const FusionConfig& cfg,
                                                const TBox& tbox);
// Closed-world flags for every derived spec; ignores any assertion of a
// derived target already present, so repeated runs agree.
std::vector<Assertion> materialize_cwa_properties(const Scene& scene, const TBox& tbox,
                                                  const FusionConfig& cfg);

// Rebuilds scene.assertions from the individuals (base + spatial + CWA).
void rederive(Scene& scene, const FusionConfig& cfg, const TBox& tbox);

struct DetectionDocument {
  QName scene_id;
  double time_position = 0;
  std::string frame_ref;
  std::vector<DetectionRecord> records;
};

struct ScenarioDocument {
  QName scenario_id;
  std::vector<DetectionDocument> scenes;
};

Scene ingest_scene(const DetectionDocument& doc, const FusionConfig& cfg, const TBox& tbox,
                   std::vector<std::string>* warnings = nullptr);

// Fills missing track ids (greedy same-concept IoU matching against the
// previous scene, new tracks named auto<n>) and returns the track table.
TrackTable link_tracks(Scenario& scenario, const FusionConfig& cfg);

Scenario ingest_scenario(const ScenarioDocument& doc, const FusionConfig& cfg, const TBox& tbox,
                         std::vector<std::string>* warnings = nullptr);

}  // namespace cairo
