#pragma once

// Shared helpers: canonical fixtures ingested with the shipped T-Box and
// fusion config, and brute-force comparison of a whole pack.

#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>

#include "cairo/fixtures/fixtures.hpp"
#include "cairo/ingestion/documents.hpp"
#include "cairo/reasoner/reasoner.hpp"
#include "oracle/brute_force.hpp"

namespace cairo::test {

inline const TBox& tbox() { return shipped_taxonomy(); }
inline const FusionConfig& cfg() { return shipped_fusion_config(); }
inline const RulePack& pack() { return shipped_pack(); }

inline Scene urban() { return ingest_scene(urban_intersection_document(), cfg(), tbox()); }
inline Scene desert() { return ingest_scene(desert_road_document(), cfg(), tbox()); }
inline Scene desert_perturbed() { return ingest_scene(desert_road_perturbed_document(), cfg(), tbox()); }
inline Scene adversarial() { return ingest_scene(adversarial_truck_document(), cfg(), tbox()); }
inline Scenario stroller() { return ingest_scenario(stroller_scenario_document(), cfg(), tbox()); }
inline Scenario stroller_control() { return ingest_scenario(stroller_control_document(), cfg(), tbox()); }

inline std::map<std::string, Scene> fixture_scenes() {
  return {{"urban_intersection", urban()},
          {"desert_road", desert()},
          {"desert_road_perturbed", desert_perturbed()},
          {"adversarial_truck", adversarial()}};
}

inline std::map<std::string, Scenario> fixture_scenarios() {
  return {{"stroller_scenario", stroller()}, {"stroller_control", stroller_control()}};
}

inline std::set<std::string> keys(const RuleResult& r) {
  std::set<std::string> out;
  for (const auto& b : r.bindings) out.insert(b.key());
  return out;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::filesystem::path source_dir() { return CAIRO_SOURCE_DIR; }

// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("cairo_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace cairo::test
