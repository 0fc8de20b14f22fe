#pragma once

// Deterministic scene corpus: the canonical urban, desert, adversarial and
// stroller fixtures plus seeded synthetic scenes for property and load tests.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "cairo/ingestion/ingestion.hpp"

namespace cairo {

enum class FixtureKind { Scene, Scenario };

struct FixtureEntry {
  std::string name;  // file stem under fixtures/
  FixtureKind kind = FixtureKind::Scene;
  std::string description;
};

// Canonical corpus order.
const std::vector<FixtureEntry>& fixture_entries();

DetectionDocument urban_intersection_document(std::uint64_t seed = 0);
DetectionDocument desert_road_document(std::uint64_t seed = 0);
DetectionDocument desert_road_perturbed_document(std::uint64_t seed = 0);
DetectionDocument adversarial_truck_document(std::uint64_t seed = 0);
ScenarioDocument stroller_scenario_document(std::uint64_t seed = 0);
ScenarioDocument stroller_control_document(std::uint64_t seed = 0);

// File name -> bytes: one document per fixture, the pinned fusion config
// (fusion.json) and manifest.json. Seed 0 is the canonical corpus; other
// seeds jitter box positions by at most 0.004.
std::map<std::string, std::string> generate_fixtures(std::uint64_t seed);

// Random scene with `individuals` records drawn from the shipped label
// vocabulary; boxes are clustered so spatial relations and parts occur.
DetectionDocument synthetic_document(std::uint64_t seed, std::size_t individuals);

}  // namespace cairo
