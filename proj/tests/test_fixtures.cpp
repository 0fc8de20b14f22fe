#include <doctest.h>

#include "cairo/service/store.hpp"
#include "support.hpp"

using namespace cairo;
using namespace cairo::test;

namespace {

const std::filesystem::path kDir = source_dir() / "fixtures";

}  // namespace

TEST_CASE("checked-in fixtures match the generator byte for byte") {
  auto files = generate_fixtures(0);
  std::string corpus;
  for (const auto& [name, bytes] : files) {
    CAPTURE(name);
    CHECK(read_file(kDir / name) == bytes);
    corpus += name + "\n" + bytes;
  }
  CHECK(read_file(kDir / "CORPUS_SHA256") == sha256_hex(corpus) + "\n");
}

TEST_CASE("expected reports match a fresh run on the checked-in documents") {
  for (const auto& e : fixture_entries()) {
    CAPTURE(e.name);
    auto j = parse_json_text(read_file(kDir / (e.name + ".json")));
    CpReport r = e.kind == FixtureKind::Scene
                     ? run_cp_suite(pack(), ingest_scene(parse_detection_document(j, tbox()), cfg(), tbox()), tbox())
                     : run_cp_suite(pack(), ingest_scenario(parse_scenario_document(j, tbox()), cfg(), tbox()), tbox());
    CHECK(read_file(kDir / "expected" / (e.name + ".report.json")) == dump_document(cp_report_to_json(r)));
  }
}

TEST_CASE("pinned fusion config equals the shipped defaults") {
  auto j = parse_json_text(read_file(kDir / "fusion.json"));
  CHECK(parse_fusion_config(j, tbox().namespaces) == cfg());
}

TEST_CASE("manifest lists every fixture in corpus order") {
  auto j = parse_json_text(read_file(kDir / "manifest.json"));
  CHECK(j["seed"] == 0);
  REQUIRE(j["fixtures"].size() == fixture_entries().size());
  for (std::size_t i = 0; i < fixture_entries().size(); ++i) {
    CHECK(j["fixtures"][i]["name"] == fixture_entries()[i].name);
    CHECK(std::filesystem::exists(kDir / j["fixtures"][i]["file"].get<std::string>()));
  }
}

TEST_CASE("seeded corpora jitter positions but keep the same findings") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    CAPTURE(seed);
    auto files = generate_fixtures(seed);
    CHECK(files.at("urban_intersection.json") != generate_fixtures(0).at("urban_intersection.json"));
    Scene u = ingest_scene(urban_intersection_document(seed), cfg(), tbox());
    CHECK(run_cp_suite(pack(), u, tbox()).fired() == run_cp_suite(pack(), urban(), tbox()).fired());
    Scene a = ingest_scene(adversarial_truck_document(seed), cfg(), tbox());
    CHECK(run_cp_suite(pack(), a, tbox()).fired() == run_cp_suite(pack(), adversarial(), tbox()).fired());
  }
}

TEST_CASE("fixture scenes stay small enough for exhaustive checking") {
  for (const auto& [name, s] : fixture_scenes()) CHECK(s.individuals.size() <= 20);
}
