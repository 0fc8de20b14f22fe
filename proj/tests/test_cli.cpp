#include <doctest.h>

#include <fstream>
#include <sstream>

#include "cairo/service/cli.hpp"
#include "support.hpp"

using namespace cairo;
using namespace cairo::test;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run cli(std::vector<std::string> args) {
  args.insert(args.begin(), "cairo");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string fixture(const std::string& name) { return (source_dir() / "fixtures" / (name + ".json")).string(); }

void write(const std::filesystem::path& p, const std::string& s) { std::ofstream(p, std::ios::binary) << s; }

}  // namespace

TEST_CASE("ingest and reason") {
  auto dir = scratch_dir("cli_reason");
  auto r = cli({"ingest", "--scene", fixture("desert_road"), "--out", (dir / "scene.json").string()});
  REQUIRE(r.code == 0);
  CHECK(scene_from_json(parse_json_text(read_file(dir / "scene.json")), tbox().namespaces).assertions ==
        desert().assertions);

  r = cli({"reason", "--scene", fixture("desert_road")});
  CHECK(r.code == 1);  // rules fired
  CHECK(r.out == read_file(source_dir() / "fixtures" / "expected" / "desert_road.report.json"));
  // an ingested scene gives the same report as the raw detections
  auto again = cli({"reason", "--scene", (dir / "scene.json").string()});
  CHECK(again.out == r.out);

  r = cli({"reason", "--scene", fixture("stroller_control")});
  CHECK(r.code == 0);
}

TEST_CASE("query modes") {
  std::string expr = "l4_d:Passenger_Car and not (phys:has_part some l4_d:License_Plate)";
  auto c = cli({"query", "--scene", fixture("desert_road"), "--expr", expr, "--mode", "cwa"});
  REQUIRE(c.code == 0);
  CHECK(parse_json_text(c.out)["individuals"] == json::array({"car_1"}));
  auto o = cli({"query", "--scene", fixture("desert_road"), "--expr", expr, "--mode", "owa"});
  CHECK(parse_json_text(o.out)["individuals"].empty());
  CHECK(cli({"query", "--scene", fixture("desert_road"), "--expr", "l4_d:Nope", "--mode", "cwa"}).code == 2);
}

TEST_CASE("OWL export and import") {
  auto dir = scratch_dir("cli_owl");
  auto owl = (dir / "a.owl").string();
  REQUIRE(cli({"export-owl", "--scene", fixture("urban_intersection"), "--out", owl}).code == 0);
  auto r = cli({"import-owl", "--in", owl, "--out", (dir / "a.json").string(), "--pack-out",
                (dir / "pack.rules").string()});
  REQUIRE(r.code == 0);
  CHECK(r.err.empty());
  auto owl2 = (dir / "b.owl").string();
  REQUIRE(cli({"export-owl", "--scene", (dir / "a.json").string(), "--pack", (dir / "pack.rules").string(), "--out",
               owl2})
              .code == 0);
  CHECK(read_file(owl) == read_file(owl2));

  auto manifest = (dir / "stroller.manifest").string();
  REQUIRE(cli({"export-owl", "--scene", fixture("stroller_scenario"), "--out", manifest}).code == 0);
  r = cli({"import-owl", "--in", manifest});
  REQUIRE(r.code == 0);
  CHECK(parse_json_text(r.out).contains("scenes"));

  write(dir / "bad.owl", "<Ontology>");
  CHECK(cli({"import-owl", "--in", (dir / "bad.owl").string()}).code == 2);
}

TEST_CASE("sweep output is deterministic") {
  std::vector<std::string> args{"sweep",  "--scene", fixture("adversarial_truck"), "--target", "truck_1",
                                "--from", "0.05",    "--to",
                                "0.8",    "--step",  "0.05",
                                "--oracle", "table:0:0.05,0.30:0.60"};
  auto a = cli(args);
  args.insert(args.end(), {"--workers", "3"});
  auto b = cli(args);
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);
  CHECK(parse_json_text(a.out)["points"].size() == 16);
  CHECK(cli({"sweep", "--scene", fixture("adversarial_truck"), "--target", "nobody", "--from", "0.1", "--to", "0.2",
             "--step", "0.1"})
            .code == 2);
}

TEST_CASE("lint reports positions") {
  auto dir = scratch_dir("cli_lint");
  write(dir / "ok.rules", format_rule_pack(pack()));
  auto r = cli({"lint", "--pack", (dir / "ok.rules").string()});
  CHECK(r.code == 0);
  CHECK(r.out == "8 rules, 0 diagnostics\n");
  write(dir / "bad.rules", "pack p\nversion 1\n\nrule A\nl4_d:Truck(?t) ^ @ -> sqwrl:select(?t)\n");
  r = cli({"lint", "--pack", (dir / "bad.rules").string()});
  CHECK(r.code == 2);
  CHECK(r.err.find("bad.rules:5:18: error SyntaxError") != std::string::npos);
}

TEST_CASE("fixture generation is reproducible") {
  auto a = scratch_dir("cli_gen_a"), b = scratch_dir("cli_gen_b");
  REQUIRE(cli({"gen-fixtures", "--out", a.string(), "--expected"}).code == 0);
  REQUIRE(cli({"gen-fixtures", "--out", b.string(), "--expected"}).code == 0);
  CHECK(read_file(a / "CORPUS_SHA256") == read_file(b / "CORPUS_SHA256"));
  CHECK(read_file(a / "CORPUS_SHA256") == read_file(source_dir() / "fixtures" / "CORPUS_SHA256"));
}

TEST_CASE("usage errors exit with 2") {
  CHECK(cli({"reason"}).code == 2);
  CHECK(cli({"frobnicate"}).code == 2);
  CHECK(cli({"reason", "--scene", "/nonexistent.json"}).code == 2);
  CHECK(cli({"--help"}).code == 0);
}
