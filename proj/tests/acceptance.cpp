// One PASS/FAIL line per acceptance criterion; exits non-zero on any failure.

#include <chrono>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <random>

#include <sys/wait.h>

#include "cairo/owl/owl_io.hpp"
#include "cairo/validator/validator.hpp"
#include "printed_rules.hpp"
#include "support.hpp"

using namespace cairo;
using namespace cairo::test;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool ok = true;
  std::string detail;
  void fail(const std::string& why) {
    if (ok) detail = why;
    ok = false;
  }
};

int failures = 0;

void criterion(const std::string& name, const std::function<void(Outcome&)>& body) {
  Outcome o;
  auto t0 = Clock::now();
  try {
    body(o);
  } catch (const std::exception& e) {
    o.fail(std::string("exception: ") + e.what());
  }
  char took[32];
  std::snprintf(took, sizeof took, "%.3f s", seconds_since(t0));
  std::cout << (o.ok ? "PASS " : "FAIL ") << name << " (" << took << ")";
  if (!o.ok) std::cout << ": " << o.detail;
  std::cout << "\n";
  if (!o.ok) ++failures;
}

QName ind(const char* n) { return QName{"", n}; }

std::string join(const std::set<std::string>& s) {
  std::string out;
  for (const auto& x : s) out += (out.empty() ? "" : ",") + x;
  return "{" + out + "}";
}

void pack_vs_oracle(Outcome& o, const std::string& label, const Scene& s) {
  auto g = realize(s, tbox());
  auto w = oracle::scene_world(s, tbox());
  for (const auto& r : pack().rules) {
    auto got = keys(evaluate_rule(r, g)), want = oracle::matches(r, w);
    if (got != want) o.fail(label + " " + r.id + ": " + join(got) + " != oracle " + join(want));
  }
}

bool same_atoms(const Rule& a, const Rule& b) { return a.body == b.body && a.head == b.head; }

void table_fidelity(Outcome& o) {
  auto t0 = Clock::now();
  std::vector<std::pair<const char*, const char*>> printed{
      {"CP_0001", kPrintedCp0001}, {"CP_0003", kPrintedCp0003}, {"CP_0004", kPrintedCp0004}, {"CP_0005", kPrintedCp0005}};
  for (const auto& [id, text] : printed)
    if (!same_atoms(parse_rule(text, tbox()), *pack().find(id))) o.fail(std::string(id) + " text differs");
  parse_rule(kPrintedCp0002, tbox());

  std::map<std::string, std::map<std::string, std::set<std::string>>> expected{
      {"urban_intersection",
       {{"CP_0001", {"?v=pedestrian_2"}}, {"CP_0003", {"?b=bicycle_1"}}, {"CP_0005", {"?w=wheel_1"}}}},
      {"desert_road", {{"CP_0004", {"?car=car_1"}}, {"CP_WHEEL_PROP", {"?w=wheel_1", "?w=wheel_2"}}}},
      {"desert_road_perturbed",
       {{"CP_0004", {"?car=car_1"}},
        {"CP_WHEEL_PROP", {"?w=wheel_1", "?w=wheel_2"}},
        {"CP_NO_LANES", {"?sc=traf:desert_road_perturbed"}}}},
      {"adversarial_truck", {{"CP_ADV_SIGN", {"?ts=sign_1"}}}},
  };
  for (const auto& [name, scene] : fixture_scenes()) {
    if (scene.individuals.size() > 20) o.fail(name + " has more than 20 individuals");
    if (run_cp_suite(pack(), scene, tbox()).fired() != expected.at(name)) o.fail(name + " fired set differs");
    pack_vs_oracle(o, name, scene);
  }
  for (const auto& [name, sc] : fixture_scenarios()) {
    auto w = oracle::scenario_world(sc, tbox());
    for (const auto& r : pack().rules)
      if (keys(evaluate_rule_on_scenario(r, sc, tbox())) != oracle::matches(r, w)) o.fail(name + " " + r.id);
  }
  if (seconds_since(t0) >= 10) o.fail("over 10 s");
}

void random_oracle(Outcome& o) {
  auto t0 = Clock::now();
  for (std::uint64_t seed = 1; seed <= 500; ++seed) {
    std::mt19937_64 rng(seed * 7919);
    std::size_t n = 1 + rng() % 12;
    Scene s = ingest_scene(synthetic_document(seed * 7919, n), cfg(), tbox());
    pack_vs_oracle(o, "seed " + std::to_string(seed), s);
  }
  if (seconds_since(t0) >= 60) o.fail("over 60 s");
}

void hybrid_query(Outcome& o) {
  auto expr = parse_class_expression("l4_d:Passenger_Car and not (phys:has_part some l4_d:License_Plate)", tbox());
  auto g = realize(desert(), tbox());
  if (dl_query(expr, g, WorldMode::Closed) != std::set<QName>{ind("car_1")}) o.fail("CWA answer is not {car_1}");
  if (!dl_query(expr, g, WorldMode::Open).empty()) o.fail("OWA answer is not empty");
}

Scene inject(Scene s, const Assertion& a) {
  s.assertions.push_back(a);
  canonicalize(s.assertions);
  return s;
}

void consistency(Outcome& o) {
  Scene d = desert(), u = urban();
  std::vector<std::pair<std::string, Scene>> cases{
      {"disjointness", inject(d, ClassAssertion{ind("car_1"), QName{"l4_d", "Pedestrian"}})},
      {"domain", inject(u, RoleAssertion{ind("pedestrian_1"), QName{"phys", "no_plate"}, DataValue::integer(1)})},
      {"range", inject(u, RoleAssertion{ind("wheel_1"), QName{"phys", "is_part_of"}, ind("lane_1")})},
      {"functional", inject(d, RoleAssertion{ind("car_1"), QName{"phys", "has_distance"}, DataValue::decimal(40)})},
      {"cardinality", inject(d, RoleAssertion{ind("car_1"), QName{"phys", "number_of_wheels"}, DataValue::integer(6)})},
  };
  for (const auto& [cat, s] : cases) {
    auto f = check_consistency(realize(s, tbox()), tbox(), s.id.str());
    if (f.size() != 1 || f[0].category != cat)
      o.fail(cat + ": " + std::to_string(f.size()) + " findings" + (f.empty() ? "" : ", first " + f[0].category));
  }
  for (const auto& [name, s] : fixture_scenes())
    if (!run_cp_suite(pack(), s, tbox()).consistency.empty()) o.fail(name + " is not clean");
  for (const auto& [name, s] : fixture_scenarios())
    if (!run_cp_suite(pack(), s, tbox()).consistency.empty()) o.fail(name + " is not clean");
}

void owl_round_trip(Outcome& o) {
  for (const auto& [name, scene] : fixture_scenes()) {
    std::string bytes = export_owl(tbox(), scene, pack());
    OwlImport imp = import_owl(bytes);
    if (!same_report(run_cp_suite(pack(), scene, tbox()), run_cp_suite(imp.pack, imp.scene, imp.tbox)))
      o.fail(name + " report differs");
    if (export_owl(imp.tbox, imp.scene, imp.pack) != bytes) o.fail(name + " re-export differs");
  }
  for (const auto& [name, sc] : fixture_scenarios()) {
    auto exp = export_scenario_owl(tbox(), sc, pack());
    std::map<std::string, std::string> files(exp.documents.begin(), exp.documents.end());
    auto imp = import_scenario_owl(exp.manifest, [&](const std::string& f) { return files.at(f); });
    if (!same_report(run_cp_suite(pack(), sc, tbox()), run_cp_suite(imp.pack, imp.scenario, imp.tbox)))
      o.fail(name + " report differs");
    auto exp2 = export_scenario_owl(imp.tbox, imp.scenario, imp.pack);
    if (exp2.manifest != exp.manifest || exp2.documents != exp.documents) o.fail(name + " re-export differs");
  }
}

// Containment of the rescaled sign in the truck, computed from the fixture boxes.
double sign_containment(double f) {
  BBox sign{0.30, 0.38, 0.31, 0.26}, truck{0.30, 0.40, 0.40, 0.30};
  double w = sign.w * f, h = sign.h * f;
  double x0 = std::max(0.0, sign.cx() - w / 2), y0 = std::max(0.0, sign.cy() - h / 2);
  double x1 = std::min(1.0, sign.cx() + w / 2), y1 = std::min(1.0, sign.cy() + h / 2);
  BBox s{x0, y0, x1 - x0, y1 - y0};
  return overlap_area(s, truck) / s.area();
}

void sweep_bands(Outcome& o) {
  TableOracle orc(parse_table_spec("0:0.05,0.30:0.60"));
  SweepReport r = run_sweep(adversarial(), SweepSpec{ind("truck_1"), std::nullopt, 0.05, 0.80, 0.05}, orc, pack(),
                            tbox(), cfg(), 4);
  if (r.points.size() != 16) o.fail(std::to_string(r.points.size()) + " grid points");
  for (const auto& p : r.points) {
    std::string at = "at " + format_decimal(p.value, false);
    if (p.error) {
      o.fail(at + ": " + *p.error);
      continue;
    }
    bool band = p.value <= 0.05 + 1e-9 || (p.value >= 0.30 - 1e-9 && p.value <= 0.60 + 1e-9);
    if (p.detected != band) o.fail(at + ": detection " + (p.detected ? "true" : "false"));
    bool fires = std::find(p.fired.begin(), p.fired.end(), "CP_ADV_SIGN") != p.fired.end();
    bool want = p.value >= 0.5 - 1e-9 && sign_containment(*p.factor) >= cfg().part_of_containment;
    if (fires != want) o.fail(at + ": CP_ADV_SIGN " + (fires ? "fired" : "silent"));
  }
}

void temporal(Outcome& o) {
  const Rule& r = *pack().find("CP_0002");
  auto k = keys(evaluate_rule_on_scenario(r, stroller(), tbox()));
  if (k != std::set<std::string>{"?s=stroller_t7"}) o.fail("stroller scenario: " + join(k));
  auto c = keys(evaluate_rule_on_scenario(r, stroller_control(), tbox()));
  if (!c.empty()) o.fail("control scenario: " + join(c));
}

void performance(Outcome& o) {
  RulePack big = pack();
  for (std::size_t i = 0; big.rules.size() < 20; ++i) {
    Rule copy = pack().rules[i % pack().rules.size()];
    copy.id += "_COPY" + std::to_string(i);
    big.rules.push_back(copy);
  }
  auto doc = synthetic_document(2024, 100);
  auto t0 = Clock::now();
  Scene s = ingest_scene(doc, cfg(), tbox());
  CpReport r = run_cp_suite(big, s, tbox());
  double t = seconds_since(t0);
  if (s.individuals.size() < 100) o.fail("only " + std::to_string(s.individuals.size()) + " individuals");
  if (r.rules.size() != 20) o.fail("suite ran " + std::to_string(r.rules.size()) + " rules");
  for (const auto& rr : r.rules)
    if (rr.error) o.fail(rr.id + ": " + *rr.error);
  if (t >= 1.0) o.fail("pipeline took " + std::to_string(t) + " s");
}

void determinism(Outcome& o) {
  std::string cli = CAIRO_CLI_PATH;
  std::vector<std::filesystem::path> dirs{scratch_dir("acceptance_run1"), scratch_dir("acceptance_run2")};
  auto fx = [](const std::string& n) { return (source_dir() / "fixtures" / (n + ".json")).string(); };
  for (const auto& dir : dirs) {
    std::vector<std::string> cmds;
    for (const auto& e : fixture_entries()) {
      cmds.push_back("reason --scene " + fx(e.name) + " --out " + (dir / (e.name + ".report.json")).string());
      cmds.push_back("export-owl --scene " + fx(e.name) + " --out " +
                     (dir / (e.name + (e.kind == FixtureKind::Scene ? ".owl" : ".manifest"))).string());
    }
    cmds.push_back("sweep --scene " + fx("adversarial_truck") +
                   " --target truck_1 --from 0.05 --to 0.8 --step 0.05 --oracle table:0:0.05,0.30:0.60 --workers 4"
                   " --out " + (dir / "sweep.json").string());
    for (const auto& c : cmds) {
      int rc = std::system(("'" + cli + "' " + c + " 2>/dev/null").c_str());
      if (rc == -1 || WEXITSTATUS(rc) > 1) o.fail("command failed: " + c);
    }
  }
  std::size_t compared = 0;
  for (const auto& f : std::filesystem::directory_iterator(dirs[0])) {
    auto other = dirs[1] / f.path().filename();
    if (!std::filesystem::exists(other) || read_file(f.path()) != read_file(other))
      o.fail(f.path().filename().string() + " differs");
    ++compared;
  }
  if (compared < 2 * fixture_entries().size() + 1) o.fail("only " + std::to_string(compared) + " artifacts");
}

}  // namespace

int main() {
  criterion("rule table fidelity on canonical fixtures vs brute force (< 10 s)", table_fidelity);
  criterion("oracle equivalence on 500 random scenes (< 60 s)", random_oracle);
  criterion("hybrid CWA/OWA query on the desert fixture", hybrid_query);
  criterion("consistency injections and clean fixtures", consistency);
  criterion("OWL round trip and byte-identical re-export", owl_round_trip);
  criterion("occlusion sweep bands with the table oracle", sweep_bands);
  criterion("temporal stroller rule and control", temporal);
  criterion("100-individual pipeline with 20 rules (< 1 s)", performance);
  criterion("CLI artifacts are byte-identical across runs", determinism);
  std::cout << (failures ? std::to_string(failures) + " criteria failed\n" : "all criteria passed\n");
  return failures ? 1 : 0;
}
