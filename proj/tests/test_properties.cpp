#include <doctest.h>

#include <algorithm>
#include <random>

#include "support.hpp"

using namespace cairo;
using namespace cairo::test;

namespace {

Scene random_scene(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::size_t n = 1 + rng() % 12;
  return ingest_scene(synthetic_document(seed, n), cfg(), tbox());
}

bool uses_absence(const Rule& r) {
  static const std::set<QName> absence{{"phys", "no_plate"},
                                       {"phys", "is_independent"},
                                       {"traf", "lacks_driveable_lane"},
                                       {"traf", "absent_in"}};
  for (const auto& a : r.body) {
    if (std::holds_alternative<DifferentFromAtom>(a)) return true;
    if (auto* d = std::get_if<DataPropAtom>(&a); d && absence.count(d->role)) return true;
    if (auto* o = std::get_if<ObjectPropAtom>(&a); o && absence.count(o->role)) return true;
  }
  return false;
}

// Random conjunctive rules over the shipped vocabulary, built as text so the
// parser is exercised as well.
std::string random_rule_text(std::mt19937_64& rng) {
  static const std::vector<std::string> concepts{
      "l4_d:Vehicle", "l4_d:Passenger_Car", "l4_d:Pedestrian", "l4_d:Vulnerable_Road_User", "l4_d:Vehicle_Wheel",
      "l4_d:Traffic_Sign", "l1_c:Driveable_Lane", "l1_c:Crossing_Site", "traf:Traffic_Model_Element", "traf:Scene"};
  static const std::vector<std::string> object_roles{"phys:is_near", "phys:is_left_of", "phys:is_occluded_by",
                                                     "phys:is_part_of", "phys:has_part", "traf:present_in",
                                                     "traf:traffic_model_element_property"};
  static const std::vector<std::pair<std::string, std::vector<std::string>>> data_roles{
      {"perc:occlusion_rate", {"0.1", "0.5", "0"}},
      {"perc:has_high_occlusion", {"true", "false"}},
      {"phys:has_distance", {"30.0", "50", "10.5"}},
      {"phys:number_of_wheels", {"4", "3.0"}},
      {"phys:has_color", {"phys:Gray", "phys:White"}},
      {"phys:no_plate", {"1", "0"}},
  };
  static const std::vector<std::string> builtins{"equal", "notEqual", "lessThan", "lessThanOrEqual", "greaterThan",
                                                 "greaterThanOrEqual"};
  const std::vector<std::string> vars{"?a", "?b", "?c"};
  auto pick = [&](const auto& v) -> const auto& { return v[rng() % v.size()]; };

  std::vector<std::string> atoms;
  std::set<std::string> used;
  int data_vars = 0;
  std::size_t n = 1 + rng() % 4;
  for (std::size_t i = 0; i < n; ++i) {
    switch (rng() % 5) {
      case 0:
      case 1: {
        auto v = pick(vars);
        used.insert(v);
        atoms.push_back(pick(concepts) + "(" + v + ")");
        break;
      }
      case 2: {
        auto s = pick(vars), o = pick(vars);
        used.insert(s);
        used.insert(o);
        atoms.push_back(pick(object_roles) + "(" + s + ", " + o + ")");
        break;
      }
      case 3: {
        const auto& [role, consts] = pick(data_roles);
        auto s = pick(vars);
        used.insert(s);
        if (rng() % 2) {
          atoms.push_back(role + "(" + s + ", " + pick(consts) + ")");
        } else {
          std::string d = "?d" + std::to_string(data_vars++);
          atoms.push_back(role + "(" + s + ", " + d + ")");
          atoms.push_back("swrb:" + pick(builtins) + "(" + d + ", " + pick(consts) + ")");
        }
        break;
      }
      default: {
        auto l = pick(vars), r = pick(vars);
        used.insert(l);
        used.insert(r);
        atoms.push_back("differentFrom(" + l + ", " + r + ")");
        break;
      }
    }
  }
  std::string select;
  for (const auto& v : used)
    if (rng() % 2 || select.empty()) select += (select.empty() ? "" : ", ") + v;
  std::string text;
  for (const auto& a : atoms) text += (text.empty() ? "" : " ^ ") + a;
  return text + " -> sqwrl:select(" + select + ")";
}

Scenario random_scenario(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  ScenarioDocument doc;
  doc.scenario_id = QName{"traf", "random"};
  auto base = synthetic_document(seed, 1 + rng() % 8);
  for (std::size_t i = 0; i < base.records.size(); ++i) base.records[i].track_id = "t" + std::to_string(i);
  for (int k = 0; k < 2; ++k) {
    DetectionDocument d = base;
    d.scene_id = QName{"traf", "scene" + std::to_string(k + 1)};
    d.time_position = k;
    if (k == 1)
      std::erase_if(d.records, [&](const DetectionRecord&) { return rng() % 3 == 0; });
    doc.scenes.push_back(d);
  }
  return ingest_scenario(doc, cfg(), tbox());
}

}  // namespace

TEST_CASE("shipped rules agree with brute force on random scenes") {
  for (std::uint64_t seed = 1; seed <= 150; ++seed) {
    Scene s = random_scene(seed);
    auto g = realize(s, tbox());
    auto w = oracle::scene_world(s, tbox());
    for (const auto& r : pack().rules) {
      CAPTURE(seed);
      CAPTURE(r.id);
      CHECK(keys(evaluate_rule(r, g)) == oracle::matches(r, w));
    }
  }
}

TEST_CASE("random rules agree with brute force") {
  std::mt19937_64 rng(7);
  for (std::uint64_t seed = 1; seed <= 120; ++seed) {
    Scene s = random_scene(seed + 1000);
    auto g = realize(s, tbox());
    auto w = oracle::scene_world(s, tbox());
    for (int k = 0; k < 5; ++k) {
      std::string text = random_rule_text(rng);
      CAPTURE(text);
      Rule r = parse_rule(text, tbox(), "R");
      CHECK(keys(evaluate_rule(r, g)) == oracle::matches(r, w));
    }
  }
}

TEST_CASE("scenario rules agree with brute force") {
  for (std::uint64_t seed = 1; seed <= 60; ++seed) {
    Scenario sc = random_scenario(seed);
    auto w = oracle::scenario_world(sc, tbox());
    for (const auto& r : pack().rules) {
      CAPTURE(seed);
      CAPTURE(r.id);
      CHECK(keys(evaluate_rule_on_scenario(r, sc, tbox())) == oracle::matches(r, w));
    }
  }
}

TEST_CASE("body atom order does not change bindings") {
  std::mt19937_64 rng(11);
  for (std::uint64_t seed = 1; seed <= 60; ++seed) {
    Scene s = random_scene(seed + 2000);
    auto g = realize(s, tbox());
    for (const auto& r : pack().rules) {
      auto base = keys(evaluate_rule(r, g));
      Rule p = r;
      std::shuffle(p.body.begin(), p.body.end(), rng);
      CAPTURE(format_rule(p));
      CHECK(keys(evaluate_rule(p, g)) == base);
    }
  }
}

TEST_CASE("adding assertions never removes bindings of positive rules") {
  std::mt19937_64 rng(13);
  static const std::vector<QName> concepts{{"l4_d", "Pedestrian"}, {"l4_d", "Bicycle"}, {"l1_c", "Crossing_Site"},
                                           {"l4_d", "Vehicle"}, {"l4_d", "Traffic_Sign"}};
  static const std::vector<QName> roles{{"phys", "is_in_proximity"}, {"phys", "is_part_of"}, {"phys", "is_near"}};
  for (std::uint64_t seed = 1; seed <= 60; ++seed) {
    Scene s = random_scene(seed + 3000);
    if (s.individuals.empty()) continue;
    auto before = realize(s, tbox());
    Scene more = s;
    auto any = [&] { return s.individuals[rng() % s.individuals.size()].id; };
    for (int k = 0; k < 4; ++k) {
      more.assertions.push_back(ClassAssertion{any(), concepts[rng() % concepts.size()]});
      more.assertions.push_back(RoleAssertion{any(), roles[rng() % roles.size()], any()});
      more.assertions.push_back(RoleAssertion{any(), QName{"perc", "has_high_occlusion"}, DataValue::boolean(true)});
    }
    canonicalize(more.assertions);
    auto after = realize(more, tbox());
    for (const auto& r : pack().rules) {
      if (uses_absence(r)) continue;
      auto a = keys(evaluate_rule(r, before)), b = keys(evaluate_rule(r, after));
      CAPTURE(r.id);
      CHECK(std::includes(b.begin(), b.end(), a.begin(), a.end()));
    }
  }
}

TEST_CASE("realization is idempotent") {
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    Scene s = random_scene(seed + 4000);
    auto g = realize(s, tbox());
    auto again = MaterializedGraph::realize(g.assertions(), tbox(), g.domain_individuals(), g.context_individuals());
    CHECK(again.assertions() == g.assertions());
  }
}

TEST_CASE("closed-world double negation is the identity") {
  std::vector<std::string> exprs{"l4_d:Vehicle", "l4_d:Pedestrian or l1_c:Driveable_Lane",
                                 "phys:is_near some l4_d:Vehicle", "l4_d:Passenger_Car and not l4_d:Truck"};
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    auto g = realize(random_scene(seed + 5000), tbox());
    for (const auto& e : exprs) {
      auto x = parse_class_expression(e, tbox());
      auto nn = ClassExpression::negate(ClassExpression::negate(x));
      CHECK(dl_query(nn, g, WorldMode::Closed) == dl_query(x, g, WorldMode::Closed));
    }
  }
}

TEST_CASE("open-world answers are contained in closed-world answers") {
  std::vector<std::string> exprs{"l4_d:Passenger_Car and not (phys:has_part some l4_d:License_Plate)",
                                 "not l4_d:Vehicle", "l4_d:Vehicle and phys:has_part only l4_d:Vehicle_Wheel"};
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    auto g = realize(random_scene(seed + 6000), tbox());
    for (const auto& e : exprs) {
      auto x = parse_class_expression(e, tbox());
      auto open = dl_query(x, g, WorldMode::Open), closed = dl_query(x, g, WorldMode::Closed);
      CHECK(std::includes(closed.begin(), closed.end(), open.begin(), open.end()));
    }
  }
}

TEST_CASE("suite output is byte-identical across runs") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    Scene s = random_scene(seed + 7000);
    auto a = dump_document(cp_report_to_json(run_cp_suite(pack(), s, tbox())));
    auto b = dump_document(cp_report_to_json(run_cp_suite(pack(), s, tbox())));
    CHECK(a == b);
  }
}

TEST_CASE("synthetic scenes are deterministic per seed") {
  auto a = detection_document_to_json(synthetic_document(99, 12));
  auto b = detection_document_to_json(synthetic_document(99, 12));
  CHECK(a == b);
  CHECK(a != detection_document_to_json(synthetic_document(100, 12)));
}
