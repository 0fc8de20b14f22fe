#include <doctest.h>

#include "support.hpp"

using namespace cairo;
using namespace cairo::test;

namespace {

std::set<std::string> fired_on(const Rule& r, const Scene& s) { return keys(evaluate_rule(r, realize(s, tbox()))); }

std::set<std::string> oracle_on(const Rule& r, const Scene& s) {
  return oracle::matches(r, oracle::scene_world(s, tbox()));
}

std::vector<Finding> findings(const Scene& s) { return check_consistency(realize(s, tbox()), tbox(), s.id.str()); }

Scene inject(Scene s, const Assertion& a) {
  s.assertions.push_back(a);
  canonicalize(s.assertions);
  return s;
}

QName ind(const char* n) { return QName{"", n}; }

}  // namespace

TEST_CASE("fixtures fire exactly the intended rules") {
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
    CAPTURE(name);
    CpReport rep = run_cp_suite(pack(), scene, tbox());
    CHECK(rep.fired() == expected.at(name));
    CHECK(rep.consistency.empty());
    for (const auto& r : pack().rules) CHECK(fired_on(r, scene) == oracle_on(r, scene));
  }
}

TEST_CASE("temporal stroller rule") {
  Scenario sc = stroller();
  auto r = evaluate_rule_on_scenario(*pack().find("CP_0002"), sc, tbox());
  CHECK(keys(r) == std::set<std::string>{"?s=stroller_t7"});
  CHECK(oracle::matches(*pack().find("CP_0002"), oracle::scenario_world(sc, tbox())) == keys(r));
  Scenario ctl = stroller_control();
  CHECK(evaluate_rule_on_scenario(*pack().find("CP_0002"), ctl, tbox()).bindings.empty());
  CpReport rep = run_cp_suite(pack(), ctl, tbox());
  CHECK(rep.fired().empty());
  CHECK(rep.consistency.empty());
}

TEST_CASE("scenario lifting marks the missing stroller absent from scene 2") {
  auto as = scenario_assertions(stroller(), tbox());
  RoleAssertion absent{ind("stroller_t7"), QName{"traf", "absent_in"}, QName{"traf", "scene2"}};
  CHECK(std::find(as.begin(), as.end(), Assertion{absent}) != as.end());
  RoleAssertion present{ind("stroller_t7"), QName{"traf", "present_in"}, QName{"traf", "scene1"}};
  CHECK(std::find(as.begin(), as.end(), Assertion{present}) != as.end());
}

TEST_CASE("provenance points at realized graph assertions") {
  Scene s = adversarial();
  auto g = realize(s, tbox());
  auto r = evaluate_rule(*pack().find("CP_ADV_SIGN"), g);
  REQUIRE(r.bindings.size() == 1);
  const auto& prov = r.bindings[0].provenance;
  CHECK(prov.size() == 4);
  for (const auto& p : prov) CHECK(g.contains(p.assertion));
  REQUIRE(r.inferred.size() == 1);
  CHECK(make_assertion_key(r.inferred[0]) == "C|traf:Critical_Phenomenon|sign_1");
}

TEST_CASE("hybrid DL query: closed world finds the plate-less car, open world does not") {
  auto expr = parse_class_expression("l4_d:Passenger_Car and not (phys:has_part some l4_d:License_Plate)", tbox());
  auto g = realize(desert(), tbox());
  CHECK(dl_query(expr, g, WorldMode::Closed) == std::set<QName>{ind("car_1")});
  CHECK(dl_query(expr, g, WorldMode::Open).empty());
  auto world = oracle::scene_world(desert(), tbox());
  CHECK(oracle::members_without(world, QName{"l4_d", "Passenger_Car"}, QName{"phys", "has_part"},
                                QName{"l4_d", "License_Plate"}) == std::set<QName>{ind("car_1")});
}

TEST_CASE("DL query operators") {
  auto g = realize(urban(), tbox());
  auto q = [&](const char* text, WorldMode m = WorldMode::Closed) {
    return dl_query(parse_class_expression(text, tbox()), g, m);
  };
  CHECK(q("l4_d:Pedestrian").size() == 3);
  CHECK(q("l4_d:Pedestrian or l4_d:Bicycle").size() == 4);
  CHECK(q("l4_d:Vulnerable_Road_User and not l4_d:Pedestrian") == std::set<QName>{ind("bicycle_1")});
  CHECK(q("phys:is_occluded_by some l4_d:Passenger_Car").count(ind("pedestrian_2")));
  CHECK(q("l4_d:Passenger_Car and phys:has_part only l4_d:License_Plate") == std::set<QName>{ind("car_1")});
  CHECK(q("l4_d:Passenger_Car and phys:has_part only l4_d:License_Plate", WorldMode::Open).empty());
  // disjointness lets the open world exclude pedestrians from Vehicle
  CHECK(q("l4_d:Pedestrian and not l4_d:Vehicle", WorldMode::Open).size() == 3);
}

TEST_CASE("consistency injections produce exactly one finding each") {
  struct Case {
    const char* category;
    Scene scene;
  };
  Scene d = desert(), u = urban();
  std::vector<Case> cases{
      {"disjointness", inject(d, ClassAssertion{ind("car_1"), QName{"l4_d", "Pedestrian"}})},
      {"domain", inject(u, RoleAssertion{ind("pedestrian_1"), QName{"phys", "no_plate"}, DataValue::integer(1)})},
      {"range", inject(u, RoleAssertion{ind("wheel_1"), QName{"phys", "is_part_of"}, ind("lane_1")})},
      {"functional", inject(d, RoleAssertion{ind("car_1"), QName{"phys", "has_distance"}, DataValue::decimal(40)})},
      {"cardinality",
       inject(d, RoleAssertion{ind("car_1"), QName{"phys", "number_of_wheels"}, DataValue::integer(6)})},
  };
  for (const auto& c : cases) {
    CAPTURE(c.category);
    auto f = findings(c.scene);
    REQUIRE(f.size() == 1);
    CHECK(f[0].category == c.category);
  }
}

TEST_CASE("object-count cardinality and missing attributes") {
  Scene d = desert();
  Scene many = d;
  for (int i = 0; i < 9; ++i) {
    QName p{"", "part_" + std::to_string(i)};
    Individual x;
    x.id = p;
    many.individuals.push_back(x);
    many.assertions.push_back(ClassAssertion{p, QName{"l4_d", "Brake_Light"}});
    many.assertions.push_back(RoleAssertion{ind("car_1"), QName{"phys", "has_part"}, p});
  }
  canonicalize(many.assertions);
  std::set<std::string> cats;
  for (const auto& f : findings(many)) cats.insert(f.category);
  CHECK(cats.count("cardinality"));

  Scene bare = d;
  std::erase_if(bare.assertions, [](const Assertion& a) {
    auto* r = std::get_if<RoleAssertion>(&a);
    return r && r->role == QName{"phys", "has_distance"};
  });
  auto f = findings(bare);
  REQUIRE(f.size() == 1);
  CHECK(f[0].category == "missing_attribute");
  CHECK(f[0].subject == "car_1");
}

TEST_CASE("empty pack reports only consistency") {
  RulePack empty{"empty", "1", {}};
  CpReport r = run_cp_suite(empty, urban(), tbox());
  CHECK(r.rules.empty());
  CHECK(r.consistency.empty());
}

TEST_CASE("reports round trip through JSON and are deterministic") {
  CpReport a = run_cp_suite(pack(), urban(), tbox());
  CpReport b = run_cp_suite(pack(), urban(), tbox());
  CHECK(dump_document(cp_report_to_json(a)) == dump_document(cp_report_to_json(b)));
  CpReport back = cp_report_from_json(cp_report_to_json(a), tbox().namespaces);
  CHECK(same_report(a, back));
  CpReport timed = run_cp_suite(pack(), urban(), tbox(), SuiteOptions{true});
  CHECK(timed.elapsed_ms.has_value());
  CHECK(same_report(a, timed));
}

TEST_CASE("rules over data variables project literal values") {
  Rule r = parse_rule("l4_d:Passenger_Car(?c) ∧ phys:has_distance(?c, ?d) → sqwrl:select(?c, ?d)", tbox());
  auto k = fired_on(r, desert());
  CHECK(k == std::set<std::string>{"?c=car_1;?d=42.0"});
  CHECK(k == oracle_on(r, desert()));
}

TEST_CASE("differentFrom uses unique names") {
  Rule r = parse_rule("l4_d:Vehicle_Wheel(?a) ∧ l4_d:Vehicle_Wheel(?b) ∧ differentFrom(?a, ?b) → sqwrl:select(?a, ?b)",
                      tbox());
  auto k = fired_on(r, desert());
  CHECK(k == std::set<std::string>{"?a=wheel_1;?b=wheel_2", "?a=wheel_2;?b=wheel_1"});
}

TEST_CASE("head class atoms without select project head variables") {
  auto k = fired_on(*pack().find("CP_ADV_SIGN"), adversarial());
  CHECK(k == std::set<std::string>{"?ts=sign_1"});
}
