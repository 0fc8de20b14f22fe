#include <doctest.h>

#include "cairo/taxonomy/tbox.hpp"

using namespace cairo;

namespace {

QName q(const char* p, const char* l) { return QName{p, l}; }

std::string first_code(std::string_view text) {
  try {
    parse_taxonomy(text);
  } catch (const TaxonomyError& e) {
    return e.code();
  }
  return "";
}

}  // namespace

TEST_CASE("shipped taxonomy loads and is coherent") {
  const TBox& t = shipped_taxonomy();
  CHECK(t.is_concept(q("l4_d", "Passenger_Car")));
  CHECK(t.subsumes(q("l4_d", "Vehicle"), q("l4_d", "Passenger_Car")));
  CHECK(t.subsumes(q("traf", "Traffic_Model_Element"), q("l4_d", "Stroller")));
  CHECK_FALSE(t.subsumes(q("l4_d", "Vehicle"), q("l4_d", "Pedestrian")));
  CHECK(t.are_disjoint(q("l4_d", "Passenger_Car"), q("l4_d", "Pedestrian")));
  CHECK(t.are_disjoint(q("l4_d", "Truck"), q("l1_c", "Driveable_Lane")));
  CHECK_FALSE(t.are_disjoint(q("l4_d", "Traffic_Sign"), q("l4_d", "Vehicle_Part")));
  CHECK(check_tbox_coherence(t).empty());
}

TEST_CASE("role inclusion closure") {
  const TBox& t = shipped_taxonomy();
  const auto& up = t.role_ancestors(q("traf", "present_in"));
  CHECK(up.count(q("traf", "traffic_model_element_property")));
  CHECK(up.count(q("traf", "present_in")));
}

TEST_CASE("ancestors of an unknown name are the name alone") {
  const auto& a = shipped_taxonomy().ancestors(q("l4_d", "Nope"));
  CHECK(a == std::set<QName>{q("l4_d", "Nope")});
}

TEST_CASE("derived specs parse from the shipped text") {
  const TBox& t = shipped_taxonomy();
  const auto* occ = t.derived_spec(q("perc", "has_high_occlusion"));
  REQUIRE(occ);
  CHECK(occ->kind == DerivedPropertySpec::Kind::ThresholdFlag);
  CHECK(occ->comparator == Comparator::Ge);
  CHECK(occ->threshold_param == "high_occlusion_threshold");
  const auto* dis = t.derived_spec(q("phys", "is_disproportionate"));
  REQUIRE(dis);
  CHECK(dis->comparator == Comparator::Outside);
  CHECK(dis->threshold == doctest::Approx(0.15));
  CHECK(dis->threshold_hi == doctest::Approx(0.50));
  const auto* np = t.derived_spec(q("phys", "no_plate"));
  REQUIRE(np);
  CHECK(np->kind == DerivedPropertySpec::Kind::AbsenceOfPart);
  CHECK(*np->concept_name == q("l4_d", "License_Plate"));
}

TEST_CASE("cardinality bounds") {
  const TBox& t = shipped_taxonomy();
  bool found = false;
  for (const auto& b : t.cardinality_bounds)
    if (b.concept_name == q("l4_d", "Passenger_Car") && b.role == q("phys", "number_of_wheels")) {
      found = true;
      CHECK(b.max == 4);
    }
  CHECK(found);
}

TEST_CASE("format then parse is the identity") {
  const TBox& t = shipped_taxonomy();
  std::string text = format_taxonomy(t);
  TBox back = parse_taxonomy(text);
  CHECK(back == t);
  CHECK(format_taxonomy(back) == text);
}

TEST_CASE("derived definitions round trip through text") {
  const TBox& t = shipped_taxonomy();
  for (const auto& d : t.derived_specs) {
    auto text = format_derived_definition(d);
    CHECK(parse_derived_definition(d.target, text, t) == d);
  }
}

TEST_CASE("subclass cycles are rejected") {
  CHECK(first_code("concept traf:A\nconcept traf:B\ntraf:A is_a traf:B\ntraf:B is_a traf:A\n") == "CycleError");
}

TEST_CASE("unknown names are rejected") {
  CHECK(first_code("concept traf:A\ntraf:A is_a traf:Missing\n") == "UnknownName");
}

TEST_CASE("parse errors carry line numbers") {
  try {
    parse_taxonomy("concept traf:A\n\nfrobnicate traf:A\n");
    FAIL("expected ParseError");
  } catch (const TaxonomyError& e) {
    CHECK(e.code() == "ParseError");
    REQUIRE(e.diagnostics().size() == 1);
    CHECK(e.diagnostics()[0].line == 3);
  }
}

TEST_CASE("a name cannot be both concept and role") {
  CHECK(first_code("concept traf:A\nrole traf:A object domain=traf:A range=traf:A\n") == "KindConflict");
}

TEST_CASE("custom prefixes register") {
  TBox t = parse_taxonomy("prefix ex = <http://example.com/x#>\nconcept ex:Thing\n");
  CHECK(t.is_concept(q("ex", "Thing")));
  CHECK(t.namespaces.iri("ex") == "http://example.com/x#");
}

TEST_CASE("subsumption closure is reflexive and transitive") {
  const TBox& t = shipped_taxonomy();
  auto closure = subsumption_closure(t);
  for (const auto& [c, ups] : closure.concepts) {
    CHECK(ups.count(c));
    for (const auto& u : ups)
      for (const auto& uu : closure.concepts.at(u)) CHECK(ups.count(uu));
  }
}

TEST_CASE("data roles accept only their datatype") {
  const TBox& t = shipped_taxonomy();
  const RoleDef* color = t.role(q("phys", "has_color"));
  REQUIRE(color);
  CHECK(color->accepts(DataValue::enum_token(q("phys", "Gray"))));
  CHECK_FALSE(color->accepts(DataValue::enum_token(q("phys", "Mauve"))));
  CHECK_FALSE(color->accepts(DataValue::integer(3)));
  const RoleDef* dist = t.role(q("phys", "has_distance"));
  REQUIRE(dist);
  CHECK(dist->accepts(DataValue::decimal(4.5)));
}
