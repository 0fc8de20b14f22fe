#include <doctest.h>

#include "printed_rules.hpp"
#include "support.hpp"

using namespace cairo;
using namespace cairo::test;

namespace {

RuleDiagnostic first_diag(std::string_view text) {
  try {
    parse_rule(text, tbox(), "R");
  } catch (const RuleError& e) {
    REQUIRE_FALSE(e.diagnostics().empty());
    return e.diagnostics()[0];
  }
  FAIL("expected a RuleError");
  return {};
}

bool same_atoms(const Rule& a, const Rule& b) { return a.body == b.body && a.head == b.head; }

}  // namespace

TEST_CASE("printed rules parse to the shipped rules") {
  const auto& p = pack();
  CHECK(same_atoms(parse_rule(kPrintedCp0001, tbox()), *p.find("CP_0001")));
  CHECK(same_atoms(parse_rule(kPrintedCp0003, tbox()), *p.find("CP_0003")));
  CHECK(same_atoms(parse_rule(kPrintedCp0004, tbox()), *p.find("CP_0004")));
  CHECK(same_atoms(parse_rule(kPrintedCp0005, tbox()), *p.find("CP_0005")));
}

TEST_CASE("printed CP 0002 parses but is normalized in the shipped pack") {
  Rule printed = parse_rule(kPrintedCp0002, tbox());
  CHECK(printed.body.size() == 4);
  CHECK_FALSE(same_atoms(printed, *pack().find("CP_0002")));
}

TEST_CASE("query form with a trailing select") {
  Rule r = parse_rule(kAdvancedQuery, tbox());
  REQUIRE(r.head.size() == 1);
  CHECK(std::holds_alternative<SelectAtom>(r.head[0]));
  CHECK(r.select_vars() == std::vector<Var>{Var{"c"}});
}

TEST_CASE("phvs normalizes to phys") {
  Rule r = parse_rule(kPrintedCp0001, tbox());
  const auto& d = std::get<DataPropAtom>(r.body[2]);
  CHECK(std::get<DataValue>(d.value).as_enum() == QName{"phys", "Gray"});
}

TEST_CASE("ascii and unicode connectives are equivalent") {
  Rule a = parse_rule("l4_d:Truck(?t) ^ phys:is_near(?t, ?x) -> sqwrl:select(?t)", tbox());
  Rule b = parse_rule("l4_d:Truck(?t) ∧ phys:is_near(?t, ?x) → sqwrl:select(?t)", tbox());
  CHECK(same_atoms(a, b));
}

TEST_CASE("shipped pack") {
  const auto& p = pack();
  CHECK(p.id == "cp_pack");
  CHECK(p.version == "1");
  std::vector<std::string> ids;
  for (const auto& r : p.rules) ids.push_back(r.id);
  CHECK(ids == std::vector<std::string>{"CP_0001", "CP_0002", "CP_0003", "CP_0004", "CP_0005", "CP_ADV_SIGN",
                                        "CP_WHEEL_PROP", "CP_NO_LANES"});
  for (const auto& d : lint_pack(p, tbox())) CHECK_MESSAGE(d.severity != "error", d.message);
}

TEST_CASE("format then parse is the identity for every shipped rule") {
  for (const auto& r : pack().rules) {
    std::string text = format_rule(r);
    Rule back = parse_rule(text, tbox(), r.id, r.label);
    CHECK(back == r);
    CHECK(format_rule(back) == text);
  }
  std::string text = format_rule_pack(pack());
  RulePack back = parse_rule_pack(text, tbox());
  CHECK(back == pack());
  CHECK(format_rule_pack(back) == text);
}

TEST_CASE("syntax errors report line and column in code points") {
  auto d = first_diag("l4_d:Truck(?t) ∧ @ → sqwrl:select(?t)");
  CHECK(d.code == "SyntaxError");
  CHECK(d.line == 1);
  CHECK(d.col == 18);
  d = first_diag("l4_d:Truck(?t)\n  ∧ phys:is_near(?t ?x) → sqwrl:select(?t)");
  CHECK(d.code == "SyntaxError");
  CHECK(d.line == 2);
}

TEST_CASE("unknown names are reported at their token") {
  auto d = first_diag("l4_d:Truck(?t) ∧ l4_d:Spaceship(?t) → sqwrl:select(?t)");
  CHECK(d.code == "UnknownName");
  CHECK(d.line == 1);
  CHECK(d.col == 18);
  CHECK(d.rule_id == "R");
}

TEST_CASE("unsafe heads are rejected") {
  auto d = first_diag("l4_d:Truck(?t) → sqwrl:select(?u)");
  CHECK(d.code == "UnsafeRule");
}

TEST_CASE("concepts cannot stand in for individuals") {
  auto d = first_diag("phys:is_near(?t, l4_d:Truck) → sqwrl:select(?t)");
  CHECK(d.code == "KindConflict");
}

TEST_CASE("role atoms may not appear in the head") {
  auto d = first_diag("l4_d:Truck(?t) → phys:is_near(?t, ?t)");
  CHECK(d.code == "SyntaxError");
}

TEST_CASE("line offsets shift reported lines") {
  try {
    parse_rule("l4_d:Truck(?t) ∧ @", tbox(), "R", "", 9);
    FAIL("expected RuleError");
  } catch (const RuleError& e) {
    CHECK(e.diagnostics()[0].line == 10);
  }
}

TEST_CASE("pack parsing reports duplicates and bad lines") {
  try {
    parse_rule_pack("pack p\nversion 1\nrule A \"a\"\nl4_d:Truck(?t) → sqwrl:select(?t)\nrule A \"b\"\n"
                    "l4_d:Bus(?t) → sqwrl:select(?t)\n",
                    tbox());
    FAIL("expected DuplicateRule");
  } catch (const RuleError& e) {
    CHECK(e.diagnostics()[0].code == "DuplicateRule");
    CHECK(e.diagnostics()[0].line == 5);
  }
  try {
    parse_rule_pack("pack p\nnonsense\n", tbox());
    FAIL("expected SyntaxError");
  } catch (const RuleError& e) {
    CHECK(e.diagnostics()[0].line == 2);
  }
}

TEST_CASE("lint warnings") {
  auto codes = [](const Rule& r) {
    std::set<std::string> out;
    for (const auto& d : lint_rule(r, tbox())) out.insert(d.code);
    return out;
  };
  // a pedestrian never has a distance (domain is Vehicle)
  Rule dm = parse_rule("l4_d:Pedestrian(?p) ∧ phys:has_distance(?p, ?d) → sqwrl:select(?p)", tbox());
  CHECK(codes(dm).count("DomainMismatch"));
  Rule dt = parse_rule("l4_d:Truck(?t) ∧ phys:has_distance(?t, true) → sqwrl:select(?t)", tbox());
  CHECK(codes(dt).count("DatatypeMismatch"));
  Rule ic = parse_rule("l4_d:Truck(?t) ∧ phys:has_color(?t, ?c) ∧ swrb:lessThan(?c, 3) → sqwrl:select(?t)", tbox());
  CHECK(codes(ic).count("IncompatibleComparison"));
  Rule uv = parse_rule("l4_d:Truck(?t) ∧ l4_d:Bus(?b) → sqwrl:select(?t)", tbox());
  CHECK(codes(uv).count("UnusedVariable"));
}

TEST_CASE("builtins compare only comparable values") {
  CHECK(apply_builtin(BuiltinOp::LessThan, DataValue::integer(42), DataValue::decimal(50.0)));
  CHECK(apply_builtin(BuiltinOp::Equal, DataValue::integer(1), DataValue::decimal(1.0)));
  CHECK_FALSE(apply_builtin(BuiltinOp::Equal, DataValue::boolean(true), DataValue::integer(1)));
  CHECK_FALSE(apply_builtin(BuiltinOp::NotEqual, DataValue::boolean(true), DataValue::integer(1)));
  CHECK(apply_builtin(BuiltinOp::GreaterThanOrEqual, DataValue::string("b"), DataValue::string("a")));
  CHECK(builtin_from_name("lessThanOrEqual") == BuiltinOp::LessThanOrEqual);
  CHECK_FALSE(builtin_from_name("between"));
}
