#pragma once

// Realization, rule evaluation, DL queries and consistency checking over a
// materialized scene (or scenario) graph, plus the CP report document.

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "cairo/core/model.hpp"
#include "cairo/rules/rules.hpp"
#include "cairo/taxonomy/tbox.hpp"

namespace cairo {

// An individual or a data value: the things variables bind to.
using Value = std::variant<QName, DataValue>;
std::string format_value(const Value& v);

class MaterializedGraph {
 public:
  // `domain` are the detected individuals, `context` the scene nodes.
  // Every class assertion is closed under subsumption and every role
  // assertion under role inclusion.
  static MaterializedGraph realize(const std::vector<Assertion>& assertions, const TBox& tbox,
                                   const std::set<QName>& domain, const std::set<QName>& context);

  const TBox& tbox() const { return *tbox_; }

  // Canonically ordered realized assertions.
  const std::vector<Assertion>& assertions() const { return facts_; }
  // Keys of the assertions given to realize (before closure).
  const std::set<std::string>& asserted_keys() const { return asserted_; }
  bool contains(const std::string& key) const { return keys_.count(key) > 0; }

  const std::set<QName>& individuals() const { return individuals_; }  // domain + context + mentioned
  const std::set<QName>& domain_individuals() const { return domain_; }
  const std::set<QName>& context_individuals() const { return context_; }
  const std::set<DataValue>& data_values() const { return data_values_; }

  const std::set<QName>& members(const QName& concept_name) const;
  const std::set<QName>& memberships(const QName& individual) const;
  bool is_member(const QName& individual, const QName& concept_name) const;

  const std::set<std::pair<QName, QName>>& object_pairs(const QName& role) const;
  const std::set<QName>& successors(const QName& role, const QName& subject) const;
  const std::set<QName>& predecessors(const QName& role, const QName& object) const;

  const std::vector<std::pair<QName, DataValue>>& data_pairs(const QName& role) const;
  const std::vector<DataValue>& data_values(const QName& role, const QName& subject) const;

 private:
  void insert(const Assertion& a);

  const TBox* tbox_ = nullptr;
  std::vector<Assertion> facts_;
  std::set<std::string> keys_;
  std::set<std::string> asserted_;
  std::set<QName> individuals_, domain_, context_;
  std::set<DataValue> data_values_;
  std::map<QName, std::set<QName>> members_;
  std::map<QName, std::set<QName>> memberships_;
  std::map<QName, std::set<std::pair<QName, QName>>> object_pairs_;
  std::map<QName, std::map<QName, std::set<QName>>> succ_, pred_;
  std::map<QName, std::vector<std::pair<QName, DataValue>>> data_pairs_;
  std::map<QName, std::map<QName, std::vector<DataValue>>> data_by_subject_;
};

MaterializedGraph realize(const Scene& scene, const TBox& tbox);

// Tracks become the individuals (TrackTable::track_individuals names); every
// scene's assertions are lifted through the track table and present_in /
// absent_in are added per track and scene.
std::vector<Assertion> scenario_assertions(const Scenario& scenario, const TBox& tbox);
MaterializedGraph realize(const Scenario& scenario, const TBox& tbox);

struct ProvenanceEntry {
  std::string atom;       // formatted body atom
  std::string assertion;  // canonical key of the matched graph assertion
  auto operator<=>(const ProvenanceEntry&) const = default;
};

struct Binding {
  std::vector<std::pair<Var, Value>> values;  // projection variables, in select order
  std::vector<ProvenanceEntry> provenance;    // sorted, duplicate-free
  std::string key() const;                    // "?v=ped_2;?w=..." canonical
  bool operator==(const Binding&) const = default;
};

struct RuleResult {
  std::vector<Binding> bindings;          // sorted by key
  std::vector<Assertion> inferred;        // head class atoms, canonical order
};

// Every satisfying assignment of the body (active-domain semantics),
// projected onto the select variables (or the head variables when the head
// has no select). Duplicate projections merge their provenance.
RuleResult evaluate_rule(const Rule& rule, const MaterializedGraph& graph);
RuleResult evaluate_rule_on_scenario(const Rule& rule, const Scenario& scenario, const TBox& tbox);

// Full (unprojected) assignments, used by tests to check join-order independence.
std::vector<std::map<Var, Value>> evaluate_body(const Rule& rule, const MaterializedGraph& graph);

struct ClassExpression {
  enum class Op { Named, And, Or, Not, Exists, ForAll };
  Op op = Op::Named;
  QName name;  // concept for Named, role for Exists/ForAll
  std::vector<ClassExpression> args;

  static ClassExpression named(QName c);
  static ClassExpression conj(std::vector<ClassExpression> xs);
  static ClassExpression disj(std::vector<ClassExpression> xs);
  static ClassExpression negate(ClassExpression x);
  static ClassExpression exists(QName role, ClassExpression x);
  static ClassExpression forall(QName role, ClassExpression x);
};

enum class WorldMode { Open, Closed };

std::set<QName> dl_query(const ClassExpression& expr, const MaterializedGraph& graph, WorldMode mode);
// Manchester-like text: `A and not (has_part some B)`, `A or B`, `r only C`.
ClassExpression parse_class_expression(std::string_view text, const TBox& tbox);

struct Finding {
  std::string category;  // disjointness | domain | range | functional | cardinality | missing_attribute
  std::string scope;     // scene id
  std::string subject;   // individual
  std::string message;
  auto operator<=>(const Finding&) const = default;
};

std::vector<Finding> check_consistency(const MaterializedGraph& graph, const TBox& tbox, const std::string& scope);

struct RuleReport {
  std::string id;
  std::string label;
  std::vector<Binding> matches;
  std::vector<std::string> inferred;  // assertion keys, tagged inferred_by=id
  std::optional<std::string> error;
  bool operator==(const RuleReport&) const = default;
};

struct CpReport {
  std::string target_id;
  std::string pack_id;
  std::string pack_version;
  std::vector<RuleReport> rules;  // sorted by rule id
  std::vector<Finding> consistency;
  std::optional<double> elapsed_ms;

  const RuleReport* rule(std::string_view id) const;
  // rule id -> set of binding keys, for the non-empty rules
  std::map<std::string, std::set<std::string>> fired() const;
};

struct SuiteOptions {
  bool timings = false;
};

CpReport run_cp_suite(const RulePack& pack, const Scene& scene, const TBox& tbox, SuiteOptions opts = {});
CpReport run_cp_suite(const RulePack& pack, const Scenario& scenario, const TBox& tbox, SuiteOptions opts = {});

nlohmann::ordered_json cp_report_to_json(const CpReport& report);
CpReport cp_report_from_json(const nlohmann::ordered_json& j, const NamespaceTable& ns);
// Equality ignoring elapsed_ms.
bool same_report(const CpReport& a, const CpReport& b);

}  // namespace cairo
