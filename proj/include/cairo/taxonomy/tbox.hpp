#pragma once

// T-Box: concept taxonomy, role definitions, disjointness, cardinality bounds
// and the CWA derived-property specs, plus the text format they load from.

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "cairo/core/model.hpp"

namespace cairo {

enum class RoleKind { Object, Data };
enum class Datatype { Boolean, Integer, Decimal, String, Enum };

std::string_view datatype_name(Datatype d);

struct RoleDef {
  QName name;
  RoleKind kind = RoleKind::Object;
  QName domain;
  std::optional<QName> range_concept;  // object roles
  Datatype datatype = Datatype::Decimal;  // data roles
  std::vector<QName> enum_values;        // Datatype::Enum only
  bool functional = false;

  bool accepts(const DataValue& v) const;
  bool operator==(const RoleDef&) const = default;
};

// maxcard: a value upper bound for integer data roles, a distinct-object
// count bound for object roles.
struct CardinalityBound {
  QName concept_name;
  QName role;
  std::int64_t max = 0;
  auto operator<=>(const CardinalityBound&) const = default;
};

enum class Comparator { Ge, Gt, Le, Lt, Outside };

struct DerivedPropertySpec {
  enum class Kind { AbsenceOfPart, ThresholdFlag, Independence, PresenceInScene, AbsenceInScene };

  QName target;
  Kind kind = Kind::AbsenceOfPart;
  std::optional<QName> concept_name;  // part / container / scene-absence concept
  std::optional<QName> source;   // threshold_flag source role
  Comparator comparator = Comparator::Ge;
  double threshold = 0;
  double threshold_hi = 0;       // Outside only
  std::string threshold_param;   // "high_occlusion_threshold" (written $name) binds FusionConfig

  bool operator==(const DerivedPropertySpec&) const = default;
};

struct Diagnostic {
  int line = 0;
  int col = 0;
  std::string code;
  std::string message;
};

// Parse failure carrying every diagnostic found (line numbers are 1-based).
class TaxonomyError : public Error {
 public:
  TaxonomyError(std::string code, std::vector<Diagnostic> diags);
  const std::vector<Diagnostic>& diagnostics() const { return diags_; }

 private:
  std::vector<Diagnostic> diags_;
};

class TBox {
 public:
  NamespaceTable namespaces = NamespaceTable::with_defaults();
  std::set<QName> concepts;
  std::set<std::pair<QName, QName>> subclass_axioms;  // (child, parent)
  std::set<std::pair<QName, QName>> role_inclusions;  // (child, parent)
  std::vector<std::vector<QName>> disjoint_groups;    // canonical: sorted
  std::map<QName, RoleDef> roles;
  std::vector<CardinalityBound> cardinality_bounds;   // canonical: sorted
  std::vector<DerivedPropertySpec> derived_specs;     // canonical: sorted by target

  // Validates references and acyclicity, canonicalizes ordering and caches
  // the subsumption closure. Throws TaxonomyError ("CycleError",
  // "UnknownName", "InvalidTaxonomy").
  void finalize();

  bool is_concept(const QName& q) const { return concepts.count(q) > 0; }
  const RoleDef* role(const QName& q) const;
  // Reflexive-transitive ancestors; a singleton for unknown names.
  const std::set<QName>& ancestors(const QName& concept_name) const;
  const std::set<QName>& role_ancestors(const QName& role) const;
  bool subsumes(const QName& parent, const QName& child) const;
  bool are_disjoint(const QName& a, const QName& b) const;
  const DerivedPropertySpec* derived_spec(const QName& role) const;

  // Declarative equality (caches excluded).
  bool operator==(const TBox& o) const;

 private:
  std::map<QName, std::set<QName>> concept_closure_;
  std::map<QName, std::set<QName>> role_closure_;
};

TBox parse_taxonomy(std::string_view text,
                    NamespaceTable base = NamespaceTable::with_defaults());
std::string format_taxonomy(const TBox& tbox);

// The part of a `derived` line after the target role, e.g.
// "threshold_flag perc:occlusion_rate >= $high_occlusion_threshold".
std::string format_derived_definition(const DerivedPropertySpec& spec);
// Resolves names against `tbox`; throws Error("ParseError"/"UnknownName").
DerivedPropertySpec parse_derived_definition(const QName& target, std::string_view definition, const TBox& tbox);

struct SubsumptionClosure {
  std::map<QName, std::set<QName>> concepts;
  std::map<QName, std::set<QName>> roles;
};
SubsumptionClosure subsumption_closure(const TBox& tbox);

std::vector<std::string> check_tbox_coherence(const TBox& tbox);

// Shipped 6LM-lite pack, parsed once.
const TBox& shipped_taxonomy();
std::string_view shipped_taxonomy_text();

}  // namespace cairo
