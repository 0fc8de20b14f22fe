#pragma once

// Formal vocabulary shared by every module: qualified names, typed data
// values, class/role assertions, detected segments, scenes and scenarios.
//
// All values here are plain immutable-after-construction data; nothing holds
// a back-pointer, so scenes can be copied freely for counterfactual edits.

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace cairo {

// Base for every error the library raises. `code()` is the stable category
// name ("PrefixConflict", "UnsafeRule", ...) used in API error bodies.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}
  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

struct QName {
  std::string prefix;  // empty prefix = default individual namespace
  std::string local;

  std::string str() const;
  auto operator<=>(const QName&) const = default;
  bool operator==(const QName&) const = default;
};

bool is_valid_local_name(std::string_view s);

// Prefix -> IRI registry. Aliases map a spelling onto a canonical prefix
// (built in: phvs -> phys).
class NamespaceTable {
 public:
  struct Entry {
    std::string prefix;
    std::string iri;
  };

  static NamespaceTable with_defaults();

  Entry register_namespace(const std::string& prefix, const std::string& iri);
  void register_alias(const std::string& alias, const std::string& canonical);

  bool has(std::string_view prefix) const;
  const std::string& iri(std::string_view prefix) const;
  std::string canonical_prefix(std::string_view prefix) const;

  // Parses "p:local" (or bare "local" in the default namespace), applying
  // aliases. Throws Error("UnknownPrefix") / Error("InvalidName").
  QName resolve(std::string_view text) const;
  QName make(std::string_view prefix, std::string_view local) const;
  std::string expand(const QName& q) const;
  // Inverse of expand; nullopt when no registered IRI is a prefix of `iri`.
  std::optional<QName> abbreviate(std::string_view iri) const;

  const std::map<std::string, std::string, std::less<>>& entries() const { return entries_; }
  const std::map<std::string, std::string, std::less<>>& aliases() const { return aliases_; }

  bool operator==(const NamespaceTable&) const = default;

 private:
  std::map<std::string, std::string, std::less<>> entries_;
  std::map<std::string, std::string, std::less<>> aliases_;
};

// Tagged data value. Integers and decimals compare by numeric value, so the
// ordering (and hence canonical keys) stays consistent with equality.
class DataValue {
 public:
  enum class Kind { Boolean, Integer, Decimal, String, Enum };
  struct EnumToken {
    QName token;
    bool operator==(const EnumToken&) const = default;
  };

  static DataValue boolean(bool b);
  static DataValue integer(std::int64_t i);
  static DataValue decimal(double d);  // throws Error("NonFiniteDecimal")
  static DataValue string(std::string s);
  static DataValue enum_token(QName q);

  Kind kind() const;
  bool is_numeric() const { return kind() == Kind::Integer || kind() == Kind::Decimal; }
  double as_number() const;
  bool as_bool() const { return std::get<bool>(v_); }
  std::int64_t as_integer() const { return std::get<std::int64_t>(v_); }
  const std::string& as_string() const { return std::get<std::string>(v_); }
  const QName& as_enum() const { return std::get<EnumToken>(v_).token; }

  // Rule-language literal: 42.0, 1, true, "text", phys:Gray.
  std::string literal() const;
  // Canonical key text: 42, 1, true, "text", phys:Gray.
  std::string key_text() const;

  std::weak_ordering operator<=>(const DataValue& o) const;
  bool operator==(const DataValue& o) const { return (*this <=> o) == 0; }

 private:
  std::variant<bool, std::int64_t, double, std::string, EnumToken> v_;
};

std::string_view kind_name(DataValue::Kind k);

// Shortest round-trip decimal text; `force_point` appends ".0" to integral
// values so a decimal literal keeps its type when re-read.
std::string format_decimal(double d, bool force_point = true);

struct ClassAssertion {
  QName individual;
  QName concept_name;
  bool operator==(const ClassAssertion&) const = default;
};

struct RoleAssertion {
  QName subject;
  QName role;
  std::variant<QName, DataValue> object;  // QName = object role, DataValue = data role

  bool is_object() const { return std::holds_alternative<QName>(object); }
  const QName& object_name() const { return std::get<QName>(object); }
  const DataValue& literal() const { return std::get<DataValue>(object); }
  bool operator==(const RoleAssertion&) const = default;
};

using Assertion = std::variant<ClassAssertion, RoleAssertion>;

// "C|concept|ind", "O|role|subj|obj", "D|role|subj|value".
std::string make_assertion_key(const Assertion& a);
std::string make_assertion_key(const ClassAssertion& a);
std::string make_assertion_key(const RoleAssertion& a);

// Sorts by canonical key and removes duplicates.
void canonicalize(std::vector<Assertion>& assertions);

// N_R, N_C, N_I with kind separation enforced on insertion.
class Names {
 public:
  enum class Kind { Role, Concept, Individual };
  void add(const QName& q, Kind k);  // throws Error("KindConflict")
  std::optional<Kind> kind_of(const QName& q) const;
  const std::set<QName>& roles() const { return roles_; }
  const std::set<QName>& concepts() const { return concepts_; }
  const std::set<QName>& individuals() const { return individuals_; }

 private:
  std::set<QName> roles_, concepts_, individuals_;
};

struct BBox {
  double x = 0, y = 0, w = 0, h = 0;

  double area() const { return w * h; }
  double right() const { return x + w; }
  double bottom() const { return y + h; }
  double cx() const { return x + w / 2; }
  double cy() const { return y + h / 2; }
  bool valid() const;
  bool operator==(const BBox&) const = default;
};

struct Rgb {
  int r = 0, g = 0, b = 0;
  bool operator==(const Rgb&) const = default;
};

struct Segment {
  QName id;
  BBox bbox;
  double mask_area = 0;
  double confidence = 0;
  std::optional<std::vector<double>> logits;
  std::optional<Rgb> dominant_color;
  std::optional<double> depth_hint;  // smaller = nearer
  std::string source_detector;

  void validate() const;  // throws Error("InvalidSegment")
  bool operator==(const Segment&) const = default;
};

struct ConceptScore {
  QName concept_name;
  double score = 0;
  bool operator==(const ConceptScore&) const = default;
};

// One detected individual with the features it was built from. Assertions
// about it are derived from these features (see ingestion).
struct Individual {
  QName id;
  std::string label;
  Segment segment;
  std::vector<ConceptScore> candidates;      // score-descending
  std::map<QName, DataValue> attributes;     // pass-through data roles
  std::optional<std::string> track_id;

  const QName& primary_concept() const;
  bool operator==(const Individual&) const = default;
};

struct Scene {
  QName id;
  double time_position = 0;
  std::string frame_ref;
  std::vector<Individual> individuals;
  std::vector<Assertion> assertions;  // canonical order

  const Individual* find(const QName& id) const;
  Individual* find(const QName& id);
  // Individual ids unique; assertions only mention this scene's individuals
  // or the scene node itself. Throws Error("InvalidScene").
  void validate() const;
  bool operator==(const Scene&) const = default;
};

// track id -> per-scene individual (nullopt when absent from that scene).
struct TrackTable {
  std::map<std::string, std::vector<std::optional<QName>>> tracks;
  std::map<std::string, QName> track_individuals;  // track id -> scenario-level name
  bool operator==(const TrackTable&) const = default;
};

struct Scenario {
  QName id;
  std::vector<Scene> scenes;
  TrackTable tracks;

  void validate() const;  // strictly increasing time positions
  bool operator==(const Scenario&) const = default;
};

}  // namespace cairo
