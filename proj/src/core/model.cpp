#include "cairo/core/model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>

namespace cairo {

std::string QName::str() const {
  if (prefix.empty()) return local;
  return prefix + ":" + local;
}

bool is_valid_local_name(std::string_view s) {
  if (s.empty()) return false;
  auto alpha = [](char c) { return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || c == '_'; };
  auto digit = [](char c) { return c >= '0' && c <= '9'; };
  if (!alpha(s.front())) return false;
  return std::all_of(s.begin() + 1, s.end(), [&](char c) { return alpha(c) || digit(c); });
}

// ---------------------------------------------------------------------------
// NamespaceTable

NamespaceTable NamespaceTable::with_defaults() {
  NamespaceTable t;
  t.register_namespace("", "http://example.org/scene#");
  t.register_namespace("l1_c", "http://purl.org/auto/l1_core#");
  t.register_namespace("l4_d", "http://purl.org/auto/l4_de#");
  t.register_namespace("phys", "http://purl.org/auto/physics#");
  t.register_namespace("perc", "http://purl.org/auto/perception#");
  t.register_namespace("traf", "http://purl.org/auto/traffic_model#");
  t.register_namespace("swrb", "http://www.w3.org/2003/11/swrlb#");
  t.register_namespace("sqwrl", "http://sqwrl.stanford.edu/ontologies/built-ins/3.4/sqwrl.owl#");
  t.register_alias("phvs", "phys");
  return t;
}

NamespaceTable::Entry NamespaceTable::register_namespace(const std::string& prefix,
                                                          const std::string& iri) {
  if (!prefix.empty() && !is_valid_local_name(prefix))
    throw Error("InvalidName", "invalid namespace prefix '" + prefix + "'");
  if (aliases_.count(prefix))
    throw Error("PrefixConflict", "prefix '" + prefix + "' is registered as an alias");
  auto it = entries_.find(prefix);
  if (it != entries_.end() && it->second != iri)
    throw Error("PrefixConflict",
                "prefix '" + prefix + "' already maps to <" + it->second + ">, not <" + iri + ">");
  entries_[prefix] = iri;
  return Entry{prefix, iri};
}

void NamespaceTable::register_alias(const std::string& alias, const std::string& canonical) {
  if (!entries_.count(canonical))
    throw Error("UnknownPrefix", "alias target '" + canonical + "' is not registered");
  if (entries_.count(alias))
    throw Error("PrefixConflict", "alias '" + alias + "' is already a registered prefix");
  aliases_[alias] = canonical;
}

bool NamespaceTable::has(std::string_view prefix) const {
  return entries_.find(prefix) != entries_.end() || aliases_.find(prefix) != aliases_.end();
}

std::string NamespaceTable::canonical_prefix(std::string_view prefix) const {
  auto a = aliases_.find(prefix);
  if (a != aliases_.end()) return a->second;
  return std::string(prefix);
}

const std::string& NamespaceTable::iri(std::string_view prefix) const {
  auto it = entries_.find(canonical_prefix(prefix));
  if (it == entries_.end()) throw Error("UnknownPrefix", "unknown prefix '" + std::string(prefix) + "'");
  return it->second;
}

QName NamespaceTable::make(std::string_view prefix, std::string_view local) const {
  std::string p = canonical_prefix(prefix);
  if (entries_.find(p) == entries_.end())
    throw Error("UnknownPrefix", "unknown prefix '" + std::string(prefix) + "'");
  if (!is_valid_local_name(local))
    throw Error("InvalidName", "invalid local name '" + std::string(local) + "'");
  return QName{p, std::string(local)};
}

QName NamespaceTable::resolve(std::string_view text) const {
  auto colon = text.find(':');
  if (colon == std::string_view::npos) return make("", text);
  return make(text.substr(0, colon), text.substr(colon + 1));
}

std::string NamespaceTable::expand(const QName& q) const { return iri(q.prefix) + q.local; }

std::optional<QName> NamespaceTable::abbreviate(std::string_view full) const {
  std::optional<QName> best;
  std::size_t best_len = 0;
  for (const auto& [p, base] : entries_) {
    if (full.size() > base.size() && full.substr(0, base.size()) == base && base.size() > best_len) {
      auto local = full.substr(base.size());
      if (!is_valid_local_name(local)) continue;
      best = QName{p, std::string(local)};
      best_len = base.size();
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// DataValue

DataValue DataValue::boolean(bool b) {
  DataValue v;
  v.v_ = b;
  return v;
}
DataValue DataValue::integer(std::int64_t i) {
  DataValue v;
  v.v_ = i;
  return v;
}
DataValue DataValue::decimal(double d) {
  if (!std::isfinite(d)) throw Error("NonFiniteDecimal", "decimal values must be finite");
  DataValue v;
  v.v_ = d == 0.0 ? 0.0 : d;  // fold -0.0
  return v;
}
DataValue DataValue::string(std::string s) {
  DataValue v;
  v.v_ = std::move(s);
  return v;
}
DataValue DataValue::enum_token(QName q) {
  DataValue v;
  v.v_ = EnumToken{std::move(q)};
  return v;
}

DataValue::Kind DataValue::kind() const { return static_cast<Kind>(v_.index()); }

double DataValue::as_number() const {
  if (auto* i = std::get_if<std::int64_t>(&v_)) return static_cast<double>(*i);
  return std::get<double>(v_);
}

std::string format_decimal(double d, bool force_point) {
  char buf[512];
  auto res = std::to_chars(buf, buf + sizeof buf, d, std::chars_format::fixed);
  std::string s(buf, res.ptr);
  if (force_point && s.find('.') == std::string::npos) s += ".0";
  return s;
}

namespace {

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string DataValue::literal() const {
  switch (kind()) {
    case Kind::Boolean: return as_bool() ? "true" : "false";
    case Kind::Integer: return std::to_string(as_integer());
    case Kind::Decimal: return format_decimal(std::get<double>(v_), true);
    case Kind::String: return quote(as_string());
    case Kind::Enum: return as_enum().str();
  }
  return {};
}

std::string DataValue::key_text() const {
  if (kind() == Kind::Decimal) return format_decimal(std::get<double>(v_), false);
  return literal();
}

std::weak_ordering DataValue::operator<=>(const DataValue& o) const {
  auto rank = [](Kind k) {
    switch (k) {
      case Kind::Boolean: return 0;
      case Kind::Integer:
      case Kind::Decimal: return 1;
      case Kind::String: return 2;
      case Kind::Enum: return 3;
    }
    return 4;
  };
  int ra = rank(kind()), rb = rank(o.kind());
  if (ra != rb) return ra <=> rb;
  switch (kind()) {
    case Kind::Boolean: return as_bool() <=> o.as_bool();
    case Kind::Integer:
      if (o.kind() == Kind::Integer) return as_integer() <=> o.as_integer();
      [[fallthrough]];
    case Kind::Decimal: {
      double a = as_number(), b = o.as_number();
      if (a < b) return std::weak_ordering::less;
      if (a > b) return std::weak_ordering::greater;
      return std::weak_ordering::equivalent;
    }
    case Kind::String: return as_string() <=> o.as_string();
    case Kind::Enum: return as_enum() <=> o.as_enum();
  }
  return std::weak_ordering::equivalent;
}

std::string_view kind_name(DataValue::Kind k) {
  switch (k) {
    case DataValue::Kind::Boolean: return "boolean";
    case DataValue::Kind::Integer: return "integer";
    case DataValue::Kind::Decimal: return "decimal";
    case DataValue::Kind::String: return "string";
    case DataValue::Kind::Enum: return "enum";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Assertions

std::string make_assertion_key(const ClassAssertion& a) {
  return "C|" + a.concept_name.str() + "|" + a.individual.str();
}

std::string make_assertion_key(const RoleAssertion& a) {
  if (a.is_object()) return "O|" + a.role.str() + "|" + a.subject.str() + "|" + a.object_name().str();
  return "D|" + a.role.str() + "|" + a.subject.str() + "|" + a.literal().key_text();
}

std::string make_assertion_key(const Assertion& a) {
  return std::visit([](const auto& x) { return make_assertion_key(x); }, a);
}

void canonicalize(std::vector<Assertion>& assertions) {
  std::vector<std::pair<std::string, Assertion>> keyed;
  keyed.reserve(assertions.size());
  for (auto& a : assertions) keyed.emplace_back(make_assertion_key(a), std::move(a));
  std::stable_sort(keyed.begin(), keyed.end(),
                   [](const auto& l, const auto& r) { return l.first < r.first; });
  assertions.clear();
  const std::string* prev = nullptr;
  for (auto& [k, a] : keyed) {
    if (prev && *prev == k) continue;
    assertions.push_back(std::move(a));
    prev = &k;
  }
}

// ---------------------------------------------------------------------------
// Names

void Names::add(const QName& q, Kind k) {
  auto existing = kind_of(q);
  if (existing && *existing != k)
    throw Error("KindConflict", "name '" + q.str() + "' is already used as a different kind");
  switch (k) {
    case Kind::Role: roles_.insert(q); break;
    case Kind::Concept: concepts_.insert(q); break;
    case Kind::Individual: individuals_.insert(q); break;
  }
}

std::optional<Names::Kind> Names::kind_of(const QName& q) const {
  if (roles_.count(q)) return Kind::Role;
  if (concepts_.count(q)) return Kind::Concept;
  if (individuals_.count(q)) return Kind::Individual;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Geometry & scene

bool BBox::valid() const {
  constexpr double eps = 1e-9;
  return x >= 0 && y >= 0 && w >= 0 && h >= 0 && x + w <= 1 + eps && y + h <= 1 + eps;
}

void Segment::validate() const {
  if (!bbox.valid()) throw Error("InvalidSegment", id.str() + ": bbox outside the unit square");
  if (mask_area < 0 || mask_area > bbox.area() + 1e-6)
    throw Error("InvalidSegment", id.str() + ": mask_area exceeds bbox area");
  if (confidence < 0 || confidence > 1)
    throw Error("InvalidSegment", id.str() + ": confidence outside [0,1]");
  if (dominant_color) {
    for (int c : {dominant_color->r, dominant_color->g, dominant_color->b})
      if (c < 0 || c > 255) throw Error("InvalidSegment", id.str() + ": color channel outside 0-255");
  }
}

const QName& Individual::primary_concept() const {
  static const QName none;
  return candidates.empty() ? none : candidates.front().concept_name;
}

const Individual* Scene::find(const QName& q) const {
  for (const auto& ind : individuals)
    if (ind.id == q) return &ind;
  return nullptr;
}

Individual* Scene::find(const QName& q) {
  for (auto& ind : individuals)
    if (ind.id == q) return &ind;
  return nullptr;
}

void Scene::validate() const {
  std::set<QName> ids;
  for (const auto& ind : individuals) {
    if (!ids.insert(ind.id).second)
      throw Error("InvalidScene", "duplicate individual '" + ind.id.str() + "' in " + id.str());
    ind.segment.validate();
  }
  auto known = [&](const QName& q) { return q == id || ids.count(q) > 0; };
  for (const auto& a : assertions) {
    if (auto* c = std::get_if<ClassAssertion>(&a)) {
      if (!known(c->individual))
        throw Error("InvalidScene", "assertion mentions unknown individual '" + c->individual.str() + "'");
    } else {
      const auto& r = std::get<RoleAssertion>(a);
      if (!known(r.subject))
        throw Error("InvalidScene", "assertion mentions unknown individual '" + r.subject.str() + "'");
      if (r.is_object() && !known(r.object_name()))
        throw Error("InvalidScene", "assertion mentions unknown individual '" + r.object_name().str() + "'");
    }
  }
}

void Scenario::validate() const {
  for (std::size_t i = 1; i < scenes.size(); ++i) {
    if (!(scenes[i].time_position > scenes[i - 1].time_position))
      throw Error("InvalidScenario", "scenes of " + id.str() + " are not strictly ordered by time_position");
  }
  for (const auto& [track, slots] : tracks.tracks) {
    if (slots.size() != scenes.size())
      throw Error("InvalidScenario", "track '" + track + "' does not cover every scene");
  }
}

}  // namespace cairo
