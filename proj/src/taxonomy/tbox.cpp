#include <algorithm>
#include <functional>

#include "cairo/taxonomy/tbox.hpp"

namespace cairo {

std::string_view datatype_name(Datatype d) {
  switch (d) {
    case Datatype::Boolean: return "boolean";
    case Datatype::Integer: return "integer";
    case Datatype::Decimal: return "decimal";
    case Datatype::String: return "string";
    case Datatype::Enum: return "enum";
  }
  return "?";
}

bool RoleDef::accepts(const DataValue& v) const {
  if (kind != RoleKind::Data) return false;
  switch (datatype) {
    case Datatype::Boolean: return v.kind() == DataValue::Kind::Boolean;
    case Datatype::Integer: return v.kind() == DataValue::Kind::Integer;
    case Datatype::Decimal: return v.is_numeric();
    case Datatype::String: return v.kind() == DataValue::Kind::String;
    case Datatype::Enum:
      return v.kind() == DataValue::Kind::Enum &&
             std::find(enum_values.begin(), enum_values.end(), v.as_enum()) != enum_values.end();
  }
  return false;
}

namespace {

std::string join_diag_messages(const std::vector<Diagnostic>& diags) {
  std::string out;
  for (const auto& d : diags) {
    if (!out.empty()) out += "; ";
    if (d.line > 0) out += "line " + std::to_string(d.line) + ": ";
    out += d.message;
  }
  return out;
}

}  // namespace

TaxonomyError::TaxonomyError(std::string code, std::vector<Diagnostic> diags)
    : Error(std::move(code), join_diag_messages(diags)), diags_(std::move(diags)) {}

void TBox::finalize() {
  std::vector<Diagnostic> unknown;
  auto need_concept = [&](const QName& q, const std::string& where) {
    if (!concepts.count(q)) unknown.push_back({0, 0, "UnknownName", "unknown concept '" + q.str() + "' in " + where});
  };
  auto need_role = [&](const QName& q, const std::string& where) {
    if (!roles.count(q)) unknown.push_back({0, 0, "UnknownName", "unknown role '" + q.str() + "' in " + where});
  };

  for (const auto& q : concepts)
    if (roles.count(q))
      throw TaxonomyError("KindConflict", {{0, 0, "KindConflict", "'" + q.str() + "' is both a concept and a role"}});

  for (const auto& [c, p] : subclass_axioms) {
    need_concept(c, "subclass axiom");
    need_concept(p, "subclass axiom");
  }
  for (const auto& [c, p] : role_inclusions) {
    need_role(c, "role inclusion");
    need_role(p, "role inclusion");
    if (roles.count(c) && roles.count(p) && roles.at(c).kind != roles.at(p).kind)
      unknown.push_back({0, 0, "InvalidTaxonomy", "role inclusion mixes object and data roles: " + c.str() + " is_a " + p.str()});
  }
  for (auto& g : disjoint_groups) {
    if (g.size() < 2)
      unknown.push_back({0, 0, "InvalidTaxonomy", "disjoint group needs at least two concepts"});
    for (const auto& q : g) need_concept(q, "disjoint group");
    std::sort(g.begin(), g.end());
    g.erase(std::unique(g.begin(), g.end()), g.end());
  }
  for (const auto& b : cardinality_bounds) {
    need_concept(b.concept_name, "maxcard");
    need_role(b.role, "maxcard");
  }
  for (const auto& d : derived_specs) {
    need_role(d.target, "derived spec");
    if (d.source) need_role(*d.source, "derived spec");
    if (d.concept_name) need_concept(*d.concept_name, "derived spec");
  }
  for (const auto& [name, def] : roles) {
    if (def.datatype == Datatype::Enum && def.enum_values.empty())
      unknown.push_back({0, 0, "InvalidTaxonomy", "enum range of " + name.str() + " is empty"});
    for (const auto& tok : def.enum_values)
      if (concepts.count(tok) || roles.count(tok))
        unknown.push_back({0, 0, "KindConflict", "enum token '" + tok.str() + "' is also a concept or role"});
  }
  if (!unknown.empty()) throw TaxonomyError(unknown.front().code, unknown);

  // Acyclicity (self-loops included).
  std::map<QName, std::vector<QName>> parents;
  for (const auto& [c, p] : subclass_axioms) parents[c].push_back(p);
  std::map<QName, int> state;  // 0 unvisited, 1 on stack, 2 done
  std::vector<QName> stack;
  std::function<void(const QName&)> dfs = [&](const QName& n) {
    state[n] = 1;
    stack.push_back(n);
    for (const auto& p : parents[n]) {
      if (state[p] == 1) {
        auto it = std::find(stack.begin(), stack.end(), p);
        std::string cycle;
        for (; it != stack.end(); ++it) cycle += it->str() + " -> ";
        cycle += p.str();
        throw TaxonomyError("CycleError", {{0, 0, "CycleError", "subclass cycle: " + cycle}});
      }
      if (state[p] == 0) dfs(p);
    }
    stack.pop_back();
    state[n] = 2;
  };
  for (const auto& c : concepts)
    if (state[c] == 0) dfs(c);

  std::sort(disjoint_groups.begin(), disjoint_groups.end());
  disjoint_groups.erase(std::unique(disjoint_groups.begin(), disjoint_groups.end()), disjoint_groups.end());
  std::sort(cardinality_bounds.begin(), cardinality_bounds.end());
  std::stable_sort(derived_specs.begin(), derived_specs.end(),
                   [](const auto& a, const auto& b) { return a.target < b.target; });

  auto close = [](const std::set<QName>& names, const std::set<std::pair<QName, QName>>& edges) {
    std::map<QName, std::vector<QName>> up;
    for (const auto& [c, p] : edges) up[c].push_back(p);
    std::map<QName, std::set<QName>> out;
    for (const auto& n : names) {
      auto& acc = out[n];
      std::vector<QName> work{n};
      while (!work.empty()) {
        QName cur = work.back();
        work.pop_back();
        if (!acc.insert(cur).second) continue;
        for (const auto& p : up[cur]) work.push_back(p);
      }
    }
    return out;
  };
  concept_closure_ = close(concepts, subclass_axioms);
  std::set<QName> role_names;
  for (const auto& [n, _] : roles) role_names.insert(n);
  role_closure_ = close(role_names, role_inclusions);
}

const RoleDef* TBox::role(const QName& q) const {
  auto it = roles.find(q);
  return it == roles.end() ? nullptr : &it->second;
}

const std::set<QName>& TBox::ancestors(const QName& concept_name) const {
  auto it = concept_closure_.find(concept_name);
  if (it != concept_closure_.end()) return it->second;
  static thread_local std::map<QName, std::set<QName>> singletons;
  auto& s = singletons[concept_name];
  if (s.empty()) s.insert(concept_name);
  return s;
}

const std::set<QName>& TBox::role_ancestors(const QName& r) const {
  auto it = role_closure_.find(r);
  if (it != role_closure_.end()) return it->second;
  static thread_local std::map<QName, std::set<QName>> singletons;
  auto& s = singletons[r];
  if (s.empty()) s.insert(r);
  return s;
}

bool TBox::subsumes(const QName& parent, const QName& child) const {
  return ancestors(child).count(parent) > 0;
}

bool TBox::are_disjoint(const QName& a, const QName& b) const {
  const auto& aa = ancestors(a);
  const auto& bb = ancestors(b);
  for (const auto& g : disjoint_groups) {
    for (const auto& p : g) {
      if (!aa.count(p)) continue;
      for (const auto& q : g)
        if (q != p && bb.count(q)) return true;
    }
  }
  return false;
}

const DerivedPropertySpec* TBox::derived_spec(const QName& r) const {
  for (const auto& d : derived_specs)
    if (d.target == r) return &d;
  return nullptr;
}

bool TBox::operator==(const TBox& o) const {
  return namespaces == o.namespaces && concepts == o.concepts && subclass_axioms == o.subclass_axioms &&
         role_inclusions == o.role_inclusions && disjoint_groups == o.disjoint_groups && roles == o.roles &&
         cardinality_bounds == o.cardinality_bounds && derived_specs == o.derived_specs;
}

SubsumptionClosure subsumption_closure(const TBox& tbox) {
  SubsumptionClosure out;
  for (const auto& c : tbox.concepts) out.concepts[c] = tbox.ancestors(c);
  for (const auto& [r, _] : tbox.roles) out.roles[r] = tbox.role_ancestors(r);
  return out;
}

std::vector<std::string> check_tbox_coherence(const TBox& tbox) {
  std::vector<std::string> warnings;
  for (const auto& c : tbox.concepts) {
    const auto& anc = tbox.ancestors(c);
    for (const auto& g : tbox.disjoint_groups) {
      std::vector<std::string> hit;
      for (const auto& m : g)
        if (anc.count(m)) hit.push_back(m.str());
      if (hit.size() >= 2) {
        std::string joined;
        for (const auto& h : hit) joined += (joined.empty() ? "" : ", ") + h;
        warnings.push_back("unsatisfiable concept " + c.str() + ": subsumed by disjoint concepts " + joined);
        break;
      }
    }
  }
  for (const auto& [name, def] : tbox.roles) {
    if (!tbox.is_concept(def.domain))
      warnings.push_back("role " + name.str() + " has undeclared domain concept " + def.domain.str());
    if (def.kind == RoleKind::Object && def.range_concept && !tbox.is_concept(*def.range_concept))
      warnings.push_back("role " + name.str() + " has undeclared range concept " + def.range_concept->str());
  }
  return warnings;
}

}  // namespace cairo
