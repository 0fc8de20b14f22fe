#include <algorithm>

#include "cairo/reasoner/reasoner.hpp"

namespace cairo {

std::vector<Finding> check_consistency(const MaterializedGraph& graph, const TBox& tbox, const std::string& scope) {
  std::vector<Finding> out;
  auto add = [&](const char* cat, const QName& subject, std::string msg) {
    out.push_back({cat, scope, subject.str(), std::move(msg)});
  };

  for (const auto& x : graph.individuals()) {
    const auto& mem = graph.memberships(x);
    for (const auto& group : tbox.disjoint_groups) {
      std::vector<std::string> hit;
      for (const auto& c : group)
        if (mem.count(c)) hit.push_back(c.str());
      if (hit.size() < 2) continue;
      std::string list;
      for (const auto& h : hit) list += (list.empty() ? "" : ", ") + h;
      add("disjointness", x, x.str() + " is a member of disjoint concepts " + list);
    }
  }

  // Domain / range: one finding per asserted role assertion, checking the
  // role and every role it is included in.
  for (const auto& a : graph.assertions()) {
    auto* r = std::get_if<RoleAssertion>(&a);
    if (!r || !graph.asserted_keys().count(make_assertion_key(a))) continue;
    std::optional<QName> bad_domain, bad_range;
    for (const auto& sup : tbox.role_ancestors(r->role)) {
      const RoleDef* def = tbox.role(sup);
      if (!def) continue;
      if (!bad_domain && !graph.is_member(r->subject, def->domain)) bad_domain = def->domain;
      if (!bad_range && r->is_object() && def->range_concept && !graph.is_member(r->object_name(), *def->range_concept))
        bad_range = *def->range_concept;
    }
    if (bad_domain)
      add("domain", r->subject,
          r->role.str() + " asserted on " + r->subject.str() + ", which is not a " + bad_domain->str());
    if (bad_range)
      add("range", r->subject,
          r->role.str() + "(" + r->subject.str() + ", " + r->object_name().str() + "): object is not a " +
              bad_range->str());
  }

  for (const auto& [name, def] : tbox.roles) {
    if (!def.functional) continue;
    if (def.kind == RoleKind::Object) {
      std::map<QName, std::set<QName>> objs;
      for (const auto& [x, y] : graph.object_pairs(name)) objs[x].insert(y);
      for (const auto& [x, ys] : objs)
        if (ys.size() > 1)
          add("functional", x, "functional role " + name.str() + " has " + std::to_string(ys.size()) + " values on " + x.str());
    } else {
      std::map<QName, std::set<DataValue>> vals;
      for (const auto& [x, v] : graph.data_pairs(name)) vals[x].insert(v);
      for (const auto& [x, vs] : vals)
        if (vs.size() > 1)
          add("functional", x, "functional role " + name.str() + " has " + std::to_string(vs.size()) + " values on " + x.str());
    }
  }

  for (const auto& b : tbox.cardinality_bounds) {
    const RoleDef* def = tbox.role(b.role);
    if (!def) continue;
    for (const auto& x : graph.members(b.concept_name)) {
      if (def->kind == RoleKind::Object) {
        auto n = static_cast<std::int64_t>(graph.successors(b.role, x).size());
        if (n > b.max)
          add("cardinality", x,
              x.str() + " has " + std::to_string(n) + " " + b.role.str() + " values, at most " + std::to_string(b.max) +
                  " allowed for " + b.concept_name.str());
      } else {
        std::optional<DataValue> worst;
        for (const auto& v : graph.data_values(b.role, x))
          if (v.is_numeric() && v.as_number() > static_cast<double>(b.max) && (!worst || v > *worst)) worst = v;
        if (worst)
          add("cardinality", x,
              x.str() + " " + b.role.str() + " = " + worst->literal() + " exceeds " + std::to_string(b.max) + " for " +
                  b.concept_name.str());
      }
    }
  }

  for (const auto& [name, def] : tbox.roles) {
    if (!def.functional || def.kind != RoleKind::Data) continue;
    for (const auto& x : graph.members(def.domain))
      if (graph.data_values(name, x).empty())
        add("missing_attribute", x, x.str() + " has no " + name.str() + " (required for " + def.domain.str() + ")");
  }

  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace cairo
