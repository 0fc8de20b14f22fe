#include "brute_force.hpp"

#include <algorithm>
#include <functional>
#include <map>

namespace cairo::oracle {

namespace {

using Value = std::variant<QName, DataValue>;

std::set<QName> upward(const QName& start, const std::set<std::pair<QName, QName>>& edges) {
  std::set<QName> seen{start};
  std::vector<QName> todo{start};
  while (!todo.empty()) {
    QName x = todo.back();
    todo.pop_back();
    for (const auto& [child, parent] : edges)
      if (child == x && seen.insert(parent).second) todo.push_back(parent);
  }
  return seen;
}

std::string show(const Value& v) {
  if (auto* q = std::get_if<QName>(&v)) return q->str();
  return std::get<DataValue>(v).literal();
}

std::vector<Var> term_vars(const std::vector<Term>& ts) {
  std::vector<Var> out;
  for (const auto& t : ts)
    if (auto* v = std::get_if<Var>(&t)) out.push_back(*v);
  return out;
}

std::vector<Term> terms_of(const Atom& a) {
  return std::visit(
      [](const auto& x) -> std::vector<Term> {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, ClassAtom>) return {x.arg};
        else if constexpr (std::is_same_v<T, ObjectPropAtom>) return {x.subject, x.object};
        else if constexpr (std::is_same_v<T, DataPropAtom>) return {x.subject, x.value};
        else if constexpr (std::is_same_v<T, BuiltinAtom>) return {x.lhs, x.rhs};
        else if constexpr (std::is_same_v<T, DifferentFromAtom>) return {x.lhs, x.rhs};
        else return {x.vars.begin(), x.vars.end()};
      },
      a);
}

bool compare(BuiltinOp op, const DataValue& a, const DataValue& b) {
  bool numeric = a.is_numeric() && b.is_numeric();
  if (!numeric && a.kind() != b.kind()) return false;
  int c;
  if (numeric) {
    double x = a.as_number(), y = b.as_number();
    c = x < y ? -1 : x > y ? 1 : 0;
  } else {
    auto o = a <=> b;
    c = o < 0 ? -1 : o > 0 ? 1 : 0;
  }
  switch (op) {
    case BuiltinOp::Equal: return c == 0;
    case BuiltinOp::NotEqual: return c != 0;
    case BuiltinOp::LessThan: return c < 0;
    case BuiltinOp::LessThanOrEqual: return c <= 0;
    case BuiltinOp::GreaterThan: return c > 0;
    case BuiltinOp::GreaterThanOrEqual: return c >= 0;
  }
  return false;
}

}  // namespace

World close(const std::vector<Assertion>& assertions, const TBox& tbox, const std::set<QName>& extra) {
  World w;
  w.individuals = extra;
  std::map<QName, std::set<QName>> concept_up, role_up;
  auto cup = [&](const QName& c) -> const std::set<QName>& {
    auto it = concept_up.find(c);
    if (it == concept_up.end()) it = concept_up.emplace(c, upward(c, tbox.subclass_axioms)).first;
    return it->second;
  };
  auto rup = [&](const QName& r) -> const std::set<QName>& {
    auto it = role_up.find(r);
    if (it == role_up.end()) it = role_up.emplace(r, upward(r, tbox.role_inclusions)).first;
    return it->second;
  };
  for (const auto& a : assertions) {
    if (auto* c = std::get_if<ClassAssertion>(&a)) {
      w.individuals.insert(c->individual);
      for (const auto& sup : cup(c->concept_name)) w.member.insert({c->individual, sup});
      continue;
    }
    const auto& r = std::get<RoleAssertion>(a);
    w.individuals.insert(r.subject);
    if (r.is_object()) {
      w.individuals.insert(r.object_name());
      for (const auto& sup : rup(r.role)) w.object.insert({sup, r.subject, r.object_name()});
    } else {
      w.values.insert(r.literal());
      for (const auto& sup : rup(r.role)) w.data.emplace_back(sup, r.subject, r.literal());
    }
  }
  return w;
}

World scene_world(const Scene& scene, const TBox& tbox) {
  std::set<QName> extra{scene.id};
  for (const auto& ind : scene.individuals) extra.insert(ind.id);
  return close(scene.assertions, tbox, extra);
}

World scenario_world(const Scenario& scenario, const TBox& tbox) {
  std::vector<Assertion> lifted;
  std::set<QName> extra;
  std::map<std::string, QName> track_name;
  std::map<std::string, std::set<std::size_t>> seen_in;
  for (std::size_t i = 0; i < scenario.scenes.size(); ++i) {
    const Scene& s = scenario.scenes[i];
    extra.insert(s.id);
    std::map<QName, QName> rename;
    for (const auto& ind : s.individuals) {
      if (!ind.track_id) continue;
      QName name{"", ind.label + "_" + *ind.track_id};
      track_name.emplace(*ind.track_id, name);
      rename[ind.id] = track_name.at(*ind.track_id);
      seen_in[*ind.track_id].insert(i);
    }
    auto m = [&](const QName& q) { return rename.count(q) ? rename.at(q) : q; };
    for (const auto& a : s.assertions) {
      if (auto* c = std::get_if<ClassAssertion>(&a)) {
        lifted.push_back(ClassAssertion{m(c->individual), c->concept_name});
      } else {
        RoleAssertion r = std::get<RoleAssertion>(a);
        r.subject = m(r.subject);
        if (r.is_object()) r.object = m(r.object_name());
        lifted.push_back(r);
      }
    }
  }
  const QName absent{"traf", "absent_in"};
  if (tbox.roles.count(absent))
    for (const auto& [track, name] : track_name) {
      extra.insert(name);
      for (std::size_t i = 0; i < scenario.scenes.size(); ++i)
        if (!seen_in[track].count(i)) lifted.push_back(RoleAssertion{name, absent, scenario.scenes[i].id});
    }
  return close(lifted, tbox, extra);
}

std::set<std::string> matches(const Rule& rule, const World& world) {
  std::vector<Var> vars;
  std::vector<QName> const_individuals;
  std::set<DataValue> values = world.values;
  for (const auto& a : rule.body)
    for (const auto& t : terms_of(a)) {
      if (auto* v = std::get_if<Var>(&t)) {
        if (std::find(vars.begin(), vars.end(), *v) == vars.end()) vars.push_back(*v);
      } else if (auto* q = std::get_if<QName>(&t)) {
        const_individuals.push_back(*q);
      } else {
        values.insert(std::get<DataValue>(t));
      }
    }
  std::vector<Value> domain;
  std::set<QName> inds = world.individuals;
  inds.insert(const_individuals.begin(), const_individuals.end());
  for (const auto& q : inds) domain.push_back(q);
  for (const auto& d : values) domain.push_back(d);

  std::vector<Var> projection = rule.select_vars();
  if (projection.empty())
    for (const auto& a : rule.head)
      for (const auto& v : term_vars(terms_of(a)))
        if (std::find(projection.begin(), projection.end(), v) == projection.end()) projection.push_back(v);

  std::map<Var, std::size_t> index;
  for (std::size_t i = 0; i < vars.size(); ++i) index[vars[i]] = i;
  std::vector<std::optional<Value>> assign(vars.size());
  auto value_of = [&](const Term& t) -> std::optional<Value> {
    if (auto* v = std::get_if<Var>(&t)) return assign[index.at(*v)];
    if (auto* q = std::get_if<QName>(&t)) return Value{*q};
    return Value{std::get<DataValue>(t)};
  };

  auto holds = [&](const Atom& a) -> bool {
    if (auto* c = std::get_if<ClassAtom>(&a)) {
      auto x = *value_of(c->arg);
      auto* q = std::get_if<QName>(&x);
      return q && world.member.count({*q, c->concept_name});
    }
    if (auto* o = std::get_if<ObjectPropAtom>(&a)) {
      auto s = *value_of(o->subject), t = *value_of(o->object);
      auto *qs = std::get_if<QName>(&s), *qt = std::get_if<QName>(&t);
      return qs && qt && world.object.count({o->role, *qs, *qt});
    }
    if (auto* d = std::get_if<DataPropAtom>(&a)) {
      auto s = *value_of(d->subject), t = *value_of(d->value);
      auto* qs = std::get_if<QName>(&s);
      auto* dv = std::get_if<DataValue>(&t);
      if (!qs || !dv) return false;
      for (const auto& [role, subj, val] : world.data)
        if (role == d->role && subj == *qs && val == *dv) return true;
      return false;
    }
    if (auto* b = std::get_if<BuiltinAtom>(&a)) {
      auto l = *value_of(b->lhs), r = *value_of(b->rhs);
      auto *dl = std::get_if<DataValue>(&l), *dr = std::get_if<DataValue>(&r);
      return dl && dr && compare(b->op, *dl, *dr);
    }
    if (auto* df = std::get_if<DifferentFromAtom>(&a)) {
      auto l = *value_of(df->lhs), r = *value_of(df->rhs);
      auto *ql = std::get_if<QName>(&l), *qr = std::get_if<QName>(&r);
      return ql && qr && *ql != *qr;
    }
    return true;
  };

  // Atoms become checkable once the last of their variables is assigned.
  std::vector<std::vector<const Atom*>> due(vars.size() + 1);
  for (const auto& a : rule.body) {
    std::size_t last = 0;
    bool any = false;
    for (const auto& v : term_vars(terms_of(a))) {
      last = std::max(last, index.at(v) + 1);
      any = true;
    }
    due[any ? last : 0].push_back(&a);
  }
  for (const Atom* a : due[0])
    if (!holds(*a)) return {};

  std::set<std::string> out;
  std::function<void(std::size_t)> go = [&](std::size_t depth) {
    if (depth == vars.size()) {
      std::string key;
      for (const auto& v : projection) {
        if (!key.empty()) key += ";";
        key += "?" + v.name + "=" + show(*assign[index.at(v)]);
      }
      out.insert(key);
      return;
    }
    for (const auto& val : domain) {
      assign[depth] = val;
      bool ok = true;
      for (const Atom* a : due[depth + 1]) ok = ok && holds(*a);
      if (ok) go(depth + 1);
    }
    assign[depth].reset();
  };
  go(0);
  return out;
}

std::set<QName> members_without(const World& world, const QName& concept_name, const QName& role, const QName& filler) {
  std::set<QName> out;
  for (const auto& [ind, c] : world.member) {
    if (c != concept_name) continue;
    bool has = false;
    for (const auto& [r, s, o] : world.object)
      if (r == role && s == ind && world.member.count({o, filler})) has = true;
    if (!has) out.insert(ind);
  }
  return out;
}

}  // namespace cairo::oracle
