#include <map>

#include "cairo/rules/rules.hpp"

namespace cairo {

namespace {

enum class VarUse { Individual, Data };

// Broad comparison class of a datatype: numbers compare with numbers only.
std::string type_class(Datatype d) {
  switch (d) {
    case Datatype::Integer:
    case Datatype::Decimal: return "numeric";
    default: return std::string(datatype_name(d));
  }
}

std::string type_class(const DataValue& v) {
  if (v.is_numeric()) return "numeric";
  return std::string(kind_name(v.kind()));
}

}  // namespace

std::vector<RuleDiagnostic> lint_rule(const Rule& rule, const TBox& tbox) {
  std::vector<RuleDiagnostic> out;
  auto emit = [&](const char* sev, const char* code, std::string msg) {
    out.push_back({sev, code, std::move(msg), 0, 0, rule.id});
  };

  std::map<Var, std::vector<QName>> constraints;
  for (const auto& a : rule.body)
    if (auto* c = std::get_if<ClassAtom>(&a))
      if (auto* v = std::get_if<Var>(&c->arg)) constraints[*v].push_back(c->concept_name);

  auto compatible = [&](const QName& c, const QName& d) { return tbox.subsumes(d, c) || tbox.subsumes(c, d); };
  auto check_typed = [&](const Term& t, const QName& expected, const QName& role, const char* code,
                         const char* which) {
    auto* v = std::get_if<Var>(&t);
    if (!v) return;
    auto it = constraints.find(*v);
    if (it == constraints.end()) return;
    for (const auto& c : it->second)
      if (compatible(c, expected)) return;
    std::string cs;
    for (const auto& c : it->second) cs += (cs.empty() ? "" : ", ") + c.str();
    emit("warning", code,
         "?" + v->name + " is typed " + cs + " but the " + which + " of " + role.str() + " is " + expected.str());
  };

  std::map<Var, std::set<VarUse>> uses;
  std::map<Var, std::string> data_class;  // variable -> comparison class from data role ranges
  for (const auto& a : rule.body) {
    if (auto* o = std::get_if<ObjectPropAtom>(&a)) {
      const RoleDef* r = tbox.role(o->role);
      check_typed(o->subject, r->domain, o->role, "DomainMismatch", "domain");
      if (r->range_concept) check_typed(o->object, *r->range_concept, o->role, "RangeMismatch", "range");
      for (const auto* t : {&o->subject, &o->object})
        if (auto* v = std::get_if<Var>(t)) uses[*v].insert(VarUse::Individual);
    } else if (auto* d = std::get_if<DataPropAtom>(&a)) {
      const RoleDef* r = tbox.role(d->role);
      check_typed(d->subject, r->domain, d->role, "DomainMismatch", "domain");
      if (auto* v = std::get_if<Var>(&d->subject)) uses[*v].insert(VarUse::Individual);
      if (auto* v = std::get_if<Var>(&d->value)) {
        uses[*v].insert(VarUse::Data);
        data_class.emplace(*v, type_class(r->datatype));
      } else if (auto* c = std::get_if<DataValue>(&d->value)) {
        if (!r->accepts(*c))
          emit("warning", "DatatypeMismatch",
               d->role.str() + " ranges over " + std::string(datatype_name(r->datatype)) + " but is compared with " +
                   c->literal());
      }
    } else if (auto* c = std::get_if<ClassAtom>(&a)) {
      if (auto* v = std::get_if<Var>(&c->arg)) uses[*v].insert(VarUse::Individual);
    } else if (auto* df = std::get_if<DifferentFromAtom>(&a)) {
      for (const auto* t : {&df->lhs, &df->rhs})
        if (auto* v = std::get_if<Var>(t)) uses[*v].insert(VarUse::Individual);
    } else if (auto* b = std::get_if<BuiltinAtom>(&a)) {
      for (const auto* t : {&b->lhs, &b->rhs})
        if (auto* v = std::get_if<Var>(t)) uses[*v].insert(VarUse::Data);
    }
  }

  for (const auto& a : rule.body) {
    auto* b = std::get_if<BuiltinAtom>(&a);
    if (!b) continue;
    auto cls = [&](const Term& t) -> std::string {
      if (auto* v = std::get_if<Var>(&t)) {
        auto it = data_class.find(*v);
        return it == data_class.end() ? "" : it->second;
      }
      if (auto* c = std::get_if<DataValue>(&t)) return type_class(*c);
      return "individual";
    };
    std::string l = cls(b->lhs), r = cls(b->rhs);
    if (!l.empty() && !r.empty() && l != r)
      emit("warning", "IncompatibleComparison",
           "swrb:" + std::string(builtin_name(b->op)) + " compares " + l + " with " + r);
    bool ordering = b->op != BuiltinOp::Equal && b->op != BuiltinOp::NotEqual;
    if (ordering && (l == "boolean" || l == "enum" || r == "boolean" || r == "enum"))
      emit("warning", "IncompatibleComparison",
           "swrb:" + std::string(builtin_name(b->op)) + " orders values of an unordered type");
  }

  for (const auto& [v, u] : uses)
    if (u.size() > 1) emit("warning", "MixedVariableKind", "?" + v.name + " is used both as an individual and as a value");

  // Unused: appears once, in an atom that does not join (object-property atoms
  // relate two individuals and so always constrain), and not in the head.
  std::map<Var, int> count;
  std::map<Var, bool> in_join;
  for (const auto& a : rule.body) {
    for (const auto& v : atom_vars(a)) {
      ++count[v];
      if (std::holds_alternative<ObjectPropAtom>(a)) in_join[v] = true;
    }
  }
  auto head = rule.head_vars();
  for (const auto& [v, n] : count)
    if (n == 1 && !in_join[v] && !head.count(v))
      emit("info", "UnusedVariable", "?" + v.name + " is used only once and never joined or selected");
  return out;
}

std::vector<RuleDiagnostic> lint_pack(const RulePack& pack, const TBox& tbox) {
  std::vector<RuleDiagnostic> out;
  for (const auto& r : pack.rules) {
    auto d = lint_rule(r, tbox);
    out.insert(out.end(), d.begin(), d.end());
  }
  return out;
}

}  // namespace cairo
