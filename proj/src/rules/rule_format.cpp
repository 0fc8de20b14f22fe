#include <algorithm>
#include <sstream>

#include "cairo/rules/rules.hpp"

namespace cairo {

std::string_view builtin_name(BuiltinOp op) {
  switch (op) {
    case BuiltinOp::Equal: return "equal";
    case BuiltinOp::NotEqual: return "notEqual";
    case BuiltinOp::LessThan: return "lessThan";
    case BuiltinOp::LessThanOrEqual: return "lessThanOrEqual";
    case BuiltinOp::GreaterThan: return "greaterThan";
    case BuiltinOp::GreaterThanOrEqual: return "greaterThanOrEqual";
  }
  return "?";
}

std::optional<BuiltinOp> builtin_from_name(std::string_view name) {
  for (auto op : {BuiltinOp::Equal, BuiltinOp::NotEqual, BuiltinOp::LessThan, BuiltinOp::LessThanOrEqual,
                  BuiltinOp::GreaterThan, BuiltinOp::GreaterThanOrEqual})
    if (builtin_name(op) == name) return op;
  return std::nullopt;
}

namespace {

// Numbers compare with numbers; every other kind only with itself.
bool comparable(const DataValue& a, const DataValue& b) {
  if (a.is_numeric() && b.is_numeric()) return true;
  return a.kind() == b.kind();
}

}  // namespace

bool apply_builtin(BuiltinOp op, const DataValue& a, const DataValue& b) {
  if (!comparable(a, b)) return false;
  auto c = a <=> b;
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

std::string format_term(const Term& t) {
  if (auto* v = std::get_if<Var>(&t)) return "?" + v->name;
  if (auto* q = std::get_if<QName>(&t)) return q->str();
  return std::get<DataValue>(t).literal();
}

std::string format_atom(const Atom& a) {
  struct V {
    std::string operator()(const ClassAtom& x) const { return x.concept_name.str() + "(" + format_term(x.arg) + ")"; }
    std::string operator()(const ObjectPropAtom& x) const {
      return x.role.str() + "(" + format_term(x.subject) + ", " + format_term(x.object) + ")";
    }
    std::string operator()(const DataPropAtom& x) const {
      return x.role.str() + "(" + format_term(x.subject) + ", " + format_term(x.value) + ")";
    }
    std::string operator()(const BuiltinAtom& x) const {
      return "swrb:" + std::string(builtin_name(x.op)) + "(" + format_term(x.lhs) + ", " + format_term(x.rhs) + ")";
    }
    std::string operator()(const DifferentFromAtom& x) const {
      return "differentFrom(" + format_term(x.lhs) + ", " + format_term(x.rhs) + ")";
    }
    std::string operator()(const SelectAtom& x) const {
      std::string out = "sqwrl:select(";
      for (std::size_t i = 0; i < x.vars.size(); ++i) out += (i ? ", ?" : "?") + x.vars[i].name;
      return out + ")";
    }
  };
  return std::visit(V{}, a);
}

std::vector<Var> atom_vars(const Atom& a) {
  std::vector<Var> out;
  auto add = [&](const Term& t) {
    if (auto* v = std::get_if<Var>(&t))
      if (std::find(out.begin(), out.end(), *v) == out.end()) out.push_back(*v);
  };
  std::visit(
      [&](const auto& x) {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, ClassAtom>) add(x.arg);
        else if constexpr (std::is_same_v<T, ObjectPropAtom>) add(x.subject), add(x.object);
        else if constexpr (std::is_same_v<T, DataPropAtom>) add(x.subject), add(x.value);
        else if constexpr (std::is_same_v<T, BuiltinAtom>) add(x.lhs), add(x.rhs);
        else if constexpr (std::is_same_v<T, DifferentFromAtom>) add(x.lhs), add(x.rhs);
        else
          for (const auto& v : x.vars) add(v);
      },
      a);
  return out;
}

std::set<Var> Rule::body_vars() const {
  std::set<Var> out;
  for (const auto& a : body)
    for (const auto& v : atom_vars(a)) out.insert(v);
  return out;
}

std::set<Var> Rule::head_vars() const {
  std::set<Var> out;
  for (const auto& a : head)
    for (const auto& v : atom_vars(a)) out.insert(v);
  return out;
}

std::vector<Var> Rule::select_vars() const {
  std::vector<Var> out;
  for (const auto& a : head)
    if (auto* s = std::get_if<SelectAtom>(&a))
      for (const auto& v : s->vars)
        if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
  return out;
}

const Rule* RulePack::find(std::string_view rule_id) const {
  for (const auto& r : rules)
    if (r.id == rule_id) return &r;
  return nullptr;
}

std::string format_rule(const Rule& rule) {
  std::string out;
  for (std::size_t i = 0; i < rule.body.size(); ++i) out += (i ? " ^ " : "") + format_atom(rule.body[i]);
  out += " -> ";
  for (std::size_t i = 0; i < rule.head.size(); ++i) out += (i ? " ^ " : "") + format_atom(rule.head[i]);
  return out;
}

std::string format_rule_pack(const RulePack& pack) {
  std::ostringstream out;
  out << "pack " << pack.id << "\n";
  out << "version " << pack.version << "\n";
  for (const auto& r : pack.rules) {
    out << "\nrule " << r.id << " \"";
    for (char c : r.label) {
      if (c == '"' || c == '\\') out << '\\';
      out << c;
    }
    out << "\"\n" << format_rule(r) << "\n";
  }
  return out.str();
}

}  // namespace cairo
