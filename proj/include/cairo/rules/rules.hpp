#pragma once

// CP rule language: SWRL-style Horn clauses with sqwrl:select heads.
// Grammar in docs/GRAMMAR.md.

#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "cairo/core/model.hpp"
#include "cairo/taxonomy/tbox.hpp"

namespace cairo {

struct Var {
  std::string name;  // without the leading '?'
  auto operator<=>(const Var&) const = default;
  bool operator==(const Var&) const = default;
};

// Variable, individual constant, or data constant.
using Term = std::variant<Var, QName, DataValue>;

std::string format_term(const Term& t);

struct ClassAtom {
  QName concept_name;
  Term arg;
  bool operator==(const ClassAtom&) const = default;
};
struct ObjectPropAtom {
  QName role;
  Term subject;
  Term object;
  bool operator==(const ObjectPropAtom&) const = default;
};
struct DataPropAtom {
  QName role;
  Term subject;
  Term value;
  bool operator==(const DataPropAtom&) const = default;
};

enum class BuiltinOp { Equal, NotEqual, LessThan, LessThanOrEqual, GreaterThan, GreaterThanOrEqual };
std::string_view builtin_name(BuiltinOp op);  // "equal", "lessThan", ...
std::optional<BuiltinOp> builtin_from_name(std::string_view name);
bool apply_builtin(BuiltinOp op, const DataValue& a, const DataValue& b);

struct BuiltinAtom {
  BuiltinOp op;
  Term lhs;
  Term rhs;
  bool operator==(const BuiltinAtom&) const = default;
};
struct DifferentFromAtom {
  Term lhs;
  Term rhs;
  bool operator==(const DifferentFromAtom&) const = default;
};
struct SelectAtom {
  std::vector<Var> vars;
  bool operator==(const SelectAtom&) const = default;
};

using Atom = std::variant<ClassAtom, ObjectPropAtom, DataPropAtom, BuiltinAtom, DifferentFromAtom, SelectAtom>;

std::string format_atom(const Atom& a);
// Variables in atom order of first appearance.
std::vector<Var> atom_vars(const Atom& a);

struct Rule {
  std::string id;
  std::string label;
  std::vector<Atom> body;
  std::vector<Atom> head;

  std::set<Var> body_vars() const;
  std::set<Var> head_vars() const;
  std::vector<Var> select_vars() const;  // union of select atoms, in order
  bool operator==(const Rule&) const = default;
};

struct RulePack {
  std::string id;
  std::string version;
  std::vector<Rule> rules;

  const Rule* find(std::string_view rule_id) const;
  bool operator==(const RulePack&) const = default;
};

struct RuleDiagnostic {
  std::string severity;  // "error" | "warning" | "info"
  std::string code;      // SyntaxError, UnknownName, UnsafeRule, DomainMismatch, ...
  std::string message;
  int line = 0;          // 1-based; 0 when not tied to a position
  int col = 0;           // 1-based, in code points
  std::string rule_id;
};

// Parse/validation failure; diagnostics()[0] is the primary error.
class RuleError : public Error {
 public:
  explicit RuleError(std::vector<RuleDiagnostic> diags);
  const std::vector<RuleDiagnostic>& diagnostics() const { return diags_; }

 private:
  std::vector<RuleDiagnostic> diags_;
};

// `line_offset` shifts reported line numbers (rule text embedded in a file).
Rule parse_rule(std::string_view text, const TBox& tbox, std::string id = {}, std::string label = {},
                int line_offset = 0);
std::string format_rule(const Rule& rule);

RulePack parse_rule_pack(std::string_view text, const TBox& tbox);
std::string format_rule_pack(const RulePack& pack);

std::vector<RuleDiagnostic> lint_rule(const Rule& rule, const TBox& tbox);
std::vector<RuleDiagnostic> lint_pack(const RulePack& pack, const TBox& tbox);

const RulePack& shipped_pack();
std::string_view shipped_pack_text();

}  // namespace cairo
