#include <algorithm>

#include "cairo/reasoner/reasoner.hpp"

namespace cairo {

std::string Binding::key() const {
  std::string out;
  for (const auto& [var, value] : values) {
    if (!out.empty()) out += ";";
    out += "?" + var.name + "=" + format_value(value);
  }
  return out;
}

namespace {

bool is_filter(const Atom& a) {
  return std::holds_alternative<BuiltinAtom>(a) || std::holds_alternative<DifferentFromAtom>(a);
}

struct Emit {
  std::vector<std::optional<Value>> values;
  std::vector<ProvenanceEntry> provenance;
};

class Evaluator {
 public:
  Evaluator(const Rule& rule, const MaterializedGraph& g) : rule_(rule), g_(g) {
    for (const auto& a : rule.body) {
      for (const auto& v : atom_vars(a))
        if (!index_.count(v)) {
          index_[v] = vars_.size();
          vars_.push_back(v);
        }
      atom_text_.push_back(format_atom(a));
    }
    for (const auto& q : g.individuals()) domain_.push_back(q);
    std::set<DataValue> data = g.data_values();
    for (const auto& a : rule.body) {
      auto add_const = [&](const Term& t) {
        if (auto* q = std::get_if<QName>(&t)) {
          if (!g.individuals().count(*q)) extra_individuals_.insert(*q);
        } else if (auto* d = std::get_if<DataValue>(&t)) {
          data.insert(*d);
        }
      };
      std::visit(
          [&](const auto& x) {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, ClassAtom>) add_const(x.arg);
            else if constexpr (std::is_same_v<T, ObjectPropAtom>) add_const(x.subject), add_const(x.object);
            else if constexpr (std::is_same_v<T, DataPropAtom>) add_const(x.subject), add_const(x.value);
            else if constexpr (std::is_same_v<T, BuiltinAtom>) add_const(x.lhs), add_const(x.rhs);
            else if constexpr (std::is_same_v<T, DifferentFromAtom>) add_const(x.lhs), add_const(x.rhs);
          },
          a);
    }
    for (const auto& q : extra_individuals_) domain_.push_back(q);
    for (const auto& d : data) domain_.push_back(d);
  }

  std::vector<Emit> run() {
    std::vector<std::optional<Value>> state(vars_.size());
    std::vector<std::size_t> remaining(rule_.body.size());
    for (std::size_t i = 0; i < remaining.size(); ++i) remaining[i] = i;
    std::vector<ProvenanceEntry> prov;
    solve(state, remaining, prov);
    return std::move(out_);
  }

  const std::vector<Var>& vars() const { return vars_; }
  std::size_t index_of(const Var& v) const { return index_.at(v); }

 private:
  using State = std::vector<std::optional<Value>>;

  std::optional<Value> resolve(const Term& t, const State& s) const {
    if (auto* v = std::get_if<Var>(&t)) return s[index_.at(*v)];
    if (auto* q = std::get_if<QName>(&t)) return Value{*q};
    return Value{std::get<DataValue>(t)};
  }

  bool ready(const Atom& a, const State& s) const {
    for (const auto& v : atom_vars(a))
      if (!s[index_.at(v)]) return false;
    return true;
  }

  // Binds `t` to `val` if it is an unbound variable; otherwise checks equality.
  bool unify(const Term& t, const Value& val, State& s, std::vector<std::size_t>& trail) const {
    if (auto* v = std::get_if<Var>(&t)) {
      auto& slot = s[index_.at(*v)];
      if (!slot) {
        slot = val;
        trail.push_back(index_.at(*v));
        return true;
      }
      return *slot == val;
    }
    if (auto* q = std::get_if<QName>(&t)) return std::holds_alternative<QName>(val) && std::get<QName>(val) == *q;
    return std::holds_alternative<DataValue>(val) && std::get<DataValue>(val) == std::get<DataValue>(t);
  }

  void undo(State& s, std::vector<std::size_t>& trail) const {
    for (auto i : trail) s[i].reset();
    trail.clear();
  }

  void solve(State& s, std::vector<std::size_t>& remaining, std::vector<ProvenanceEntry>& prov) {
    if (remaining.empty()) {
      out_.push_back({s, prov});
      return;
    }
    // First graph atom or ready filter, in body order.
    std::size_t pick = remaining.size();
    for (std::size_t k = 0; k < remaining.size(); ++k) {
      const Atom& a = rule_.body[remaining[k]];
      if (!is_filter(a) || ready(a, s)) {
        pick = k;
        break;
      }
    }
    if (pick == remaining.size()) {
      // Only filters with unbound variables left: enumerate the active domain.
      const Atom& a = rule_.body[remaining.front()];
      for (const auto& v : atom_vars(a)) {
        std::size_t idx = index_.at(v);
        if (s[idx]) continue;
        for (const auto& val : domain_) {
          s[idx] = val;
          solve(s, remaining, prov);
        }
        s[idx].reset();
        return;
      }
      return;
    }
    std::size_t atom_index = remaining[pick];
    remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(pick));
    match(atom_index, s, remaining, prov);
    remaining.insert(remaining.begin() + static_cast<std::ptrdiff_t>(pick), atom_index);
  }

  void with(std::size_t atom_index, const std::string& key, State& s, std::vector<std::size_t>& remaining,
            std::vector<ProvenanceEntry>& prov) {
    if (!key.empty()) prov.push_back({atom_text_[atom_index], key});
    solve(s, remaining, prov);
    if (!key.empty()) prov.pop_back();
  }

  void match(std::size_t ai, State& s, std::vector<std::size_t>& remaining, std::vector<ProvenanceEntry>& prov) {
    const Atom& atom = rule_.body[ai];
    std::vector<std::size_t> trail;
    if (auto* c = std::get_if<ClassAtom>(&atom)) {
      auto bound = resolve(c->arg, s);
      if (bound) {
        auto* q = std::get_if<QName>(&*bound);
        if (q && g_.is_member(*q, c->concept_name))
          with(ai, make_assertion_key(ClassAssertion{*q, c->concept_name}), s, remaining, prov);
        return;
      }
      for (const auto& x : g_.members(c->concept_name)) {
        unify(c->arg, x, s, trail);
        with(ai, make_assertion_key(ClassAssertion{x, c->concept_name}), s, remaining, prov);
        undo(s, trail);
      }
      return;
    }
    if (auto* o = std::get_if<ObjectPropAtom>(&atom)) {
      auto sb = resolve(o->subject, s);
      auto ob = resolve(o->object, s);
      auto key = [&](const QName& x, const QName& y) { return make_assertion_key(RoleAssertion{x, o->role, y}); };
      if (sb && !std::holds_alternative<QName>(*sb)) return;
      if (ob && !std::holds_alternative<QName>(*ob)) return;
      if (sb) {
        const QName& x = std::get<QName>(*sb);
        for (const auto& y : g_.successors(o->role, x)) {
          if (!unify(o->object, y, s, trail)) continue;
          with(ai, key(x, y), s, remaining, prov);
          undo(s, trail);
        }
      } else if (ob) {
        const QName& y = std::get<QName>(*ob);
        for (const auto& x : g_.predecessors(o->role, y)) {
          if (!unify(o->subject, x, s, trail)) continue;
          with(ai, key(x, y), s, remaining, prov);
          undo(s, trail);
        }
      } else {
        for (const auto& [x, y] : g_.object_pairs(o->role)) {
          if (unify(o->subject, x, s, trail) && unify(o->object, y, s, trail)) with(ai, key(x, y), s, remaining, prov);
          undo(s, trail);
        }
      }
      return;
    }
    if (auto* d = std::get_if<DataPropAtom>(&atom)) {
      auto sb = resolve(d->subject, s);
      auto key = [&](const QName& x, const DataValue& v) { return make_assertion_key(RoleAssertion{x, d->role, v}); };
      if (sb) {
        auto* x = std::get_if<QName>(&*sb);
        if (!x) return;
        for (const auto& v : g_.data_values(d->role, *x)) {
          if (!unify(d->value, v, s, trail)) continue;
          with(ai, key(*x, v), s, remaining, prov);
          undo(s, trail);
        }
      } else {
        for (const auto& [x, v] : g_.data_pairs(d->role)) {
          if (unify(d->subject, x, s, trail) && unify(d->value, v, s, trail)) with(ai, key(x, v), s, remaining, prov);
          undo(s, trail);
        }
      }
      return;
    }
    if (auto* b = std::get_if<BuiltinAtom>(&atom)) {
      auto l = resolve(b->lhs, s), r = resolve(b->rhs, s);
      auto* lv = std::get_if<DataValue>(&*l);
      auto* rv = std::get_if<DataValue>(&*r);
      if (lv && rv && apply_builtin(b->op, *lv, *rv)) solve(s, remaining, prov);
      return;
    }
    if (auto* df = std::get_if<DifferentFromAtom>(&atom)) {
      auto l = resolve(df->lhs, s), r = resolve(df->rhs, s);
      auto* lq = std::get_if<QName>(&*l);
      auto* rq = std::get_if<QName>(&*r);
      if (lq && rq && *lq != *rq) solve(s, remaining, prov);
      return;
    }
  }

  const Rule& rule_;
  const MaterializedGraph& g_;
  std::vector<Var> vars_;
  std::map<Var, std::size_t> index_;
  std::vector<std::string> atom_text_;
  std::set<QName> extra_individuals_;
  std::vector<Value> domain_;
  std::vector<Emit> out_;
};

std::vector<Var> projection_vars(const Rule& rule) {
  auto sel = rule.select_vars();
  if (!sel.empty()) return sel;
  std::vector<Var> out;
  for (const auto& a : rule.head)
    for (const auto& v : atom_vars(a))
      if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
  return out;
}

}  // namespace

RuleResult evaluate_rule(const Rule& rule, const MaterializedGraph& graph) {
  Evaluator ev(rule, graph);
  auto emits = ev.run();
  auto proj = projection_vars(rule);

  std::map<std::string, Binding> merged;
  std::map<std::string, std::set<ProvenanceEntry>> prov;
  std::vector<Assertion> inferred;
  for (const auto& e : emits) {
    Binding b;
    for (const auto& v : proj) b.values.push_back({v, *e.values[ev.index_of(v)]});
    std::string k = b.key();
    merged.emplace(k, std::move(b));
    prov[k].insert(e.provenance.begin(), e.provenance.end());
    for (const auto& h : rule.head) {
      auto* c = std::get_if<ClassAtom>(&h);
      if (!c) continue;
      std::optional<Value> val;
      if (auto* v = std::get_if<Var>(&c->arg)) val = e.values[ev.index_of(*v)];
      else if (auto* q = std::get_if<QName>(&c->arg)) val = Value{*q};
      if (val && std::holds_alternative<QName>(*val))
        inferred.push_back(ClassAssertion{std::get<QName>(*val), c->concept_name});
    }
  }
  RuleResult out;
  for (auto& [k, b] : merged) {
    b.provenance.assign(prov[k].begin(), prov[k].end());
    out.bindings.push_back(std::move(b));
  }
  canonicalize(inferred);
  out.inferred = std::move(inferred);
  return out;
}

std::vector<std::map<Var, Value>> evaluate_body(const Rule& rule, const MaterializedGraph& graph) {
  Evaluator ev(rule, graph);
  std::set<std::vector<std::pair<Var, std::string>>> seen;
  std::vector<std::map<Var, Value>> out;
  for (const auto& e : ev.run()) {
    std::map<Var, Value> m;
    std::vector<std::pair<Var, std::string>> sig;
    for (std::size_t i = 0; i < ev.vars().size(); ++i) {
      m.emplace(ev.vars()[i], *e.values[i]);
      sig.push_back({ev.vars()[i], format_value(*e.values[i])});
    }
    std::sort(sig.begin(), sig.end());
    if (seen.insert(sig).second) out.push_back(std::move(m));
  }
  return out;
}

RuleResult evaluate_rule_on_scenario(const Rule& rule, const Scenario& scenario, const TBox& tbox) {
  return evaluate_rule(rule, realize(scenario, tbox));
}

}  // namespace cairo
