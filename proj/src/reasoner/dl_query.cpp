#include <cctype>

#include "cairo/reasoner/reasoner.hpp"

namespace cairo {

ClassExpression ClassExpression::named(QName c) {
  ClassExpression e;
  e.op = Op::Named;
  e.name = std::move(c);
  return e;
}

ClassExpression ClassExpression::conj(std::vector<ClassExpression> xs) {
  ClassExpression e;
  e.op = Op::And;
  e.args = std::move(xs);
  return e;
}

ClassExpression ClassExpression::disj(std::vector<ClassExpression> xs) {
  ClassExpression e;
  e.op = Op::Or;
  e.args = std::move(xs);
  return e;
}

ClassExpression ClassExpression::negate(ClassExpression x) {
  ClassExpression e;
  e.op = Op::Not;
  e.args.push_back(std::move(x));
  return e;
}

ClassExpression ClassExpression::exists(QName role, ClassExpression x) {
  ClassExpression e;
  e.op = Op::Exists;
  e.name = std::move(role);
  e.args.push_back(std::move(x));
  return e;
}

ClassExpression ClassExpression::forall(QName role, ClassExpression x) {
  ClassExpression e;
  e.op = Op::ForAll;
  e.name = std::move(role);
  e.args.push_back(std::move(x));
  return e;
}

std::set<QName> dl_query(const ClassExpression& expr, const MaterializedGraph& graph, WorldMode mode) {
  using Op = ClassExpression::Op;
  const auto& universe = graph.individuals();
  switch (expr.op) {
    case Op::Named: return graph.members(expr.name);
    case Op::And: {
      std::set<QName> acc = universe;
      for (const auto& a : expr.args) {
        auto s = dl_query(a, graph, mode);
        std::set<QName> next;
        for (const auto& x : acc)
          if (s.count(x)) next.insert(x);
        acc = std::move(next);
      }
      return acc;
    }
    case Op::Or: {
      std::set<QName> acc;
      for (const auto& a : expr.args) {
        auto s = dl_query(a, graph, mode);
        acc.insert(s.begin(), s.end());
      }
      return acc;
    }
    case Op::Not: {
      const auto& inner = expr.args.at(0);
      std::set<QName> out;
      if (mode == WorldMode::Closed) {
        auto s = dl_query(inner, graph, mode);
        for (const auto& x : universe)
          if (!s.count(x)) out.insert(x);
        return out;
      }
      // Open world: only provable exclusion via a disjoint asserted concept.
      if (inner.op != Op::Named) return out;
      const TBox& tbox = graph.tbox();
      for (const auto& x : universe)
        for (const auto& c : graph.memberships(x))
          if (tbox.are_disjoint(c, inner.name)) {
            out.insert(x);
            break;
          }
      return out;
    }
    case Op::Exists: {
      auto s = dl_query(expr.args.at(0), graph, mode);
      std::set<QName> out;
      for (const auto& [x, y] : graph.object_pairs(expr.name))
        if (s.count(y)) out.insert(x);
      return out;
    }
    case Op::ForAll: {
      if (mode == WorldMode::Open) return {};
      auto s = dl_query(expr.args.at(0), graph, mode);
      std::set<QName> out;
      for (const auto& x : universe) {
        bool all = true;
        for (const auto& y : graph.successors(expr.name, x))
          if (!s.count(y)) all = false;
        if (all) out.insert(x);
      }
      return out;
    }
  }
  return {};
}

namespace {

class ExprParser {
 public:
  ExprParser(std::string_view s, const TBox& tbox) : s_(s), tbox_(tbox) {}

  ClassExpression run() {
    auto e = disjunction();
    skip();
    if (pos_ != s_.size()) fail("unexpected trailing text");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) {
    throw Error("SyntaxError", "class expression, column " + std::to_string(pos_ + 1) + ": " + msg);
  }

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  std::string word() {
    skip();
    std::size_t b = pos_;
    while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_' || s_[pos_] == ':'))
      ++pos_;
    return std::string(s_.substr(b, pos_ - b));
  }

  bool keyword(std::string_view kw) {
    std::size_t save = pos_;
    if (word() == kw) return true;
    pos_ = save;
    return false;
  }

  ClassExpression disjunction() {
    std::vector<ClassExpression> xs{conjunction()};
    while (keyword("or")) xs.push_back(conjunction());
    return xs.size() == 1 ? xs[0] : ClassExpression::disj(std::move(xs));
  }

  ClassExpression conjunction() {
    std::vector<ClassExpression> xs{unary()};
    while (keyword("and")) xs.push_back(unary());
    return xs.size() == 1 ? xs[0] : ClassExpression::conj(std::move(xs));
  }

  ClassExpression unary() {
    if (keyword("not")) return ClassExpression::negate(unary());
    skip();
    if (pos_ < s_.size() && s_[pos_] == '(') {
      ++pos_;
      auto e = disjunction();
      skip();
      if (pos_ >= s_.size() || s_[pos_] != ')') fail("expected ')'");
      ++pos_;
      return e;
    }
    std::string w = word();
    if (w.empty()) fail("expected a concept, role or '('");
    QName q;
    try {
      q = tbox_.namespaces.resolve(w);
    } catch (const Error& e) {
      fail(e.what());
    }
    if (const RoleDef* r = tbox_.role(q)) {
      if (r->kind != RoleKind::Object) fail("'" + q.str() + "' is not an object role");
      if (keyword("some")) return ClassExpression::exists(q, unary());
      if (keyword("only")) return ClassExpression::forall(q, unary());
      fail("expected 'some' or 'only' after role " + q.str());
    }
    if (!tbox_.is_concept(q)) throw Error("UnknownName", "unknown concept '" + q.str() + "'");
    return ClassExpression::named(q);
  }

  std::string_view s_;
  std::size_t pos_ = 0;
  const TBox& tbox_;
};

}  // namespace

ClassExpression parse_class_expression(std::string_view text, const TBox& tbox) {
  return ExprParser(text, tbox).run();
}

}  // namespace cairo
