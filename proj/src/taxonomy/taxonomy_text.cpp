// Line-oriented taxonomy format:
//
//   prefix p = <iri>
//   concept q:Name
//   q:A is_a q:B                      (concepts, or two roles of the same kind)
//   disjoint q:A q:B ...
//   role q:r object domain=q:C range=q:D [functional]
//   role q:r data domain=q:C range=boolean|integer|decimal|string|enum(q:A q:B) [functional]
//   maxcard q:C q:r N
//   derived q:r absence_of_part q:Part
//   derived q:r threshold_flag q:src (>=|>|<=|<) (N|$param)
//   derived q:r threshold_flag q:src outside LO HI
//   derived q:r independence q:Container
//   derived q:r presence_in_scene
//   derived q:r absence_in_scene q:C
//
// '#' at the start of a word opens a comment. Declarations are collected before axioms, so order
// within the document does not matter.

#include <charconv>
#include <sstream>

#include "cairo/taxonomy/tbox.hpp"

namespace cairo {

namespace {

struct Line {
  int number;
  std::vector<std::string> words;
};

std::vector<std::string> split_words(std::string_view s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r')) ++i;
    if (i >= s.size()) break;
    std::size_t j = i;
    if (s.compare(i, 5, "enum(") == 0 || s.compare(i, 11, "range=enum(") == 0) {
      // keep the whole parenthesised list as one word
      j = s.find(')', i);
      j = j == std::string_view::npos ? s.size() : j + 1;
    } else {
      while (j < s.size() && s[j] != ' ' && s[j] != '\t' && s[j] != '\r') ++j;
    }
    out.emplace_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

bool parse_double(std::string_view s, double& out) {
  if (s.empty()) return false;
  auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

bool parse_int(std::string_view s, std::int64_t& out) {
  if (s.empty()) return false;
  auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

std::string_view comparator_text(Comparator c) {
  switch (c) {
    case Comparator::Ge: return ">=";
    case Comparator::Gt: return ">";
    case Comparator::Le: return "<=";
    case Comparator::Lt: return "<";
    case Comparator::Outside: return "outside";
  }
  return "?";
}

class TaxonomyParser {
 public:
  explicit TaxonomyParser(NamespaceTable base) { tbox_.namespaces = std::move(base); }
  explicit TaxonomyParser(TBox base) : tbox_(std::move(base)) { tbox_.derived_specs.clear(); }

  DerivedPropertySpec derived_only(const QName& target, std::string_view definition) {
    Line l{1, split_words(definition)};
    l.words.insert(l.words.begin(), {"derived", target.str()});
    derived(l);
    return tbox_.derived_specs.back();
  }

  TBox run(std::string_view text) {
    std::vector<Line> lines;
    int number = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
      std::size_t nl = text.find('\n', pos);
      std::string_view raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
      ++number;
      // '#' opens a comment only at a word start, so IRIs like <...#> survive
      for (std::size_t h = raw.find('#'); h != std::string_view::npos; h = raw.find('#', h + 1))
        if (h == 0 || raw[h - 1] == ' ' || raw[h - 1] == '\t') {
          raw = raw.substr(0, h);
          break;
        }
      auto words = split_words(raw);
      if (!words.empty()) lines.push_back({number, std::move(words)});
      if (nl == std::string_view::npos) break;
      pos = nl + 1;
    }

    for (const auto& l : lines)
      if (l.words[0] == "prefix") guarded(l, [&] { prefix(l); });
    for (const auto& l : lines) {
      if (l.words[0] == "concept") guarded(l, [&] { concept_name(l); });
      else if (l.words[0] == "role") guarded(l, [&] { role(l); });
    }
    for (const auto& l : lines) {
      const auto& w0 = l.words[0];
      if (w0 == "prefix" || w0 == "concept" || w0 == "role") continue;
      if (w0 == "disjoint") guarded(l, [&] { disjoint(l); });
      else if (w0 == "maxcard") guarded(l, [&] { maxcard(l); });
      else if (w0 == "derived") guarded(l, [&] { derived(l); });
      else if (l.words.size() == 3 && l.words[1] == "is_a") guarded(l, [&] { is_a(l); });
      else diags_.push_back({l.number, 1, "ParseError", "unknown directive '" + w0 + "'"});
    }
    if (!diags_.empty()) {
      std::string code = diags_.front().code;
      throw TaxonomyError(code, diags_);
    }
    tbox_.finalize();
    return std::move(tbox_);
  }

 private:
  template <typename F>
  void guarded(const Line& l, F&& f) {
    try {
      f();
    } catch (const Error& e) {
      std::string code = e.code();
      if (code == "UnknownPrefix" || code == "InvalidName") code = "ParseError";
      diags_.push_back({l.number, 1, code, e.what()});
    }
  }

  static void fail(const std::string& msg) { throw Error("ParseError", msg); }

  QName name(const std::string& w) const { return tbox_.namespaces.resolve(w); }

  QName known_concept(const std::string& w) const {
    QName q = name(w);
    if (!tbox_.concepts.count(q)) throw Error("UnknownName", "unknown concept '" + q.str() + "'");
    return q;
  }

  QName known_role(const std::string& w) const {
    QName q = name(w);
    if (!tbox_.roles.count(q)) throw Error("UnknownName", "unknown role '" + q.str() + "'");
    return q;
  }

  void prefix(const Line& l) {
    const auto& w = l.words;
    if (w.size() != 4 || w[2] != "=" || w[3].size() < 2 || w[3].front() != '<' || w[3].back() != '>')
      fail("expected: prefix p = <iri>");
    tbox_.namespaces.register_namespace(w[1], w[3].substr(1, w[3].size() - 2));
  }

  void concept_name(const Line& l) {
    if (l.words.size() != 2) fail("expected: concept q:Name");
    QName q = name(l.words[1]);
    if (tbox_.roles.count(q)) throw Error("KindConflict", "'" + q.str() + "' is already a role");
    tbox_.concepts.insert(q);
  }

  void role(const Line& l) {
    const auto& w = l.words;
    if (w.size() < 5) fail("expected: role q:r object|data domain=q:C range=...");
    RoleDef def;
    def.name = name(w[1]);
    if (tbox_.concepts.count(def.name)) throw Error("KindConflict", "'" + def.name.str() + "' is already a concept");
    if (tbox_.roles.count(def.name)) fail("role '" + def.name.str() + "' declared twice");
    if (w[2] == "object") def.kind = RoleKind::Object;
    else if (w[2] == "data") def.kind = RoleKind::Data;
    else fail("role kind must be 'object' or 'data'");
    bool have_domain = false, have_range = false;
    for (std::size_t i = 3; i < w.size(); ++i) {
      const auto& tok = w[i];
      if (tok.rfind("domain=", 0) == 0) {
        def.domain = name(tok.substr(7));
        have_domain = true;
      } else if (tok.rfind("range=", 0) == 0) {
        std::string r = tok.substr(6);
        have_range = true;
        if (def.kind == RoleKind::Object) {
          def.range_concept = name(r);
        } else if (r == "boolean") def.datatype = Datatype::Boolean;
        else if (r == "integer") def.datatype = Datatype::Integer;
        else if (r == "decimal") def.datatype = Datatype::Decimal;
        else if (r == "string") def.datatype = Datatype::String;
        else if (r.rfind("enum(", 0) == 0 && r.back() == ')') {
          def.datatype = Datatype::Enum;
          std::string inner = r.substr(5, r.size() - 6);
          for (char& c : inner)
            if (c == ',') c = ' ';
          for (const auto& t : split_words(inner)) def.enum_values.push_back(name(t));
        } else {
          fail("unknown data range '" + r + "'");
        }
      } else if (tok == "functional") {
        def.functional = true;
      } else {
        fail("unexpected token '" + tok + "' in role declaration");
      }
    }
    if (!have_domain || !have_range) fail("role declaration needs domain= and range=");
    tbox_.roles.emplace(def.name, std::move(def));
  }

  void is_a(const Line& l) {
    QName child = name(l.words[0]);
    QName parent = name(l.words[2]);
    if (tbox_.roles.count(child) || tbox_.roles.count(parent)) {
      known_role(l.words[0]);
      known_role(l.words[2]);
      tbox_.role_inclusions.emplace(child, parent);
      return;
    }
    known_concept(l.words[0]);
    known_concept(l.words[2]);
    tbox_.subclass_axioms.emplace(child, parent);
  }

  void disjoint(const Line& l) {
    if (l.words.size() < 3) fail("disjoint needs at least two concepts");
    std::vector<QName> group;
    for (std::size_t i = 1; i < l.words.size(); ++i) group.push_back(known_concept(l.words[i]));
    tbox_.disjoint_groups.push_back(std::move(group));
  }

  void maxcard(const Line& l) {
    if (l.words.size() != 4) fail("expected: maxcard q:C q:r N");
    CardinalityBound b;
    b.concept_name = known_concept(l.words[1]);
    b.role = known_role(l.words[2]);
    if (!parse_int(l.words[3], b.max) || b.max < 0) fail("maxcard bound must be a non-negative integer");
    tbox_.cardinality_bounds.push_back(b);
  }

  void derived(const Line& l) {
    const auto& w = l.words;
    if (w.size() < 3) fail("expected: derived q:r <definition>");
    DerivedPropertySpec d;
    d.target = known_role(w[1]);
    const auto& kind = w[2];
    auto arity = [&](std::size_t n) {
      if (w.size() != n) fail("wrong number of arguments for derived " + kind);
    };
    if (kind == "absence_of_part") {
      arity(4);
      d.kind = DerivedPropertySpec::Kind::AbsenceOfPart;
      d.concept_name = known_concept(w[3]);
    } else if (kind == "independence") {
      arity(4);
      d.kind = DerivedPropertySpec::Kind::Independence;
      d.concept_name = known_concept(w[3]);
    } else if (kind == "presence_in_scene") {
      arity(3);
      d.kind = DerivedPropertySpec::Kind::PresenceInScene;
    } else if (kind == "absence_in_scene") {
      arity(4);
      d.kind = DerivedPropertySpec::Kind::AbsenceInScene;
      d.concept_name = known_concept(w[3]);
    } else if (kind == "threshold_flag") {
      d.kind = DerivedPropertySpec::Kind::ThresholdFlag;
      if (w.size() < 6) fail("expected: threshold_flag q:src <cmp> <threshold>");
      d.source = known_role(w[3]);
      const auto& cmp = w[4];
      if (cmp == "outside") {
        arity(7);
        d.comparator = Comparator::Outside;
        if (!parse_double(w[5], d.threshold) || !parse_double(w[6], d.threshold_hi) || d.threshold > d.threshold_hi)
          fail("outside needs two ordered finite bounds");
      } else {
        arity(6);
        if (cmp == ">=") d.comparator = Comparator::Ge;
        else if (cmp == ">") d.comparator = Comparator::Gt;
        else if (cmp == "<=") d.comparator = Comparator::Le;
        else if (cmp == "<") d.comparator = Comparator::Lt;
        else fail("unknown comparator '" + cmp + "'");
        if (!w[5].empty() && w[5][0] == '$') {
          d.threshold_param = w[5].substr(1);
          if (!is_valid_local_name(d.threshold_param)) fail("invalid threshold parameter '" + w[5] + "'");
        } else if (!parse_double(w[5], d.threshold)) {
          fail("threshold must be a finite number");
        }
      }
    } else {
      fail("unknown derived definition '" + kind + "'");
    }
    tbox_.derived_specs.push_back(std::move(d));
  }

  TBox tbox_;
  std::vector<Diagnostic> diags_;
};

}  // namespace

TBox parse_taxonomy(std::string_view text, NamespaceTable base) {
  return TaxonomyParser(std::move(base)).run(text);
}

DerivedPropertySpec parse_derived_definition(const QName& target, std::string_view definition, const TBox& tbox) {
  return TaxonomyParser(tbox).derived_only(target, definition);
}

std::string format_derived_definition(const DerivedPropertySpec& d) {
  std::ostringstream out;
  switch (d.kind) {
    case DerivedPropertySpec::Kind::AbsenceOfPart: out << "absence_of_part " << d.concept_name->str(); break;
    case DerivedPropertySpec::Kind::Independence: out << "independence " << d.concept_name->str(); break;
    case DerivedPropertySpec::Kind::PresenceInScene: out << "presence_in_scene"; break;
    case DerivedPropertySpec::Kind::AbsenceInScene: out << "absence_in_scene " << d.concept_name->str(); break;
    case DerivedPropertySpec::Kind::ThresholdFlag:
      out << "threshold_flag " << d.source->str() << " " << comparator_text(d.comparator) << " ";
      if (d.comparator == Comparator::Outside)
        out << format_decimal(d.threshold, false) << " " << format_decimal(d.threshold_hi, false);
      else if (!d.threshold_param.empty())
        out << "$" << d.threshold_param;
      else
        out << format_decimal(d.threshold, false);
      break;
  }
  return out.str();
}

std::string format_taxonomy(const TBox& t) {
  std::ostringstream out;
  for (const auto& [p, iri] : t.namespaces.entries())
    if (!p.empty()) out << "prefix " << p << " = <" << iri << ">\n";
  out << "\n";
  for (const auto& c : t.concepts) out << "concept " << c.str() << "\n";
  for (const auto& [c, p] : t.subclass_axioms) out << c.str() << " is_a " << p.str() << "\n";
  for (const auto& g : t.disjoint_groups) {
    out << "disjoint";
    for (const auto& q : g) out << " " << q.str();
    out << "\n";
  }
  out << "\n";
  for (const auto& [n, def] : t.roles) {
    out << "role " << n.str() << (def.kind == RoleKind::Object ? " object" : " data") << " domain=" << def.domain.str()
        << " range=";
    if (def.kind == RoleKind::Object) {
      out << (def.range_concept ? def.range_concept->str() : "");
    } else if (def.datatype == Datatype::Enum) {
      out << "enum(";
      for (std::size_t i = 0; i < def.enum_values.size(); ++i) out << (i ? " " : "") << def.enum_values[i].str();
      out << ")";
    } else {
      out << datatype_name(def.datatype);
    }
    if (def.functional) out << " functional";
    out << "\n";
  }
  for (const auto& [c, p] : t.role_inclusions) out << c.str() << " is_a " << p.str() << "\n";
  for (const auto& b : t.cardinality_bounds)
    out << "maxcard " << b.concept_name.str() << " " << b.role.str() << " " << b.max << "\n";
  for (const auto& d : t.derived_specs) {
    out << "derived " << d.target.str() << " " << format_derived_definition(d);
    out << "\n";
  }
  return out.str();
}

}  // namespace cairo
