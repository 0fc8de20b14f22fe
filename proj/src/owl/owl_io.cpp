#include "cairo/owl/owl_io.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>

#include "cairo/ingestion/documents.hpp"
#include "cairo/owl/xml.hpp"

namespace cairo {

UnsupportedConstruct::UnsupportedConstruct(std::vector<std::string> constructs)
    : Error("UnsupportedConstruct",
            [&] {
              std::string msg = "constructs outside the OWL subset:";
              for (const auto& c : constructs) msg += " " + c;
              return msg;
            }()),
      constructs_(std::move(constructs)) {}

namespace {

const char* const kOwlNs = "http://www.w3.org/2002/07/owl#";
const char* const kXsd = "http://www.w3.org/2001/XMLSchema#";
const char* const kAnnNs = "http://example.org/cairo/annotation#";
const char* const kVarNs = "urn:swrl:var#";
const std::string kTokenType = std::string(kAnnNs) + "token";

// Prefixes every document declares; they never enter the T-Box namespace table.
const std::vector<std::pair<std::string, std::string>> kFixedPrefixes = {
    {"ann", kAnnNs},
    {"owl", kOwlNs},
    {"rdf", "http://www.w3.org/1999/02/22-rdf-syntax-ns#"},
    {"rdfs", "http://www.w3.org/2000/01/rdf-schema#"},
    {"xsd", kXsd},
};

using Attrs = std::vector<std::pair<std::string, std::string>>;

XmlElement el(std::string name, Attrs attrs = {}, std::vector<XmlElement> children = {}, std::string text = {}) {
  XmlElement e;
  e.name = std::move(name);
  e.attributes = std::move(attrs);
  e.children = std::move(children);
  e.text = std::move(text);
  return e;
}

std::string abbr(const QName& q) { return q.prefix + ":" + q.local; }

XmlElement entity(const char* kind, const QName& q) { return el(kind, {{"abbreviatedIRI", abbr(q)}}); }

std::string datatype_iri(DataValue::Kind k) {
  switch (k) {
    case DataValue::Kind::Boolean: return std::string(kXsd) + "boolean";
    case DataValue::Kind::Integer: return std::string(kXsd) + "integer";
    case DataValue::Kind::Decimal: return std::string(kXsd) + "decimal";
    case DataValue::Kind::String: return std::string(kXsd) + "string";
    case DataValue::Kind::Enum: return kTokenType;
  }
  return {};
}

std::string literal_text(const DataValue& v) {
  switch (v.kind()) {
    case DataValue::Kind::Boolean: return v.as_bool() ? "true" : "false";
    case DataValue::Kind::Integer: return std::to_string(v.as_integer());
    case DataValue::Kind::Decimal: return format_decimal(v.as_number(), true);
    case DataValue::Kind::String: return v.as_string();
    case DataValue::Kind::Enum: return abbr(v.as_enum());
  }
  return {};
}

XmlElement literal(const DataValue& v) {
  return el("Literal", {{"datatypeIRI", datatype_iri(v.kind())}}, {}, literal_text(v));
}

XmlElement plain_literal(const std::string& s) { return el("Literal", {}, {}, s); }

XmlElement annotation(const std::string& prop, XmlElement value) {
  return el("Annotation", {}, {el("AnnotationProperty", {{"abbreviatedIRI", prop}}), std::move(value)});
}

XmlElement term_element(const Term& t) {
  if (auto* v = std::get_if<Var>(&t)) return el("Variable", {{"IRI", kVarNs + v->name}});
  if (auto* q = std::get_if<QName>(&t)) return entity("NamedIndividual", *q);
  return literal(std::get<DataValue>(t));
}

XmlElement atom_element(const Atom& a, const NamespaceTable& ns) {
  if (auto* x = std::get_if<ClassAtom>(&a))
    return el("ClassAtom", {}, {entity("Class", x->concept_name), term_element(x->arg)});
  if (auto* x = std::get_if<ObjectPropAtom>(&a))
    return el("ObjectPropertyAtom", {},
              {entity("ObjectProperty", x->role), term_element(x->subject), term_element(x->object)});
  if (auto* x = std::get_if<DataPropAtom>(&a))
    return el("DataPropertyAtom", {},
              {entity("DataProperty", x->role), term_element(x->subject), term_element(x->value)});
  if (auto* x = std::get_if<BuiltinAtom>(&a))
    return el("BuiltInAtom", {{"IRI", ns.expand(QName{"swrb", std::string(builtin_name(x->op))})}},
              {term_element(x->lhs), term_element(x->rhs)});
  if (auto* x = std::get_if<DifferentFromAtom>(&a))
    return el("DifferentIndividualsAtom", {}, {term_element(x->lhs), term_element(x->rhs)});
  const auto& s = std::get<SelectAtom>(a);
  XmlElement e = el("BuiltInAtom", {{"IRI", ns.expand(QName{"sqwrl", "select"})}});
  for (const auto& v : s.vars) e.children.push_back(term_element(v));
  return e;
}

void write(XmlWriter& w, const XmlElement& e) {
  if (!e.children.empty()) {
    w.open(e.name, e.attributes);
    for (const auto& c : e.children) write(w, c);
    w.close();
  } else if (!e.text.empty() || e.name == "Literal") {
    w.text(e.name, e.attributes, e.text);
  } else {
    w.empty(e.name, e.attributes);
  }
}

struct Keyed {
  std::string key;
  XmlElement element;
};

void sort_section(std::vector<Keyed>& xs) {
  std::stable_sort(xs.begin(), xs.end(), [](const Keyed& a, const Keyed& b) { return a.key < b.key; });
}

void term_individuals(const Term& t, std::set<QName>& out) {
  if (auto* q = std::get_if<QName>(&t)) out.insert(*q);
}

}  // namespace

std::string export_owl(const TBox& tbox, const Scene& scene, const RulePack& pack) {
  const auto& ns = tbox.namespaces;
  std::vector<std::string> unsupported;

  XmlWriter w;
  std::string onto_iri = "urn:cairo:scene:" + (scene.id.local.empty() ? std::string("empty") : abbr(scene.id));
  w.open("Ontology", {{"xmlns", kOwlNs}, {"ontologyIRI", onto_iri}});

  std::vector<std::pair<std::string, std::string>> prefixes(kFixedPrefixes.begin(), kFixedPrefixes.end());
  for (const auto& [p, iri] : ns.entries()) {
    for (const auto& [fp, _] : kFixedPrefixes)
      if (fp == p) unsupported.push_back("Prefix(" + p + ") reserved");
    prefixes.emplace_back(p, iri);
  }
  std::sort(prefixes.begin(), prefixes.end());
  for (const auto& [p, iri] : prefixes) w.empty("Prefix", {{"name", p}, {"IRI", iri}});

  // Ontology annotations.
  std::vector<XmlElement> onto_ann;
  for (const auto& [alias, canonical] : ns.aliases())
    onto_ann.push_back(annotation("ann:prefix_alias", plain_literal(alias + " " + canonical)));
  if (!scene.id.local.empty()) {
    onto_ann.push_back(annotation("ann:scene_id", plain_literal(abbr(scene.id))));
    onto_ann.push_back(annotation("ann:time_position", literal(DataValue::decimal(scene.time_position))));
    onto_ann.push_back(annotation("ann:frame_ref", plain_literal(scene.frame_ref)));
  }
  if (!pack.id.empty() || !pack.rules.empty()) {
    onto_ann.push_back(annotation("ann:pack_id", plain_literal(pack.id)));
    onto_ann.push_back(annotation("ann:pack_version", plain_literal(pack.version)));
  }
  for (const auto& a : onto_ann) write(w, a);

  // Declarations.
  std::set<QName> individuals;
  if (!scene.id.local.empty()) individuals.insert(scene.id);
  for (const auto& ind : scene.individuals) individuals.insert(ind.id);
  for (const auto& a : scene.assertions) {
    if (auto* c = std::get_if<ClassAssertion>(&a)) {
      individuals.insert(c->individual);
    } else {
      const auto& r = std::get<RoleAssertion>(a);
      individuals.insert(r.subject);
      if (r.is_object()) individuals.insert(r.object_name());
    }
  }
  for (const auto& rule : pack.rules) {
    for (const auto* atoms : {&rule.body, &rule.head}) {
      for (const auto& atom : *atoms) {
        std::visit(
            [&](const auto& x) {
              using T = std::decay_t<decltype(x)>;
              if constexpr (std::is_same_v<T, ClassAtom>) term_individuals(x.arg, individuals);
              else if constexpr (std::is_same_v<T, ObjectPropAtom>) {
                term_individuals(x.subject, individuals);
                term_individuals(x.object, individuals);
              } else if constexpr (std::is_same_v<T, DataPropAtom>) {
                term_individuals(x.subject, individuals);
              } else if constexpr (std::is_same_v<T, DifferentFromAtom>) {
                term_individuals(x.lhs, individuals);
                term_individuals(x.rhs, individuals);
              }
            },
            atom);
      }
    }
  }
  for (const auto& c : tbox.concepts) w.open("Declaration"), write(w, entity("Class", c)), w.close();
  for (const auto& [q, def] : tbox.roles)
    if (def.kind == RoleKind::Object) w.open("Declaration"), write(w, entity("ObjectProperty", q)), w.close();
  for (const auto& [q, def] : tbox.roles)
    if (def.kind == RoleKind::Data) w.open("Declaration"), write(w, entity("DataProperty", q)), w.close();
  for (const char* p : {"derived", "frame_ref", "pack_id", "pack_version", "prefix_alias", "rule_id", "scene_id",
                        "segment", "time_position"}) {
    w.open("Declaration");
    w.empty("AnnotationProperty", {{"abbreviatedIRI", std::string("ann:") + p}});
    w.close();
  }
  for (const auto& q : individuals) w.open("Declaration"), write(w, entity("NamedIndividual", q)), w.close();

  // SubClassOf, including cardinality bounds.
  std::vector<Keyed> sub;
  for (const auto& [c, p] : tbox.subclass_axioms)
    sub.push_back({"0|" + abbr(c) + "|" + abbr(p), el("SubClassOf", {}, {entity("Class", c), entity("Class", p)})});
  for (const auto& b : tbox.cardinality_bounds) {
    const RoleDef* def = tbox.role(b.role);
    std::string key = "1|" + abbr(b.concept_name) + "|" + abbr(b.role);
    if (def && def->kind == RoleKind::Object) {
      sub.push_back({key, el("SubClassOf", {},
                             {entity("Class", b.concept_name),
                              el("ObjectMaxCardinality", {{"cardinality", std::to_string(b.max)}},
                                 {entity("ObjectProperty", b.role)})})});
    } else if (def && def->datatype == Datatype::Integer) {
      XmlElement facet = el("FacetRestriction", {{"facet", std::string(kXsd) + "maxInclusive"}},
                            {literal(DataValue::integer(b.max))});
      XmlElement restriction =
          el("DatatypeRestriction", {}, {el("Datatype", {{"abbreviatedIRI", "xsd:integer"}}), facet});
      sub.push_back({key, el("SubClassOf", {},
                             {entity("Class", b.concept_name),
                              el("DataAllValuesFrom", {}, {entity("DataProperty", b.role), restriction})})});
    } else {
      unsupported.push_back("maxcard on non-integer data role " + b.role.str());
    }
  }
  sort_section(sub);
  for (const auto& k : sub) write(w, k.element);

  std::vector<Keyed> disjoint;
  for (const auto& g : tbox.disjoint_groups) {
    XmlElement e = el("DisjointClasses");
    std::string key;
    for (const auto& q : g) {
      e.children.push_back(entity("Class", q));
      key += abbr(q) + "|";
    }
    disjoint.push_back({key, e});
  }
  sort_section(disjoint);
  for (const auto& k : disjoint) write(w, k.element);

  std::vector<Keyed> subprop;
  for (const auto& [c, p] : tbox.role_inclusions) {
    const RoleDef* def = tbox.role(c);
    bool object = def && def->kind == RoleKind::Object;
    const char* kind = object ? "ObjectProperty" : "DataProperty";
    subprop.push_back({abbr(c) + "|" + abbr(p),
                       el(object ? "SubObjectPropertyOf" : "SubDataPropertyOf", {}, {entity(kind, c), entity(kind, p)})});
  }
  sort_section(subprop);
  for (const auto& k : subprop) write(w, k.element);

  // Characteristics, domains and ranges, grouped by role.
  for (const auto& [q, def] : tbox.roles) {
    bool object = def.kind == RoleKind::Object;
    const char* kind = object ? "ObjectProperty" : "DataProperty";
    if (def.functional) write(w, el(object ? "FunctionalObjectProperty" : "FunctionalDataProperty", {}, {entity(kind, q)}));
    write(w, el(object ? "ObjectPropertyDomain" : "DataPropertyDomain", {}, {entity(kind, q), entity("Class", def.domain)}));
    if (object) {
      if (def.range_concept)
        write(w, el("ObjectPropertyRange", {}, {entity(kind, q), entity("Class", *def.range_concept)}));
    } else if (def.datatype == Datatype::Enum) {
      XmlElement one_of = el("DataOneOf");
      for (const auto& t : def.enum_values) one_of.children.push_back(literal(DataValue::enum_token(t)));
      write(w, el("DataPropertyRange", {}, {entity(kind, q), one_of}));
    } else {
      write(w, el("DataPropertyRange", {},
                  {entity(kind, q), el("Datatype", {{"abbreviatedIRI", "xsd:" + std::string(datatype_name(def.datatype))}})}));
    }
  }

  // Annotation assertions: derived specs on roles, segments on individuals.
  std::vector<Keyed> ann;
  for (const auto& d : tbox.derived_specs)
    ann.push_back({"derived|" + abbr(d.target),
                   el("AnnotationAssertion", {},
                      {el("AnnotationProperty", {{"abbreviatedIRI", "ann:derived"}}),
                       el("AbbreviatedIRI", {}, {}, abbr(d.target)), plain_literal(format_derived_definition(d))})});
  for (std::size_t i = 0; i < scene.individuals.size(); ++i) {
    const auto& ind = scene.individuals[i];
    json j = individual_to_json(ind);
    j["index"] = i;
    ann.push_back({"segment|" + abbr(ind.id),
                   el("AnnotationAssertion", {},
                      {el("AnnotationProperty", {{"abbreviatedIRI", "ann:segment"}}),
                       el("AbbreviatedIRI", {}, {}, abbr(ind.id)), plain_literal(j.dump())})});
  }
  sort_section(ann);
  for (const auto& k : ann) write(w, k.element);

  std::vector<Keyed> cls, obj, dat;
  for (const auto& a : scene.assertions) {
    std::string key = make_assertion_key(a);
    if (auto* c = std::get_if<ClassAssertion>(&a)) {
      cls.push_back({key, el("ClassAssertion", {}, {entity("Class", c->concept_name), entity("NamedIndividual", c->individual)})});
      continue;
    }
    const auto& r = std::get<RoleAssertion>(a);
    if (r.is_object())
      obj.push_back({key, el("ObjectPropertyAssertion", {},
                             {entity("ObjectProperty", r.role), entity("NamedIndividual", r.subject),
                              entity("NamedIndividual", r.object_name())})});
    else
      dat.push_back({key, el("DataPropertyAssertion", {},
                             {entity("DataProperty", r.role), entity("NamedIndividual", r.subject), literal(r.literal())})});
  }
  for (auto* section : {&cls, &obj, &dat}) {
    sort_section(*section);
    for (const auto& k : *section) write(w, k.element);
  }

  for (const auto& rule : pack.rules) {
    XmlElement body = el("Body"), head = el("Head");
    for (const auto& a : rule.body) body.children.push_back(atom_element(a, ns));
    for (const auto& a : rule.head) head.children.push_back(atom_element(a, ns));
    write(w, el("DLSafeRule", {},
                {annotation("ann:rule_id", plain_literal(rule.id)), annotation("rdfs:label", plain_literal(rule.label)),
                 body, head}));
  }

  if (!unsupported.empty()) throw UnsupportedConstruct(unsupported);
  return w.finish();
}

namespace {

[[noreturn]] void invalid(const XmlElement& e, const std::string& msg) {
  throw Error("InvalidOntology", "byte " + std::to_string(e.offset) + ": " + msg);
}

class Importer {
 public:
  explicit Importer(OwlImportOptions opts) : opts_(opts) {}

  OwlImport run(std::string_view bytes) {
    XmlElement root = parse_xml(bytes);
    if (root.name != "Ontology") invalid(root, "root element must be Ontology, found " + root.name);

    // Pass 1: prefixes, ontology annotations, declarations.
    for (const auto& e : root.children) {
      if (e.name == "Prefix") prefix(e);
      else if (e.name == "Annotation") ontology_annotation(e);
      else if (e.name == "Declaration") declaration(e);
    }
    for (const auto& [alias, canonical] : aliases_) {
      if (!ns().aliases().count(alias)) ns().register_alias(alias, canonical);
    }

    // Pass 2: axioms.
    std::vector<const XmlElement*> rules;
    for (const auto& e : root.children) {
      const auto& n = e.name;
      if (n == "Prefix" || n == "Annotation" || n == "Declaration") continue;
      if (n == "SubClassOf") sub_class(e);
      else if (n == "DisjointClasses") disjoint(e);
      else if (n == "SubObjectPropertyOf" || n == "SubDataPropertyOf") sub_property(e);
      else if (n == "FunctionalObjectProperty" || n == "FunctionalDataProperty") functional(e);
      else if (n == "ObjectPropertyDomain" || n == "DataPropertyDomain") domain(e);
      else if (n == "ObjectPropertyRange" || n == "DataPropertyRange") range(e);
      else if (n == "AnnotationAssertion") annotation_assertion(e);
      else if (n == "ClassAssertion") class_assertion(e);
      else if (n == "ObjectPropertyAssertion") object_assertion(e);
      else if (n == "DataPropertyAssertion") data_assertion(e);
      else if (n == "DLSafeRule") rules.push_back(&e);
      else unsupported(e.name);
    }

    for (const auto& [q, def] : out_.tbox.roles)
      if (def.domain.local.empty()) throw Error("InvalidOntology", "role " + q.str() + " has no domain");
    for (const auto& [target, definition] : derived_)
      out_.tbox.derived_specs.push_back(parse_derived_definition(target, definition, out_.tbox));
    out_.tbox.finalize();

    for (const auto* r : rules) rule(*r);

    if (!unsupported_.empty()) {
      std::vector<std::string> list(unsupported_.begin(), unsupported_.end());
      if (!opts_.lenient) throw UnsupportedConstruct(list);
      for (const auto& c : list) out_.warnings.push_back("UnsupportedConstruct: skipped " + c);
    }

    build_scene();
    return std::move(out_);
  }

 private:
  NamespaceTable& ns() { return out_.tbox.namespaces; }

  void unsupported(const std::string& what) { unsupported_.insert(what); }

  void prefix(const XmlElement& e) {
    const std::string* name = e.attribute("name");
    const std::string* iri = e.attribute("IRI");
    if (!name || !iri) invalid(e, "Prefix needs name and IRI");
    for (const auto& [p, fixed] : kFixedPrefixes) {
      if (p == *name) {
        if (*iri != fixed) invalid(e, "reserved prefix '" + p + "' bound to " + *iri);
        fixed_[p] = fixed;
        return;
      }
    }
    ns().register_namespace(*name, *iri);
  }

  QName name_of(const XmlElement& e) {
    if (const std::string* a = e.attribute("abbreviatedIRI")) return parse_abbr(*a, e);
    if (const std::string* iri = e.attribute("IRI")) {
      if (auto q = ns().abbreviate(*iri)) return *q;
      invalid(e, "IRI '" + *iri + "' is outside every declared prefix");
    }
    invalid(e, e.name + " needs IRI or abbreviatedIRI");
  }

  QName parse_abbr(const std::string& s, const XmlElement& e) {
    auto colon = s.find(':');
    if (colon == std::string::npos) invalid(e, "abbreviated IRI '" + s + "' has no prefix");
    std::string p = s.substr(0, colon);
    if (!ns().has(p) && !ns().aliases().count(p)) invalid(e, "undeclared prefix '" + p + "'");
    return ns().make(p, s.substr(colon + 1));
  }

  std::string annotation_property(const XmlElement& e) {
    const std::string* a = e.attribute("abbreviatedIRI");
    if (a) return *a;
    const std::string* iri = e.attribute("IRI");
    if (!iri) invalid(e, "AnnotationProperty needs an IRI");
    for (const auto& [p, fixed] : kFixedPrefixes)
      if (iri->rfind(fixed, 0) == 0) return p + ":" + iri->substr(fixed.size());
    return *iri;
  }

  void ontology_annotation(const XmlElement& e) {
    if (e.children.size() != 2 || e.children[0].name != "AnnotationProperty" || e.children[1].name != "Literal") {
      unsupported("Annotation");
      return;
    }
    std::string prop = annotation_property(e.children[0]);
    const std::string& v = e.children[1].text;
    if (prop == "ann:prefix_alias") {
      auto sp = v.find(' ');
      if (sp == std::string::npos) invalid(e, "malformed prefix alias");
      aliases_.emplace_back(v.substr(0, sp), v.substr(sp + 1));
    } else if (prop == "ann:scene_id") scene_id_ = v, scene_id_at_ = &e;
    else if (prop == "ann:time_position") time_position_ = std::get<DataValue>(data_literal(e.children[1])).as_number();
    else if (prop == "ann:frame_ref") out_.scene.frame_ref = v;
    else if (prop == "ann:pack_id") out_.pack.id = v;
    else if (prop == "ann:pack_version") out_.pack.version = v;
    else out_.warnings.push_back("ignoring ontology annotation " + prop);
  }

  void declaration(const XmlElement& e) {
    if (e.children.size() != 1) invalid(e, "Declaration needs exactly one entity");
    const auto& d = e.children[0];
    if (d.name == "AnnotationProperty") return;
    QName q = name_of(d);
    if (d.name == "Class") {
      declared_[q] = "Class";
      out_.tbox.concepts.insert(q);
    } else if (d.name == "ObjectProperty" || d.name == "DataProperty") {
      declared_[q] = d.name;
      RoleDef def;
      def.name = q;
      def.kind = d.name == "ObjectProperty" ? RoleKind::Object : RoleKind::Data;
      out_.tbox.roles.emplace(q, def);
    } else if (d.name == "NamedIndividual") {
      declared_[q] = "NamedIndividual";
    } else {
      unsupported("Declaration(" + d.name + ")");
    }
  }

  // Entity reference of the given kind; must be declared.
  QName ref(const XmlElement& e, const char* kind) {
    if (e.name != kind) invalid(e, std::string("expected ") + kind + ", found " + e.name);
    QName q = name_of(e);
    auto it = declared_.find(q);
    if (it == declared_.end() || it->second != kind)
      throw Error("DanglingReference", std::string(kind) + " " + q.str() + " at byte " + std::to_string(e.offset) +
                                           " has no declaration");
    return q;
  }

  bool arity(const XmlElement& e, std::size_t n) {
    if (e.children.size() == n) return true;
    unsupported(e.name + " with " + std::to_string(e.children.size()) + " operands");
    return false;
  }

  void sub_class(const XmlElement& e) {
    if (!arity(e, 2)) return;
    const auto& sub = e.children[0];
    const auto& sup = e.children[1];
    if (sub.name != "Class") return unsupported("SubClassOf(" + sub.name + ", ...)");
    QName c = ref(sub, "Class");
    if (sup.name == "Class") {
      out_.tbox.subclass_axioms.emplace(c, ref(sup, "Class"));
    } else if (sup.name == "ObjectMaxCardinality" && sup.children.size() == 1) {
      const std::string* n = sup.attribute("cardinality");
      CardinalityBound b{c, ref(sup.children[0], "ObjectProperty"), 0};
      if (!n || !parse_int(*n, b.max)) invalid(sup, "bad cardinality");
      out_.tbox.cardinality_bounds.push_back(b);
    } else if (sup.name == "DataAllValuesFrom" && sup.children.size() == 2 &&
               sup.children[1].name == "DatatypeRestriction") {
      const auto& r = sup.children[1];
      if (r.children.size() != 2 || r.children[1].name != "FacetRestriction" ||
          !r.children[1].attribute("facet") || *r.children[1].attribute("facet") != std::string(kXsd) + "maxInclusive" ||
          r.children[1].children.size() != 1)
        return unsupported("DatatypeRestriction");
      DataValue v = std::get<DataValue>(data_literal(r.children[1].children[0]));
      if (v.kind() != DataValue::Kind::Integer) return unsupported("non-integer maxInclusive facet");
      out_.tbox.cardinality_bounds.push_back({c, ref(sup.children[0], "DataProperty"), v.as_integer()});
    } else {
      unsupported("SubClassOf(Class, " + sup.name + ")");
    }
  }

  void disjoint(const XmlElement& e) {
    std::vector<QName> group;
    for (const auto& c : e.children) {
      if (c.name != "Class") return unsupported("DisjointClasses(" + c.name + ")");
      group.push_back(ref(c, "Class"));
    }
    out_.tbox.disjoint_groups.push_back(group);
  }

  const char* property_kind(const XmlElement& e) {
    return e.name.find("Object") != std::string::npos ? "ObjectProperty" : "DataProperty";
  }

  void sub_property(const XmlElement& e) {
    if (!arity(e, 2)) return;
    const char* kind = property_kind(e);
    if (e.children[0].name != kind || e.children[1].name != kind) return unsupported(e.name + " over expressions");
    out_.tbox.role_inclusions.emplace(ref(e.children[0], kind), ref(e.children[1], kind));
  }

  void functional(const XmlElement& e) {
    if (!arity(e, 1)) return;
    if (e.children[0].name != property_kind(e)) return unsupported(e.name + " over expressions");
    out_.tbox.roles.at(ref(e.children[0], property_kind(e))).functional = true;
  }

  void domain(const XmlElement& e) {
    if (!arity(e, 2)) return;
    const char* kind = property_kind(e);
    if (e.children[0].name != kind || e.children[1].name != "Class") return unsupported(e.name + " over expressions");
    auto& def = out_.tbox.roles.at(ref(e.children[0], kind));
    if (!def.domain.local.empty()) return unsupported(e.name + " (second domain)");
    def.domain = ref(e.children[1], "Class");
  }

  void range(const XmlElement& e) {
    if (!arity(e, 2)) return;
    const char* kind = property_kind(e);
    if (e.children[0].name != kind) return unsupported(e.name + " over expressions");
    auto& def = out_.tbox.roles.at(ref(e.children[0], kind));
    const auto& r = e.children[1];
    if (def.kind == RoleKind::Object) {
      if (r.name != "Class") return unsupported("ObjectPropertyRange(" + r.name + ")");
      def.range_concept = ref(r, "Class");
    } else if (r.name == "Datatype") {
      const std::string* a = r.attribute("abbreviatedIRI");
      std::string t = a ? *a : (r.attribute("IRI") ? *r.attribute("IRI") : "");
      if (t == "xsd:boolean" || t == std::string(kXsd) + "boolean") def.datatype = Datatype::Boolean;
      else if (t == "xsd:integer" || t == std::string(kXsd) + "integer") def.datatype = Datatype::Integer;
      else if (t == "xsd:decimal" || t == std::string(kXsd) + "decimal") def.datatype = Datatype::Decimal;
      else if (t == "xsd:string" || t == std::string(kXsd) + "string") def.datatype = Datatype::String;
      else unsupported("Datatype(" + t + ")");
    } else if (r.name == "DataOneOf") {
      def.datatype = Datatype::Enum;
      for (const auto& lit : r.children) {
        Value v = data_literal(lit);
        const auto& dv = std::get<DataValue>(v);
        if (dv.kind() != DataValue::Kind::Enum) return unsupported("DataOneOf over non-token literals");
        def.enum_values.push_back(dv.as_enum());
      }
    } else {
      unsupported("DataPropertyRange(" + r.name + ")");
    }
  }

  static bool parse_int(const std::string& s, std::int64_t& out) {
    auto res = std::from_chars(s.data(), s.data() + s.size(), out);
    return !s.empty() && res.ec == std::errc() && res.ptr == s.data() + s.size();
  }

  using Value = std::variant<QName, DataValue>;

  Value data_literal(const XmlElement& e) {
    if (e.name != "Literal") invalid(e, "expected Literal, found " + e.name);
    const std::string* dt = e.attribute("datatypeIRI");
    const std::string& t = e.text;
    std::string type = dt ? *dt : std::string(kXsd) + "string";
    if (type == kTokenType) return DataValue::enum_token(parse_abbr(t, e));
    if (type.rfind(kXsd, 0) != 0) {
      unsupported("Literal datatype " + type);
      return DataValue::string(t);
    }
    std::string local = type.substr(std::string(kXsd).size());
    if (local == "string") return DataValue::string(t);
    if (local == "boolean") {
      if (t == "true" || t == "1") return DataValue::boolean(true);
      if (t == "false" || t == "0") return DataValue::boolean(false);
      invalid(e, "bad boolean literal '" + t + "'");
    }
    if (local == "integer" || local == "int" || local == "long") {
      std::int64_t v = 0;
      if (!parse_int(t, v)) invalid(e, "bad integer literal '" + t + "'");
      return DataValue::integer(v);
    }
    if (local == "decimal" || local == "double" || local == "float") {
      double d = 0;
      auto res = std::from_chars(t.data(), t.data() + t.size(), d);
      if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size()) invalid(e, "bad decimal literal '" + t + "'");
      return DataValue::decimal(d);
    }
    unsupported("Literal datatype xsd:" + local);
    return DataValue::string(t);
  }

  void annotation_assertion(const XmlElement& e) {
    if (e.children.size() != 3 || e.children[0].name != "AnnotationProperty" || e.children[1].name != "AbbreviatedIRI" ||
        e.children[2].name != "Literal")
      return unsupported("AnnotationAssertion");
    std::string prop = annotation_property(e.children[0]);
    QName subject = parse_abbr(e.children[1].text, e.children[1]);
    if (!declared_.count(subject))
      throw Error("DanglingReference", "annotation subject " + subject.str() + " has no declaration");
    const std::string& v = e.children[2].text;
    if (prop == "ann:derived") {
      derived_.emplace_back(subject, v);
    } else if (prop == "ann:segment") {
      json j = parse_json_text(v);
      std::size_t index = j.contains("index") && j["index"].is_number_unsigned() ? j["index"].get<std::size_t>() : 0;
      j.erase("index");
      Individual ind = individual_from_json(j, ns());
      if (ind.id != subject) invalid(e, "segment annotation subject does not match its id");
      segments_.emplace_back(index, std::move(ind));
    } else {
      out_.warnings.push_back("ignoring annotation " + prop + " on " + subject.str());
    }
  }

  void class_assertion(const XmlElement& e) {
    if (!arity(e, 2)) return;
    if (e.children[0].name != "Class") return unsupported("ClassAssertion(" + e.children[0].name + ")");
    QName c = ref(e.children[0], "Class");
    assertions_.push_back(ClassAssertion{ref(e.children[1], "NamedIndividual"), c});
  }

  void object_assertion(const XmlElement& e) {
    if (!arity(e, 3)) return;
    if (e.children[0].name != "ObjectProperty") return unsupported("ObjectPropertyAssertion over expressions");
    QName r = ref(e.children[0], "ObjectProperty");
    assertions_.push_back(
        RoleAssertion{ref(e.children[1], "NamedIndividual"), r, ref(e.children[2], "NamedIndividual")});
  }

  void data_assertion(const XmlElement& e) {
    if (!arity(e, 3)) return;
    QName r = ref(e.children[0], "DataProperty");
    QName s = ref(e.children[1], "NamedIndividual");
    Value v = data_literal(e.children[2]);
    assertions_.push_back(RoleAssertion{s, r, std::get<DataValue>(v)});
  }

  Term term(const XmlElement& e) {
    if (e.name == "Variable") {
      const std::string* iri = e.attribute("IRI");
      if (!iri || iri->rfind(kVarNs, 0) != 0) invalid(e, std::string("variable IRI must start with ") + kVarNs);
      return Var{iri->substr(std::string(kVarNs).size())};
    }
    if (e.name == "NamedIndividual") return ref(e, "NamedIndividual");
    if (e.name == "Literal") return std::get<DataValue>(data_literal(e));
    invalid(e, "unexpected rule argument " + e.name);
  }

  std::optional<Atom> atom(const XmlElement& e) {
    const auto& c = e.children;
    if (e.name == "ClassAtom" && c.size() == 2 && c[0].name == "Class") return ClassAtom{ref(c[0], "Class"), term(c[1])};
    if (e.name == "ObjectPropertyAtom" && c.size() == 3 && c[0].name == "ObjectProperty")
      return ObjectPropAtom{ref(c[0], "ObjectProperty"), term(c[1]), term(c[2])};
    if (e.name == "DataPropertyAtom" && c.size() == 3 && c[0].name == "DataProperty")
      return DataPropAtom{ref(c[0], "DataProperty"), term(c[1]), term(c[2])};
    if (e.name == "DifferentIndividualsAtom" && c.size() == 2) return DifferentFromAtom{term(c[0]), term(c[1])};
    if (e.name == "BuiltInAtom") {
      const std::string* iri = e.attribute("IRI");
      auto q = iri ? ns().abbreviate(*iri) : std::nullopt;
      if (q && q->prefix == "sqwrl" && q->local == "select") {
        SelectAtom s;
        for (const auto& a : c) {
          Term t = term(a);
          if (!std::holds_alternative<Var>(t)) invalid(a, "sqwrl:select takes variables");
          s.vars.push_back(std::get<Var>(t));
        }
        return s;
      }
      if (q && q->prefix == "swrb" && c.size() == 2)
        if (auto op = builtin_from_name(q->local)) return BuiltinAtom{*op, term(c[0]), term(c[1])};
      unsupported("BuiltInAtom(" + (iri ? *iri : std::string("?")) + ")");
      return std::nullopt;
    }
    unsupported(e.name);
    return std::nullopt;
  }

  void rule(const XmlElement& e) {
    Rule r;
    bool complete = true;
    for (const auto& part : e.children) {
      if (part.name == "Annotation" && part.children.size() == 2) {
        std::string prop = annotation_property(part.children[0]);
        if (prop == "ann:rule_id") r.id = part.children[1].text;
        else if (prop == "rdfs:label") r.label = part.children[1].text;
      } else if (part.name == "Body" || part.name == "Head") {
        for (const auto& a : part.children) {
          auto parsed = atom(a);
          if (!parsed) complete = false;
          else (part.name == "Body" ? r.body : r.head).push_back(*parsed);
        }
      } else {
        unsupported("DLSafeRule/" + part.name);
        complete = false;
      }
    }
    if (!complete) return;
    if (r.id.empty()) r.id = "rule_" + std::to_string(out_.pack.rules.size() + 1);
    // Re-validate through the parser (safety, name kinds).
    Rule checked = parse_rule(format_rule(r), out_.tbox, r.id, r.label);
    if (out_.pack.find(checked.id)) throw Error("DuplicateRule", "rule id '" + checked.id + "' appears twice");
    out_.pack.rules.push_back(std::move(checked));
  }

  void build_scene() {
    Scene& scene = out_.scene;
    if (!scene_id_.empty()) scene.id = parse_abbr(scene_id_, *scene_id_at_);
    scene.time_position = time_position_;
    std::stable_sort(segments_.begin(), segments_.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    std::set<QName> known;
    for (auto& [_, ind] : segments_) {
      known.insert(ind.id);
      scene.individuals.push_back(std::move(ind));
    }
    // Individuals asserted about but carrying no segment annotation.
    std::set<QName> bare;
    for (const auto& a : assertions_) {
      if (auto* c = std::get_if<ClassAssertion>(&a)) {
        bare.insert(c->individual);
      } else {
        const auto& r = std::get<RoleAssertion>(a);
        bare.insert(r.subject);
        if (r.is_object()) bare.insert(r.object_name());
      }
    }
    for (const auto& q : bare) {
      if (known.count(q) || q == scene.id) continue;
      Individual ind;
      ind.id = q;
      ind.label = q.local;
      ind.segment.id = q;
      scene.individuals.push_back(ind);
      out_.warnings.push_back("individual " + q.str() + " has no segment annotation");
    }
    scene.assertions = std::move(assertions_);
    canonicalize(scene.assertions);
    scene.validate();
  }

  OwlImportOptions opts_;
  OwlImport out_;
  std::map<std::string, std::string> fixed_;
  std::vector<std::pair<std::string, std::string>> aliases_;
  std::map<QName, std::string> declared_;
  std::set<std::string> unsupported_;
  std::vector<std::pair<QName, std::string>> derived_;
  std::vector<std::pair<std::size_t, Individual>> segments_;
  std::vector<Assertion> assertions_;
  std::string scene_id_;
  const XmlElement* scene_id_at_ = nullptr;
  double time_position_ = 0;
};

}  // namespace

OwlImport import_owl(std::string_view bytes, OwlImportOptions opts) {
  OwlImport out = Importer(opts).run(bytes);
  return out;
}

ScenarioOwlExport export_scenario_owl(const TBox& tbox, const Scenario& scenario, const RulePack& pack) {
  ScenarioOwlExport out;
  std::ostringstream manifest;
  manifest << "scenario " << tbox.namespaces.expand(scenario.id) << "\n";
  std::set<std::string> files;
  for (const auto& scene : scenario.scenes) {
    std::string file = sanitize_label(scene.id.local) + ".owl";
    for (int n = 2; files.count(file); ++n) file = sanitize_label(scene.id.local) + "_" + std::to_string(n) + ".owl";
    files.insert(file);
    manifest << "scene " << tbox.namespaces.expand(scene.id) << " time " << format_decimal(scene.time_position, true)
             << " file " << file << "\n";
    out.documents.emplace_back(file, export_owl(tbox, scene, pack));
  }
  out.manifest = manifest.str();
  return out;
}

ScenarioOwlImport import_scenario_owl(std::string_view manifest,
                                      const std::function<std::string(const std::string&)>& load,
                                      OwlImportOptions opts) {
  ScenarioOwlImport out;
  std::string scenario_iri;
  struct Entry {
    std::string iri;
    double time;
    std::string file;
  };
  std::vector<Entry> entries;
  std::istringstream in{std::string(manifest)};
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    std::istringstream ls(line);
    std::vector<std::string> w;
    for (std::string t; ls >> t;) w.push_back(t);
    if (w.empty() || w[0][0] == '#') continue;
    auto bad = [&] { throw Error("InvalidManifest", "manifest line " + std::to_string(number) + ": " + line); };
    if (w[0] == "scenario" && w.size() == 2) {
      scenario_iri = w[1];
    } else if (w[0] == "scene" && (w.size() == 4 || w.size() == 6) && w[2] == "time") {
      Entry e{w[1], 0, ""};
      auto res = std::from_chars(w[3].data(), w[3].data() + w[3].size(), e.time);
      if (res.ec != std::errc() || res.ptr != w[3].data() + w[3].size()) bad();
      if (w.size() == 6) {
        if (w[4] != "file") bad();
        e.file = w[5];
      }
      entries.push_back(e);
    } else {
      bad();
    }
  }
  if (entries.empty()) throw Error("InvalidManifest", "manifest lists no scenes");

  bool first = true;
  for (const auto& e : entries) {
    std::string file = e.file;
    if (file.empty()) {
      auto cut = e.iri.find_last_of("#/:");
      file = sanitize_label(cut == std::string::npos ? e.iri : e.iri.substr(cut + 1)) + ".owl";
    }
    OwlImport doc = import_owl(load(file), opts);
    for (auto& wmsg : doc.warnings) out.warnings.push_back(file + ": " + wmsg);
    if (first) {
      out.tbox = doc.tbox;
      out.pack = doc.pack;
      first = false;
    } else if (!(doc.tbox == out.tbox) || !(doc.pack == out.pack)) {
      throw Error("InvalidManifest", file + " carries a different taxonomy or rule pack");
    }
    if (out.tbox.namespaces.expand(doc.scene.id) != e.iri)
      throw Error("InvalidManifest", file + " holds scene " + doc.scene.id.str() + ", manifest says " + e.iri);
    if (doc.scene.time_position != e.time)
      throw Error("InvalidManifest", file + " time position disagrees with the manifest");
    out.scenario.scenes.push_back(std::move(doc.scene));
  }
  if (!scenario_iri.empty()) {
    auto q = out.tbox.namespaces.abbreviate(scenario_iri);
    if (!q) throw Error("InvalidManifest", "scenario IRI outside every declared prefix");
    out.scenario.id = *q;
  }
  link_tracks(out.scenario, shipped_fusion_config());
  out.scenario.validate();
  return out;
}

}  // namespace cairo
