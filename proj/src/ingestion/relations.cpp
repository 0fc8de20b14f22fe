#include <algorithm>
#include <cmath>

#include "cairo/ingestion/ingestion.hpp"

namespace cairo {

namespace {

const QName kHasColor{"phys", "has_color"};
const QName kHasConfidence{"perc", "has_confidence"};
const QName kLeftOf{"phys", "is_left_of"};
const QName kRightOf{"phys", "is_right_of"};
const QName kNear{"phys", "is_near"};
const QName kProximity{"phys", "is_in_proximity"};
const QName kOccludedBy{"phys", "is_occluded_by"};
const QName kOcclusionRate{"perc", "occlusion_rate"};
const QName kPartOf{"phys", "is_part_of"};
const QName kHasPart{"phys", "has_part"};
const QName kRelativeHeight{"phys", "relative_height"};

struct PaletteEntry {
  const char* name;
  Rgb rgb;
};

constexpr PaletteEntry kPalette[] = {
    {"Black", {0, 0, 0}},       {"Gray", {128, 128, 128}}, {"White", {255, 255, 255}},
    {"Red", {220, 20, 20}},     {"Green", {30, 160, 60}},  {"Blue", {30, 60, 200}},
    {"Yellow", {240, 220, 30}}, {"Orange", {250, 140, 0}}, {"Brown", {130, 80, 40}},
};

std::optional<QName> nearest_color(const Rgb& c, const RoleDef& role) {
  std::optional<QName> best;
  long best_d = 0;
  for (const auto& p : kPalette) {
    QName token{"phys", p.name};
    if (!role.accepts(DataValue::enum_token(token))) continue;
    long dr = c.r - p.rgb.r, dg = c.g - p.rgb.g, db = c.b - p.rgb.b;
    long d = dr * dr + dg * dg + db * db;
    if (!best || d < best_d) {
      best = token;
      best_d = d;
    }
  }
  return best;
}

bool has_role(const TBox& tbox, const QName& r) { return tbox.role(r) != nullptr; }

std::set<QName> realized(const Individual& ind, const TBox& tbox) {
  std::set<QName> out;
  for (const auto& c : ind.candidates) {
    const auto& anc = tbox.ancestors(c.concept_name);
    out.insert(anc.begin(), anc.end());
  }
  return out;
}

// b is nearer to the camera than a.
bool nearer(const Segment& b, const Segment& a) {
  if (a.depth_hint && b.depth_hint) return *b.depth_hint < *a.depth_hint;
  return b.bbox.bottom() > a.bbox.bottom();
}

double round4(double v) { return std::round(v * 1e4) / 1e4; }

// Realized memberships and role edges of a scene's current assertions.
struct SceneView {
  std::map<QName, std::set<QName>> members;  // concept -> individuals
  std::map<QName, std::set<std::pair<QName, QName>>> object_edges;  // role -> (s, o)
  std::map<QName, std::map<QName, DataValue>> data_first;  // role -> subject -> first value

  SceneView(const Scene& scene, const TBox& tbox, const std::set<QName>& skip_roles) {
    for (const auto& a : scene.assertions) {
      if (auto* c = std::get_if<ClassAssertion>(&a)) {
        for (const auto& anc : tbox.ancestors(c->concept_name)) members[anc].insert(c->individual);
        continue;
      }
      const auto& r = std::get<RoleAssertion>(a);
      if (skip_roles.count(r.role)) continue;
      for (const auto& sup : tbox.role_ancestors(r.role)) {
        if (r.is_object()) object_edges[sup].insert({r.subject, r.object_name()});
        else data_first[sup].emplace(r.subject, r.literal());
      }
    }
  }

  bool is(const QName& ind, const QName& concept_name) const {
    auto it = members.find(concept_name);
    return it != members.end() && it->second.count(ind);
  }
};

}  // namespace

std::vector<Assertion> base_assertions(const Scene& scene, const TBox& tbox) {
  std::vector<Assertion> out;
  const RoleDef* color = tbox.role(kHasColor);
  for (const auto& ind : scene.individuals) {
    for (const auto& c : ind.candidates) out.push_back(ClassAssertion{ind.id, c.concept_name});
    if (color && ind.segment.dominant_color)
      if (auto tok = nearest_color(*ind.segment.dominant_color, *color))
        out.push_back(RoleAssertion{ind.id, kHasColor, DataValue::enum_token(*tok)});
    if (has_role(tbox, kHasConfidence))
      out.push_back(RoleAssertion{ind.id, kHasConfidence, DataValue::decimal(ind.segment.confidence)});
    for (const auto& [role, value] : ind.attributes) out.push_back(RoleAssertion{ind.id, role, value});
  }
  canonicalize(out);
  return out;
}

std::vector<Assertion> derive_spatial_relations(const Scene& scene, const FusionConfig& cfg, const TBox& tbox) {
  std::vector<Assertion> out;
  const auto& inds = scene.individuals;
  const double near_dist = cfg.near_threshold * std::sqrt(2.0);
  const RoleDef* part_of = tbox.role(kPartOf);

  std::vector<std::set<QName>> concepts;
  for (const auto& ind : inds) concepts.push_back(realized(ind, tbox));

  for (std::size_t i = 0; i < inds.size(); ++i) {
    const Segment& a = inds[i].segment;
    double occlusion = 0;
    std::optional<std::size_t> whole;
    double whole_containment = 0;
    for (std::size_t j = 0; j < inds.size(); ++j) {
      if (i == j) continue;
      const Segment& b = inds[j].segment;
      if (a.bbox.right() <= b.bbox.x && a.bbox.x < b.bbox.x) {
        if (has_role(tbox, kLeftOf)) out.push_back(RoleAssertion{inds[i].id, kLeftOf, inds[j].id});
        if (has_role(tbox, kRightOf)) out.push_back(RoleAssertion{inds[j].id, kRightOf, inds[i].id});
      }
      double dx = a.bbox.cx() - b.bbox.cx(), dy = a.bbox.cy() - b.bbox.cy();
      if (std::sqrt(dx * dx + dy * dy) <= near_dist) {
        if (has_role(tbox, kNear)) out.push_back(RoleAssertion{inds[i].id, kNear, inds[j].id});
        if (has_role(tbox, kProximity)) out.push_back(RoleAssertion{inds[i].id, kProximity, inds[j].id});
      }
      double ov = overlap_area(a.bbox, b.bbox);
      if (ov > 0 && a.bbox.area() > 0 && nearer(b, a)) {
        if (has_role(tbox, kOccludedBy)) out.push_back(RoleAssertion{inds[i].id, kOccludedBy, inds[j].id});
        occlusion = std::max(occlusion, ov / a.bbox.area());
      }
      if (part_of && a.bbox.area() > 0 && concepts[i].count(part_of->domain) &&
          (!part_of->range_concept || concepts[j].count(*part_of->range_concept))) {
        double containment = ov / a.bbox.area();
        if (containment >= cfg.part_of_containment) {
          // tightest enclosing whole wins: highest containment, then smaller area
          bool better = !whole || containment > whole_containment ||
                        (containment == whole_containment && b.bbox.area() < inds[*whole].segment.bbox.area());
          if (better) {
            whole = j;
            whole_containment = containment;
          }
        }
      }
    }
    if (has_role(tbox, kOcclusionRate))
      out.push_back(RoleAssertion{inds[i].id, kOcclusionRate, DataValue::decimal(quantize_rate(occlusion))});
    if (whole) {
      const auto& w = inds[*whole];
      out.push_back(RoleAssertion{inds[i].id, kPartOf, w.id});
      if (has_role(tbox, kHasPart)) out.push_back(RoleAssertion{w.id, kHasPart, inds[i].id});
      if (has_role(tbox, kRelativeHeight) && w.segment.bbox.h > 0)
        out.push_back(
            RoleAssertion{inds[i].id, kRelativeHeight, DataValue::decimal(round4(a.bbox.h / w.segment.bbox.h))});
    }
  }
  canonicalize(out);
  return out;
}

std::vector<Assertion> materialize_cwa_properties(const Scene& scene, const TBox& tbox, const FusionConfig& cfg) {
  std::set<QName> targets;
  for (const auto& d : tbox.derived_specs) targets.insert(d.target);
  SceneView view(scene, tbox, targets);

  std::vector<Assertion> out;
  auto domain_members = [&](const RoleDef& role) {
    std::vector<QName> xs;
    for (const auto& ind : scene.individuals)
      if (view.is(ind.id, role.domain)) xs.push_back(ind.id);
    return xs;
  };
  auto flag_value = [](const RoleDef& role, bool on) {
    if (role.datatype == Datatype::Boolean) return DataValue::boolean(on);
    return DataValue::integer(on ? 1 : 0);
  };

  for (const auto& spec : tbox.derived_specs) {
    const RoleDef* role = tbox.role(spec.target);
    if (!role) continue;
    using K = DerivedPropertySpec::Kind;
    switch (spec.kind) {
      case K::AbsenceOfPart: {
        auto parts = view.object_edges[kPartOf];
        for (const auto& x : domain_members(*role)) {
          bool has = false;
          for (const auto& [p, w] : parts)
            if (w == x && view.is(p, *spec.concept_name)) has = true;
          out.push_back(RoleAssertion{x, spec.target, flag_value(*role, !has)});
        }
        break;
      }
      case K::Independence: {
        auto parts = view.object_edges[kPartOf];
        for (const auto& x : domain_members(*role)) {
          bool attached = false;
          for (const auto& [p, w] : parts)
            if (p == x && view.is(w, *spec.concept_name)) attached = true;
          out.push_back(RoleAssertion{x, spec.target, flag_value(*role, !attached)});
        }
        break;
      }
      case K::ThresholdFlag: {
        double lo = spec.threshold_param.empty() ? spec.threshold : cfg.parameter(spec.threshold_param);
        const auto& values = view.data_first[*spec.source];
        for (const auto& x : domain_members(*role)) {
          bool on = false;
          auto it = values.find(x);
          if (it != values.end() && it->second.is_numeric()) {
            double v = it->second.as_number();
            switch (spec.comparator) {
              case Comparator::Ge: on = v >= lo; break;
              case Comparator::Gt: on = v > lo; break;
              case Comparator::Le: on = v <= lo; break;
              case Comparator::Lt: on = v < lo; break;
              case Comparator::Outside: on = v < spec.threshold || v > spec.threshold_hi; break;
            }
          }
          out.push_back(RoleAssertion{x, spec.target, flag_value(*role, on)});
        }
        break;
      }
      case K::PresenceInScene: {
        if (role->kind != RoleKind::Object) break;
        for (const auto& x : domain_members(*role)) out.push_back(RoleAssertion{x, spec.target, scene.id});
        if (role->range_concept) out.push_back(ClassAssertion{scene.id, *role->range_concept});
        break;
      }
      case K::AbsenceInScene: {
        bool any = false;
        for (const auto& ind : scene.individuals)
          if (view.is(ind.id, *spec.concept_name)) any = true;
        out.push_back(ClassAssertion{scene.id, role->domain});
        out.push_back(RoleAssertion{scene.id, spec.target, flag_value(*role, !any)});
        break;
      }
    }
  }
  canonicalize(out);
  return out;
}

void rederive(Scene& scene, const FusionConfig& cfg, const TBox& tbox) {
  scene.assertions = base_assertions(scene, tbox);
  auto spatial = derive_spatial_relations(scene, cfg, tbox);
  scene.assertions.insert(scene.assertions.end(), spatial.begin(), spatial.end());
  auto cwa = materialize_cwa_properties(scene, tbox, cfg);
  scene.assertions.insert(scene.assertions.end(), cwa.begin(), cwa.end());
  canonicalize(scene.assertions);
}

Scene ingest_scene(const DetectionDocument& doc, const FusionConfig& cfg, const TBox& tbox,
                   std::vector<std::string>* warnings) {
  cfg.validate();
  if (doc.time_position < 0) throw Error("InvalidDocument", "time_position must be non-negative");
  Scene scene;
  scene.id = doc.scene_id;
  scene.time_position = doc.time_position;
  scene.frame_ref = doc.frame_ref;
  auto fused = fuse_detections(doc.records, cfg, tbox);
  scene.individuals = std::move(fused.individuals);
  if (warnings) warnings->insert(warnings->end(), fused.warnings.begin(), fused.warnings.end());
  for (const auto& ind : scene.individuals)
    if (ind.id == scene.id) throw Error("InvalidDocument", "individual id collides with scene id " + scene.id.str());
  rederive(scene, cfg, tbox);
  scene.validate();
  return scene;
}

}  // namespace cairo
