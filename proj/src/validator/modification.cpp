#include <algorithm>
#include <cmath>

#include "cairo/validator/validator.hpp"

namespace cairo {

namespace {

// Same ordering as spatial derivation: depth hints when both present, else
// the lower bottom edge is nearer.
bool nearer(const Segment& b, const Segment& a) {
  if (a.depth_hint && b.depth_hint) return *b.depth_hint < *a.depth_hint;
  return b.bbox.bottom() > a.bbox.bottom();
}

const Individual& require(const Scene& scene, const QName& id) {
  const Individual* ind = scene.find(id);
  if (!ind) throw Error("TargetMissing", "no individual '" + id.str() + "' in scene " + scene.id.str());
  return *ind;
}

// Scaled about the centre and clipped to the unit square.
BBox scaled(const BBox& b, double f) {
  double cx = b.cx(), cy = b.cy();
  double w = b.w * f, h = b.h * f;
  double x0 = std::clamp(cx - w / 2, 0.0, 1.0), x1 = std::clamp(cx + w / 2, 0.0, 1.0);
  double y0 = std::clamp(cy - h / 2, 0.0, 1.0), y1 = std::clamp(cy + h / 2, 0.0, 1.0);
  return BBox{x0, y0, x1 - x0, y1 - y0};
}

double occlusion_with(const Scene& scene, const Individual& target, const QName& occluder, const BBox& occ_box) {
  const Segment& a = target.segment;
  if (a.bbox.area() <= 0) return 0;
  double best = 0;
  for (const auto& ind : scene.individuals) {
    if (ind.id == target.id) continue;
    Segment b = ind.segment;
    if (ind.id == occluder) b.bbox = occ_box;
    double ov = overlap_area(a.bbox, b.bbox);
    if (ov > 0 && nearer(b, a)) best = std::max(best, ov / a.bbox.area());
  }
  return best;
}

Scene apply_attribute(const Scene& scene, const AttributeMod& mod, const TBox& tbox) {
  Scene out = scene;
  Individual* ind = out.find(mod.individual);
  if (!ind) throw Error("TargetMissing", "no individual '" + mod.individual.str() + "' in scene " + scene.id.str());
  if (mod.attribute == "dominant_color") {
    if (std::holds_alternative<std::monostate>(mod.value)) ind->segment.dominant_color.reset();
    else if (auto* c = std::get_if<Rgb>(&mod.value)) ind->segment.dominant_color = *c;
    else throw Error("InvalidModification", "dominant_color takes an (r, g, b) value");
    return out;
  }
  QName role;
  try {
    role = tbox.namespaces.resolve(mod.attribute);
  } catch (const Error& e) {
    throw Error("InvalidModification", e.what());
  }
  const RoleDef* def = tbox.role(role);
  if (!def || def->kind != RoleKind::Data)
    throw Error("InvalidModification", "'" + mod.attribute + "' is neither dominant_color nor a declared data role");
  if (tbox.derived_spec(role))
    throw Error("InvalidModification", role.str() + " is derived under closed world and cannot be set directly");
  if (std::holds_alternative<std::monostate>(mod.value)) {
    ind->attributes.erase(role);
  } else if (auto* v = std::get_if<DataValue>(&mod.value)) {
    if (!def->accepts(*v)) throw Error("InvalidModification", v->literal() + " is not a valid " + role.str() + " value");
    ind->attributes[role] = *v;
  } else {
    throw Error("InvalidModification", role.str() + " takes a data value");
  }
  return out;
}

}  // namespace

double raw_occlusion(const Scene& scene, const QName& target) {
  const Individual& t = require(scene, target);
  return occlusion_with(scene, t, QName{}, BBox{});
}

Scene apply_modification(const Scene& scene, const Modification& mod, const TBox& tbox, const FusionConfig& cfg,
                         ScaleResult* scale_result) {
  Scene out;
  if (auto* a = std::get_if<AttributeMod>(&mod)) {
    out = apply_attribute(scene, *a, tbox);
  } else {
    const auto& m = std::get<ScaleMod>(mod);
    if (!(m.rate >= 0 && m.rate <= 1)) throw Error("InvalidModification", "occlusion target must lie in [0, 1]");
    const Individual& target = require(scene, m.target);
    QName occluder;
    if (m.occluder) {
      const Individual& o = require(scene, *m.occluder);
      if (o.id == target.id) throw Error("InvalidModification", "an individual cannot occlude itself");
      occluder = o.id;
    } else {
      // nearer individual with the largest overlap, then by name
      double best = -1;
      for (const auto& ind : scene.individuals) {
        if (ind.id == target.id || !nearer(ind.segment, target.segment)) continue;
        double ov = overlap_area(ind.segment.bbox, target.segment.bbox);
        if (ov > best) best = ov, occluder = ind.id;
      }
      if (best <= 0 && m.rate > 0)
        throw Error("UnreachableOcclusion", "nothing nearer than " + target.id.str() + " overlaps it; max achievable 0");
      if (best < 0) throw Error("UnreachableOcclusion", "no individual is nearer than " + target.id.str());
    }
    const Individual& occ = *scene.find(occluder);
    const BBox& base = occ.segment.bbox;
    auto rate_at = [&](double f) { return occlusion_with(scene, target, occluder, scaled(base, f)); };

    double factor = 0;
    if (rate_at(0) >= m.rate) {
      factor = 0;
    } else {
      if (base.w <= 0 || base.h <= 0)
        throw Error("UnreachableOcclusion", occluder.str() + " has an empty box and cannot be scaled");
      // Large enough to cover the whole image from any centre.
      const double cover = 2.0 / std::min(base.w, base.h) + 1;
      double hi = 1;
      while (rate_at(hi) < m.rate && hi < cover) hi = std::min(hi * 2, cover);
      double max_rate = rate_at(hi);
      if (max_rate < m.rate - 1e-9)
        throw Error("UnreachableOcclusion", "requested occlusion " + format_decimal(m.rate, false) + " of " +
                                                target.id.str() + " exceeds the maximum achievable " +
                                                format_decimal(quantize_rate(max_rate), false));
      double lo = 0;
      for (int i = 0; i < 20; ++i) {
        double mid = (lo + hi) / 2;
        if (rate_at(mid) < m.rate) lo = mid;
        else hi = mid;
      }
      factor = std::abs(rate_at(lo) - m.rate) < std::abs(rate_at(hi) - m.rate) ? lo : hi;
    }
    out = scene;
    Individual& o = *out.find(occluder);
    BBox nb = scaled(base, factor);
    double old_area = base.area();
    o.segment.bbox = nb;
    o.segment.mask_area = old_area > 0 ? std::min(o.segment.mask_area * nb.area() / old_area, nb.area()) : 0;
    if (scale_result) *scale_result = ScaleResult{occluder, factor, rate_at(factor)};
  }
  rederive(out, cfg, tbox);
  out.validate();
  return out;
}

}  // namespace cairo
