#include <algorithm>
#include <cctype>
#include <tuple>

#include "cairo/ingestion/ingestion.hpp"

namespace cairo {

namespace {

const QName kUnknownObject{"l4_d", "Unknown_Object"};

std::string lower_trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  std::string out;
  for (char c : s.substr(b, e - b)) out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

auto record_order_key(const DetectionRecord& r) {
  return std::make_tuple(r.label_text, r.bbox.x, r.bbox.y, r.bbox.w, r.bbox.h, r.confidence, r.detector,
                         r.track_id.value_or(""));
}

struct Cluster {
  const DetectionRecord* anchor = nullptr;
  std::vector<const DetectionRecord*> members;
  std::map<QName, double> scores;
};

bool compatible(const TBox& tbox, const Cluster& c, const QName& concept_name) {
  for (const auto& [q, _] : c.scores)
    if (!(tbox.subsumes(q, concept_name) || tbox.subsumes(concept_name, q))) return false;
  return true;
}

}  // namespace

FusionResult fuse_detections(const std::vector<DetectionRecord>& records, const FusionConfig& cfg,
                             const TBox& tbox) {
  FusionResult out;
  std::vector<const DetectionRecord*> sorted;
  for (const auto& r : records) {
    if (!r.bbox.valid() || r.bbox.w <= 0 || r.bbox.h <= 0)
      throw Error("InvalidRecord", "record '" + r.label_text + "' has a bbox outside the unit square or empty");
    if (r.confidence < 0 || r.confidence > 1)
      throw Error("InvalidRecord", "record '" + r.label_text + "' has confidence outside [0,1]");
    sorted.push_back(&r);
  }
  std::sort(sorted.begin(), sorted.end(),
            [](auto* a, auto* b) { return record_order_key(*a) < record_order_key(*b); });

  std::map<const DetectionRecord*, QName> concept_of;
  for (auto* r : sorted) {
    std::optional<QName> c = r->mapped_concept;
    if (!c) {
      auto it = cfg.label_map.find(r->label_text);
      if (it == cfg.label_map.end()) it = cfg.label_map.find(lower_trim(r->label_text));
      if (it != cfg.label_map.end()) c = it->second;
    }
    if (c && !tbox.is_concept(*c)) {
      out.warnings.push_back("UnmappedLabel: '" + r->label_text + "' maps to undeclared concept " + c->str() +
                             "; using " + kUnknownObject.str());
      c.reset();
    } else if (!c) {
      out.warnings.push_back("UnmappedLabel: '" + r->label_text + "' has no concept mapping; using " +
                             kUnknownObject.str());
    }
    concept_of[r] = c.value_or(kUnknownObject);
  }

  // Greedy merge, most confident first.
  std::vector<const DetectionRecord*> by_conf = sorted;
  std::stable_sort(by_conf.begin(), by_conf.end(),
                   [](auto* a, auto* b) { return a->confidence > b->confidence; });
  std::vector<Cluster> clusters;
  for (auto* r : by_conf) {
    const QName& concept_name = concept_of[r];
    Cluster* best = nullptr;
    double best_iou = -1;
    for (auto& c : clusters) {
      double iou = compute_iou(c.anchor->bbox, r->bbox);
      if (iou >= cfg.iou_merge_threshold && iou > best_iou && compatible(tbox, c, concept_name)) {
        best = &c;
        best_iou = iou;
      }
    }
    if (!best) {
      clusters.push_back(Cluster{r, {r}, {{concept_name, r->confidence}}});
      continue;
    }
    best->members.push_back(r);
    auto& s = best->scores[concept_name];
    s = std::max(s, r->confidence);
  }

  std::vector<Individual> inds;
  for (const auto& c : clusters) {
    const DetectionRecord& a = *c.anchor;
    Individual ind;
    ind.label = sanitize_label(a.label_text);
    Segment& seg = ind.segment;
    seg.bbox = a.bbox;
    seg.mask_area = a.mask_area.value_or(a.bbox.area());
    seg.confidence = a.confidence;
    seg.logits = a.logits;
    std::set<std::string> detectors;
    for (auto* m : c.members) {
      if (!seg.dominant_color && m->dominant_color) seg.dominant_color = m->dominant_color;
      if (!seg.depth_hint && m->depth_hint) seg.depth_hint = m->depth_hint;
      if (!ind.track_id && m->track_id) ind.track_id = m->track_id;
      for (const auto& [k, v] : m->extra) ind.attributes.emplace(k, v);  // most confident wins
      if (!m->detector.empty()) detectors.insert(m->detector);
    }
    for (const auto& d : detectors) seg.source_detector += (seg.source_detector.empty() ? "" : "+") + d;
    for (const auto& [q, s] : c.scores) ind.candidates.push_back({q, s});
    std::stable_sort(ind.candidates.begin(), ind.candidates.end(),
                     [](const auto& x, const auto& y) { return x.score > y.score; });
    inds.push_back(std::move(ind));
  }

  std::sort(inds.begin(), inds.end(), [](const Individual& x, const Individual& y) {
    const auto& a = x.segment;
    const auto& b = y.segment;
    return std::tie(x.label, a.bbox.x, a.bbox.y, a.bbox.w, a.bbox.h, a.confidence) <
           std::tie(y.label, b.bbox.x, b.bbox.y, b.bbox.w, b.bbox.h, b.confidence);
  });
  std::map<std::string, int> counter;
  for (auto& ind : inds) {
    ind.id = QName{"", ind.label + "_" + std::to_string(++counter[ind.label])};
    ind.segment.id = ind.id;
  }
  out.individuals = std::move(inds);
  return out;
}

}  // namespace cairo
