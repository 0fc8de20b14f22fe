#include <algorithm>
#include <tuple>

#include "cairo/ingestion/ingestion.hpp"

namespace cairo {

TrackTable link_tracks(Scenario& scenario, const FusionConfig& cfg) {
  TrackTable table;
  int next_auto = 0;
  std::set<std::string> taken_names;
  for (const auto& scene : scenario.scenes)
    for (const auto& ind : scene.individuals)
      if (ind.track_id) taken_names.insert(*ind.track_id);
  auto fresh = [&] {
    std::string id;
    do {
      id = "auto" + std::to_string(++next_auto);
    } while (taken_names.count(id));
    taken_names.insert(id);
    return id;
  };

  for (std::size_t s = 0; s < scenario.scenes.size(); ++s) {
    auto& scene = scenario.scenes[s];
    std::set<std::string> used;
    for (const auto& ind : scene.individuals) {
      if (!ind.track_id) continue;
      if (!used.insert(*ind.track_id).second)
        throw Error("InvalidScenario", "track '" + *ind.track_id + "' appears twice in " + scene.id.str());
    }
    if (s > 0) {
      const auto& prev = scenario.scenes[s - 1];
      struct Cand {
        double iou;
        double conf;
        std::size_t cur;
        std::size_t prev;
      };
      std::vector<Cand> cands;
      for (std::size_t c = 0; c < scene.individuals.size(); ++c) {
        const auto& ci = scene.individuals[c];
        if (ci.track_id) continue;
        for (std::size_t p = 0; p < prev.individuals.size(); ++p) {
          const auto& pi = prev.individuals[p];
          if (!pi.track_id || pi.primary_concept() != ci.primary_concept()) continue;
          double iou = compute_iou(ci.segment.bbox, pi.segment.bbox);
          if (iou >= cfg.track_iou_threshold) cands.push_back({iou, ci.segment.confidence, c, p});
        }
      }
      std::stable_sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
        return std::tie(b.iou, b.conf) < std::tie(a.iou, a.conf);
      });
      std::set<std::size_t> matched;
      for (const auto& k : cands) {
        const auto& track = *prev.individuals[k.prev].track_id;
        if (matched.count(k.cur) || used.count(track)) continue;
        scene.individuals[k.cur].track_id = track;
        used.insert(track);
        matched.insert(k.cur);
      }
    }
    for (auto& ind : scene.individuals)
      if (!ind.track_id) ind.track_id = fresh();
  }

  for (std::size_t s = 0; s < scenario.scenes.size(); ++s) {
    for (const auto& ind : scenario.scenes[s].individuals) {
      auto& slots = table.tracks[*ind.track_id];
      slots.resize(scenario.scenes.size());
      slots[s] = ind.id;
      if (!table.track_individuals.count(*ind.track_id))
        table.track_individuals[*ind.track_id] = QName{"", ind.label + "_" + sanitize_label(*ind.track_id)};
    }
  }
  scenario.tracks = table;
  return table;
}

Scenario ingest_scenario(const ScenarioDocument& doc, const FusionConfig& cfg, const TBox& tbox,
                         std::vector<std::string>* warnings) {
  Scenario scenario;
  scenario.id = doc.scenario_id;
  for (const auto& sd : doc.scenes) scenario.scenes.push_back(ingest_scene(sd, cfg, tbox, warnings));
  std::stable_sort(scenario.scenes.begin(), scenario.scenes.end(),
                   [](const Scene& a, const Scene& b) { return a.time_position < b.time_position; });
  link_tracks(scenario, cfg);
  scenario.validate();
  return scenario;
}

}  // namespace cairo
