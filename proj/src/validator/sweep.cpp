#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "cairo/validator/validator.hpp"

namespace cairo {

namespace {

const QName kOcclusionRate{"perc", "occlusion_rate"};

std::optional<double> occlusion_of(const Scene& scene, const QName& target) {
  for (const auto& a : scene.assertions)
    if (auto* r = std::get_if<RoleAssertion>(&a))
      if (r->role == kOcclusionRate && r->subject == target && !r->is_object()) return r->literal().as_number();
  return std::nullopt;
}

std::vector<std::string> rule_ids(const CpReport& r) {
  std::vector<std::string> out;
  for (const auto& x : r.rules) out.push_back(x.id);
  return out;
}

}  // namespace

ReportDelta diff_reports(const CpReport& before, const CpReport& after) {
  if (before.pack_id != after.pack_id || before.pack_version != after.pack_version || rule_ids(before) != rule_ids(after))
    throw Error("PackMismatch", "reports come from different rule packs (" + before.pack_id + "@" + before.pack_version +
                                    " vs " + after.pack_id + "@" + after.pack_version + ")");
  ReportDelta d;
  for (std::size_t i = 0; i < before.rules.size(); ++i) {
    std::set<std::string> b, a;
    for (const auto& m : before.rules[i].matches) b.insert(m.key());
    for (const auto& m : after.rules[i].matches) a.insert(m.key());
    RuleDelta rd;
    rd.rule_id = before.rules[i].id;
    std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(rd.added));
    std::set_difference(b.begin(), b.end(), a.begin(), a.end(), std::back_inserter(rd.removed));
    rd.unchanged = b.size() - rd.removed.size();
    if (!rd.added.empty() || !rd.removed.empty()) d.rules.push_back(std::move(rd));
  }
  return d;
}

std::vector<double> sweep_values(double from, double to, double step) {
  if (!(step > 0) || !(from < to) || !std::isfinite(from) || !std::isfinite(to))
    throw Error("InvalidSweep", "sweep needs from < to and step > 0");
  std::vector<double> out;
  for (std::size_t i = 0;; ++i) {
    double v = std::round((from + static_cast<double>(i) * step) * 1e9) / 1e9;
    if (v > to + 1e-9) break;
    out.push_back(v);
    if (out.size() > 100000) throw Error("InvalidSweep", "sweep has too many points");
  }
  return out;
}

SweepReport run_sweep(const Scene& scene, const SweepSpec& spec, const DetectorOracle& oracle, const RulePack& pack,
                      const TBox& tbox, const FusionConfig& cfg, unsigned workers) {
  if (!scene.find(spec.target)) throw Error("TargetMissing", "no individual '" + spec.target.str() + "' in scene");
  std::vector<double> values = sweep_values(spec.from, spec.to, spec.step);
  for (double v : values)
    if (v < 0 || v > 1) throw Error("InvalidSweep", "occlusion sweep values must lie in [0, 1]");

  CpReport baseline = run_cp_suite(pack, scene, tbox);
  SweepReport report;
  report.target = spec.target;
  report.oracle = oracle.spec();
  report.pack_id = pack.id;
  report.pack_version = pack.version;
  report.baseline_target = baseline.target_id;
  report.baseline_fired = baseline.fired();
  report.points.resize(values.size());

  std::vector<std::optional<QName>> occluders(values.size());
  auto evaluate = [&](std::size_t i) {
    SweepPoint& p = report.points[i];
    p.value = values[i];
    try {
      ScaleResult sr;
      Scene modified = apply_modification(scene, ScaleMod{spec.target, p.value, spec.occluder}, tbox, cfg, &sr);
      occluders[i] = sr.occluder;
      p.factor = std::round(sr.factor * 1e6) / 1e6;
      p.achieved = occlusion_of(modified, spec.target);
      auto verdicts = oracle.detect(modified);
      auto it = verdicts.find(spec.target);
      if (it != verdicts.end()) {
        p.detected = it->second.detected;
        p.confidence = it->second.confidence;
      }
      CpReport r = run_cp_suite(pack, modified, tbox);
      for (const auto& rr : r.rules)
        if (!rr.matches.empty()) p.fired.push_back(rr.id);
      p.delta = diff_reports(baseline, r);
    } catch (const Error& e) {
      p.error = e.code() + ": " + e.what();
    }
  };

  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(values.size())));
  if (workers == 1) {
    for (std::size_t i = 0; i < values.size(); ++i) evaluate(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (std::size_t i; (i = next++) < values.size();) evaluate(i);
      });
    for (auto& t : pool) t.join();
  }
  for (const auto& o : occluders)
    if (o) {
      report.occluder = *o;
      break;
    }
  if (spec.occluder) report.occluder = *spec.occluder;
  return report;
}

nlohmann::ordered_json report_delta_to_json(const ReportDelta& d) {
  nlohmann::ordered_json j = nlohmann::ordered_json::array();
  for (const auto& r : d.rules) {
    nlohmann::ordered_json x;
    x["rule"] = r.rule_id;
    x["added"] = r.added;
    x["removed"] = r.removed;
    x["unchanged"] = r.unchanged;
    j.push_back(x);
  }
  return j;
}

nlohmann::ordered_json sweep_report_to_json(const SweepReport& r) {
  nlohmann::ordered_json j;
  j["target"] = r.target.str();
  j["occluder"] = r.occluder.local.empty() ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json(r.occluder.str());
  j["parameter"] = r.parameter;
  j["oracle"] = r.oracle;
  j["pack"] = r.pack_id;
  j["pack_version"] = r.pack_version;
  nlohmann::ordered_json base;
  base["target_id"] = r.baseline_target;
  nlohmann::ordered_json fired = nlohmann::ordered_json::object();
  for (const auto& [rule, keys] : r.baseline_fired) fired[rule] = std::vector<std::string>(keys.begin(), keys.end());
  base["fired"] = fired;
  j["baseline"] = base;
  j["points"] = nlohmann::ordered_json::array();
  for (const auto& p : r.points) {
    nlohmann::ordered_json x;
    x["value"] = p.value;
    x["achieved"] = p.achieved ? nlohmann::ordered_json(*p.achieved) : nlohmann::ordered_json(nullptr);
    x["scale_factor"] = p.factor ? nlohmann::ordered_json(*p.factor) : nlohmann::ordered_json(nullptr);
    x["detected"] = p.detected;
    x["confidence"] = p.confidence;
    x["fired"] = p.fired;
    x["delta"] = report_delta_to_json(p.delta);
    x["error"] = p.error ? nlohmann::ordered_json(*p.error) : nlohmann::ordered_json(nullptr);
    j["points"].push_back(x);
  }
  return j;
}

}  // namespace cairo
