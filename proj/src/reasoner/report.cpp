#include <algorithm>
#include <chrono>

#include "cairo/ingestion/documents.hpp"
#include "cairo/reasoner/reasoner.hpp"

namespace cairo {

const RuleReport* CpReport::rule(std::string_view id) const {
  for (const auto& r : rules)
    if (r.id == id) return &r;
  return nullptr;
}

std::map<std::string, std::set<std::string>> CpReport::fired() const {
  std::map<std::string, std::set<std::string>> out;
  for (const auto& r : rules) {
    if (r.matches.empty()) continue;
    auto& s = out[r.id];
    for (const auto& m : r.matches) s.insert(m.key());
  }
  return out;
}

namespace {

std::vector<const Rule*> sorted_rules(const RulePack& pack) {
  std::vector<const Rule*> rules;
  for (const auto& r : pack.rules) rules.push_back(&r);
  std::stable_sort(rules.begin(), rules.end(), [](auto* a, auto* b) { return a->id < b->id; });
  return rules;
}

CpReport run_on_graph(const RulePack& pack, const MaterializedGraph& graph, std::string target) {
  CpReport report;
  report.target_id = std::move(target);
  report.pack_id = pack.id;
  report.pack_version = pack.version;
  for (const Rule* rule : sorted_rules(pack)) {
    RuleReport rr;
    rr.id = rule->id;
    rr.label = rule->label;
    try {
      auto res = evaluate_rule(*rule, graph);
      rr.matches = std::move(res.bindings);
      for (const auto& a : res.inferred) rr.inferred.push_back(make_assertion_key(a));
    } catch (const std::exception& e) {
      rr.error = e.what();
    }
    report.rules.push_back(std::move(rr));
  }
  return report;
}

double ms_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

CpReport run_cp_suite(const RulePack& pack, const Scene& scene, const TBox& tbox, SuiteOptions opts) {
  auto t0 = std::chrono::steady_clock::now();
  auto graph = realize(scene, tbox);
  CpReport report = run_on_graph(pack, graph, scene.id.str());
  report.consistency = check_consistency(graph, tbox, scene.id.str());
  if (opts.timings) report.elapsed_ms = ms_since(t0);
  return report;
}

CpReport run_cp_suite(const RulePack& pack, const Scenario& scenario, const TBox& tbox, SuiteOptions opts) {
  auto t0 = std::chrono::steady_clock::now();
  auto graph = realize(scenario, tbox);
  CpReport report = run_on_graph(pack, graph, scenario.id.str());
  for (const auto& scene : scenario.scenes) {
    auto f = check_consistency(realize(scene, tbox), tbox, scene.id.str());
    report.consistency.insert(report.consistency.end(), f.begin(), f.end());
  }
  std::sort(report.consistency.begin(), report.consistency.end());
  if (opts.timings) report.elapsed_ms = ms_since(t0);
  return report;
}

nlohmann::ordered_json cp_report_to_json(const CpReport& report) {
  json j;
  j["target_id"] = report.target_id;
  j["pack"] = report.pack_id;
  j["pack_version"] = report.pack_version;
  j["rules"] = json::array();
  for (const auto& r : report.rules) {
    json jr;
    jr["id"] = r.id;
    jr["label"] = r.label;
    jr["matches"] = json::array();
    for (const auto& m : r.matches) {
      json b = json::object();
      for (const auto& [var, val] : m.values) {
        if (auto* q = std::get_if<QName>(&val)) b[var.name] = q->str();
        else b[var.name] = data_value_to_json(std::get<DataValue>(val));
      }
      json prov = json::array();
      for (const auto& p : m.provenance) prov.push_back({{"atom", p.atom}, {"assertion", p.assertion}});
      jr["matches"].push_back({{"bindings", b}, {"provenance", prov}});
    }
    jr["inferred"] = json::array();
    for (const auto& k : r.inferred) jr["inferred"].push_back({{"assertion", k}, {"inferred_by", r.id}});
    jr["error"] = r.error ? json(*r.error) : json(nullptr);
    j["rules"].push_back(jr);
  }
  j["consistency"] = json::array();
  for (const auto& f : report.consistency)
    j["consistency"].push_back(
        {{"category", f.category}, {"scope", f.scope}, {"subject", f.subject}, {"message", f.message}});
  j["elapsed_ms"] = report.elapsed_ms ? json(*report.elapsed_ms) : json(nullptr);
  return j;
}

CpReport cp_report_from_json(const nlohmann::ordered_json& j, const NamespaceTable& ns) {
  try {
    CpReport r;
    r.target_id = j.at("target_id").get<std::string>();
    r.pack_id = j.at("pack").get<std::string>();
    r.pack_version = j.value("pack_version", "");
    for (const auto& jr : j.at("rules")) {
      RuleReport rr;
      rr.id = jr.at("id").get<std::string>();
      rr.label = jr.value("label", "");
      for (const auto& m : jr.at("matches")) {
        Binding b;
        for (auto it = m.at("bindings").begin(); it != m.at("bindings").end(); ++it) {
          Value v = it.value().is_string() ? Value{ns.resolve(it.value().get<std::string>())}
                                           : Value{data_value_from_json(it.value(), ns)};
          b.values.push_back({Var{it.key()}, v});
        }
        for (const auto& p : m.at("provenance"))
          b.provenance.push_back({p.at("atom").get<std::string>(), p.at("assertion").get<std::string>()});
        rr.matches.push_back(std::move(b));
      }
      if (jr.contains("inferred"))
        for (const auto& i : jr["inferred"]) rr.inferred.push_back(i.at("assertion").get<std::string>());
      if (jr.contains("error") && !jr["error"].is_null()) rr.error = jr["error"].get<std::string>();
      r.rules.push_back(std::move(rr));
    }
    for (const auto& f : j.at("consistency"))
      r.consistency.push_back({f.at("category").get<std::string>(), f.at("scope").get<std::string>(),
                               f.at("subject").get<std::string>(), f.at("message").get<std::string>()});
    if (j.contains("elapsed_ms") && !j["elapsed_ms"].is_null()) r.elapsed_ms = j["elapsed_ms"].get<double>();
    return r;
  } catch (const nlohmann::ordered_json::exception& e) {
    throw Error("InvalidDocument", std::string("malformed CP report: ") + e.what());
  }
}

bool same_report(const CpReport& a, const CpReport& b) {
  return a.target_id == b.target_id && a.pack_id == b.pack_id && a.pack_version == b.pack_version &&
         a.rules == b.rules && a.consistency == b.consistency;
}

}  // namespace cairo
