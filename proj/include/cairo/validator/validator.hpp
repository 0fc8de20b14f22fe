#pragma once

// Counterfactual what-if engine: feature-level modifications, pluggable
// detector oracles, occlusion sweeps and CP report diffs.

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "cairo/core/model.hpp"
#include "cairo/ingestion/ingestion.hpp"
#include "cairo/reasoner/reasoner.hpp"
#include "cairo/rules/rules.hpp"
#include "cairo/taxonomy/tbox.hpp"

namespace cairo {

// Replace (or, with monostate, remove) one feature of an individual.
// `attribute` is "dominant_color" or a declared data role ("phys:has_distance").
struct AttributeMod {
  QName individual;
  std::string attribute;
  std::variant<std::monostate, Rgb, DataValue> value;
};

// Rescale the occluder about its centre so the target's occlusion rate
// becomes `rate`. Without an explicit occluder the nearer individual with the
// largest overlap is used.
struct ScaleMod {
  QName target;
  double rate = 0;
  std::optional<QName> occluder;
};

using Modification = std::variant<AttributeMod, ScaleMod>;

// Unquantized occlusion of `target`: max over nearer overlapping individuals.
double raw_occlusion(const Scene& scene, const QName& target);

struct ScaleResult {
  QName occluder;
  double factor = 1;
  double achieved = 0;  // raw occlusion after scaling
};

// Copy-with-change; assertions are re-derived with `cfg`. Throws
// Error("TargetMissing"), Error("UnreachableOcclusion"), Error("InvalidModification").
Scene apply_modification(const Scene& scene, const Modification& mod, const TBox& tbox, const FusionConfig& cfg,
                         ScaleResult* scale_result = nullptr);

struct Verdict {
  bool detected = false;
  double confidence = 0;
  bool operator==(const Verdict&) const = default;
};

class DetectorOracle {
 public:
  virtual ~DetectorOracle() = default;
  // One verdict per scene individual. Must be safe to call concurrently.
  virtual std::map<QName, Verdict> detect(const Scene& scene) const = 0;
  virtual std::string spec() const = 0;
};

class PassthroughOracle : public DetectorOracle {
 public:
  std::map<QName, Verdict> detect(const Scene& scene) const override;
  std::string spec() const override { return "passthrough"; }
};

// Detects an individual iff its perc:occlusion_rate lies in one of the
// closed intervals.
class TableOracle : public DetectorOracle {
 public:
  explicit TableOracle(std::vector<std::pair<double, double>> intervals);
  std::map<QName, Verdict> detect(const Scene& scene) const override;
  std::string spec() const override;
  const std::vector<std::pair<double, double>>& intervals() const { return intervals_; }

 private:
  std::vector<std::pair<double, double>> intervals_;
};

// Runs a shell command with the scene document on standard input; reads
// `<individual> <0|1> <confidence>` lines from standard output.
class ExecOracle : public DetectorOracle {
 public:
  explicit ExecOracle(std::string command) : command_(std::move(command)) {}
  std::map<QName, Verdict> detect(const Scene& scene) const override;
  std::string spec() const override { return "exec:" + command_; }

 private:
  std::string command_;
};

// "passthrough" | "table:0:0.05,0.30:0.60" | "exec:CMD". Throws Error("InvalidOracle").
std::unique_ptr<DetectorOracle> parse_oracle(const std::string& spec);
std::vector<std::pair<double, double>> parse_table_spec(const std::string& table);

struct RuleDelta {
  std::string rule_id;
  std::vector<std::string> added;    // binding keys
  std::vector<std::string> removed;
  std::size_t unchanged = 0;
  bool operator==(const RuleDelta&) const = default;
};

struct ReportDelta {
  std::vector<RuleDelta> rules;  // only rules with additions or removals
  bool empty() const { return rules.empty(); }
  bool operator==(const ReportDelta&) const = default;
};

// Throws Error("PackMismatch") when the reports come from different packs.
ReportDelta diff_reports(const CpReport& before, const CpReport& after);

struct SweepSpec {
  QName target;
  std::optional<QName> occluder;
  double from = 0;
  double to = 0;
  double step = 0;
};

// Grid lo + i*step (rounded to 1e-9) up to hi inclusive.
std::vector<double> sweep_values(double from, double to, double step);

struct SweepPoint {
  double value = 0;
  std::optional<double> achieved;   // quantized occlusion rate of the target
  std::optional<double> factor;     // occluder scale factor
  bool detected = false;
  double confidence = 0;
  std::vector<std::string> fired;   // rule ids with matches
  ReportDelta delta;
  std::optional<std::string> error;  // e.g. UnreachableOcclusion
};

struct SweepReport {
  QName target;
  QName occluder;
  std::string parameter = "occlusion_rate";
  std::string oracle;
  std::string pack_id;
  std::string pack_version;
  std::string baseline_target;
  std::map<std::string, std::set<std::string>> baseline_fired;
  std::vector<SweepPoint> points;
};

// Points are evaluated on up to `workers` threads; assembly is by value.
SweepReport run_sweep(const Scene& scene, const SweepSpec& spec, const DetectorOracle& oracle, const RulePack& pack,
                      const TBox& tbox, const FusionConfig& cfg, unsigned workers = 1);

nlohmann::ordered_json report_delta_to_json(const ReportDelta& d);
nlohmann::ordered_json sweep_report_to_json(const SweepReport& r);

}  // namespace cairo
