#pragma once

// Workspace persistence: content-addressed documents, rule packs with version
// tokens, an append-only NDJSON audit log and the sweep job queue.

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "cairo/core/model.hpp"
#include "cairo/ingestion/ingestion.hpp"
#include "cairo/rules/rules.hpp"
#include "cairo/taxonomy/tbox.hpp"
#include "cairo/validator/validator.hpp"

namespace cairo {

std::string sha256_hex(std::string_view data);

// Storage backend. Kinds are flat namespaces ("scenes", "reports", ...).
class ObjectStore {
 public:
  virtual ~ObjectStore() = default;
  virtual void put(const std::string& kind, const std::string& id, const std::string& bytes) = 0;
  virtual std::optional<std::string> get(const std::string& kind, const std::string& id) const = 0;
  virtual std::vector<std::string> list(const std::string& kind) const = 0;
  virtual void append_audit(const std::string& line) = 0;
  virtual std::vector<std::string> audit_lines() const = 0;
};

// <root>/<kind>/<id>.json written via rename; <root>/audit.ndjson appended.
class DirectoryStore : public ObjectStore {
 public:
  explicit DirectoryStore(std::filesystem::path root);
  void put(const std::string& kind, const std::string& id, const std::string& bytes) override;
  std::optional<std::string> get(const std::string& kind, const std::string& id) const override;
  std::vector<std::string> list(const std::string& kind) const override;
  void append_audit(const std::string& line) override;
  std::vector<std::string> audit_lines() const override;
  const std::filesystem::path& root() const { return root_; }

 private:
  std::filesystem::path root_;
  mutable std::mutex audit_mutex_;
};

struct AuditRecord {
  std::uint64_t seq = 0;
  std::string time;  // UTC, ISO 8601
  std::string actor;
  std::string action;  // pack.create, pack.replace, pack.delete, rule.put, rule.delete, scene.put, ...
  std::string target;
  nlohmann::ordered_json detail;
};

nlohmann::ordered_json audit_record_to_json(const AuditRecord& r);
AuditRecord audit_record_from_json(const nlohmann::ordered_json& j);

struct PackState {
  RulePack pack;  // pack.version is the decimal version token
  std::uint64_t version = 0;
};

// Rebuilds rule pack state from the audit log alone.
std::map<std::string, PackState> replay_audit(const std::vector<AuditRecord>& records, const TBox& tbox);

struct PutResult {
  std::string id;
  bool created = false;
};

struct RuleEditResult {
  PackState state;
  std::vector<RuleDiagnostic> warnings;
};

enum class SweepState { Queued, Running, Done, Failed };
std::string_view sweep_state_name(SweepState s);

struct SweepJob {
  std::string id;
  SweepState state = SweepState::Queued;
  nlohmann::ordered_json request;
  std::optional<std::string> report;  // SweepReport document bytes
  std::optional<std::string> error;
};

// Errors: Error("NotFound"), Error("VersionConflict"), Error("PackExists"),
// RuleError for rule text, plus ingestion/validator errors.
class Workspace {
 public:
  Workspace(std::unique_ptr<ObjectStore> store, TBox tbox, FusionConfig cfg, unsigned sweep_workers = 2);
  ~Workspace();
  Workspace(const Workspace&) = delete;
  Workspace& operator=(const Workspace&) = delete;

  const TBox& tbox() const { return tbox_; }
  const FusionConfig& config() const { return cfg_; }

  PutResult put_scene(const Scene& scene, const std::string& actor);
  std::optional<Scene> scene(const std::string& id) const;
  PutResult put_scenario(const Scenario& scenario, const std::string& actor);
  std::optional<Scenario> scenario(const std::string& id) const;

  std::vector<std::string> pack_ids() const;
  std::optional<PackState> pack(const std::string& id) const;
  RuleEditResult create_pack(const std::string& id, std::string_view text, const std::string& actor);
  RuleEditResult replace_pack(const std::string& id, std::string_view text, std::uint64_t expected,
                              const std::string& actor);
  void delete_pack(const std::string& id, std::uint64_t expected, const std::string& actor);
  RuleEditResult put_rule(const std::string& pack_id, const std::string& rule_id, const std::string& label,
                          std::string_view text, std::uint64_t expected, const std::string& actor);
  RuleEditResult delete_rule(const std::string& pack_id, const std::string& rule_id, std::uint64_t expected,
                             const std::string& actor);

  // Idempotent per (target document, pack id, pack version). `target_kind`
  // is "scene" or "scenario".
  PutResult make_report(const std::string& target_kind, const std::string& target_id, const std::string& pack_id,
                        const std::string& actor);
  std::optional<std::string> report(const std::string& id) const;

  // Queues a sweep; identical requests against the same pack version share an id.
  PutResult submit_sweep(const std::string& scene_id, const SweepSpec& spec, const std::string& oracle,
                         const std::string& pack_id, const std::string& actor);
  std::optional<SweepJob> sweep(const std::string& id) const;
  // Blocks until every queued sweep has finished (tests, shutdown).
  void drain();

  void record(const std::string& actor, const std::string& action, const std::string& target,
              nlohmann::ordered_json detail);
  std::vector<AuditRecord> audit() const;

 private:
  void worker_loop();
  void append(const std::string& actor, const std::string& action, const std::string& target,
              nlohmann::ordered_json detail);
  PackState& require_pack(const std::string& id, std::uint64_t expected);

  std::unique_ptr<ObjectStore> store_;
  TBox tbox_;
  FusionConfig cfg_;

  mutable std::mutex mutex_;  // packs, audit sequence, jobs
  std::map<std::string, PackState> packs_;
  std::uint64_t seq_ = 0;
  std::map<std::string, SweepJob> jobs_;

  struct Task {
    std::string id;
    Scene scene;
    SweepSpec spec;
    std::string oracle;
    RulePack pack;
  };
  std::deque<Task> queue_;
  std::size_t active_ = 0;
  std::condition_variable queue_cv_;
  std::condition_variable idle_cv_;
  bool stopping_ = false;
  std::vector<std::thread> workers_;
};

}  // namespace cairo
