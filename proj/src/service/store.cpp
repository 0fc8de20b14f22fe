#include "cairo/service/store.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>
#include <sstream>

#include "cairo/ingestion/documents.hpp"
#include "cairo/reasoner/reasoner.hpp"

namespace cairo {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw Error("HashFailed", "SHA-256 digest failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 15];
  }
  return out;
}

namespace {

bool safe_name(const std::string& s) {
  if (s.empty() || s.size() > 128 || s[0] == '.') return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
  });
}

std::string read_file(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::string utc_now() {
  auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

DirectoryStore::DirectoryStore(fs::path root) : root_(std::move(root)) { fs::create_directories(root_); }

void DirectoryStore::put(const std::string& kind, const std::string& id, const std::string& bytes) {
  if (!safe_name(kind) || !safe_name(id)) throw Error("InvalidId", "invalid store key " + kind + "/" + id);
  fs::path dir = root_ / kind;
  fs::create_directories(dir);
  std::ostringstream tmpname;
  tmpname << id << ".tmp." << std::hash<std::thread::id>{}(std::this_thread::get_id());
  fs::path tmp = dir / tmpname.str();
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    f << bytes;
    if (!f) throw Error("StoreFailed", "cannot write " + tmp.string());
  }
  fs::rename(tmp, dir / (id + ".json"));
}

std::optional<std::string> DirectoryStore::get(const std::string& kind, const std::string& id) const {
  if (!safe_name(kind) || !safe_name(id)) return std::nullopt;
  fs::path p = root_ / kind / (id + ".json");
  if (!fs::exists(p)) return std::nullopt;
  return read_file(p);
}

std::vector<std::string> DirectoryStore::list(const std::string& kind) const {
  std::vector<std::string> out;
  if (!safe_name(kind) || !fs::exists(root_ / kind)) return out;
  for (const auto& e : fs::directory_iterator(root_ / kind))
    if (e.path().extension() == ".json") out.push_back(e.path().stem().string());
  std::sort(out.begin(), out.end());
  return out;
}

void DirectoryStore::append_audit(const std::string& line) {
  std::lock_guard lock(audit_mutex_);
  std::ofstream f(root_ / "audit.ndjson", std::ios::binary | std::ios::app);
  f << line << '\n';
  f.flush();
  if (!f) throw Error("StoreFailed", "cannot append to the audit log");
}

std::vector<std::string> DirectoryStore::audit_lines() const {
  std::lock_guard lock(audit_mutex_);
  std::vector<std::string> out;
  std::ifstream f(root_ / "audit.ndjson", std::ios::binary);
  for (std::string line; std::getline(f, line);)
    if (!line.empty()) out.push_back(line);
  return out;
}

ojson audit_record_to_json(const AuditRecord& r) {
  ojson j;
  j["seq"] = r.seq;
  j["time"] = r.time;
  j["actor"] = r.actor;
  j["action"] = r.action;
  j["target"] = r.target;
  j["detail"] = r.detail;
  return j;
}

AuditRecord audit_record_from_json(const ojson& j) {
  AuditRecord r;
  try {
    r.seq = j.at("seq").get<std::uint64_t>();
    r.time = j.at("time").get<std::string>();
    r.actor = j.at("actor").get<std::string>();
    r.action = j.at("action").get<std::string>();
    r.target = j.at("target").get<std::string>();
    r.detail = j.contains("detail") ? j.at("detail") : ojson::object();
  } catch (const nlohmann::json::exception& e) {
    throw Error("InvalidAuditLog", std::string("malformed audit record: ") + e.what());
  }
  return r;
}

namespace {

std::string str(const ojson& d, const char* key) {
  if (!d.contains(key) || !d[key].is_string()) throw Error("InvalidAuditLog", std::string("audit detail lacks ") + key);
  return d[key].get<std::string>();
}

// Single code path for live edits and replay. Returns false for records
// that do not touch rule packs.
bool apply_record(std::map<std::string, PackState>& packs, const AuditRecord& r, const TBox& tbox) {
  const std::string& id = r.target;
  if (r.action == "pack.create") {
    if (packs.count(id)) throw Error("PackExists", "rule pack '" + id + "' already exists");
    PackState s;
    s.pack = parse_rule_pack(str(r.detail, "text"), tbox);
    s.pack.id = id;
    s.version = 1;
    s.pack.version = "1";
    packs[id] = std::move(s);
    return true;
  }
  if (r.action != "pack.replace" && r.action != "pack.delete" && r.action != "rule.put" &&
      r.action != "rule.delete")
    return false;
  auto it = packs.find(id);
  if (it == packs.end()) throw Error("NotFound", "no rule pack '" + id + "'");
  PackState& s = it->second;
  if (r.action == "pack.delete") {
    packs.erase(it);
    return true;
  }
  if (r.action == "pack.replace") {
    RulePack p = parse_rule_pack(str(r.detail, "text"), tbox);
    s.pack.rules = std::move(p.rules);
  } else if (r.action == "rule.put") {
    std::string rid = str(r.detail, "rule");
    Rule rule = parse_rule(str(r.detail, "text"), tbox, rid, str(r.detail, "label"));
    auto pos = std::find_if(s.pack.rules.begin(), s.pack.rules.end(), [&](const Rule& x) { return x.id == rid; });
    if (pos != s.pack.rules.end()) *pos = std::move(rule);
    else s.pack.rules.push_back(std::move(rule));
  } else {
    std::string rid = str(r.detail, "rule");
    auto pos = std::find_if(s.pack.rules.begin(), s.pack.rules.end(), [&](const Rule& x) { return x.id == rid; });
    if (pos == s.pack.rules.end()) throw Error("NotFound", "no rule '" + rid + "' in pack '" + id + "'");
    s.pack.rules.erase(pos);
  }
  ++s.version;
  s.pack.version = std::to_string(s.version);
  return true;
}

}  // namespace

std::map<std::string, PackState> replay_audit(const std::vector<AuditRecord>& records, const TBox& tbox) {
  std::map<std::string, PackState> packs;
  for (const auto& r : records) apply_record(packs, r, tbox);
  return packs;
}

std::string_view sweep_state_name(SweepState s) {
  switch (s) {
    case SweepState::Queued: return "queued";
    case SweepState::Running: return "running";
    case SweepState::Done: return "done";
    case SweepState::Failed: return "failed";
  }
  return "failed";
}

namespace {

ojson job_to_json(const SweepJob& job) {
  ojson j;
  j["id"] = job.id;
  j["state"] = sweep_state_name(job.state);
  j["request"] = job.request;
  j["report"] = job.report ? parse_json_text(*job.report) : ojson(nullptr);
  j["error"] = job.error ? ojson(*job.error) : ojson(nullptr);
  return j;
}

SweepJob job_from_json(const ojson& j) {
  SweepJob job;
  job.id = j.at("id").get<std::string>();
  std::string st = j.at("state").get<std::string>();
  job.state = st == "done" ? SweepState::Done : st == "running" ? SweepState::Running
              : st == "queued" ? SweepState::Queued : SweepState::Failed;
  job.request = j.at("request");
  if (!j.at("report").is_null()) job.report = dump_document(j.at("report"));
  if (!j.at("error").is_null()) job.error = j.at("error").get<std::string>();
  return job;
}

}  // namespace

Workspace::Workspace(std::unique_ptr<ObjectStore> store, TBox tbox, FusionConfig cfg, unsigned sweep_workers)
    : store_(std::move(store)), tbox_(std::move(tbox)), cfg_(std::move(cfg)) {
  cfg_.validate();
  std::vector<AuditRecord> records;
  for (const auto& line : store_->audit_lines()) records.push_back(audit_record_from_json(parse_json_text(line)));
  packs_ = replay_audit(records, tbox_);
  if (!records.empty()) seq_ = records.back().seq;
  const RulePack& shipped = shipped_pack();
  bool seen = std::any_of(records.begin(), records.end(), [&](const AuditRecord& r) { return r.target == shipped.id; });
  if (!seen) {
    ojson d;
    d["text"] = format_rule_pack(shipped);
    append("system", "pack.create", shipped.id, d);
  }
  for (unsigned i = 0; i < std::max(1u, sweep_workers); ++i) workers_.emplace_back([this] { worker_loop(); });
}

Workspace::~Workspace() {
  {
    std::lock_guard lock(mutex_);
    stopping_ = true;
  }
  queue_cv_.notify_all();
  for (auto& t : workers_) t.join();
}

void Workspace::append(const std::string& actor, const std::string& action, const std::string& target,
                       ojson detail) {
  // caller holds mutex_
  AuditRecord r{seq_ + 1, utc_now(), actor.empty() ? "anonymous" : actor, action, target, std::move(detail)};
  apply_record(packs_, r, tbox_);
  store_->append_audit(audit_record_to_json(r).dump());
  ++seq_;
}

void Workspace::record(const std::string& actor, const std::string& action, const std::string& target,
                       ojson detail) {
  if (action.rfind("pack.", 0) == 0 || action.rfind("rule.", 0) == 0)
    throw Error("InvalidAction", "rule pack edits go through the pack operations");
  std::lock_guard lock(mutex_);
  append(actor, action, target, std::move(detail));
}

std::vector<AuditRecord> Workspace::audit() const {
  std::vector<AuditRecord> out;
  for (const auto& line : store_->audit_lines()) out.push_back(audit_record_from_json(parse_json_text(line)));
  return out;
}

PutResult Workspace::put_scene(const Scene& scene, const std::string& actor) {
  scene.validate();
  std::string bytes = dump_document(scene_to_json(scene));
  std::string id = sha256_hex(bytes);
  std::lock_guard lock(mutex_);
  if (store_->get("scenes", id)) return {id, false};
  store_->put("scenes", id, bytes);
  ojson d;
  d["scene"] = scene.id.str();
  append(actor, "scene.put", id, d);
  return {id, true};
}

std::optional<Scene> Workspace::scene(const std::string& id) const {
  auto bytes = store_->get("scenes", id);
  if (!bytes) return std::nullopt;
  return scene_from_json(parse_json_text(*bytes), tbox_.namespaces);
}

PutResult Workspace::put_scenario(const Scenario& scenario, const std::string& actor) {
  scenario.validate();
  std::string bytes = dump_document(scenario_to_json(scenario));
  std::string id = sha256_hex(bytes);
  std::lock_guard lock(mutex_);
  if (store_->get("scenarios", id)) return {id, false};
  store_->put("scenarios", id, bytes);
  ojson d;
  d["scenario"] = scenario.id.str();
  append(actor, "scenario.put", id, d);
  return {id, true};
}

std::optional<Scenario> Workspace::scenario(const std::string& id) const {
  auto bytes = store_->get("scenarios", id);
  if (!bytes) return std::nullopt;
  return scenario_from_json(parse_json_text(*bytes), tbox_.namespaces);
}

std::vector<std::string> Workspace::pack_ids() const {
  std::lock_guard lock(mutex_);
  std::vector<std::string> out;
  for (const auto& [id, _] : packs_) out.push_back(id);
  return out;
}

std::optional<PackState> Workspace::pack(const std::string& id) const {
  std::lock_guard lock(mutex_);
  auto it = packs_.find(id);
  if (it == packs_.end()) return std::nullopt;
  return it->second;
}

PackState& Workspace::require_pack(const std::string& id, std::uint64_t expected) {
  auto it = packs_.find(id);
  if (it == packs_.end()) throw Error("NotFound", "no rule pack '" + id + "'");
  if (it->second.version != expected)
    throw Error("VersionConflict", "rule pack '" + id + "' is at version " + std::to_string(it->second.version) +
                                       ", not " + std::to_string(expected));
  return it->second;
}

RuleEditResult Workspace::create_pack(const std::string& id, std::string_view text, const std::string& actor) {
  if (!safe_name(id)) throw Error("InvalidId", "invalid pack id '" + id + "'");
  RulePack parsed = parse_rule_pack(text, tbox_);
  parsed.id = id;
  std::lock_guard lock(mutex_);
  if (packs_.count(id)) throw Error("PackExists", "rule pack '" + id + "' already exists");
  ojson d;
  d["text"] = format_rule_pack(parsed);
  append(actor, "pack.create", id, d);
  return {packs_.at(id), lint_pack(packs_.at(id).pack, tbox_)};
}

RuleEditResult Workspace::replace_pack(const std::string& id, std::string_view text, std::uint64_t expected,
                                       const std::string& actor) {
  RulePack parsed = parse_rule_pack(text, tbox_);
  parsed.id = id;
  std::lock_guard lock(mutex_);
  require_pack(id, expected);
  ojson d;
  d["text"] = format_rule_pack(parsed);
  append(actor, "pack.replace", id, d);
  return {packs_.at(id), lint_pack(packs_.at(id).pack, tbox_)};
}

void Workspace::delete_pack(const std::string& id, std::uint64_t expected, const std::string& actor) {
  std::lock_guard lock(mutex_);
  require_pack(id, expected);
  append(actor, "pack.delete", id, ojson::object());
}

RuleEditResult Workspace::put_rule(const std::string& pack_id, const std::string& rule_id, const std::string& label,
                                   std::string_view text, std::uint64_t expected, const std::string& actor) {
  Rule rule = parse_rule(text, tbox_, rule_id, label);
  auto warnings = lint_rule(rule, tbox_);
  std::lock_guard lock(mutex_);
  require_pack(pack_id, expected);
  ojson d;
  d["rule"] = rule_id;
  d["label"] = label;
  d["text"] = format_rule(rule);
  append(actor, "rule.put", pack_id, d);
  return {packs_.at(pack_id), warnings};
}

RuleEditResult Workspace::delete_rule(const std::string& pack_id, const std::string& rule_id, std::uint64_t expected,
                                      const std::string& actor) {
  std::lock_guard lock(mutex_);
  PackState& s = require_pack(pack_id, expected);
  if (!s.pack.find(rule_id)) throw Error("NotFound", "no rule '" + rule_id + "' in pack '" + pack_id + "'");
  ojson d;
  d["rule"] = rule_id;
  append(actor, "rule.delete", pack_id, d);
  return {packs_.at(pack_id), {}};
}

PutResult Workspace::make_report(const std::string& target_kind, const std::string& target_id,
                                 const std::string& pack_id, const std::string& actor) {
  auto state = pack(pack_id);
  if (!state) throw Error("NotFound", "no rule pack '" + pack_id + "'");
  std::string id = sha256_hex("report\n" + target_kind + "\n" + target_id + "\n" + pack_id + "\n" + state->pack.version);
  if (store_->get("reports", id)) return {id, false};

  CpReport report;
  if (target_kind == "scene") {
    auto s = scene(target_id);
    if (!s) throw Error("NotFound", "no scene '" + target_id + "'");
    report = run_cp_suite(state->pack, *s, tbox_);
  } else if (target_kind == "scenario") {
    auto s = scenario(target_id);
    if (!s) throw Error("NotFound", "no scenario '" + target_id + "'");
    report = run_cp_suite(state->pack, *s, tbox_);
  } else {
    throw Error("InvalidRequest", "report target must be a scene or a scenario");
  }
  std::string bytes = dump_document(cp_report_to_json(report));
  std::lock_guard lock(mutex_);
  if (store_->get("reports", id)) return {id, false};
  store_->put("reports", id, bytes);
  ojson d;
  d[target_kind] = target_id;
  d["pack"] = pack_id;
  d["pack_version"] = state->pack.version;
  append(actor, "report.create", id, d);
  return {id, true};
}

std::optional<std::string> Workspace::report(const std::string& id) const { return store_->get("reports", id); }

PutResult Workspace::submit_sweep(const std::string& scene_id, const SweepSpec& spec, const std::string& oracle,
                                  const std::string& pack_id, const std::string& actor) {
  auto s = scene(scene_id);
  if (!s) throw Error("NotFound", "no scene '" + scene_id + "'");
  auto state = pack(pack_id);
  if (!state) throw Error("NotFound", "no rule pack '" + pack_id + "'");
  parse_oracle(oracle);
  sweep_values(spec.from, spec.to, spec.step);
  if (!s->find(spec.target)) throw Error("TargetMissing", "no individual '" + spec.target.str() + "' in scene");
  if (spec.occluder && !s->find(*spec.occluder))
    throw Error("TargetMissing", "no individual '" + spec.occluder->str() + "' in scene");

  ojson req;
  req["sceneId"] = scene_id;
  req["target"] = spec.target.str();
  req["occluder"] = spec.occluder ? ojson(spec.occluder->str()) : ojson(nullptr);
  req["from"] = spec.from;
  req["to"] = spec.to;
  req["step"] = spec.step;
  req["oracle"] = oracle;
  req["packId"] = pack_id;
  req["packVersion"] = state->pack.version;
  std::string id = sha256_hex("sweep\n" + req.dump());

  std::lock_guard lock(mutex_);
  if (jobs_.count(id) || store_->get("sweeps", id)) return {id, false};
  jobs_[id] = SweepJob{id, SweepState::Queued, req, std::nullopt, std::nullopt};
  queue_.push_back(Task{id, *s, spec, oracle, state->pack});
  append(actor, "sweep.submit", id, req);
  queue_cv_.notify_one();
  return {id, true};
}

std::optional<SweepJob> Workspace::sweep(const std::string& id) const {
  {
    std::lock_guard lock(mutex_);
    auto it = jobs_.find(id);
    if (it != jobs_.end()) return it->second;
  }
  auto bytes = store_->get("sweeps", id);
  if (!bytes) return std::nullopt;
  return job_from_json(parse_json_text(*bytes));
}

void Workspace::drain() {
  std::unique_lock lock(mutex_);
  idle_cv_.wait(lock, [&] { return queue_.empty() && active_ == 0; });
}

void Workspace::worker_loop() {
  for (;;) {
    Task task;
    {
      std::unique_lock lock(mutex_);
      queue_cv_.wait(lock, [&] { return stopping_ || !queue_.empty(); });
      if (queue_.empty()) return;
      task = std::move(queue_.front());
      queue_.pop_front();
      ++active_;
      jobs_[task.id].state = SweepState::Running;
    }
    SweepJob result;
    {
      std::lock_guard lock(mutex_);
      result = jobs_[task.id];
    }
    try {
      auto oracle = parse_oracle(task.oracle);
      SweepReport r = run_sweep(task.scene, task.spec, *oracle, task.pack, tbox_, cfg_, 1);
      result.report = dump_document(sweep_report_to_json(r));
      result.state = SweepState::Done;
    } catch (const std::exception& e) {
      result.error = e.what();
      result.state = SweepState::Failed;
    }
    try {
      store_->put("sweeps", task.id, dump_document(job_to_json(result)));
    } catch (const std::exception& e) {
      result.state = SweepState::Failed;
      result.error = e.what();
    }
    {
      std::lock_guard lock(mutex_);
      jobs_[task.id] = result;
      --active_;
    }
    idle_cv_.notify_all();
  }
}

}  // namespace cairo
