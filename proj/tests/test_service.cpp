#include <doctest.h>

#include <httplib.h>
#include <netinet/in.h>
#include <signal.h>
#include <spawn.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <thread>

#include "cairo/owl/owl_io.hpp"
#include "cairo/service/api.hpp"
#include "support.hpp"

using namespace cairo;
using namespace cairo::test;

namespace {

using ojson = nlohmann::ordered_json;

struct Env {
  std::filesystem::path dir;
  std::unique_ptr<Workspace> ws;
  std::unique_ptr<Api> api;

  explicit Env(const std::string& name, ApiOptions opts = {}) : dir(scratch_dir(name)) { open(opts); }

  void open(ApiOptions opts = {}) {
    api.reset();
    ws.reset();
    ws = std::make_unique<Workspace>(std::make_unique<DirectoryStore>(dir), tbox(), cfg(), 2);
    api = std::make_unique<Api>(*ws, opts);
  }

  ApiResponse call(const std::string& method, const std::string& path, const std::string& body = "",
                   std::map<std::string, std::string> headers = {}) {
    ApiRequest r;
    r.method = method;
    auto q = path.find('?');
    r.path = path.substr(0, q);
    if (q != std::string::npos) {
      std::string qs = path.substr(q + 1);
      auto eq = qs.find('=');
      r.query[qs.substr(0, eq)] = qs.substr(eq + 1);
    }
    r.headers = std::move(headers);
    r.body = body;
    return api->handle(r);
  }

  ojson json_of(const ApiResponse& r) { return ojson::parse(r.body); }
};

std::string doc(const DetectionDocument& d) { return detection_document_to_json(d).dump(); }

const std::string kRule = "l4_d:Truck(?t) ^ perc:has_high_occlusion(?t, true) -> sqwrl:select(?t)";

}  // namespace

TEST_CASE("health") {
  Env e("health");
  auto r = e.call("GET", "/health");
  CHECK(r.status == 200);
  CHECK(e.json_of(r)["status"] == "ok");
  CHECK(e.call("GET", "/nope").status == 404);
}

TEST_CASE("scenes are content addressed") {
  Env e("scenes");
  auto a = e.call("POST", "/scenes", doc(urban_intersection_document()));
  REQUIRE(a.status == 201);
  auto id = e.json_of(a)["id"].get<std::string>();
  CHECK(id.size() == 64);
  auto b = e.call("POST", "/scenes", ojson{{"document", detection_document_to_json(urban_intersection_document())}}.dump());
  CHECK(b.status == 200);
  CHECK(e.json_of(b)["id"] == id);
  auto g = e.call("GET", "/scenes/" + id);
  CHECK(g.status == 200);
  CHECK(e.json_of(g)["scene"] == scene_to_json(urban()));
  CHECK(e.call("GET", "/scenes/ffff").status == 404);
  auto bad = e.call("POST", "/scenes", "{\"scene_id\": 3}");
  CHECK(bad.status == 400);
  CHECK(e.json_of(bad).contains("code"));
  CHECK(e.json_of(bad).contains("message"));
}

TEST_CASE("reports are idempotent per pack version") {
  Env e("reports");
  auto sid = e.json_of(e.call("POST", "/scenes", doc(adversarial_truck_document())))["id"].get<std::string>();
  auto r1 = e.call("POST", "/reports", ojson{{"sceneId", sid}, {"packId", "cp_pack"}}.dump());
  REQUIRE(r1.status == 201);
  auto j1 = e.json_of(r1);
  auto r2 = e.call("POST", "/reports", ojson{{"sceneId", sid}, {"packId", "cp_pack"}}.dump());
  CHECK(r2.status == 200);
  CHECK(e.json_of(r2)["id"] == j1["id"]);
  auto rep = j1["report"];
  CHECK(rep["rules"].size() == pack().rules.size());
  auto raw = e.call("GET", "/reports/" + j1["id"].get<std::string>() + "/document");
  CHECK(raw.body == dump_document(cp_report_to_json(run_cp_suite(pack(), adversarial(), tbox()))));
  CHECK(e.call("POST", "/reports", ojson{{"sceneId", sid}, {"packId", "nope"}}.dump()).status == 404);
}

TEST_CASE("scenario reports") {
  Env e("scenario_reports");
  auto body = scenario_document_to_json(stroller_scenario_document()).dump();
  auto put = e.call("POST", "/scenarios", body);
  REQUIRE(put.status == 201);
  auto id = e.json_of(put)["id"].get<std::string>();
  auto r = e.call("POST", "/reports", ojson{{"scenarioId", id}, {"packId", "cp_pack"}}.dump());
  REQUIRE(r.status == 201);
  for (const auto& rule : e.json_of(r)["report"]["rules"])
    if (rule["id"] == "CP_0002") CHECK(rule["matches"].size() == 1);
}

TEST_CASE("rule editing with version tokens") {
  Env e("rules");
  auto list = e.json_of(e.call("GET", "/rules"));
  REQUIRE(list["packs"].size() == 1);
  CHECK(list["packs"][0]["id"] == "cp_pack");

  auto get = e.call("GET", "/rules/cp_pack");
  CHECK(get.headers.at("ETag") == "\"1\"");

  // missing version -> 428
  auto r = e.call("POST", "/rules/cp_pack/CP_TRUCK", ojson{{"text", kRule}}.dump());
  CHECK(r.status == 428);
  // stale version -> 409
  r = e.call("POST", "/rules/cp_pack/CP_TRUCK", ojson{{"text", kRule}, {"version", 7}}.dump());
  CHECK(r.status == 409);
  CHECK(e.json_of(r)["code"] == "VersionConflict");
  r = e.call("POST", "/rules/cp_pack/CP_TRUCK", ojson{{"text", kRule}, {"label", "occluded truck"}}.dump(),
             {{"if-match", "\"1\""}});
  REQUIRE(r.status == 201);
  CHECK(r.headers.at("ETag") == "\"2\"");
  CHECK(e.json_of(r)["version"] == 2);
  // creating it again conflicts
  r = e.call("POST", "/rules/cp_pack/CP_TRUCK", ojson{{"text", kRule}, {"version", 2}}.dump());
  CHECK(r.status == 409);
  CHECK(e.json_of(r)["code"] == "RuleExists");

  auto one = e.json_of(e.call("GET", "/rules/cp_pack/CP_TRUCK"));
  CHECK(one["label"] == "occluded truck");
  CHECK(one["packVersion"] == 2);

  // a syntax error surfaces diagnostics with positions
  r = e.call("PUT", "/rules/cp_pack/CP_TRUCK", ojson{{"text", "l4_d:Truck(?t) ^ @"}, {"version", 2}}.dump());
  CHECK(r.status == 400);
  auto err = e.json_of(r);
  CHECK(err["code"] == "SyntaxError");
  REQUIRE(err["details"]["diagnostics"].size() == 1);
  CHECK(err["details"]["diagnostics"][0]["line"] == 1);
  CHECK(err["details"]["diagnostics"][0]["col"] == 18);

  r = e.call("DELETE", "/rules/cp_pack/CP_TRUCK?version=2");
  CHECK(r.status == 200);
  CHECK(e.json_of(r)["version"] == 3);
  CHECK(e.call("GET", "/rules/cp_pack/CP_TRUCK").status == 404);
}

TEST_CASE("pack lifecycle and audit replay") {
  Env e("packs");
  std::string text = "pack mine\nversion 1\n\nrule A \"trucks\"\n" + kRule + "\n";
  auto r = e.call("POST", "/rules/mine", ojson{{"text", text}}.dump(), {{"x-actor", "alice"}});
  REQUIRE(r.status == 201);
  CHECK(e.call("POST", "/rules/mine", ojson{{"text", text}}.dump()).status == 409);
  r = e.call("PUT", "/rules/mine/B", ojson{{"text", kRule}, {"version", 1}}.dump(), {{"x-actor", "bob"}});
  REQUIRE(r.status == 200);
  auto before = e.json_of(e.call("GET", "/rules/mine"));

  // reopen from disk: state comes back from the audit log
  e.open();
  auto after = e.json_of(e.call("GET", "/rules/mine"));
  CHECK(after == before);

  auto audit = e.json_of(e.call("GET", "/audit"))["records"];
  std::vector<std::string> actions;
  for (const auto& a : audit) actions.push_back(a["action"]);
  CHECK(std::count(actions.begin(), actions.end(), "pack.create") == 2);
  CHECK(std::count(actions.begin(), actions.end(), "rule.put") == 1);
  for (std::size_t i = 1; i < audit.size(); ++i) CHECK(audit[i]["seq"].get<int>() == audit[i - 1]["seq"].get<int>() + 1);

  std::vector<AuditRecord> recs;
  for (const auto& line : DirectoryStore(e.dir).audit_lines()) recs.push_back(audit_record_from_json(ojson::parse(line)));
  auto state = replay_audit(recs, tbox());
  CHECK(state.at("mine").version == 2);
  CHECK(state.at("mine").pack.rules.size() == 2);

  CHECK(e.call("DELETE", "/rules/mine", "", {{"if-match", "2"}}).status == 200);
  CHECK(e.call("GET", "/rules/mine").status == 404);
}

TEST_CASE("sweeps run on the worker pool") {
  Env e("sweeps");
  auto sid = e.json_of(e.call("POST", "/scenes", doc(adversarial_truck_document())))["id"].get<std::string>();
  ojson req{{"sceneId", sid}, {"target", "truck_1"}, {"from", 0.05}, {"to", 0.8}, {"step", 0.05},
            {"oracle", "table:0:0.05,0.30:0.60"}};
  auto r = e.call("POST", "/sweeps", req.dump());
  REQUIRE(r.status == 202);
  auto id = e.json_of(r)["id"].get<std::string>();
  CHECK(e.json_of(e.call("POST", "/sweeps", req.dump()))["id"] == id);
  e.ws->drain();
  auto job = e.json_of(e.call("GET", "/sweeps/" + id));
  CHECK(job["state"] == "done");
  CHECK(job["report"]["points"].size() == 16);
  CHECK(job["report"]["occluder"] == "sign_1");

  req["oracle"] = "exec:true";
  auto denied = e.call("POST", "/sweeps", req.dump());
  CHECK(denied.status == 400);
  CHECK(e.json_of(denied)["code"] == "OracleNotAllowed");
  req["oracle"] = "table:0:0.05";
  req["target"] = "nobody_1";
  CHECK(e.call("POST", "/sweeps", req.dump()).status == 400);
  CHECK(e.call("GET", "/sweeps/ffff").status == 404);
}

TEST_CASE("OWL export and triage") {
  Env e("owl_triage");
  auto sid = e.json_of(e.call("POST", "/scenes", doc(desert_road_document())))["id"].get<std::string>();
  auto owl = e.call("GET", "/export/owl/" + sid);
  CHECK(owl.status == 200);
  CHECK(owl.content_type == "application/owl+xml");
  CHECK(owl.body == export_owl(tbox(), desert(), pack()));

  auto rid = e.json_of(e.call("POST", "/reports", ojson{{"sceneId", sid}, {"packId", "cp_pack"}}.dump()))["id"]
                 .get<std::string>();
  ojson t{{"reportId", rid}, {"rule", "CP_0004"}, {"binding", "?car=car_1"}, {"verdict", "confirmed"}};
  CHECK(e.call("POST", "/triage", t.dump()).status == 201);
  t["verdict"] = "maybe";
  CHECK(e.call("POST", "/triage", t.dump()).status == 400);
  auto audit = e.json_of(e.call("GET", "/audit"))["records"];
  CHECK(audit.back()["action"] == "triage.verdict");
}

TEST_CASE("exec oracles can be enabled") {
  Env e("exec", ApiOptions{true});
  auto sid = e.json_of(e.call("POST", "/scenes", doc(adversarial_truck_document())))["id"].get<std::string>();
  ojson req{{"sceneId", sid}, {"target", "truck_1"}, {"from", 0.3}, {"to", 0.4}, {"step", 0.1},
            {"oracle", "exec:cat >/dev/null"}};
  auto r = e.call("POST", "/sweeps", req.dump());
  REQUIRE(r.status == 202);
  e.ws->drain();
  auto job = e.json_of(e.call("GET", "/sweeps/" + e.json_of(r)["id"].get<std::string>()));
  CHECK(job["state"] == "done");
}

TEST_CASE("store writes atomically and rejects unsafe names") {
  auto dir = scratch_dir("store");
  DirectoryStore s(dir);
  s.put("scenes", "abc", "{}\n");
  CHECK(s.get("scenes", "abc") == std::optional<std::string>("{}\n"));
  CHECK_FALSE(s.get("scenes", "zzz"));
  CHECK(s.list("scenes") == std::vector<std::string>{"abc"});
  CHECK_THROWS_AS(s.put("scenes", "../x", "{}"), Error);
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("HTTP server answers over a real socket") {
  int probe = socket(AF_INET, SOCK_STREAM, 0);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  REQUIRE(bind(probe, reinterpret_cast<sockaddr*>(&addr), sizeof addr) == 0);
  socklen_t len = sizeof addr;
  getsockname(probe, reinterpret_cast<sockaddr*>(&addr), &len);
  int port = ntohs(addr.sin_port);
  close(probe);

  auto dir = scratch_dir("http");
  std::string port_s = std::to_string(port), ws = dir.string();
  const char* argv[] = {CAIRO_CLI_PATH, "serve", "--port", port_s.c_str(), "--workspace", ws.c_str(), nullptr};
  pid_t pid;
  REQUIRE(posix_spawn(&pid, CAIRO_CLI_PATH, nullptr, nullptr, const_cast<char* const*>(argv), environ) == 0);

  httplib::Client cli("127.0.0.1", port);
  httplib::Result res;
  for (int i = 0; i < 100 && !res; ++i) {
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
    res = cli.Get("/health");
  }
  REQUIRE(res);
  CHECK(res->status == 200);
  auto put = cli.Post("/scenes", detection_document_to_json(desert_road_document()).dump(), "application/json");
  REQUIRE(put);
  CHECK(put->status == 201);
  auto opt = cli.Options("/rules/cp_pack");
  REQUIRE(opt);
  CHECK(opt->status == 204);
  CHECK(opt->get_header_value("Access-Control-Allow-Origin") == "*");
  auto rules = cli.Get("/rules/cp_pack");
  REQUIRE(rules);
  CHECK(rules->get_header_value("ETag") == "\"1\"");

  kill(pid, SIGTERM);
  int status = 0;
  waitpid(pid, &status, 0);
}
