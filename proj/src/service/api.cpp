#include "cairo/service/api.hpp"

#include <httplib.h>

#include <charconv>

#include "cairo/ingestion/documents.hpp"
#include "cairo/owl/owl_io.hpp"

namespace cairo {

namespace {

using ojson = nlohmann::ordered_json;

struct HttpError : Error {
  HttpError(int status, std::string code, std::string msg, ojson details = ojson::object())
      : Error(std::move(code), std::move(msg)), status(status), details(std::move(details)) {}
  int status;
  ojson details;
};

ApiResponse json_response(int status, const ojson& j) { return ApiResponse{status, "application/json", dump_document(j), {}}; }

ApiResponse error_response(int status, const std::string& code, const std::string& message, ojson details) {
  ojson j;
  j["code"] = code;
  j["message"] = message;
  j["details"] = std::move(details);
  return json_response(status, j);
}

int status_for(const std::string& code) {
  if (code == "NotFound") return 404;
  if (code == "VersionConflict" || code == "PackExists" || code == "RuleExists") return 409;
  return 400;
}

ojson diagnostics_json(const std::vector<RuleDiagnostic>& diags) {
  ojson a = ojson::array();
  for (const auto& d : diags) {
    ojson x;
    x["severity"] = d.severity;
    x["code"] = d.code;
    x["message"] = d.message;
    x["line"] = d.line;
    x["col"] = d.col;
    x["rule"] = d.rule_id;
    a.push_back(x);
  }
  return a;
}

std::vector<std::string> split_path(const std::string& path) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos < path.size()) {
    std::size_t next = path.find('/', pos);
    if (next == std::string::npos) next = path.size();
    if (next > pos) out.push_back(path.substr(pos, next - pos));
    pos = next + 1;
  }
  return out;
}

ojson body_json(const ApiRequest& req) {
  if (req.body.empty()) throw HttpError(400, "InvalidRequest", "request body must be a JSON object");
  ojson j = parse_json_text(req.body);
  if (!j.is_object()) throw HttpError(400, "InvalidRequest", "request body must be a JSON object");
  return j;
}

std::string need_string(const ojson& j, const char* key) {
  if (!j.contains(key) || !j[key].is_string() || j[key].get<std::string>().empty())
    throw HttpError(400, "InvalidRequest", std::string("field '") + key + "' must be a non-empty string");
  return j[key].get<std::string>();
}

double need_number(const ojson& j, const char* key) {
  if (!j.contains(key) || !j[key].is_number())
    throw HttpError(400, "InvalidRequest", std::string("field '") + key + "' must be a number");
  return j[key].get<double>();
}

std::uint64_t parse_version(std::string s) {
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  std::uint64_t v = 0;
  auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || r.ec != std::errc() || r.ptr != s.data() + s.size())
    throw HttpError(400, "InvalidVersion", "version token '" + s + "' is not a pack version");
  return v;
}

// From the body's "version", the If-Match header or ?version=.
std::uint64_t expected_version(const ApiRequest& req, const ojson* body) {
  if (body && body->contains("version")) {
    const auto& v = (*body)["version"];
    if (v.is_number_unsigned() || v.is_number_integer()) return v.get<std::uint64_t>();
    if (v.is_string()) return parse_version(v.get<std::string>());
    throw HttpError(400, "InvalidVersion", "version must be an integer or a string");
  }
  if (auto it = req.headers.find("if-match"); it != req.headers.end()) return parse_version(it->second);
  if (auto it = req.query.find("version"); it != req.query.end()) return parse_version(it->second);
  throw HttpError(428, "VersionRequired", "rule edits need the current pack version (body, If-Match or ?version=)");
}

std::string actor_of(const ApiRequest& req) {
  auto it = req.headers.find("x-actor");
  return it == req.headers.end() ? "anonymous" : it->second;
}

ojson pack_json(const PackState& s, const std::vector<RuleDiagnostic>& warnings) {
  ojson j;
  j["id"] = s.pack.id;
  j["version"] = s.version;
  j["text"] = format_rule_pack(s.pack);
  j["rules"] = ojson::array();
  for (const auto& r : s.pack.rules) {
    ojson x;
    x["id"] = r.id;
    x["label"] = r.label;
    x["text"] = format_rule(r);
    j["rules"].push_back(x);
  }
  j["diagnostics"] = diagnostics_json(warnings);
  return j;
}

ApiResponse with_etag(ApiResponse r, std::uint64_t version) {
  r.headers["ETag"] = "\"" + std::to_string(version) + "\"";
  return r;
}

QName individual_name(const std::string& s, const NamespaceTable& ns) {
  try {
    return ns.resolve(s);
  } catch (const Error& e) {
    throw HttpError(400, "InvalidRequest", e.what());
  }
}

}  // namespace

ApiResponse Api::handle(const ApiRequest& req) {
  try {
    const auto seg = split_path(req.path);
    const std::string& m = req.method;
    const std::string actor = actor_of(req);
    const TBox& tbox = ws_.tbox();
    auto is = [&](std::initializer_list<const char*> parts) {
      if (seg.size() != parts.size()) return false;
      std::size_t i = 0;
      for (const char* p : parts) {
        if (std::string_view(p) != "*" && seg[i] != p) return false;
        ++i;
      }
      return true;
    };

    if (m == "GET" && is({"health"})) return json_response(200, ojson{{"status", "ok"}});

    if (is({"scenes"}) && m == "POST") {
      ojson body = body_json(req);
      ojson doc = body.contains("document") ? body["document"] : body;
      FusionConfig cfg = body.contains("config") ? parse_fusion_config(body["config"], tbox.namespaces) : ws_.config();
      std::vector<std::string> warnings;
      Scene scene = ingest_scene(parse_detection_document(doc, tbox, &warnings), cfg, tbox, &warnings);
      auto put = ws_.put_scene(scene, actor);
      ojson j;
      j["id"] = put.id;
      j["created"] = put.created;
      j["warnings"] = warnings;
      j["scene"] = scene_to_json(scene);
      return json_response(put.created ? 201 : 200, j);
    }
    if (is({"scenes", "*"}) && m == "GET") {
      auto s = ws_.scene(seg[1]);
      if (!s) throw HttpError(404, "NotFound", "no scene '" + seg[1] + "'");
      ojson j;
      j["id"] = seg[1];
      j["scene"] = scene_to_json(*s);
      return json_response(200, j);
    }
    if (is({"scenarios"}) && m == "POST") {
      ojson body = body_json(req);
      ojson doc = body.contains("document") ? body["document"] : body;
      FusionConfig cfg = body.contains("config") ? parse_fusion_config(body["config"], tbox.namespaces) : ws_.config();
      std::vector<std::string> warnings;
      Scenario sc = ingest_scenario(parse_scenario_document(doc, tbox, &warnings), cfg, tbox, &warnings);
      auto put = ws_.put_scenario(sc, actor);
      ojson j;
      j["id"] = put.id;
      j["created"] = put.created;
      j["warnings"] = warnings;
      j["scenario"] = scenario_to_json(sc);
      return json_response(put.created ? 201 : 200, j);
    }
    if (is({"scenarios", "*"}) && m == "GET") {
      auto s = ws_.scenario(seg[1]);
      if (!s) throw HttpError(404, "NotFound", "no scenario '" + seg[1] + "'");
      ojson j;
      j["id"] = seg[1];
      j["scenario"] = scenario_to_json(*s);
      return json_response(200, j);
    }

    if (is({"rules"}) && m == "GET") {
      ojson j;
      j["packs"] = ojson::array();
      for (const auto& id : ws_.pack_ids())
        if (auto s = ws_.pack(id)) j["packs"].push_back(ojson{{"id", id}, {"version", s->version}});
      return json_response(200, j);
    }
    if (is({"rules", "*"})) {
      const std::string& pid = seg[1];
      if (m == "GET") {
        auto s = ws_.pack(pid);
        if (!s) throw HttpError(404, "NotFound", "no rule pack '" + pid + "'");
        return with_etag(json_response(200, pack_json(*s, lint_pack(s->pack, tbox))), s->version);
      }
      if (m == "POST") {
        ojson body = body_json(req);
        auto r = ws_.create_pack(pid, need_string(body, "text"), actor);
        return with_etag(json_response(201, pack_json(r.state, r.warnings)), r.state.version);
      }
      if (m == "PUT") {
        ojson body = body_json(req);
        auto r = ws_.replace_pack(pid, need_string(body, "text"), expected_version(req, &body), actor);
        return with_etag(json_response(200, pack_json(r.state, r.warnings)), r.state.version);
      }
      if (m == "DELETE") {
        ws_.delete_pack(pid, expected_version(req, nullptr), actor);
        return json_response(200, ojson{{"id", pid}, {"deleted", true}});
      }
    }
    if (is({"rules", "*", "*"})) {
      const std::string &pid = seg[1], &rid = seg[2];
      if (m == "GET") {
        auto s = ws_.pack(pid);
        if (!s) throw HttpError(404, "NotFound", "no rule pack '" + pid + "'");
        const Rule* r = s->pack.find(rid);
        if (!r) throw HttpError(404, "NotFound", "no rule '" + rid + "' in pack '" + pid + "'");
        ojson j;
        j["id"] = r->id;
        j["label"] = r->label;
        j["text"] = format_rule(*r);
        j["packVersion"] = s->version;
        j["diagnostics"] = diagnostics_json(lint_rule(*r, tbox));
        return with_etag(json_response(200, j), s->version);
      }
      if (m == "PUT" || m == "POST") {
        ojson body = body_json(req);
        std::uint64_t expected = expected_version(req, &body);
        std::string label;
        if (body.contains("label") && body["label"].is_string()) label = body["label"].get<std::string>();
        auto current = ws_.pack(pid);
        if (m == "POST" && current && current->pack.find(rid))
          throw HttpError(409, "RuleExists", "rule '" + rid + "' already exists in pack '" + pid + "'");
        if (label.empty() && current)
          if (const Rule* old = current->pack.find(rid)) label = old->label;
        auto r = ws_.put_rule(pid, rid, label, need_string(body, "text"), expected, actor);
        return with_etag(json_response(m == "POST" ? 201 : 200, pack_json(r.state, r.warnings)), r.state.version);
      }
      if (m == "DELETE") {
        auto r = ws_.delete_rule(pid, rid, expected_version(req, nullptr), actor);
        return with_etag(json_response(200, pack_json(r.state, {})), r.state.version);
      }
    }

    if (is({"reports"}) && m == "POST") {
      ojson body = body_json(req);
      std::string pack = need_string(body, "packId");
      PutResult put;
      if (body.contains("scenarioId")) put = ws_.make_report("scenario", need_string(body, "scenarioId"), pack, actor);
      else put = ws_.make_report("scene", need_string(body, "sceneId"), pack, actor);
      ojson j;
      j["id"] = put.id;
      j["created"] = put.created;
      j["report"] = parse_json_text(*ws_.report(put.id));
      return json_response(put.created ? 201 : 200, j);
    }
    if (is({"reports", "*"}) && m == "GET") {
      auto bytes = ws_.report(seg[1]);
      if (!bytes) throw HttpError(404, "NotFound", "no report '" + seg[1] + "'");
      ojson j;
      j["id"] = seg[1];
      j["report"] = parse_json_text(*bytes);
      return json_response(200, j);
    }
    if (is({"reports", "*", "document"}) && m == "GET") {
      auto bytes = ws_.report(seg[1]);
      if (!bytes) throw HttpError(404, "NotFound", "no report '" + seg[1] + "'");
      return ApiResponse{200, "application/json", *bytes, {}};
    }

    if (is({"sweeps"}) && m == "POST") {
      ojson body = body_json(req);
      SweepSpec spec;
      spec.target = individual_name(need_string(body, "target"), tbox.namespaces);
      if (body.contains("occluder") && !body["occluder"].is_null())
        spec.occluder = individual_name(need_string(body, "occluder"), tbox.namespaces);
      spec.from = need_number(body, "from");
      spec.to = need_number(body, "to");
      spec.step = need_number(body, "step");
      std::string oracle = body.contains("oracle") ? need_string(body, "oracle") : "passthrough";
      if (oracle.rfind("exec:", 0) == 0 && !opts_.allow_exec_oracle)
        throw HttpError(400, "OracleNotAllowed", "exec oracles are disabled on this server");
      std::string pack = body.contains("packId") ? need_string(body, "packId") : shipped_pack().id;
      auto put = ws_.submit_sweep(need_string(body, "sceneId"), spec, oracle, pack, actor);
      auto job = ws_.sweep(put.id);
      ojson j;
      j["id"] = put.id;
      j["created"] = put.created;
      j["state"] = sweep_state_name(job ? job->state : SweepState::Queued);
      return json_response(202, j);
    }
    if (is({"sweeps", "*"}) && m == "GET") {
      auto job = ws_.sweep(seg[1]);
      if (!job) throw HttpError(404, "NotFound", "no sweep '" + seg[1] + "'");
      ojson j;
      j["id"] = job->id;
      j["state"] = sweep_state_name(job->state);
      j["request"] = job->request;
      j["report"] = job->report ? parse_json_text(*job->report) : ojson(nullptr);
      j["error"] = job->error ? ojson(*job->error) : ojson(nullptr);
      return json_response(200, j);
    }

    if (is({"export", "owl", "*"}) && m == "GET") {
      auto s = ws_.scene(seg[2]);
      if (!s) throw HttpError(404, "NotFound", "no scene '" + seg[2] + "'");
      auto q = req.query.find("pack");
      std::string pid = q == req.query.end() ? shipped_pack().id : q->second;
      auto p = ws_.pack(pid);
      if (!p) throw HttpError(404, "NotFound", "no rule pack '" + pid + "'");
      return ApiResponse{200, "application/owl+xml", export_owl(tbox, *s, p->pack), {}};
    }

    if (is({"audit"}) && m == "GET") {
      ojson j;
      j["records"] = ojson::array();
      for (const auto& r : ws_.audit()) j["records"].push_back(audit_record_to_json(r));
      return json_response(200, j);
    }
    if (is({"triage"}) && m == "POST") {
      ojson body = body_json(req);
      std::string report = need_string(body, "reportId");
      if (!ws_.report(report)) throw HttpError(404, "NotFound", "no report '" + report + "'");
      std::string verdict = need_string(body, "verdict");
      if (verdict != "confirmed" && verdict != "false-positive" && verdict != "needs-rule-fix")
        throw HttpError(400, "InvalidRequest", "verdict must be confirmed, false-positive or needs-rule-fix");
      ojson d;
      d["rule"] = need_string(body, "rule");
      d["binding"] = need_string(body, "binding");
      d["verdict"] = verdict;
      d["note"] = body.contains("note") && body["note"].is_string() ? body["note"] : ojson("");
      ws_.record(actor, "triage.verdict", report, d);
      return json_response(201, ojson{{"reportId", report}, {"recorded", true}});
    }

    throw HttpError(404, "NotFound", "no route for " + m + " " + req.path);
  } catch (const HttpError& e) {
    return error_response(e.status, e.code(), e.what(), e.details);
  } catch (const RuleError& e) {
    return error_response(400, e.code(), e.what(), ojson{{"diagnostics", diagnostics_json(e.diagnostics())}});
  } catch (const UnsupportedConstruct& e) {
    return error_response(400, e.code(), e.what(), ojson{{"constructs", e.constructs()}});
  } catch (const Error& e) {
    return error_response(status_for(e.code()), e.code(), e.what(), ojson::object());
  } catch (const std::exception& e) {
    return error_response(500, "InternalError", e.what(), ojson::object());
  }
}

bool serve(Api& api, const std::string& host, int port) {
  httplib::Server server;
  auto adapt = [&api](const httplib::Request& hreq, httplib::Response& hres) {
    ApiRequest req;
    req.method = hreq.method;
    req.path = hreq.path;
    req.body = hreq.body;
    for (const auto& [k, v] : hreq.params) req.query.emplace(k, v);
    for (const auto& [k, v] : hreq.headers) {
      std::string key = k;
      for (auto& c : key) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      req.headers.emplace(key, v);
    }
    ApiResponse res = api.handle(req);
    hres.status = res.status;
    for (const auto& [k, v] : res.headers) hres.set_header(k, v);
    hres.set_header("Access-Control-Allow-Origin", "*");
    hres.set_header("Access-Control-Expose-Headers", "ETag");
    hres.set_content(res.body, res.content_type);
  };
  const char* any = R"(/.*)";
  server.Get(any, adapt);
  server.Post(any, adapt);
  server.Put(any, adapt);
  server.Delete(any, adapt);
  server.Options(any, [](const httplib::Request&, httplib::Response& res) {
    res.set_header("Access-Control-Allow-Origin", "*");
    res.set_header("Access-Control-Allow-Methods", "GET, POST, PUT, DELETE, OPTIONS");
    res.set_header("Access-Control-Allow-Headers", "Content-Type, If-Match, X-Actor");
    res.status = 204;
  });
  return server.listen(host, port);
}

}  // namespace cairo
