#include "cairo/service/cli.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "cairo/fixtures/fixtures.hpp"
#include "cairo/ingestion/documents.hpp"
#include "cairo/owl/owl_io.hpp"
#include "cairo/owl/xml.hpp"
#include "cairo/reasoner/reasoner.hpp"
#include "cairo/service/api.hpp"
#include "cairo/service/store.hpp"
#include "cairo/validator/validator.hpp"

namespace cairo {

namespace {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

// Error tied to an input file, printed as file:line:col.
struct FileError : std::runtime_error {
  FileError(std::string file, int line, int col, std::string code, const std::string& msg)
      : std::runtime_error(msg), file(std::move(file)), line(line), col(col), code(std::move(code)) {}
  std::string file;
  int line, col;
  std::string code;
};

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error("FileNotFound", "cannot read '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void write_output(const std::string& path, const std::string& bytes, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << bytes;
    return;
  }
  fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream f(p, std::ios::binary | std::ios::trunc);
  f << bytes;
  if (!f) throw Error("WriteFailed", "cannot write '" + path + "'");
}

TBox load_taxonomy(const std::string& path) {
  if (path.empty()) return shipped_taxonomy();
  std::string text = read_file(path);
  try {
    return parse_taxonomy(text);
  } catch (const TaxonomyError& e) {
    const auto& d = e.diagnostics().front();
    throw FileError(path, d.line, d.col, d.code, d.message);
  }
}

FusionConfig load_config(const std::string& path, const TBox& tbox) {
  if (path.empty()) return shipped_fusion_config();
  return parse_fusion_config(parse_json_text(read_file(path)), tbox.namespaces);
}

RulePack load_pack(const std::string& path, const TBox& tbox) {
  if (path.empty()) return shipped_pack();
  std::string text = read_file(path);
  try {
    return parse_rule_pack(text, tbox);
  } catch (const RuleError& e) {
    const auto& d = e.diagnostics().front();
    throw FileError(path, d.line, d.col, d.code, d.message);
  }
}

// Anything with scenes or individuals: a detection/scenario document is
// ingested, an already-ingested scene/scenario is read as is.
struct Target {
  std::optional<Scene> scene;
  std::optional<Scenario> scenario;
  std::vector<std::string> warnings;
};

Target load_target(const std::string& path, const TBox& tbox, const FusionConfig& cfg) {
  ojson j = parse_json_text(read_file(path));
  Target t;
  if (!j.is_object()) throw Error("InvalidDocument", path + ": expected a JSON object");
  if (j.contains("records")) {
    t.scene = ingest_scene(parse_detection_document(j, tbox, &t.warnings), cfg, tbox, &t.warnings);
  } else if (j.contains("individuals")) {
    t.scene = scene_from_json(j, tbox.namespaces);
  } else if (j.contains("scenes") && j["scenes"].is_array() && !j["scenes"].empty() &&
             j["scenes"][0].contains("records")) {
    t.scenario = ingest_scenario(parse_scenario_document(j, tbox, &t.warnings), cfg, tbox, &t.warnings);
  } else if (j.contains("scenes")) {
    t.scenario = scenario_from_json(j, tbox.namespaces);
  } else {
    throw Error("InvalidDocument", path + ": not a detection, scenario or scene document");
  }
  return t;
}

void print_warnings(const std::vector<std::string>& ws, std::ostream& err) {
  for (const auto& w : ws) err << "warning: " << w << "\n";
}

QName parse_individual(const std::string& s, const TBox& tbox) { return tbox.namespaces.resolve(s); }

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Scene knowledge graphs, critical-phenomenon rules and counterfactual sweeps"};
  app.name("cairo");
  app.require_subcommand(1);

  std::string taxonomy, config, pack_file, scene_file, out_file, in_file;
  bool timings = false, lenient = false;

  auto add_common = [&](CLI::App* sub, bool with_pack) {
    sub->add_option("--taxonomy", taxonomy, "taxonomy file (default: shipped 6LM-lite)");
    sub->add_option("--config", config, "FusionConfig JSON (default: shipped)");
    if (with_pack) sub->add_option("--pack", pack_file, "rule pack file (default: shipped CP pack)");
  };

  auto* ingest = app.add_subcommand("ingest", "detection or scenario document -> scene/scenario JSON");
  ingest->add_option("--scene", scene_file, "detection or scenario document")->required();
  ingest->add_option("--out", out_file, "output file (default: stdout)");
  add_common(ingest, false);

  auto* reason = app.add_subcommand("reason", "run the CP suite; exit 1 when CPs fire or findings exist");
  reason->add_option("--scene", scene_file, "scene, scenario or detection document")->required();
  reason->add_option("--out", out_file, "report file (default: stdout)");
  reason->add_flag("--timings", timings, "record elapsed_ms in the report");
  add_common(reason, true);

  std::string expr, mode = "cwa";
  auto* query = app.add_subcommand("query", "DL class-expression query over a scene");
  query->add_option("--scene", scene_file, "scene or detection document")->required();
  query->add_option("--expr", expr, "class expression, e.g. \"l4_d:Passenger_Car and not (phys:has_part some l4_d:License_Plate)\"")
      ->required();
  query->add_option("--mode", mode, "cwa or owa")->check(CLI::IsMember({"cwa", "owa"}));
  add_common(query, false);

  auto* exp = app.add_subcommand("export-owl", "scene (or scenario) -> OWL/XML");
  exp->add_option("--scene", scene_file, "scene, scenario or detection document")->required();
  exp->add_option("--out", out_file, "OWL file, or manifest file for a scenario")->required();
  add_common(exp, true);

  std::string pack_out;
  auto* imp = app.add_subcommand("import-owl", "OWL/XML (or scenario manifest) -> scene JSON + rule pack");
  imp->add_option("--in", in_file, "OWL/XML document or scenario manifest")->required();
  imp->add_option("--out", out_file, "scene/scenario JSON output (default: stdout)");
  imp->add_option("--pack-out", pack_out, "write the embedded rule pack here");
  imp->add_flag("--lenient", lenient, "downgrade unsupported constructs to warnings");

  std::string target, occluder, oracle = "passthrough";
  double from = 0, to = 0, step = 0;
  unsigned workers = 1;
  auto* sweep = app.add_subcommand("sweep", "occlusion sweep of one individual");
  sweep->add_option("--scene", scene_file, "scene or detection document")->required();
  sweep->add_option("--target", target, "occluded individual")->required();
  sweep->add_option("--occluder", occluder, "individual to rescale (default: largest nearer overlap)");
  sweep->add_option("--from", from, "first occlusion rate")->required();
  sweep->add_option("--to", to, "last occlusion rate")->required();
  sweep->add_option("--step", step, "grid step")->required();
  sweep->add_option("--oracle", oracle, "passthrough | table:LO:HI,... | exec:CMD");
  sweep->add_option("--workers", workers, "worker threads")->check(CLI::Range(1u, 64u));
  sweep->add_option("--out", out_file, "sweep report (default: stdout)");
  add_common(sweep, true);

  auto* lint = app.add_subcommand("lint", "parse and lint a rule pack; exit 1 on diagnostics");
  lint->add_option("--pack", pack_file, "rule pack file")->required();
  lint->add_option("--taxonomy", taxonomy, "taxonomy file (default: shipped 6LM-lite)");

  std::uint64_t seed = 0;
  std::string out_dir = "fixtures";
  bool expected = false;
  auto* gen = app.add_subcommand("gen-fixtures", "write the fixture corpus for a seed");
  gen->add_option("--seed", seed, "0 is the canonical corpus");
  gen->add_option("--out", out_dir, "output directory");
  gen->add_flag("--expected", expected, "also write expected/<name>.report.json and CORPUS_SHA256");

  std::string host = "127.0.0.1", workspace;
  int port = 8080;
  bool allow_exec = false;
  auto* serve_cmd = app.add_subcommand("serve", "HTTP API over a workspace directory");
  serve_cmd->add_option("--host", host, "bind address");
  serve_cmd->add_option("--port", port, "port");
  serve_cmd->add_option("--workspace", workspace, "store root (default: $CAIRO_WORKSPACE or ./workspace)");
  serve_cmd->add_option("--workers", workers, "sweep worker threads")->check(CLI::Range(1u, 64u));
  serve_cmd->add_flag("--allow-exec-oracle", allow_exec, "permit exec: oracles in sweep requests");
  add_common(serve_cmd, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (ingest->parsed()) {
      TBox tbox = load_taxonomy(taxonomy);
      FusionConfig cfg = load_config(config, tbox);
      Target t = load_target(scene_file, tbox, cfg);
      print_warnings(t.warnings, err);
      write_output(out_file, dump_document(t.scene ? scene_to_json(*t.scene) : scenario_to_json(*t.scenario)), out);
      return 0;
    }
    if (reason->parsed()) {
      TBox tbox = load_taxonomy(taxonomy);
      FusionConfig cfg = load_config(config, tbox);
      RulePack pack = load_pack(pack_file, tbox);
      Target t = load_target(scene_file, tbox, cfg);
      print_warnings(t.warnings, err);
      SuiteOptions opts{timings};
      CpReport r = t.scene ? run_cp_suite(pack, *t.scene, tbox, opts) : run_cp_suite(pack, *t.scenario, tbox, opts);
      write_output(out_file, dump_document(cp_report_to_json(r)), out);
      for (const auto& rr : r.rules)
        if (rr.error) err << "error: rule " << rr.id << ": " << *rr.error << "\n";
      return r.fired().empty() && r.consistency.empty() ? 0 : 1;
    }
    if (query->parsed()) {
      TBox tbox = load_taxonomy(taxonomy);
      FusionConfig cfg = load_config(config, tbox);
      Target t = load_target(scene_file, tbox, cfg);
      if (!t.scene) throw Error("InvalidDocument", "query needs a single scene");
      auto graph = realize(*t.scene, tbox);
      auto result = dl_query(parse_class_expression(expr, tbox), graph, mode == "cwa" ? WorldMode::Closed : WorldMode::Open);
      ojson j;
      j["expression"] = expr;
      j["mode"] = mode;
      j["individuals"] = ojson::array();
      for (const auto& q : result) j["individuals"].push_back(q.str());
      out << dump_document(j);
      return 0;
    }
    if (exp->parsed()) {
      TBox tbox = load_taxonomy(taxonomy);
      FusionConfig cfg = load_config(config, tbox);
      RulePack pack = load_pack(pack_file, tbox);
      Target t = load_target(scene_file, tbox, cfg);
      if (t.scene) {
        write_output(out_file, export_owl(tbox, *t.scene, pack), out);
      } else {
        auto ex = export_scenario_owl(tbox, *t.scenario, pack);
        fs::path base = fs::path(out_file).parent_path();
        for (const auto& [name, bytes] : ex.documents) write_output((base / name).string(), bytes, out);
        write_output(out_file, ex.manifest, out);
      }
      return 0;
    }
    if (imp->parsed()) {
      std::string bytes = read_file(in_file);
      OwlImportOptions opts{lenient};
      std::vector<std::string> warnings;
      std::string doc;
      RulePack pack;
      if (bytes.rfind("scenario ", 0) == 0) {
        fs::path base = fs::path(in_file).parent_path();
        auto im = import_scenario_owl(bytes, [&](const std::string& name) { return read_file((base / name).string()); }, opts);
        warnings = im.warnings;
        doc = dump_document(scenario_to_json(im.scenario));
        pack = im.pack;
      } else {
        auto im = import_owl(bytes, opts);
        warnings = im.warnings;
        doc = dump_document(scene_to_json(im.scene));
        pack = im.pack;
      }
      print_warnings(warnings, err);
      write_output(out_file, doc, out);
      if (!pack_out.empty()) write_output(pack_out, format_rule_pack(pack), out);
      return 0;
    }
    if (sweep->parsed()) {
      TBox tbox = load_taxonomy(taxonomy);
      FusionConfig cfg = load_config(config, tbox);
      RulePack pack = load_pack(pack_file, tbox);
      Target t = load_target(scene_file, tbox, cfg);
      if (!t.scene) throw Error("InvalidDocument", "sweep needs a single scene");
      SweepSpec spec{parse_individual(target, tbox), std::nullopt, from, to, step};
      if (!occluder.empty()) spec.occluder = parse_individual(occluder, tbox);
      auto orc = parse_oracle(oracle);
      SweepReport r = run_sweep(*t.scene, spec, *orc, pack, tbox, cfg, workers);
      write_output(out_file, dump_document(sweep_report_to_json(r)), out);
      for (const auto& p : r.points)
        if (p.error) err << "warning: " << format_decimal(p.value, false) << ": " << *p.error << "\n";
      return 0;
    }
    if (lint->parsed()) {
      TBox tbox = load_taxonomy(taxonomy);
      RulePack pack = load_pack(pack_file, tbox);
      auto diags = lint_pack(pack, tbox);
      for (const auto& d : diags)
        err << pack_file << ":" << d.line << ":" << d.col << ": " << d.severity << " " << d.code << ": " << d.message
            << (d.rule_id.empty() ? "" : " [" + d.rule_id + "]") << "\n";
      out << pack.rules.size() << " rules, " << diags.size() << " diagnostics\n";
      return diags.empty() ? 0 : 1;
    }
    if (gen->parsed()) {
      auto files = generate_fixtures(seed);
      std::string corpus;
      for (const auto& [name, bytes] : files) {
        write_output((fs::path(out_dir) / name).string(), bytes, out);
        corpus += name + "\n" + bytes;
      }
      if (expected) {
        const TBox& tbox = shipped_taxonomy();
        const FusionConfig& cfg = shipped_fusion_config();
        for (const auto& e : fixture_entries()) {
          ojson j = parse_json_text(files.at(e.name + ".json"));
          CpReport r = e.kind == FixtureKind::Scene
                           ? run_cp_suite(shipped_pack(), ingest_scene(parse_detection_document(j, tbox), cfg, tbox), tbox)
                           : run_cp_suite(shipped_pack(),
                                          ingest_scenario(parse_scenario_document(j, tbox), cfg, tbox), tbox);
          write_output((fs::path(out_dir) / "expected" / (e.name + ".report.json")).string(),
                       dump_document(cp_report_to_json(r)), out);
        }
        write_output((fs::path(out_dir) / "CORPUS_SHA256").string(), sha256_hex(corpus) + "\n", out);
      }
      out << "wrote " << files.size() << " fixture files to " << out_dir << "\n";
      return 0;
    }
    if (serve_cmd->parsed()) {
      TBox tbox = load_taxonomy(taxonomy);
      FusionConfig cfg = load_config(config, tbox);
      if (workspace.empty()) {
        const char* env = std::getenv("CAIRO_WORKSPACE");
        workspace = env && *env ? env : "workspace";
      }
      Workspace ws(std::make_unique<DirectoryStore>(workspace), tbox, cfg, workers);
      Api api(ws, ApiOptions{allow_exec});
      err << "serving " << workspace << " on http://" << host << ":" << port << "\n";
      if (!serve(api, host, port)) throw Error("BindFailed", "cannot listen on " + host + ":" + std::to_string(port));
      return 0;
    }
  } catch (const FileError& e) {
    err << e.file << ":" << e.line << ":" << e.col << ": error " << e.code << ": " << e.what() << "\n";
    return 2;
  } catch (const RuleError& e) {
    for (const auto& d : e.diagnostics())
      err << "error " << d.code << " at " << d.line << ":" << d.col << ": " << d.message << "\n";
    return 2;
  } catch (const XmlSyntaxError& e) {
    err << in_file << ": error " << e.code() << ": " << e.what() << "\n";
    return 2;
  } catch (const UnsupportedConstruct& e) {
    err << "error " << e.code() << ": " << e.what() << "\n";
    for (const auto& c : e.constructs()) err << "  " << c << "\n";
    return 2;
  } catch (const Error& e) {
    err << "error " << e.code() << ": " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}

}  // namespace cairo
