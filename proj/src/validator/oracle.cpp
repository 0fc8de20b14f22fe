#include <cerrno>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include "cairo/ingestion/documents.hpp"
#include "cairo/validator/validator.hpp"

namespace cairo {

namespace {

const QName kOcclusionRate{"perc", "occlusion_rate"};

std::map<QName, double> occlusion_rates(const Scene& scene) {
  std::map<QName, double> out;
  for (const auto& a : scene.assertions)
    if (auto* r = std::get_if<RoleAssertion>(&a))
      if (r->role == kOcclusionRate && !r->is_object() && r->literal().is_numeric())
        out.emplace(r->subject, r->literal().as_number());
  return out;
}

double parse_number(std::string_view s, const std::string& what) {
  double d = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), d);
  if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw Error("InvalidOracle", what + ": '" + std::string(s) + "' is not a number");
  return d;
}

}  // namespace

std::map<QName, Verdict> PassthroughOracle::detect(const Scene& scene) const {
  std::map<QName, Verdict> out;
  for (const auto& ind : scene.individuals) out[ind.id] = Verdict{true, ind.segment.confidence};
  return out;
}

TableOracle::TableOracle(std::vector<std::pair<double, double>> intervals) : intervals_(std::move(intervals)) {
  for (const auto& [lo, hi] : intervals_)
    if (!(lo <= hi)) throw Error("InvalidOracle", "interval bounds out of order");
}

std::map<QName, Verdict> TableOracle::detect(const Scene& scene) const {
  auto rates = occlusion_rates(scene);
  std::map<QName, Verdict> out;
  for (const auto& ind : scene.individuals) {
    auto it = rates.find(ind.id);
    double rate = it == rates.end() ? 0 : it->second;
    bool hit = false;
    for (const auto& [lo, hi] : intervals_) hit = hit || (rate >= lo && rate <= hi);
    out[ind.id] = Verdict{hit, hit ? ind.segment.confidence : 0};
  }
  return out;
}

std::string TableOracle::spec() const {
  std::string s = "table:";
  for (std::size_t i = 0; i < intervals_.size(); ++i)
    s += (i ? "," : "") + format_decimal(intervals_[i].first, false) + ":" + format_decimal(intervals_[i].second, false);
  return s;
}

std::map<QName, Verdict> ExecOracle::detect(const Scene& scene) const {
  char path[] = "/tmp/cairo-oracle-XXXXXX";
  int fd = mkstemp(path);
  if (fd < 0) throw Error("OracleFailed", "cannot create a temporary file");
  close(fd);
  {
    std::ofstream f(path, std::ios::binary);
    f << dump_document(scene_to_json(scene));
  }
  std::string cmd = "(" + command_ + ") < '" + path + "'";
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) {
    std::remove(path);
    throw Error("OracleFailed", "cannot start '" + command_ + "'");
  }
  std::string output;
  char buf[4096];
  for (std::size_t n; (n = fread(buf, 1, sizeof buf, pipe)) > 0;) output.append(buf, n);
  int status = pclose(pipe);
  std::remove(path);
  if (status != 0) throw Error("OracleFailed", "'" + command_ + "' exited with status " + std::to_string(status));

  std::map<QName, Verdict> out;
  for (const auto& ind : scene.individuals) out[ind.id] = Verdict{false, 0};
  std::istringstream in(output);
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    std::istringstream ls(line);
    std::string id, flag, conf, extra;
    if (!(ls >> id)) continue;
    if (!(ls >> flag >> conf) || (ls >> extra) || (flag != "0" && flag != "1"))
      throw Error("OracleFailed", "oracle output line " + std::to_string(number) + " malformed: " + line);
    QName q = id.find(':') == std::string::npos ? QName{"", id} : QName{id.substr(0, id.find(':')), id.substr(id.find(':') + 1)};
    if (!scene.find(q)) throw Error("OracleFailed", "oracle reported unknown individual '" + id + "'");
    out[q] = Verdict{flag == "1", parse_number(conf, "oracle confidence")};
  }
  return out;
}

std::vector<std::pair<double, double>> parse_table_spec(const std::string& table) {
  std::vector<std::pair<double, double>> out;
  std::size_t pos = 0;
  while (pos <= table.size()) {
    std::size_t comma = table.find(',', pos);
    std::string part = table.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    auto colon = part.find(':');
    if (colon == std::string::npos) throw Error("InvalidOracle", "table interval '" + part + "' needs lo:hi");
    out.emplace_back(parse_number(part.substr(0, colon), "table bound"), parse_number(part.substr(colon + 1), "table bound"));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

std::unique_ptr<DetectorOracle> parse_oracle(const std::string& spec) {
  if (spec == "passthrough") return std::make_unique<PassthroughOracle>();
  if (spec.rfind("table:", 0) == 0) return std::make_unique<TableOracle>(parse_table_spec(spec.substr(6)));
  if (spec.rfind("exec:", 0) == 0 && spec.size() > 5) return std::make_unique<ExecOracle>(spec.substr(5));
  throw Error("InvalidOracle", "oracle must be passthrough, table:SPEC or exec:CMD (got '" + spec + "')");
}

}  // namespace cairo
