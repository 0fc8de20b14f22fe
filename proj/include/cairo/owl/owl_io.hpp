#pragma once

// OWL/XML subset writer and reader. Layout and canonical choices are
// documented in docs/OWL_SUBSET.md.

#include <functional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cairo/core/model.hpp"
#include "cairo/ingestion/ingestion.hpp"
#include "cairo/rules/rules.hpp"
#include "cairo/taxonomy/tbox.hpp"

namespace cairo {

// Lists every construct outside the subset that was found.
class UnsupportedConstruct : public Error {
 public:
  explicit UnsupportedConstruct(std::vector<std::string> constructs);
  const std::vector<std::string>& constructs() const { return constructs_; }

 private:
  std::vector<std::string> constructs_;
};

// Deterministic bytes: fixed section order, sorted within sections, rules in
// pack order. Throws UnsupportedConstruct for values the subset cannot carry.
std::string export_owl(const TBox& tbox, const Scene& scene, const RulePack& pack);

struct OwlImportOptions {
  bool lenient = false;  // unsupported constructs become warnings
};

struct OwlImport {
  TBox tbox;
  Scene scene;
  RulePack pack;
  std::vector<std::string> warnings;
};

// Throws XmlSyntaxError, UnsupportedConstruct (strict mode),
// Error("DanglingReference") and Error("InvalidOntology").
OwlImport import_owl(std::string_view bytes, OwlImportOptions opts = {});

// One document per scene plus a manifest:
//   scenario <iri>
//   scene <iri> time <decimal> file <name>
struct ScenarioOwlExport {
  std::string manifest;
  std::vector<std::pair<std::string, std::string>> documents;  // file name -> bytes
};

ScenarioOwlExport export_scenario_owl(const TBox& tbox, const Scenario& scenario, const RulePack& pack);

struct ScenarioOwlImport {
  TBox tbox;
  Scenario scenario;
  RulePack pack;
  std::vector<std::string> warnings;
};

// `load` returns the bytes of a file named in the manifest. Tracks are
// re-linked from the track ids carried by each individual.
ScenarioOwlImport import_scenario_owl(std::string_view manifest,
                                      const std::function<std::string(const std::string&)>& load,
                                      OwlImportOptions opts = {});

}  // namespace cairo
