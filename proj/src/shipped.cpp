#include "cairo/ingestion/documents.hpp"
#include "cairo/rules/rules.hpp"
#include "cairo/taxonomy/tbox.hpp"

namespace cairo {

namespace embedded {
std::string_view taxonomy_text();
std::string_view rule_pack_text();
std::string_view fusion_config_text();
}  // namespace embedded

std::string_view shipped_taxonomy_text() { return embedded::taxonomy_text(); }
std::string_view shipped_pack_text() { return embedded::rule_pack_text(); }

const TBox& shipped_taxonomy() {
  static const TBox tbox = parse_taxonomy(shipped_taxonomy_text());
  return tbox;
}

const RulePack& shipped_pack() {
  static const RulePack pack = parse_rule_pack(shipped_pack_text(), shipped_taxonomy());
  return pack;
}

const FusionConfig& shipped_fusion_config() {
  static const FusionConfig cfg =
      parse_fusion_config(parse_json_text(embedded::fusion_config_text()), shipped_taxonomy().namespaces);
  return cfg;
}

}  // namespace cairo
