#include <algorithm>
#include <cctype>
#include <cmath>

#include "cairo/ingestion/ingestion.hpp"

namespace cairo {

double overlap_area(const BBox& a, const BBox& b) {
  double w = std::min(a.right(), b.right()) - std::max(a.x, b.x);
  double h = std::min(a.bottom(), b.bottom()) - std::max(a.y, b.y);
  if (w <= 0 || h <= 0) return 0;
  return w * h;
}

double compute_iou(const BBox& a, const BBox& b) {
  double inter = overlap_area(a, b);
  double uni = a.area() + b.area() - inter;
  if (uni <= 0) return 0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

double quantize_rate(double r) {
  if (r <= 0) return 0;
  double q = std::round(r * 1e4) / 1e4;
  if (q <= 0) q = 1e-4;
  return std::min(q, 1.0);
}

std::string sanitize_label(std::string_view label) {
  std::string out;
  for (char c : label) {
    auto u = static_cast<unsigned char>(c);
    if (std::isalnum(u)) {
      out += static_cast<char>(std::tolower(u));
    } else if (!out.empty() && out.back() != '_') {
      out += '_';
    }
  }
  while (!out.empty() && out.back() == '_') out.pop_back();
  if (out.empty()) out = "object";
  if (std::isdigit(static_cast<unsigned char>(out.front()))) out = "obj_" + out;
  return out;
}

void FusionConfig::validate() const {
  auto check = [](double v, const char* name) {
    if (!(v > 0 && v <= 1)) throw Error("InvalidConfig", std::string(name) + " must lie in (0, 1]");
  };
  check(iou_merge_threshold, "iou_merge_threshold");
  check(near_threshold, "near_threshold");
  check(high_occlusion_threshold, "high_occlusion_threshold");
  check(part_of_containment, "part_of_containment");
  check(track_iou_threshold, "track_iou_threshold");
}

double FusionConfig::parameter(const std::string& name) const {
  if (name == "iou_merge_threshold") return iou_merge_threshold;
  if (name == "near_threshold") return near_threshold;
  if (name == "high_occlusion_threshold") return high_occlusion_threshold;
  if (name == "part_of_containment") return part_of_containment;
  if (name == "track_iou_threshold") return track_iou_threshold;
  throw Error("UnknownParameter", "no fusion parameter named '" + name + "'");
}

}  // namespace cairo
