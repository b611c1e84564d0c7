#include "ustrack/geometry.hpp"

#include <cmath>
#include <numbers>
#include <set>

#include <json.hpp>

#include "number_format.hpp"
#include "ustrack/error.hpp"

namespace ustrack {

namespace {

double cross(Point2 a, Point2 b) { return a.x * b.y - a.y * b.x; }
double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }

const Point2* find_point(const AnnotationLayer& layer, const std::string& label, int frame) {
  auto it = layer.labels.find(label);
  if (it == layer.labels.end()) return nullptr;
  auto pt = it->second.find(frame);
  return pt == it->second.end() ? nullptr : &pt->second;
}

}  // namespace

Point2 to_mm(Point2 p, const Calibration& cal) { return {p.x * cal.mm_per_px_x, p.y * cal.mm_per_px_y}; }

double distance_mm(Point2 a, Point2 b, const Calibration& cal) {
  const double dx = (a.x - b.x) * cal.mm_per_px_x;
  const double dy = (a.y - b.y) * cal.mm_per_px_y;
  return std::sqrt(dx * dx + dy * dy);
}

MetricSeries distance_series(const AnnotationLayer& layer, const std::string& label_a,
                             const std::string& label_b, const Calibration& cal) {
  cal.validate();
  const Trajectory& a = label_or_throw(layer, label_a);
  const Trajectory& b = label_or_throw(layer, label_b);
  MetricSeries out{"dist_" + label_a + "_" + label_b, "mm", {}};
  for (const auto& [f, pa] : a) {
    if (auto it = b.find(f); it != b.end()) out.values[f] = distance_mm(pa, it->second, cal);
  }
  return out;
}

MetricSeries deformation_series(const MetricSeries& distance, int t0) {
  auto ref = distance.values.find(t0);
  if (ref == distance.values.end()) {
    throw ContractError("deformation: reference frame " + std::to_string(t0) + " has no value in '" +
                        distance.name + "'");
  }
  const double l0 = ref->second;
  if (!(l0 > 0.0)) {
    throw ContractError("deformation: reference length at frame " + std::to_string(t0) +
                        " must be > 0");
  }
  MetricSeries out{"strain_" + distance.name, "1", {}};
  for (const auto& [f, l] : distance.values) out.values[f] = (l - l0) / l0;
  return out;
}

MetricSeries area_series(const AnnotationLayer& layer, const std::vector<std::string>& labels,
                         const Calibration& cal) {
  cal.validate();
  if (labels.size() < 3) throw ContractError("area needs at least 3 labels");
  for (const auto& l : labels) label_or_throw(layer, l);
  MetricSeries out{"area", "mm2", {}};
  for (const auto& [f, p0] : layer.labels.at(labels.front())) {
    std::vector<Point2> poly;
    for (const auto& l : labels) {
      const Point2* p = find_point(layer, l, f);
      if (!p) break;
      poly.push_back(to_mm(*p, cal));
    }
    if (poly.size() != labels.size()) continue;
    double twice = 0.0;
    for (std::size_t i = 0; i < poly.size(); ++i) twice += cross(poly[i], poly[(i + 1) % poly.size()]);
    out.values[f] = std::abs(twice) / 2.0;
  }
  return out;
}

Point2 line_intersection(Point2 p1, Point2 p2, Point2 q1, Point2 q2) {
  const Point2 d1 = p2 - p1, d2 = q2 - q1;
  const double n1 = norm(d1), n2 = norm(d2);
  if (!(n1 > 0.0) || !(n2 > 0.0)) throw GeometryError("degenerate line: endpoints coincide");
  if (std::abs(cross(d1 * (1.0 / n1), d2 * (1.0 / n2))) <= 1e-9) {
    throw GeometryError("lines are parallel; no unique intersection");
  }
  const double t = cross(q1 - p1, d2) / cross(d1, d2);
  return p1 + t * d1;
}

void FascicleModel::validate() const {
  const std::set<std::string> ids{upper[0], upper[1], lower[0], lower[1], fascicle_dir};
  if (ids.size() != 5) throw ContractError("fascicle model needs five distinct labels");
}

FascicleMetrics fascicle_metrics(Point2 upper1, Point2 upper2, Point2 lower1, Point2 lower2,
                                 Point2 fascicle_dir, const Calibration& cal) {
  cal.validate();
  const Point2 u1 = to_mm(upper1, cal), u2 = to_mm(upper2, cal);
  const Point2 l1 = to_mm(lower1, cal), l2 = to_mm(lower2, cal);
  const Point2 f = to_mm(fascicle_dir, cal);

  const Point2 top = line_intersection(l1, f, u1, u2);
  const Point2 bottom = line_intersection(l1, f, l1, l2);
  const Point2 df = f - l1, dl = l2 - l1;
  const double angle = std::atan2(std::abs(cross(df, dl)), std::abs(dot(df, dl)));
  return {norm(top - bottom), angle * 180.0 / std::numbers::pi};
}

FascicleMetrics fascicle_metrics(const AnnotationLayer& layer, const FascicleModel& model, int frame,
                                 const Calibration& cal) {
  model.validate();
  auto need = [&](const std::string& id) {
    label_or_throw(layer, id);
    const Point2* p = find_point(layer, id, frame);
    if (!p) {
      throw ContractError("fascicle: label '" + id + "' has no point at frame " +
                          std::to_string(frame));
    }
    return *p;
  };
  return fascicle_metrics(need(model.upper[0]), need(model.upper[1]), need(model.lower[0]),
                          need(model.lower[1]), need(model.fascicle_dir), cal);
}

std::pair<MetricSeries, MetricSeries> fascicle_series(const AnnotationLayer& layer,
                                                      const FascicleModel& model,
                                                      const Calibration& cal) {
  model.validate();
  const std::array<const std::string*, 5> ids{&model.upper[0], &model.upper[1], &model.lower[0],
                                               &model.lower[1], &model.fascicle_dir};
  for (const auto* id : ids) label_or_throw(layer, *id);
  MetricSeries length{"fascicle_length", "mm", {}};
  MetricSeries pennation{"pennation_angle", "deg", {}};
  for (const auto& [f, p] : layer.labels.at(model.lower[0])) {
    bool complete = true;
    for (const auto* id : ids) complete = complete && find_point(layer, *id, f) != nullptr;
    if (!complete) continue;
    const FascicleMetrics m = fascicle_metrics(layer, model, f, cal);
    length.values[f] = m.length_mm;
    pennation.values[f] = m.pennation_deg;
  }
  return {length, pennation};
}

std::string metrics_to_csv(const std::vector<MetricSeries>& series, double fps) {
  std::set<int> frames;
  for (const auto& s : series) {
    for (const auto& [f, v] : s.values) frames.insert(f);
  }
  std::string out = "frame,time_s";
  for (const auto& s : series) out += "," + s.name;
  out += "\n";
  for (int f : frames) {
    out += std::to_string(f) + "," + detail::shortest(f / fps);
    for (const auto& s : series) {
      out += ",";
      if (auto it = s.values.find(f); it != s.values.end()) out += detail::shortest(it->second);
    }
    out += "\n";
  }
  return out;
}

std::string metrics_to_json(const std::vector<MetricSeries>& series, double fps) {
  nlohmann::ordered_json j;
  j["fps"] = fps;
  j["metrics"] = nlohmann::ordered_json::object();
  for (const auto& s : series) {
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const auto& [f, v] : s.values) rows.push_back({f, f / fps, v});
    j["metrics"][s.name] = {{"unit", s.unit}, {"values", rows}};
  }
  return j.dump(2) + "\n";
}

}  // namespace ustrack
