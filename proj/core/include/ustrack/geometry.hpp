#pragma once

#include <array>
#include <map>
#include <string>

#include "ustrack/annotstore.hpp"
#include "ustrack/media.hpp"
#include "ustrack/types.hpp"

namespace ustrack {

/// Per-frame scalar derived from tracked points. Frames where a source point
/// is missing are absent, never zero.
struct MetricSeries {
  std::string name;
  std::string unit;  // "mm", "1", "deg", "mm2"
  std::map<int, double> values;
};

/// Two points in mm space: pixel coordinates scaled per axis.
Point2 to_mm(Point2 p, const Calibration& cal);
double distance_mm(Point2 a, Point2 b, const Calibration& cal);

MetricSeries distance_series(const AnnotationLayer& layer, const std::string& label_a,
                             const std::string& label_b, const Calibration& cal);

/// (L - L0) / L0 with L0 = distance.values[t0]. Throws ContractError when L0
/// is missing or not positive.
MetricSeries deformation_series(const MetricSeries& distance, int t0);

/// Shoelace area (mm^2) of the polygon through `labels` in order.
MetricSeries area_series(const AnnotationLayer& layer, const std::vector<std::string>& labels,
                         const Calibration& cal);

/// Intersection of the infinite lines p1p2 and q1q2. Throws GeometryError for
/// degenerate or parallel lines.
Point2 line_intersection(Point2 p1, Point2 p2, Point2 q1, Point2 q2);

/// Labels locating the aponeuroses and one fascicle. lower[0] is where the
/// fascicle meets the lower aponeurosis; fascicle_dir is a second point on it.
struct FascicleModel {
  std::array<std::string, 2> upper;
  std::array<std::string, 2> lower;
  std::string fascicle_dir;

  void validate() const;
};

struct FascicleMetrics {
  double length_mm = 0.0;
  double pennation_deg = 0.0;
};

/// Fascicle length between its intersections with both aponeuroses and the
/// acute angle to the lower aponeurosis, both in mm space.
FascicleMetrics fascicle_metrics(Point2 upper1, Point2 upper2, Point2 lower1, Point2 lower2,
                                 Point2 fascicle_dir, const Calibration& cal);
FascicleMetrics fascicle_metrics(const AnnotationLayer& layer, const FascicleModel& model, int frame,
                                 const Calibration& cal);

/// Length and pennation series over every frame with all five points present.
std::pair<MetricSeries, MetricSeries> fascicle_series(const AnnotationLayer& layer,
                                                      const FascicleModel& model,
                                                      const Calibration& cal);

/// CSV with header `frame,time_s,<name>...`; one row per frame present in any
/// series, empty cells where a series lacks the frame.
std::string metrics_to_csv(const std::vector<MetricSeries>& series, double fps);
/// JSON mirror: {"fps":..,"metrics":{name:{"unit":..,"values":[[frame,time_s,value],...]}}}.
std::string metrics_to_json(const std::vector<MetricSeries>& series, double fps);

}  // namespace ustrack
