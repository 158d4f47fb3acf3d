#include "gazecal/calibration.hpp"

#include <algorithm>
#include <stdexcept>

#include "gazecal/errors.hpp"
#include "gazecal/kernels/kernels.hpp"
#include "gazecal/normal.hpp"

namespace gazecal {

std::vector<double> pit_values(const PredictionSet& set, Component c) {
  if (set.empty()) {
    throw std::invalid_argument("pit_values: empty prediction set");
  }
  for (const auto& s : set.samples) validate(s.marginal(c));
  const ComponentColumns cols = columns(set, c);
  std::vector<double> out(set.size());
  kernels::normal_pit(cols.truth, cols.mean, cols.sigma, out);
  return out;
}

std::vector<WeightedPoint> build_recalibration_points(std::span<const double> pits) {
  if (pits.size() < 2) {
    throw insufficient_data_error("build_recalibration_points: need at least 2 PIT values");
  }
  std::vector<double> sorted(pits.begin(), pits.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  std::vector<WeightedPoint> points;
  points.reserve(sorted.size());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    points.push_back({sorted[i], static_cast<double>(i + 1) / (n + 1.0), 1.0});
  }
  return points;
}

CalibratedPredictor fit_calibrator(const PredictionSet& calibration_set) {
  if (calibration_set.size() < kMinCalibrationSize) {
    throw insufficient_data_error("fit_calibrator: calibration set has " +
                                  std::to_string(calibration_set.size()) +
                                  " samples, need at least " +
                                  std::to_string(kMinCalibrationSize));
  }
  auto fit_component = [&](Component c) {
    const auto pits = pit_values(calibration_set, c);
    const auto points = build_recalibration_points(pits);
    return pava_fit(points);
  };
  return CalibratedPredictor{fit_component(Component::pitch), fit_component(Component::yaw),
                             calibration_set.size()};
}

double calibrated_quantile(const CalibratedPredictor& cp, const LabeledPrediction& s,
                           Component c, double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::domain_error("calibrated_quantile: p must lie strictly inside (0, 1)");
  }
  const double adjusted = std::clamp(cp.map(c).invert(p), 1e-9, 1.0 - 1e-9);
  return gaussian_quantile(s.marginal(c), adjusted);
}

AngularPair calibrated_median(const CalibratedPredictor& cp, const LabeledPrediction& s) {
  return AngularPair{calibrated_quantile(cp, s, Component::pitch, 0.5),
                     calibrated_quantile(cp, s, Component::yaw, 0.5)};
}

}  // namespace gazecal
