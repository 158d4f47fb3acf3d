#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "gazecal/isotonic.hpp"
#include "gazecal/types.hpp"

namespace gazecal {

// Per-component calibration maps fitted from a held-out subset. Immutable;
// share freely across threads.
struct CalibratedPredictor {
  MonotoneMap pitch_map;
  MonotoneMap yaw_map;
  std::size_t n_calibration = 0;

  const MonotoneMap& map(Component c) const {
    return c == Component::pitch ? pitch_map : yaw_map;
  }
};

// Probability integral transform of each sample's ground truth under its
// predicted marginal, in input order.
std::vector<double> pit_values(const PredictionSet& set, Component c);

// Pairs each sorted PIT value u_(i) with its empirical CDF level i/(n+1).
// Requires n >= 2 (throws insufficient_data_error).
std::vector<WeightedPoint> build_recalibration_points(std::span<const double> pits);

// Fits one isotonic map per component, each from that component's PIT values
// alone. Requires at least kMinCalibrationSize samples.
inline constexpr std::size_t kMinCalibrationSize = 10;
CalibratedPredictor fit_calibrator(const PredictionSet& calibration_set);

// Quantile of the corrected distribution: the Gaussian quantile evaluated at
// the error-adjusted probability (the map's inverse, clamped away from the
// endpoints by 1e-9). p must lie strictly inside (0, 1).
double calibrated_quantile(const CalibratedPredictor& cp, const LabeledPrediction& s,
                           Component c, double p);

// Point estimate after calibration: the corrected median per component.
AngularPair calibrated_median(const CalibratedPredictor& cp, const LabeledPrediction& s);

}  // namespace gazecal
