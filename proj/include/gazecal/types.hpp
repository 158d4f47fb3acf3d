#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace gazecal {

enum class Component { pitch, yaw };

inline const char* component_name(Component c) {
  return c == Component::pitch ? "pitch" : "yaw";
}

// Valid angular ranges for ground-truth gaze angles, radians.
inline constexpr double kPitchBound = 1.5707963267948966;  // pi/2
inline constexpr double kYawBound = 3.141592653589793;     // pi

// A (pitch, yaw) angle pair in radians. Used both for labels and for point
// predictions; range validation happens at ingest, not here.
struct AngularPair {
  double pitch = 0.0;
  double yaw = 0.0;
};

// One Gaussian marginal (mean, variance) of a probabilistic prediction.
struct GaussianMarginal {
  double mean = 0.0;
  double variance = 1.0;
};

// Throws std::invalid_argument unless mean is finite and variance is a
// strictly positive finite value.
void validate(const GaussianMarginal& g);

// A labeled probabilistic prediction: independent Gaussian marginals for
// pitch and yaw plus the ground-truth angles.
struct LabeledPrediction {
  std::string id;
  GaussianMarginal pitch_marginal;
  GaussianMarginal yaw_marginal;
  AngularPair truth;

  const GaussianMarginal& marginal(Component c) const {
    return c == Component::pitch ? pitch_marginal : yaw_marginal;
  }
  double truth_of(Component c) const {
    return c == Component::pitch ? truth.pitch : truth.yaw;
  }
};

// Ordered collection of labeled predictions.
struct PredictionSet {
  std::vector<LabeledPrediction> samples;

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
};

// Column extraction for the batch kernels: mean, sigma (= sqrt variance) and
// ground truth of one component, in sample order.
struct ComponentColumns {
  std::vector<double> mean;
  std::vector<double> sigma;
  std::vector<double> truth;
};

ComponentColumns columns(const PredictionSet& set, Component c);

// One point of the recalibration dataset: a PIT value x, its empirical CDF
// level y and a positive weight.
struct WeightedPoint {
  double x = 0.0;
  double y = 0.0;
  double weight = 1.0;
};

// Two-point quantile prediction (the quantile-regression baseline): stored
// lower/upper quantiles per component plus the ground truth. Rows with
// crossing bounds are kept and flagged, never reordered.
struct QuantileRow {
  std::string id;
  double pitch_lo = 0.0;
  double pitch_hi = 0.0;
  double yaw_lo = 0.0;
  double yaw_hi = 0.0;
  AngularPair truth;

  bool crossed() const { return pitch_lo > pitch_hi || yaw_lo > yaw_hi; }
};

struct QuantileDump {
  std::vector<QuantileRow> rows;

  std::size_t size() const { return rows.size(); }
  std::size_t crossing_count() const {
    std::size_t n = 0;
    for (const auto& r : rows) n += r.crossed();
    return n;
  }
};

}  // namespace gazecal
