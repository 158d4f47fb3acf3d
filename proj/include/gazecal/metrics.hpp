#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "gazecal/calibration.hpp"
#include "gazecal/types.hpp"

namespace gazecal {

// Per-sample, per-component quantile query, filled in batch for a fixed
// probability level. Implementations must be monotone in p for every sample.
class QuantileFunction {
public:
  virtual ~QuantileFunction() = default;
  virtual std::size_t size() const = 0;
  virtual void quantiles(Component c, double p, std::span<double> out) const = 0;
};

// Uncalibrated Gaussian quantiles of a prediction set.
class GaussianQuantiles : public QuantileFunction {
public:
  explicit GaussianQuantiles(const PredictionSet& set);
  std::size_t size() const override { return n_; }
  void quantiles(Component c, double p, std::span<double> out) const override;

private:
  std::size_t n_;
  ComponentColumns pitch_, yaw_;
};

// Calibrated quantiles: the Gaussian quantile at the error-adjusted
// probability level given by the per-component map inverse.
class CalibratedQuantiles : public QuantileFunction {
public:
  CalibratedQuantiles(const PredictionSet& set, const CalibratedPredictor& cp);
  std::size_t size() const override { return n_; }
  void quantiles(Component c, double p, std::span<double> out) const override;

private:
  std::size_t n_;
  ComponentColumns pitch_, yaw_;
  CalibratedPredictor cp_;
};

// Wraps another quantile function so that the joint both-components event at
// level p has probability p for independent, individually calibrated
// components: each component is queried at sqrt(p).
class JointLevelAdjusted : public QuantileFunction {
public:
  explicit JointLevelAdjusted(const QuantileFunction& base) : base_(base) {}
  std::size_t size() const override { return base_.size(); }
  void quantiles(Component c, double p, std::span<double> out) const override;

private:
  const QuantileFunction& base_;
};

// Stored two-point quantile predictions (the quantile-regression baseline):
// only the two recorded probability levels are queryable.
class TwoPointQuantiles : public QuantileFunction {
public:
  TwoPointQuantiles(double p_lo, double p_hi, std::vector<double> pitch_lo,
                    std::vector<double> pitch_hi, std::vector<double> yaw_lo,
                    std::vector<double> yaw_hi);
  std::size_t size() const override { return pitch_lo_.size(); }
  void quantiles(Component c, double p, std::span<double> out) const override;

private:
  double p_lo_, p_hi_;
  std::vector<double> pitch_lo_, pitch_hi_, yaw_lo_, yaw_hi_;
};

// Which indicator the coverage sum counts: the joint both-components event
// or a single component.
enum class CoverageMode { joint, pitch_only, yaw_only };

// Observed coverage at the canonical 11-point probability grid 0.0..1.0.
struct CoverageCurve {
  std::array<double, 11> coverage{};
  static constexpr std::size_t kPoints = 11;
  static constexpr double grid(std::size_t i) { return static_cast<double>(i) / 10.0; }
};

struct CPEReport {
  double cpe = 0.0;
  CoverageCurve curve;
  std::array<double, 11> per_point_errors{};
};

// Two-sided confidence-interval query; p_lo < p_hi, p_ci = p_hi - p_lo.
struct CIQuery {
  double p_lo = 0.025;
  double p_hi = 0.975;
  double p_ci() const { return p_hi - p_lo; }
};

struct CIReport {
  double inclusion_rate = 0.0;
  double avg_range_pitch = 0.0;
  double avg_range_yaw = 0.0;
  double avg_range_combined = 0.0;
};

// Fraction of samples whose ground truth lies at or below the p-quantile
// (both components under CoverageMode::joint). p = 0 and p = 1 return the
// analytic limits 0 and 1 without evaluating quantiles.
double empirical_coverage(std::span<const double> truth_pitch, std::span<const double> truth_yaw,
                          const QuantileFunction& qf, double p,
                          CoverageMode mode = CoverageMode::joint, int threads = 1);
double empirical_coverage(const PredictionSet& set, const QuantileFunction& qf, double p,
                          CoverageMode mode = CoverageMode::joint, int threads = 1);

CoverageCurve coverage_curve(std::span<const double> truth_pitch,
                             std::span<const double> truth_yaw, const QuantileFunction& qf,
                             CoverageMode mode = CoverageMode::joint, int threads = 1);
CoverageCurve coverage_curve(const PredictionSet& set, const QuantileFunction& qf,
                             CoverageMode mode = CoverageMode::joint, int threads = 1);

// Root mean square of the 11 pointwise coverage discrepancies, divisor 10.
CPEReport cpe(const CoverageCurve& curve);

// Joint inclusion rate of the two-sided interval plus average interval
// widths per component and their mean.
CIReport inclusion_rate(std::span<const double> truth_pitch, std::span<const double> truth_yaw,
                        const QuantileFunction& qf, const CIQuery& q, int threads = 1);
CIReport inclusion_rate(const PredictionSet& set, const QuantileFunction& qf, const CIQuery& q,
                        int threads = 1);

// Angle in degrees between the 3D gaze vectors of two (pitch, yaw) pairs
// (pitch = elevation, yaw = azimuth, unit sphere).
double angular_error(const AngularPair& pred, const AngularPair& truth);

// Spearman rank correlation (average ranks on ties) between per-sample
// angular error of the given point estimates and the per-sample scalar
// uncertainty sqrt(var_pitch + var_yaw). Requires >= 3 samples.
double error_uncertainty_correlation(const PredictionSet& set,
                                     std::span<const AngularPair> point_estimates);

}  // namespace gazecal
