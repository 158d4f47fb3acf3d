#include "gazecal/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "gazecal/errors.hpp"
#include "gazecal/kernels/kernels.hpp"
#include "gazecal/normal.hpp"
#include "gazecal/parallel.hpp"

namespace gazecal {

namespace {

constexpr double kRadToDeg = 57.29577951308232;

struct Vec3 {
  double x, y, z;
};

Vec3 gaze_vector(const AngularPair& a) {
  const double cp = std::cos(a.pitch);
  return {cp * std::sin(a.yaw), std::sin(a.pitch), cp * std::cos(a.yaw)};
}

// Ranks with ties averaged.
std::vector<double> average_ranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

double pearson(std::span<const double> a, std::span<const double> b) {
  const double n = static_cast<double>(a.size());
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma;
    const double db = b[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa == 0.0 || sbb == 0.0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

}  // namespace

GaussianQuantiles::GaussianQuantiles(const PredictionSet& set)
    : n_(set.size()),
      pitch_(columns(set, Component::pitch)),
      yaw_(columns(set, Component::yaw)) {}

void GaussianQuantiles::quantiles(Component c, double p, std::span<double> out) const {
  const ComponentColumns& cols = c == Component::pitch ? pitch_ : yaw_;
  const double z = std_normal_quantile(p);
  kernels::scale_add(cols.mean, cols.sigma, z, out);
}

CalibratedQuantiles::CalibratedQuantiles(const PredictionSet& set, const CalibratedPredictor& cp)
    : n_(set.size()),
      pitch_(columns(set, Component::pitch)),
      yaw_(columns(set, Component::yaw)),
      cp_(cp) {}

void CalibratedQuantiles::quantiles(Component c, double p, std::span<double> out) const {
  const ComponentColumns& cols = c == Component::pitch ? pitch_ : yaw_;
  const double adjusted = std::clamp(cp_.map(c).invert(p), 1e-9, 1.0 - 1e-9);
  const double z = std_normal_quantile(adjusted);
  kernels::scale_add(cols.mean, cols.sigma, z, out);
}

void JointLevelAdjusted::quantiles(Component c, double p, std::span<double> out) const {
  base_.quantiles(c, std::sqrt(p), out);
}

TwoPointQuantiles::TwoPointQuantiles(double p_lo, double p_hi, std::vector<double> pitch_lo,
                                     std::vector<double> pitch_hi, std::vector<double> yaw_lo,
                                     std::vector<double> yaw_hi)
    : p_lo_(p_lo),
      p_hi_(p_hi),
      pitch_lo_(std::move(pitch_lo)),
      pitch_hi_(std::move(pitch_hi)),
      yaw_lo_(std::move(yaw_lo)),
      yaw_hi_(std::move(yaw_hi)) {
  if (!(p_lo_ < p_hi_)) {
    throw std::invalid_argument("TwoPointQuantiles: p_lo must be below p_hi");
  }
  if (pitch_hi_.size() != pitch_lo_.size() || yaw_lo_.size() != pitch_lo_.size() ||
      yaw_hi_.size() != pitch_lo_.size()) {
    throw std::invalid_argument("TwoPointQuantiles: column sizes differ");
  }
}

void TwoPointQuantiles::quantiles(Component c, double p, std::span<double> out) const {
  const std::vector<double>* src = nullptr;
  if (p == p_lo_) {
    src = c == Component::pitch ? &pitch_lo_ : &yaw_lo_;
  } else if (p == p_hi_) {
    src = c == Component::pitch ? &pitch_hi_ : &yaw_hi_;
  } else {
    throw std::domain_error("TwoPointQuantiles: only the stored probability levels are queryable");
  }
  std::copy(src->begin(), src->end(), out.begin());
}

double empirical_coverage(std::span<const double> truth_pitch,
                          std::span<const double> truth_yaw, const QuantileFunction& qf,
                          double p, CoverageMode mode, int threads) {
  const std::size_t n = truth_pitch.size();
  if (n == 0 || truth_yaw.size() != n || qf.size() != n) {
    throw std::invalid_argument("empirical_coverage: size mismatch or empty input");
  }
  if (!(p >= 0.0 && p <= 1.0)) {
    throw std::invalid_argument("empirical_coverage: p outside [0, 1]");
  }
  if (p == 0.0) return 0.0;
  if (p == 1.0) return 1.0;

  std::vector<double> q_pitch, q_yaw;
  if (mode != CoverageMode::yaw_only) {
    q_pitch.resize(n);
    qf.quantiles(Component::pitch, p, q_pitch);
  }
  if (mode != CoverageMode::pitch_only) {
    q_yaw.resize(n);
    qf.quantiles(Component::yaw, p, q_yaw);
  }

  const auto& backend = kernels::active();
  const auto counts = map_blocks<std::size_t>(n, threads, [&](std::size_t b, std::size_t e) {
    switch (mode) {
      case CoverageMode::pitch_only:
        return backend.count_leq(truth_pitch.data() + b, q_pitch.data() + b, e - b);
      case CoverageMode::yaw_only:
        return backend.count_leq(truth_yaw.data() + b, q_yaw.data() + b, e - b);
      case CoverageMode::joint:
      default:
        return backend.count_joint_leq(truth_pitch.data() + b, q_pitch.data() + b,
                                       truth_yaw.data() + b, q_yaw.data() + b, e - b);
    }
  });
  std::size_t covered = 0;
  for (const auto c : counts) covered += c;
  return static_cast<double>(covered) / static_cast<double>(n);
}

double empirical_coverage(const PredictionSet& set, const QuantileFunction& qf, double p,
                          CoverageMode mode, int threads) {
  std::vector<double> tp, ty;
  tp.reserve(set.size());
  ty.reserve(set.size());
  for (const auto& s : set.samples) {
    tp.push_back(s.truth.pitch);
    ty.push_back(s.truth.yaw);
  }
  return empirical_coverage(tp, ty, qf, p, mode, threads);
}

CoverageCurve coverage_curve(std::span<const double> truth_pitch,
                             std::span<const double> truth_yaw, const QuantileFunction& qf,
                             CoverageMode mode, int threads) {
  CoverageCurve curve;
  for (std::size_t i = 0; i < CoverageCurve::kPoints; ++i) {
    curve.coverage[i] =
        empirical_coverage(truth_pitch, truth_yaw, qf, CoverageCurve::grid(i), mode, threads);
  }
  return curve;
}

CoverageCurve coverage_curve(const PredictionSet& set, const QuantileFunction& qf,
                             CoverageMode mode, int threads) {
  std::vector<double> tp, ty;
  tp.reserve(set.size());
  ty.reserve(set.size());
  for (const auto& s : set.samples) {
    tp.push_back(s.truth.pitch);
    ty.push_back(s.truth.yaw);
  }
  return coverage_curve(tp, ty, qf, mode, threads);
}

CPEReport cpe(const CoverageCurve& curve) {
  CPEReport report;
  report.curve = curve;
  double sum_sq = 0.0;
  for (std::size_t i = 0; i < CoverageCurve::kPoints; ++i) {
    const double err = std::abs(CoverageCurve::grid(i) - curve.coverage[i]);
    report.per_point_errors[i] = err;
    sum_sq += err * err;
  }
  report.cpe = std::sqrt(sum_sq / 10.0);
  return report;
}

CIReport inclusion_rate(std::span<const double> truth_pitch, std::span<const double> truth_yaw,
                        const QuantileFunction& qf, const CIQuery& q, int threads) {
  const std::size_t n = truth_pitch.size();
  if (n == 0 || truth_yaw.size() != n || qf.size() != n) {
    throw std::invalid_argument("inclusion_rate: size mismatch or empty input");
  }
  if (!(q.p_lo < q.p_hi) || !(q.p_lo > 0.0) || !(q.p_hi < 1.0)) {
    throw std::invalid_argument("inclusion_rate: need 0 < p_lo < p_hi < 1");
  }

  std::vector<double> lo_p(n), hi_p(n), lo_y(n), hi_y(n);
  qf.quantiles(Component::pitch, q.p_lo, lo_p);
  qf.quantiles(Component::pitch, q.p_hi, hi_p);
  qf.quantiles(Component::yaw, q.p_lo, lo_y);
  qf.quantiles(Component::yaw, q.p_hi, hi_y);

  const auto& backend = kernels::active();
  struct BlockStats {
    std::size_t inside = 0;
    double range_pitch = 0.0;
    double range_yaw = 0.0;
  };
  const auto stats = map_blocks<BlockStats>(n, threads, [&](std::size_t b, std::size_t e) {
    BlockStats s;
    s.inside = backend.count_joint_within(truth_pitch.data() + b, lo_p.data() + b,
                                          hi_p.data() + b, truth_yaw.data() + b,
                                          lo_y.data() + b, hi_y.data() + b, e - b);
    s.range_pitch = backend.sum_diff(hi_p.data() + b, lo_p.data() + b, e - b);
    s.range_yaw = backend.sum_diff(hi_y.data() + b, lo_y.data() + b, e - b);
    return s;
  });

  std::size_t inside = 0;
  double range_pitch = 0.0, range_yaw = 0.0;
  for (const auto& s : stats) {
    inside += s.inside;
    range_pitch += s.range_pitch;
    range_yaw += s.range_yaw;
  }

  CIReport report;
  const double dn = static_cast<double>(n);
  report.inclusion_rate = static_cast<double>(inside) / dn;
  report.avg_range_pitch = range_pitch / dn;
  report.avg_range_yaw = range_yaw / dn;
  report.avg_range_combined = 0.5 * (report.avg_range_pitch + report.avg_range_yaw);
  return report;
}

CIReport inclusion_rate(const PredictionSet& set, const QuantileFunction& qf, const CIQuery& q,
                        int threads) {
  std::vector<double> tp, ty;
  tp.reserve(set.size());
  ty.reserve(set.size());
  for (const auto& s : set.samples) {
    tp.push_back(s.truth.pitch);
    ty.push_back(s.truth.yaw);
  }
  return inclusion_rate(tp, ty, qf, q, threads);
}

double angular_error(const AngularPair& pred, const AngularPair& truth) {
  const Vec3 a = gaze_vector(pred);
  const Vec3 b = gaze_vector(truth);
  const double dot = std::clamp(a.x * b.x + a.y * b.y + a.z * b.z, -1.0, 1.0);
  return std::acos(dot) * kRadToDeg;
}

double error_uncertainty_correlation(const PredictionSet& set,
                                     std::span<const AngularPair> point_estimates) {
  if (set.size() != point_estimates.size()) {
    throw std::invalid_argument("error_uncertainty_correlation: size mismatch");
  }
  if (set.size() < 3) {
    throw insufficient_data_error("error_uncertainty_correlation: need at least 3 samples");
  }
  std::vector<double> errors(set.size()), uncertainty(set.size());
  for (std::size_t i = 0; i < set.size(); ++i) {
    const auto& s = set.samples[i];
    errors[i] = angular_error(point_estimates[i], s.truth);
    uncertainty[i] = std::sqrt(s.pitch_marginal.variance + s.yaw_marginal.variance);
  }
  const auto r_err = average_ranks(errors);
  const auto r_unc = average_ranks(uncertainty);
  return pearson(r_err, r_unc);
}

}  // namespace gazecal
