#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "gazecal/calibration.hpp"
#include "gazecal/errors.hpp"
#include "gazecal/metrics.hpp"
#include "gazecal/normal.hpp"
#include "gazecal/synth.hpp"
#include "testutil.hpp"

using namespace gazecal;

namespace {

constexpr double kZ975 = 1.9599639845400539;
constexpr double kZ995 = 2.5758293035489004;
constexpr double kZ06 = 0.2533471031357997;

LabeledPrediction sample(double pm, double pv, double ym, double yv, double tp, double ty) {
  return LabeledPrediction{"x", {pm, pv}, {ym, yv}, {tp, ty}};
}

SynthConfig well_specified(std::size_t n, std::uint64_t seed) {
  SynthConfig cfg;
  cfg.n_samples = n;
  cfg.seed = seed;
  return cfg;
}

double percomp_cpe(const PredictionSet& set, const QuantileFunction& qf, Component c) {
  const auto mode = c == Component::pitch ? CoverageMode::pitch_only : CoverageMode::yaw_only;
  return cpe(coverage_curve(set, qf, mode)).cpe;
}

}  // namespace

TEST_CASE("pit_values basics") {
  PredictionSet set;
  set.samples.push_back(sample(0.2, 0.04, -0.1, 0.09, 0.2, -0.1));
  set.samples.push_back(sample(0.0, 1.0, 0.0, 1.0, 1.959964, 0.0));
  const auto pits = pit_values(set, Component::pitch);
  REQUIRE(pits.size() == 2);
  CHECK(pits[0] == 0.5);
  CHECK(std::abs(pits[1] - 0.975) < 1e-6);
  const auto ypits = pit_values(set, Component::yaw);
  CHECK(ypits[0] == 0.5);
  CHECK(ypits[1] == 0.5);
  CHECK_THROWS_AS(pit_values(PredictionSet{}, Component::pitch), std::invalid_argument);
}

TEST_CASE("PIT of a well-specified model is uniform") {
  const auto set = generate_scenario(well_specified(100000, 11));
  for (Component c : {Component::pitch, Component::yaw}) {
    CHECK(testutil::ks_uniform(pit_values(set, c)) < 0.01);
  }
}

TEST_CASE("build_recalibration_points uses the i/(n+1) convention") {
  const std::vector<double> pits{0.9, 0.2, 0.6};  // unsorted on purpose
  const auto points = build_recalibration_points(pits);
  REQUIRE(points.size() == 3);
  CHECK(points[0].x == 0.2);
  CHECK(points[0].y == 0.25);
  CHECK(points[1].x == 0.6);
  CHECK(points[1].y == 0.5);
  CHECK(points[2].x == 0.9);
  CHECK(points[2].y == 0.75);

  CHECK_THROWS_AS(build_recalibration_points(std::vector<double>{0.5}),
                  insufficient_data_error);
}

TEST_CASE("tied PIT values pool to their mean level") {
  const std::vector<double> pits{0.5, 0.5, 0.5, 0.5};
  const auto m = pava_fit(build_recalibration_points(pits));
  REQUIRE(m.knots().size() == 3);
  CHECK(m.knots()[1].x == 0.5);
  CHECK(m.knots()[1].y == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("recalibration points of a calibrated model hug the diagonal") {
  const auto set = generate_scenario(well_specified(1000, 12));
  const auto points = build_recalibration_points(pit_values(set, Component::pitch));
  for (const auto& p : points) CHECK(std::abs(p.y - p.x) < 0.05);
}

TEST_CASE("fit_calibrator enforces the minimum subset size") {
  auto small = generate_scenario(well_specified(5, 1));
  CHECK_THROWS_AS(fit_calibrator(small), insufficient_data_error);
  auto enough = generate_scenario(well_specified(10, 1));
  CHECK_NOTHROW(fit_calibrator(enough));
}

TEST_CASE("well-specified calibration stays close to identity") {
  const auto set = generate_scenario(well_specified(1000, 13));
  const auto cp = fit_calibrator(set);
  CHECK(cp.n_calibration == 1000);
  for (const auto* m : {&cp.pitch_map, &cp.yaw_map}) {
    for (int i = 0; i <= 100; ++i) {
      const double p = static_cast<double>(i) / 100.0;
      CHECK(std::abs(m->eval(p) - p) <= 0.06);
    }
  }
}

TEST_CASE("overconfident predictor pushes the tail correction outward") {
  SynthConfig cfg = well_specified(1000, 14);
  cfg.variance_scale = 0.5;
  const auto cp = fit_calibrator(generate_scenario(cfg));
  // analytic R^-1(0.9) = Phi(2 z_0.9) ~ 0.9948
  CHECK(cp.pitch_map.invert(0.9) > 0.97);
  CHECK(cp.yaw_map.invert(0.9) > 0.97);
}

TEST_CASE("component calibrators are fitted independently") {
  auto set = generate_scenario(well_specified(200, 15));
  const auto before = fit_calibrator(set);
  // scramble yaw only
  for (std::size_t i = 0; i < set.size(); ++i) {
    auto& s = set.samples[i];
    s.yaw_marginal.mean += 0.3 * std::sin(static_cast<double>(i));
    s.yaw_marginal.variance *= 2.7;
    s.truth.yaw = -s.truth.yaw;
  }
  const auto after = fit_calibrator(set);
  CHECK(after.pitch_map == before.pitch_map);
  CHECK_FALSE(after.yaw_map == before.yaw_map);
}

TEST_CASE("identity recovery for exactly uniform PIT levels") {
  std::vector<double> pits;
  const int n = 99;
  for (int i = 1; i <= n; ++i) pits.push_back(static_cast<double>(i) / (n + 1));
  const auto m = pava_fit(build_recalibration_points(pits));
  for (const auto& k : m.knots()) CHECK(std::abs(k.y - k.x) < 1e-12);
}

TEST_CASE("calibrated_quantile with identity maps equals the Gaussian quantile") {
  CalibratedPredictor cp{MonotoneMap::identity(), MonotoneMap::identity(), 0};
  const auto s = sample(0.12, 0.25, -0.3, 0.49, 0.0, 0.0);
  for (double p : {0.025, 0.31, 0.5, 0.77, 0.975}) {
    CHECK(calibrated_quantile(cp, s, Component::pitch, p) ==
          gaussian_quantile(s.pitch_marginal, p));
    CHECK(calibrated_quantile(cp, s, Component::yaw, p) ==
          gaussian_quantile(s.yaw_marginal, p));
  }
  CHECK_THROWS_AS(calibrated_quantile(cp, s, Component::pitch, 0.0), std::domain_error);
  CHECK_THROWS_AS(calibrated_quantile(cp, s, Component::pitch, 1.0), std::domain_error);
}

TEST_CASE("calibrated_quantile applies the inverse map") {
  // R^-1(0.975) = 0.995 by construction
  MonotoneMap m({{0.0, 0.0}, {0.995, 0.975}, {1.0, 1.0}});
  CalibratedPredictor cp{m, m, 0};
  const auto s = sample(0.0, 1.0, 0.0, 1.0, 0.0, 0.0);
  CHECK(std::abs(calibrated_quantile(cp, s, Component::pitch, 0.975) - kZ995) < 1e-9);
}

TEST_CASE("calibrated_median") {
  CalibratedPredictor identity{MonotoneMap::identity(), MonotoneMap::identity(), 0};
  const auto s = sample(0.4, 0.09, -0.2, 0.04, 0.0, 0.0);
  const auto med = calibrated_median(identity, s);
  CHECK(med.pitch == doctest::Approx(0.4).epsilon(1e-15));
  CHECK(med.yaw == doctest::Approx(-0.2).epsilon(1e-15));

  // R^-1(0.5) = 0.6 shifts the median to z_{0.6}
  MonotoneMap skew({{0.0, 0.0}, {0.6, 0.5}, {1.0, 1.0}});
  CalibratedPredictor cp{skew, skew, 0};
  const auto s2 = sample(0.0, 1.0, 0.0, 1.0, 0.0, 0.0);
  CHECK(std::abs(calibrated_median(cp, s2).pitch - kZ06) < 1e-9);
}

TEST_CASE("pure variance scaling keeps the median at the mean") {
  SynthConfig cfg = well_specified(2000, 16);
  cfg.variance_scale = 0.5;
  const auto cp = fit_calibrator(generate_scenario(cfg));
  // symmetric miscalibration: R^-1(0.5) stays near 0.5
  CHECK(std::abs(cp.pitch_map.invert(0.5) - 0.5) < 0.04);
  CHECK(std::abs(cp.yaw_map.invert(0.5) - 0.5) < 0.04);
}

TEST_CASE("calibrated quantiles are monotone in p") {
  SynthConfig cfg = well_specified(400, 17);
  cfg.variance_scale = 2.0;
  const auto set = generate_scenario(cfg);
  const auto cp = fit_calibrator(set);
  const auto& s = set.samples[7];
  for (Component c : {Component::pitch, Component::yaw}) {
    double prev = calibrated_quantile(cp, s, c, 0.01);
    for (int i = 2; i < 100; ++i) {
      const double cur = calibrated_quantile(cp, s, c, static_cast<double>(i) / 100.0);
      CHECK(cur >= prev);
      prev = cur;
    }
  }
}

TEST_CASE("calibration improves per-component coverage error") {
  for (std::uint64_t seed : {101, 102}) {
    SynthConfig cfg;
    cfg.n_samples = 21000;
    cfg.seed = seed;
    cfg.variance_scale = 0.5;
    const auto all = generate_scenario(cfg);
    PredictionSet cal, test;
    cal.samples.assign(all.samples.begin(), all.samples.begin() + 1000);
    test.samples.assign(all.samples.begin() + 1000, all.samples.end());

    const auto cp = fit_calibrator(cal);
    const GaussianQuantiles uncal_qf(test);
    const CalibratedQuantiles cal_qf(test, cp);
    for (Component c : {Component::pitch, Component::yaw}) {
      const double uncal = percomp_cpe(test, uncal_qf, c);
      const double calv = percomp_cpe(test, cal_qf, c);
      CHECK(uncal > 0.05);
      CHECK(calv < uncal);
      CHECK(calv < 0.05);
    }
  }
}
