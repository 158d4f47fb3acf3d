#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "gazecal/calibration.hpp"
#include "gazecal/metrics.hpp"
#include "gazecal/normal.hpp"
#include "gazecal/synth.hpp"
#include "testutil.hpp"

using namespace gazecal;

namespace {

bool identical(const PredictionSet& a, const PredictionSet& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto& x = a.samples[i];
    const auto& y = b.samples[i];
    if (x.id != y.id || x.truth.pitch != y.truth.pitch || x.truth.yaw != y.truth.yaw ||
        x.pitch_marginal.mean != y.pitch_marginal.mean ||
        x.pitch_marginal.variance != y.pitch_marginal.variance ||
        x.yaw_marginal.mean != y.yaw_marginal.mean ||
        x.yaw_marginal.variance != y.yaw_marginal.variance) {
      return false;
    }
  }
  return true;
}

}  // namespace

TEST_CASE("generate_scenario is bit-deterministic in the seed") {
  SynthConfig cfg;
  cfg.n_samples = 2000;
  cfg.seed = 77;
  cfg.variance_scale = 0.5;
  const auto a = generate_scenario(cfg);
  const auto b = generate_scenario(cfg);
  CHECK(identical(a, b));
  cfg.seed = 78;
  CHECK_FALSE(identical(a, generate_scenario(cfg)));
}

TEST_CASE("well-specified scenarios produce uniform PIT values") {
  SynthConfig cfg;
  cfg.n_samples = 100000;
  cfg.seed = 41;
  const auto set = generate_scenario(cfg);
  CHECK(testutil::ks_uniform(pit_values(set, Component::pitch)) < 0.01);
  CHECK(testutil::ks_uniform(pit_values(set, Component::yaw)) < 0.01);
}

TEST_CASE("variance-scaled coverage matches the analytic oracle") {
  SynthConfig cfg;
  cfg.n_samples = 100000;
  cfg.seed = 42;
  cfg.variance_scale = 0.5;
  const auto set = generate_scenario(cfg);
  const GaussianQuantiles qf(set);
  const double n = static_cast<double>(cfg.n_samples);
  for (int i = 1; i <= 9; ++i) {
    const double p = static_cast<double>(i) / 10.0;
    const double expected = analytic_coverage_variance_scaled(0.5, p);
    const double band = 3.0 * std::sqrt(p * (1.0 - p) / n);
    CHECK(std::abs(empirical_coverage(set, qf, p, CoverageMode::pitch_only) - expected) <=
          band);
    CHECK(std::abs(empirical_coverage(set, qf, p, CoverageMode::yaw_only) - expected) <= band);
  }
}

TEST_CASE("analytic_coverage_variance_scaled reference values") {
  for (double p : {0.1, 0.37, 0.5, 0.9}) {
    CHECK(std::abs(analytic_coverage_variance_scaled(1.0, p) - p) < 1e-12);
  }
  CHECK(std::abs(analytic_coverage_variance_scaled(0.5, 0.9) - 0.739) < 1e-3);
  CHECK(std::abs(analytic_coverage_variance_scaled(0.5, 0.9) - 0.7391658153933757) < 1e-12);
  CHECK(std::abs(analytic_coverage_variance_scaled(2.0, 0.9) - 0.9948) < 1e-3);
  CHECK_THROWS_AS(analytic_coverage_variance_scaled(0.0, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(analytic_coverage_variance_scaled(1.0, 0.0), std::domain_error);
  CHECK_THROWS_AS(analytic_coverage_variance_scaled(1.0, 1.0), std::domain_error);
}

TEST_CASE("student-t truth forces a heavier-tailed calibration map") {
  for (std::uint64_t seed : {51, 52, 53}) {
    SynthConfig cfg;
    cfg.n_samples = 2000;
    cfg.seed = seed;
    cfg.noise = NoiseKind::student_t;
    cfg.t_dof = 3;
    const auto cp = fit_calibrator(generate_scenario(cfg));
    CHECK(cp.pitch_map.invert(0.975) > 0.975);
    CHECK(cp.yaw_map.invert(0.975) > 0.975);
  }
}

TEST_CASE("generated truths respect the angular ranges") {
  SynthConfig cfg;
  cfg.n_samples = 100000;
  cfg.seed = 60;
  cfg.noise = NoiseKind::student_t;
  cfg.t_dof = 3;
  cfg.mean_range = 1.2;
  cfg.sigma_true_pitch = 0.15;
  cfg.sigma_true_yaw = 0.3;
  const auto set = generate_scenario(cfg);
  for (const auto& s : set.samples) {
    CHECK(std::abs(s.truth.pitch) <= kPitchBound);
    CHECK(std::abs(s.truth.yaw) <= kYawBound);
  }
}

TEST_CASE("config validation") {
  SynthConfig cfg;
  cfg.n_samples = 0;
  CHECK_THROWS_AS(generate_scenario(cfg), std::invalid_argument);
  cfg.n_samples = 10;
  cfg.noise = NoiseKind::student_t;
  cfg.t_dof = 2;
  CHECK_THROWS_AS(generate_scenario(cfg), std::invalid_argument);
  cfg.t_dof = 3;
  cfg.variance_scale = 0.0;
  CHECK_THROWS_AS(generate_scenario(cfg), std::invalid_argument);
  cfg.variance_scale = 1.0;
  cfg.sigma_true_yaw = -0.1;
  CHECK_THROWS_AS(generate_scenario(cfg), std::invalid_argument);
}
