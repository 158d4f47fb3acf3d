#include "gazecal/synth.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "gazecal/normal.hpp"
#include "gazecal/rng.hpp"

namespace gazecal {

namespace {

double draw_std_normal(CounterRng& rng) { return std_normal_quantile(rng.next_unit()); }

// Raw Student-t via the normal/chi-square ratio; t_dof squared normals in the
// denominator keeps the draw exact for integer dof.
double draw_student_t(CounterRng& rng, int dof) {
  const double z = draw_std_normal(rng);
  double chi2 = 0.0;
  for (int i = 0; i < dof; ++i) {
    const double zi = draw_std_normal(rng);
    chi2 += zi * zi;
  }
  return z / std::sqrt(chi2 / static_cast<double>(dof));
}

double draw_noise(CounterRng& rng, const SynthConfig& cfg) {
  return cfg.noise == NoiseKind::gaussian ? draw_std_normal(rng)
                                          : draw_student_t(rng, cfg.t_dof);
}

double draw_truth(CounterRng& rng, const SynthConfig& cfg, double latent_mean, double sigma,
                  double bound) {
  for (int attempt = 0; attempt < 1000; ++attempt) {
    const double truth = latent_mean + sigma * draw_noise(rng, cfg);
    if (std::abs(truth) <= bound) return truth;
  }
  throw std::runtime_error("generate_scenario: cannot place truth inside the angular range; "
                           "mean_range or sigma too large");
}

}  // namespace

void SynthConfig::validate() const {
  if (n_samples == 0) throw std::invalid_argument("SynthConfig: n_samples must be positive");
  if (noise == NoiseKind::student_t && t_dof <= 2) {
    throw std::invalid_argument("SynthConfig: student_t needs dof > 2");
  }
  if (!(sigma_true_pitch > 0.0) || !(sigma_true_yaw > 0.0)) {
    throw std::invalid_argument("SynthConfig: sigma_true must be positive");
  }
  if (!(variance_scale > 0.0)) {
    throw std::invalid_argument("SynthConfig: variance_scale must be positive");
  }
  if (!(mean_range >= 0.0) || !std::isfinite(mean_range)) {
    throw std::invalid_argument("SynthConfig: mean_range must be nonnegative");
  }
  if (!std::isfinite(mean_bias.pitch) || !std::isfinite(mean_bias.yaw)) {
    throw std::invalid_argument("SynthConfig: mean_bias must be finite");
  }
}

PredictionSet generate_scenario(const SynthConfig& cfg) {
  cfg.validate();
  PredictionSet set;
  set.samples.reserve(cfg.n_samples);
  const double var_pitch = cfg.variance_scale * cfg.sigma_true_pitch *
                           cfg.variance_scale * cfg.sigma_true_pitch;
  const double var_yaw =
      cfg.variance_scale * cfg.sigma_true_yaw * cfg.variance_scale * cfg.sigma_true_yaw;
  for (std::size_t t = 0; t < cfg.n_samples; ++t) {
    CounterRng rng = substream(cfg.seed, t);
    const double mean_pitch = (2.0 * rng.next_unit() - 1.0) * cfg.mean_range;
    const double mean_yaw = (2.0 * rng.next_unit() - 1.0) * cfg.mean_range;
    LabeledPrediction s;
    s.id = "s" + std::to_string(t);
    s.truth.pitch = draw_truth(rng, cfg, mean_pitch, cfg.sigma_true_pitch, kPitchBound);
    s.truth.yaw = draw_truth(rng, cfg, mean_yaw, cfg.sigma_true_yaw, kYawBound);
    s.pitch_marginal = {mean_pitch + cfg.mean_bias.pitch, var_pitch};
    s.yaw_marginal = {mean_yaw + cfg.mean_bias.yaw, var_yaw};
    set.samples.push_back(std::move(s));
  }
  return set;
}

double analytic_coverage_variance_scaled(double alpha, double p) {
  if (!(alpha > 0.0)) {
    throw std::invalid_argument("analytic_coverage_variance_scaled: alpha must be positive");
  }
  if (!(p > 0.0 && p < 1.0)) {
    throw std::domain_error("analytic_coverage_variance_scaled: p must lie inside (0, 1)");
  }
  return std_normal_cdf(alpha * std_normal_quantile(p));
}

}  // namespace gazecal
