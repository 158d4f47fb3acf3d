#pragma once

#include <cstdint>

#include "gazecal/types.hpp"

namespace gazecal {

enum class NoiseKind { gaussian, student_t };

// Synthetic scenario: latent true means drawn uniformly, truth = mean +
// sigma_true * noise, while the reported prediction is mean + mean_bias with
// sigma = variance_scale * sigma_true. Any variance_scale != 1, nonzero bias
// or heavy-tailed noise makes the predictor miscalibrated by construction.
//
// student_t noise is the raw t_nu variate (variance nu/(nu-2) > 1), so a
// matching-sigma Gaussian predictor understates the spread in the tails.
struct SynthConfig {
  std::size_t n_samples = 0;
  std::uint64_t seed = 0;
  NoiseKind noise = NoiseKind::gaussian;
  int t_dof = 3;  // > 2, student_t only
  double sigma_true_pitch = 0.08;
  double sigma_true_yaw = 0.12;
  double variance_scale = 1.0;  // alpha
  AngularPair mean_bias{};
  double mean_range = 0.4;  // half-width of the uniform latent-mean range

  void validate() const;  // throws std::invalid_argument
};

// Deterministic given cfg.seed: every sample draws from its own counter-based
// stream (uniform mean pitch, uniform mean yaw, then the per-component noise
// draws), so generation order and worker partitioning cannot change the
// output. Ground-truth angles falling outside the valid pitch/yaw ranges are
// redrawn from the same stream; the truncated tail mass is negligible for
// sane configurations.
PredictionSet generate_scenario(const SynthConfig& cfg);

// True per-component coverage of a quantile predicted with sigma scaled by
// alpha: Phi(alpha * Phi^-1(p)). Requires alpha > 0 and p strictly in (0, 1).
double analytic_coverage_variance_scaled(double alpha, double p);

}  // namespace gazecal
