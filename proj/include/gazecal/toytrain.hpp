#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "gazecal/types.hpp"

namespace gazecal {

// Desk-scale training batch: row-major features (n x dim) plus labels.
struct ToyBatch {
  int dim = 0;
  std::vector<double> features;
  std::vector<AngularPair> truths;

  std::size_t size() const { return truths.size(); }
  std::span<const double> row(std::size_t i) const {
    return {features.data() + i * static_cast<std::size_t>(dim),
            static_cast<std::size_t>(dim)};
  }
};

// Linear head with intercept: eval(x) = w[0] + sum_j w[1+j] * x[j].
struct LinearHead {
  std::vector<double> weights;

  double eval(std::span<const double> x) const;
};

// Two-head (mean, log-variance) linear model per component. The
// log-variance parameterization keeps the predicted variance positive.
struct ComponentHetero {
  LinearHead mean;
  LinearHead log_variance;
};

struct ToyHeteroModel {
  int dim = 0;
  ComponentHetero pitch;
  ComponentHetero yaw;
};

// Mirrors ToyHeteroModel's weight layout.
using HeteroGradient = ToyHeteroModel;

struct TrainConfig {
  double learning_rate = 0.01;
  int iterations = 5000;
  std::uint64_t seed = 0;
  // full-batch by construction; there is no minibatch mode
};

// Smooth-L1 prediction error: 0.5 r^2 inside |r| < 1, |r| - 0.5 outside.
double smooth_l1(double residual);
double smooth_l1_grad(double residual);

// Heteroskedastic Gaussian negative log-likelihood of one component:
// 0.5 * log_variance + smooth_l1(mean - truth) / (2 * exp(log_variance)).
double nll_loss(double mean, double log_variance, double truth);

// Mean NLL over the batch, both components summed per sample.
double mean_nll(const ToyHeteroModel& model, const ToyBatch& batch);

// Exact analytic gradient of mean_nll with respect to every weight.
HeteroGradient nll_gradient(const ToyHeteroModel& model, const ToyBatch& batch);

// Starting point used by train_hetero: zero mean heads, log-variance
// intercept at ln(sample variance of the truths), slopes zero.
ToyHeteroModel initial_hetero_model(const ToyBatch& batch);

// Deterministic full-batch gradient descent on mean_nll.
// Requires batch.size() >= dim + 2.
ToyHeteroModel train_hetero(const ToyBatch& batch, const TrainConfig& cfg);

// Pinball (quantile) loss; tau strictly inside (0, 1).
double pinball_loss(double pred, double truth, double tau);

// Two-quantile baseline heads per component, trained with summed pinball
// losses at tau_lo / tau_hi. Crossing quantiles observed on the training
// data are flagged, never reordered.
struct QuantilePairModel {
  int dim = 0;
  double tau_lo = 0.025;
  double tau_hi = 0.975;
  LinearHead pitch_lo, pitch_hi, yaw_lo, yaw_hi;
  bool crossing_pitch = false;
  bool crossing_yaw = false;
};

QuantilePairModel train_quantile_baseline(const ToyBatch& batch, const TrainConfig& cfg);

// Marks components whose lower head exceeds the upper head anywhere on the
// batch; the predictions themselves are left untouched.
void flag_crossings(QuantilePairModel& model, const ToyBatch& batch);

// Model outputs packaged for the evaluation pipeline.
PredictionSet predict_hetero(const ToyHeteroModel& model, const ToyBatch& batch);
QuantileDump predict_quantiles(const QuantilePairModel& model, const ToyBatch& batch);

// Synthetic covariate generator for the toy trainer: features uniform in
// [-1, 1]^dim, per-component linear true means with weights drawn from the
// seed, truth noise Gaussian with sigma(x) = sigma * sigma_scale *
// exp(hetero_slope * x[0]).
struct ToyDataConfig {
  std::size_t n = 5000;
  int dim = 3;
  std::uint64_t seed = 0;
  double sigma_pitch = 0.1;
  double sigma_yaw = 0.15;
  double hetero_slope = 0.0;
  double sigma_scale = 1.0;
  // Sample streams start at this index; two configs with the same seed but
  // disjoint offset ranges share the true weights yet draw disjoint samples.
  std::uint64_t sample_offset = 0;
};

ToyBatch generate_toy_data(const ToyDataConfig& cfg);

}  // namespace gazecal
