#include "gazecal/toytrain.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "gazecal/normal.hpp"
#include "gazecal/rng.hpp"

namespace gazecal {

namespace {

double component_truth(const AngularPair& t, Component c) {
  return c == Component::pitch ? t.pitch : t.yaw;
}

double sample_variance(const ToyBatch& batch, Component c) {
  const double n = static_cast<double>(batch.size());
  double mean = 0.0;
  for (const auto& t : batch.truths) mean += component_truth(t, c);
  mean /= n;
  double var = 0.0;
  for (const auto& t : batch.truths) {
    const double d = component_truth(t, c) - mean;
    var += d * d;
  }
  return var / n;
}

void check_trainable(const ToyBatch& batch) {
  if (batch.dim < 1) throw std::invalid_argument("ToyBatch: dim must be >= 1");
  if (batch.features.size() != batch.size() * static_cast<std::size_t>(batch.dim)) {
    throw std::invalid_argument("ToyBatch: feature size does not match n * dim");
  }
  if (batch.size() < static_cast<std::size_t>(batch.dim) + 2) {
    throw std::invalid_argument("ToyBatch: need at least dim + 2 samples");
  }
}

void accumulate_scaled(std::vector<double>& acc, std::span<const double> x, double scale) {
  acc[0] += scale;
  for (std::size_t j = 0; j < x.size(); ++j) acc[j + 1] += scale * x[j];
}

}  // namespace

double LinearHead::eval(std::span<const double> x) const {
  double v = weights[0];
  for (std::size_t j = 0; j < x.size(); ++j) v += weights[j + 1] * x[j];
  return v;
}

double smooth_l1(double residual) {
  const double a = std::abs(residual);
  return a < 1.0 ? 0.5 * residual * residual : a - 0.5;
}

double smooth_l1_grad(double residual) {
  if (residual > 1.0) return 1.0;
  if (residual < -1.0) return -1.0;
  return residual;
}

double nll_loss(double mean, double log_variance, double truth) {
  return 0.5 * log_variance + smooth_l1(mean - truth) / (2.0 * std::exp(log_variance));
}

double mean_nll(const ToyHeteroModel& model, const ToyBatch& batch) {
  double total = 0.0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto x = batch.row(i);
    total += nll_loss(model.pitch.mean.eval(x), model.pitch.log_variance.eval(x),
                      batch.truths[i].pitch);
    total += nll_loss(model.yaw.mean.eval(x), model.yaw.log_variance.eval(x),
                      batch.truths[i].yaw);
  }
  return total / static_cast<double>(batch.size());
}

HeteroGradient nll_gradient(const ToyHeteroModel& model, const ToyBatch& batch) {
  if (batch.size() == 0) throw std::invalid_argument("nll_gradient: empty batch");
  const std::size_t w = static_cast<std::size_t>(model.dim) + 1;
  HeteroGradient grad;
  grad.dim = model.dim;
  grad.pitch.mean.weights.assign(w, 0.0);
  grad.pitch.log_variance.weights.assign(w, 0.0);
  grad.yaw.mean.weights.assign(w, 0.0);
  grad.yaw.log_variance.weights.assign(w, 0.0);

  auto accumulate = [&](const ComponentHetero& heads, ComponentHetero& g,
                        std::span<const double> x, double truth) {
    const double mean = heads.mean.eval(x);
    const double s = heads.log_variance.eval(x);
    const double r = mean - truth;
    const double inv_two_var = 1.0 / (2.0 * std::exp(s));
    // d/dmean = l'(r) / (2 sigma^2); d/ds = 0.5 - l(r) / (2 sigma^2)
    accumulate_scaled(g.mean.weights, x, smooth_l1_grad(r) * inv_two_var);
    accumulate_scaled(g.log_variance.weights, x, 0.5 - smooth_l1(r) * inv_two_var);
  };

  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto x = batch.row(i);
    accumulate(model.pitch, grad.pitch, x, batch.truths[i].pitch);
    accumulate(model.yaw, grad.yaw, x, batch.truths[i].yaw);
  }

  const double inv_n = 1.0 / static_cast<double>(batch.size());
  for (auto* head : {&grad.pitch.mean, &grad.pitch.log_variance, &grad.yaw.mean,
                     &grad.yaw.log_variance}) {
    for (auto& v : head->weights) v *= inv_n;
  }
  return grad;
}

ToyHeteroModel initial_hetero_model(const ToyBatch& batch) {
  check_trainable(batch);
  const std::size_t w = static_cast<std::size_t>(batch.dim) + 1;
  ToyHeteroModel model;
  model.dim = batch.dim;
  for (auto* comp : {&model.pitch, &model.yaw}) {
    comp->mean.weights.assign(w, 0.0);
    comp->log_variance.weights.assign(w, 0.0);
  }
  model.pitch.log_variance.weights[0] =
      std::log(std::max(sample_variance(batch, Component::pitch), 1e-12));
  model.yaw.log_variance.weights[0] =
      std::log(std::max(sample_variance(batch, Component::yaw), 1e-12));
  return model;
}

ToyHeteroModel train_hetero(const ToyBatch& batch, const TrainConfig& cfg) {
  if (!(cfg.learning_rate >= 0.0)) {
    throw std::invalid_argument("TrainConfig: learning_rate must be nonnegative");
  }
  if (cfg.iterations < 0) throw std::invalid_argument("TrainConfig: iterations must be >= 0");
  ToyHeteroModel model = initial_hetero_model(batch);
  for (int it = 0; it < cfg.iterations; ++it) {
    const HeteroGradient grad = nll_gradient(model, batch);
    auto step = [&](LinearHead& head, const LinearHead& g) {
      for (std::size_t j = 0; j < head.weights.size(); ++j) {
        head.weights[j] -= cfg.learning_rate * g.weights[j];
      }
    };
    step(model.pitch.mean, grad.pitch.mean);
    step(model.pitch.log_variance, grad.pitch.log_variance);
    step(model.yaw.mean, grad.yaw.mean);
    step(model.yaw.log_variance, grad.yaw.log_variance);
  }
  return model;
}

double pinball_loss(double pred, double truth, double tau) {
  if (!(tau > 0.0 && tau < 1.0)) {
    throw std::domain_error("pinball_loss: tau must lie strictly inside (0, 1)");
  }
  return truth >= pred ? (truth - pred) * tau : (pred - truth) * (1.0 - tau);
}

QuantilePairModel train_quantile_baseline(const ToyBatch& batch, const TrainConfig& cfg) {
  check_trainable(batch);
  if (!(cfg.learning_rate >= 0.0)) {
    throw std::invalid_argument("TrainConfig: learning_rate must be nonnegative");
  }
  QuantilePairModel model;
  model.dim = batch.dim;
  const std::size_t w = static_cast<std::size_t>(batch.dim) + 1;
  for (auto* head : {&model.pitch_lo, &model.pitch_hi, &model.yaw_lo, &model.yaw_hi}) {
    head->weights.assign(w, 0.0);
  }

  const double inv_n = 1.0 / static_cast<double>(batch.size());
  std::vector<double> grad(w);
  auto descend = [&](LinearHead& head, Component c, double tau) {
    std::fill(grad.begin(), grad.end(), 0.0);
    for (std::size_t i = 0; i < batch.size(); ++i) {
      const auto x = batch.row(i);
      const double pred = head.eval(x);
      const double truth = component_truth(batch.truths[i], c);
      // Subgradient of the pinball loss in the prediction.
      const double d = truth >= pred ? -tau : 1.0 - tau;
      accumulate_scaled(grad, x, d);
    }
    for (std::size_t j = 0; j < w; ++j) head.weights[j] -= cfg.learning_rate * grad[j] * inv_n;
  };

  for (int it = 0; it < cfg.iterations; ++it) {
    descend(model.pitch_lo, Component::pitch, model.tau_lo);
    descend(model.pitch_hi, Component::pitch, model.tau_hi);
    descend(model.yaw_lo, Component::yaw, model.tau_lo);
    descend(model.yaw_hi, Component::yaw, model.tau_hi);
  }

  flag_crossings(model, batch);
  return model;
}

void flag_crossings(QuantilePairModel& model, const ToyBatch& batch) {
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto x = batch.row(i);
    if (model.pitch_lo.eval(x) > model.pitch_hi.eval(x)) model.crossing_pitch = true;
    if (model.yaw_lo.eval(x) > model.yaw_hi.eval(x)) model.crossing_yaw = true;
  }
}

PredictionSet predict_hetero(const ToyHeteroModel& model, const ToyBatch& batch) {
  PredictionSet set;
  set.samples.reserve(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto x = batch.row(i);
    LabeledPrediction s;
    s.id = "t" + std::to_string(i);
    s.pitch_marginal = {model.pitch.mean.eval(x), std::exp(model.pitch.log_variance.eval(x))};
    s.yaw_marginal = {model.yaw.mean.eval(x), std::exp(model.yaw.log_variance.eval(x))};
    s.truth = batch.truths[i];
    set.samples.push_back(std::move(s));
  }
  return set;
}

QuantileDump predict_quantiles(const QuantilePairModel& model, const ToyBatch& batch) {
  QuantileDump dump;
  dump.rows.reserve(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto x = batch.row(i);
    QuantileRow r;
    r.id = "t" + std::to_string(i);
    r.pitch_lo = model.pitch_lo.eval(x);
    r.pitch_hi = model.pitch_hi.eval(x);
    r.yaw_lo = model.yaw_lo.eval(x);
    r.yaw_hi = model.yaw_hi.eval(x);
    r.truth = batch.truths[i];
    dump.rows.push_back(std::move(r));
  }
  return dump;
}

ToyBatch generate_toy_data(const ToyDataConfig& cfg) {
  if (cfg.n == 0 || cfg.dim < 1) {
    throw std::invalid_argument("ToyDataConfig: need n >= 1 and dim >= 1");
  }
  if (!(cfg.sigma_pitch > 0.0) || !(cfg.sigma_yaw > 0.0) || !(cfg.sigma_scale > 0.0)) {
    throw std::invalid_argument("ToyDataConfig: sigma values must be positive");
  }

  // True mean weights live in their own stream so train/test batches from
  // shifted configs share the same underlying function.
  constexpr std::uint64_t kWeightStream = 0x746f792d77656967ull;
  constexpr std::uint64_t kSampleStream = 0x746f792d64617461ull;
  CounterRng wrng = substream(cfg.seed ^ kWeightStream, 0);
  const std::size_t w = static_cast<std::size_t>(cfg.dim) + 1;
  std::vector<double> w_pitch(w), w_yaw(w);
  for (auto& v : w_pitch) v = wrng.next_unit() - 0.5;
  for (auto& v : w_yaw) v = wrng.next_unit() - 0.5;

  ToyBatch batch;
  batch.dim = cfg.dim;
  batch.features.resize(cfg.n * static_cast<std::size_t>(cfg.dim));
  batch.truths.resize(cfg.n);
  for (std::size_t i = 0; i < cfg.n; ++i) {
    CounterRng rng = substream(cfg.seed ^ kSampleStream, cfg.sample_offset + i);
    double* x = batch.features.data() + i * static_cast<std::size_t>(cfg.dim);
    for (int j = 0; j < cfg.dim; ++j) x[j] = 2.0 * rng.next_unit() - 1.0;
    double mean_p = w_pitch[0], mean_y = w_yaw[0];
    for (int j = 0; j < cfg.dim; ++j) {
      mean_p += w_pitch[j + 1] * x[j];
      mean_y += w_yaw[j + 1] * x[j];
    }
    const double spread = cfg.sigma_scale * std::exp(cfg.hetero_slope * x[0]);
    batch.truths[i].pitch =
        mean_p + cfg.sigma_pitch * spread * std_normal_quantile(rng.next_unit());
    batch.truths[i].yaw =
        mean_y + cfg.sigma_yaw * spread * std_normal_quantile(rng.next_unit());
  }
  return batch;
}

}  // namespace gazecal
