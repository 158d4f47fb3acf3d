#include <exception>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "gazecal/calibration.hpp"
#include "gazecal/errors.hpp"
#include "gazecal/io.hpp"
#include "gazecal/metrics.hpp"
#include "gazecal/synth.hpp"
#include "gazecal/toytrain.hpp"

namespace {

using json = nlohmann::json;
using namespace gazecal;

io::DumpFormat resolve_format(const std::string& flag, const std::string& path) {
  if (flag == "csv") return io::DumpFormat::csv;
  if (flag == "jsonl") return io::DumpFormat::jsonl;
  return io::format_from_path(path);
}

json curve_json(const CPEReport& report) {
  json rows = json::array();
  for (std::size_t i = 0; i < CoverageCurve::kPoints; ++i) {
    rows.push_back({CoverageCurve::grid(i), report.curve.coverage[i],
                    report.per_point_errors[i]});
  }
  return rows;
}

json ci_json(const CIQuery& q, const CIReport& r) {
  return json{{"p_lo", q.p_lo},
              {"p_hi", q.p_hi},
              {"p_ci", q.p_ci()},
              {"inclusion_rate", r.inclusion_rate},
              {"avg_range_pitch", r.avg_range_pitch},
              {"avg_range_yaw", r.avg_range_yaw},
              {"avg_range_combined", r.avg_range_combined}};
}

void write_json_file(const json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << j.dump(2) << '\n';
}

// ------------------------------------------------------------------- synth

struct SynthOpts {
  SynthConfig cfg;
  std::string noise = "gaussian";
  std::string out;
  std::string format = "auto";
};

void run_synth(const SynthOpts& o) {
  SynthConfig cfg = o.cfg;
  cfg.noise = o.noise == "student-t" ? NoiseKind::student_t : NoiseKind::gaussian;
  const PredictionSet set = generate_scenario(cfg);
  io::write_predictions_file(set, o.out, resolve_format(o.format, o.out));
  std::cout << "wrote " << set.size() << " predictions to " << o.out << "\n";
}

// --------------------------------------------------------------- calibrate

struct CalibrateOpts {
  std::string in;
  std::string format = "auto";
  std::size_t n_cal = 100;
  std::uint64_t seed = 0;
  std::string out_map;
  std::string out_test;
};

void run_calibrate(const CalibrateOpts& o) {
  const auto format = resolve_format(o.format, o.in);
  if (io::detect_dump_kind(o.in, format) != io::DumpKind::prediction) {
    throw std::runtime_error("calibrate needs a prediction dump; quantile dumps provide only "
                             "two fixed quantile points and cannot be recalibrated");
  }
  const PredictionSet set = io::read_predictions_file(o.in, format);
  auto [cal, test] = io::split_calibration(set, o.n_cal, o.seed);
  const CalibratedPredictor cp = fit_calibrator(cal);
  io::save_calibrator(cp, o.out_map);
  io::write_predictions_file(test, o.out_test, resolve_format(o.format, o.out_test));
  std::cout << "fitted calibrator on " << cal.size() << " samples (pitch knots: "
            << cp.pitch_map.knots().size() << ", yaw knots: " << cp.yaw_map.knots().size()
            << "); " << test.size() << " test samples kept\n";
}

// ---------------------------------------------------------------- evaluate

struct EvaluateOpts {
  std::string in;
  std::string format = "auto";
  std::string map;
  double ci = 0.95;
  std::string report;
  std::string curve;
  std::string curve_mode = "joint";
  int threads = 1;
};

json evaluate_prediction_dump(const EvaluateOpts& o, io::DumpFormat format) {
  const PredictionSet set = io::read_predictions_file(o.in, format);
  const bool calibrated = !o.map.empty();

  CalibratedPredictor cp{MonotoneMap::identity(), MonotoneMap::identity(), 0};
  if (calibrated) cp = io::load_calibrator(o.map);

  std::unique_ptr<QuantileFunction> qf;
  if (calibrated) {
    qf = std::make_unique<CalibratedQuantiles>(set, cp);
  } else {
    qf = std::make_unique<GaussianQuantiles>(set);
  }

  const CPEReport joint = cpe(coverage_curve(set, *qf, CoverageMode::joint, o.threads));
  const CPEReport pitch = cpe(coverage_curve(set, *qf, CoverageMode::pitch_only, o.threads));
  const CPEReport yaw = cpe(coverage_curve(set, *qf, CoverageMode::yaw_only, o.threads));

  const CIQuery q{(1.0 - o.ci) / 2.0, 1.0 - (1.0 - o.ci) / 2.0};
  const CIReport ci = inclusion_rate(set, *qf, q, o.threads);

  std::vector<AngularPair> points;
  points.reserve(set.size());
  for (const auto& s : set.samples) {
    points.push_back(calibrated
                         ? calibrated_median(cp, s)
                         : AngularPair{s.pitch_marginal.mean, s.yaw_marginal.mean});
  }
  double err_sum = 0.0;
  for (std::size_t i = 0; i < set.size(); ++i) {
    err_sum += angular_error(points[i], set.samples[i].truth);
  }
  const double corr = error_uncertainty_correlation(set, points);

  if (!o.curve.empty()) {
    const CPEReport& chosen =
        o.curve_mode == "pitch" ? pitch : o.curve_mode == "yaw" ? yaw : joint;
    io::write_coverage_csv(chosen, o.curve);
  }

  return json{{"input_kind", "prediction"},
              {"n_samples", set.size()},
              {"calibrated", calibrated},
              {"point_estimate", calibrated ? "calibrated_median" : "mean"},
              {"angular_error_deg_mean", err_sum / static_cast<double>(set.size())},
              {"cpe", {{"joint", joint.cpe}, {"pitch", pitch.cpe}, {"yaw", yaw.cpe}}},
              {"coverage_curve",
               {{"joint", curve_json(joint)},
                {"pitch", curve_json(pitch)},
                {"yaw", curve_json(yaw)}}},
              {"ci", ci_json(q, ci)},
              {"error_uncertainty_correlation", corr},
              {"correlation_method", "spearman"}};
}

json evaluate_quantile_dump(const EvaluateOpts& o, io::DumpFormat format) {
  if (!o.map.empty()) {
    throw std::runtime_error("--map cannot be applied to a quantile dump: two-point quantile "
                             "predictions carry no distribution to recalibrate");
  }
  if (!o.curve.empty()) {
    throw std::runtime_error("--curve needs a full predictive distribution; a quantile dump "
                             "provides only the two stored quantile points");
  }
  const QuantileDump dump = io::read_quantile_dump_file(o.in, format);
  if (dump.rows.empty()) throw std::runtime_error("quantile dump is empty");

  const CIQuery q{(1.0 - o.ci) / 2.0, 1.0 - (1.0 - o.ci) / 2.0};
  std::vector<double> tp, ty, plo, phi, ylo, yhi;
  for (const auto& r : dump.rows) {
    tp.push_back(r.truth.pitch);
    ty.push_back(r.truth.yaw);
    plo.push_back(r.pitch_lo);
    phi.push_back(r.pitch_hi);
    ylo.push_back(r.yaw_lo);
    yhi.push_back(r.yaw_hi);
  }
  const TwoPointQuantiles qf(q.p_lo, q.p_hi, std::move(plo), std::move(phi), std::move(ylo),
                             std::move(yhi));
  const CIReport ci = inclusion_rate(tp, ty, qf, q, o.threads);

  return json{{"input_kind", "quantile_pair"},
              {"n_samples", dump.size()},
              {"crossing_rows", dump.crossing_count()},
              {"ci", ci_json(q, ci)}};
}

void run_evaluate(const EvaluateOpts& o) {
  const auto format = resolve_format(o.format, o.in);
  json report = io::detect_dump_kind(o.in, format) == io::DumpKind::prediction
                    ? evaluate_prediction_dump(o, format)
                    : evaluate_quantile_dump(o, format);
  // --threads is execution machinery with no effect on any reported value,
  // so it stays out of the echoed config: reports must be byte-identical
  // for any worker count.
  report["config"] = json{{"in", o.in},
                          {"map", o.map},
                          {"ci", o.ci},
                          {"curve", o.curve},
                          {"curve_mode", o.curve_mode}};
  write_json_file(report, o.report);
  std::cout << "report written to " << o.report << "\n";
}

// --------------------------------------------------------------- toy-train

struct ToyTrainOpts {
  std::string kind = "hetero";
  ToyDataConfig data;
  std::size_t n_test = 2000;
  double sigma_shift = 1.0;
  TrainConfig train;
  std::string out;
  std::string format = "auto";
};

void run_toy_train(const ToyTrainOpts& o) {
  ToyDataConfig train_cfg = o.data;
  const ToyBatch train_batch = generate_toy_data(train_cfg);

  ToyDataConfig test_cfg = o.data;
  test_cfg.n = o.n_test;
  test_cfg.sigma_scale = o.data.sigma_scale * o.sigma_shift;
  test_cfg.sample_offset = o.data.sample_offset + o.data.n;
  const ToyBatch test_batch = generate_toy_data(test_cfg);

  TrainConfig tc = o.train;
  tc.seed = o.data.seed;
  const auto format = resolve_format(o.format, o.out);
  if (o.kind == "hetero") {
    const ToyHeteroModel model = train_hetero(train_batch, tc);
    io::write_predictions_file(predict_hetero(model, test_batch), o.out, format);
    std::cout << "hetero model trained (final mean NLL " << mean_nll(model, train_batch)
              << "); wrote " << test_batch.size() << " predictions to " << o.out << "\n";
  } else {
    const QuantilePairModel model = train_quantile_baseline(train_batch, tc);
    if (model.crossing_pitch || model.crossing_yaw) {
      std::cerr << "note: crossing quantiles on training data (pitch=" << model.crossing_pitch
                << ", yaw=" << model.crossing_yaw << "); rows kept as-is\n";
    }
    io::write_quantile_dump_file(predict_quantiles(model, test_batch), o.out, format);
    std::cout << "quantile baseline trained; wrote " << test_batch.size()
              << " quantile rows to " << o.out << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"probabilistic gaze-prediction calibration toolkit"};
  app.require_subcommand(1);

  const auto format_check = CLI::IsMember({"auto", "csv", "jsonl"});

  SynthOpts synth_opts;
  auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic prediction dump");
  synth_cmd->add_option("--n", synth_opts.cfg.n_samples, "number of samples")->required();
  synth_cmd->add_option("--seed", synth_opts.cfg.seed, "master seed");
  synth_cmd->add_option("--alpha", synth_opts.cfg.variance_scale,
                        "predicted-sigma scale (1 = well specified)");
  synth_cmd->add_option("--bias-pitch", synth_opts.cfg.mean_bias.pitch,
                        "additive pitch mean bias, rad");
  synth_cmd->add_option("--bias-yaw", synth_opts.cfg.mean_bias.yaw,
                        "additive yaw mean bias, rad");
  synth_cmd->add_option("--noise", synth_opts.noise, "truth noise kind")
      ->check(CLI::IsMember({"gaussian", "student-t"}));
  synth_cmd->add_option("--t-dof", synth_opts.cfg.t_dof, "student-t degrees of freedom (> 2)")
      ->check(CLI::Range(3, 1000));
  synth_cmd->add_option("--sigma-pitch", synth_opts.cfg.sigma_true_pitch,
                        "true pitch noise sigma, rad");
  synth_cmd->add_option("--sigma-yaw", synth_opts.cfg.sigma_true_yaw,
                        "true yaw noise sigma, rad");
  synth_cmd->add_option("--mean-range", synth_opts.cfg.mean_range,
                        "half-width of the latent mean range, rad");
  synth_cmd->add_option("--out", synth_opts.out, "output dump path")->required();
  synth_cmd->add_option("--format", synth_opts.format, "dump format")->check(format_check);

  CalibrateOpts cal_opts;
  auto* cal_cmd =
      app.add_subcommand("calibrate", "split a dump, fit per-component calibration maps");
  cal_cmd->add_option("--in", cal_opts.in, "input prediction dump")->required();
  cal_cmd->add_option("--format", cal_opts.format, "dump format")->check(format_check);
  cal_cmd->add_option("--n-cal", cal_opts.n_cal, "calibration subset size");
  cal_cmd->add_option("--seed", cal_opts.seed, "split seed");
  cal_cmd->add_option("--out-map", cal_opts.out_map, "calibrator JSON path")->required();
  cal_cmd->add_option("--out-test", cal_opts.out_test, "held-out test dump path")->required();

  EvaluateOpts eval_opts;
  auto* eval_cmd = app.add_subcommand("evaluate", "compute CPE, CI and error reports");
  eval_cmd->add_option("--in", eval_opts.in, "input dump")->required();
  eval_cmd->add_option("--format", eval_opts.format, "dump format")->check(format_check);
  eval_cmd->add_option("--map", eval_opts.map, "calibrator JSON from 'calibrate'");
  eval_cmd->add_option("--ci", eval_opts.ci, "confidence-interval mass")
      ->check(CLI::Range(1e-6, 1.0 - 1e-6));
  eval_cmd->add_option("--report", eval_opts.report, "output report JSON path")->required();
  eval_cmd->add_option("--curve", eval_opts.curve, "optional coverage-curve CSV path");
  eval_cmd->add_option("--curve-mode", eval_opts.curve_mode, "which curve the CSV exports")
      ->check(CLI::IsMember({"joint", "pitch", "yaw"}));
  eval_cmd->add_option("--threads", eval_opts.threads, "worker threads (output-invariant)")
      ->check(CLI::Range(1, 256));

  ToyTrainOpts toy_opts;
  auto* toy_cmd =
      app.add_subcommand("toy-train", "train a desk-scale model and dump its predictions");
  toy_cmd->add_option("--kind", toy_opts.kind, "model kind")
      ->check(CLI::IsMember({"hetero", "quantile"}));
  toy_cmd->add_option("--n", toy_opts.data.n, "training samples");
  toy_cmd->add_option("--n-test", toy_opts.n_test, "test samples to dump");
  toy_cmd->add_option("--d", toy_opts.data.dim, "feature dimension")->check(CLI::Range(1, 64));
  toy_cmd->add_option("--seed", toy_opts.data.seed, "data seed");
  toy_cmd->add_option("--lr", toy_opts.train.learning_rate, "learning rate");
  toy_cmd->add_option("--iters", toy_opts.train.iterations, "gradient-descent iterations")
      ->check(CLI::Range(0, 1000000));
  toy_cmd->add_option("--sigma-pitch", toy_opts.data.sigma_pitch, "pitch noise sigma");
  toy_cmd->add_option("--sigma-yaw", toy_opts.data.sigma_yaw, "yaw noise sigma");
  toy_cmd->add_option("--hetero-slope", toy_opts.data.hetero_slope,
                      "log-sigma slope on the first feature");
  toy_cmd->add_option("--sigma-shift", toy_opts.sigma_shift,
                      "test-time sigma multiplier (distribution shift)");
  toy_cmd->add_option("--out", toy_opts.out, "output dump path")->required();
  toy_cmd->add_option("--format", toy_opts.format, "dump format")->check(format_check);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*synth_cmd) run_synth(synth_opts);
    if (*cal_cmd) run_calibrate(cal_opts);
    if (*eval_cmd) run_evaluate(eval_opts);
    if (*toy_cmd) run_toy_train(toy_opts);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
