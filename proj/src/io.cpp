#include "gazecal/io.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <ctime>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "gazecal/errors.hpp"
#include "gazecal/rng.hpp"

namespace gazecal::io {

namespace {

constexpr std::uint64_t kSplitStream = 0x73706c6974ull;  // "split"

const std::array<const char*, 7> kPredictionCols = {
    "id", "pitch_mean", "yaw_mean", "pitch_var", "yaw_var", "pitch_true", "yaw_true"};
const std::array<const char*, 7> kQuantileCols = {
    "id", "pitch_lo", "pitch_hi", "yaw_lo", "yaw_hi", "pitch_true", "yaw_true"};

double parse_number(const std::string& field, std::size_t line, const char* column) {
  double v = 0.0;
  const char* begin = field.data();
  const char* end = begin + field.size();
  auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc{} || ptr != end) {
    throw parse_error(line, column, "not a number: '" + field + "'");
  }
  if (!std::isfinite(v)) {
    throw parse_error(line, column, "value must be finite");
  }
  return v;
}

void check_id(const std::string& id, std::size_t line,
              std::unordered_set<std::string>& seen) {
  if (id.empty()) throw parse_error(line, "id", "empty id");
  if (id.find(',') != std::string::npos || id.find('\n') != std::string::npos) {
    throw parse_error(line, "id", "id must not contain ',' or newline");
  }
  if (!seen.insert(id).second) throw parse_error(line, "id", "duplicate id '" + id + "'");
}

void check_variance(double v, std::size_t line, const char* column) {
  if (!(v > 0.0)) throw parse_error(line, column, "variance must be > 0");
}

void check_truth(double v, double bound, std::size_t line, const char* column) {
  if (std::abs(v) > bound) {
    throw parse_error(line, column,
                      "truth angle out of range [-" + format_double(bound) + ", " +
                          format_double(bound) + "]");
  }
}

std::vector<std::string> split_csv(const std::string& row, std::size_t line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = row.find(',', start);
    if (comma == std::string::npos) {
      fields.push_back(row.substr(start));
      break;
    }
    fields.push_back(row.substr(start, comma - start));
    start = comma + 1;
  }
  if (fields.size() != 7) {
    throw parse_error(line, "", "expected 7 fields, got " + std::to_string(fields.size()));
  }
  return fields;
}

std::string strip_cr(std::string s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
  return s;
}

// Pulls the seven values of one record out of a parsed JSONL object.
std::array<std::string, 7> jsonl_fields(const nlohmann::json& obj, std::size_t line,
                                        const std::array<const char*, 7>& cols) {
  if (!obj.is_object()) throw parse_error(line, "", "expected a JSON object");
  std::array<std::string, 7> out;
  for (std::size_t i = 0; i < cols.size(); ++i) {
    const auto it = obj.find(cols[i]);
    if (it == obj.end()) {
      throw parse_error(line, cols[i], "missing key");
    }
    if (i == 0) {
      if (!it->is_string()) throw parse_error(line, cols[i], "id must be a string");
      out[i] = it->get<std::string>();
    } else {
      if (!it->is_number()) throw parse_error(line, cols[i], "not a number");
      out[i] = nlohmann::json(it->get<double>()).dump();
    }
  }
  return out;
}

template <typename RowFn>
void read_rows(std::istream& in, DumpFormat format, const std::array<const char*, 7>& cols,
               const char* header, RowFn&& on_row) {
  std::string line;
  std::size_t lineno = 0;
  if (format == DumpFormat::csv) {
    if (!std::getline(in, line)) {
      throw parse_error(1, "", std::string("missing header '") + header + "'");
    }
    ++lineno;
    if (strip_cr(line) != header) {
      throw parse_error(1, "", std::string("bad header, expected '") + header + "'");
    }
    while (std::getline(in, line)) {
      ++lineno;
      line = strip_cr(line);
      if (line.empty()) continue;
      on_row(split_csv(line, lineno), lineno);
    }
  } else {
    while (std::getline(in, line)) {
      ++lineno;
      line = strip_cr(line);
      if (line.empty()) continue;
      nlohmann::json obj;
      try {
        obj = nlohmann::json::parse(line);
      } catch (const nlohmann::json::exception& e) {
        throw parse_error(lineno, "", std::string("invalid JSON: ") + e.what());
      }
      std::array<std::string, 7> fields = jsonl_fields(obj, lineno, cols);
      on_row(std::vector<std::string>(fields.begin(), fields.end()), lineno);
    }
  }
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "' for reading");
  return in;
}

void validate_for_write(const PredictionSet& set) {
  std::unordered_set<std::string> seen;
  for (std::size_t i = 0; i < set.size(); ++i) {
    const auto& s = set.samples[i];
    const std::string at = "sample " + std::to_string(i);
    if (s.id.empty() || !seen.insert(s.id).second) {
      throw std::invalid_argument("write_predictions: missing or duplicate id at " + at);
    }
    for (double v : {s.pitch_marginal.mean, s.yaw_marginal.mean, s.truth.pitch, s.truth.yaw}) {
      if (!std::isfinite(v)) {
        throw std::invalid_argument("write_predictions: non-finite value at " + at);
      }
    }
    if (!(s.pitch_marginal.variance > 0.0) || !(s.yaw_marginal.variance > 0.0) ||
        !std::isfinite(s.pitch_marginal.variance) || !std::isfinite(s.yaw_marginal.variance)) {
      throw std::invalid_argument("write_predictions: non-positive variance at " + at);
    }
  }
}

std::string timestamp_utc() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

DumpFormat format_from_path(const std::string& path) {
  return path.size() >= 6 && path.compare(path.size() - 6, 6, ".jsonl") == 0
             ? DumpFormat::jsonl
             : DumpFormat::csv;
}

PredictionSet read_predictions(std::istream& in, DumpFormat format) {
  PredictionSet set;
  std::unordered_set<std::string> seen;
  read_rows(in, format, kPredictionCols, kPredictionHeader,
            [&](const std::vector<std::string>& f, std::size_t line) {
              LabeledPrediction s;
              s.id = f[0];
              check_id(s.id, line, seen);
              s.pitch_marginal.mean = parse_number(f[1], line, "pitch_mean");
              s.yaw_marginal.mean = parse_number(f[2], line, "yaw_mean");
              s.pitch_marginal.variance = parse_number(f[3], line, "pitch_var");
              check_variance(s.pitch_marginal.variance, line, "pitch_var");
              s.yaw_marginal.variance = parse_number(f[4], line, "yaw_var");
              check_variance(s.yaw_marginal.variance, line, "yaw_var");
              s.truth.pitch = parse_number(f[5], line, "pitch_true");
              check_truth(s.truth.pitch, kPitchBound, line, "pitch_true");
              s.truth.yaw = parse_number(f[6], line, "yaw_true");
              check_truth(s.truth.yaw, kYawBound, line, "yaw_true");
              set.samples.push_back(std::move(s));
            });
  return set;
}

PredictionSet read_predictions_file(const std::string& path, DumpFormat format) {
  auto in = open_in(path);
  return read_predictions(in, format);
}

void write_predictions(const PredictionSet& set, std::ostream& out, DumpFormat format) {
  validate_for_write(set);
  if (format == DumpFormat::csv) {
    out << kPredictionHeader << '\n';
    for (const auto& s : set.samples) {
      out << s.id << ',' << format_double(s.pitch_marginal.mean) << ','
          << format_double(s.yaw_marginal.mean) << ','
          << format_double(s.pitch_marginal.variance) << ','
          << format_double(s.yaw_marginal.variance) << ',' << format_double(s.truth.pitch)
          << ',' << format_double(s.truth.yaw) << '\n';
    }
  } else {
    for (const auto& s : set.samples) {
      nlohmann::json obj{{"id", s.id},
                         {"pitch_mean", s.pitch_marginal.mean},
                         {"yaw_mean", s.yaw_marginal.mean},
                         {"pitch_var", s.pitch_marginal.variance},
                         {"yaw_var", s.yaw_marginal.variance},
                         {"pitch_true", s.truth.pitch},
                         {"yaw_true", s.truth.yaw}};
      out << obj.dump() << '\n';
    }
  }
}

void write_predictions_file(const PredictionSet& set, const std::string& path,
                            DumpFormat format) {
  auto out = open_out(path);
  write_predictions(set, out, format);
}

QuantileDump read_quantile_dump(std::istream& in, DumpFormat format) {
  QuantileDump dump;
  std::unordered_set<std::string> seen;
  read_rows(in, format, kQuantileCols, kQuantileHeader,
            [&](const std::vector<std::string>& f, std::size_t line) {
              QuantileRow r;
              r.id = f[0];
              check_id(r.id, line, seen);
              r.pitch_lo = parse_number(f[1], line, "pitch_lo");
              r.pitch_hi = parse_number(f[2], line, "pitch_hi");
              r.yaw_lo = parse_number(f[3], line, "yaw_lo");
              r.yaw_hi = parse_number(f[4], line, "yaw_hi");
              r.truth.pitch = parse_number(f[5], line, "pitch_true");
              check_truth(r.truth.pitch, kPitchBound, line, "pitch_true");
              r.truth.yaw = parse_number(f[6], line, "yaw_true");
              check_truth(r.truth.yaw, kYawBound, line, "yaw_true");
              dump.rows.push_back(std::move(r));
            });
  return dump;
}

QuantileDump read_quantile_dump_file(const std::string& path, DumpFormat format) {
  auto in = open_in(path);
  return read_quantile_dump(in, format);
}

void write_quantile_dump(const QuantileDump& dump, std::ostream& out, DumpFormat format) {
  if (format == DumpFormat::csv) {
    out << kQuantileHeader << '\n';
    for (const auto& r : dump.rows) {
      out << r.id << ',' << format_double(r.pitch_lo) << ',' << format_double(r.pitch_hi)
          << ',' << format_double(r.yaw_lo) << ',' << format_double(r.yaw_hi) << ','
          << format_double(r.truth.pitch) << ',' << format_double(r.truth.yaw) << '\n';
    }
  } else {
    for (const auto& r : dump.rows) {
      nlohmann::json obj{{"id", r.id},           {"pitch_lo", r.pitch_lo},
                         {"pitch_hi", r.pitch_hi}, {"yaw_lo", r.yaw_lo},
                         {"yaw_hi", r.yaw_hi},     {"pitch_true", r.truth.pitch},
                         {"yaw_true", r.truth.yaw}};
      out << obj.dump() << '\n';
    }
  }
}

void write_quantile_dump_file(const QuantileDump& dump, const std::string& path,
                              DumpFormat format) {
  auto out = open_out(path);
  write_quantile_dump(dump, out, format);
}

DumpKind detect_dump_kind(const std::string& path, DumpFormat format) {
  auto in = open_in(path);
  std::string line;
  if (!std::getline(in, line)) return DumpKind::prediction;
  line = strip_cr(line);
  if (format == DumpFormat::csv) {
    if (line == kPredictionHeader) return DumpKind::prediction;
    if (line == kQuantileHeader) return DumpKind::quantile;
    throw parse_error(1, "", "unrecognized header '" + line + "'");
  }
  nlohmann::json obj;
  try {
    obj = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw parse_error(1, "", std::string("invalid JSON: ") + e.what());
  }
  if (obj.contains("pitch_mean")) return DumpKind::prediction;
  if (obj.contains("pitch_lo")) return DumpKind::quantile;
  throw parse_error(1, "", "first record has neither pitch_mean nor pitch_lo");
}

std::pair<PredictionSet, PredictionSet> split_calibration(const PredictionSet& set,
                                                          std::size_t n_cal,
                                                          std::uint64_t seed) {
  if (n_cal == 0) throw std::invalid_argument("split_calibration: n_cal must be positive");
  if (n_cal >= set.size()) {
    throw std::invalid_argument("split_calibration: n_cal (" + std::to_string(n_cal) +
                                ") must be smaller than the set size (" +
                                std::to_string(set.size()) + ")");
  }
  const std::size_t n = set.size();
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  CounterRng rng = substream(seed ^ kSplitStream, 0);
  for (std::size_t i = 0; i < n_cal; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.next_below(n - i));
    std::swap(idx[i], idx[j]);
  }
  std::vector<bool> in_cal(n, false);
  for (std::size_t i = 0; i < n_cal; ++i) in_cal[idx[i]] = true;

  std::pair<PredictionSet, PredictionSet> out;
  out.first.samples.reserve(n_cal);
  out.second.samples.reserve(n - n_cal);
  for (std::size_t i = 0; i < n; ++i) {
    (in_cal[i] ? out.first : out.second).samples.push_back(set.samples[i]);
  }
  return out;
}

nlohmann::json monotone_map_to_json(const MonotoneMap& map) {
  nlohmann::json knots = nlohmann::json::array();
  for (const auto& k : map.knots()) knots.push_back({k.x, k.y});
  return nlohmann::json{{"knots", std::move(knots)}};
}

MonotoneMap monotone_map_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("knots") || !j["knots"].is_array()) {
    throw std::invalid_argument("monotone map JSON must be {\"knots\": [[x, y], ...]}");
  }
  std::vector<MonotoneMap::Knot> knots;
  knots.reserve(j["knots"].size());
  for (const auto& k : j["knots"]) {
    if (!k.is_array() || k.size() != 2 || !k[0].is_number() || !k[1].is_number()) {
      throw std::invalid_argument("monotone map knot must be a [x, y] number pair");
    }
    knots.push_back({k[0].get<double>(), k[1].get<double>()});
  }
  return MonotoneMap(std::move(knots));  // re-validates the invariants
}

void save_calibrator(const CalibratedPredictor& cp, const std::string& path) {
  nlohmann::json j{{"pitch_map", monotone_map_to_json(cp.pitch_map)},
                   {"yaw_map", monotone_map_to_json(cp.yaw_map)},
                   {"meta",
                    {{"n_calibration", cp.n_calibration}, {"created", timestamp_utc()}}}};
  auto out = open_out(path);
  out << j.dump(2) << '\n';
}

CalibratedPredictor load_calibrator(const std::string& path) {
  auto in = open_in(path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("calibrator file '" + path + "' is not valid JSON: " +
                                e.what());
  }
  if (!j.contains("pitch_map") || !j.contains("yaw_map")) {
    throw std::invalid_argument("calibrator file '" + path +
                                "' must contain pitch_map and yaw_map");
  }
  CalibratedPredictor cp{monotone_map_from_json(j["pitch_map"]),
                         monotone_map_from_json(j["yaw_map"]), 0};
  if (j.contains("meta") && j["meta"].contains("n_calibration")) {
    cp.n_calibration = j["meta"]["n_calibration"].get<std::size_t>();
  }
  return cp;
}

void write_coverage_csv(const CPEReport& report, const std::string& path) {
  auto out = open_out(path);
  out << "p,coverage,abs_error\n";
  for (std::size_t i = 0; i < CoverageCurve::kPoints; ++i) {
    out << format_double(CoverageCurve::grid(i)) << ','
        << format_double(report.curve.coverage[i]) << ','
        << format_double(report.per_point_errors[i]) << '\n';
  }
}

}  // namespace gazecal::io
