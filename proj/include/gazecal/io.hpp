#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>

#include <json.hpp>

#include "gazecal/calibration.hpp"
#include "gazecal/isotonic.hpp"
#include "gazecal/metrics.hpp"
#include "gazecal/types.hpp"

namespace gazecal::io {

enum class DumpFormat { csv, jsonl };

// ".jsonl" extension selects jsonl, anything else csv.
DumpFormat format_from_path(const std::string& path);

inline constexpr const char* kPredictionHeader =
    "id,pitch_mean,yaw_mean,pitch_var,yaw_var,pitch_true,yaw_true";
inline constexpr const char* kQuantileHeader =
    "id,pitch_lo,pitch_hi,yaw_lo,yaw_hi,pitch_true,yaw_true";

// Prediction dumps. Reading validates every row (finite values, positive
// variances, truth angles in range, unique ids) and throws parse_error with
// the line and column of the first violation; nothing is skipped silently.
// Floats are written with their shortest round-trip representation, so a
// write/read cycle is lossless.
PredictionSet read_predictions(std::istream& in, DumpFormat format);
PredictionSet read_predictions_file(const std::string& path, DumpFormat format);
void write_predictions(const PredictionSet& set, std::ostream& out, DumpFormat format);
void write_predictions_file(const PredictionSet& set, const std::string& path,
                            DumpFormat format);

// Quantile dumps (two-point baseline). Rows with lo > hi are retained; the
// caller can inspect QuantileDump::crossing_count().
QuantileDump read_quantile_dump(std::istream& in, DumpFormat format);
QuantileDump read_quantile_dump_file(const std::string& path, DumpFormat format);
void write_quantile_dump(const QuantileDump& dump, std::ostream& out, DumpFormat format);
void write_quantile_dump_file(const QuantileDump& dump, const std::string& path,
                              DumpFormat format);

// Distinguishes the two dump flavors by header / first-row keys.
enum class DumpKind { prediction, quantile };
DumpKind detect_dump_kind(const std::string& path, DumpFormat format);

// Seeded uniform split without replacement into (calibration, test); both
// halves keep the original sample order. Requires 1 <= n_cal < set.size().
// The pinned integer-only PRNG makes the partition identical across
// platforms for a given seed.
std::pair<PredictionSet, PredictionSet> split_calibration(const PredictionSet& set,
                                                          std::size_t n_cal,
                                                          std::uint64_t seed);

// MonotoneMap <-> {"knots": [[x, y], ...]}; invariants re-validated on load.
nlohmann::json monotone_map_to_json(const MonotoneMap& map);
MonotoneMap monotone_map_from_json(const nlohmann::json& j);

// Calibrator persistence:
// {"pitch_map": {...}, "yaw_map": {...},
//  "meta": {"n_calibration": int, "created": iso8601}}
void save_calibrator(const CalibratedPredictor& cp, const std::string& path);
CalibratedPredictor load_calibrator(const std::string& path);

// Reliability-curve export: "p,coverage,abs_error" rows for the 11-point grid.
void write_coverage_csv(const CPEReport& report, const std::string& path);

// Shortest round-trip representation of a double.
std::string format_double(double v);

}  // namespace gazecal::io
