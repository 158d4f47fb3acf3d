#pragma once

#include <span>
#include <vector>

#include "gazecal/types.hpp"

namespace gazecal {

// Nondecreasing piecewise-linear map on [0, 1], anchored at (0,0) and (1,1).
// Immutable after construction; all queries are const and thread-safe.
class MonotoneMap {
public:
  struct Knot {
    double x;
    double y;
  };

  // Validates: >= 2 knots, x strictly increasing, y nondecreasing, first knot
  // (0,0), last knot (1,1). Throws std::invalid_argument otherwise.
  explicit MonotoneMap(std::vector<Knot> knots);

  static MonotoneMap identity();

  // Linear interpolation between the bracketing knots; p must lie in [0, 1].
  double eval(double p) const;

  // Preimage of p. Unique where the map rises strictly; midpoint of the flat
  // interval otherwise. p must lie in [0, 1].
  double invert(double p) const;

  const std::vector<Knot>& knots() const { return knots_; }

  bool operator==(const MonotoneMap& other) const;

private:
  std::vector<Knot> knots_;
};

// Weighted isotonic least-squares fit (pool-adjacent-violators). Points are
// sorted by x, tied x pooled by weighted mean, fitted values clamped to
// [0, 1] and anchored with (0,0) and (1,1) endpoint knots. Data landing
// exactly on x = 0 or x = 1 collapses into the anchors.
// Requires a non-empty input with all x, y in [0, 1] and weights > 0.
MonotoneMap pava_fit(std::span<const WeightedPoint> points);

}  // namespace gazecal
