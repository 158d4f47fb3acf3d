#include "gazecal/isotonic.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gazecal {

MonotoneMap::MonotoneMap(std::vector<Knot> knots) : knots_(std::move(knots)) {
  if (knots_.size() < 2) {
    throw std::invalid_argument("MonotoneMap: need at least 2 knots");
  }
  if (knots_.front().x != 0.0 || knots_.front().y != 0.0) {
    throw std::invalid_argument("MonotoneMap: first knot must be (0,0)");
  }
  if (knots_.back().x != 1.0 || knots_.back().y != 1.0) {
    throw std::invalid_argument("MonotoneMap: last knot must be (1,1)");
  }
  for (std::size_t i = 1; i < knots_.size(); ++i) {
    if (!(knots_[i].x > knots_[i - 1].x)) {
      throw std::invalid_argument("MonotoneMap: knot x values must be strictly increasing");
    }
    if (knots_[i].y < knots_[i - 1].y) {
      throw std::invalid_argument("MonotoneMap: knot y values must be nondecreasing");
    }
  }
}

MonotoneMap MonotoneMap::identity() { return MonotoneMap({{0.0, 0.0}, {1.0, 1.0}}); }

bool MonotoneMap::operator==(const MonotoneMap& other) const {
  if (knots_.size() != other.knots_.size()) return false;
  for (std::size_t i = 0; i < knots_.size(); ++i) {
    if (knots_[i].x != other.knots_[i].x || knots_[i].y != other.knots_[i].y) return false;
  }
  return true;
}

double MonotoneMap::eval(double p) const {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw std::invalid_argument("MonotoneMap::eval: p outside [0, 1]");
  }
  auto hi = std::lower_bound(knots_.begin(), knots_.end(), p,
                             [](const Knot& k, double v) { return k.x < v; });
  if (hi == knots_.begin()) return knots_.front().y;
  if (hi == knots_.end()) return knots_.back().y;
  if (hi->x == p) return hi->y;
  auto lo = hi - 1;
  const double t = (p - lo->x) / (hi->x - lo->x);
  return lo->y + t * (hi->y - lo->y);
}

double MonotoneMap::invert(double p) const {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw std::invalid_argument("MonotoneMap::invert: p outside [0, 1]");
  }
  // First knot whose y reaches p; endpoint anchors guarantee one exists.
  auto hi = std::lower_bound(knots_.begin(), knots_.end(), p,
                             [](const Knot& k, double v) { return k.y < v; });
  if (hi == knots_.end()) return knots_.back().x;
  if (hi->y == p) {
    // Flat preimage: midpoint of the maximal run of knots at level p.
    auto last = hi;
    while (last + 1 != knots_.end() && (last + 1)->y == p) ++last;
    return 0.5 * (hi->x + last->x);
  }
  if (hi == knots_.begin()) return knots_.front().x;
  auto lo = hi - 1;
  const double t = (p - lo->y) / (hi->y - lo->y);
  return lo->x + t * (hi->x - lo->x);
}

MonotoneMap pava_fit(std::span<const WeightedPoint> points) {
  if (points.empty()) {
    throw std::invalid_argument("pava_fit: empty input");
  }
  for (const auto& pt : points) {
    if (!(pt.x >= 0.0 && pt.x <= 1.0) || !std::isfinite(pt.x)) {
      throw std::invalid_argument("pava_fit: x outside [0, 1]");
    }
    if (!(pt.y >= 0.0 && pt.y <= 1.0) || !std::isfinite(pt.y)) {
      throw std::invalid_argument("pava_fit: y outside [0, 1]");
    }
    if (!(pt.weight > 0.0) || !std::isfinite(pt.weight)) {
      throw std::invalid_argument("pava_fit: weight must be positive");
    }
  }

  std::vector<WeightedPoint> pts(points.begin(), points.end());
  std::stable_sort(pts.begin(), pts.end(),
                   [](const WeightedPoint& a, const WeightedPoint& b) { return a.x < b.x; });

  // Pool tied x by weighted mean.
  std::vector<double> xs, ys, ws;
  for (const auto& pt : pts) {
    if (!xs.empty() && xs.back() == pt.x) {
      const double w = ws.back() + pt.weight;
      ys.back() = (ys.back() * ws.back() + pt.y * pt.weight) / w;
      ws.back() = w;
    } else {
      xs.push_back(pt.x);
      ys.push_back(pt.y);
      ws.push_back(pt.weight);
    }
  }

  // Pool-adjacent-violators over the pooled sequence.
  const std::size_t n = xs.size();
  std::vector<double> level_y, level_w;
  std::vector<std::size_t> level_len;
  level_y.reserve(n);
  level_w.reserve(n);
  level_len.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    level_y.push_back(ys[i]);
    level_w.push_back(ws[i]);
    level_len.push_back(1);
    while (level_y.size() > 1 && level_y[level_y.size() - 2] > level_y.back()) {
      const std::size_t k = level_y.size();
      const double w = level_w[k - 2] + level_w[k - 1];
      level_y[k - 2] = (level_y[k - 2] * level_w[k - 2] + level_y[k - 1] * level_w[k - 1]) / w;
      level_w[k - 2] = w;
      level_len[k - 2] += level_len[k - 1];
      level_y.pop_back();
      level_w.pop_back();
      level_len.pop_back();
    }
  }

  std::vector<double> fitted;
  fitted.reserve(n);
  for (std::size_t b = 0; b < level_y.size(); ++b) {
    const double v = std::clamp(level_y[b], 0.0, 1.0);
    fitted.insert(fitted.end(), level_len[b], v);
  }

  std::vector<MonotoneMap::Knot> knots;
  knots.reserve(n + 2);
  knots.push_back({0.0, 0.0});
  for (std::size_t i = 0; i < n; ++i) {
    if (xs[i] == 0.0 || xs[i] == 1.0) continue;  // anchors own the endpoints
    knots.push_back({xs[i], fitted[i]});
  }
  knots.push_back({1.0, 1.0});
  return MonotoneMap(std::move(knots));
}

}  // namespace gazecal
