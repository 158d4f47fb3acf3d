#include "gazecal/types.hpp"

#include <cmath>

namespace gazecal {

ComponentColumns columns(const PredictionSet& set, Component c) {
  ComponentColumns cols;
  cols.mean.reserve(set.size());
  cols.sigma.reserve(set.size());
  cols.truth.reserve(set.size());
  for (const auto& s : set.samples) {
    const GaussianMarginal& g = s.marginal(c);
    cols.mean.push_back(g.mean);
    cols.sigma.push_back(std::sqrt(g.variance));
    cols.truth.push_back(s.truth_of(c));
  }
  return cols;
}

}  // namespace gazecal
