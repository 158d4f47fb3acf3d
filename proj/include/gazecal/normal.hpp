#pragma once

#include "gazecal/types.hpp"

namespace gazecal {

// Standard normal CDF. Accurate to well below 1e-8 absolute on [-8, 8]
// (evaluated through erfc). Throws std::invalid_argument on non-finite input.
double std_normal_cdf(double z);

// Inverse of std_normal_cdf on the open interval (0, 1). Initial rational
// approximation refined by one Halley step against std_normal_cdf; the round
// trip |std_normal_cdf(z) - p| stays below 1e-8 across the domain.
// Throws std::domain_error for p <= 0 or p >= 1; callers own the analytic
// limits at the endpoints.
double std_normal_quantile(double p);

// CDF / quantile of an arbitrary Gaussian marginal.
double gaussian_cdf(const GaussianMarginal& g, double x);
double gaussian_quantile(const GaussianMarginal& g, double p);

}  // namespace gazecal
