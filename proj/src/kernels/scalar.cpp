#include "gazecal/kernels/kernels.hpp"

#include <cmath>

namespace gazecal::kernels {

namespace {

constexpr double kSqrt1_2 = 0.7071067811865476;

void scale_add_scalar(const double* base, const double* delta, double scale, double* out,
                      std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = base[i] + scale * delta[i];
}

void normal_pit_scalar(const double* x, const double* mean, const double* sigma, double* out,
                       std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double z = (x[i] - mean[i]) / sigma[i];
    out[i] = 0.5 * std::erfc(-z * kSqrt1_2);
  }
}

std::size_t count_leq_scalar(const double* a, const double* bound_a, std::size_t n) {
  std::size_t count = 0;
  for (std::size_t i = 0; i < n; ++i) count += a[i] <= bound_a[i];
  return count;
}

std::size_t count_joint_leq_scalar(const double* a, const double* bound_a, const double* b,
                                   const double* bound_b, std::size_t n) {
  std::size_t count = 0;
  for (std::size_t i = 0; i < n; ++i) count += (a[i] <= bound_a[i]) & (b[i] <= bound_b[i]);
  return count;
}

std::size_t count_joint_within_scalar(const double* a, const double* lo_a, const double* hi_a,
                                      const double* b, const double* lo_b, const double* hi_b,
                                      std::size_t n) {
  std::size_t count = 0;
  for (std::size_t i = 0; i < n; ++i) {
    count += (lo_a[i] <= a[i]) & (a[i] <= hi_a[i]) & (lo_b[i] <= b[i]) & (b[i] <= hi_b[i]);
  }
  return count;
}

double sum_diff_scalar(const double* hi, const double* lo, std::size_t n) {
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) sum += hi[i] - lo[i];
  return sum;
}

}  // namespace

const Backend& scalar_backend() {
  static const Backend backend{
      "scalar",           scale_add_scalar,       normal_pit_scalar,
      count_leq_scalar,   count_joint_leq_scalar, count_joint_within_scalar,
      sum_diff_scalar,
  };
  return backend;
}

}  // namespace gazecal::kernels
