#pragma once

#include <cstddef>
#include <span>

namespace gazecal::kernels {

// Batch kernels behind the coverage / calibration math. Each operation has a
// scalar reference implementation and an AVX2 variant; the active backend is
// chosen at runtime from CPU capabilities (override with GAZECAL_KERNELS=
// scalar|avx2 or force_backend()).
//
// Contracts the two backends share:
//  * scale_add, count_* are bit-identical between backends (kernel TUs are
//    compiled without FP contraction, comparisons are exact),
//  * normal_pit agrees to within ~1e-13 absolute (libm erfc vs. the in-tree
//    rational approximation), and
//  * sum_diff may differ in rounding only (accumulation order).
struct Backend {
  const char* name;

  // out[i] = base[i] + scale * delta[i]
  void (*scale_add)(const double* base, const double* delta, double scale, double* out,
                    std::size_t n);

  // out[i] = Phi((x[i] - mean[i]) / sigma[i]), the probability integral
  // transform of x under per-sample Gaussian marginals.
  void (*normal_pit)(const double* x, const double* mean, const double* sigma, double* out,
                     std::size_t n);

  // Number of i with a[i] <= bound_a[i].
  std::size_t (*count_leq)(const double* a, const double* bound_a, std::size_t n);

  // Number of i with a[i] <= bound_a[i] AND b[i] <= bound_b[i].
  std::size_t (*count_joint_leq)(const double* a, const double* bound_a, const double* b,
                                 const double* bound_b, std::size_t n);

  // Number of i with a[i] in [lo_a[i], hi_a[i]] AND b[i] in [lo_b[i], hi_b[i]].
  std::size_t (*count_joint_within)(const double* a, const double* lo_a, const double* hi_a,
                                    const double* b, const double* lo_b, const double* hi_b,
                                    std::size_t n);

  // Sum of hi[i] - lo[i].
  double (*sum_diff)(const double* hi, const double* lo, std::size_t n);
};

const Backend& scalar_backend();
#if defined(__x86_64__) || defined(_M_X64)
const Backend& avx2_backend();
#endif

// Runtime-selected backend (cpuid + optional GAZECAL_KERNELS env override).
const Backend& active();

// Pin the backend by name ("scalar", "avx2"); returns false if unknown or
// unsupported on this CPU. Intended for tests and benchmarks.
bool force_backend(const char* name);

// True if the named backend can run on this CPU.
bool backend_available(const char* name);

// ------------------------------------------------------------- span wrappers

inline void scale_add(std::span<const double> base, std::span<const double> delta, double scale,
                      std::span<double> out) {
  active().scale_add(base.data(), delta.data(), scale, out.data(), base.size());
}

inline void normal_pit(std::span<const double> x, std::span<const double> mean,
                       std::span<const double> sigma, std::span<double> out) {
  active().normal_pit(x.data(), mean.data(), sigma.data(), out.data(), x.size());
}

}  // namespace gazecal::kernels
