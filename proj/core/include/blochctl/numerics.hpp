#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

namespace bloch::numerics {

// Composite Simpson over uniformly spaced samples with step h. An odd number
// of intervals is handled by a 3/8 rule on the last three. Needs >= 3 samples.
double integrate_samples(std::span<const double> f, double h);

// Composite Simpson of a callable on [t0, t1] with n intervals (n is rounded
// up to even).
double integrate(const std::function<double(double)>& f, double t0, double t1, int n);

// First derivative of uniformly sampled values: central differences inside,
// one-sided three-point stencils at the ends. Second order throughout.
template <class T>
std::vector<T> derivative_samples(const std::vector<T>& f, double h) {
  const std::size_t n = f.size();
  if (n < 3) throw std::invalid_argument("derivative_samples: need at least 3 samples");
  std::vector<T> d(n);
  d[0] = (f[0] * -3.0 + f[1] * 4.0 - f[2]) / (2.0 * h);
  for (std::size_t i = 1; i + 1 < n; ++i) d[i] = (f[i + 1] - f[i - 1]) / (2.0 * h);
  d[n - 1] = (f[n - 1] * 3.0 - f[n - 2] * 4.0 + f[n - 3]) / (2.0 * h);
  return d;
}

// Second derivative, same layout; four-point one-sided stencils at the ends.
template <class T>
std::vector<T> second_derivative_samples(const std::vector<T>& f, double h) {
  const std::size_t n = f.size();
  if (n < 4) throw std::invalid_argument("second_derivative_samples: need at least 4 samples");
  const double h2 = h * h;
  std::vector<T> d(n);
  d[0] = (f[0] * 2.0 - f[1] * 5.0 + f[2] * 4.0 - f[3]) / h2;
  for (std::size_t i = 1; i + 1 < n; ++i) d[i] = (f[i + 1] - f[i] * 2.0 + f[i - 1]) / h2;
  d[n - 1] = (f[n - 1] * 2.0 - f[n - 2] * 5.0 + f[n - 3] * 4.0 - f[n - 4]) / h2;
  return d;
}

// Uniform double in [0, 1) built from the top 53 bits of one mt19937_64 draw.
// Bit-identical across platforms, unlike std::uniform_real_distribution.
inline double canonical_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Uniform double in [-1, 1).
inline double symmetric_uniform(std::mt19937_64& rng) {
  return 2.0 * canonical_uniform(rng) - 1.0;
}

// Solves the dense n-by-n system a x = rhs by Gaussian elimination with
// partial pivoting. a is row-major and consumed. Throws on singular systems.
std::vector<double> solve_dense(std::vector<double> a, std::vector<double> rhs, int n);

}  // namespace bloch::numerics
