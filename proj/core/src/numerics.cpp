#include "blochctl/numerics.hpp"

#include <cmath>

namespace bloch::numerics {

double integrate_samples(std::span<const double> f, double h) {
  const std::size_t n = f.size();
  if (n < 3) throw std::invalid_argument("integrate_samples: need at least 3 samples");
  if (!(h > 0.0)) throw std::invalid_argument("integrate_samples: step must be positive");

  std::size_t intervals = n - 1;
  double total = 0.0;
  std::size_t last = intervals;
  if (intervals % 2 != 0) {
    // 3/8 rule on the last three intervals, plain Simpson on the rest.
    last = intervals - 3;
    total += 3.0 * h / 8.0 *
             (f[last] + 3.0 * f[last + 1] + 3.0 * f[last + 2] + f[last + 3]);
  }
  double odd = 0.0, even = 0.0;
  for (std::size_t i = 1; i < last; i += 2) odd += f[i];
  for (std::size_t i = 2; i < last; i += 2) even += f[i];
  if (last > 0) total += h / 3.0 * (f[0] + 4.0 * odd + 2.0 * even + f[last]);
  return total;
}

double integrate(const std::function<double(double)>& f, double t0, double t1, int n) {
  if (n < 2) throw std::invalid_argument("integrate: need at least 2 intervals");
  if (n % 2 != 0) ++n;
  const double h = (t1 - t0) / n;
  double odd = 0.0, even = 0.0;
  for (int i = 1; i < n; i += 2) odd += f(t0 + i * h);
  for (int i = 2; i < n; i += 2) even += f(t0 + i * h);
  return h / 3.0 * (f(t0) + 4.0 * odd + 2.0 * even + f(t1));
}

std::vector<double> solve_dense(std::vector<double> a, std::vector<double> rhs, int n) {
  if (n <= 0 || a.size() != static_cast<std::size_t>(n) * n ||
      rhs.size() != static_cast<std::size_t>(n)) {
    throw std::invalid_argument("solve_dense: inconsistent dimensions");
  }
  for (int col = 0; col < n; ++col) {
    int pivot = col;
    double best = std::abs(a[col * n + col]);
    for (int r = col + 1; r < n; ++r) {
      const double v = std::abs(a[r * n + col]);
      if (v > best) {
        best = v;
        pivot = r;
      }
    }
    if (best < 1e-300) throw std::runtime_error("solve_dense: singular system");
    if (pivot != col) {
      for (int c = col; c < n; ++c) std::swap(a[pivot * n + c], a[col * n + c]);
      std::swap(rhs[pivot], rhs[col]);
    }
    const double inv = 1.0 / a[col * n + col];
    for (int r = col + 1; r < n; ++r) {
      const double factor = a[r * n + col] * inv;
      if (factor == 0.0) continue;
      for (int c = col; c < n; ++c) a[r * n + c] -= factor * a[col * n + c];
      rhs[r] -= factor * rhs[col];
    }
  }
  std::vector<double> x(n);
  for (int r = n - 1; r >= 0; --r) {
    double acc = rhs[r];
    for (int c = r + 1; c < n; ++c) acc -= a[r * n + c] * x[c];
    x[r] = acc / a[r * n + r];
  }
  return x;
}

}  // namespace bloch::numerics
