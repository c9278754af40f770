#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

namespace dlfrm::testing {

struct Moments {
  double mean = 0.0;
  double var = 0.0;
  double n = 0.0;

  double se_mean() const { return std::sqrt(var / n); }
  /// Standard error of the sample variance given the fourth central moment.
  double m4 = 0.0;
  double se_var() const { return std::sqrt(std::max(m4 - var * var, 0.0) / n); }
};

inline Moments moments(const std::vector<double> &x) {
  Moments m;
  m.n = static_cast<double>(x.size());
  for (double v : x)
    m.mean += v;
  m.mean /= m.n;
  for (double v : x) {
    const double d2 = (v - m.mean) * (v - m.mean);
    m.var += d2;
    m.m4 += d2 * d2;
  }
  m.var /= m.n - 1.0;
  m.m4 /= m.n;
  return m;
}

inline std::vector<double> draws(int n, const std::function<double()> &f) {
  std::vector<double> out(static_cast<std::size_t>(n));
  for (auto &v : out)
    v = f();
  return out;
}

/// Two-sample Kolmogorov-Smirnov statistic sup |F_a - F_b|.
inline double ks_statistic(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x)
      ++i;
    while (j < b.size() && b[j] <= x)
      ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

/// Asymptotic two-sample KS critical value at level 0.01.
inline double ks_critical_01(std::size_t na, std::size_t nb) {
  const double a = static_cast<double>(na);
  const double b = static_cast<double>(nb);
  return 1.6276 * std::sqrt((a + b) / (a * b));
}

/// Composite Simpson rule on [lo, hi] with n (even) panels.
inline double simpson(const std::function<double(double)> &f, double lo,
                      double hi, int n) {
  const double h = (hi - lo) / n;
  double s = f(lo) + f(hi);
  for (int i = 1; i < n; ++i)
    s += (i % 2 == 1 ? 4.0 : 2.0) * f(lo + i * h);
  return s * h / 3.0;
}

} // namespace dlfrm::testing
