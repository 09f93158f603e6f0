#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

#include "cwhopf/error.hpp"

namespace cwhopf {

// Two-sample Kolmogorov-Smirnov statistic sup |F_a - F_b|, by a merge over
// the sorted samples. Tied values are consumed together on both sides before
// the distance is evaluated.
inline double ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw ConfigError("KS statistic needs two non-empty samples");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == x) ++i;
    while (j < b.size() && b[j] == x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

// Large-sample 5% critical value, 1.36 sqrt((n + m) / (n m)).
inline double ks_threshold(std::size_t n, std::size_t m) {
  const double nn = static_cast<double>(n);
  const double mm = static_cast<double>(m);
  return 1.36 * std::sqrt((nn + mm) / (nn * mm));
}

// E[x], E[x^2], E[x^3], E[x^4].
inline std::array<double, 4> raw_moments(const std::vector<double>& x) {
  if (x.empty()) throw ConfigError("moments of an empty sample");
  std::array<double, 4> m{};
  for (double v : x) {
    const double v2 = v * v;
    m[0] += v;
    m[1] += v2;
    m[2] += v2 * v;
    m[3] += v2 * v2;
  }
  for (double& v : m) v /= static_cast<double>(x.size());
  return m;
}

inline double mean(const std::vector<double>& x) { return raw_moments(x)[0]; }

// Unbiased sample variance, two-pass.
inline double variance(const std::vector<double>& x) {
  if (x.size() < 2) throw ConfigError("variance needs at least two samples");
  double mu = 0.0;
  for (double v : x) mu += v;
  mu /= static_cast<double>(x.size());
  double s = 0.0;
  for (double v : x) s += (v - mu) * (v - mu);
  return s / static_cast<double>(x.size() - 1);
}

// 0.5 * sum |p - q| over two probability vectors of equal length.
inline double total_variation(const std::vector<double>& p, const std::vector<double>& q) {
  if (p.size() != q.size()) throw ConfigError("total variation needs distributions on the same support");
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s += std::abs(p[i] - q[i]);
  return 0.5 * s;
}

// Empirical distribution of integer-valued outcomes on [0, size).
inline std::vector<double> empirical_pmf(const std::vector<std::size_t>& outcomes, std::size_t size) {
  std::vector<double> p(size, 0.0);
  for (std::size_t k : outcomes) {
    if (k >= size) throw ConfigError("outcome outside the declared support");
    p[k] += 1.0;
  }
  for (double& v : p) v /= static_cast<double>(outcomes.size());
  return p;
}

// Least-squares slope of y against x.
inline double ols_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw ConfigError("slope fit needs two equally long series");
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(y.size());
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  if (sxx == 0.0) throw ConfigError("slope fit needs distinct abscissae");
  return sxy / sxx;
}

}  // namespace cwhopf
