#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>

namespace rdbridge {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// x * ln(x) with 0 * ln 0 = 0.
inline double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

// x * ln(x / y) with 0 * ln(0 / y) = 0 and x * ln(x / 0) = +inf for x > 0.
inline double xlogxy(double x, double y) {
  if (x <= 0.0) return 0.0;
  if (y <= 0.0) return kInf;
  return x * std::log(x / y);
}

// ln(sum exp(v)); -inf for an empty span or all -inf entries.
inline double logsumexp(std::span<const double> v) {
  double m = -kInf;
  for (double x : v) m = std::max(m, x);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

// Two-pass logsumexp over a generated sequence, avoiding a temporary.
template <class Fn>
double logsumexp_n(long n, Fn&& term) {
  double m = -kInf;
  for (long k = 0; k < n; ++k) m = std::max(m, term(k));
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (long k = 0; k < n; ++k) s += std::exp(term(k) - m);
  return m + std::log(s);
}

inline double safe_log(double x) { return x > 0.0 ? std::log(x) : -kInf; }

}  // namespace rdbridge
