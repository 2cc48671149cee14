#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

namespace mosci {

/// A real number constrained to [0,1]. Converts implicitly from double so
/// call sites read naturally; the constructor rejects NaN and out-of-range
/// values.
class Probability {
 public:
  Probability(double value) : value_(value) {
    if (!(value >= 0.0 && value <= 1.0)) {
      throw std::domain_error("Probability: value must lie in [0,1]");
    }
  }
  double value() const { return value_; }
  operator double() const { return value_; }

 private:
  double value_;
};

// ---------------------------------------------------------------------------
// Deterministic random number streams.
//
// A stream is addressed by (seed, condition, run). Instantiating a generator
// from the same descriptor always reproduces the same draw sequence, and
// distinct descriptors give statistically independent streams, so Monte-Carlo
// cells can run on any thread schedule without changing results.
// ---------------------------------------------------------------------------

namespace detail {

inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace detail

struct RngStream {
  std::uint64_t seed = 0;
  std::uint64_t condition = 0;
  std::uint64_t run = 0;

  /// Derives an independent stream for a different purpose (e.g. bootstrap
  /// resampling) at the same grid cell.
  RngStream substream(std::uint64_t tag) const {
    return RngStream{detail::mix64(seed ^ (0xda3e39cb94b95bdbULL * (tag + 1))),
                     condition, run};
  }

  friend bool operator==(const RngStream&, const RngStream&) = default;
};

/// Counter-based generator (splitmix64) keyed by an RngStream descriptor.
class Rng {
 public:
  explicit Rng(const RngStream& stream)
      : state_(detail::mix64(
            detail::mix64(detail::mix64(stream.seed) ^ stream.condition) ^
            stream.run)) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform double in [0,1).
  double next_unit() { return (next_u64() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

// ---------------------------------------------------------------------------
// Special functions. Quantiles are computed by safeguarded Newton iteration
// inside a bisection bracket on high-precision CDFs, so results do not depend
// on platform quantile routines.
// ---------------------------------------------------------------------------

namespace detail {

inline constexpr double kQuantileTol = 1e-13;

// Regularized lower incomplete gamma P(a,x) by series / continued fraction.
inline double gamma_p(double a, double x) {
  if (a <= 0.0 || x < 0.0) throw std::domain_error("gamma_p: bad arguments");
  if (x == 0.0) return 0.0;
  const double eps = std::numeric_limits<double>::epsilon();
  const double fpmin = std::numeric_limits<double>::min() / eps;
  const double lng = std::lgamma(a);
  if (x < a + 1.0) {
    double ap = a;
    double del = 1.0 / a;
    double sum = del;
    for (int i = 0; i < 500; ++i) {
      ap += 1.0;
      del *= x / ap;
      sum += del;
      if (std::fabs(del) < std::fabs(sum) * eps) break;
    }
    return sum * std::exp(-x + a * std::log(x) - lng);
  }
  // Lentz continued fraction for Q(a,x).
  double b = x + 1.0 - a;
  double c = 1.0 / fpmin;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 500; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < fpmin) d = fpmin;
    c = b + an / c;
    if (std::fabs(c) < fpmin) c = fpmin;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) <= eps) break;
  }
  return 1.0 - std::exp(-x + a * std::log(x) - lng) * h;
}

// Continued fraction for the incomplete beta (Lentz).
inline double beta_cf(double a, double b, double x) {
  const double eps = std::numeric_limits<double>::epsilon();
  const double fpmin = std::numeric_limits<double>::min() / eps;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < fpmin) d = fpmin;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 500; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < fpmin) d = fpmin;
    c = 1.0 + aa / c;
    if (std::fabs(c) < fpmin) c = fpmin;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < fpmin) d = fpmin;
    c = 1.0 + aa / c;
    if (std::fabs(c) < fpmin) c = fpmin;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) <= eps) break;
  }
  return h;
}

}  // namespace detail

/// Standard normal CDF via erfc; accurate in both tails.
inline double normal_cdf(double x) {
  return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

/// Inverse standard normal CDF. Requires 0 < q < 1.
inline double normal_quantile(Probability q) {
  const double p = q.value();
  if (p <= 0.0 || p >= 1.0) {
    throw std::domain_error("normal_quantile: q must lie in (0,1)");
  }
  if (p == 0.5) return 0.0;
  // Antisymmetry by construction: solve in the lower tail only.
  if (p > 0.5) return -normal_quantile(1.0 - p);

  double lo = -2.0;
  while (normal_cdf(lo) > p) lo *= 2.0;
  double hi = 0.0;
  double z = lo * 0.5;
  for (int it = 0; it < 200; ++it) {
    const double f = normal_cdf(z) - p;
    if (f > 0.0) {
      hi = z;
    } else if (f < 0.0) {
      lo = z;
    } else {
      return z;
    }
    const double dens =
        std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
    double next;
    if (dens > 0.0) {
      next = z - f / dens;
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    } else {
      next = 0.5 * (lo + hi);
    }
    if (std::fabs(next - z) < detail::kQuantileTol * std::max(1.0, std::fabs(z))) {
      return next;
    }
    z = next;
  }
  return z;
}

/// Regularized incomplete beta I_x(a,b); I_0 = 0 and I_1 = 1 exactly.
inline double regularized_incomplete_beta(Probability x, double a, double b) {
  if (!(a > 0.0) || !(b > 0.0)) {
    throw std::domain_error("regularized_incomplete_beta: a,b must be > 0");
  }
  const double xv = x.value();
  if (xv == 0.0) return 0.0;
  if (xv == 1.0) return 1.0;
  const double bt =
      std::exp(std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
               a * std::log(xv) + b * std::log1p(-xv));
  if (xv < (a + 1.0) / (a + b + 2.0)) {
    return bt * detail::beta_cf(a, b, xv) / a;
  }
  return 1.0 - bt * detail::beta_cf(b, a, 1.0 - xv) / b;
}

/// Inverse of I_x(a,b) in x. q = 0 and q = 1 map to exact 0 and 1.
inline double beta_quantile(Probability q, double a, double b) {
  if (!(a > 0.0) || !(b > 0.0)) {
    throw std::domain_error("beta_quantile: a,b must be > 0");
  }
  const double p = q.value();
  if (p == 0.0) return 0.0;
  if (p == 1.0) return 1.0;

  const double log_norm =
      std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b);
  double lo = 0.0;
  double hi = 1.0;
  double x = a / (a + b);
  for (int it = 0; it < 300; ++it) {
    const double f = regularized_incomplete_beta(x, a, b) - p;
    if (f > 0.0) {
      hi = x;
    } else if (f < 0.0) {
      lo = x;
    } else {
      return x;
    }
    double next;
    const double log_dens =
        log_norm + (a - 1.0) * std::log(x) + (b - 1.0) * std::log1p(-x);
    const double dens = std::exp(log_dens);
    if (dens > 0.0 && std::isfinite(dens)) {
      next = x - f / dens;
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    } else {
      next = 0.5 * (lo + hi);
    }
    if (std::fabs(next - x) < 1e-14) return next;
    x = next;
  }
  return x;
}

/// Student's t quantile with df degrees of freedom. Requires 0 < q < 1.
inline double student_t_quantile(Probability q, int df) {
  if (df < 1) throw std::domain_error("student_t_quantile: df must be >= 1");
  const double p = q.value();
  if (p <= 0.0 || p >= 1.0) {
    throw std::domain_error("student_t_quantile: q must lie in (0,1)");
  }
  if (p == 0.5) return 0.0;
  if (p > 0.5) return -student_t_quantile(1.0 - p, df);

  const double nu = df;
  // Lower-tail CDF for t <= 0: F(t) = I_x(nu/2, 1/2)/2 with x = nu/(nu+t^2).
  const auto cdf = [nu](double t) {
    const double x = nu / (nu + t * t);
    return 0.5 * regularized_incomplete_beta(x, nu / 2.0, 0.5);
  };
  const double log_coef = std::lgamma((nu + 1.0) / 2.0) -
                          std::lgamma(nu / 2.0) -
                          0.5 * std::log(nu * std::numbers::pi);
  double lo = -2.0;
  while (cdf(lo) > p) lo *= 2.0;
  double hi = 0.0;
  double t = lo * 0.5;
  for (int it = 0; it < 300; ++it) {
    const double f = cdf(t) - p;
    if (f > 0.0) {
      hi = t;
    } else if (f < 0.0) {
      lo = t;
    } else {
      return t;
    }
    const double dens =
        std::exp(log_coef - 0.5 * (nu + 1.0) * std::log1p(t * t / nu));
    double next;
    if (dens > 0.0) {
      next = t - f / dens;
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    } else {
      next = 0.5 * (lo + hi);
    }
    if (std::fabs(next - t) < detail::kQuantileTol * std::max(1.0, std::fabs(t))) {
      return next;
    }
    t = next;
  }
  return t;
}

/// Chi-square quantile with df degrees of freedom. Requires 0 < q < 1.
inline double chi_square_quantile(Probability q, int df) {
  if (df < 1) throw std::domain_error("chi_square_quantile: df must be >= 1");
  const double p = q.value();
  if (p <= 0.0 || p >= 1.0) {
    throw std::domain_error("chi_square_quantile: q must lie in (0,1)");
  }
  const double a = df / 2.0;
  const auto cdf = [a](double x) { return detail::gamma_p(a, x / 2.0); };
  double lo = 0.0;
  double hi = df + 10.0;
  while (cdf(hi) < p) hi *= 2.0;
  double x = std::min(static_cast<double>(df), hi * 0.5);
  const double log_norm = -a * std::numbers::ln2 - std::lgamma(a);
  for (int it = 0; it < 300; ++it) {
    const double f = cdf(x) - p;
    if (f > 0.0) {
      hi = x;
    } else if (f < 0.0) {
      lo = x;
    } else {
      return x;
    }
    const double dens =
        std::exp(log_norm + (a - 1.0) * std::log(x) - 0.5 * x);
    double next;
    if (dens > 0.0 && std::isfinite(dens)) {
      next = x - f / dens;
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    } else {
      next = 0.5 * (lo + hi);
    }
    if (std::fabs(next - x) < detail::kQuantileTol * std::max(1.0, std::fabs(x))) {
      return next;
    }
    x = next;
  }
  return x;
}

// ---------------------------------------------------------------------------
// Categorical sampling and the multinomial pmf.
// ---------------------------------------------------------------------------

inline void validate_distribution(std::span<const double> probs) {
  if (probs.empty()) throw std::domain_error("empty probability vector");
  double sum = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw std::domain_error("probabilities must lie in [0,1]");
    }
    sum += p;
  }
  if (std::fabs(sum - 1.0) > 1e-12) {
    throw std::domain_error("probabilities must sum to 1");
  }
}

/// Draws a 1-based category index distributed according to probs.
inline int sample_categorical(std::span<const double> probs, Rng& rng) {
  validate_distribution(probs);
  const double u = rng.next_unit();
  double cum = 0.0;
  int last_positive = 0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] > 0.0) last_positive = static_cast<int>(i) + 1;
    cum += probs[i];
    if (u < cum) return static_cast<int>(i) + 1;
  }
  // Rounding pushed the cumulative sum fractionally below 1.
  return last_positive;
}

/// Log-probability of observing the given per-category counts under a
/// multinomial with the given category probabilities.
inline double multinomial_log_pmf(std::span<const std::int64_t> counts,
                                  std::span<const double> probs) {
  if (counts.size() != probs.size()) {
    throw std::domain_error("multinomial_log_pmf: size mismatch");
  }
  validate_distribution(probs);
  std::int64_t n = 0;
  for (std::int64_t c : counts) {
    if (c < 0) throw std::domain_error("multinomial_log_pmf: negative count");
    n += c;
  }
  double log_p = std::lgamma(static_cast<double>(n) + 1.0);
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (counts[i] == 0) continue;
    if (probs[i] == 0.0) return -std::numeric_limits<double>::infinity();
    log_p -= std::lgamma(static_cast<double>(counts[i]) + 1.0);
    log_p += static_cast<double>(counts[i]) * std::log(probs[i]);
  }
  return log_p;
}

/// Order-q value of a sorted sequence with linear interpolation between
/// adjacent order statistics. Used for bootstrap percentiles and boxplot
/// quartiles so both follow the same convention.
inline double sorted_quantile(std::span<const double> sorted, double order) {
  if (sorted.empty()) throw std::domain_error("sorted_quantile: empty input");
  if (!(order >= 0.0 && order <= 1.0)) {
    throw std::domain_error("sorted_quantile: order must lie in [0,1]");
  }
  const std::size_t n = sorted.size();
  if (n == 1) return sorted[0];
  const double h = order * static_cast<double>(n - 1);
  const auto idx = static_cast<std::size_t>(h);
  if (idx + 1 >= n) return sorted[n - 1];
  const double w = h - static_cast<double>(idx);
  return sorted[idx] * (1.0 - w) + sorted[idx + 1] * w;
}

}  // namespace mosci
