#ifndef BTC_DISTRIBUTIONS_HPP
#define BTC_DISTRIBUTIONS_HPP

// Exact samplers for the non-standard full conditionals used by the Gibbs
// kernels: inverse Gaussian, generalized inverse Gaussian, Polya-Gamma
// PG(1, c) and Dirichlet, plus the textbook Gamma draw they build on.
//
// GIG convention throughout: density proportional to
//   x^(p-1) exp(-(a x + b / x) / 2),  x > 0.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "btc/error.hpp"
#include "btc/rng.hpp"

namespace btc {

namespace detail {

inline void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) {
    throw ParameterError(std::string(what) + " must be finite");
  }
}

// log Phi(x) for the standard normal CDF, stable far into the lower tail.
inline double log_normal_cdf(double x) {
  if (x > -30.0) return std::log(0.5 * std::erfc(-x / std::numbers::sqrt2));
  const double x2 = x * x;
  // Asymptotic series: Phi(x) ~ phi(x)/|x| * (1 - 1/x^2 + 3/x^4).
  return -0.5 * x2 - std::log(-x) - 0.5 * std::log(2.0 * std::numbers::pi) +
         std::log1p(-1.0 / x2 + 3.0 / (x2 * x2));
}

// Draw 1/Y where Y ~ InverseGaussian(mean 1/inv_mu, shape lambda), using the
// transformation-with-root-selection method written in terms of inv_mu so
// that inv_mu = 0 (infinite mean) degenerates to Gamma(1/2, rate lambda/2).
inline double reciprocal_inverse_gaussian(double inv_mu, double lambda,
                                          Rng& rng) {
  const double z = rng.normal();
  const double q = z * z / (2.0 * lambda);
  const double root = inv_mu + q + std::sqrt(q * q + 2.0 * inv_mu * q);
  // root = 1 / x1 where x1 is the smaller root; accept x1 w.p. mu/(mu + x1).
  const double accept = 1.0 / (1.0 + inv_mu / root);
  if (rng.uniform() <= accept) return root;
  return inv_mu * inv_mu / root;
}

inline double gig_mode(double lambda, double omega) {
  if (lambda >= 1.0) {
    return (std::sqrt((lambda - 1.0) * (lambda - 1.0) + omega * omega) +
            (lambda - 1.0)) /
           omega;
  }
  return omega /
         (std::sqrt((1.0 - lambda) * (1.0 - lambda) + omega * omega) +
          (1.0 - lambda));
}

// Standardized GIG(lambda, omega): density ~ x^(lambda-1) exp(-omega/2 (x+1/x)),
// lambda >= 0, omega > 0. Hormann & Leydold (2014) ratio-of-uniforms family.
inline double gig_rou_shift(double lambda, double omega, Rng& rng) {
  const double t = 0.5 * (lambda - 1.0);
  const double s = 0.25 * omega;
  const double xm = gig_mode(lambda, omega);
  const double nc = t * std::log(xm) - s * (xm + 1.0 / xm);

  const double a = -(2.0 * (lambda + 1.0) / omega + xm);
  const double b = 2.0 * (lambda - 1.0) * xm / omega - 1.0;
  const double c = xm;
  const double p = b - a * a / 3.0;
  const double q = (2.0 * a * a * a) / 27.0 - (a * b) / 3.0 + c;
  const double fi = std::acos(-q / (2.0 * std::sqrt(-(p * p * p) / 27.0)));
  const double fak = 2.0 * std::sqrt(-p / 3.0);
  const double y1 = fak * std::cos(fi / 3.0) - a / 3.0;
  const double y2 =
      fak * std::cos(fi / 3.0 + 4.0 / 3.0 * std::numbers::pi) - a / 3.0;
  const double uplus =
      (y1 - xm) * std::exp(t * std::log(y1) - s * (y1 + 1.0 / y1) - nc);
  const double uminus =
      (y2 - xm) * std::exp(t * std::log(y2) - s * (y2 + 1.0 / y2) - nc);

  double x;
  while (true) {
    const double u = uminus + rng.uniform() * (uplus - uminus);
    const double v = rng.uniform();
    x = u / v + xm;
    if (x > 0.0 && std::log(v) <= t * std::log(x) - s * (x + 1.0 / x) - nc) {
      return x;
    }
  }
}

inline double gig_rou_noshift(double lambda, double omega, Rng& rng) {
  const double t = 0.5 * (lambda - 1.0);
  const double s = 0.25 * omega;
  const double xm = gig_mode(lambda, omega);
  const double nc = t * std::log(xm) - s * (xm + 1.0 / xm);
  const double ym = ((lambda + 1.0) +
                     std::sqrt((lambda + 1.0) * (lambda + 1.0) + omega * omega)) /
                    omega;
  const double um =
      std::exp(0.5 * (lambda + 1.0) * std::log(ym) - s * (ym + 1.0 / ym) - nc);
  while (true) {
    const double u = um * rng.uniform();
    const double v = rng.uniform();
    const double x = u / v;
    if (std::log(v) <= t * std::log(x) - s * (x + 1.0 / x) - nc) return x;
  }
}

// Rejection from a three-piece dominating density; for lambda < 1 and small
// omega where the ratio-of-uniforms envelopes become inefficient.
inline double gig_small_omega(double lambda, double omega, Rng& rng) {
  const double xm = gig_mode(lambda, omega);
  const double x0 = omega / (1.0 - lambda);
  const double k0 =
      std::exp((lambda - 1.0) * std::log(xm) - 0.5 * omega * (xm + 1.0 / xm));
  double area[3];
  double k1, k2;
  area[0] = k0 * x0;
  if (x0 >= 2.0 / omega) {
    k1 = 0.0;
    area[1] = 0.0;
    k2 = std::pow(x0, lambda - 1.0);
    area[2] = k2 * 2.0 * std::exp(-omega * x0 / 2.0) / omega;
  } else {
    k1 = std::exp(-omega);
    area[1] = (lambda == 0.0)
                  ? k1 * std::log(2.0 / (omega * omega))
                  : k1 / lambda *
                        (std::pow(2.0 / omega, lambda) - std::pow(x0, lambda));
    k2 = std::pow(2.0 / omega, lambda - 1.0);
    area[2] = k2 * 2.0 * std::exp(-1.0) / omega;
  }
  const double total = area[0] + area[1] + area[2];

  while (true) {
    double v = total * rng.uniform();
    double x, hx;
    if (v <= area[0]) {
      x = x0 * v / area[0];
      hx = k0;
    } else if ((v -= area[0]) <= area[1]) {
      if (lambda == 0.0) {
        x = omega * std::exp(std::exp(omega) * v);
        hx = k1 / x;
      } else {
        x = std::pow(std::pow(x0, lambda) + (lambda / k1 * v), 1.0 / lambda);
        hx = k1 * std::pow(x, lambda - 1.0);
      }
    } else {
      v -= area[1];
      const double lo = std::max(x0, 2.0 / omega);
      x = -2.0 / omega *
          std::log(std::exp(-omega / 2.0 * lo) - omega / (2.0 * k2) * v);
      hx = k2 * std::exp(-omega / 2.0 * x);
    }
    const double u = rng.uniform() * hx;
    if (std::log(u) <= (lambda - 1.0) * std::log(x) - omega / 2.0 * (x + 1.0 / x)) {
      return x;
    }
  }
}

inline constexpr double kPgTruncation = 0.64;

// Coefficient a_n(x) of the alternating series for the J*(1, z) density.
inline double pg_series_coef(int n, double x) {
  const double k = (n + 0.5) * std::numbers::pi;
  if (x > kPgTruncation) return k * std::exp(-0.5 * k * k * x);
  if (x > 0.0) {
    const double e = -1.5 * (std::log(0.5 * std::numbers::pi) + std::log(x)) +
                     std::log(k) - 2.0 * (n + 0.5) * (n + 0.5) / x;
    return std::exp(e);
  }
  return 0.0;
}

// Probability of drawing the proposal from the exponential tail piece.
inline double pg_tail_mass(double z) {
  const double t = kPgTruncation;
  const double fz = 0.125 * std::numbers::pi * std::numbers::pi + 0.5 * z * z;
  const double b = std::sqrt(1.0 / t) * (t * z - 1.0);
  const double a = -std::sqrt(1.0 / t) * (t * z + 1.0);
  const double x0 = std::log(fz) + fz * t;
  const double xb = x0 - z + log_normal_cdf(b);
  const double xa = x0 + z + log_normal_cdf(a);
  const double q_over_p = 4.0 / std::numbers::pi * (std::exp(xb) + std::exp(xa));
  return 1.0 / (1.0 + q_over_p);
}

// Inverse Gaussian(1/z, 1) truncated to (0, t).
inline double pg_truncated_inverse_gaussian(double z, Rng& rng) {
  const double t = kPgTruncation;
  double x = t + 1.0;
  if (z < 1.0 / t) {
    double alpha = 0.0;
    while (rng.uniform() > alpha) {
      double e1, e2;
      do {
        e1 = rng.exponential();
        e2 = rng.exponential();
      } while (e1 * e1 > 2.0 * e2 / t);
      x = 1.0 + e1 * t;
      x = t / (x * x);
      alpha = std::exp(-0.5 * z * z * x);
    }
  } else {
    const double mu = 1.0 / z;
    while (x > t) {
      double y = rng.normal();
      y *= y;
      const double half_mu = 0.5 * mu;
      const double mu_y = mu * y;
      x = mu + half_mu * mu_y - half_mu * std::sqrt(4.0 * mu_y + mu_y * mu_y);
      if (rng.uniform() > mu / (mu + x)) x = mu * mu / x;
    }
  }
  return x;
}

}  // namespace detail

/// Gamma(shape, rate) by Marsaglia-Tsang; shape < 1 via the U^(1/shape) boost.
inline double sample_gamma(double shape, double rate, Rng& rng) {
  if (!(shape > 0.0) || !(rate > 0.0) || !std::isfinite(shape) ||
      !std::isfinite(rate)) {
    throw ParameterError("gamma: shape and rate must be positive and finite");
  }
  double boost = 1.0;
  double a = shape;
  if (a < 1.0) {
    boost = std::pow(rng.uniform(), 1.0 / a);
    a += 1.0;
  }
  const double d = a - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  while (true) {
    double x, v;
    do {
      x = rng.normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.uniform();
    if (u < 1.0 - 0.0331 * (x * x) * (x * x) ||
        std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) {
      return boost * d * v / rate;
    }
  }
}

/// log of a Gamma(shape, rate) draw; stays finite for very small shapes
/// where the draw itself can underflow.
inline double sample_log_gamma(double shape, double rate, Rng& rng) {
  if (shape >= 1.0) return std::log(sample_gamma(shape, rate, rng));
  const double g = sample_gamma(shape + 1.0, rate, rng);
  return std::log(g) + std::log(rng.uniform()) / shape;
}

/// Inverse Gaussian with mean mu and shape lambda.
inline double sample_inverse_gaussian(double mu, double lambda, Rng& rng) {
  detail::require_finite(mu, "inverse gaussian mu");
  detail::require_finite(lambda, "inverse gaussian lambda");
  if (!(mu > 0.0) || !(lambda > 0.0)) {
    throw ParameterError("inverse gaussian: mu and lambda must be positive");
  }
  return 1.0 / detail::reciprocal_inverse_gaussian(1.0 / mu, lambda, rng);
}

/// GIG(1/2, a, b). Uses 1/X ~ InverseGaussian(sqrt(a/b), a); b = 0 gives
/// Gamma(1/2, rate a/2).
inline double sample_gig_half(double a, double b, Rng& rng) {
  detail::require_finite(a, "gig a");
  detail::require_finite(b, "gig b");
  if (!(a > 0.0)) throw ParameterError("gig: a must be positive");
  if (b < 0.0) throw ParameterError("gig: b must be non-negative");
  return detail::reciprocal_inverse_gaussian(std::sqrt(b / a), a, rng);
}

/// General GIG(p, a, b).
inline double sample_gig(double p, double a, double b, Rng& rng) {
  detail::require_finite(p, "gig p");
  detail::require_finite(a, "gig a");
  detail::require_finite(b, "gig b");
  if (a < 0.0 || b < 0.0) throw ParameterError("gig: a and b must be >= 0");
  constexpr double kTiny = 10.0 * std::numeric_limits<double>::epsilon();
  if (b < kTiny) {
    if (p > 0.0 && a > 0.0) return sample_gamma(p, a / 2.0, rng);
    if (b == 0.0) throw ParameterError("gig: improper for b = 0 and p <= 0");
  }
  if (a < kTiny) {
    if (p < 0.0 && b > 0.0) return 1.0 / sample_gamma(-p, b / 2.0, rng);
    if (a == 0.0) throw ParameterError("gig: improper for a = 0 and p >= 0");
  }
  const double omega = std::sqrt(a * b);
  const double scale = std::sqrt(b / a);
  const double lambda = std::abs(p);
  double x;
  if (lambda > 2.0 || omega > 3.0) {
    x = detail::gig_rou_shift(lambda, omega, rng);
  } else if (lambda >= 1.0 - 2.25 * omega * omega || omega > 0.2) {
    x = detail::gig_rou_noshift(lambda, omega, rng);
  } else {
    x = detail::gig_small_omega(lambda, omega, rng);
  }
  return p < 0.0 ? scale / x : scale * x;
}

/// Exact PG(1, c) draw by the alternating-series method (J* density split at
/// t = 0.64, exponential tail and truncated inverse-Gaussian head).
inline double sample_polya_gamma_1(double c, Rng& rng) {
  detail::require_finite(c, "polya-gamma c");
  const double z = 0.5 * std::abs(c);
  const double fz = 0.125 * std::numbers::pi * std::numbers::pi + 0.5 * z * z;
  const double tail_mass = detail::pg_tail_mass(z);
  while (true) {
    double x;
    if (rng.uniform() < tail_mass) {
      x = detail::kPgTruncation + rng.exponential() / fz;
    } else {
      x = detail::pg_truncated_inverse_gaussian(z, rng);
    }
    double s = detail::pg_series_coef(0, x);
    const double y = rng.uniform() * s;
    for (int n = 1;; ++n) {
      if (n % 2 == 1) {
        s -= detail::pg_series_coef(n, x);
        if (y <= s) return 0.25 * x;
      } else {
        s += detail::pg_series_coef(n, x);
        if (y > s) break;
      }
    }
  }
}

/// Dirichlet(alphas); computed from log-Gamma draws so small concentrations
/// never produce exact zeros.
inline std::vector<double> sample_dirichlet(std::span<const double> alphas,
                                            Rng& rng) {
  if (alphas.empty()) throw ParameterError("dirichlet: empty alpha vector");
  std::vector<double> logs(alphas.size());
  for (std::size_t r = 0; r < alphas.size(); ++r) {
    if (!(alphas[r] > 0.0) || !std::isfinite(alphas[r])) {
      throw ParameterError("dirichlet: every alpha must be positive");
    }
    logs[r] = sample_log_gamma(alphas[r], 1.0, rng);
  }
  const double top = *std::max_element(logs.begin(), logs.end());
  double total = 0.0;
  for (auto& v : logs) {
    v = std::exp(v - top);
    total += v;
  }
  for (auto& v : logs) v /= total;
  return logs;
}

/// log K_nu(x), the modified Bessel function of the second kind, by
/// log-domain trapezoidal quadrature of  int_0^inf exp(-x cosh t) cosh(nu t) dt.
/// Valid for orders and arguments where K_nu itself overflows or underflows.
inline double log_bessel_k(double nu, double x) {
  if (!(x > 0.0) || !std::isfinite(x) || !std::isfinite(nu)) {
    throw ParameterError("log_bessel_k: x must be positive and finite");
  }
  nu = std::abs(nu);
  auto log_cosh = [](double u) {
    return u + std::log1p(std::exp(-2.0 * u)) - std::numbers::ln2;
  };
  auto g = [&](double t) { return -x * std::cosh(t) + log_cosh(nu * t); };

  // Locate the peak of g on [0, inf).
  double peak = 0.0;
  if (nu * nu > x) {
    double lo = 0.0;
    double hi = std::asinh(nu / x) + 1.0;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      const double slope = -x * std::sinh(mid) + nu * std::tanh(nu * mid);
      (slope > 0.0 ? lo : hi) = mid;
    }
    peak = 0.5 * (lo + hi);
  }
  const double gmax = g(peak);
  constexpr double kDrop = 60.0;
  // Bracket the region where the integrand is within e^-60 of its peak.
  double step = 1e-3 * (1.0 + peak);
  double upper = peak + step;
  while (g(upper) > gmax - kDrop) {
    step *= 2.0;
    upper = peak + step;
  }
  double lower = 0.0;
  if (peak > 0.0) {
    step = 1e-3 * (1.0 + peak);
    lower = peak - step;
    while (lower > 0.0 && g(lower) > gmax - kDrop) {
      step *= 2.0;
      lower = peak - step;
    }
    lower = std::max(lower, 0.0);
  }
  constexpr int kPanels = 128;
  const double h = (upper - lower) / kPanels;
  double sum = 0.0;
  for (int i = 0; i <= kPanels; ++i) {
    const double w = (i == 0 || i == kPanels) ? 0.5 : 1.0;
    sum += w * std::exp(g(lower + i * h) - gmax);
  }
  return gmax + std::log(sum * h);
}

}  // namespace btc

#endif  // BTC_DISTRIBUTIONS_HPP
