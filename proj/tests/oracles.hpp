#ifndef THETAHYP_TESTS_ORACLES_HPP
#define THETAHYP_TESTS_ORACLES_HPP

// Independent reference implementations used only by the tests. They share
// no code with the library beyond std::complex: fixed-length products, the
// bilateral theta_1 series, and coefficients built from factorials directly
// rather than by ratio recurrence.

#include <cmath>
#include <complex>
#include <random>
#include <vector>

namespace oracle {

using cplx = std::complex<double>;
inline const double pi = std::acos(-1.0);
inline const cplx I{0.0, 1.0};

inline cplx power(cplx z, int n) {
  cplx r = 1.0;
  for (int k = 0; k < std::abs(n); ++k) r *= z;
  return n >= 0 ? r : 1.0 / r;
}

// (z;p)_inf (p/z;p)_inf with a fixed 400-factor product.
inline cplx theta(cplx z, cplx p) {
  cplx r = 1.0;
  cplx a = z, b = p / z;
  for (int k = 0; k < 400; ++k) {
    r *= (1.0 - a) * (1.0 - b);
    a *= p;
    b *= p;
  }
  return r;
}

// [u] = -i sum_{n in Z} (-1)^n exp(pi i tau (n+1/2)^2) exp(pi i (2n+1) sigma u)
inline cplx elliptic_number(cplx u, cplx sigma, cplx tau) {
  cplx s = 0.0;
  for (int n = -60; n <= 60; ++n) {
    const double h = n + 0.5;
    const cplx term = std::exp(I * pi * tau * (h * h) + I * pi * (2.0 * n + 1.0) * sigma * u);
    s += (n % 2 == 0) ? term : -term;
  }
  return -I * s;
}

inline cplx theta_factorial(cplx t, cplx q, cplx p, int n) {
  cplx r = 1.0;
  if (n >= 0) {
    for (int m = 0; m < n; ++m) r *= theta(t * power(q, m), p);
    return r;
  }
  for (int m = 0; m < -n; ++m) r *= theta(t * power(q, n + m), p);
  return 1.0 / r;
}

// Very-well-poised coefficient in the shifted form, factorials built directly.
inline cplx vwp_term(cplx t0, const std::vector<cplx>& ts, cplx q, cplx p, cplx z, int n, bool unilateral) {
  cplx c = theta(t0 * t0 * power(q, 2 * n), p) / theta(t0 * t0, p);
  if (unilateral) c *= theta_factorial(t0 * t0, q, p, n) / theta_factorial(q, q, p, n);
  for (const cplx t : ts) c *= theta_factorial(t0 * t, q, p, n) / theta_factorial(q * t0 / t, q, p, n);
  return c * power(q * z, n);
}

inline cplx vwp_sum(cplx t0, const std::vector<cplx>& ts, cplx q, cplx p, cplx z, int lo, int hi, bool unilateral) {
  cplx s = 0.0;
  for (int n = lo; n <= hi; ++n) s += vwp_term(t0, ts, q, p, z, n, unilateral);
  return s;
}

inline cplx ft_rhs(const std::vector<cplx>& t, cplx q, cplx p, int N) {
  auto f = [&](cplx a) { return theta_factorial(a, q, p, N); };
  return f(q * t[0] * t[0]) * f(q / (t[1] * t[2])) * f(q / (t[1] * t[3])) * f(q / (t[2] * t[3])) /
         (f(q / (t[0] * t[1] * t[2] * t[3])) * f(q * t[0] / t[1]) * f(q * t[0] / t[2]) * f(q * t[0] / t[3]));
}

inline cplx q_pochhammer(cplx a, cplx q, int n) {
  cplx r = 1.0;
  for (int k = 0; k < n; ++k) r *= 1.0 - a * power(q, k);
  return r;
}

// rphi_s term with alpha = 0.
inline cplx phi_term(const std::vector<cplx>& a, const std::vector<cplx>& b, cplx q, cplx z, int n) {
  cplx c = power(z, n) / q_pochhammer(q, q, n);
  for (const cplx x : a) c *= q_pochhammer(x, q, n);
  for (const cplx x : b) c /= q_pochhammer(x, q, n);
  return c;
}

inline double rel(cplx a, cplx b) {
  const double s = std::abs(b);
  return s < 1e-20 ? std::abs(a - b) : std::abs(a - b) / s;
}

inline cplx random_point(std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> m(lo, hi), ph(0.0, 2.0 * pi);
  return std::polar(m(rng), ph(rng));
}

}  // namespace oracle

#endif  // THETAHYP_TESTS_ORACLES_HPP
