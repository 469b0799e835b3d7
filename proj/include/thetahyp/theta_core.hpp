#ifndef THETAHYP_THETA_CORE_HPP
#define THETAHYP_THETA_CORE_HPP

// Jacobi-type theta functions in multiplicative form theta(z;p), the
// elliptic numbers [u] = theta_1(u;sigma,tau), p-shifted factorials and the
// SL(2,Z) action on the modular parameters (sigma, tau).
//
// Conventions:
//   p = exp(2 pi i tau),  q = exp(2 pi i sigma)
//   theta(z;p) = (z;p)_inf (p/z;p)_inf
//   [u] = 2 sum_{n>=0} (-1)^n exp(pi i tau (n+1/2)^2) sin(pi (2n+1) sigma u)
//
// Whenever (sigma, tau) are known, fractional powers of p and q are taken as
// exponentials of sigma and tau (p^{1/8} = exp(pi i tau / 4) and so on), so
// they follow tau -> tau + 1 correctly. Principal branches are only used
// where the nome alone is given.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace thetahyp {

using cplx = std::complex<double>;

inline constexpr double pi = std::numbers::pi;
inline constexpr cplx imag_unit{0.0, 1.0};

// Errors. Every failure raised by the library derives from thetahyp::error.
class error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Argument outside the domain of a function (nome outside the unit disk,
// theta at z = 0, confluent parameters, ...).
class domain_error : public error {
 public:
  using error::error;
};

// Division by a structurally vanishing factor.
class pole_error : public error {
 public:
  using error::error;
};

// A truncated series or product failed to reach its tolerance in max_terms.
class convergence_error : public error {
 public:
  using error::error;
};

// SL(2,Z) matrix with ad - bc != 1.
class determinant_error : public error {
 public:
  using error::error;
};

// Parameter lists of incompatible lengths.
class dimension_error : public error {
 public:
  using error::error;
};

struct ModularPair {
  cplx sigma;
  cplx tau;
};

struct Nome {
  cplx q;
  cplx p;
};

struct PrecisionPolicy {
  double product_tol = 1e-16;
  double series_tol = 1e-16;
  int max_terms = 512;
};

inline void validate(const PrecisionPolicy& policy) {
  if (!(policy.product_tol > 0.0 && policy.product_tol < 1e-6) ||
      policy.max_terms < 64) {
    throw domain_error("precision policy out of range");
  }
}

inline void validate(const Nome& nome) {
  if (!(std::abs(nome.q) < 1.0) || !(std::abs(nome.p) < 1.0)) {
    throw domain_error("nome must satisfy |q| < 1 and |p| < 1");
  }
}

// Integer power by repeated squaring; exact for z^0 and deterministic.
inline cplx ipow(cplx z, std::int64_t n) {
  if (n < 0) return 1.0 / ipow(z, -n);
  cplx result{1.0, 0.0};
  while (n > 0) {
    if (n & 1) result *= z;
    z *= z;
    n >>= 1;
  }
  return result;
}

// exp(2 pi i x)
inline cplx expi2pi(cplx x) { return std::exp(2.0 * pi * imag_unit * x); }

// q^x with q = exp(2 pi i sigma).
inline cplx qpow(const ModularPair& pair, cplx x) {
  return expi2pi(pair.sigma * x);
}

inline Nome nome_from_modular(const ModularPair& pair) {
  if (!(pair.sigma.imag() > 0.0) || !(pair.tau.imag() > 0.0)) {
    throw domain_error("modular parameters need Im(sigma) > 0 and Im(tau) > 0");
  }
  return Nome{expi2pi(pair.sigma), expi2pi(pair.tau)};
}

// Finite p-shifted factorial (a;p)_n, n of either sign.
//   (a;p)_n    = (1-a)(1-ap)...(1-ap^{n-1})
//   (a;p)_{-n} = 1 / (a p^{-n}; p)_n
inline cplx p_pochhammer(cplx a, cplx p, int n) {
  if (n >= 0) {
    cplx result{1.0, 0.0};
    cplx factor = a;
    for (int k = 0; k < n; ++k) {
      result *= 1.0 - factor;
      factor *= p;
    }
    return result;
  }
  if (p == 0.0) throw domain_error("negative-index factorial needs p != 0");
  const cplx denom = p_pochhammer(a * ipow(p, n), p, -n);
  if (denom == 0.0) throw pole_error("(a;p)_{-n} has a vanishing factor");
  return 1.0 / denom;
}

// Infinite product (a;p)_inf, truncated at the first k >= 8 with
// |a p^k| < product_tol.
inline cplx p_pochhammer_inf(cplx a, cplx p,
                             const PrecisionPolicy& policy = {}) {
  if (!(std::abs(p) < 1.0)) throw domain_error("(a;p)_inf needs |p| < 1");
  cplx result{1.0, 0.0};
  cplx factor = a;
  for (int k = 0;; ++k) {
    if (k >= 8 && std::abs(factor) < policy.product_tol) break;
    result *= 1.0 - factor;
    factor *= p;
  }
  return result;
}

// Tolerance for recognising a lattice point z = p^{-M}.
inline constexpr double lattice_rel_tol = 1e-12;
inline constexpr int lattice_max_index = 64;

// Returns M when z = p^{-M} (|M| <= 64) to relative accuracy `rel`.
inline bool on_theta_lattice(cplx z, cplx p, double rel = lattice_rel_tol,
                             int* index = nullptr) {
  if (z == 0.0) return false;
  if (p == 0.0) {
    const bool hit = std::abs(z - 1.0) <= rel;
    if (hit && index) *index = 0;
    return hit;
  }
  const double m_real = -std::log(std::abs(z)) / std::log(std::abs(p));
  const double m_round = std::round(m_real);
  if (std::abs(m_round) > lattice_max_index) return false;
  const auto m = static_cast<std::int64_t>(m_round);
  const bool hit = std::abs(z * ipow(p, m) - 1.0) <= rel;
  if (hit && index) *index = static_cast<int>(m);
  return hit;
}

inline bool is_theta_zero(cplx z, cplx p) { return on_theta_lattice(z, p); }

// min over M of |z p^M - 1|: relative distance of z to the nearest zero of theta(.;p).
inline double lattice_distance(cplx z, cplx p) {
  if (p == 0.0) return std::abs(z - 1.0);
  const double m_real = -std::log(std::abs(z)) / std::log(std::abs(p));
  const double base = std::floor(m_real);
  double best = std::numeric_limits<double>::infinity();
  for (double m : {base - 1.0, base, base + 1.0, base + 2.0}) {
    best = std::min(best, std::abs(z * ipow(p, static_cast<std::int64_t>(m)) - 1.0));
  }
  return best;
}

// theta(z;p) = (z;p)_inf (p/z;p)_inf. Lattice points z = p^{-M} return an
// exact zero.
inline cplx theta(cplx z, cplx p, const PrecisionPolicy& policy = {}) {
  if (z == 0.0) throw domain_error("theta(z;p) is undefined at z = 0");
  if (!(std::abs(p) < 1.0)) throw domain_error("theta(z;p) needs |p| < 1");
  if (is_theta_zero(z, p)) return cplx{0.0, 0.0};
  if (p == 0.0) return 1.0 - z;
  return p_pochhammer_inf(z, p, policy) * p_pochhammer_inf(p / z, p, policy);
}

enum class Theta1Method { series, product };

// Elliptic number [u;sigma,tau].
inline cplx theta1(cplx u, const ModularPair& pair,
                   Theta1Method method = Theta1Method::series,
                   const PrecisionPolicy& policy = {}) {
  if (!(pair.tau.imag() > 0.0)) throw domain_error("theta1 needs Im(tau) > 0");
  const cplx arg = pi * pair.sigma * u;  // standard argument of theta_1(z|tau)

  if (method == Theta1Method::product) {
    const cplx p = expi2pi(pair.tau);
    const cplx p18 = std::exp(imag_unit * pi * pair.tau / 4.0);
    const cplx qu = std::exp(2.0 * imag_unit * arg);
    const cplx q_minus_half_u = std::exp(-imag_unit * arg);
    if (is_theta_zero(qu, p)) return cplx{0.0, 0.0};
    return p18 * imag_unit * q_minus_half_u * p_pochhammer_inf(p, p, policy) *
           theta(qu, p, policy);
  }

  // Gaussian-envelope bound on |term n|: exp(-pi Im(tau)(n+1/2)^2 + (2n+1)|Im arg|)
  const double decay = pi * pair.tau.imag();
  const double growth = std::abs(arg.imag());
  auto envelope = [&](int n) {
    const double h = n + 0.5;
    return std::exp(-decay * h * h + 2.0 * h * growth);
  };

  cplx sum{0.0, 0.0};
  for (int n = 0; n < policy.max_terms; ++n) {
    const double h = n + 0.5;
    const cplx gauss = std::exp(imag_unit * pi * pair.tau * (h * h));
    const cplx term = gauss * std::sin((2.0 * n + 1.0) * arg);
    sum += (n % 2 == 0) ? term : -term;
    const double next = envelope(n + 1);
    const bool past_peak = next < envelope(n);
    if (past_peak && (next <= policy.series_tol * std::abs(sum) ||
                      next < std::numeric_limits<double>::min())) {
      return 2.0 * sum;
    }
  }
  throw convergence_error("theta1 series did not converge within max_terms");
}

// Zeros of [u] sit at sigma u in Z + tau Z.
inline bool is_theta1_zero(cplx u, const ModularPair& pair,
                           double rel = lattice_rel_tol) {
  const cplx w = pair.sigma * u;
  const double m = std::round(w.imag() / pair.tau.imag());
  const double k = std::round(w.real() - m * pair.tau.real());
  return std::abs(w - (k + m * pair.tau)) <= rel * std::max(1.0, std::abs(w));
}

// (sigma, tau) -> (sigma/(c tau + d), (a tau + b)/(c tau + d)), ad - bc = 1.
inline ModularPair apply_modular(const ModularPair& pair, int a, int b, int c,
                                 int d) {
  if (static_cast<long long>(a) * d - static_cast<long long>(b) * c != 1) {
    throw determinant_error("modular transformation needs ad - bc = 1");
  }
  if (!(pair.tau.imag() > 0.0)) throw domain_error("apply_modular needs Im(tau) > 0");
  const cplx denom = static_cast<double>(c) * pair.tau + static_cast<double>(d);
  return ModularPair{pair.sigma / denom,
                     (static_cast<double>(a) * pair.tau + static_cast<double>(b)) / denom};
}

// (-i tau)^{1/2} with positive real part.
inline cplx modular_sqrt(cplx tau) {
  const cplx root = std::sqrt(-imag_unit * tau);
  if (root.real() > 0.0) return root;
  if (root.real() < 0.0) return -root;
  throw domain_error("(-i tau)^{1/2} has no root with positive real part");
}

}  // namespace thetahyp

#endif  // THETAHYP_THETA_CORE_HPP
