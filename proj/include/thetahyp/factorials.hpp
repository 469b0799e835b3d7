#ifndef THETAHYP_FACTORIALS_HPP
#define THETAHYP_FACTORIALS_HPP

// Elliptic shifted factorials
//   theta(t;p;q)_n = prod_{m=0}^{n-1} theta(t q^m; p),
//   theta(t;p;q)_{-n} = 1 / theta(t q^{-n};p;q)_n,
// and their additive counterparts [u]_n = [u][u+1]...[u+n-1].
//
// Factors that vanish on the theta lattice are not multiplied in; they are
// counted as zero (numerator) or pole (denominator) orders so that callers
// can resolve 0 and infinity structurally.

#include <span>
#include <vector>

#include "thetahyp/theta_core.hpp"

namespace thetahyp {

struct FactorialValue {
  cplx regular{1.0, 0.0};  // product of the non-vanishing factors
  int zero_order = 0;
  int pole_order = 0;

  int net_order() const { return zero_order - pole_order; }
  bool is_zero() const { return net_order() > 0; }
  bool is_pole() const { return net_order() < 0; }

  // 0 for a net zero, the regular part when no factor vanished.
  cplx value() const {
    if (is_pole()) throw pole_error("factorial value is infinite");
    if (is_zero()) return cplx{0.0, 0.0};
    if (zero_order > 0) throw pole_error("indeterminate 0/0 in factorial value");
    return regular;
  }

  void multiply_factor(cplx factor, bool vanishing) {
    if (vanishing) {
      ++zero_order;
    } else {
      regular *= factor;
    }
  }

  void divide_factor(cplx factor, bool vanishing) {
    if (vanishing) {
      ++pole_order;
    } else {
      regular /= factor;
    }
  }

  FactorialValue& operator*=(const FactorialValue& other) {
    regular *= other.regular;
    zero_order += other.zero_order;
    pole_order += other.pole_order;
    return *this;
  }

  FactorialValue& operator/=(const FactorialValue& other) {
    regular /= other.regular;
    zero_order += other.pole_order;
    pole_order += other.zero_order;
    return *this;
  }

  FactorialValue reciprocal() const {
    return FactorialValue{1.0 / regular, pole_order, zero_order};
  }

  friend FactorialValue operator*(FactorialValue a, const FactorialValue& b) {
    return a *= b;
  }
  friend FactorialValue operator/(FactorialValue a, const FactorialValue& b) {
    return a /= b;
  }
};

// theta(x;p) tagged with its lattice status.
inline void multiply_theta(FactorialValue& acc, cplx x, cplx p,
                           const PrecisionPolicy& policy = {}) {
  const bool vanishing = is_theta_zero(x, p);
  acc.multiply_factor(vanishing ? cplx{1.0} : theta(x, p, policy), vanishing);
}

inline void divide_theta(FactorialValue& acc, cplx x, cplx p,
                         const PrecisionPolicy& policy = {}) {
  const bool vanishing = is_theta_zero(x, p);
  acc.divide_factor(vanishing ? cplx{1.0} : theta(x, p, policy), vanishing);
}

inline FactorialValue theta_factorial(cplx t, const Nome& nome, int n,
                                      const PrecisionPolicy& policy = {}) {
  validate(nome);
  if (t == 0.0) throw domain_error("elliptic factorial needs t != 0");
  FactorialValue result;
  if (n >= 0) {
    cplx x = t;
    for (int m = 0; m < n; ++m, x *= nome.q) multiply_theta(result, x, nome.p, policy);
    return result;
  }
  if (nome.q == 0.0) throw domain_error("negative index needs q != 0");
  // 1 / prod_{m=0}^{-n-1} theta(t q^{n+m})
  cplx x = t * ipow(nome.q, n);
  for (int m = 0; m < -n; ++m, x *= nome.q) divide_theta(result, x, nome.p, policy);
  return result;
}

inline FactorialValue theta_factorial_multi(std::span<const cplx> ts,
                                            const Nome& nome, int n,
                                            const PrecisionPolicy& policy = {}) {
  FactorialValue result;
  for (const cplx t : ts) result *= theta_factorial(t, nome, n, policy);
  return result;
}

// [u]_n, with [u]_{-n} = 1 / [u-n]_n.
inline FactorialValue elliptic_factorial(cplx u, const ModularPair& pair, int n,
                                         const PrecisionPolicy& policy = {}) {
  if (!(pair.tau.imag() > 0.0)) throw domain_error("[u]_n needs Im(tau) > 0");
  FactorialValue result;
  const int count = n >= 0 ? n : -n;
  const cplx start = n >= 0 ? u : u + static_cast<double>(n);
  for (int m = 0; m < count; ++m) {
    const cplx x = start + static_cast<double>(m);
    const bool vanishing = is_theta1_zero(x, pair);
    const cplx factor =
        vanishing ? cplx{1.0} : theta1(x, pair, Theta1Method::series, policy);
    if (n >= 0) {
      result.multiply_factor(factor, vanishing);
    } else {
      result.divide_factor(factor, vanishing);
    }
  }
  return result;
}

}  // namespace thetahyp

#endif  // THETAHYP_FACTORIALS_HPP
