#ifndef THETAHYP_SERIES_HPP
#define THETAHYP_SERIES_HPP

// Theta hypergeometric series.
//
//   rE_s (t_0..t_{r-1}; w_1..w_s; q,p; alpha, z)
//       = sum_{n>=0} theta(t_0..t_{r-1};p;q)_n / theta(q,w_1..w_s;p;q)_n
//                    q^{alpha n(n-1)/2} z^n
//   rG_s (t_1..t_r; w_1..w_s; q,p; alpha, z)   same, summed over n in Z
//
// and the very-well-poised forms in the shifted parameterization t_m -> t_0 t_m
//
//   E(t_0; t_1..t_{r-4}; z) = sum_{n>=0} theta(t_0^2 q^{2n})/theta(t_0^2)
//       prod_{m=0}^{r-4} theta(t_0 t_m;p;q)_n / theta(q t_0/t_m;p;q)_n (qz)^n
//
// Coefficients are produced by the recurrence c_{n+1} = h(n) c_n with
// c_0 = 1, where h(n) carries zero/pole orders so terminations and one-sided
// cut-offs are exact.

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "thetahyp/factorials.hpp"
#include "thetahyp/report.hpp"

namespace thetahyp {

enum class SeriesKind { unilateral_E, bilateral_G };
enum class VwpKind { unilateral, bilateral };

// Numerator parameter `param_index` equals q^{-N} p^{-M}.
struct TruncationDecl {
  int param_index = 0;
  int N = 0;
  int M = 0;
};

struct Window {
  int n_min = 0;
  int n_max = 0;
};

struct ThetaSeriesSpec {
  SeriesKind kind = SeriesKind::unilateral_E;
  std::vector<cplx> numerator;    // t_0..t_{r-1} (E) or t_1..t_r (G)
  std::vector<cplx> denominator;  // w_1..w_s; the E-kind theta(q;p;q)_n is implicit
  cplx alpha{0.0, 0.0};
  cplx z{1.0, 0.0};
  Nome nome{};
  std::optional<TruncationDecl> truncation;
};

struct VwpSpec {
  cplx t0;
  std::vector<cplx> ts;  // t_1..t_{r-4}
  cplx z{1.0, 0.0};
  Nome nome{};
  VwpKind kind = VwpKind::unilateral;
  // param_index 0 refers to t_0 t_0, k >= 1 to t_0 t_k.
  std::optional<TruncationDecl> truncation;
};

struct SeriesValue {
  cplx value{0.0, 0.0};
  int terms_used = 0;
  bool terminated = false;  // the partial sum is the whole series
  double tail_estimate = 0.0;
  bool converged = false;
  double abs_sum = 0.0;  // sum of |c_n| over the summed terms
};

// Term ratio c_{n+1}/c_n with zero/pole bookkeeping.
using StructuredRatio = std::function<FactorialValue(int)>;
// Optional factor of c_n evaluated directly instead of through the ratio.
using LeadFactor = std::function<FactorialValue(int)>;

namespace detail {

inline void validate_parameters(std::span<const cplx> params, const char* what) {
  for (const cplx t : params) {
    if (t == 0.0 || !std::isfinite(t.real()) || !std::isfinite(t.imag())) {
      throw domain_error(std::string(what) +
                         ": parameters must be finite and nonzero (no confluence limits)");
    }
  }
}

inline void validate_series_nome(const Nome& nome) {
  validate(nome);
  if (nome.q == 0.0) throw domain_error("series base q must be nonzero");
}

// q^{alpha n}
inline cplx alpha_power(cplx q, cplx alpha, int n) {
  if (alpha == 0.0 || n == 0) return cplx{1.0, 0.0};
  return std::exp(alpha * static_cast<double>(n) * std::log(q));
}

inline void multiply_scale(FactorialValue& acc, cplx scale) {
  acc.multiply_factor(scale, scale == 0.0);
}

inline cplx checked_value(const FactorialValue& c, int n) {
  if (c.is_pole() || (c.zero_order > 0 && !c.is_zero())) {
    throw pole_error("unresolved pole in series coefficient at n = " + std::to_string(n));
  }
  return c.value();
}

inline SeriesValue sum_range(const StructuredRatio& ratio, int n_min, int n_max,
                             bool bilateral, const LeadFactor& lead = {}) {
  if (n_min > n_max) throw domain_error("empty summation window");
  SeriesValue out;
  cplx sum{0.0, 0.0};
  double upper_edge = 0.0;
  double lower_edge = 0.0;

  FactorialValue c;  // c_0
  const int hi = std::max(n_max, 0);
  for (int n = 0; n <= hi; ++n) {
    if (n >= n_min && n <= n_max) {
      const cplx v = checked_value(lead ? c * lead(n) : c, n);
      sum += v;
      out.abs_sum += std::abs(v);
      ++out.terms_used;
      if (n == n_max) upper_edge = std::abs(v);
      if (n == n_min) lower_edge = std::abs(v);
    }
    c *= ratio(n);
  }
  bool upper_done = n_max >= 0 && c.is_zero();

  bool lower_done = !bilateral;
  if (bilateral) {
    c = FactorialValue{};
    const int lo = std::min(n_min, 0);
    for (int n = -1; n >= lo - 1; --n) {
      c /= ratio(n);  // c_n = c_{n+1} / h(n)
      if (n < lo) break;
      if (n >= n_min && n <= n_max) {
        const cplx v = checked_value(lead ? c * lead(n) : c, n);
        sum += v;
        out.abs_sum += std::abs(v);
        ++out.terms_used;
        if (n == n_min) lower_edge = std::abs(v);
        if (n == n_max) upper_edge = std::abs(v);
      }
    }
    lower_done = n_min <= 0 && c.is_zero();
  }

  out.value = sum;
  out.terminated = upper_done && lower_done;
  out.converged = out.terminated;
  out.tail_estimate = out.terminated ? 0.0 : std::max(upper_edge, bilateral ? lower_edge : 0.0);
  return out;
}

// Unilateral sum without a declared truncation: stops at a structural zero,
// when |c_n| <= series_tol |sum|, or at max_terms.
inline SeriesValue sum_until_small(const StructuredRatio& ratio, int max_terms,
                                   double series_tol, const LeadFactor& lead = {}) {
  SeriesValue out;
  FactorialValue c;
  cplx sum{0.0, 0.0};
  double last = 0.0;
  for (int n = 0; n < max_terms; ++n) {
    if (c.is_zero()) {
      out.terminated = true;
      out.converged = true;
      break;
    }
    const cplx v = checked_value(lead ? c * lead(n) : c, n);
    sum += v;
    out.abs_sum += std::abs(v);
    ++out.terms_used;
    last = std::abs(v);
    if (n > 0 && last <= series_tol * std::abs(sum)) {
      out.converged = true;
      break;
    }
    c *= ratio(n);
  }
  out.value = sum;
  out.tail_estimate = out.terminated ? 0.0 : last;
  return out;
}

}  // namespace detail

inline void validate(const ThetaSeriesSpec& spec) {
  detail::validate_series_nome(spec.nome);
  detail::validate_parameters(spec.numerator, "series numerator");
  detail::validate_parameters(spec.denominator, "series denominator");
  if (!std::isfinite(spec.z.real()) || !std::isfinite(spec.z.imag())) {
    throw domain_error("series argument z must be finite");
  }
}

inline void validate(const VwpSpec& spec) {
  detail::validate_series_nome(spec.nome);
  detail::validate_parameters(std::span<const cplx>(&spec.t0, 1), "vwp t0");
  detail::validate_parameters(spec.ts, "vwp parameters");
}

// h(n) = prod theta(t_m q^n) / prod theta(w_k q^n) q^{alpha n} z, with the
// extra theta(q^{n+1}) in the denominator for the E kind.
inline FactorialValue structured_term_ratio(const ThetaSeriesSpec& spec, int n) {
  const cplx p = spec.nome.p;
  const cplx qn = ipow(spec.nome.q, n);
  FactorialValue h;
  for (const cplx t : spec.numerator) multiply_theta(h, t * qn, p);
  for (const cplx w : spec.denominator) divide_theta(h, w * qn, p);
  if (spec.kind == SeriesKind::unilateral_E) divide_theta(h, spec.nome.q * qn, p);
  detail::multiply_scale(h, detail::alpha_power(spec.nome.q, spec.alpha, n) * spec.z);
  return h;
}

inline cplx term_ratio(const ThetaSeriesSpec& spec, int n) {
  validate(spec);
  const FactorialValue h = structured_term_ratio(spec, n);
  if (h.is_pole() || (h.zero_order > 0 && !h.is_zero())) {
    throw pole_error("term ratio has a structural pole at n = " + std::to_string(n));
  }
  return h.value();
}

// Term ratio as a function of the multiplicative index variable w = q^n.
inline cplx term_ratio_at(const ThetaSeriesSpec& spec, cplx w) {
  const cplx p = spec.nome.p;
  cplx h = spec.z;
  for (const cplx t : spec.numerator) h *= theta(t * w, p);
  for (const cplx v : spec.denominator) h /= theta(v * w, p);
  if (spec.kind == SeriesKind::unilateral_E) h /= theta(spec.nome.q * w, p);
  if (spec.alpha != 0.0) h *= std::exp(spec.alpha * std::log(w));
  return h;
}

inline void check_truncation(std::span<const cplx> numerators, const Nome& nome,
                             const TruncationDecl& trunc) {
  if (trunc.N < 0) throw domain_error("truncation N must be a natural number");
  if (trunc.param_index < 0 || static_cast<std::size_t>(trunc.param_index) >= numerators.size()) {
    throw domain_error("truncation parameter index out of range");
  }
  if (trunc.M != 0 && nome.p == 0.0) throw domain_error("truncation with M != 0 needs p != 0");
  const cplx expected = ipow(nome.q, -trunc.N) * ipow(nome.p, -trunc.M);
  if (!approx_equal(numerators[trunc.param_index], expected, 1e-12)) {
    throw domain_error("declared truncation parameter is not q^{-N} p^{-M}");
  }
}

inline SeriesValue eval_E(const ThetaSeriesSpec& spec, const TruncationDecl& trunc) {
  validate(spec);
  if (spec.kind != SeriesKind::unilateral_E) throw domain_error("eval_E needs a unilateral spec");
  check_truncation(spec.numerator, spec.nome, trunc);
  auto ratio = [&spec](int n) { return structured_term_ratio(spec, n); };
  return detail::sum_range(ratio, 0, trunc.N, false);
}

inline SeriesValue eval_E(const ThetaSeriesSpec& spec, int max_terms,
                          const PrecisionPolicy& policy = {}) {
  validate(spec);
  if (spec.kind != SeriesKind::unilateral_E) throw domain_error("eval_E needs a unilateral spec");
  auto ratio = [&spec](int n) { return structured_term_ratio(spec, n); };
  return detail::sum_until_small(ratio, max_terms, policy.series_tol);
}

// Uses the spec's own truncation when present, otherwise the policy cap.
inline SeriesValue eval_E(const ThetaSeriesSpec& spec, const PrecisionPolicy& policy = {}) {
  if (spec.truncation) return eval_E(spec, *spec.truncation);
  return eval_E(spec, policy.max_terms, policy);
}

inline SeriesValue eval_G(const ThetaSeriesSpec& spec, Window window) {
  validate(spec);
  if (spec.kind != SeriesKind::bilateral_G) throw domain_error("eval_G needs a bilateral spec");
  auto ratio = [&spec](int n) { return structured_term_ratio(spec, n); };
  return detail::sum_range(ratio, window.n_min, window.n_max, true);
}

namespace detail {

// theta(t_0^2 q^{2n};p) / theta(t_0^2;p), evaluated directly.
inline FactorialValue vwp_lead(const VwpSpec& spec, int n) {
  FactorialValue out;
  if (n == 0) return out;
  const cplx t0sq = spec.t0 * spec.t0;
  multiply_theta(out, t0sq * ipow(spec.nome.q, 2 * n), spec.nome.p);
  divide_theta(out, t0sq, spec.nome.p);
  return out;
}

// Term ratio without the lead factor.
inline FactorialValue vwp_rest_ratio(const VwpSpec& spec, int n) {
  const cplx q = spec.nome.q;
  const cplx p = spec.nome.p;
  const cplx qn = ipow(q, n);
  const cplx t0sq = spec.t0 * spec.t0;
  FactorialValue h;
  if (spec.kind == VwpKind::unilateral) {
    multiply_theta(h, t0sq * qn, p);
    divide_theta(h, q * qn, p);
  }
  for (const cplx t : spec.ts) {
    multiply_theta(h, spec.t0 * t * qn, p);
    divide_theta(h, q * spec.t0 / t * qn, p);
  }
  multiply_scale(h, q * spec.z);
  return h;
}

}  // namespace detail

// Very-well-poised term ratio in the shifted parameterization.
inline FactorialValue structured_vwp_ratio(const VwpSpec& spec, int n) {
  const cplx qn = ipow(spec.nome.q, n);
  const cplx t0sq = spec.t0 * spec.t0;
  FactorialValue h = detail::vwp_rest_ratio(spec, n);
  multiply_theta(h, t0sq * qn * qn * spec.nome.q * spec.nome.q, spec.nome.p);
  divide_theta(h, t0sq * qn * qn, spec.nome.p);
  return h;
}

// Numerator parameters of the shifted form: t_0 t_0, t_0 t_1, ...
inline std::vector<cplx> vwp_numerators(const VwpSpec& spec) {
  std::vector<cplx> out{spec.t0 * spec.t0};
  for (const cplx t : spec.ts) out.push_back(spec.t0 * t);
  return out;
}

inline SeriesValue eval_vwp(const VwpSpec& spec, const TruncationDecl& trunc) {
  validate(spec);
  if (spec.kind != VwpKind::unilateral) throw domain_error("truncated vwp sum needs a unilateral spec");
  check_truncation(vwp_numerators(spec), spec.nome, trunc);
  auto ratio = [&spec](int n) { return detail::vwp_rest_ratio(spec, n); };
  auto lead = [&spec](int n) { return detail::vwp_lead(spec, n); };
  return detail::sum_range(ratio, 0, trunc.N, false, lead);
}

inline SeriesValue eval_vwp(const VwpSpec& spec, Window window) {
  validate(spec);
  auto ratio = [&spec](int n) { return detail::vwp_rest_ratio(spec, n); };
  auto lead = [&spec](int n) { return detail::vwp_lead(spec, n); };
  if (spec.kind == VwpKind::unilateral && window.n_min < 0) {
    throw domain_error("unilateral vwp window must start at n >= 0");
  }
  return detail::sum_range(ratio, window.n_min, window.n_max, spec.kind == VwpKind::bilateral, lead);
}

inline SeriesValue eval_vwp(const VwpSpec& spec, int max_terms,
                            const PrecisionPolicy& policy = {}) {
  validate(spec);
  if (spec.kind != VwpKind::unilateral) throw domain_error("capped vwp sum needs a unilateral spec");
  auto ratio = [&spec](int n) { return detail::vwp_rest_ratio(spec, n); };
  auto lead = [&spec](int n) { return detail::vwp_lead(spec, n); };
  return detail::sum_until_small(ratio, max_terms, policy.series_tol, lead);
}

// The plain spec behind a vwp spec: the four special parameters +-q t_0,
// q t_0 p^{-1/2}, -q t_0 p^{1/2}, the t_0 t_m, and their well-poised partners,
// led by t_0^2 in the unilateral (E) case. The special quartet contributes
// (-q)^n, hence z -> -z.
inline ThetaSeriesSpec expand_vwp(const VwpSpec& spec) {
  validate(spec);
  if (spec.nome.p == 0.0) throw domain_error("expand_vwp needs p != 0");
  const cplx q = spec.nome.q;
  const cplx t0 = spec.t0;
  const cplx sp = std::sqrt(spec.nome.p);
  const bool unilateral = spec.kind == VwpKind::unilateral;
  ThetaSeriesSpec out;
  out.kind = unilateral ? SeriesKind::unilateral_E : SeriesKind::bilateral_G;
  out.nome = spec.nome;
  out.z = -spec.z;
  out.numerator = {q * t0, -q * t0, q * t0 / sp, -q * t0 * sp};
  if (unilateral) out.numerator.insert(out.numerator.begin(), t0 * t0);
  out.denominator = {t0, -t0, t0 * sp, -t0 / sp};
  for (const cplx t : spec.ts) {
    out.numerator.push_back(t0 * t);
    out.denominator.push_back(q * t0 / t);
  }
  if (spec.truncation) {
    out.truncation = spec.truncation;
    if (spec.truncation->param_index > 0) out.truncation->param_index += unilateral ? 4 : 3;
  }
  return out;
}

// Additive very-well-poised series
//   sum [2u_0+2n]/[2u_0] prod_{m=0}^{r-4} [u_0+u_m]_n/[u_0+1-u_m]_n
//       z^n q^{n(sum_{m=0}^{r-4} u_m - (r-7)/2)}
// Truncation: u_0 + u_k (k = param_index, 0 meaning 2u_0) = -N - M tau/sigma.
inline SeriesValue eval_vwp_additive(cplx u0, std::span<const cplx> us, const ModularPair& pair,
                                     cplx z, const TruncationDecl& trunc,
                                     const PrecisionPolicy& policy = {}) {
  if (!(pair.tau.imag() > 0.0)) throw domain_error("additive vwp series needs Im(tau) > 0");
  if (trunc.N < 0 || trunc.param_index < 0 ||
      static_cast<std::size_t>(trunc.param_index) > us.size()) {
    throw domain_error("invalid additive truncation");
  }
  const cplx declared = u0 + (trunc.param_index == 0 ? u0 : us[trunc.param_index - 1]);
  const cplx expected = -static_cast<double>(trunc.N) - static_cast<double>(trunc.M) * pair.tau / pair.sigma;
  if (std::abs(declared - expected) > 1e-12 * std::max(1.0, std::abs(expected))) {
    throw domain_error("declared additive truncation does not hold");
  }

  const double r = static_cast<double>(us.size()) + 4.0;
  cplx exponent = u0 - (r - 7.0) / 2.0;
  for (const cplx u : us) exponent += u;
  const cplx qe = qpow(pair, exponent);

  auto elliptic = [&](FactorialValue& acc, cplx x, bool numerator) {
    const bool vanishing = is_theta1_zero(x, pair);
    const cplx v = vanishing ? cplx{1.0} : theta1(x, pair, Theta1Method::series, policy);
    if (numerator) {
      acc.multiply_factor(v, vanishing);
    } else {
      acc.divide_factor(v, vanishing);
    }
  };
  auto lead = [&](int n) {
    FactorialValue out;
    if (n == 0) return out;
    elliptic(out, 2.0 * u0 + 2.0 * n, true);
    elliptic(out, 2.0 * u0, false);
    return out;
  };
  auto ratio = [&](int n) {
    const double dn = n;
    FactorialValue h;
    elliptic(h, 2.0 * u0 + dn, true);
    elliptic(h, 1.0 + dn, false);
    for (const cplx u : us) {
      elliptic(h, u0 + u + dn, true);
      elliptic(h, u0 + 1.0 - u + dn, false);
    }
    detail::multiply_scale(h, z * qe);
    return h;
  };
  return detail::sum_range(ratio, 0, trunc.N, false, lead);
}

// ---------------------------------------------------------------------------
// Classification

struct SeriesClass {
  bool balanced = false;
  bool well_poised = false;
  bool very_well_poised = false;
  std::optional<bool> modular_constraint;  // only known for additive specs
  bool elliptic = false;
  int vwp_root_sign = 0;      // which sign of t_0^{1/2} matched (+1/-1), 0 if none
  int balance_sign = 0;       // vwp specs: prod t_m = +/- q^{(r-7)/2}
};

inline constexpr double classify_rel_tol = 1e-10;

namespace detail {

inline cplx product(std::span<const cplx> xs) {
  cplx out{1.0, 0.0};
  for (const cplx x : xs) out *= x;
  return out;
}

// True when all four very-well-poised parameters r q, -r q, r q p^{-1/2},
// -r q p^{1/2} (r = +/- t0^{1/2}) occur among `candidates`.
inline int match_vwp_quartet(std::span<const cplx> candidates, cplx t0, const Nome& nome) {
  if (nome.p == 0.0) return 0;
  const cplx sqrt_p = std::sqrt(nome.p);
  for (const int sign : {1, -1}) {
    const cplx root = static_cast<double>(sign) * std::sqrt(t0);
    const cplx targets[4] = {root * nome.q, -root * nome.q, root * nome.q / sqrt_p,
                             -root * nome.q * sqrt_p};
    std::vector<bool> used(candidates.size(), false);
    bool all = true;
    for (const cplx target : targets) {
      bool found = false;
      for (std::size_t i = 0; i < candidates.size(); ++i) {
        if (!used[i] && approx_equal(candidates[i], target, classify_rel_tol)) {
          used[i] = true;
          found = true;
          break;
        }
      }
      if (!found) {
        all = false;
        break;
      }
    }
    if (all) return sign;
  }
  return 0;
}

}  // namespace detail

inline SeriesClass classify(const ThetaSeriesSpec& spec) {
  validate(spec);
  const auto& t = spec.numerator;
  const auto& w = spec.denominator;
  const cplx q = spec.nome.q;
  SeriesClass out;

  if (spec.kind == SeriesKind::unilateral_E) {
    if (t.empty() || w.size() + 1 != t.size()) {
      throw dimension_error("E-kind classification needs s = r - 1 denominator parameters");
    }
    out.balanced = approx_equal(detail::product(t), q * detail::product(w), classify_rel_tol);
    const cplx wp = q * t[0];
    out.well_poised = true;
    for (std::size_t m = 0; m < w.size(); ++m) {
      out.well_poised = out.well_poised && approx_equal(t[m + 1] * w[m], wp, classify_rel_tol);
    }
    if (out.well_poised) {
      out.vwp_root_sign = detail::match_vwp_quartet(std::span(t).subspan(1), t[0], spec.nome);
    }
  } else {
    if (t.empty() || t.size() != w.size()) {
      throw dimension_error("G-kind classification needs r = s");
    }
    out.balanced = approx_equal(detail::product(t), detail::product(w), classify_rel_tol);
    const cplx wp = t[0] * w[0];
    out.well_poised = true;
    for (std::size_t m = 1; m < w.size(); ++m) {
      out.well_poised = out.well_poised && approx_equal(t[m] * w[m], wp, classify_rel_tol);
    }
    if (out.well_poised) out.vwp_root_sign = detail::match_vwp_quartet(t, wp / q, spec.nome);
  }
  out.very_well_poised = out.vwp_root_sign != 0;
  out.elliptic = out.balanced;
  return out;
}

// Very-well-poised specs are well-poised by construction; balancing of the
// expanded E form reads (t_0 prod t_m)^2 = q^{r-7}.
inline SeriesClass classify(const VwpSpec& spec) {
  validate(spec);
  SeriesClass out;
  out.well_poised = true;
  out.very_well_poised = spec.nome.p != 0.0;
  out.vwp_root_sign = out.very_well_poised ? 1 : 0;
  const int r = static_cast<int>(spec.ts.size()) + 4;
  const cplx q = spec.nome.q;
  cplx prod = spec.kind == VwpKind::unilateral ? spec.t0 : cplx{1.0};
  for (const cplx t : spec.ts) prod *= t;
  // unilateral: prod_{m=0}^{r-4} t_m = q^{(r-7)/2}; bilateral: prod_{m=1}^{r-4} t_m = q^{(r-8)/2}
  const int twice_exponent = spec.kind == VwpKind::unilateral ? r - 7 : r - 8;
  const cplx target_sq = ipow(q, twice_exponent);
  out.balanced = approx_equal(prod * prod, target_sq, classify_rel_tol);
  if (out.balanced) {
    const cplx target = twice_exponent % 2 == 0 ? ipow(q, twice_exponent / 2)
                                                : ipow(q, (twice_exponent - 1) / 2) * std::sqrt(q);
    out.balance_sign = approx_equal(prod, target, 1e-8) ? 1 : -1;
  }
  out.elliptic = out.balanced;
  return out;
}

// ---------------------------------------------------------------------------
// E/G connection for very-well-poised series

// G(t0; t; z) over [-M, M'] against the two unilateral pieces
//   E(t0; t, q/t0; z) over [0, M']  and
//   prefactor * E(q/t0; t, t0; q^{r-8}/(z prod t^2)) over [0, M-1].
inline VerificationReport ge_split_check(const VwpSpec& spec, int window_m, int window_m_prime,
                                         double tol = 1e-10);

// ---------------------------------------------------------------------------
// Basic hypergeometric series (p = 0), evaluated from q-Pochhammer symbols
// term by term. Independent of the theta code path.

enum class BasicKind { phi, psi, vwp_phi };

struct BasicSeriesSpec {
  BasicKind kind = BasicKind::phi;
  std::vector<cplx> numerator;    // phi: t_0..t_{r-1}; psi: t_1..t_r; vwp_phi: t_0, t_1..t_{r-4}
  std::vector<cplx> denominator;  // phi: w_1..w_s (the (q;q)_n is implicit); psi: w_1..w_s
  cplx q;
  cplx alpha{0.0, 0.0};
  cplx z{1.0, 0.0};
};

namespace detail {

// (a;q)_n with factors 1 - a q^k tagged as vanishing when a q^k = 1.
inline FactorialValue basic_pochhammer(cplx a, cplx q, int n) {
  FactorialValue out;
  const int count = n >= 0 ? n : -n;
  cplx x = n >= 0 ? a : a * ipow(q, n);
  for (int k = 0; k < count; ++k, x *= q) {
    const bool vanishing = std::abs(x - 1.0) <= lattice_rel_tol;
    if (n >= 0) {
      out.multiply_factor(1.0 - x, vanishing);
    } else {
      out.divide_factor(1.0 - x, vanishing);
    }
  }
  return out;
}

inline FactorialValue basic_term(const BasicSeriesSpec& spec, int n) {
  const cplx q = spec.q;
  FactorialValue term;
  switch (spec.kind) {
    case BasicKind::phi:
    case BasicKind::psi:
      for (const cplx t : spec.numerator) term *= basic_pochhammer(t, q, n);
      for (const cplx w : spec.denominator) term /= basic_pochhammer(w, q, n);
      if (spec.kind == BasicKind::phi) term /= basic_pochhammer(q, q, n);
      break;
    case BasicKind::vwp_phi: {
      const cplx t0 = spec.numerator.at(0);
      const cplx t0sq = t0 * t0;
      const cplx lead = 1.0 - t0sq * ipow(q, 2 * n);
      term.multiply_factor(lead, std::abs(t0sq * ipow(q, 2 * n) - 1.0) <= lattice_rel_tol);
      term.divide_factor(1.0 - t0sq, false);
      term *= basic_pochhammer(t0sq, q, n);
      term /= basic_pochhammer(q, q, n);
      for (std::size_t m = 1; m < spec.numerator.size(); ++m) {
        const cplx tm = spec.numerator[m];
        term *= basic_pochhammer(t0 * tm, q, n);
        term /= basic_pochhammer(q * t0 / tm, q, n);
      }
      break;
    }
  }
  const cplx zz = spec.kind == BasicKind::vwp_phi ? q * spec.z : spec.z;
  const cplx power = ipow(zz, n);
  term.multiply_factor(power, power == 0.0);
  if (spec.alpha != 0.0 && spec.kind == BasicKind::phi) {
    term.multiply_factor(std::exp(spec.alpha * (0.5 * n * (n - 1.0)) * std::log(q)), false);
  }
  return term;
}

}  // namespace detail

inline SeriesValue eval_basic(const BasicSeriesSpec& spec, Window window) {
  if (!(std::abs(spec.q) < 1.0) || spec.q == 0.0) throw domain_error("basic series needs 0 < |q| < 1");
  if (spec.kind != BasicKind::psi && window.n_min < 0) {
    throw domain_error("unilateral basic series window must start at n >= 0");
  }
  if (spec.kind == BasicKind::vwp_phi && spec.numerator.empty()) {
    throw dimension_error("vwp_phi needs t_0");
  }
  SeriesValue out;
  for (int n = window.n_min; n <= window.n_max; ++n) {
    const cplx v = detail::checked_value(detail::basic_term(spec, n), n);
    out.value += v;
    out.abs_sum += std::abs(v);
    ++out.terms_used;
  }
  const bool upper = detail::basic_term(spec, window.n_max + 1).is_zero();
  const bool lower = spec.kind != BasicKind::psi || detail::basic_term(spec, window.n_min - 1).is_zero();
  out.terminated = upper && lower;
  out.converged = out.terminated;
  out.tail_estimate = out.terminated ? 0.0 : std::abs(detail::basic_term(spec, window.n_max).value());
  return out;
}

// ---------------------------------------------------------------------------
// JSON

inline const char* to_string(SeriesKind kind) {
  return kind == SeriesKind::unilateral_E ? "unilateral_E" : "bilateral_G";
}

inline void to_json(json& j, const TruncationDecl& t) {
  j = json{{"index", t.param_index}, {"N", t.N}, {"M", t.M}};
}
inline void from_json(const json& j, TruncationDecl& t) {
  t.param_index = j.at("index").get<int>();
  t.N = j.at("N").get<int>();
  t.M = j.value("M", 0);
}

inline void to_json(json& j, const ThetaSeriesSpec& s) {
  j = json{{"kind", to_string(s.kind)},
           {"numerator", s.numerator},
           {"denominator", s.denominator},
           {"alpha", s.alpha},
           {"z", s.z},
           {"q", s.nome.q},
           {"p", s.nome.p}};
  if (s.truncation) j["truncation"] = *s.truncation;
}

inline void from_json(const json& j, ThetaSeriesSpec& s) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "unilateral_E") {
    s.kind = SeriesKind::unilateral_E;
  } else if (kind == "bilateral_G") {
    s.kind = SeriesKind::bilateral_G;
  } else {
    throw domain_error("unknown series kind '" + kind + "'");
  }
  s.numerator = j.at("numerator").get<std::vector<cplx>>();
  s.denominator = j.at("denominator").get<std::vector<cplx>>();
  s.alpha = j.contains("alpha") ? j.at("alpha").get<cplx>() : cplx{0.0};
  s.z = j.at("z").get<cplx>();
  s.nome = Nome{j.at("q").get<cplx>(), j.at("p").get<cplx>()};
  s.truncation.reset();
  if (j.contains("truncation")) s.truncation = j.at("truncation").get<TruncationDecl>();
}

inline void to_json(json& j, const VwpSpec& s) {
  j = json{{"kind", s.kind == VwpKind::unilateral ? "vwp_unilateral" : "vwp_bilateral"},
           {"t0", s.t0},
           {"ts", s.ts},
           {"z", s.z},
           {"q", s.nome.q},
           {"p", s.nome.p}};
  if (s.truncation) j["truncation"] = *s.truncation;
}

inline void from_json(const json& j, VwpSpec& s) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "vwp_unilateral") {
    s.kind = VwpKind::unilateral;
  } else if (kind == "vwp_bilateral") {
    s.kind = VwpKind::bilateral;
  } else {
    throw domain_error("unknown vwp kind '" + kind + "'");
  }
  s.t0 = j.at("t0").get<cplx>();
  s.ts = j.at("ts").get<std::vector<cplx>>();
  s.z = j.at("z").get<cplx>();
  s.nome = Nome{j.at("q").get<cplx>(), j.at("p").get<cplx>()};
  s.truncation.reset();
  if (j.contains("truncation")) s.truncation = j.at("truncation").get<TruncationDecl>();
}

inline void to_json(json& j, const SeriesValue& v) {
  j = json{{"value", v.value},
           {"terms_used", v.terms_used},
           {"terminated", v.terminated},
           {"tail_estimate", v.tail_estimate},
           {"converged", v.converged}};
}

inline VerificationReport ge_split_check(const VwpSpec& spec, int window_m, int window_m_prime,
                                         double tol) {
  validate(spec);
  if (spec.kind != VwpKind::bilateral) throw domain_error("G/E split needs a bilateral spec");
  if (window_m < 0 || window_m_prime < 0) throw domain_error("G/E split windows must be natural");
  const cplx q = spec.nome.q;
  const cplx p = spec.nome.p;
  const int r = static_cast<int>(spec.ts.size()) + 4;

  const SeriesValue lhs = eval_vwp(spec, Window{-window_m, window_m_prime});

  VwpSpec first{spec.t0, spec.ts, spec.z, spec.nome, VwpKind::unilateral, std::nullopt};
  first.ts.push_back(q / spec.t0);
  cplx rhs = eval_vwp(first, Window{0, window_m_prime}).value;
  int terms = window_m_prime + 1;

  if (window_m > 0) {
    cplx tsq{1.0, 0.0};
    for (const cplx t : spec.ts) tsq *= t * t;
    const cplx inv_t0sq = 1.0 / (spec.t0 * spec.t0);
    cplx prefactor = ipow(q, r - 7) / (spec.z * tsq) * theta(inv_t0sq * q * q, p) / theta(inv_t0sq, p);
    for (const cplx t : spec.ts) prefactor *= theta(t / spec.t0, p) / theta(q / (spec.t0 * t), p);

    VwpSpec second{q / spec.t0, spec.ts, ipow(q, r - 8) / (spec.z * tsq), spec.nome,
                   VwpKind::unilateral, std::nullopt};
    second.ts.push_back(spec.t0);
    rhs += prefactor * eval_vwp(second, Window{0, window_m - 1}).value;
    terms += window_m;
  }

  json echo = spec;
  echo["M"] = window_m;
  echo["M_prime"] = window_m_prime;
  return make_report(lhs.value, rhs, tol, std::move(echo), terms);
}

}  // namespace thetahyp

#endif  // THETAHYP_SERIES_HPP
