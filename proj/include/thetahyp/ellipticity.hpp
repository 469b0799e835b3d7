#ifndef THETAHYP_ELLIPTICITY_HPP
#define THETAHYP_ELLIPTICITY_HPP

// Numeric checks of the analytic structure of term ratios:
//   * quasiperiodicity multipliers of h(x) = prod [x+u_m] / prod [x+v_m] q^{beta x} y,
//   * ellipticity in the summation index (w -> p w, with w = q^x),
//   * total ellipticity (p-shifts of every free parameter, including the
//     multiple-series families),
//   * modular invariance under (sigma, tau) -> (sigma/tau, -1/tau).
//
// Samples that land within 1e-10 of a zero of some theta factor are
// rejected and redrawn.

#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "thetahyp/identities.hpp"

namespace thetahyp {

enum class ShiftKind { index_p_shift, param_p_shift, modular_S, modular_T };

inline const char* to_string(ShiftKind kind) {
  switch (kind) {
    case ShiftKind::index_p_shift: return "index_p_shift";
    case ShiftKind::param_p_shift: return "param_p_shift";
    case ShiftKind::modular_S: return "modular_S";
    case ShiftKind::modular_T: return "modular_T";
  }
  return "unknown";
}

struct EllipticityReport {
  ShiftKind shift_kind = ShiftKind::index_p_shift;
  std::string name;  // shifted variable
  double max_rel_dev = 0.0;
  int sample_count = 0;
  bool pass = false;
};

inline void to_json(json& j, const EllipticityReport& r) {
  j = json{{"shift_kind", to_string(r.shift_kind)},
           {"name", r.name},
           {"max_rel_dev", r.max_rel_dev},
           {"sample_count", r.sample_count},
           {"pass", r.pass}};
}

inline bool all_pass(const std::vector<EllipticityReport>& reports) {
  return std::all_of(reports.begin(), reports.end(), [](const auto& r) { return r.pass; });
}

// Thrown by guarded evaluations when a sample sits too close to a zero.
class sample_rejected : public pole_error {
 public:
  using pole_error::pole_error;
};

inline constexpr double sample_guard = 1e-10;
inline constexpr int rejection_budget = 50;  // redraws allowed per requested sample

namespace detail {

inline cplx guarded_theta(cplx x, cplx p) {
  const cplx v = theta(x, p);
  if (std::abs(v) < sample_guard) throw sample_rejected("theta factor too close to a zero");
  return v;
}

inline cplx guarded_theta1(cplx u, const ModularPair& pair) {
  const cplx v = theta1(u, pair);
  if (std::abs(v) < sample_guard) throw sample_rejected("elliptic number too close to a zero");
  return v;
}

// Multiplicative index variable: modulus in [0.6, 1.4], uniform phase.
inline cplx random_index_variable(std::mt19937_64& rng) {
  return random_parameter(rng, Band{0.6, 1.4});
}

// Additive sample point with sigma x spread over a fundamental cell.
inline cplx random_additive_point(std::mt19937_64& rng, const ModularPair& pair) {
  std::uniform_real_distribution<double> unit(-0.5, 0.5);
  return (unit(rng) + unit(rng) * pair.tau) / pair.sigma;
}

inline double max_component_deviation(const std::vector<cplx>& shifted, const std::vector<cplx>& base) {
  double dev = 0.0;
  for (std::size_t i = 0; i < base.size(); ++i) dev = std::max(dev, relative_deviation(shifted[i], base[i]));
  return dev;
}

// Runs `trial` until `samples` accepted draws, each returning a deviation.
template <class Trial>
EllipticityReport collect(ShiftKind kind, std::string name, int samples, double tol, Trial&& trial) {
  if (samples < 1) throw domain_error("ellipticity checks need at least one sample");
  if (!(tol > 0.0)) throw domain_error("ellipticity tolerance must be positive");
  EllipticityReport report;
  report.shift_kind = kind;
  report.name = std::move(name);
  int attempts = 0;
  while (report.sample_count < samples) {
    if (++attempts > samples * rejection_budget) {
      throw domain_error("too many rejected samples while checking " + report.name);
    }
    try {
      const double dev = trial();
      if (!std::isfinite(dev)) continue;
      report.max_rel_dev = std::max(report.max_rel_dev, dev);
      ++report.sample_count;
    } catch (const pole_error&) {
    }
  }
  report.pass = report.max_rel_dev <= tol;
  return report;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// General quasiperiodic form

struct HForm {
  std::vector<cplx> zeros;  // u_m
  std::vector<cplx> poles;  // v_m
  cplx beta{0.0, 0.0};
  cplx y{1.0, 0.0};
  ModularPair pair{};
};

inline cplx h_eval(const HForm& form, cplx x) {
  cplx h = form.y * qpow(form.pair, form.beta * x);
  for (const cplx u : form.zeros) h *= theta1(x + u, form.pair);
  for (const cplx v : form.poles) {
    if (is_theta1_zero(x + v, form.pair)) throw pole_error("h(x) has a pole here");
    h /= theta1(x + v, form.pair);
  }
  return h;
}

struct Multipliers {
  cplx a;
  cplx b;
  cplx gamma;
};

// h(x + 1/sigma) = a h(x),  h(x + tau/sigma) = b exp(2 pi i sigma gamma x) h(x).
inline Multipliers multipliers(const HForm& form) {
  const double r = static_cast<double>(form.zeros.size());
  const double s = static_cast<double>(form.poles.size());
  const double sign = (form.zeros.size() + form.poles.size()) % 2 == 0 ? 1.0 : -1.0;
  cplx sum_u{0.0}, sum_v{0.0};
  for (const cplx u : form.zeros) sum_u += u;
  for (const cplx v : form.poles) sum_v += v;
  const cplx& sigma = form.pair.sigma;
  const cplx& tau = form.pair.tau;
  Multipliers m;
  m.a = sign * expi2pi(form.beta);
  m.gamma = s - r;
  m.b = sign * std::exp(pi * imag_unit * tau * (s - r + 2.0 * form.beta)) * expi2pi(sigma * (sum_v - sum_u));
  return m;
}

struct MultiplierCheck {
  Multipliers closed_form;
  double period_dev = 0.0;  // max over samples of |h(x+1/sigma)/h(x) / a - 1|
  double quasi_dev = 0.0;   // same for the tau/sigma shift
  int sample_count = 0;
};

inline MultiplierCheck measure_multipliers(const HForm& form, int samples, std::uint64_t seed) {
  MultiplierCheck out;
  out.closed_form = multipliers(form);
  const auto& m = out.closed_form;
  std::mt19937_64 rng(seed);
  const cplx one_period = 1.0 / form.pair.sigma;
  const cplx quasi_period = form.pair.tau / form.pair.sigma;
  auto guarded = [&](cplx x) {
    const cplx h = h_eval(form, x);
    if (std::abs(h) < sample_guard) throw sample_rejected("h too small");
    return h;
  };
  const auto period = detail::collect(ShiftKind::index_p_shift, "x", samples, 1.0, [&] {
    const cplx x = detail::random_additive_point(rng, form.pair);
    const cplx h0 = guarded(x);
    const double dp = relative_deviation(guarded(x + one_period) / h0, m.a);
    const cplx expected = m.b * expi2pi(form.pair.sigma * m.gamma * x);
    const double dq = relative_deviation(guarded(x + quasi_period) / h0, expected);
    out.period_dev = std::max(out.period_dev, dp);
    out.quasi_dev = std::max(out.quasi_dev, dq);
    return std::max(dp, dq);
  });
  out.sample_count = period.sample_count;
  return out;
}

// ---------------------------------------------------------------------------
// Ellipticity in the summation index

// Compares h(p w) with h(w) at random w.
inline EllipticityReport check_ellipticity(const std::function<cplx(cplx)>& h, const Nome& nome,
                                           int samples, double tol, std::uint64_t seed = 0,
                                           const std::string& name = "w") {
  validate(nome);
  std::mt19937_64 rng(seed);
  return detail::collect(ShiftKind::index_p_shift, name, samples, tol, [&] {
    const cplx w = detail::random_index_variable(rng);
    const cplx base = h(w);
    return relative_deviation(h(nome.p * w), base);
  });
}

// Additive shifts x -> x + 1/sigma and x -> x + tau/sigma of a function of x.
inline EllipticityReport check_additive_ellipticity(const std::function<cplx(cplx)>& h,
                                                    const ModularPair& pair, int samples, double tol,
                                                    std::uint64_t seed = 0,
                                                    const std::string& name = "x") {
  std::mt19937_64 rng(seed);
  return detail::collect(ShiftKind::index_p_shift, name, samples, tol, [&] {
    const cplx x = detail::random_additive_point(rng, pair);
    const cplx base = h(x);
    return std::max(relative_deviation(h(x + 1.0 / pair.sigma), base),
                    relative_deviation(h(x + pair.tau / pair.sigma), base));
  });
}

// Term ratio of a series spec at w = q^x, rejecting samples near zeros.
inline cplx guarded_term_ratio(const ThetaSeriesSpec& spec, cplx w) {
  const cplx p = spec.nome.p;
  cplx h = spec.z;
  for (const cplx t : spec.numerator) h *= detail::guarded_theta(t * w, p);
  for (const cplx v : spec.denominator) h /= detail::guarded_theta(v * w, p);
  if (spec.kind == SeriesKind::unilateral_E) h /= detail::guarded_theta(spec.nome.q * w, p);
  if (spec.alpha != 0.0) h *= std::exp(spec.alpha * std::log(w));
  return h;
}

inline EllipticityReport check_index_ellipticity(const ThetaSeriesSpec& spec, int samples, double tol,
                                                 std::uint64_t seed = 0) {
  validate(spec);
  return check_ellipticity([&](cplx w) { return guarded_term_ratio(spec, w); }, spec.nome, samples, tol,
                           seed);
}

// ---------------------------------------------------------------------------
// Total ellipticity
//
// A family is a vector of independent variables plus a function returning
// the term ratio(s). The first `index_count` variables are summation-index
// variables q^{lambda}, redrawn for every sample; dependent parameters are
// recomputed inside `ratios`, so constraints survive each shift.

struct ShiftFamily {
  Nome nome{};
  std::vector<std::string> labels;
  std::vector<cplx> variables;
  int index_count = 1;
  std::function<std::vector<cplx>(std::span<const cplx>)> ratios;
};

inline std::vector<EllipticityReport> check_family(const ShiftFamily& family, int samples, double tol,
                                                   std::uint64_t seed = 0) {
  validate(family.nome);
  if (family.labels.size() != family.variables.size()) throw dimension_error("family labels mismatch");
  std::vector<EllipticityReport> out;
  for (std::size_t k = 0; k < family.variables.size(); ++k) {
    std::mt19937_64 rng(seed + 7919 * k);
    const auto kind = static_cast<int>(k) < family.index_count ? ShiftKind::index_p_shift
                                                              : ShiftKind::param_p_shift;
    out.push_back(detail::collect(kind, family.labels[k], samples, tol, [&] {
      std::vector<cplx> x = family.variables;
      for (int i = 0; i < family.index_count; ++i) x[i] = detail::random_index_variable(rng);
      const auto base = family.ratios(x);
      x[k] *= family.nome.p;
      return detail::max_component_deviation(family.ratios(x), base);
    }));
  }
  return out;
}

// Well-poised spec in normal form h = z prod_m theta(W a_m)/theta(W/a_m),
// W = c w, c^2 the well-poising constant, a_m = t_m / c. Balancing reads
// prod a_m = +-1 and makes the last a_m dependent; unbalanced specs keep all
// a_m free.
inline ShiftFamily well_poised_family(const ThetaSeriesSpec& spec) {
  const SeriesClass cls = classify(spec);
  if (!cls.well_poised) throw domain_error("well_poised_family needs a well-poised spec");
  if (spec.alpha != 0.0) throw domain_error("well_poised_family needs alpha = 0");
  const bool e_kind = spec.kind == SeriesKind::unilateral_E;
  const cplx c = std::sqrt(e_kind ? spec.nome.q * spec.numerator[0] : spec.numerator[0] * spec.denominator[0]);
  std::vector<cplx> a;
  for (const cplx t : spec.numerator) a.push_back(t / c);
  const cplx sign = detail::product(a);  // +-1 when balanced

  ShiftFamily f;
  f.nome = spec.nome;
  f.index_count = 1;
  f.labels.push_back("w");
  f.variables.push_back(c);  // W at w = 1
  const std::size_t free_count = cls.balanced ? a.size() - 1 : a.size();
  const int offset = e_kind ? 0 : 1;
  for (std::size_t m = 0; m < free_count; ++m) {
    f.labels.push_back("t" + std::to_string(m + offset));
    f.variables.push_back(a[m]);
  }
  const bool balanced = cls.balanced;
  const cplx z = spec.z;
  const cplx p = spec.nome.p;
  const std::size_t count = a.size();
  f.ratios = [=](std::span<const cplx> x) {
    const cplx W = x[0];
    cplx h = z;
    cplx prod{1.0, 0.0};
    for (std::size_t m = 0; m < count; ++m) {
      cplx am;
      if (m + 1 < count || !balanced) {
        am = x[m + 1];
        prod *= am;
      } else {
        am = sign / prod;
      }
      h *= detail::guarded_theta(W * am, p) / detail::guarded_theta(W / am, p);
    }
    return std::vector<cplx>{h};
  };
  return f;
}

// Any spec, parameters as given: every t and w is free except the last
// denominator parameter, which carries the balancing when the spec is
// balanced.
inline ShiftFamily generic_family(const ThetaSeriesSpec& spec) {
  const SeriesClass cls = classify(spec);
  ShiftFamily f;
  f.nome = spec.nome;
  f.index_count = 1;
  f.labels.push_back("w");
  f.variables.push_back(cplx{1.0});
  const int offset = spec.kind == SeriesKind::unilateral_E ? 0 : 1;
  for (std::size_t m = 0; m < spec.numerator.size(); ++m) {
    f.labels.push_back("t" + std::to_string(m + offset));
    f.variables.push_back(spec.numerator[m]);
  }
  const std::size_t nw = spec.denominator.size();
  const bool dependent = cls.balanced && nw > 0;
  for (std::size_t k = 0; k < nw - (dependent ? 1 : 0); ++k) {
    f.labels.push_back("w" + std::to_string(k + 1));
    f.variables.push_back(spec.denominator[k]);
  }
  const std::size_t nt = spec.numerator.size();
  const ThetaSeriesSpec base = spec;
  f.ratios = [=](std::span<const cplx> x) {
    ThetaSeriesSpec s = base;
    for (std::size_t m = 0; m < nt; ++m) s.numerator[m] = x[1 + m];
    cplx prod_t{1.0}, prod_w{1.0};
    for (const cplx t : s.numerator) prod_t *= t;
    for (std::size_t k = 0; k + (dependent ? 1 : 0) < nw; ++k) {
      s.denominator[k] = x[1 + nt + k];
      prod_w *= s.denominator[k];
    }
    if (dependent) {
      const cplx extra = s.kind == SeriesKind::unilateral_E ? s.nome.q : cplx{1.0};
      s.denominator[nw - 1] = prod_t / (extra * prod_w);
    }
    return std::vector<cplx>{guarded_term_ratio(s, x[0])};
  };
  return f;
}

inline std::vector<EllipticityReport> check_total_ellipticity(const ThetaSeriesSpec& spec, int samples,
                                                              double tol, std::uint64_t seed = 0) {
  const SeriesClass cls = classify(spec);
  const ShiftFamily f = cls.well_poised && spec.alpha == 0.0 ? well_poised_family(spec) : generic_family(spec);
  return check_family(f, samples, tol, seed);
}

inline std::vector<EllipticityReport> check_total_ellipticity(const VwpSpec& spec, int samples, double tol,
                                                              std::uint64_t seed = 0) {
  return check_total_ellipticity(expand_vwp(spec), samples, tol, seed);
}

// Multi-1 ratios h_l = c(lambda + e_l)/c(lambda), l = 1..n, at X_j = q^{lambda_j}.
// Variables: X_1..X_n, t_0..t_4, t; t_5 is fixed by t^{2n-2} prod t_r = q.
inline std::vector<cplx> multi1_ratios(int n, std::span<const cplx> X, std::span<const cplx, 5> t04, cplx t,
                                       const Nome& nome) {
  const cplx q = nome.q;
  const cplx p = nome.p;
  std::array<cplx, 6> tr{};
  cplx prod{1.0};
  for (int r = 0; r < 5; ++r) {
    tr[r] = t04[r];
    prod *= tr[r];
  }
  tr[5] = q / (ipow(t, 2 * n - 2) * prod);
  auto th = [p](cplx x) { return detail::guarded_theta(x, p); };

  std::vector<cplx> out;
  for (int l = 1; l <= n; ++l) {
    const cplx tl = tr[0] * ipow(t, l - 1) * X[l - 1];  // tau_l q^{lambda_l}
    cplx h = q * ipow(t, 2 * (n - l));
    for (int j = 1; j < l; ++j) {
      const cplx tj = tr[0] * ipow(t, j - 1) * X[j - 1];
      h *= th(q * tl * tj) / th(tl * tj) * th(q * tl / tj) / th(tl / tj);
      h *= th(t * tl * tj) / th(q * tl * tj / t) * th(t * tl / tj) / th(q * tl / (t * tj));
    }
    for (int k = l + 1; k <= n; ++k) {
      const cplx tk = tr[0] * ipow(t, k - 1) * X[k - 1];
      h *= th(q * tk * tl) / th(tk * tl) * th(tk / (q * tl)) / th(tk / tl);
      h *= th(t * tk * tl) / th(q * tk * tl / t) * th(tk / (t * tl)) / th(t * tk / (q * tl));
    }
    h *= th(q * q * tl * tl) / th(tl * tl);
    for (const cplx x : tr) h *= th(x * tl) / th(q * tl / x);
    out.push_back(h);
  }
  return out;
}

inline ShiftFamily multi1_family(const Multi1Params& params) {
  validate(params);
  const int n = params.n;
  ShiftFamily f;
  f.nome = params.nome;
  f.index_count = n;
  for (int j = 1; j <= n; ++j) {
    f.labels.push_back("q^lambda" + std::to_string(j));
    f.variables.push_back(cplx{1.0});
  }
  for (int r = 0; r < 5; ++r) {
    f.labels.push_back("t" + std::to_string(r));
    f.variables.push_back(params.t6[r]);
  }
  f.labels.push_back("t");
  f.variables.push_back(params.t);
  const Nome nome = params.nome;
  f.ratios = [n, nome](std::span<const cplx> x) {
    return multi1_ratios(n, x.first(n), x.subspan(n).first<5>(), x[n + 5], nome);
  };
  return f;
}

// Multi-2 ratios at X_j = q^{lambda_j}; variables X_1..X_n, t_0..t_{2n+2};
// t_{2n+3} is fixed by prod t_r = q.
inline std::vector<cplx> multi2_ratios(int n, std::span<const cplx> X, std::span<const cplx> tfree,
                                       const Nome& nome) {
  const cplx q = nome.q;
  const cplx p = nome.p;
  std::vector<cplx> t(tfree.begin(), tfree.end());
  cplx prod{1.0};
  for (const cplx x : t) prod *= x;
  t.push_back(q / prod);
  auto th = [p](cplx x) { return detail::guarded_theta(x, p); };

  std::vector<cplx> out;
  for (int l = 1; l <= n; ++l) {
    const cplx sl = t[l] * X[l - 1];
    cplx h = ipow(q, l);
    for (int j = 1; j < l; ++j) {
      const cplx sj = t[j] * X[j - 1];
      h *= th(q * sj * sl) / th(sj * sl) * th(sj / (q * sl)) / th(sj / sl);
    }
    for (int k = l + 1; k <= n; ++k) {
      const cplx sk = t[k] * X[k - 1];
      h *= th(q * sl * sk) / th(sl * sk) * th(q * sl / sk) / th(sl / sk);
    }
    h *= th(q * q * sl * sl) / th(sl * sl);
    for (const cplx tr : t) h *= th(sl * tr) / th(q * sl / tr);
    out.push_back(h);
  }
  return out;
}

inline ShiftFamily multi2_family(const Multi2Params& params) {
  validate(params);
  const int n = params.n;
  ShiftFamily f;
  f.nome = params.nome;
  f.index_count = n;
  for (int j = 1; j <= n; ++j) {
    f.labels.push_back("q^lambda" + std::to_string(j));
    f.variables.push_back(cplx{1.0});
  }
  for (int r = 0; r <= 2 * n + 2; ++r) {
    f.labels.push_back("t" + std::to_string(r));
    f.variables.push_back(params.t[r]);
  }
  const Nome nome = params.nome;
  f.ratios = [n, nome](std::span<const cplx> x) { return multi2_ratios(n, x.first(n), x.subspan(n), nome); };
  return f;
}

inline std::vector<EllipticityReport> check_total_ellipticity(const Multi1Params& params, int samples,
                                                              double tol, std::uint64_t seed = 0) {
  return check_family(multi1_family(params), samples, tol, seed);
}

inline std::vector<EllipticityReport> check_total_ellipticity(const Multi2Params& params, int samples,
                                                              double tol, std::uint64_t seed = 0) {
  return check_family(multi2_family(params), samples, tol, seed);
}

// ---------------------------------------------------------------------------
// Additive specs and modular invariance

// h(n) = prod [n+u_m] / prod [n+v_k] z, with an extra [n+1] below for the E kind.
struct AdditiveSeriesSpec {
  SeriesKind kind = SeriesKind::unilateral_E;
  std::vector<cplx> us;
  std::vector<cplx> vs;
  cplx z{1.0, 0.0};
  ModularPair pair{};
};

namespace detail {

inline std::vector<cplx> all_poles(const AdditiveSeriesSpec& spec) {
  std::vector<cplx> v = spec.vs;
  if (spec.kind == SeriesKind::unilateral_E) v.push_back(cplx{1.0});
  return v;
}

inline cplx sum(std::span<const cplx> xs) {
  cplx s{0.0};
  for (const cplx x : xs) s += x;
  return s;
}

inline cplx sum_squares(std::span<const cplx> xs) {
  cplx s{0.0};
  for (const cplx x : xs) s += x * x;
  return s;
}

inline double sum_scale(std::span<const cplx> a, std::span<const cplx> b) {
  double s = 1.0;
  for (const cplx x : a) s += std::norm(x);
  for (const cplx x : b) s += std::norm(x);
  return s;
}

}  // namespace detail

inline void validate(const AdditiveSeriesSpec& spec) {
  if (!(spec.pair.tau.imag() > 0.0) || !(spec.pair.sigma.imag() > 0.0)) {
    throw domain_error("additive spec needs Im(sigma) > 0 and Im(tau) > 0");
  }
}

inline cplx additive_term_ratio(const AdditiveSeriesSpec& spec, cplx x, const ModularPair& pair) {
  cplx h = spec.z;
  for (const cplx u : spec.us) h *= detail::guarded_theta1(x + u, pair);
  for (const cplx v : detail::all_poles(spec)) h /= detail::guarded_theta1(x + v, pair);
  return h;
}

// Multiplicative spec with t = q^u, w = q^v. With equal factor counts the
// theta_1 prefactors leave q^{-(sum u - sum v)/2}, which is folded into z.
inline ThetaSeriesSpec to_multiplicative(const AdditiveSeriesSpec& spec) {
  validate(spec);
  const auto poles = detail::all_poles(spec);
  if (spec.us.size() != poles.size()) {
    throw dimension_error("additive to multiplicative needs equal numbers of zeros and poles");
  }
  ThetaSeriesSpec out;
  out.kind = spec.kind;
  out.nome = nome_from_modular(spec.pair);
  for (const cplx u : spec.us) out.numerator.push_back(qpow(spec.pair, u));
  for (const cplx v : spec.vs) out.denominator.push_back(qpow(spec.pair, v));
  out.z = spec.z * qpow(spec.pair, -0.5 * (detail::sum(spec.us) - detail::sum(poles)));
  return out;
}

inline bool modular_constraint_holds(const AdditiveSeriesSpec& spec, double rel = classify_rel_tol) {
  const auto poles = detail::all_poles(spec);
  const cplx diff = detail::sum_squares(spec.us) - detail::sum_squares(poles);
  return std::abs(diff) <= rel * detail::sum_scale(spec.us, poles);
}

inline bool additive_balanced(const AdditiveSeriesSpec& spec, double rel = classify_rel_tol) {
  const auto poles = detail::all_poles(spec);
  if (spec.us.size() != poles.size()) return false;
  return std::abs(detail::sum(spec.us) - detail::sum(poles)) <= rel * std::sqrt(detail::sum_scale(spec.us, poles));
}

inline SeriesClass classify(const AdditiveSeriesSpec& spec) {
  SeriesClass out = classify(to_multiplicative(spec));
  out.balanced = out.balanced && additive_balanced(spec);
  out.elliptic = out.balanced;
  out.modular_constraint = modular_constraint_holds(spec);
  return out;
}

struct ModularityReport {
  bool structural = false;  // balancing and the sum-of-squares constraint
  EllipticityReport numeric;
  bool pass = false;
};

inline void to_json(json& j, const ModularityReport& r) {
  j = r.numeric;
  j["structural"] = r.structural;
  j["pass"] = r.pass;
}

// h(n) with (sigma, tau) against (sigma/tau, -1/tau) at integer n in [-6, 6].
inline ModularityReport check_modularity(const AdditiveSeriesSpec& spec, double tol, int samples = 13,
                                         std::uint64_t seed = 0) {
  validate(spec);
  ModularityReport out;
  out.structural = additive_balanced(spec) && modular_constraint_holds(spec);
  const ModularPair swapped = apply_modular(spec.pair, 0, -1, 1, 0);
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> index(-6, 6);
  out.numeric = detail::collect(ShiftKind::modular_S, "sigma,tau", samples, tol, [&] {
    const cplx n = static_cast<double>(index(rng));
    return relative_deviation(additive_term_ratio(spec, n, swapped), additive_term_ratio(spec, n, spec.pair));
  });
  out.pass = out.structural && out.numeric.pass;
  return out;
}

// prod_{m=1}^{r-1} [x+u_0+u_m]/[x+u_0-u_m] * [x+u_0-sum u]/[x+u_0+sum u] * z
inline cplx vwp_theorem_h(cplx u0, std::span<const cplx> us, cplx z, const ModularPair& pair, cplx x) {
  cplx h = z;
  cplx total{0.0};
  for (const cplx u : us) {
    h *= detail::guarded_theta1(x + u0 + u, pair) / detail::guarded_theta1(x + u0 - u, pair);
    total += u;
  }
  return h * detail::guarded_theta1(x + u0 - total, pair) / detail::guarded_theta1(x + u0 + total, pair);
}

// The additive spec of h above: zeros u_0 + u_m, u_0 - sum u; poles u_0 - u_m, u_0 + sum u.
inline AdditiveSeriesSpec vwp_theorem_spec(cplx u0, std::span<const cplx> us, cplx z, const ModularPair& pair) {
  AdditiveSeriesSpec spec;
  spec.kind = SeriesKind::bilateral_G;
  spec.pair = pair;
  spec.z = z;
  cplx total{0.0};
  for (const cplx u : us) {
    spec.us.push_back(u0 + u);
    spec.vs.push_back(u0 - u);
    total += u;
  }
  spec.us.push_back(u0 - total);
  spec.vs.push_back(u0 + total);
  return spec;
}

// ---------------------------------------------------------------------------
// JSON

inline void to_json(json& j, const HForm& f) {
  j = json{{"zeros", f.zeros}, {"poles", f.poles}, {"beta", f.beta}, {"y", f.y}, {"pair", f.pair}};
}

inline void from_json(const json& j, HForm& f) {
  f.zeros = j.at("zeros").get<std::vector<cplx>>();
  f.poles = j.at("poles").get<std::vector<cplx>>();
  f.beta = j.contains("beta") ? j.at("beta").get<cplx>() : cplx{0.0};
  f.y = j.contains("y") ? j.at("y").get<cplx>() : cplx{1.0};
  f.pair = j.at("pair").get<ModularPair>();
}

inline void to_json(json& j, const AdditiveSeriesSpec& s) {
  j = json{{"kind", to_string(s.kind)}, {"us", s.us}, {"vs", s.vs}, {"z", s.z},
           {"sigma", s.pair.sigma},      {"tau", s.pair.tau}};
}

inline void from_json(const json& j, AdditiveSeriesSpec& s) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "unilateral_E") {
    s.kind = SeriesKind::unilateral_E;
  } else if (kind == "bilateral_G") {
    s.kind = SeriesKind::bilateral_G;
  } else {
    throw domain_error("unknown series kind '" + kind + "'");
  }
  s.us = j.at("us").get<std::vector<cplx>>();
  s.vs = j.at("vs").get<std::vector<cplx>>();
  s.z = j.contains("z") ? j.at("z").get<cplx>() : cplx{1.0};
  s.pair = ModularPair{j.at("sigma").get<cplx>(), j.at("tau").get<cplx>()};
  validate(s);
}

}  // namespace thetahyp

#endif  // THETAHYP_ELLIPTICITY_HPP
