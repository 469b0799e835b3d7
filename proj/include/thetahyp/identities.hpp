#ifndef THETAHYP_IDENTITIES_HPP
#define THETAHYP_IDENTITIES_HPP

// Terminating summation and transformation identities for very-well-poised
// balanced theta hypergeometric series, with constraint-respecting samplers:
//
//   * the elliptic Jackson (Frenkel-Turaev) sum for 10E9,
//   * the elliptic Bailey two-term transformation for 12E11,
//   * the ordered multiple sum over 0 <= l_1 <= ... <= l_n <= N with
//     parameters tau_j = t_0 t^{j-1} (multi-1),
//   * the box sum over 0 <= l_j <= N_j (multi-2),
//
// and the general multiple coefficient built from elliptic numbers.

#include <array>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "thetahyp/series.hpp"

namespace thetahyp {

inline constexpr double invariant_rel_tol = 1e-12;

// Modulus band for sampled parameters.
struct Band {
  double lo = 0.4;
  double hi = 0.9;
};

struct FTParams {
  std::array<cplx, 6> t{};
  Nome nome{};
  int N = 0;
};

struct BaileyParams {
  std::array<cplx, 8> t{};
  Nome nome{};
  int N = 0;
};

struct Multi1Params {
  int n = 1;  // rank
  cplx t;
  std::array<cplx, 6> t6{};
  int N = 0;
  Nome nome{};

  cplx tau(int j) const { return t6[0] * ipow(t, j - 1); }  // j = 1..n
};

struct Multi2Params {
  int n = 1;
  std::vector<cplx> t;  // t_0..t_{2n+3}
  std::vector<int> Ns;  // N_1..N_n
  Nome nome{};
};

// ---------------------------------------------------------------------------
// Term assembly with lattice-distance auditing of denominator factors.

namespace detail {

class TermBuilder {
 public:
  TermBuilder(const Nome& nome) : nome_(nome) {}

  void num(cplx x) { multiply_theta(value_, x, nome_.p); }

  void den(cplx x) {
    closest_ = std::min(closest_, lattice_distance(x, nome_.p));
    divide_theta(value_, x, nome_.p);
  }

  void num_factorial(cplx t, int n) { value_ *= theta_factorial(t, nome_, n); }

  void den_factorial(cplx t, int n) {
    audit_factorial(t, n);
    value_ /= theta_factorial(t, nome_, n);
  }

  void scale(cplx s) { value_.multiply_factor(s, s == 0.0); }

  const FactorialValue& value() const { return value_; }
  double closest_denominator() const { return closest_; }

 private:
  void audit_factorial(cplx t, int n) {
    const int count = n >= 0 ? n : -n;
    cplx x = n >= 0 ? t : t * ipow(nome_.q, n);
    for (int k = 0; k < count; ++k, x *= nome_.q) {
      closest_ = std::min(closest_, lattice_distance(x, nome_.p));
    }
  }

  Nome nome_;
  FactorialValue value_;
  double closest_ = std::numeric_limits<double>::infinity();
};

inline cplx random_parameter(std::mt19937_64& rng, Band band) {
  std::uniform_real_distribution<double> modulus(band.lo, band.hi);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * pi);
  return std::polar(modulus(rng), phase(rng));
}

inline void check_band(Band band) {
  if (!(band.lo > 0.0) || !(band.hi > band.lo)) {
    throw domain_error("sampling band needs 0 < lo < hi");
  }
}

inline void require(bool condition, const std::string& what) {
  if (!condition) throw domain_error(what);
}

inline constexpr int max_sampler_retries = 200;
inline constexpr double sampler_guard = 1e-6;
// Largest accepted sum |c_n| / |sum c_n| for a sampled draw.
inline constexpr double sampler_cancellation_limit = 1e4;

inline double cancellation(double abs_sum, cplx sum) {
  if (abs_sum == 0.0) return 1.0;
  return abs_sum / std::max(std::abs(sum), std::numeric_limits<double>::min());
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Frenkel-Turaev sum

inline void validate(const FTParams& p) {
  validate(p.nome);
  detail::validate_parameters(p.t, "FT parameters");
  detail::require(p.N >= 0, "FT truncation N must be natural");
  detail::require(approx_equal(detail::product(p.t), p.nome.q, invariant_rel_tol),
                  "FT balancing prod t_r = q violated");
  detail::require(approx_equal(p.t[0] * p.t[4], ipow(p.nome.q, -p.N), invariant_rel_tol),
                  "FT truncation t_0 t_4 = q^{-N} violated");
}

namespace detail {

struct SidedValue {
  cplx lhs;
  cplx rhs;
  int terms = 0;
  double closest = std::numeric_limits<double>::infinity();
  double cancellation = 1.0;

  bool well_conditioned() const {
    return closest > sampler_guard && cancellation <= sampler_cancellation_limit;
  }
};

inline SidedValue ft_sides(const FTParams& p) {
  const auto& t = p.t;
  const cplx q = p.nome.q;
  SidedValue out;

  VwpSpec spec{t[0], {t[1], t[2], t[3], t[4], t[5]}, cplx{1.0}, p.nome, VwpKind::unilateral,
               std::nullopt};
  const SeriesValue lhs = eval_vwp(spec, TruncationDecl{4, p.N, 0});
  out.lhs = lhs.value;
  out.terms = lhs.terms_used;
  out.cancellation = cancellation(lhs.abs_sum, lhs.value);

  TermBuilder rhs(p.nome);
  rhs.num_factorial(q * t[0] * t[0], p.N);
  rhs.num_factorial(q / (t[1] * t[2]), p.N);
  rhs.num_factorial(q / (t[1] * t[3]), p.N);
  rhs.num_factorial(q / (t[2] * t[3]), p.N);
  rhs.den_factorial(q / (t[0] * t[1] * t[2] * t[3]), p.N);
  for (int r = 1; r <= 3; ++r) rhs.den_factorial(q * t[0] / t[r], p.N);
  out.rhs = checked_value(rhs.value(), p.N);

  // conditioning of the left-hand denominators
  TermBuilder audit(p.nome);
  audit.den(t[0] * t[0]);
  for (int m = 0; m < 6; ++m) audit.den_factorial(q * t[0] / (m == 0 ? t[0] : t[m]), p.N);
  out.closest = std::min(rhs.closest_denominator(), audit.closest_denominator());
  return out;
}

}  // namespace detail

inline void to_json(json& j, const FTParams& p) {
  j = json{{"t", p.t}, {"q", p.nome.q}, {"p", p.nome.p}, {"N", p.N}};
}

inline void from_json(const json& j, FTParams& p) {
  const auto t = j.at("t").get<std::vector<cplx>>();
  if (t.size() != 6) throw dimension_error("FT parameters need six t values");
  std::copy(t.begin(), t.end(), p.t.begin());
  p.nome = Nome{j.at("q").get<cplx>(), j.at("p").get<cplx>()};
  p.N = j.at("N").get<int>();
  validate(p);
}

inline FTParams sample_ft(std::uint64_t seed, int N, const Nome& nome, Band band = {}) {
  validate(nome);
  detail::check_band(band);
  if (N < 0) throw domain_error("FT truncation N must be natural");
  std::mt19937_64 rng(seed);
  const cplx q = nome.q;
  for (int attempt = 0; attempt < detail::max_sampler_retries; ++attempt) {
    FTParams p;
    p.nome = nome;
    p.N = N;
    for (int r = 0; r < 4; ++r) p.t[r] = detail::random_parameter(rng, band);
    p.t[4] = ipow(q, -N) / p.t[0];
    p.t[5] = q / (p.t[0] * p.t[1] * p.t[2] * p.t[3] * p.t[4]);
    try {
      if (detail::ft_sides(p).well_conditioned()) return p;
    } catch (const pole_error&) {
    }
  }
  throw domain_error("FT sampler could not avoid structural zeros in the band");
}

inline VerificationReport verify_ft_sum(const FTParams& p, double tol) {
  validate(p);
  const auto sides = detail::ft_sides(p);
  return make_report(sides.lhs, sides.rhs, tol, json(p), sides.terms);
}

// ---------------------------------------------------------------------------
// Elliptic Bailey transformation

inline void validate(const BaileyParams& p) {
  validate(p.nome);
  detail::validate_parameters(p.t, "Bailey parameters");
  detail::require(p.N >= 0, "Bailey truncation N must be natural");
  const cplx q = p.nome.q;
  detail::require(approx_equal(detail::product(p.t), q * q, invariant_rel_tol),
                  "Bailey balancing prod t_m = q^2 violated");
  detail::require(approx_equal(p.t[0] * p.t[6], ipow(q, -p.N), invariant_rel_tol),
                  "Bailey truncation t_0 t_6 = q^{-N} violated");
}

// s_0 = root_sign * sqrt(q t_0 / (t_1 t_2 t_3)) (principal root), s_{1,2,3} = s_0 t_m / t_0,
// s_{4..7} = t_0 t_m / s_0.
inline std::array<cplx, 8> bailey_map(const std::array<cplx, 8>& t, const Nome& nome,
                                      int root_sign = 1) {
  std::array<cplx, 8> s{};
  s[0] = static_cast<double>(root_sign) * std::sqrt(nome.q * t[0] / (t[1] * t[2] * t[3]));
  for (int m = 1; m <= 3; ++m) s[m] = s[0] * t[m] / t[0];
  for (int m = 4; m <= 7; ++m) s[m] = t[0] * t[m] / s[0];
  return s;
}

namespace detail {

inline SidedValue bailey_sides(const BaileyParams& p, int root_sign) {
  const auto& t = p.t;
  const cplx q = p.nome.q;
  const auto s = bailey_map(t, p.nome, root_sign);
  SidedValue out;

  auto vwp = [&](const std::array<cplx, 8>& x) {
    VwpSpec spec{x[0], {x[1], x[2], x[3], x[4], x[5], x[6], x[7]}, cplx{1.0}, p.nome,
                 VwpKind::unilateral, std::nullopt};
    return eval_vwp(spec, TruncationDecl{6, p.N, 0});
  };
  const SeriesValue left = vwp(t);
  const SeriesValue right = vwp(s);
  out.lhs = left.value;
  out.cancellation = std::max(cancellation(left.abs_sum, left.value), cancellation(right.abs_sum, right.value));

  TermBuilder pref(p.nome);
  pref.num_factorial(q * t[0] * t[0], p.N);
  pref.num_factorial(q * s[0] / s[4], p.N);
  pref.num_factorial(q * s[0] / s[5], p.N);
  pref.num_factorial(q / (t[4] * t[5]), p.N);
  pref.den_factorial(q * s[0] * s[0], p.N);
  pref.den_factorial(q * t[0] / t[4], p.N);
  pref.den_factorial(q * t[0] / t[5], p.N);
  pref.den_factorial(q / (s[4] * s[5]), p.N);
  out.rhs = checked_value(pref.value(), p.N) * right.value;
  out.terms = left.terms_used + right.terms_used;

  TermBuilder audit(p.nome);
  for (const auto* x : {&t, &s}) {
    audit.den((*x)[0] * (*x)[0]);
    audit.den_factorial(q, p.N);
    for (int m = 1; m < 8; ++m) audit.den_factorial(q * (*x)[0] / (*x)[m], p.N);
  }
  out.closest = std::min(pref.closest_denominator(), audit.closest_denominator());
  return out;
}

}  // namespace detail

inline void to_json(json& j, const BaileyParams& p) {
  j = json{{"t", p.t}, {"q", p.nome.q}, {"p", p.nome.p}, {"N", p.N}};
}

inline void from_json(const json& j, BaileyParams& p) {
  const auto t = j.at("t").get<std::vector<cplx>>();
  if (t.size() != 8) throw dimension_error("Bailey parameters need eight t values");
  std::copy(t.begin(), t.end(), p.t.begin());
  p.nome = Nome{j.at("q").get<cplx>(), j.at("p").get<cplx>()};
  p.N = j.at("N").get<int>();
  validate(p);
}

inline BaileyParams sample_bailey(std::uint64_t seed, int N, const Nome& nome, Band band = {}) {
  validate(nome);
  detail::check_band(band);
  if (N < 0) throw domain_error("Bailey truncation N must be natural");
  std::mt19937_64 rng(seed);
  const cplx q = nome.q;
  for (int attempt = 0; attempt < detail::max_sampler_retries; ++attempt) {
    BaileyParams p;
    p.nome = nome;
    p.N = N;
    for (int m = 0; m < 6; ++m) p.t[m] = detail::random_parameter(rng, band);
    p.t[6] = ipow(q, -N) / p.t[0];
    cplx prod{1.0, 0.0};
    for (int m = 0; m < 7; ++m) prod *= p.t[m];
    p.t[7] = q * q / prod;
    try {
      if (detail::bailey_sides(p, 1).well_conditioned()) return p;
    } catch (const pole_error&) {
    }
  }
  throw domain_error("Bailey sampler could not avoid structural zeros in the band");
}

inline VerificationReport verify_bailey(const BaileyParams& p, double tol, int root_sign = 1) {
  validate(p);
  const auto sides = detail::bailey_sides(p, root_sign);
  json echo = p;
  echo["root_sign"] = root_sign;
  return make_report(sides.lhs, sides.rhs, tol, std::move(echo), sides.terms);
}

// Bailey parameters with t_2 t_3 = q built from a Frenkel-Turaev set; the
// right-hand 12E11 then reduces to its first term.
inline BaileyParams bailey_from_ft(const FTParams& ft, cplx t2) {
  BaileyParams b;
  b.nome = ft.nome;
  b.N = ft.N;
  b.t = {ft.t[0], ft.t[1], t2, ft.nome.q / t2, ft.t[2], ft.t[3], ft.t[4], ft.t[5]};
  return b;
}

// ---------------------------------------------------------------------------
// Multiple sum with tau_j = t_0 t^{j-1} (multi-1)

inline void validate(const Multi1Params& p) {
  validate(p.nome);
  detail::require(p.n >= 1, "multi-1 rank must be >= 1");
  detail::require(p.N >= 0, "multi-1 truncation N must be natural");
  detail::validate_parameters(p.t6, "multi-1 parameters");
  detail::validate_parameters(std::span<const cplx>(&p.t, 1), "multi-1 t");
  const cplx q = p.nome.q;
  detail::require(approx_equal(ipow(p.t, 2 * p.n - 2) * detail::product(p.t6), q, invariant_rel_tol),
                  "multi-1 balancing t^{2n-2} prod t_r = q violated");
  detail::require(approx_equal(ipow(p.t, p.n - 1) * p.t6[0] * p.t6[4], ipow(q, -p.N), invariant_rel_tol),
                  "multi-1 truncation t^{n-1} t_0 t_4 = q^{-N} violated");
}

namespace detail {

// Summand of the multi-1 sum at an arbitrary multi-index (entries of either
// order), so that coefficient ratios can be formed.
inline void multi1_summand(TermBuilder& b, const Multi1Params& p, std::span<const int> lambda) {
  const int n = p.n;
  const cplx q = p.nome.q;
  const cplx t = p.t;
  int sum_l = 0;
  int weighted = 0;
  for (int j = 1; j <= n; ++j) {
    sum_l += lambda[j - 1];
    weighted += (n - j) * lambda[j - 1];
  }
  b.scale(ipow(q, sum_l) * ipow(t, 2 * weighted));

  for (int j = 1; j <= n; ++j) {
    for (int k = j + 1; k <= n; ++k) {
      const cplx tj = p.tau(j);
      const cplx tk = p.tau(k);
      const int lj = lambda[j - 1];
      const int lk = lambda[k - 1];
      b.num(tk * tj * ipow(q, lk + lj));
      b.num(tk / tj * ipow(q, lk - lj));
      b.den(tk * tj);
      b.den(tk / tj);
      b.num_factorial(t * tk * tj, lk + lj);
      b.den_factorial(q / t * tk * tj, lk + lj);
      b.num_factorial(t * tk / tj, lk - lj);
      b.den_factorial(q / t * tk / tj, lk - lj);
    }
  }
  for (int j = 1; j <= n; ++j) {
    const cplx tj = p.tau(j);
    const int lj = lambda[j - 1];
    b.num(tj * tj * ipow(q, 2 * lj));
    b.den(tj * tj);
    for (int r = 0; r < 6; ++r) {
      b.num_factorial(p.t6[r] * tj, lj);
      b.den_factorial(q / p.t6[r] * tj, lj);
    }
  }
}

// Right-hand side read as a product over j = 1..n.
inline void multi1_rhs(TermBuilder& b, const Multi1Params& p) {
  const cplx q = p.nome.q;
  const cplx t = p.t;
  const auto& x = p.t6;
  const int n = p.n;
  for (int j = 1; j <= n; ++j) {
    b.num_factorial(q * ipow(t, n + j - 2) * x[0] * x[0], p.N);
    for (int r = 1; r <= 3; ++r) {
      for (int s = r + 1; s <= 3; ++s) b.num_factorial(q * ipow(t, 1 - j) / (x[r] * x[s]), p.N);
    }
    b.den_factorial(q * ipow(t, 2 - n - j) / (x[0] * x[1] * x[2] * x[3]), p.N);
    for (int r = 1; r <= 3; ++r) b.den_factorial(q * ipow(t, j - 1) * x[0] / x[r], p.N);
  }
}

// Calls f(lambda) for every 0 <= l_1 <= ... <= l_n <= N.
template <class F>
void for_each_ordered(int n, int N, F&& f) {
  std::vector<int> lambda(n, 0);
  while (true) {
    f(std::span<const int>(lambda));
    int i = n - 1;
    while (i >= 0 && lambda[i] == N) --i;
    if (i < 0) return;
    ++lambda[i];
    for (int k = i + 1; k < n; ++k) lambda[k] = lambda[i];
  }
}

// Calls f(lambda) for every 0 <= l_j <= N_j.
template <class F>
void for_each_in_box(std::span<const int> bounds, F&& f) {
  const std::size_t n = bounds.size();
  std::vector<int> lambda(n, 0);
  while (true) {
    f(std::span<const int>(lambda));
    std::size_t i = 0;
    while (i < n && lambda[i] == bounds[i]) lambda[i++] = 0;
    if (i == n) return;
    ++lambda[i];
  }
}

inline SidedValue multi1_sides(const Multi1Params& p) {
  SidedValue out;
  cplx sum{0.0, 0.0};
  double abs_sum = 0.0;
  for_each_ordered(p.n, p.N, [&](std::span<const int> lambda) {
    TermBuilder b(p.nome);
    multi1_summand(b, p, lambda);
    const cplx v = checked_value(b.value(), lambda.back());
    sum += v;
    abs_sum += std::abs(v);
    out.closest = std::min(out.closest, b.closest_denominator());
    ++out.terms;
  });
  out.lhs = sum;
  out.cancellation = cancellation(abs_sum, sum);
  TermBuilder rhs(p.nome);
  multi1_rhs(rhs, p);
  out.rhs = checked_value(rhs.value(), p.N);
  out.closest = std::min(out.closest, rhs.closest_denominator());
  return out;
}

}  // namespace detail

// Structured summand c(lambda) of the multi-1 sum.
inline FactorialValue multi1_coefficient(const Multi1Params& p, std::span<const int> lambda) {
  if (static_cast<int>(lambda.size()) != p.n) throw dimension_error("multi-1 index has wrong length");
  detail::TermBuilder b(p.nome);
  detail::multi1_summand(b, p, lambda);
  return b.value();
}

inline void to_json(json& j, const Multi1Params& p) {
  j = json{{"rank", p.n}, {"t", p.t}, {"ts", p.t6}, {"N", p.N}, {"q", p.nome.q}, {"p", p.nome.p}};
}

inline void from_json(const json& j, Multi1Params& p) {
  p.n = j.at("rank").get<int>();
  p.t = j.at("t").get<cplx>();
  const auto ts = j.at("ts").get<std::vector<cplx>>();
  if (ts.size() != 6) throw dimension_error("multi-1 parameters need six t_r values");
  std::copy(ts.begin(), ts.end(), p.t6.begin());
  p.N = j.at("N").get<int>();
  p.nome = Nome{j.at("q").get<cplx>(), j.at("p").get<cplx>()};
  validate(p);
}

inline Multi1Params sample_multi1(std::uint64_t seed, int n, int N, const Nome& nome,
                                  Band band = {}) {
  validate(nome);
  detail::check_band(band);
  if (n < 1 || N < 0) throw domain_error("multi-1 sampler needs n >= 1 and N >= 0");
  std::mt19937_64 rng(seed);
  const cplx q = nome.q;
  for (int attempt = 0; attempt < detail::max_sampler_retries; ++attempt) {
    Multi1Params p;
    p.n = n;
    p.N = N;
    p.nome = nome;
    p.t = detail::random_parameter(rng, band);
    for (int r = 0; r < 4; ++r) p.t6[r] = detail::random_parameter(rng, band);
    p.t6[4] = ipow(q, -N) / (ipow(p.t, n - 1) * p.t6[0]);
    p.t6[5] = q / (ipow(p.t, 2 * n - 2) * p.t6[0] * p.t6[1] * p.t6[2] * p.t6[3] * p.t6[4]);
    try {
      if (detail::multi1_sides(p).well_conditioned()) return p;
    } catch (const pole_error&) {
    }
  }
  throw domain_error("multi-1 sampler could not avoid structural zeros in the band");
}

inline VerificationReport verify_multi1(const Multi1Params& p, double tol) {
  validate(p);
  const auto sides = detail::multi1_sides(p);
  return make_report(sides.lhs, sides.rhs, tol, json(p), sides.terms);
}

// Frenkel-Turaev parameters shared with a rank-1 multi-1 set.
inline FTParams ft_from_multi1(const Multi1Params& p) {
  if (p.n != 1) throw domain_error("only rank-1 multi-1 parameters reduce to the FT sum");
  return FTParams{p.t6, p.nome, p.N};
}

// ---------------------------------------------------------------------------
// Box sum (multi-2)

inline void validate(const Multi2Params& p) {
  validate(p.nome);
  detail::require(p.n >= 1, "multi-2 rank must be >= 1");
  detail::require(p.t.size() == static_cast<std::size_t>(2 * p.n + 4), "multi-2 needs 2n+4 parameters");
  detail::require(p.Ns.size() == static_cast<std::size_t>(p.n), "multi-2 needs n truncation integers");
  detail::validate_parameters(p.t, "multi-2 parameters");
  const cplx q = p.nome.q;
  detail::require(approx_equal(detail::product(p.t), q, invariant_rel_tol),
                  "multi-2 balancing prod t_r = q violated");
  for (int j = 1; j <= p.n; ++j) {
    detail::require(p.Ns[j - 1] >= 0, "multi-2 truncation N_j must be natural");
    detail::require(approx_equal(ipow(q, p.Ns[j - 1]) * p.t[j] * p.t[p.n + j], cplx{1.0}, invariant_rel_tol),
                    "multi-2 truncation q^{N_j} t_j t_{n+j} = 1 violated");
  }
  for (int k = 1; k <= 16; ++k) {
    for (int l = 1; l <= 16; ++l) {
      detail::require(!approx_equal(ipow(q, k), ipow(p.nome.p, l), invariant_rel_tol),
                      "multi-2 needs q^k != p^l");
    }
  }
}

namespace detail {

inline void multi2_summand(TermBuilder& b, const Multi2Params& p, std::span<const int> lambda) {
  const int n = p.n;
  const cplx q = p.nome.q;
  const auto& t = p.t;
  int weighted = 0;
  for (int j = 1; j <= n; ++j) weighted += j * lambda[j - 1];
  b.scale(ipow(q, weighted));
  for (int j = 1; j <= n; ++j) {
    for (int k = j + 1; k <= n; ++k) {
      const int lj = lambda[j - 1];
      const int lk = lambda[k - 1];
      b.num(t[j] * t[k] * ipow(q, lj + lk));
      b.num(t[j] / t[k] * ipow(q, lj - lk));
      b.den(t[j] * t[k]);
      b.den(t[j] / t[k]);
    }
  }
  for (int j = 1; j <= n; ++j) {
    const int lj = lambda[j - 1];
    b.num(t[j] * t[j] * ipow(q, 2 * lj));
    b.den(t[j] * t[j]);
    for (const cplx tr : t) {
      b.num_factorial(t[j] * tr, lj);
      b.den_factorial(q * t[j] / tr, lj);
    }
  }
}

inline void multi2_rhs(TermBuilder& b, const Multi2Params& p) {
  const int n = p.n;
  const cplx q = p.nome.q;
  const auto& t = p.t;
  const cplx a = t[2 * n + 1];
  const cplx bb = t[2 * n + 2];
  const cplx c = t[2 * n + 3];
  int total = 0;
  for (const int N : p.Ns) total += N;

  b.num_factorial(q / (a * bb), total);
  b.num_factorial(q / (a * c), total);
  b.num_factorial(q / (bb * c), total);
  for (int j = 1; j <= n; ++j) {
    for (int k = j + 1; k <= n; ++k) {
      const cplx x = q * t[j] * t[k];
      b.num_factorial(x, p.Ns[j - 1]);
      b.num_factorial(x, p.Ns[k - 1]);
      b.den_factorial(x, p.Ns[j - 1] + p.Ns[k - 1]);
    }
  }
  for (int j = 1; j <= n; ++j) {
    const int Nj = p.Ns[j - 1];
    b.num_factorial(q * t[j] * t[j], Nj);
    b.den_factorial(q * t[j] / a, Nj);
    b.den_factorial(q * t[j] / bb, Nj);
    b.den_factorial(q * t[j] / c, Nj);
    b.den_factorial(ipow(q, 1 + total - Nj) / (t[j] * a * bb * c), Nj);
  }
}

inline SidedValue multi2_sides(const Multi2Params& p) {
  SidedValue out;
  cplx sum{0.0, 0.0};
  double abs_sum = 0.0;
  for_each_in_box(p.Ns, [&](std::span<const int> lambda) {
    TermBuilder b(p.nome);
    multi2_summand(b, p, lambda);
    const cplx v = checked_value(b.value(), lambda.front());
    sum += v;
    abs_sum += std::abs(v);
    out.closest = std::min(out.closest, b.closest_denominator());
    ++out.terms;
  });
  out.lhs = sum;
  out.cancellation = cancellation(abs_sum, sum);
  TermBuilder rhs(p.nome);
  multi2_rhs(rhs, p);
  out.rhs = checked_value(rhs.value(), 0);
  out.closest = std::min(out.closest, rhs.closest_denominator());
  return out;
}

}  // namespace detail

inline FactorialValue multi2_coefficient(const Multi2Params& p, std::span<const int> lambda) {
  if (static_cast<int>(lambda.size()) != p.n) throw dimension_error("multi-2 index has wrong length");
  detail::TermBuilder b(p.nome);
  detail::multi2_summand(b, p, lambda);
  return b.value();
}

inline void to_json(json& j, const Multi2Params& p) {
  j = json{{"rank", p.n}, {"ts", p.t}, {"Ns", p.Ns}, {"q", p.nome.q}, {"p", p.nome.p}};
}

inline void from_json(const json& j, Multi2Params& p) {
  p.n = j.at("rank").get<int>();
  p.t = j.at("ts").get<std::vector<cplx>>();
  p.Ns = j.at("Ns").get<std::vector<int>>();
  p.nome = Nome{j.at("q").get<cplx>(), j.at("p").get<cplx>()};
  validate(p);
}

inline Multi2Params sample_multi2(std::uint64_t seed, std::vector<int> Ns, const Nome& nome,
                                  Band band = {}) {
  validate(nome);
  detail::check_band(band);
  const int n = static_cast<int>(Ns.size());
  if (n < 1) throw domain_error("multi-2 sampler needs rank >= 1");
  for (const int N : Ns) {
    if (N < 0) throw domain_error("multi-2 truncation N_j must be natural");
  }
  std::mt19937_64 rng(seed);
  const cplx q = nome.q;
  for (int attempt = 0; attempt < detail::max_sampler_retries; ++attempt) {
    Multi2Params p;
    p.n = n;
    p.Ns = Ns;
    p.nome = nome;
    p.t.assign(2 * n + 4, cplx{1.0});
    p.t[0] = detail::random_parameter(rng, band);
    for (int j = 1; j <= n; ++j) {
      p.t[j] = detail::random_parameter(rng, band);
      p.t[n + j] = ipow(q, -Ns[j - 1]) / p.t[j];
    }
    p.t[2 * n + 1] = detail::random_parameter(rng, band);
    p.t[2 * n + 2] = detail::random_parameter(rng, band);
    cplx prod{1.0, 0.0};
    for (int r = 0; r <= 2 * n + 2; ++r) prod *= p.t[r];
    p.t[2 * n + 3] = q / prod;
    try {
      validate(p);
      if (detail::multi2_sides(p).well_conditioned()) return p;
    } catch (const pole_error&) {
    } catch (const domain_error&) {
    }
  }
  throw domain_error("multi-2 sampler could not avoid structural zeros in the band");
}

inline VerificationReport verify_multi2(const Multi2Params& p, double tol) {
  validate(p);
  const auto sides = detail::multi2_sides(p);
  return make_report(sides.lhs, sides.rhs, tol, json(p), sides.terms);
}

// ---------------------------------------------------------------------------
// General multiple coefficient
//   c(l) = prod_{k=1}^n prod_{i_1<..<i_k} prod_m [u_km]_{l_i1+..+l_ik} / [v_km]_{...}
//          * prod_j z_j^{l_j}
// subject to sum_k C(n-1,k-1) sum_m (u_km - v_km) = 0.

inline cplx general_multi_coefficient(const std::vector<std::vector<cplx>>& u_lists,
                                      const std::vector<std::vector<cplx>>& v_lists,
                                      std::span<const cplx> zs, const ModularPair& pair,
                                      std::span<const int> lambda) {
  const std::size_t n = lambda.size();
  if (n == 0 || n > 20 || u_lists.size() != n || v_lists.size() != n || zs.size() != n) {
    throw dimension_error("general coefficient needs n parameter blocks and n arguments");
  }
  for (const int l : lambda) {
    if (l < 0) throw domain_error("general coefficient needs natural indices");
  }

  // binomial C(n-1, k-1) by the multiplicative recurrence
  cplx balance{0.0, 0.0};
  double scale = 1.0;
  double binom = 1.0;
  for (std::size_t k = 1; k <= n; ++k) {
    if (k > 1) binom = binom * static_cast<double>(n - k + 1) / static_cast<double>(k - 1);
    for (const cplx u : u_lists[k - 1]) {
      balance += binom * u;
      scale += binom * std::abs(u);
    }
    for (const cplx v : v_lists[k - 1]) {
      balance -= binom * v;
      scale += binom * std::abs(v);
    }
  }
  if (std::abs(balance) > 1e-10 * scale) {
    throw domain_error("general coefficient balance constraint violated");
  }

  FactorialValue c;
  for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
    const auto k = static_cast<std::size_t>(std::popcount(mask));
    int total = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask & (1u << i)) total += lambda[i];
    }
    for (const cplx u : u_lists[k - 1]) c *= elliptic_factorial(u, pair, total);
    for (const cplx v : v_lists[k - 1]) c /= elliptic_factorial(v, pair, total);
  }
  for (std::size_t j = 0; j < n; ++j) {
    const cplx zj = ipow(zs[j], lambda[j]);
    c.multiply_factor(zj, zj == 0.0);
  }
  return detail::checked_value(c, 0);
}

}  // namespace thetahyp

#endif  // THETAHYP_IDENTITIES_HPP
