#ifndef THETAHYP_REPORT_HPP
#define THETAHYP_REPORT_HPP

// JSON conventions shared by every module (complex numbers as [re, im]) and
// the both-sides VerificationReport.

#include <algorithm>
#include <complex>
#include <vector>

#include "json.hpp"
#include "thetahyp/theta_core.hpp"

namespace nlohmann {

template <>
struct adl_serializer<std::complex<double>> {
  static void to_json(json& j, const std::complex<double>& z) {
    j = json::array({z.real(), z.imag()});
  }
  static void from_json(const json& j, std::complex<double>& z) {
    if (j.is_number()) {
      z = {j.get<double>(), 0.0};
      return;
    }
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
      throw thetahyp::domain_error("complex value must be [re, im]");
    }
    z = {j[0].get<double>(), j[1].get<double>()};
  }
};

}  // namespace nlohmann

namespace thetahyp {

using json = nlohmann::json;

inline void to_json(json& j, const Nome& nome) { j = json{{"q", nome.q}, {"p", nome.p}}; }
inline void from_json(const json& j, Nome& nome) {
  nome.q = j.at("q").get<cplx>();
  nome.p = j.at("p").get<cplx>();
}

inline void to_json(json& j, const ModularPair& pair) {
  j = json{{"sigma", pair.sigma}, {"tau", pair.tau}};
}
inline void from_json(const json& j, ModularPair& pair) {
  pair.sigma = j.at("sigma").get<cplx>();
  pair.tau = j.at("tau").get<cplx>();
}

// Relative comparison |a - b| <= rel * max(|a|, |b|).
inline bool approx_equal(cplx a, cplx b, double rel) {
  return std::abs(a - b) <= rel * std::max(std::abs(a), std::abs(b));
}

inline double relative_deviation(cplx value, cplx reference) {
  const double scale = std::abs(reference);
  const double diff = std::abs(value - reference);
  return scale < 1e-20 ? diff : diff / scale;
}

struct VerificationReport {
  cplx lhs;
  cplx rhs;
  double abs_err = 0.0;
  double rel_err = 0.0;
  bool pass = false;
  json params_echo;
  int terms_summed = 0;
};

// pass <=> rel_err <= tol, with the absolute error standing in when |rhs| < 1e-20.
inline VerificationReport make_report(cplx lhs, cplx rhs, double tol,
                                      json params_echo, int terms_summed) {
  VerificationReport report;
  report.lhs = lhs;
  report.rhs = rhs;
  report.abs_err = std::abs(lhs - rhs);
  report.rel_err = relative_deviation(lhs, rhs);
  report.pass = report.rel_err <= tol;
  report.params_echo = std::move(params_echo);
  report.terms_summed = terms_summed;
  return report;
}

inline void to_json(json& j, const VerificationReport& r) {
  j = json{{"lhs", r.lhs},         {"rhs", r.rhs},       {"abs_err", r.abs_err},
           {"rel_err", r.rel_err}, {"pass", r.pass},     {"params_echo", r.params_echo},
           {"terms_summed", r.terms_summed}};
}

struct BatchSummary {
  int total = 0;
  int passed = 0;
  double max_rel_err = 0.0;
};

inline BatchSummary summarize(const std::vector<VerificationReport>& reports) {
  BatchSummary s;
  for (const auto& r : reports) {
    ++s.total;
    if (r.pass) ++s.passed;
    s.max_rel_err = std::max(s.max_rel_err, r.rel_err);
  }
  return s;
}

inline void to_json(json& j, const BatchSummary& s) {
  j = json{{"total", s.total}, {"passed", s.passed}, {"max_rel_err", s.max_rel_err}};
}

}  // namespace thetahyp

#endif  // THETAHYP_REPORT_HPP
