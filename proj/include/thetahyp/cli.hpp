#ifndef THETAHYP_CLI_HPP
#define THETAHYP_CLI_HPP

// Batch drivers behind the thetahyp command line tool. Each run_* function
// reads JSON, writes one JSON document and returns the process exit code:
//   0  every check passed
//   1  at least one numeric failure
//   2  input or contract error (a diagnostic object goes to stderr)

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "thetahyp/ellipticity.hpp"

namespace thetahyp::cli {

enum class Command { eval, verify, ellipticity, sample };

struct RunConfig {
  Command command = Command::eval;
  std::string target;
  std::string input_path;   // empty: verify falls back to the sampler flags
  std::optional<double> tolerance;
  std::uint64_t seed = 1;
  int draws = 10;
  std::string output_path;  // empty: stdout
  Band band{};
  Nome nome{cplx{0.5, 0.1}, cplx{0.3, 0.1}};
  int n_max = 4;  // largest truncation integer drawn by the samplers
  int rank = 2;   // multi1 / multi2
};

inline constexpr int exit_pass = 0;
inline constexpr int exit_fail = 1;
inline constexpr int exit_invalid = 2;

inline const std::vector<std::string>& identity_targets() {
  static const std::vector<std::string> names{"ft_sum", "bailey", "multi1", "multi2", "ge_split"};
  return names;
}

namespace detail {

class usage_error : public error {
 public:
  using error::error;
};

inline void validate(const RunConfig& config) {
  if (config.tolerance && !(*config.tolerance > 0.0 && *config.tolerance < 1.0)) {
    throw usage_error("--tol must lie in (0, 1)");
  }
  if (config.draws < 1) throw usage_error("--draws must be >= 1");
  if (config.n_max < 0) throw usage_error("--N must be >= 0");
  if (config.rank < 1 || config.rank > 6) throw usage_error("--rank must lie in 1..6");
  if (!(config.band.lo > 0.0) || !(config.band.hi > config.band.lo)) {
    throw usage_error("--band needs 0 < lo < hi");
  }
  thetahyp::validate(config.nome);
}

inline json read_input(const std::string& path) {
  if (path.empty()) throw usage_error("an input file is required");
  std::ifstream in(path, std::ios::binary);
  if (!in) throw usage_error("cannot open input file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return json::parse(buffer.str());
}

inline void emit(const RunConfig& config, const json& document) {
  const std::string text = document.dump(2) + "\n";
  if (config.output_path.empty()) {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream out(config.output_path, std::ios::binary | std::ios::trunc);
  if (!out) throw usage_error("cannot write output file '" + config.output_path + "'");
  out << text;
}

inline const char* error_kind(const std::exception& e) {
  if (dynamic_cast<const usage_error*>(&e)) return "usage_error";
  if (dynamic_cast<const dimension_error*>(&e)) return "dimension_error";
  if (dynamic_cast<const determinant_error*>(&e)) return "determinant_error";
  if (dynamic_cast<const convergence_error*>(&e)) return "convergence_error";
  if (dynamic_cast<const pole_error*>(&e)) return "pole_error";
  if (dynamic_cast<const domain_error*>(&e)) return "domain_error";
  if (dynamic_cast<const json::exception*>(&e)) return "json_error";
  return "error";
}

inline int report_error(const std::exception& e) {
  std::cerr << json{{"error", error_kind(e)}, {"message", e.what()}}.dump() << "\n";
  return exit_invalid;
}

template <class F>
int guarded(F&& body) {
  try {
    return body();
  } catch (const std::exception& e) {
    return report_error(e);
  }
}

inline Nome nome_field(const json& j, const Nome& fallback) {
  Nome nome = fallback;
  if (j.contains("q")) nome.q = j.at("q").get<cplx>();
  if (j.contains("p")) nome.p = j.at("p").get<cplx>();
  thetahyp::validate(nome);
  return nome;
}

// Random bilateral vwp spec with five t_m and windows M = M' = N.
inline json sample_ge_split(std::uint64_t seed, int N, const Nome& nome, Band band) {
  std::mt19937_64 rng(seed);
  VwpSpec spec;
  spec.kind = VwpKind::bilateral;
  spec.nome = nome;
  spec.t0 = thetahyp::detail::random_parameter(rng, band);
  for (int m = 0; m < 5; ++m) spec.ts.push_back(thetahyp::detail::random_parameter(rng, band));
  spec.z = thetahyp::detail::random_parameter(rng, band);
  json j = spec;
  j["M"] = N;
  j["M_prime"] = N;
  return j;
}

inline json sample_one(const std::string& target, std::uint64_t seed, int index, const RunConfig& c) {
  const int N = index % (c.n_max + 1);
  if (target == "ft_sum") return sample_ft(seed, N, c.nome, c.band);
  if (target == "bailey") return sample_bailey(seed, N, c.nome, c.band);
  if (target == "multi1") return sample_multi1(seed, c.rank, N, c.nome, c.band);
  if (target == "multi2") {
    std::vector<int> Ns;
    for (int j = 0; j < c.rank; ++j) Ns.push_back((index + j) % (c.n_max + 1));
    return sample_multi2(seed, Ns, c.nome, c.band);
  }
  if (target == "ge_split") return sample_ge_split(seed, N, c.nome, c.band);
  throw usage_error("unknown target '" + target + "'");
}

inline json sample_batch(const std::string& target, const RunConfig& c) {
  std::mt19937_64 master(c.seed);
  json params = json::array();
  for (int i = 0; i < c.draws; ++i) params.push_back(sample_one(target, master(), i, c));
  return params;
}

inline VerificationReport verify_one(const std::string& target, const json& params, double tol) {
  if (target == "ft_sum") return verify_ft_sum(params.get<FTParams>(), tol);
  if (target == "bailey") {
    const int sign = params.value("root_sign", 1);
    if (sign != 1 && sign != -1) throw domain_error("root_sign must be +1 or -1");
    return verify_bailey(params.get<BaileyParams>(), tol, sign);
  }
  if (target == "multi1") return verify_multi1(params.get<Multi1Params>(), tol);
  if (target == "multi2") return verify_multi2(params.get<Multi2Params>(), tol);
  if (target == "ge_split") {
    const VwpSpec spec = params.get<VwpSpec>();
    return ge_split_check(spec, params.at("M").get<int>(), params.at("M_prime").get<int>(), tol);
  }
  throw usage_error("unknown target '" + target + "'");
}

inline void check_target(const std::string& target) {
  const auto& names = identity_targets();
  if (std::find(names.begin(), names.end(), target) == names.end()) {
    throw usage_error("unknown target '" + target + "'");
  }
}

// Applies the optional "sampler" block of a verify input on top of the flags.
inline RunConfig sampler_config(RunConfig c, const json& s) {
  c.draws = s.value("draws", c.draws);
  c.seed = s.value("seed", c.seed);
  c.n_max = s.value("N_max", c.n_max);
  c.rank = s.value("rank", c.rank);
  if (s.contains("band")) {
    const auto band = s.at("band").get<std::vector<double>>();
    if (band.size() != 2) throw usage_error("sampler band must be [lo, hi]");
    c.band = Band{band[0], band[1]};
  }
  c.nome = nome_field(s, c.nome);
  validate(c);
  return c;
}

inline SeriesValue eval_document(const json& in) {
  const auto kind = in.at("kind").get<std::string>();
  std::optional<Window> window;
  if (in.contains("window")) {
    const auto w = in.at("window").get<std::vector<int>>();
    if (w.size() != 2) throw domain_error("window must be [n_min, n_max]");
    window = Window{w[0], w[1]};
  }
  constexpr int term_cap = 1000000;
  if (window && (window->n_min < -term_cap || window->n_max > term_cap)) {
    throw domain_error("window exceeds the term cap");
  }
  const int max_terms = in.value("max_terms", PrecisionPolicy{}.max_terms);
  if (max_terms < 1 || max_terms > term_cap) throw domain_error("max_terms must lie in 1..1000000");

  if (kind == "vwp_unilateral" || kind == "vwp_bilateral") {
    const VwpSpec spec = in.get<VwpSpec>();
    if (spec.truncation) return eval_vwp(spec, *spec.truncation);
    if (window) return eval_vwp(spec, *window);
    if (spec.kind == VwpKind::bilateral) throw domain_error("bilateral series need a window");
    return eval_vwp(spec, max_terms);
  }
  if (kind == "basic_phi" || kind == "basic_psi" || kind == "basic_vwp_phi") {
    BasicSeriesSpec spec;
    spec.kind = kind == "basic_phi" ? BasicKind::phi : kind == "basic_psi" ? BasicKind::psi : BasicKind::vwp_phi;
    spec.numerator = in.at("numerator").get<std::vector<cplx>>();
    spec.denominator = in.value("denominator", std::vector<cplx>{});
    spec.q = in.at("q").get<cplx>();
    spec.alpha = in.contains("alpha") ? in.at("alpha").get<cplx>() : cplx{0.0};
    spec.z = in.contains("z") ? in.at("z").get<cplx>() : cplx{1.0};
    if (!window) throw domain_error("basic series need a window");
    return eval_basic(spec, *window);
  }
  const ThetaSeriesSpec spec = in.get<ThetaSeriesSpec>();
  if (spec.kind == SeriesKind::bilateral_G) {
    if (!window) throw domain_error("bilateral series need a window");
    return eval_G(spec, *window);
  }
  if (spec.truncation) return eval_E(spec, *spec.truncation);
  if (window) {
    if (window->n_min != 0) throw domain_error("unilateral window must start at 0");
    return eval_E(spec, window->n_max + 1, PrecisionPolicy{});
  }
  return eval_E(spec, max_terms, PrecisionPolicy{});
}

inline std::vector<EllipticityReport> ellipticity_document(const json& in, double tol, int samples,
                                                           std::uint64_t seed, bool& pass) {
  const auto family = in.at("family").get<std::string>();
  const auto check = in.value("check", std::string("total"));
  std::vector<EllipticityReport> reports;

  auto single = [&](const ThetaSeriesSpec& spec) {
    if (check == "index") {
      reports.push_back(check_index_ellipticity(spec, samples, tol, seed));
    } else if (check == "total") {
      reports = check_total_ellipticity(spec, samples, tol, seed);
    } else {
      throw domain_error("series checks are 'index' or 'total'");
    }
  };

  if (family == "series") {
    single(in.at("spec").get<ThetaSeriesSpec>());
  } else if (family == "vwp") {
    single(expand_vwp(in.at("spec").get<VwpSpec>()));
  } else if (family == "multi1") {
    reports = check_total_ellipticity(in.at("params").get<Multi1Params>(), samples, tol, seed);
  } else if (family == "multi2") {
    reports = check_total_ellipticity(in.at("params").get<Multi2Params>(), samples, tol, seed);
  } else if (family == "additive") {
    const auto spec = in.at("spec").get<AdditiveSeriesSpec>();
    if (check == "modularity") {
      const ModularityReport m = check_modularity(spec, tol, samples, seed);
      EllipticityReport r = m.numeric;
      r.pass = m.pass;
      reports.push_back(r);
    } else {
      single(to_multiplicative(spec));
    }
  } else if (family == "vwp_theorem") {
    const cplx u0 = in.at("u0").get<cplx>();
    const auto us = in.at("us").get<std::vector<cplx>>();
    const cplx z = in.contains("z") ? in.at("z").get<cplx>() : cplx{1.0};
    const auto pair = in.at("pair").get<ModularPair>();
    if (!(pair.tau.imag() > 0.0)) throw domain_error("pair needs Im(tau) > 0");
    auto in_x = [&](cplx x) { return vwp_theorem_h(u0, us, z, pair, x); };
    auto in_u0 = [&](cplx u) { return vwp_theorem_h(u, us, z, pair, cplx{0.0}); };
    reports.push_back(check_additive_ellipticity(in_x, pair, samples, tol, seed, "x"));
    reports.push_back(check_additive_ellipticity(in_u0, pair, samples, tol, seed + 1, "u0"));
  } else {
    throw domain_error("unknown ellipticity family '" + family + "'");
  }
  pass = all_pass(reports);
  return reports;
}

}  // namespace detail

// eval: series spec JSON -> SeriesValue JSON.
inline int run_eval(const RunConfig& config) {
  return detail::guarded([&] {
    detail::validate(config);
    const json in = detail::read_input(config.input_path);
    const SeriesValue value = detail::eval_document(in);
    json out = value;
    out["input"] = in;
    detail::emit(config, out);
    return exit_pass;
  });
}

// verify: {target, params: [...]} (the sample output) or {target, sampler: {...}};
// without an input file the sampler runs from the flags.
inline int run_verify(const RunConfig& config) {
  return detail::guarded([&] {
    detail::validate(config);
    const double tol = config.tolerance.value_or(1e-8);
    std::string target = config.target;
    json params;
    if (config.input_path.empty()) {
      detail::check_target(target);
      params = detail::sample_batch(target, config);
    } else {
      const json in = detail::read_input(config.input_path);
      if (!in.is_object()) throw detail::usage_error("verify input must be a JSON object");
      if (in.contains("target")) {
        const auto named = in.at("target").get<std::string>();
        if (!target.empty() && named != target) {
          throw detail::usage_error("target '" + target + "' does not match input target '" + named + "'");
        }
        target = named;
      }
      detail::check_target(target);
      if (in.contains("params")) {
        params = in.at("params");
        if (params.is_object()) params = json::array({params});
        if (!params.is_array() || params.empty()) throw detail::usage_error("params must be a nonempty list");
      } else if (in.contains("sampler")) {
        params = detail::sample_batch(target, detail::sampler_config(config, in.at("sampler")));
      } else {
        throw detail::usage_error("verify input needs 'params' or 'sampler'");
      }
    }

    std::vector<VerificationReport> reports;
    for (const auto& p : params) reports.push_back(detail::verify_one(target, p, tol));
    const BatchSummary summary = summarize(reports);
    detail::emit(config, json{{"target", target}, {"tolerance", tol}, {"reports", reports}, {"summary", summary}});
    return summary.passed == summary.total ? exit_pass : exit_fail;
  });
}

// ellipticity: {family, check, spec | params} -> EllipticityReport list.
inline int run_ellipticity(const RunConfig& config) {
  return detail::guarded([&] {
    detail::validate(config);
    const double tol = config.tolerance.value_or(1e-9);
    const json in = detail::read_input(config.input_path);
    bool pass = false;
    const auto reports = detail::ellipticity_document(in, tol, config.draws, config.seed, pass);
    detail::emit(config, json{{"family", in.at("family")}, {"tolerance", tol}, {"reports", reports}, {"pass", pass}});
    return pass ? exit_pass : exit_fail;
  });
}

// sample: draws parameter sets for a target in the format run_verify reads.
inline int run_sample(const RunConfig& config) {
  return detail::guarded([&] {
    detail::validate(config);
    detail::check_target(config.target);
    json out{{"target", config.target},
             {"seed", config.seed},
             {"params", detail::sample_batch(config.target, config)}};
    detail::emit(config, out);
    return exit_pass;
  });
}

inline int run(const RunConfig& config) {
  switch (config.command) {
    case Command::eval: return run_eval(config);
    case Command::verify: return run_verify(config);
    case Command::ellipticity: return run_ellipticity(config);
    case Command::sample: return run_sample(config);
  }
  return exit_invalid;
}

}  // namespace thetahyp::cli

#endif  // THETAHYP_CLI_HPP
