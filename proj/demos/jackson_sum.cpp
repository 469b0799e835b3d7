// Evaluates a terminating 10E9 both ways and prints the two sides.

#include <cstdio>

#include "thetahyp/identities.hpp"

int main() {
  using namespace thetahyp;
  const Nome nome{cplx{0.45, 0.2}, cplx{0.25, -0.15}};

  for (int N = 0; N <= 5; ++N) {
    const FTParams params = sample_ft(2024 + N, N, nome);
    const VerificationReport r = verify_ft_sum(params, 1e-10);
    std::printf("N=%d  sum = %+.15f%+.15fi  product = %+.15f%+.15fi  rel err %.1e\n", N, r.lhs.real(),
                r.lhs.imag(), r.rhs.real(), r.rhs.imag(), r.rel_err);
  }

  // The same sum through the series layer, with the truncation declared.
  const FTParams p = sample_ft(7, 3, nome);
  VwpSpec spec{p.t[0], {p.t[1], p.t[2], p.t[3], p.t[4], p.t[5]}, cplx{1.0}, nome, VwpKind::unilateral,
               TruncationDecl{4, 3, 0}};
  const SeriesValue v = eval_vwp(spec, *spec.truncation);
  std::printf("vwp series: %+.15f%+.15fi over %d terms, terminated=%d\n", v.value.real(), v.value.imag(),
              v.terms_used, v.terminated);
  return 0;
}
