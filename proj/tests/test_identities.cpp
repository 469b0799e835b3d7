#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "oracles.hpp"
#include "thetahyp/identities.hpp"

using namespace thetahyp;

namespace {

const Nome nome{std::polar(0.5, 0.4), std::polar(0.3, 1.3)};

}  // namespace

TEST(Samplers, InvariantsHoldAndSeedsAreDeterministic) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const int N = static_cast<int>(seed % 4);
    const FTParams ft = sample_ft(seed, N, nome);
    EXPECT_NO_THROW(validate(ft));
    EXPECT_LT(oracle::rel(ft.t[0] * ft.t[4], oracle::power(nome.q, -N)), invariant_rel_tol);
    cplx prod = 1.0;
    for (const cplx t : ft.t) prod *= t;
    EXPECT_LT(oracle::rel(prod, nome.q), invariant_rel_tol);
    for (int r = 0; r < 4; ++r) {
      EXPECT_GE(std::abs(ft.t[r]), 0.4);
      EXPECT_LE(std::abs(ft.t[r]), 0.9);
    }
    EXPECT_EQ(json(sample_ft(seed, N, nome)).dump(), json(ft).dump());

    EXPECT_NO_THROW(validate(sample_bailey(seed, N, nome)));
    EXPECT_NO_THROW(validate(sample_multi1(seed, 2, N, nome)));
    EXPECT_NO_THROW(validate(sample_multi2(seed, {N, 1}, nome)));
  }
  EXPECT_NE(json(sample_ft(1, 2, nome)).dump(), json(sample_ft(2, 2, nome)).dump());
  EXPECT_THROW(sample_ft(1, -1, nome), domain_error);
  EXPECT_THROW(sample_ft(1, 2, nome, Band{0.9, 0.4}), domain_error);
}

TEST(FrenkelTuraev, HandExpandedSingleTermCase) {
  const Nome nm{std::polar(0.5, 0.3), std::polar(0.3, -0.7)};
  FTParams p;
  p.nome = nm;
  p.N = 1;
  p.t = {cplx{0.6, 0.2}, cplx{-0.5, 0.4}, cplx{0.3, -0.6}, cplx{0.7, 0.1}, 0.0, 0.0};
  p.t[4] = 1.0 / (nm.q * p.t[0]);
  p.t[5] = nm.q / (p.t[0] * p.t[1] * p.t[2] * p.t[3] * p.t[4]);
  const VerificationReport r = verify_ft_sum(p, 1e-10);
  EXPECT_TRUE(r.pass);
  const cplx frozen{1.00239581606694876324, -0.03148569117696723472};
  EXPECT_LT(oracle::rel(r.lhs, frozen), 1e-12);
  EXPECT_LT(oracle::rel(r.rhs, frozen), 1e-12);
  EXPECT_EQ(r.terms_summed, 2);
}

TEST(FrenkelTuraev, SampledDrawsAgainstDirectOracle) {
  for (std::uint64_t seed = 10; seed < 20; ++seed) {
    const int N = static_cast<int>(seed % 6);
    const FTParams p = sample_ft(seed, N, nome);
    const VerificationReport r = verify_ft_sum(p, 1e-8);
    EXPECT_TRUE(r.pass) << r.rel_err;
    const std::vector<cplx> ts(p.t.begin() + 1, p.t.end());
    const cplx lhs = oracle::vwp_sum(p.t[0], ts, nome.q, nome.p, 1.0, 0, N, true);
    EXPECT_LT(oracle::rel(r.lhs, lhs), 1e-11);
    const std::vector<cplx> all(p.t.begin(), p.t.end());
    EXPECT_LT(oracle::rel(r.rhs, oracle::ft_rhs(all, nome.q, nome.p, N)), 1e-11);
  }
}

TEST(FrenkelTuraev, BrokenBalancingIsRejected) {
  FTParams p = sample_ft(3, 2, nome);
  p.t[5] *= 1.1;
  EXPECT_THROW(verify_ft_sum(p, 1e-8), domain_error);
  EXPECT_THROW(json::parse(json(p).dump()).get<FTParams>(), domain_error);
}

TEST(Bailey, MapTransportsConstraints) {
  const BaileyParams b = sample_bailey(21, 3, nome);
  for (const int sign : {1, -1}) {
    const auto s = bailey_map(b.t, nome, sign);
    cplx prod = 1.0;
    for (const cplx x : s) prod *= x;
    EXPECT_LT(oracle::rel(prod, nome.q * nome.q), 1e-12);
    EXPECT_LT(oracle::rel(s[0] * s[6], oracle::power(nome.q, -3)), 1e-12);
    // applying the map again returns t up to the choice of square root
    bool recovered = false;
    for (const int back : {1, -1}) {
      const auto t = bailey_map(s, nome, back);
      double dev = 0.0;
      for (int m = 0; m < 8; ++m) dev = std::max(dev, oracle::rel(t[m], b.t[m]));
      recovered = recovered || dev < 1e-12;
    }
    EXPECT_TRUE(recovered);
  }
}

TEST(Bailey, BothRootsSatisfyTheTransformation) {
  for (std::uint64_t seed = 30; seed < 36; ++seed) {
    const BaileyParams b = sample_bailey(seed, static_cast<int>(seed % 5), nome);
    EXPECT_TRUE(verify_bailey(b, 1e-8, 1).pass);
    EXPECT_TRUE(verify_bailey(b, 1e-8, -1).pass);
  }
}

TEST(Bailey, ReducesToFrenkelTuraev) {
  std::mt19937_64 rng(37);
  for (std::uint64_t seed = 40; seed < 45; ++seed) {
    const FTParams ft = sample_ft(seed, static_cast<int>(seed % 4), nome);
    const BaileyParams b = bailey_from_ft(ft, oracle::random_point(rng, 0.4, 0.9));
    const VerificationReport rb = verify_bailey(b, 1e-8);
    const VerificationReport rf = verify_ft_sum(ft, 1e-8);
    EXPECT_TRUE(rb.pass);
    EXPECT_LT(oracle::rel(rb.lhs, rf.lhs), 1e-9);
    EXPECT_LT(oracle::rel(rb.rhs, rf.rhs), 1e-9);
  }
}

TEST(Bailey, BrokenBalancingIsRejected) {
  BaileyParams b = sample_bailey(50, 2, nome);
  b.t[7] *= cplx{1.0, 1e-6};
  EXPECT_THROW(verify_bailey(b, 1e-8), domain_error);
}

TEST(Multi1, RankOneIsFrenkelTuraev) {
  for (std::uint64_t seed = 60; seed < 65; ++seed) {
    const Multi1Params m = sample_multi1(seed, 1, static_cast<int>(seed % 5), nome);
    const VerificationReport rm = verify_multi1(m, 1e-7);
    const VerificationReport rf = verify_ft_sum(ft_from_multi1(m), 1e-8);
    EXPECT_TRUE(rm.pass);
    EXPECT_LT(oracle::rel(rm.lhs, rf.lhs), 1e-9);
    EXPECT_LT(oracle::rel(rm.rhs, rf.rhs), 1e-9);
  }
  EXPECT_THROW(ft_from_multi1(sample_multi1(1, 2, 1, nome)), domain_error);
}

TEST(Multi1, HigherRanks) {
  for (int n = 2; n <= 3; ++n) {
    for (std::uint64_t seed = 70; seed < 73; ++seed) {
      const VerificationReport r = verify_multi1(sample_multi1(seed, n, 3, nome), 1e-7);
      EXPECT_TRUE(r.pass) << "n=" << n << " rel=" << r.rel_err;
    }
  }
}

TEST(Multi2, RankOneIsTheVeryWellPoisedSum) {
  for (std::uint64_t seed = 80; seed < 85; ++seed) {
    const int N = static_cast<int>(seed % 4);
    const Multi2Params m = sample_multi2(seed, {N}, nome);
    const VerificationReport r = verify_multi2(m, 1e-7);
    EXPECT_TRUE(r.pass);
    const VwpSpec v{m.t[1], {m.t[0], m.t[2], m.t[3], m.t[4], m.t[5]}, 1.0, nome, VwpKind::unilateral,
                    std::nullopt};
    EXPECT_LT(oracle::rel(r.lhs, eval_vwp(v, Window{0, N}).value), 1e-12);
  }
}

TEST(Multi2, SymmetricUnderRelabelling) {
  const Multi2Params m = sample_multi2(90, {2, 1}, nome);
  Multi2Params swapped = m;
  std::swap(swapped.t[1], swapped.t[2]);
  std::swap(swapped.t[3], swapped.t[4]);
  std::swap(swapped.Ns[0], swapped.Ns[1]);
  const VerificationReport a = verify_multi2(m, 1e-7);
  const VerificationReport b = verify_multi2(swapped, 1e-7);
  EXPECT_TRUE(a.pass);
  EXPECT_LT(oracle::rel(a.lhs, b.lhs), 1e-12);
  EXPECT_LT(oracle::rel(a.rhs, b.rhs), 1e-12);
}

TEST(Multi2, HigherRanks) {
  for (std::uint64_t seed = 91; seed < 94; ++seed) {
    EXPECT_TRUE(verify_multi2(sample_multi2(seed, {1, 3}, nome), 1e-7).pass);
    EXPECT_TRUE(verify_multi2(sample_multi2(seed, {2, 1, 2}, nome), 1e-7).pass);
  }
}

TEST(Json, IdentityParametersRoundTrip) {
  const Multi1Params m1 = sample_multi1(5, 2, 3, nome);
  EXPECT_EQ(json(json::parse(json(m1).dump()).get<Multi1Params>()).dump(), json(m1).dump());
  const Multi2Params m2 = sample_multi2(6, {1, 2}, nome);
  EXPECT_EQ(json(json::parse(json(m2).dump()).get<Multi2Params>()).dump(), json(m2).dump());
  const BaileyParams b = sample_bailey(7, 2, nome);
  EXPECT_EQ(json::parse(json(b).dump()).get<BaileyParams>().t, b.t);
}

TEST(GeneralCoefficient, BasicReductions) {
  const ModularPair pair{cplx{0.1, 0.25}, cplx{0.15, 0.8}};
  const std::vector<cplx> zs{cplx{0.7, 0.1}};
  const std::vector<std::vector<cplx>> u{{cplx{0.2, 0.1}, cplx{-0.3, 0.05}}};
  const std::vector<std::vector<cplx>> v{{cplx{0.4, -0.1}, u[0][0] + u[0][1] - cplx{0.4, -0.1}}};
  const int zero[] = {0};
  EXPECT_EQ(general_multi_coefficient(u, v, zs, pair, zero), cplx(1.0));
  const int three[] = {3};
  cplx ref = oracle::power(zs[0], 3);
  for (int m = 0; m < 3; ++m) {
    for (const cplx x : u[0]) ref *= oracle::elliptic_number(x + static_cast<double>(m), pair.sigma, pair.tau);
    for (const cplx x : v[0]) ref /= oracle::elliptic_number(x + static_cast<double>(m), pair.sigma, pair.tau);
  }
  EXPECT_LT(oracle::rel(general_multi_coefficient(u, v, zs, pair, three), ref), 1e-10);

  const std::vector<std::vector<cplx>> bad{{cplx{0.4, -0.1}, cplx{0.1, 0.0}}};
  EXPECT_THROW(general_multi_coefficient(u, bad, zs, pair, three), domain_error);
}

TEST(GeneralCoefficient, SymmetricInTheIndices) {
  const ModularPair pair{cplx{0.1, 0.25}, cplx{0.15, 0.8}};
  // balance: (u1 - v1) + (u2 - v2) = 0 with C(1,0) = C(1,1) = 1
  const std::vector<std::vector<cplx>> u{{cplx{0.2, 0.1}}, {cplx{-0.3, 0.2}}};
  const std::vector<std::vector<cplx>> v{{cplx{0.35, -0.1}}, {u[0][0] + u[1][0] - cplx{0.35, -0.1}}};
  const std::vector<cplx> zs{cplx{0.6, 0.2}, cplx{0.6, 0.2}};
  const int a[] = {1, 3};
  const int b[] = {3, 1};
  EXPECT_LT(oracle::rel(general_multi_coefficient(u, v, zs, pair, a), general_multi_coefficient(u, v, zs, pair, b)),
            1e-13);
  const int neg[] = {-1, 2};
  EXPECT_THROW(general_multi_coefficient(u, v, zs, pair, neg), domain_error);
}
