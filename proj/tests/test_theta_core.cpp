#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "thetahyp/theta_core.hpp"

using namespace thetahyp;

namespace {

double rel(cplx a, cplx b) { return oracle::rel(a, b); }

}  // namespace

TEST(NomeFromModular, InvertsTheExponential) {
  const ModularPair pair{cplx{0.0, std::log(2.0) / (2.0 * pi)}, cplx{0.0, 1.0}};
  EXPECT_NEAR(std::abs(nome_from_modular(pair).q - 0.5), 0.0, 1e-15);
}

TEST(NomeFromModular, PurelyImaginaryPair) {
  const Nome n = nome_from_modular({cplx{0.0, 0.3}, cplx{0.0, 0.5}});
  EXPECT_LT(rel(n.q, 0.15183580198064889747), 1e-14);
  EXPECT_LT(rel(n.p, 0.04321391826377224977), 1e-14);
}

TEST(NomeFromModular, RejectsRealTau) {
  EXPECT_THROW(nome_from_modular({cplx{0.0, 0.3}, cplx{0.4, 0.0}}), domain_error);
  EXPECT_THROW(nome_from_modular({cplx{0.1, 0.0}, cplx{0.0, 0.4}}), domain_error);
}

TEST(PPochhammer, FiniteAndNegativeIndex) {
  EXPECT_EQ(p_pochhammer(cplx{0.3, 0.2}, 0.5, 0), cplx(1.0));
  EXPECT_NEAR(std::abs(p_pochhammer(0.3, 0.5, 2) - 0.595), 0.0, 1e-15);
  const cplx a{0.3, 0.4}, p{0.5, -0.2};
  EXPECT_LT(rel(p_pochhammer(a, p, -1), 1.0 / (1.0 - a / p)), 1e-14);
  EXPECT_THROW(p_pochhammer(0.5, 0.5, -1), pole_error);
}

TEST(PPochhammer, InfiniteProductMatchesLongProduct) {
  const cplx a{0.7, -0.3}, p{0.4, 0.3};
  cplx ref = 1.0;
  for (int k = 0; k < 300; ++k) ref *= 1.0 - a * oracle::power(p, k);
  EXPECT_LT(rel(p_pochhammer_inf(a, p), ref), 1e-14);
}

TEST(Theta, ReferenceValues) {
  EXPECT_EQ(theta(0.5, 0.0), cplx(0.5));
  EXPECT_EQ(theta(1.0, cplx{0.3, 0.1}), cplx(0.0));
  const cplx p{0.3, 0.1};
  EXPECT_EQ(theta(1.0 / (p * p), p), cplx(0.0));
  EXPECT_LT(rel(theta({0.3, 0.1}, 0.2), {0.23503793046304369455, 0.08607651068658582084}), 1e-14);
  EXPECT_THROW(theta(0.0, 0.2), domain_error);
}

TEST(Theta, FunctionalEquationsAtSpecPoint) {
  const cplx z{0.3, 0.1};
  const cplx p = 0.2;
  EXPECT_LT(rel(theta(p * z, p), -theta(z, p) / z), 1e-12);
  EXPECT_LT(rel(theta(p * z, p), {-0.79119030207571692708, -0.02319160159671374665}), 1e-13);
}

TEST(Theta, FunctionalEquationsRandom) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 200; ++i) {
    const cplx z = oracle::random_point(rng, 0.3, 2.0);
    const cplx p = oracle::random_point(rng, 0.05, 0.7);
    const cplx t = theta(z, p);
    EXPECT_LT(rel(theta(p * z, p), -t / z), 1e-11);
    EXPECT_LT(rel(theta(1.0 / z, p), -t / z), 1e-11);
    EXPECT_LT(rel(theta(z / p, p), -(z / p) * t), 1e-11);
    EXPECT_LT(rel(t, oracle::theta(z, p)), 1e-12);
  }
}

TEST(Theta, DegeneratesToOneMinusZ) {
  std::mt19937_64 rng(12);
  for (int i = 0; i < 20; ++i) {
    const cplx z = oracle::random_point(rng, 0.1, 3.0);
    EXPECT_EQ(theta(z, 0.0), 1.0 - z);
  }
}

TEST(Theta1, ZeroAndOddness) {
  const ModularPair pair{cplx{0.1, 0.25}, cplx{0.15, 0.8}};
  EXPECT_EQ(std::abs(theta1(0.0, pair)), 0.0);
  const cplx u{0.2, 0.1};
  EXPECT_LT(rel(theta1(-u, pair), -theta1(u, pair)), 1e-14);
}

TEST(Theta1, SeriesAgainstProductAtSpecPoint) {
  const ModularPair pair{cplx{0.0, 0.21}, cplx{0.0, 0.43}};
  const cplx s = theta1(0.37, pair, Theta1Method::series);
  const cplx pr = theta1(0.37, pair, Theta1Method::product);
  EXPECT_LT(rel(s, pr), 1e-11);
  EXPECT_LT(std::abs(s - cplx{0.0, 0.27588634912374484579}), 1e-14);
}

TEST(Theta1, MatchesBilateralSeriesOracle) {
  const ModularPair pair{cplx{0.1, 0.25}, cplx{0.15, 0.8}};
  EXPECT_LT(rel(theta1({0.2, 0.1}, pair), {-0.03689145501109695070, 0.19717905658042152184}), 1e-13);
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> U(-1.0, 1.0), V(0.3, 1.5);
  for (int i = 0; i < 50; ++i) {
    const ModularPair pr{cplx{U(rng), V(rng) * 0.5}, cplx{U(rng), V(rng)}};
    const cplx u{U(rng), U(rng)};
    const cplx ref = oracle::elliptic_number(u, pr.sigma, pr.tau);
    EXPECT_LT(rel(theta1(u, pr), ref), 1e-10);
    EXPECT_LT(rel(theta1(u, pr, Theta1Method::product), ref), 1e-10);
  }
}

TEST(Theta1, Quasiperiodicity) {
  std::mt19937_64 rng(14);
  std::uniform_real_distribution<double> U(-0.5, 0.5), V(0.3, 1.2);
  for (int i = 0; i < 100; ++i) {
    const ModularPair pair{cplx{U(rng), 0.1 + V(rng) / 4}, cplx{U(rng), V(rng)}};
    const cplx u{U(rng), U(rng)};
    const cplx base = theta1(u, pair);
    EXPECT_LT(rel(theta1(u + 1.0 / pair.sigma, pair), -base), 1e-10);
    const cplx mult = -std::exp(-pi * imag_unit * pair.tau - 2.0 * pi * imag_unit * pair.sigma * u);
    EXPECT_LT(rel(theta1(u + pair.tau / pair.sigma, pair), mult * base), 1e-10);
  }
}

TEST(Theta1, ModularLaws) {
  std::mt19937_64 rng(15);
  std::uniform_real_distribution<double> U(-0.5, 0.5), V(0.4, 1.2);
  for (int i = 0; i < 50; ++i) {
    const ModularPair pair{cplx{U(rng), 0.1 + V(rng) / 4}, cplx{U(rng), V(rng)}};
    const cplx u{U(rng), U(rng)};
    const cplx base = theta1(u, pair);
    const ModularPair t = apply_modular(pair, 1, 1, 0, 1);
    EXPECT_LT(rel(theta1(u, t), std::exp(imag_unit * pi / 4.0) * base), 1e-9);
    const ModularPair s = apply_modular(pair, 0, -1, 1, 0);
    const cplx factor = -imag_unit * modular_sqrt(pair.tau) *
                        std::exp(imag_unit * pi * pair.sigma * pair.sigma * u * u / pair.tau);
    EXPECT_LT(rel(theta1(u, s), factor * base), 1e-9);
  }
}

TEST(Theta1, SeriesFailsToConvergeWithTinyBudget) {
  PrecisionPolicy tight;
  tight.max_terms = 1;
  EXPECT_THROW(theta1({0.3, 0.2}, {cplx{0.1, 0.2}, cplx{0.0, 0.05}}, Theta1Method::series, tight),
               convergence_error);
}

TEST(ApplyModular, GeneratorsAndIdentity) {
  const ModularPair pair{cplx{0.2, 0.3}, cplx{0.1, 0.9}};
  const ModularPair t = apply_modular(pair, 1, 1, 0, 1);
  EXPECT_EQ(t.sigma, pair.sigma);
  EXPECT_LT(std::abs(t.tau - (pair.tau + 1.0)), 1e-15);
  const ModularPair s = apply_modular(pair, 0, -1, 1, 0);
  EXPECT_LT(rel(s.sigma, pair.sigma / pair.tau), 1e-15);
  EXPECT_LT(rel(s.tau, -1.0 / pair.tau), 1e-15);
  EXPECT_GT(s.tau.imag(), 0.0);
  const ModularPair id = apply_modular(pair, 1, 0, 0, 1);
  EXPECT_EQ(id.sigma, pair.sigma);
  EXPECT_EQ(id.tau, pair.tau);
  EXPECT_THROW(apply_modular(pair, 1, 1, 1, 1), determinant_error);
}

TEST(ModularSqrt, PositiveRealPart) {
  EXPECT_GT(modular_sqrt({-2.0, 0.3}).real(), 0.0);
  EXPECT_GT(modular_sqrt({0.5, 1.0}).real(), 0.0);
  EXPECT_THROW(modular_sqrt({0.0, -1.0}), domain_error);
}

TEST(PrecisionPolicy, Validation) {
  EXPECT_NO_THROW(validate(PrecisionPolicy{}));
  EXPECT_THROW(validate(PrecisionPolicy{1e-3, 1e-16, 512}), domain_error);
  EXPECT_THROW(validate(PrecisionPolicy{1e-16, 1e-16, 10}), domain_error);
}

TEST(Lattice, DetectsZerosAndDistance) {
  const cplx p{0.3, 0.2};
  int m = 0;
  EXPECT_TRUE(on_theta_lattice(oracle::power(p, -3), p, lattice_rel_tol, &m));
  EXPECT_EQ(m, 3);
  EXPECT_FALSE(is_theta_zero(0.9, p));
  EXPECT_LT(lattice_distance(oracle::power(p, 2) * (1.0 + 1e-8), p), 1e-7);
  EXPECT_TRUE(is_theta1_zero(1.0 / cplx{0.1, 0.3}, {cplx{0.1, 0.3}, cplx{0.0, 1.0}}));
}
