#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "thetahyp/factorials.hpp"

using namespace thetahyp;

namespace {

const Nome nome{cplx{0.4, 0.1}, cplx{0.2, -0.1}};

}  // namespace

TEST(ThetaFactorial, EmptyAndSingle) {
  const cplx t{0.7, 0.3};
  EXPECT_EQ(theta_factorial(t, nome, 0).value(), cplx(1.0));
  EXPECT_LT(oracle::rel(theta_factorial(t, nome, 1).value(), theta(t, nome.p)), 1e-15);
}

TEST(ThetaFactorial, ReferenceValues) {
  const cplx t{0.7, 0.3};
  EXPECT_LT(oracle::rel(theta_factorial(t, nome, 3).value(), {-0.08325825037613093454, 0.38534441224665125441}),
            1e-13);
  EXPECT_LT(oracle::rel(theta_factorial(t, nome, -2).value(), {-0.85588528692637267414, -1.07489116638635992009}),
            1e-13);
}

TEST(ThetaFactorial, NegativeIndexPole) {
  const FactorialValue f = theta_factorial(0.4, Nome{0.4, 0.2}, -2);
  EXPECT_EQ(f.pole_order, 1);
  EXPECT_EQ(f.zero_order, 0);
  EXPECT_TRUE(f.is_pole());
  EXPECT_THROW(f.value(), pole_error);
}

TEST(ThetaFactorial, ZeroBookkeeping) {
  const cplx q = nome.q;
  const FactorialValue f = theta_factorial(1.0 / (q * q), nome, 4);  // contains theta(1)
  EXPECT_EQ(f.zero_order, 1);
  EXPECT_EQ(f.value(), cplx(0.0));
  EXPECT_EQ(theta_factorial(1.0 / (q * q), nome, 2).zero_order, 0);
}

TEST(ThetaFactorial, ShiftRecurrenceAndInversion) {
  std::mt19937_64 rng(21);
  for (int draw = 0; draw < 10; ++draw) {
    const cplx t = oracle::random_point(rng, 0.4, 0.9);
    for (int n = -8; n <= 8; ++n) {
      const cplx lhs = theta_factorial(t, nome, n + 1).value();
      const cplx rhs = theta_factorial(t, nome, n).value() * theta(t * oracle::power(nome.q, n), nome.p);
      EXPECT_LT(oracle::rel(lhs, rhs), 1e-11) << "n=" << n;
      const cplx inv = theta_factorial(t, nome, n).value() *
                       theta_factorial(t * oracle::power(nome.q, n), nome, -n).value();
      EXPECT_LT(std::abs(inv - 1.0), 1e-11) << "n=" << n;
      EXPECT_LT(oracle::rel(theta_factorial(t, nome, n).value(), oracle::theta_factorial(t, nome.q, nome.p, n)),
                1e-11);
    }
  }
}

TEST(ThetaFactorialMulti, ProductOfParts) {
  EXPECT_EQ(theta_factorial_multi({}, nome, 3).value(), cplx(1.0));
  const cplx t1{0.5, 0.2}, t2{-0.3, 0.6};
  const std::vector<cplx> one{t1};
  EXPECT_EQ(theta_factorial_multi(one, nome, 3).value(), theta_factorial(t1, nome, 3).value());
  const std::vector<cplx> both{t1, t2};
  const cplx parts = theta_factorial(t1, nome, 4).value() * theta_factorial(t2, nome, 4).value();
  EXPECT_LT(oracle::rel(theta_factorial_multi(both, nome, 4).value(), parts), 1e-14);
}

TEST(EllipticFactorial, BasicCases) {
  const ModularPair pair{cplx{0.1, 0.25}, cplx{0.15, 0.8}};
  const cplx u{0.3, 0.2};
  EXPECT_EQ(elliptic_factorial(u, pair, 0).value(), cplx(1.0));
  EXPECT_LT(oracle::rel(elliptic_factorial(u, pair, -1).value(), 1.0 / theta1(u - 1.0, pair)), 1e-14);
  const FactorialValue one = elliptic_factorial(1.0, pair, -2);
  EXPECT_TRUE(one.is_pole());
}

TEST(EllipticFactorial, RatiosMatchMultiplicativeForm) {
  const ModularPair pair{cplx{0.1, 0.25}, cplx{0.15, 0.8}};
  const Nome n = nome_from_modular(pair);
  std::mt19937_64 rng(22);
  std::uniform_real_distribution<double> U(-0.5, 0.5);
  for (int draw = 0; draw < 10; ++draw) {
    const cplx u{U(rng), U(rng)}, v{U(rng), U(rng)};
    for (int k = -4; k <= 5; ++k) {
      const cplx additive = elliptic_factorial(u, pair, k).value() / elliptic_factorial(v, pair, k).value();
      const cplx mult = theta_factorial(qpow(pair, u), n, k).value() / theta_factorial(qpow(pair, v), n, k).value();
      // [u]_k / [v]_k = q^{-k(u-v)/2} theta(q^u)_k / theta(q^v)_k
      EXPECT_LT(oracle::rel(additive, qpow(pair, -0.5 * k * (u - v)) * mult), 1e-10) << "k=" << k;
    }
  }
}

TEST(FactorialValue, IndeterminateIsRejected) {
  FactorialValue f;
  f.multiply_factor(1.0, true);
  f.divide_factor(1.0, true);
  EXPECT_THROW(f.value(), pole_error);
}
