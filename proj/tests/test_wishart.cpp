// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include "pulsecomp/posterior.hpp"
#include "pulsecomp/wishart.hpp"
#include "test_support.hpp"

#include <cmath>
#include <vector>

using namespace pulsecomp;

TEST_CASE("multivariate gamma values") {
  // p = 1 reduces to the ordinary gamma function
  REQUIRE(std::abs(multivariate_gamma(1, 0.5) - std::sqrt(kPi)) < 1e-12);
  for (double s = 0.25; s <= 10.0; s += 0.125) {
    REQUIRE(std::abs(multivariate_gamma(1, s) - std::tgamma(s)) <
            1e-12 * std::tgamma(s));
  }
  // direct evaluation: Gamma_2(2) = pi^{1/2} Gamma(2) Gamma(1.5) = pi / 2
  const double oracle = std::sqrt(kPi) * std::tgamma(2.0) * std::tgamma(1.5);
  REQUIRE(std::abs(oracle - 0.5 * kPi) < 1e-14);
  REQUIRE(std::abs(multivariate_gamma(2, 2.0) - 0.5 * kPi) < 1e-12);
  REQUIRE(std::abs(multivariate_gamma(2, 2.0) - 1.57080) < 1e-5);

  REQUIRE_THROWS_AS(multivariate_gamma(2, 0.5), DomainError);
}

TEST_CASE("params validation") {
  REQUIRE_THROWS_AS(InverseWishartParams::scalar(-1.0, 3.0), DomainError);
  REQUIRE_THROWS_AS(InverseWishartParams::scalar(1.0, 0.0), DomainError);
  RMatrix asym(2, 2);
  asym << 1.0, 0.5, -0.5, 1.0;
  REQUIRE_THROWS_AS(InverseWishartParams(asym, 5.0), DomainError);
  RMatrix indef(2, 2);
  indef << 1.0, 2.0, 2.0, 1.0;
  REQUIRE_THROWS_AS(InverseWishartParams(indef, 5.0), DomainError);
  // nu > p - 1 admits small non-integer dof
  REQUIRE(InverseWishartParams(RMatrix::Identity(2, 2), 1.25).dof() == 1.25);
}

TEST_CASE("scalar density at the reference point") {
  const InverseWishartParams params = InverseWishartParams::scalar(1.0, 3.0);
  RMatrix one(1, 1);
  one << 1.0;
  const double expected = std::log(std::exp(-0.5) / std::sqrt(2.0 * kPi));
  REQUIRE(std::abs(iw_log_density(params, one) - expected) < 1e-12);
  REQUIRE(std::abs(std::exp(iw_log_density(params, one)) - 0.24197) < 1e-5);
  REQUIRE(std::abs(iw_log_density_scalar(1.0, 3.0, 1.0) - expected) < 1e-12);
}

TEST_CASE("scalar density normalizes to one") {
  const double psi = 1.0;
  const double nu = 3.0;
  const int n = 20000;
  const RVector grid = log_spaced_grid(1e-4, 2000.0, n);
  double integral = 0.0;
  for (int i = 1; i < n; ++i) {
    const double f0 = std::exp(iw_log_density_scalar(psi, nu, grid[i - 1]));
    const double f1 = std::exp(iw_log_density_scalar(psi, nu, grid[i]));
    integral += 0.5 * (f0 + f1) * (grid[i] - grid[i - 1]);
  }
  REQUIRE(std::abs(integral - 1.0) < 1e-3);
}

TEST_CASE("density matches an independent evaluation for p = 2") {
  RMatrix psi(2, 2);
  psi << 2.0, 0.3, 0.3, 1.5;
  const double nu = 4.0;
  const InverseWishartParams params(psi, nu);
  RMatrix sigma = psi;  // evaluate at Sigma = Psi

  // independent route: explicit 2x2 determinants, inverse, trace
  const double det_psi = psi(0, 0) * psi(1, 1) - psi(0, 1) * psi(1, 0);
  const double det_sigma = det_psi;
  RMatrix sigma_inv(2, 2);
  sigma_inv << sigma(1, 1), -sigma(0, 1), -sigma(1, 0), sigma(0, 0);
  sigma_inv /= det_sigma;
  const double trace = psi(0, 0) * sigma_inv(0, 0) + psi(0, 1) * sigma_inv(1, 0) +
                       psi(1, 0) * sigma_inv(0, 1) + psi(1, 1) * sigma_inv(1, 1);
  const double gamma2 = std::sqrt(kPi) * std::tgamma(nu / 2.0) *
                        std::tgamma(nu / 2.0 - 0.5);
  const double oracle = 0.5 * nu * std::log(det_psi) -
                        0.5 * (nu + 3.0) * std::log(det_sigma) -
                        nu * std::log(2.0) - std::log(gamma2) - 0.5 * trace;

  const double value = iw_log_density(params, sigma);
  REQUIRE(std::isfinite(value));
  REQUIRE(std::abs(value - oracle) < 1e-12);
}

TEST_CASE("density rejects singular sigma") {
  const InverseWishartParams params(RMatrix::Identity(2, 2), 5.0);
  RMatrix singular = RMatrix::Zero(2, 2);
  singular(0, 0) = 1.0;
  REQUIRE_THROWS_AS(iw_log_density(params, singular), DomainError);
  RMatrix wrong(1, 1);
  wrong << 1.0;
  REQUIRE_THROWS_AS(iw_log_density(params, wrong), DimensionError);
}

TEST_CASE("scalar sampler mean") {
  RngStream rng(61, 0);
  const InverseWishartParams params = InverseWishartParams::scalar(1.0, 6.0);
  const int draws = 100000;
  std::vector<double> xs(draws);
  for (int k = 0; k < draws; ++k) xs[static_cast<std::size_t>(k)] = iw_sample(params, rng)(0, 0);
  const auto stats = test_support::mean_sd(xs);
  REQUIRE(std::abs(stats.mean - 0.25) < 3.0 * stats.se);
}

TEST_CASE("matrix sampler mean for p = 2") {
  RngStream rng(62, 0);
  const InverseWishartParams params(2.0 * RMatrix::Identity(2, 2), 5.0);
  const int draws = 100000;
  std::vector<double> e00(draws), e01(draws), e11(draws);
  for (int k = 0; k < draws; ++k) {
    const RMatrix s = iw_sample(params, rng);
    e00[static_cast<std::size_t>(k)] = s(0, 0);
    e01[static_cast<std::size_t>(k)] = s(0, 1);
    e11[static_cast<std::size_t>(k)] = s(1, 1);
  }
  const RMatrix expected = iw_mean(params);  // = I
  REQUIRE((expected - RMatrix::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-15);
  const auto s00 = test_support::mean_sd(e00);
  const auto s01 = test_support::mean_sd(e01);
  const auto s11 = test_support::mean_sd(e11);
  REQUIRE(std::abs(s00.mean - 1.0) < 3.0 * s00.se);
  REQUIRE(std::abs(s01.mean - 0.0) < 3.0 * s01.se);
  REQUIRE(std::abs(s11.mean - 1.0) < 3.0 * s11.se);
}

TEST_CASE("every draw is positive definite") {
  RngStream rng(63, 0);
  const InverseWishartParams params(RMatrix::Identity(3, 3), 3.5);
  for (int k = 0; k < 10000; ++k) {
    const RMatrix s = iw_sample(params, rng);
    Eigen::SelfAdjointEigenSolver<RMatrix> es(s, Eigen::EigenvaluesOnly);
    REQUIRE(es.eigenvalues().minCoeff() > 0.0);
  }
}

TEST_CASE("moment formulas and their domains") {
  REQUIRE(std::abs(iw_scalar_mean(1.0, 6.0) - 0.25) < 1e-15);
  REQUIRE(std::abs(iw_scalar_variance(1.0, 6.0) - 0.0625) < 1e-15);
  REQUIRE(std::abs(iw_scalar_variance(1.0, 6.0) - 2.0 / (16.0 * 2.0)) < 1e-15);
  REQUIRE_THROWS_AS(iw_scalar_variance(1.0, 4.0), DomainError);
  REQUIRE_THROWS_AS(iw_scalar_mean(1.0, 2.0), DomainError);
  REQUIRE_THROWS_AS(iw_mean(InverseWishartParams(RMatrix::Identity(2, 2), 3.0)),
                    DomainError);
}

TEST_CASE("scalar variance agrees with sampling") {
  RngStream rng(64, 0);
  const int draws = 200000;
  std::vector<double> xs(draws);
  const InverseWishartParams params = InverseWishartParams::scalar(1.0, 12.0);
  for (int k = 0; k < draws; ++k) xs[static_cast<std::size_t>(k)] = iw_sample(params, rng)(0, 0);
  const auto stats = test_support::mean_sd(xs);
  const double expected = iw_scalar_variance(1.0, 12.0);
  REQUIRE(std::abs(stats.sd * stats.sd - expected) < 0.05 * expected);
}

TEST_CASE("skewness is positive and matches the closed form") {
  for (double nu = 7.0; nu <= 70.0; nu += 3.5) {
    const double skew = iw_scalar_skewness(2.0, nu);
    REQUIRE(skew > 0.0);
    // InvGamma(alpha, beta) skewness: 4 sqrt(alpha - 2) / (alpha - 3)
    const double alpha = 0.5 * nu;
    const double reference = 4.0 * std::sqrt(alpha - 2.0) / (alpha - 3.0);
    REQUIRE(std::abs(skew - reference) < 1e-9 * reference);
  }
  REQUIRE_THROWS_AS(iw_scalar_skewness(1.0, 6.0), DomainError);
}

TEST_CASE("conjugate update") {
  const InverseWishartParams prior(RMatrix::Identity(2, 2), 5.0);
  RVector z(2);
  z << 1.0, 0.0;
  const InverseWishartParams post = conjugate_update(prior, std::vector<RVector>{z});
  RMatrix expected(2, 2);
  expected << 2.0, 0.0, 0.0, 1.0;
  REQUIRE((post.scale() - expected).cwiseAbs().maxCoeff() == 0.0);
  REQUIRE(post.dof() == 6.0);

  const InverseWishartParams unchanged = conjugate_update(prior, std::vector<RVector>{});
  REQUIRE((unchanged.scale() - prior.scale()).cwiseAbs().maxCoeff() == 0.0);
  REQUIRE(unchanged.dof() == prior.dof());

  RVector bad(3);
  bad << 1, 2, 3;
  REQUIRE_THROWS_AS(conjugate_update(prior, std::vector<RVector>{bad}), DimensionError);
}

TEST_CASE("complex observations update through |z|^2 when p = 1") {
  const InverseWishartParams prior = InverseWishartParams::scalar(1.0, 2.0);
  CVector z(1);
  z[0] = Complex(3.0, 4.0);
  const InverseWishartParams post = conjugate_update(prior, std::vector<CVector>{z});
  REQUIRE(std::abs(post.scalar_scale() - 26.0) < 1e-12);  // 1 + |3+4i|^2
  REQUIRE(post.dof() == 3.0);
}

TEST_CASE("sequential updates equal one batch update exactly") {
  RngStream rng(65, 0);
  const InverseWishartParams prior(RMatrix::Identity(3, 3), 6.0);
  std::vector<RVector> obs;
  for (int k = 0; k < 5; ++k) {
    RVector z(3);
    for (int i = 0; i < 3; ++i) z[i] = rng.normal();
    obs.push_back(z);
  }
  InverseWishartParams sequential = prior;
  for (const RVector& z : obs) {
    sequential = conjugate_update(sequential, std::vector<RVector>{z});
  }
  const InverseWishartParams batch = conjugate_update(prior, obs);
  REQUIRE((sequential.scale() - batch.scale()).cwiseAbs().maxCoeff() == 0.0);
  REQUIRE(sequential.dof() == batch.dof());
}

TEST_CASE("sampler agrees with the quadrature CDF (KS at 1%)") {
  RngStream rng(66, 0);
  const double psi = 1.0;
  const double nu = 3.0;
  const InverseWishartParams params = InverseWishartParams::scalar(psi, nu);
  const int draws = 100000;
  std::vector<double> xs(draws);
  for (int k = 0; k < draws; ++k) xs[static_cast<std::size_t>(k)] = iw_sample(params, rng)(0, 0);

  const RVector grid = log_spaced_grid(1e-5, 1e7, 20000);
  RVector cdf;
  test_support::quadrature_cdf(
      grid, [&](double x) { return iw_log_density_scalar(psi, nu, x); }, cdf);
  const double ks = test_support::ks_statistic(xs, grid, cdf);
  const double critical = 1.628 / std::sqrt(static_cast<double>(draws));
  REQUIRE(ks < critical);
}

TEST_CASE("params JSON round trip") {
  RMatrix psi(2, 2);
  psi << 2.0, 0.25, 0.25, 1.0;
  const InverseWishartParams params(psi, 4.5);
  const InverseWishartParams back = InverseWishartParams::from_json(params.to_json());
  REQUIRE(back.p() == 2);
  REQUIRE(back.dof() == 4.5);
  REQUIRE((back.scale() - params.scale()).cwiseAbs().maxCoeff() == 0.0);
  REQUIRE_THROWS_AS(InverseWishartParams::from_json(nlohmann::json{{"p", 1}}), DomainError);
}
