// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "pulsecomp/complex_gaussian.hpp"
#include "pulsecomp/posterior.hpp"
#include "pulsecomp/pulse_codes.hpp"
#include "pulsecomp/scatter_model.hpp"
#include "pulsecomp/wishart.hpp"

namespace pulsecomp {

namespace detail {

inline CMatrix random_unitary(Eigen::Index n, RngStream& rng) {
  CMatrix m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) m.col(i) = sample_white_noise(n, rng);
  return Eigen::HouseholderQR<CMatrix>(m).householderQ();
}

inline PulseCode random_complex_code(Eigen::Index d, RngStream& rng) {
  CVector s = sample_white_noise(d, rng);
  s /= s.norm();
  return PulseCode(std::move(s), "random");
}

}  // namespace detail

// Fast, deterministic run of the library's cross-module identities.
// Returns (check name, passed) pairs; every entry should pass.
inline std::vector<std::pair<std::string, bool>> selftest_checks(std::uint64_t seed) {
  std::vector<std::pair<std::string, bool>> results;
  const auto record = [&results](const std::string& name, bool ok) {
    results.emplace_back(name, ok);
  };

  {  // Parseval under the library DFT convention
    RngStream rng(seed, 0x53454C46ULL);
    const PulseCode code = detail::random_complex_code(16, rng);
    const Spectrum sp = spectrum(code);
    const double lhs = code.samples().squaredNorm();
    const double rhs = sp.moduli.squaredNorm() / static_cast<double>(code.d());
    record("parseval", std::abs(lhs - rhs) <= 1e-12);
  }

  {  // A = F' diag(eps_hat) F / d
    RngStream rng(seed, 0x53454C47ULL);
    const PulseCode code = detail::random_complex_code(16, rng);
    const CMatrix f = dft_matrix(code.d());
    const CMatrix lhs = circulant_operator(code);
    const CMatrix rhs = f.adjoint() * dft_forward(code.samples()).asDiagonal() * f /
                        static_cast<double>(code.d());
    record("circulant_diagonalization", (lhs - rhs).cwiseAbs().maxCoeff() <= 1e-10);
  }

  {  // signal covariance depends on the code only through spectral moduli
    RngStream rng(seed, 0x53454C48ULL);
    const PulseCode code = zero_pad(barker(13), 16);
    const PulseCode twin = random_phase_twin(code, rng);
    const VarianceField field = VarianceField::constant(1.7);
    const Temperature t(0.4);
    const double gap = (signal_covariance(code, field, t).matrix() -
                        signal_covariance(twin, field, t).matrix())
                           .cwiseAbs()
                           .maxCoeff();
    record("spectral_twin_covariance", gap <= 1e-10);
  }

  {  // lag profile equals the covariance, diagonal and partition fields
    const PulseCode code = boxcar(8, 3);
    const Temperature t(0.25);
    RVector sigma2(4);
    sigma2 << 0.5, 1.5, 0.25, 2.0;
    const VarianceField part = VarianceField::partition(sigma2, smooth_partition(8, 4));
    RVector values(8);
    values << 1, 0.5, 0, 2, 1, 1, 0.25, 0.75;
    const VarianceField pw = VarianceField::pointwise(values);
    const double gap1 = (lag_profile(code, part, t).matrix() -
                         signal_covariance(code, part, t).matrix())
                            .cwiseAbs()
                            .maxCoeff();
    const double gap2 = (lag_profile(code, pw, t).matrix() -
                         signal_covariance(code, pw, t).matrix())
                            .cwiseAbs()
                            .maxCoeff();
    record("lag_profile_identity", gap1 <= 1e-12 && gap2 <= 1e-12);
  }

  {  // quadratic form matches phi' Sigma phi
    RngStream rng(seed, 0x53454C49ULL);
    bool ok = true;
    for (int k = 0; k < 10; ++k) {
      const PulseCode code = detail::random_complex_code(12, rng);
      const CVector phi = sample_white_noise(12, rng);
      const double s0 = 0.2 + 2.0 * rng.uniform();
      const Temperature t(rng.uniform());
      const double lhs = quad_form_constant(code, phi, s0, t);
      const CMatrix sigma = signal_covariance(code, VarianceField::constant(s0), t).matrix();
      const double rhs = (phi.adjoint() * sigma * phi)(0, 0).real();
      ok = ok && std::abs(lhs - rhs) <= 1e-10 * std::max(1.0, std::abs(rhs));
    }
    record("quad_form_identity", ok);
  }

  {  // partition of unity normalization and translations
    const PartitionOfUnity pou = smooth_partition(32, 8);
    double worst = 0.0;
    for (Eigen::Index t = 0; t < pou.lattice_size(); ++t) {
      worst = std::max(worst, std::abs(pou.windows().col(t).squaredNorm() - 1.0));
    }
    record("partition_normalization", worst <= 1e-12);
  }

  {  // Gamma_1 reduces to Gamma
    bool ok = true;
    for (double s = 0.25; s <= 10.0; s += 0.25) {
      const double a = multivariate_gamma(1, s);
      const double b = std::tgamma(s);
      ok = ok && std::abs(a - b) <= 1e-12 * std::abs(b);
    }
    record("multivariate_gamma_reduction", ok);
  }

  {  // one-at-a-time updates equal the batch update exactly
    const InverseWishartParams prior(RMatrix::Identity(2, 2), 5.0);
    std::vector<RVector> obs;
    RVector a(2), b(2), c(2);
    a << 1.0, -0.5;
    b << 0.25, 2.0;
    c << -1.5, 0.75;
    obs = {a, b, c};
    InverseWishartParams one = prior;
    for (const RVector& z : obs) one = conjugate_update(one, std::vector<RVector>{z});
    const InverseWishartParams batch = conjugate_update(prior, obs);
    record("sequential_batch_update",
           (one.scale() - batch.scale()).cwiseAbs().maxCoeff() == 0.0 &&
               one.dof() == batch.dof());
  }

  {  // grid posterior reproduces the conjugate posterior
    RngStream rng(seed, 0x53454C4AULL);
    const double psi = 1.3;
    const double nu = 3.2;
    const Eigen::Index d = 6;
    RVector z(d);
    for (Eigen::Index i = 0; i < d; ++i) z[i] = 1.2 * rng.normal();
    const InverseWishartParams post =
        constant_variance_posterior(psi, nu, ScalarModelSpec{Temperature(0.5), 1.0, d}, z);
    const ConstantFieldLikelihood lik(dirac(d), Temperature(0.5));
    const GridPosterior gp =
        detail::evaluate_constant_posterior(lik, lik.spectral_sq(z), psi, nu, 2000);
    const double am = iw_scalar_mean(post.scalar_scale(), post.dof());
    const double av = iw_scalar_variance(post.scalar_scale(), post.dof());
    record("conjugacy_grid_oracle", std::abs(gp.mean - am) <= 1e-4 * am &&
                                        std::abs(gp.variance - av) <= 1e-4 * av);
  }

  {  // white noise moments
    RngStream rng(seed, 0x53454C4BULL);
    const Eigen::Index n = 4;
    const int draws = 20000;
    CVector mean = CVector::Zero(n);
    CMatrix cov = CMatrix::Zero(n, n);
    CMatrix pseudo = CMatrix::Zero(n, n);
    for (int k = 0; k < draws; ++k) {
      const CVector z = sample_white_noise(n, rng);
      mean += z;
      cov += z * z.adjoint();
      pseudo += z * z.transpose();
    }
    mean /= draws;
    cov /= draws;
    pseudo /= draws;
    const double m = mean.cwiseAbs().maxCoeff();
    const double c = (cov - CMatrix::Identity(n, n)).cwiseAbs().maxCoeff();
    const double p = pseudo.cwiseAbs().maxCoeff();
    record("white_noise_moments", m < 0.05 && c < 0.05 && p < 0.05);
  }

  {  // inverse Wishart sampler hits the scalar mean
    RngStream rng(seed, 0x53454C4CULL);
    const InverseWishartParams params = InverseWishartParams::scalar(1.0, 6.0);
    const int draws = 20000;
    double acc = 0.0;
    double sq = 0.0;
    for (int k = 0; k < draws; ++k) {
      const double x = iw_sample(params, rng)(0, 0);
      acc += x;
      sq += x * x;
    }
    const double mean = acc / draws;
    const double sd = std::sqrt(std::max(sq / draws - mean * mean, 0.0));
    record("iw_sampler_mean", std::abs(mean - 0.25) < 4.0 * sd / std::sqrt(draws));
  }

  {  // pushing white noise through a unitary leaves the density invariant
    RngStream rng(seed, 0x53454C4DULL);
    bool ok = true;
    for (Eigen::Index n = 1; n <= 4; ++n) {
      const CMatrix u = detail::random_unitary(n, rng);
      const ComplexGaussianLaw white = ComplexGaussianLaw::white_noise(n);
      const ComplexGaussianLaw pushed = affine_push(CVector::Zero(n), u, white);
      const CVector z = 2.0 * sample_white_noise(n, rng);
      ok = ok && std::abs(log_density(pushed, z) - log_density(white, u.adjoint() * z)) <= 1e-10;
    }
    record("unitary_density_invariance", ok);
  }

  return results;
}

}  // namespace pulsecomp
