// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <utility>

#include "pulsecomp/linalg.hpp"
#include "pulsecomp/rng.hpp"

namespace pulsecomp {

// Circular complex Gaussian vectors.
//
// Conventions, fixed for the whole library:
//  * x' means the conjugate transpose, so x'y = sum conj(x_j) y_j;
//  * the covariance of a law is E[W W'] with W = X - E[X]. Discrete complex
//    white noise, entries (g1 + i g2)/sqrt(2) with g1, g2 iid N(0,1), has
//    identity covariance under this convention;
//  * characteristic function
//      J(phi) = exp(i Re(mean' phi) - (1/4) phi' Cov phi),
//    which evaluates to exp(-|phi|^2 / 4) for white noise;
//  * density, when Cov is invertible,
//      pi^{-n} det(Cov)^{-1} exp(-(z - mean)' Cov^{-1} (z - mean)).
//
// Pseudo-covariances E[W W^T] are identically zero for every law built here;
// non-circular complex Gaussians are out of scope.
class ComplexGaussianLaw {
 public:
  ComplexGaussianLaw(CVector mean, HermitianMatrix covariance)
      : mean_(std::move(mean)), covariance_(std::move(covariance)) {
    if (mean_.size() != covariance_.dim()) {
      throw DimensionError("mean and covariance dimensions disagree");
    }
    if (!covariance_.is_positive_semidefinite()) {
      throw DomainError("covariance must be positive semidefinite");
    }
  }

  static ComplexGaussianLaw white_noise(Eigen::Index dim) {
    if (dim < 1) throw DimensionError("invalid dimension: dim must be >= 1");
    return ComplexGaussianLaw(CVector::Zero(dim), HermitianMatrix::identity(dim));
  }

  Eigen::Index dim() const { return mean_.size(); }
  const CVector& mean() const { return mean_; }
  const HermitianMatrix& covariance() const { return covariance_; }

 private:
  CVector mean_;
  HermitianMatrix covariance_;
};

// iid circular complex white noise; E z_j = 0, E |z_j|^2 = 1, E z_j^2 = 0.
inline CVector sample_white_noise(Eigen::Index dim, RngStream& rng) {
  if (dim < 1) throw DimensionError("invalid dimension: dim must be >= 1");
  CVector z(dim);
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  for (Eigen::Index j = 0; j < dim; ++j) {
    const double re = rng.normal();
    const double im = rng.normal();
    z[j] = Complex(re * inv_sqrt2, im * inv_sqrt2);
  }
  return z;
}

// Law of mean + factor * X for X distributed per `law`:
// mean' = mean + factor * law.mean, Cov' = factor * Cov * factor'.
inline ComplexGaussianLaw affine_push(const CVector& mean, const CMatrix& factor,
                                      const ComplexGaussianLaw& law) {
  if (factor.cols() != law.dim()) {
    throw DimensionError("factor columns must match law dimension");
  }
  if (mean.size() != factor.rows()) {
    throw DimensionError("mean size must match factor rows");
  }
  CVector out_mean = mean + factor * law.mean();
  CMatrix out_cov = factor * law.covariance().matrix() * factor.adjoint();
  return ComplexGaussianLaw(std::move(out_mean), HermitianMatrix(out_cov));
}

// J(phi) = exp(i Re(mean' phi) - (1/4) phi' Cov phi).
inline Complex characteristic_function(const ComplexGaussianLaw& law,
                                       const CVector& phi) {
  if (phi.size() != law.dim()) {
    throw DimensionError("phi dimension must match law dimension");
  }
  const double quad =
      (phi.adjoint() * law.covariance().matrix() * phi)(0, 0).real();
  const double shift = (law.mean().adjoint() * phi)(0, 0).real();
  return std::exp(Complex(-0.25 * quad, shift));
}

// log of the circularly-symmetric normal density
//   pi^{-n} det(Cov)^{-1} exp(-(z - mean)' Cov^{-1} (z - mean)).
// Requires min eigenvalue > 1e-12 * max eigenvalue, else the law is
// supported on a lower-dimensional subspace and has no density.
inline double log_density(const ComplexGaussianLaw& law, const CVector& z) {
  if (z.size() != law.dim()) {
    throw DimensionError("z dimension must match law dimension");
  }
  Eigen::SelfAdjointEigenSolver<CMatrix> es(law.covariance().matrix());
  if (es.info() != Eigen::Success) throw NumericError("eigensolver failed");
  const RVector ev = es.eigenvalues();
  const double lmax = ev.maxCoeff();
  if (!(lmax > 0.0) || ev.minCoeff() <= 1e-12 * lmax) {
    throw SingularLawError("singular law: covariance is not strictly positive definite");
  }
  const Eigen::Index n = law.dim();
  const CVector y = es.eigenvectors().adjoint() * (z - law.mean());
  double log_det = 0.0;
  double quad = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    log_det += std::log(ev[i]);
    quad += std::norm(y[i]) / ev[i];
  }
  return -static_cast<double>(n) * std::log(kPi) - log_det - quad;
}

// Sampler for an arbitrary law; the covariance square root is computed once.
class LawSampler {
 public:
  explicit LawSampler(ComplexGaussianLaw law)
      : law_(std::move(law)), sqrt_cov_(law_.covariance().psd_sqrt()) {}

  const ComplexGaussianLaw& law() const { return law_; }

  CVector draw(RngStream& rng) const {
    return law_.mean() + sqrt_cov_ * sample_white_noise(law_.dim(), rng);
  }

 private:
  ComplexGaussianLaw law_;
  CMatrix sqrt_cov_;
};

}  // namespace pulsecomp
