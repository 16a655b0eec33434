// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "pulsecomp/linalg.hpp"
#include "pulsecomp/rng.hpp"

namespace pulsecomp {

// Inverse Wishart distribution W^{-1}(Psi, nu) over p x p real symmetric
// positive definite matrices,
//   pi(S) = |Psi|^{nu/2} |S|^{-(nu+p+1)/2} / (2^{nu p/2} Gamma_p(nu/2))
//           * exp(-Tr(Psi S^{-1}) / 2),
// with real nu > p - 1. The scalar case p = 1 coincides with the inverse
// gamma law InvGamma(nu/2, psi/2), which carries every closed-form posterior
// in this library. Complex observations enter conjugate updates through the
// real part of their Hermitian outer product (for p = 1 that is |z|^2).
class InverseWishartParams {
 public:
  InverseWishartParams(RMatrix scale, double dof)
      : scale_(std::move(scale)), dof_(dof) {
    if (scale_.rows() != scale_.cols() || scale_.rows() < 1) {
      throw DimensionError("scale matrix must be square and non-empty");
    }
    const double mag = std::max(1.0, scale_.cwiseAbs().maxCoeff());
    if ((scale_ - scale_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * mag) {
      throw DomainError("scale matrix must be symmetric");
    }
    scale_ = 0.5 * (scale_ + scale_.transpose()).eval();
    Eigen::LLT<RMatrix> llt(scale_);
    if (llt.info() != Eigen::Success) {
      throw DomainError("scale matrix must be positive definite");
    }
    if (!(dof_ > static_cast<double>(p()) - 1.0)) {
      throw DomainError("degrees of freedom must exceed p - 1");
    }
  }

  static InverseWishartParams scalar(double psi, double nu) {
    RMatrix m(1, 1);
    m(0, 0) = psi;
    return InverseWishartParams(std::move(m), nu);
  }

  int p() const { return static_cast<int>(scale_.rows()); }
  const RMatrix& scale() const { return scale_; }
  double dof() const { return dof_; }
  double scalar_scale() const {
    if (p() != 1) throw DimensionError("scalar_scale needs p = 1");
    return scale_(0, 0);
  }

  // {"p": int, "nu": f64, "psi": [[f64...]...]}
  nlohmann::json to_json() const {
    std::vector<std::vector<double>> psi(static_cast<std::size_t>(p()));
    for (int i = 0; i < p(); ++i) {
      psi[static_cast<std::size_t>(i)].resize(static_cast<std::size_t>(p()));
      for (int j = 0; j < p(); ++j) {
        psi[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = scale_(i, j);
      }
    }
    return nlohmann::json{{"p", p()}, {"nu", dof_}, {"psi", psi}};
  }

  static InverseWishartParams from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("p") || !j.contains("nu") || !j.contains("psi")) {
      throw DomainError("inverse Wishart JSON needs p, nu, psi");
    }
    const int p = j.at("p").get<int>();
    const auto rows = j.at("psi").get<std::vector<std::vector<double>>>();
    if (p < 1 || static_cast<int>(rows.size()) != p) {
      throw DimensionError("psi must be a p x p array");
    }
    RMatrix m(p, p);
    for (int i = 0; i < p; ++i) {
      if (static_cast<int>(rows[static_cast<std::size_t>(i)].size()) != p) {
        throw DimensionError("psi must be a p x p array");
      }
      for (int k = 0; k < p; ++k) {
        m(i, k) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
      }
    }
    return InverseWishartParams(std::move(m), j.at("nu").get<double>());
  }

 private:
  RMatrix scale_;
  double dof_;
};

// log Gamma_p(s) = (p(p-1)/4) log pi + sum_{j=1}^{p} lgamma(s - (j-1)/2),
// defined for s > (p - 1)/2.
inline double log_multivariate_gamma(int p, double s) {
  if (p < 1) throw DimensionError("p must be >= 1");
  if (!(s > 0.5 * (static_cast<double>(p) - 1.0))) {
    throw DomainError("multivariate gamma needs s > (p - 1)/2");
  }
  double acc = 0.25 * static_cast<double>(p) * (static_cast<double>(p) - 1.0) *
               std::log(kPi);
  for (int j = 1; j <= p; ++j) {
    acc += std::lgamma(s - 0.5 * (static_cast<double>(j) - 1.0));
  }
  return acc;
}

inline double multivariate_gamma(int p, double s) {
  return std::exp(log_multivariate_gamma(p, s));
}

// Log density of W^{-1}(Psi, nu) at a positive definite matrix.
inline double iw_log_density(const InverseWishartParams& params, const RMatrix& sigma) {
  const int p = params.p();
  if (sigma.rows() != p || sigma.cols() != p) {
    throw DimensionError("sigma must be p x p");
  }
  Eigen::LLT<RMatrix> llt_sigma(sigma);
  if (llt_sigma.info() != Eigen::Success) {
    throw DomainError("sigma must be positive definite");
  }
  Eigen::LLT<RMatrix> llt_psi(params.scale());
  double log_det_sigma = 0.0;
  double log_det_psi = 0.0;
  for (int i = 0; i < p; ++i) {
    log_det_sigma += 2.0 * std::log(RMatrix(llt_sigma.matrixL())(i, i));
    log_det_psi += 2.0 * std::log(RMatrix(llt_psi.matrixL())(i, i));
  }
  const double nu = params.dof();
  const double trace_term = llt_sigma.solve(params.scale()).trace();
  return 0.5 * nu * log_det_psi -
         0.5 * (nu + static_cast<double>(p) + 1.0) * log_det_sigma -
         0.5 * nu * static_cast<double>(p) * std::log(2.0) -
         log_multivariate_gamma(p, 0.5 * nu) - 0.5 * trace_term;
}

// Fast scalar path, log density of InvGamma(nu/2, psi/2) at x > 0.
inline double iw_log_density_scalar(double psi, double nu, double x) {
  if (!(psi > 0.0) || !(nu > 0.0)) throw DomainError("need psi > 0 and nu > 0");
  if (!(x > 0.0)) throw DomainError("scalar inverse Wishart density needs x > 0");
  return 0.5 * nu * std::log(psi) - 0.5 * (nu + 2.0) * std::log(x) -
         0.5 * nu * std::log(2.0) - std::lgamma(0.5 * nu) - 0.5 * psi / x;
}

// Draw from W^{-1}(Psi, nu) by the Bartlett decomposition: sample
// W ~ Wishart(Psi^{-1}, nu) as (L B)(L B)' with L = chol(Psi^{-1}),
// B lower triangular, B_ii^2 ~ chi^2_{nu-i+1}, then invert.
inline RMatrix iw_sample(const InverseWishartParams& params, RngStream& rng) {
  const int p = params.p();
  Eigen::LLT<RMatrix> llt_psi(params.scale());
  const RMatrix psi_inv = llt_psi.solve(RMatrix::Identity(p, p));
  Eigen::LLT<RMatrix> llt_inv(0.5 * (psi_inv + psi_inv.transpose()));
  if (llt_inv.info() != Eigen::Success) {
    throw NumericError("Cholesky of the inverted scale failed");
  }
  const RMatrix l = llt_inv.matrixL();

  RMatrix b = RMatrix::Zero(p, p);
  for (int i = 0; i < p; ++i) {
    b(i, i) = std::sqrt(rng.chi_squared(params.dof() - static_cast<double>(i)));
    for (int j = 0; j < i; ++j) b(i, j) = rng.normal();
  }
  const RMatrix lb = l * b;
  const RMatrix w = lb * lb.transpose();
  Eigen::LLT<RMatrix> llt_w(w);
  if (llt_w.info() != Eigen::Success) {
    throw NumericError("sampled Wishart matrix is not positive definite");
  }
  RMatrix sigma = llt_w.solve(RMatrix::Identity(p, p));
  return 0.5 * (sigma + sigma.transpose());
}

// Mean Psi / (nu - p - 1), defined for nu > p + 1.
inline RMatrix iw_mean(const InverseWishartParams& params) {
  const double denom = params.dof() - static_cast<double>(params.p()) - 1.0;
  if (!(denom > 0.0)) throw DomainError("undefined moment: mean needs nu > p + 1");
  return params.scale() / denom;
}

inline double iw_scalar_mean(double psi, double nu) {
  if (!(nu > 2.0)) throw DomainError("undefined moment: scalar mean needs nu > 2");
  return psi / (nu - 2.0);
}

// Var = 2 psi^2 / ((nu-2)^2 (nu-4)), defined for nu > 4.
inline double iw_scalar_variance(double psi, double nu) {
  if (!(nu > 4.0)) throw DomainError("undefined moment: scalar variance needs nu > 4");
  return 2.0 * psi * psi / ((nu - 2.0) * (nu - 2.0) * (nu - 4.0));
}

// Skewness from the first three raw moments
//   m_k = psi^k / ((nu-2)(nu-4)...(nu-2k)),   defined for nu > 6.
// Always positive on its domain; a Gaussian would give zero.
inline double iw_scalar_skewness(double psi, double nu) {
  if (!(nu > 6.0)) throw DomainError("undefined moment: skewness needs nu > 6");
  const double m1 = psi / (nu - 2.0);
  const double m2 = psi * psi / ((nu - 2.0) * (nu - 4.0));
  const double m3 = psi * psi * psi / ((nu - 2.0) * (nu - 4.0) * (nu - 6.0));
  const double var = m2 - m1 * m1;
  return (m3 - 3.0 * m1 * var - m1 * m1 * m1) / std::pow(var, 1.5);
}

// Conjugate update for centered Gaussian observations:
//   Psi -> Psi + sum_k z_k z_k',   nu -> nu + #observations.
inline InverseWishartParams conjugate_update(const InverseWishartParams& params,
                                             const std::vector<RVector>& observations) {
  RMatrix psi = params.scale();
  for (const RVector& z : observations) {
    if (z.size() != params.p()) {
      throw DimensionError("observation dimension must equal p");
    }
    psi.noalias() += z * z.transpose();
  }
  return InverseWishartParams(std::move(psi),
                              params.dof() + static_cast<double>(observations.size()));
}

// Complex observations fold in through Re(z z'); for p = 1 this is |z|^2.
inline InverseWishartParams conjugate_update(const InverseWishartParams& params,
                                             const std::vector<CVector>& observations) {
  RMatrix psi = params.scale();
  for (const CVector& z : observations) {
    if (z.size() != params.p()) {
      throw DimensionError("observation dimension must equal p");
    }
    psi.noalias() += (z * z.adjoint()).real();
  }
  return InverseWishartParams(std::move(psi),
                              params.dof() + static_cast<double>(observations.size()));
}

}  // namespace pulsecomp
