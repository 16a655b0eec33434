// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <utility>

#include "pulsecomp/errors.hpp"

namespace pulsecomp {

using Complex = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;
using RMatrix = Eigen::MatrixXd;

inline constexpr double kPi = 3.14159265358979323846;

// Square complex matrix validated Hermitian on construction
// (max |M - M'| <= 1e-12 relative to max(1, |M|_max)); stored exactly
// symmetrized. With require_psd, eigenvalues below -1e-10 (same scaling)
// are rejected.
class HermitianMatrix {
 public:
  explicit HermitianMatrix(const CMatrix& m, bool require_psd = false) {
    if (m.rows() != m.cols() || m.rows() < 1) {
      throw DimensionError("Hermitian matrix must be square and non-empty");
    }
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    const double asym = (m - m.adjoint()).cwiseAbs().maxCoeff();
    if (!(asym <= 1e-12 * scale)) {
      throw DomainError("matrix is not Hermitian within tolerance 1e-12");
    }
    m_ = 0.5 * (m + m.adjoint());
    if (require_psd && !is_positive_semidefinite()) {
      throw DomainError("matrix is not positive semidefinite");
    }
  }

  static HermitianMatrix identity(Eigen::Index n) {
    return HermitianMatrix(CMatrix::Identity(n, n));
  }

  Eigen::Index dim() const { return m_.rows(); }
  const CMatrix& matrix() const { return m_; }

  RVector eigenvalues() const {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(m_, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw NumericError("eigensolver failed");
    return es.eigenvalues();
  }

  bool is_positive_semidefinite() const {
    const RVector ev = eigenvalues();
    const double floor = -1e-10 * std::max(1.0, ev.maxCoeff());
    return ev.minCoeff() >= floor;
  }

  // Self-adjoint square root. Eigenvalues in [-1e-12, 0) (relative to the
  // largest) are clamped to zero; anything more negative is an error.
  CMatrix psd_sqrt() const {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(m_);
    if (es.info() != Eigen::Success) throw NumericError("eigensolver failed");
    RVector ev = es.eigenvalues();
    const double tol = 1e-12 * std::max(1.0, ev.maxCoeff());
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
      if (ev[i] < 0.0) {
        if (ev[i] < -tol) {
          throw NumericError("matrix has a negative eigenvalue beyond tolerance");
        }
        ev[i] = 0.0;
      }
    }
    return es.eigenvectors() * ev.cwiseSqrt().asDiagonal() *
           es.eigenvectors().adjoint();
  }

 private:
  CMatrix m_;
};

// Unnormalized forward DFT, X(k) = sum_t x(t) e^{-2 pi i k t / d}.
// This is the library-wide transform convention; Parseval reads
// sum |x|^2 = (1/d) sum |X|^2.
inline CVector dft_forward(const CVector& x) {
  const Eigen::Index d = x.size();
  CVector out(d);
  for (Eigen::Index k = 0; k < d; ++k) {
    Complex acc(0.0, 0.0);
    for (Eigen::Index t = 0; t < d; ++t) {
      const Eigen::Index m = (k * t) % d;
      acc += x[t] * std::polar(1.0, -2.0 * kPi * static_cast<double>(m) /
                                        static_cast<double>(d));
    }
    out[k] = acc;
  }
  return out;
}

// Inverse of dft_forward, x(t) = (1/d) sum_k X(k) e^{+2 pi i k t / d}.
inline CVector dft_inverse(const CVector& X) {
  const Eigen::Index d = X.size();
  CVector out(d);
  for (Eigen::Index t = 0; t < d; ++t) {
    Complex acc(0.0, 0.0);
    for (Eigen::Index k = 0; k < d; ++k) {
      const Eigen::Index m = (k * t) % d;
      acc += X[k] * std::polar(1.0, 2.0 * kPi * static_cast<double>(m) /
                                       static_cast<double>(d));
    }
    out[t] = acc / static_cast<double>(d);
  }
  return out;
}

// Matrix of dft_forward: F(k, t) = e^{-2 pi i k t / d}.
inline CMatrix dft_matrix(Eigen::Index d) {
  CMatrix f(d, d);
  for (Eigen::Index k = 0; k < d; ++k) {
    for (Eigen::Index t = 0; t < d; ++t) {
      const Eigen::Index m = (k * t) % d;
      f(k, t) = std::polar(1.0, -2.0 * kPi * static_cast<double>(m) /
                                    static_cast<double>(d));
    }
  }
  return f;
}

}  // namespace pulsecomp
