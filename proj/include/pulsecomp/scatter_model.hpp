// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "pulsecomp/complex_gaussian.hpp"
#include "pulsecomp/pulse_codes.hpp"

namespace pulsecomp {

// Receiver noise power. T = 0 is allowed (noise-free experiments).
class Temperature {
 public:
  explicit Temperature(double t) : t_(t) {
    if (!(t >= 0.0)) throw DomainError("temperature must be >= 0");
  }
  double value() const { return t_; }

 private:
  double t_;
};

// N periodic windows chi_j on the d-point lattice with
//   sum_j chi_j(t)^2 = 1 at every t (within 1e-10), and
//   chi_j a cyclic translate of chi_0 by j*(d/N) samples.
class PartitionOfUnity {
 public:
  // windows: N x d, row j = chi_j.
  explicit PartitionOfUnity(RMatrix windows) : windows_(std::move(windows)) {
    const Eigen::Index n = windows_.rows();
    const Eigen::Index d = windows_.cols();
    if (n < 1 || d < 1) throw DimensionError("partition needs N >= 1 windows of length d >= 1");
    if (d % n != 0) throw DomainError("window count must divide the lattice size");
    for (Eigen::Index t = 0; t < d; ++t) {
      const double s = windows_.col(t).squaredNorm();
      if (std::abs(s - 1.0) > 1e-10) {
        throw DomainError("partition windows must satisfy sum_j chi_j(t)^2 = 1");
      }
    }
    const Eigen::Index step = d / n;
    for (Eigen::Index j = 1; j < n; ++j) {
      for (Eigen::Index t = 0; t < d; ++t) {
        const Eigen::Index src = ((t - j * step) % d + d) % d;
        if (std::abs(windows_(j, t) - windows_(0, src)) > 1e-12) {
          throw DomainError("each window must be a cyclic translate of the first");
        }
      }
    }
  }

  Eigen::Index window_count() const { return windows_.rows(); }
  Eigen::Index lattice_size() const { return windows_.cols(); }
  RVector window(Eigen::Index j) const { return windows_.row(j); }
  const RMatrix& windows() const { return windows_; }

 private:
  RMatrix windows_;
};

// Raised-cosine partition: translates of the bump
//   w(t) = cos^2(pi * dist(t, 0) / (2 s)),   s = d / N,
// renormalized pointwise so that sum_j chi_j(t)^2 = 1 exactly. Requires
// N | d and d/N >= 2. The pointwise renormalizer is s-periodic, so the
// windows stay exact cyclic translates of each other.
inline PartitionOfUnity smooth_partition(Eigen::Index d, Eigen::Index n) {
  if (d < 1 || n < 1) throw DimensionError("need d >= 1 and N >= 1");
  if (d % n != 0) throw DomainError("window count must divide the lattice size");
  const Eigen::Index step = d / n;
  if (step < 2) throw DomainError("need d/N >= 2 lattice points per window");

  RVector base(d);
  for (Eigen::Index t = 0; t < d; ++t) {
    const Eigen::Index dist = std::min(t, d - t);  // cyclic distance to 0
    if (dist >= step) {
      base[t] = 0.0;
    } else {
      const double c = std::cos(kPi * static_cast<double>(dist) /
                                (2.0 * static_cast<double>(step)));
      base[t] = c * c;
    }
  }

  RMatrix windows(n, d);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index t = 0; t < d; ++t) {
      windows(j, t) = base[((t - j * step) % d + d) % d];
    }
  }
  for (Eigen::Index t = 0; t < d; ++t) {
    const double s = windows.col(t).norm();
    if (!(s > 0.0)) throw NumericError("partition renormalizer vanished");
    windows.col(t) /= s;
  }
  return PartitionOfUnity(std::move(windows));
}

// Indicator windows, one per lattice point (N = d).
inline PartitionOfUnity delta_partition(Eigen::Index d) {
  return PartitionOfUnity(RMatrix::Identity(d, d));
}

// The unknown |sigma|^2 on the lattice: a single constant, one value per
// point, or a partition-of-unity parametrization.
class VarianceField {
 public:
  struct Constant {
    double sigma0_sq;
  };
  struct Pointwise {
    RVector values;
  };
  struct Partition {
    RVector sigma2;
    PartitionOfUnity partition;
  };

  static VarianceField constant(double sigma0_sq) {
    if (!(sigma0_sq > 0.0)) throw DomainError("constant variance must be > 0");
    return VarianceField(Constant{sigma0_sq});
  }

  static VarianceField pointwise(RVector values) {
    if (values.size() < 1) throw DimensionError("pointwise field needs d >= 1 values");
    if ((values.array() < 0.0).any()) throw DomainError("variances must be >= 0");
    return VarianceField(Pointwise{std::move(values)});
  }

  static VarianceField partition(RVector sigma2, PartitionOfUnity pou) {
    if (sigma2.size() != pou.window_count()) {
      throw DimensionError("need one variance per partition window");
    }
    if ((sigma2.array() < 0.0).any()) throw DomainError("variances must be >= 0");
    return VarianceField(Partition{std::move(sigma2), std::move(pou)});
  }

  const Constant* as_constant() const { return std::get_if<Constant>(&spec_); }
  const Pointwise* as_pointwise() const { return std::get_if<Pointwise>(&spec_); }
  const Partition* as_partition() const { return std::get_if<Partition>(&spec_); }

 private:
  using Spec = std::variant<Constant, Pointwise, Partition>;
  explicit VarianceField(Spec spec) : spec_(std::move(spec)) {}
  Spec spec_;
};

// Structure operator X of the field on a d-point lattice:
//   Constant  -> sigma0^2 I,
//   Pointwise -> diag(values),
//   Partition -> sum_j sigma_j^2 chi_j chi_j'   (rank <= N).
inline HermitianMatrix structure_operator(const VarianceField& field, Eigen::Index d) {
  if (d < 1) throw DimensionError("need d >= 1");
  if (const auto* c = field.as_constant()) {
    return HermitianMatrix(c->sigma0_sq * CMatrix::Identity(d, d), true);
  }
  if (const auto* p = field.as_pointwise()) {
    if (p->values.size() != d) throw DimensionError("pointwise field size must equal d");
    CMatrix x = CMatrix::Zero(d, d);
    x.diagonal() = p->values.cast<Complex>();
    return HermitianMatrix(std::move(x), true);
  }
  const auto* pt = field.as_partition();
  if (pt->partition.lattice_size() != d) {
    throw DimensionError("partition lattice size must equal d");
  }
  RMatrix x = RMatrix::Zero(d, d);
  for (Eigen::Index j = 0; j < pt->partition.window_count(); ++j) {
    const RVector chi = pt->partition.window(j);
    x.noalias() += pt->sigma2[j] * (chi * chi.transpose());
  }
  return HermitianMatrix(x.cast<Complex>(), true);
}

// Signal covariance Sigma = T I + A X A' with A the circulant operator of
// the code and X the structure operator of the field.
inline HermitianMatrix signal_covariance(const PulseCode& code,
                                         const VarianceField& field,
                                         Temperature temperature) {
  const Eigen::Index d = code.d();
  const CMatrix a = circulant_operator(code);
  const CMatrix x = structure_operator(field, d).matrix();
  CMatrix sigma = temperature.value() * CMatrix::Identity(d, d) +
                  a * x * a.adjoint();
  return HermitianMatrix(std::move(sigma), true);
}

// One draw of the hierarchical model: mu = X^{1/2} w1, z = A mu + sqrt(T) w2
// with w1, w2 independent complex white noise.
struct SignalDraw {
  CVector z;
  CVector mu;
  std::string code_label;
  double temperature = 0.0;
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;
};

// Caches the convolution operator and the PSD square root of the structure
// operator so repeated draws are two matrix-vector products.
class SignalSimulator {
 public:
  SignalSimulator(const PulseCode& code, const VarianceField& field,
                  Temperature temperature)
      : a_(circulant_operator(code)),
        sqrt_x_(structure_operator(field, code.d()).psd_sqrt()),
        label_(code.label()),
        temperature_(temperature.value()) {}

  Eigen::Index dim() const { return a_.rows(); }

  SignalDraw draw(RngStream& rng) const {
    SignalDraw out;
    out.code_label = label_;
    out.temperature = temperature_;
    out.seed = rng.seed();
    out.stream_id = rng.stream_id();
    out.mu = sqrt_x_ * sample_white_noise(dim(), rng);
    out.z = a_ * out.mu;
    if (temperature_ > 0.0) {
      out.z += std::sqrt(temperature_) * sample_white_noise(dim(), rng);
    }
    return out;
  }

 private:
  CMatrix a_;
  CMatrix sqrt_x_;
  std::string label_;
  double temperature_;
};

inline SignalDraw simulate_signal(const PulseCode& code, const VarianceField& field,
                                  Temperature temperature, RngStream& rng) {
  return SignalSimulator(code, field, temperature).draw(rng);
}

// Lag profile E[z_t conj(z_t')] evaluated by direct kernel sums,
//   entry(t,t') = sum_r eps(t-r) conj(eps(t'-r)) |sigma(r)|^2 + T [t == t'],
// generalized through the structure operator for partition fields. Agrees
// with signal_covariance entrywise (exact algebraic identity); the two are
// computed along different routes on purpose.
inline HermitianMatrix lag_profile(const PulseCode& code, const VarianceField& field,
                                   Temperature temperature) {
  const Eigen::Index d = code.d();
  const CVector& eps = code.samples();
  const auto wrap = [d](Eigen::Index i) { return ((i % d) + d) % d; };
  CMatrix out(d, d);

  if (const auto* pt = field.as_partition()) {
    const CMatrix x = structure_operator(field, d).matrix();
    (void)pt;
    for (Eigen::Index t = 0; t < d; ++t) {
      for (Eigen::Index u = 0; u < d; ++u) {
        Complex acc(0.0, 0.0);
        for (Eigen::Index r = 0; r < d; ++r) {
          for (Eigen::Index rp = 0; rp < d; ++rp) {
            acc += eps[wrap(t - r)] * x(r, rp) * std::conj(eps[wrap(u - rp)]);
          }
        }
        out(t, u) = acc;
      }
    }
  } else {
    RVector var(d);
    if (const auto* c = field.as_constant()) {
      var.setConstant(c->sigma0_sq);
    } else {
      const auto* p = field.as_pointwise();
      if (p->values.size() != d) throw DimensionError("pointwise field size must equal d");
      var = p->values;
    }
    for (Eigen::Index t = 0; t < d; ++t) {
      for (Eigen::Index u = 0; u < d; ++u) {
        Complex acc(0.0, 0.0);
        for (Eigen::Index r = 0; r < d; ++r) {
          acc += eps[wrap(t - r)] * std::conj(eps[wrap(u - r)]) * var[r];
        }
        out(t, u) = acc;
      }
    }
  }
  out += temperature.value() * CMatrix::Identity(d, d);
  return HermitianMatrix(std::move(out), true);
}

// Quadratic form of the constant-variance covariance in spectral form,
//   (1/d) sum_k (sigma0^2 |eps_hat(k)|^2 + T) |phi_hat(k)|^2,
// the discrete torus integral under the library DFT convention. Equals
// phi' Sigma phi for Sigma = signal_covariance(code, Constant(sigma0^2), T).
inline double quad_form_constant(const PulseCode& code, const CVector& phi,
                                 double sigma0_sq, Temperature temperature) {
  if (phi.size() != code.d()) throw DimensionError("phi dimension must equal d");
  if (!(sigma0_sq > 0.0)) throw DomainError("constant variance must be > 0");
  const CVector eps_hat = dft_forward(code.samples());
  const CVector phi_hat = dft_forward(phi);
  double acc = 0.0;
  for (Eigen::Index k = 0; k < phi_hat.size(); ++k) {
    acc += (sigma0_sq * std::norm(eps_hat[k]) + temperature.value()) *
           std::norm(phi_hat[k]);
  }
  return acc / static_cast<double>(code.d());
}

// Covariance of the discrete observation Y_i = phi_i' z:
//   M(i,j) = sum_k sigma_k^2 (phi_i' A chi_k) conj(phi_j' A chi_k)
//            + T phi_i' phi_j,
// with ' the conjugate transpose (so M = Phi' Sigma Phi, Phi columns phi_i).
// With the standard basis and the delta partition this reduces entrywise to
// signal_covariance.
inline HermitianMatrix marginal_covariance(const PulseCode& code,
                                           const PartitionOfUnity& partition,
                                           const RVector& sigma2,
                                           Temperature temperature,
                                           const std::vector<CVector>& test_functions) {
  const Eigen::Index d = code.d();
  if (partition.lattice_size() != d) {
    throw DimensionError("partition lattice size must equal d");
  }
  if (sigma2.size() != partition.window_count()) {
    throw DimensionError("need one variance per partition window");
  }
  if ((sigma2.array() < 0.0).any()) throw DomainError("variances must be >= 0");
  const Eigen::Index m = static_cast<Eigen::Index>(test_functions.size());
  if (m < 1) throw DimensionError("need at least one test function");
  for (const CVector& phi : test_functions) {
    if (phi.size() != d) throw DimensionError("test functions must have dimension d");
  }

  const CMatrix a = circulant_operator(code);
  const Eigen::Index n = partition.window_count();
  CMatrix b(m, n);  // b(i, k) = phi_i' (A chi_k)
  for (Eigen::Index k = 0; k < n; ++k) {
    const CVector achi = a * partition.window(k).cast<Complex>();
    for (Eigen::Index i = 0; i < m; ++i) {
      b(i, k) = test_functions[static_cast<std::size_t>(i)].dot(achi);
    }
  }
  CMatrix out = b * sigma2.cast<Complex>().asDiagonal() * b.adjoint();
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      out(i, j) += temperature.value() *
                   test_functions[static_cast<std::size_t>(i)].dot(
                       test_functions[static_cast<std::size_t>(j)]);
    }
  }
  return HermitianMatrix(std::move(out), true);
}

}  // namespace pulsecomp
