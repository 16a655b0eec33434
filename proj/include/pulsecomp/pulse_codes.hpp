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

// Transmission envelope sampled on a d-point cyclic lattice (spacing 1/d of
// the unit torus). Builders produce unit l2-norm codes; arbitrary norms are
// allowed through the general constructor.
class PulseCode {
 public:
  PulseCode(CVector samples, std::string label)
      : samples_(std::move(samples)), label_(std::move(label)) {
    if (samples_.size() < 1) throw DimensionError("pulse code needs d >= 1 samples");
    norm_ = samples_.norm();
  }

  Eigen::Index d() const { return samples_.size(); }
  const CVector& samples() const { return samples_; }
  const std::string& label() const { return label_; }
  double l2_norm() const { return norm_; }

 private:
  CVector samples_;
  std::string label_;
  double norm_;
};

// Boxcar of width w samples, entries 1/sqrt(w) on [0, w), zero elsewhere.
inline PulseCode boxcar(Eigen::Index d, Eigen::Index w) {
  if (d < 1) throw DimensionError("pulse code needs d >= 1 samples");
  if (w < 1 || w > d) throw DomainError("invalid width: need 1 <= w <= d");
  CVector s = CVector::Zero(d);
  const double amp = 1.0 / std::sqrt(static_cast<double>(w));
  for (Eigen::Index j = 0; j < w; ++j) s[j] = amp;
  return PulseCode(std::move(s), "boxcar_w" + std::to_string(w));
}

// Single-sample code (1, 0, ..., 0); its circulant operator is the identity.
inline PulseCode dirac(Eigen::Index d) {
  CVector s = CVector::Zero(d);
  s[0] = 1.0;
  return PulseCode(std::move(s), "dirac");
}

// Barker sequence of the given length, l2-normalized. The +-1 entries come
// from the standard published tables; the aperiodic-sidelobe bound is
// re-validated from scratch in the test suite rather than trusted.
inline PulseCode barker(int n) {
  static const std::vector<std::pair<int, std::vector<int>>> table = {
      {2, {1, 1}},
      {3, {1, 1, -1}},
      {4, {1, 1, -1, 1}},
      {5, {1, 1, 1, -1, 1}},
      {7, {1, 1, 1, -1, -1, 1, -1}},
      {11, {1, 1, 1, -1, -1, -1, 1, -1, -1, 1, -1}},
      {13, {1, 1, 1, 1, 1, -1, -1, 1, 1, -1, 1, -1, 1}},
  };
  for (const auto& [len, seq] : table) {
    if (len == n) {
      CVector s(n);
      const double amp = 1.0 / std::sqrt(static_cast<double>(n));
      for (int j = 0; j < n; ++j) s[j] = amp * static_cast<double>(seq[j]);
      return PulseCode(std::move(s), "barker" + std::to_string(n));
    }
  }
  throw DomainError("unsupported Barker length " + std::to_string(n) +
                    "; supported: 2, 3, 4, 5, 7, 11, 13");
}

// Same samples on a larger lattice, zero-filled; l2 norm is unchanged.
inline PulseCode zero_pad(const PulseCode& code, Eigen::Index d) {
  if (d < code.d()) throw DomainError("cannot pad to a smaller lattice");
  CVector s = CVector::Zero(d);
  s.head(code.d()) = code.samples();
  return PulseCode(std::move(s), code.label() + "_pad" + std::to_string(d));
}

// DFT magnitudes and phases under the library transform convention
// (unnormalized forward sum). Phases lie in (-pi, pi]; bins with zero
// modulus get phase 0.
struct Spectrum {
  RVector moduli;
  RVector phases;
};

inline Spectrum spectrum(const PulseCode& code) {
  const CVector f = dft_forward(code.samples());
  Spectrum sp;
  sp.moduli.resize(f.size());
  sp.phases.resize(f.size());
  for (Eigen::Index k = 0; k < f.size(); ++k) {
    sp.moduli[k] = std::abs(f[k]);
    double ph = sp.moduli[k] == 0.0 ? 0.0 : std::arg(f[k]);
    if (ph <= -kPi) ph = kPi;
    sp.phases[k] = ph;
  }
  return sp;
}

// Inverse DFT of moduli .* exp(i phases); reconstructs the code's samples.
inline CVector spectrum_to_samples(const Spectrum& sp) {
  if (sp.moduli.size() != sp.phases.size()) {
    throw DimensionError("moduli and phases must have equal length");
  }
  CVector f(sp.moduli.size());
  for (Eigen::Index k = 0; k < f.size(); ++k) {
    f[k] = std::polar(sp.moduli[k], sp.phases[k]);
  }
  return dft_inverse(f);
}

// Matrix of cyclic convolution with the code: A(t, r) = eps((t - r) mod d),
// so A mu = eps * mu for every mu. Diagonalized by the DFT,
// A = F' diag(eps_hat) F / d, hence A A' depends on the code only through
// the spectral moduli |eps_hat|.
inline CMatrix circulant_operator(const PulseCode& code) {
  const Eigen::Index d = code.d();
  CMatrix a(d, d);
  for (Eigen::Index t = 0; t < d; ++t) {
    for (Eigen::Index r = 0; r < d; ++r) {
      a(t, r) = code.samples()[((t - r) % d + d) % d];
    }
  }
  return a;
}

// Code with each DFT coefficient rotated by the given phase. Conjugate
// symmetry is not enforced, so twins of real codes are generally complex.
inline PulseCode phase_twin(const PulseCode& code, const RVector& phases) {
  if (phases.size() != code.d()) {
    throw DimensionError("need one phase per DFT bin");
  }
  CVector f = dft_forward(code.samples());
  for (Eigen::Index k = 0; k < f.size(); ++k) {
    f[k] *= std::polar(1.0, phases[k]);
  }
  return PulseCode(dft_inverse(f), code.label() + "_twin");
}

// Twin with iid uniform phase rotations: identical spectral moduli (and
// hence identical A A' and signal covariance) by construction.
inline PulseCode random_phase_twin(const PulseCode& code, RngStream& rng) {
  RVector phases(code.d());
  for (Eigen::Index k = 0; k < phases.size(); ++k) {
    phases[k] = rng.uniform_angle();
  }
  return phase_twin(code, phases);
}

// JSON wire format: {"label": str, "d": int, "re": [f64...], "im": [f64...]}.
inline nlohmann::json code_to_json(const PulseCode& code) {
  std::vector<double> re(code.d());
  std::vector<double> im(code.d());
  for (Eigen::Index j = 0; j < code.d(); ++j) {
    re[j] = code.samples()[j].real();
    im[j] = code.samples()[j].imag();
  }
  return nlohmann::json{{"label", code.label()},
                        {"d", code.d()},
                        {"re", re},
                        {"im", im}};
}

inline PulseCode code_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("label") || !j.contains("d") ||
      !j.contains("re") || !j.contains("im")) {
    throw DomainError("pulse code JSON needs label, d, re, im");
  }
  const auto d = j.at("d").get<Eigen::Index>();
  const auto re = j.at("re").get<std::vector<double>>();
  const auto im = j.at("im").get<std::vector<double>>();
  if (d < 1 || static_cast<Eigen::Index>(re.size()) != d ||
      static_cast<Eigen::Index>(im.size()) != d) {
    throw DimensionError("pulse code JSON arrays must have length d >= 1");
  }
  CVector s(d);
  for (Eigen::Index k = 0; k < d; ++k) s[k] = Complex(re[k], im[k]);
  return PulseCode(std::move(s), j.at("label").get<std::string>());
}

}  // namespace pulsecomp
