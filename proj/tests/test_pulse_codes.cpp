// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include "pulsecomp/pulse_codes.hpp"
#include "test_support.hpp"

#include <cmath>
#include <complex>

using namespace pulsecomp;

namespace {

// Brute-force aperiodic autocorrelation c(k) = sum_t x(t) conj(x(t+k)).
double max_aperiodic_sidelobe(const CVector& x) {
  double worst = 0.0;
  for (Eigen::Index k = 1; k < x.size(); ++k) {
    Complex acc(0, 0);
    for (Eigen::Index t = 0; t + k < x.size(); ++t) {
      acc += x[t] * std::conj(x[t + k]);
    }
    worst = std::max(worst, std::abs(acc));
  }
  return worst;
}

// Independent DFT by direct summation (no shared code with the library).
CVector direct_dft(const CVector& x) {
  const Eigen::Index d = x.size();
  CVector out(d);
  for (Eigen::Index k = 0; k < d; ++k) {
    Complex acc(0, 0);
    for (Eigen::Index t = 0; t < d; ++t) {
      const double angle = -2.0 * kPi * static_cast<double>(k) *
                           static_cast<double>(t) / static_cast<double>(d);
      acc += x[t] * Complex(std::cos(angle), std::sin(angle));
    }
    out[k] = acc;
  }
  return out;
}

CVector cyclic_convolve(const CVector& a, const CVector& b) {
  const Eigen::Index d = a.size();
  CVector out = CVector::Zero(d);
  for (Eigen::Index t = 0; t < d; ++t) {
    for (Eigen::Index r = 0; r < d; ++r) {
      out[t] += a[((t - r) % d + d) % d] * b[r];
    }
  }
  return out;
}

PulseCode random_code(Eigen::Index d, RngStream& rng) {
  CVector s = sample_white_noise(d, rng);
  s /= s.norm();
  return PulseCode(std::move(s), "random");
}

}  // namespace

TEST_CASE("boxcar values and errors") {
  const PulseCode c = boxcar(4, 2);
  REQUIRE(std::abs(c.samples()[0] - Complex(1.0 / std::sqrt(2.0), 0)) < 1e-15);
  REQUIRE(std::abs(c.samples()[1] - Complex(1.0 / std::sqrt(2.0), 0)) < 1e-15);
  REQUIRE(std::abs(c.samples()[2]) == 0.0);
  REQUIRE(std::abs(c.samples()[3]) == 0.0);
  REQUIRE(std::abs(c.samples()[0].real() - 0.70711) < 1e-5);
  REQUIRE(std::abs(c.l2_norm() - 1.0) < 1e-15);

  const PulseCode d1 = boxcar(4, 1);
  REQUIRE(std::abs(d1.samples()[0] - Complex(1, 0)) == 0.0);
  REQUIRE(d1.samples().tail(3).norm() == 0.0);

  REQUIRE_THROWS_AS(boxcar(4, 0), DomainError);
  REQUIRE_THROWS_AS(boxcar(4, 5), DomainError);
}

TEST_CASE("full-width boxcar spectrum concentrates at DC") {
  const PulseCode c = boxcar(4, 4);
  for (Eigen::Index t = 0; t < 4; ++t) {
    REQUIRE(std::abs(c.samples()[t] - Complex(0.5, 0)) < 1e-15);
  }
  const Spectrum sp = spectrum(c);
  const CVector oracle = direct_dft(c.samples());
  for (Eigen::Index k = 0; k < 4; ++k) {
    REQUIRE(std::abs(sp.moduli[k] - std::abs(oracle[k])) < 1e-12);
  }
  REQUIRE(std::abs(sp.moduli[0] - 2.0) < 1e-12);
  REQUIRE(sp.moduli.tail(3).maxCoeff() < 1e-12);
}

TEST_CASE("barker codes satisfy the sidelobe bound") {
  for (const int n : {2, 3, 4, 5, 7, 11, 13}) {
    const PulseCode code = barker(n);
    REQUIRE(code.d() == n);
    REQUIRE(std::abs(code.l2_norm() - 1.0) < 1e-12);
    // unnormalized +-1 sequence: undo the 1/sqrt(n)
    const CVector raw = code.samples() * std::sqrt(static_cast<double>(n));
    for (Eigen::Index t = 0; t < n; ++t) {
      REQUIRE(std::abs(std::abs(raw[t].real()) - 1.0) < 1e-12);
      REQUIRE(raw[t].imag() == 0.0);
    }
    REQUIRE(max_aperiodic_sidelobe(raw) <= 1.0 + 1e-12);
    REQUIRE(max_aperiodic_sidelobe(code.samples()) <=
            1.0 / static_cast<double>(n) + 1e-12);
  }
}

TEST_CASE("barker 13 and 2 details") {
  const PulseCode b13 = barker(13);
  const CVector raw13 = b13.samples() * std::sqrt(13.0);
  REQUIRE(std::abs(max_aperiodic_sidelobe(raw13) - 1.0) < 1e-12);

  const PulseCode b2 = barker(2);
  REQUIRE(std::abs(b2.samples()[0] - Complex(1.0 / std::sqrt(2.0), 0)) < 1e-15);
  REQUIRE(std::abs(b2.samples()[1] - Complex(1.0 / std::sqrt(2.0), 0)) < 1e-15);
  const CVector raw2 = b2.samples() * std::sqrt(2.0);
  REQUIRE(std::abs(max_aperiodic_sidelobe(raw2) - 1.0) < 1e-12);
}

TEST_CASE("no barker code of length six") {
  REQUIRE_THROWS_AS(barker(6), DomainError);
}

TEST_CASE("circulant operator of the dirac code is the identity") {
  const CMatrix a = circulant_operator(dirac(5));
  REQUIRE((a - CMatrix::Identity(5, 5)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("circulant operator performs cyclic convolution") {
  RngStream rng(31, 0);
  const PulseCode code = random_code(8, rng);
  const CVector mu = sample_white_noise(8, rng);
  const CVector direct = cyclic_convolve(code.samples(), mu);
  REQUIRE((circulant_operator(code) * mu - direct).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("shifting the code shifts the rows of its operator") {
  RngStream rng(32, 0);
  const PulseCode code = random_code(6, rng);
  CVector shifted(6);
  for (Eigen::Index t = 0; t < 6; ++t) shifted[t] = code.samples()[((t - 2) % 6 + 6) % 6];
  const CMatrix a = circulant_operator(code);
  const CMatrix b = circulant_operator(PulseCode(shifted, "shifted"));
  for (Eigen::Index t = 0; t < 6; ++t) {
    REQUIRE((b.row((t + 2) % 6) - a.row(t)).cwiseAbs().maxCoeff() < 1e-15);
  }
}

TEST_CASE("boxcar operator applied to a delta reproduces the code") {
  const PulseCode code = boxcar(4, 2);
  CVector e0 = CVector::Zero(4);
  e0[0] = 1.0;
  const CVector out = circulant_operator(code) * e0;
  REQUIRE(std::abs(out[0].real() - 0.70711) < 1e-5);
  REQUIRE(std::abs(out[1].real() - 0.70711) < 1e-5);
  REQUIRE(std::abs(out[2]) < 1e-15);
  REQUIRE(std::abs(out[3]) < 1e-15);
}

TEST_CASE("dirac spectrum is flat") {
  const Spectrum sp = spectrum(dirac(7));
  for (Eigen::Index k = 0; k < 7; ++k) {
    REQUIRE(std::abs(sp.moduli[k] - 1.0) < 1e-12);
  }
}

TEST_CASE("real even codes have phases zero or pi") {
  CVector s(6);
  s << 0.9, 0.4, 0.1, 0.05, 0.1, 0.4;
  const Spectrum sp = spectrum(PulseCode(s, "real_even"));
  for (Eigen::Index k = 0; k < 6; ++k) {
    if (sp.moduli[k] < 1e-12) continue;
    const double dist0 = std::abs(sp.phases[k]);
    const double dist_pi = std::abs(std::abs(sp.phases[k]) - kPi);
    REQUIRE(std::min(dist0, dist_pi) < 1e-9);
  }
}

TEST_CASE("spectrum reconstructs the code") {
  RngStream rng(33, 0);
  for (const Eigen::Index d : {3, 8, 16}) {
    const PulseCode code = random_code(d, rng);
    const CVector back = spectrum_to_samples(spectrum(code));
    REQUIRE((back - code.samples()).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("parseval for the fixed DFT convention") {
  RngStream rng(34, 0);
  for (const Eigen::Index d : {2, 5, 16, 32}) {
    const PulseCode code = random_code(d, rng);
    const Spectrum sp = spectrum(code);
    const double lhs = code.samples().squaredNorm();
    const double rhs = sp.moduli.squaredNorm() / static_cast<double>(d);
    REQUIRE(std::abs(lhs - rhs) < 1e-12);
  }
}

TEST_CASE("circulant operator diagonalizes as F' diag(eps_hat) F / d") {
  RngStream rng(35, 0);
  for (const Eigen::Index d : {4, 8, 16, 64}) {
    const PulseCode code = random_code(d, rng);
    const CMatrix f = dft_matrix(d);
    const CMatrix lhs = circulant_operator(code);
    const CMatrix rhs =
        f.adjoint() * dft_forward(code.samples()).asDiagonal() * f / static_cast<double>(d);
    REQUIRE((lhs - rhs).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("random phase twin keeps moduli and norm") {
  RngStream rng(36, 0);
  const PulseCode code = barker(13);
  const PulseCode twin = random_phase_twin(code, rng);
  const Spectrum s1 = spectrum(code);
  const Spectrum s2 = spectrum(twin);
  REQUIRE((s1.moduli - s2.moduli).cwiseAbs().maxCoeff() < 1e-12);
  REQUIRE(std::abs(twin.l2_norm() - 1.0) < 1e-12);
}

TEST_CASE("zero phases give the twin back unchanged") {
  RngStream rng(37, 0);
  const PulseCode code = random_code(10, rng);
  const PulseCode twin = phase_twin(code, RVector::Zero(10));
  REQUIRE((twin.samples() - code.samples()).cwiseAbs().maxCoeff() < 1e-13);
  const Spectrum s1 = spectrum(code);
  const Spectrum s2 = spectrum(twin);
  REQUIRE((s1.moduli - s2.moduli).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("AA' depends on the code only through spectral moduli") {
  RngStream rng(38, 0);
  for (const Eigen::Index d : {8, 16}) {
    const PulseCode code = random_code(d, rng);
    const PulseCode twin = random_phase_twin(code, rng);
    const CMatrix a1 = circulant_operator(code);
    const CMatrix a2 = circulant_operator(twin);
    const CMatrix g1 = a1 * a1.adjoint();
    const CMatrix g2 = a2 * a2.adjoint();
    REQUIRE((g1 - g2).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("code JSON round trip") {
  RngStream rng(39, 0);
  const PulseCode code = random_code(9, rng);
  const PulseCode back = code_from_json(code_to_json(code));
  REQUIRE(back.label() == code.label());
  REQUIRE(back.d() == code.d());
  REQUIRE((back.samples() - code.samples()).cwiseAbs().maxCoeff() == 0.0);

  REQUIRE_THROWS_AS(code_from_json(nlohmann::json{{"label", "x"}}), DomainError);
}

TEST_CASE("zero padding preserves the norm") {
  const PulseCode padded = zero_pad(barker(13), 16);
  REQUIRE(padded.d() == 16);
  REQUIRE(std::abs(padded.l2_norm() - 1.0) < 1e-12);
  REQUIRE_THROWS_AS(zero_pad(padded, 8), DomainError);
}
