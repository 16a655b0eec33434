// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "pulsecomp/complex_gaussian.hpp"
#include "pulsecomp/linalg.hpp"
#include "pulsecomp/rng.hpp"

namespace test_support {

using pulsecomp::CMatrix;
using pulsecomp::CVector;
using pulsecomp::RngStream;
using pulsecomp::RVector;

inline CMatrix random_unitary(Eigen::Index n, RngStream& rng) {
  CMatrix m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) m.col(i) = pulsecomp::sample_white_noise(n, rng);
  return Eigen::HouseholderQR<CMatrix>(m).householderQ();
}

struct MeanSd {
  double mean = 0.0;
  double sd = 0.0;
  double se = 0.0;
};

inline MeanSd mean_sd(const std::vector<double>& xs) {
  MeanSd out;
  const double n = static_cast<double>(xs.size());
  for (const double x : xs) out.mean += x;
  out.mean /= n;
  double sq = 0.0;
  for (const double x : xs) sq += (x - out.mean) * (x - out.mean);
  out.sd = xs.size() > 1 ? std::sqrt(sq / (n - 1.0)) : 0.0;
  out.se = out.sd / std::sqrt(n);
  return out;
}

// Kolmogorov-Smirnov statistic of samples against a CDF given as a grid
// (x ascending, F(x) nondecreasing); linear interpolation between knots.
inline double ks_statistic(std::vector<double> samples, const RVector& grid_x,
                           const RVector& grid_cdf) {
  std::sort(samples.begin(), samples.end());
  const auto cdf_at = [&](double x) {
    if (x <= grid_x[0]) return 0.0;
    const Eigen::Index n = grid_x.size();
    if (x >= grid_x[n - 1]) return 1.0;
    Eigen::Index lo = 0;
    Eigen::Index hi = n - 1;
    while (hi - lo > 1) {
      const Eigen::Index mid = (lo + hi) / 2;
      if (grid_x[mid] <= x) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    const double t = (x - grid_x[lo]) / (grid_x[hi] - grid_x[lo]);
    return grid_cdf[lo] + t * (grid_cdf[hi] - grid_cdf[lo]);
  };
  double worst = 0.0;
  const double n = static_cast<double>(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf_at(samples[i]);
    const double lo = static_cast<double>(i) / n;
    const double hi = static_cast<double>(i + 1) / n;
    worst = std::max(worst, std::max(std::abs(f - lo), std::abs(f - hi)));
  }
  return worst;
}

// Trapezoid CDF of exp(log_pdf) over a grid, renormalized to end at 1.
inline void quadrature_cdf(const RVector& grid_x,
                           const std::function<double(double)>& log_pdf,
                           RVector& cdf_out) {
  const Eigen::Index n = grid_x.size();
  RVector pdf(n);
  for (Eigen::Index i = 0; i < n; ++i) pdf[i] = std::exp(log_pdf(grid_x[i]));
  cdf_out.resize(n);
  cdf_out[0] = 0.0;
  for (Eigen::Index i = 1; i < n; ++i) {
    cdf_out[i] = cdf_out[i - 1] +
                 0.5 * (pdf[i] + pdf[i - 1]) * (grid_x[i] - grid_x[i - 1]);
  }
  cdf_out /= cdf_out[n - 1];
}

}  // namespace test_support
