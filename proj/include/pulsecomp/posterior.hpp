// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include <boost/math/distributions/inverse_gamma.hpp>

#include "pulsecomp/parallel.hpp"
#include "pulsecomp/scatter_model.hpp"
#include "pulsecomp/wishart.hpp"

namespace pulsecomp {

// Posterior analyses of the constant-variance model. The canonical unknown
// is v = T + |sigma0|^2; summaries of |sigma0|^2 alone are the affine shift
// by -T. Observation coordinates enter through the real-Gaussian likelihood
// N(0, Sigma(v)) with Sigma(v) = T I + (v - T) A A', which for the identity
// code reduces coordinatewise to N(0, v) and hence to the closed-form
// conjugate posterior W^{-1}(sigma1^2 + |z|^2, nu + d).

struct ScalarModelSpec {
  Temperature T{0.0};
  double c = 1.0;        // code is c * identity
  Eigen::Index d = 1;    // observation count
};

enum class SummaryMethod { analytic, grid, monte_carlo };

struct PosteriorSummary {
  double mean = 0.0;
  double variance = 0.0;
  std::optional<InverseWishartParams> params;  // set when conjugate
  SummaryMethod method = SummaryMethod::analytic;
  std::optional<double> mc_stderr;  // set iff method == monte_carlo
};

// Conjugate posterior of v = T + |sigma0|^2 for the identity code (c = 1):
// W^{-1}(sigma1^2 + |z|^2, nu + d). The empty-observation edge d = 0 returns
// the prior unchanged. General c has no closed form here; use the grid oracle.
inline InverseWishartParams constant_variance_posterior(double sigma1_sq, double nu,
                                                        const ScalarModelSpec& spec,
                                                        const CVector& z) {
  if (!(sigma1_sq > 0.0) || !(nu > 0.0)) {
    throw DomainError("prior needs sigma1^2 > 0 and nu > 0");
  }
  if (spec.d < 0) throw DimensionError("observation count must be >= 0");
  if (z.size() != spec.d) throw DimensionError("z must have spec.d entries");
  if (spec.c != 1.0) {
    throw DomainError("unsupported scaling: the closed-form posterior covers c = 1 only");
  }
  return InverseWishartParams::scalar(sigma1_sq + z.squaredNorm(),
                                      nu + static_cast<double>(spec.d));
}

inline InverseWishartParams constant_variance_posterior(double sigma1_sq, double nu,
                                                        const ScalarModelSpec& spec,
                                                        const RVector& z) {
  return constant_variance_posterior(sigma1_sq, nu, spec, CVector(z.cast<Complex>()));
}

// Discrete posterior on a positive grid, trapezoid-normalized.
struct GridPosterior {
  RVector grid;
  RVector log_density;
  RVector density;
  double mean = 0.0;
  double variance = 0.0;
  // endpoint density mass; small values indicate the grid spans the support
  double tail_mass_bound = 0.0;
};

// Brute-force Bayes on a grid: posterior propto exp(loglik + logprior).
// The grid must be strictly increasing, positive, and have >= 100 points
// spanning the effective support. Non-finite log values are a grid-range
// error.
inline GridPosterior grid_posterior_scalar(const std::function<double(double)>& loglik,
                                           const std::function<double(double)>& log_prior,
                                           const RVector& grid) {
  const Eigen::Index n = grid.size();
  if (n < 100) throw GridError("grid needs at least 100 points");
  if (!(grid[0] > 0.0)) throw GridError("grid must be positive");
  for (Eigen::Index i = 1; i < n; ++i) {
    if (!(grid[i] > grid[i - 1])) throw GridError("grid must be strictly increasing");
  }

  RVector lp(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    lp[i] = loglik(grid[i]) + log_prior(grid[i]);
    if (!std::isfinite(lp[i])) {
      throw GridError("grid-range error: non-finite log posterior at v = " +
                      std::to_string(grid[i]));
    }
  }

  RVector w(n);
  w[0] = 0.5 * (grid[1] - grid[0]);
  w[n - 1] = 0.5 * (grid[n - 1] - grid[n - 2]);
  for (Eigen::Index i = 1; i + 1 < n; ++i) w[i] = 0.5 * (grid[i + 1] - grid[i - 1]);

  const double m = lp.maxCoeff();
  RVector e(n);
  double z = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    e[i] = std::exp(lp[i] - m);
    z += w[i] * e[i];
  }
  if (!(z > 0.0) || !std::isfinite(z)) {
    throw GridError("posterior mass vanished on the grid");
  }

  GridPosterior out;
  out.grid = grid;
  out.density = e / z;
  out.log_density = lp.array() - m - std::log(z);
  double mean = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) mean += w[i] * grid[i] * out.density[i];
  double var = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    var += w[i] * (grid[i] - mean) * (grid[i] - mean) * out.density[i];
  }
  out.mean = mean;
  out.variance = std::max(var, 0.0);
  out.tail_mass_bound = w[0] * out.density[0] + w[n - 1] * out.density[n - 1];
  return out;
}

inline RVector log_spaced_grid(double lo, double hi, int n) {
  if (!(lo > 0.0) || !(hi > lo)) throw GridError("grid bounds must satisfy 0 < lo < hi");
  if (n < 2) throw GridError("grid needs at least two points");
  RVector g(n);
  const double llo = std::log(lo);
  const double lhi = std::log(hi);
  for (int i = 0; i < n; ++i) {
    g[i] = std::exp(llo + (lhi - llo) * static_cast<double>(i) /
                              static_cast<double>(n - 1));
  }
  g[0] = lo;
  g[n - 1] = hi;
  return g;
}

// Log-spaced grid spanning the scalar inverse Wishart W^{-1}(psi, nu) from
// its 1e-8 to 1-1e-8 quantiles. When second (first) moments exist the upper
// bound is pushed out until the truncated tail contributes less than ~1e-7
// of the second (first) moment, using x^2 f_{a,b}(x) = const * f_{a-2,b}(x).
inline RVector conjugate_posterior_grid(double psi, double nu, int n) {
  if (!(psi > 0.0) || !(nu > 0.0)) throw DomainError("need psi > 0 and nu > 0");
  const double alpha = 0.5 * nu;
  const double beta = 0.5 * psi;
  boost::math::inverse_gamma_distribution<double> dist(alpha, beta);
  double lo = boost::math::quantile(dist, 1e-8);
  double hi = boost::math::quantile(boost::math::complement(dist, 1e-8));
  if (alpha > 2.0 + 1e-12) {
    boost::math::inverse_gamma_distribution<double> m2(alpha - 2.0, beta);
    hi = std::max(hi, boost::math::quantile(boost::math::complement(m2, 1e-7)));
  } else if (alpha > 1.0 + 1e-12) {
    boost::math::inverse_gamma_distribution<double> m1(alpha - 1.0, beta);
    hi = std::max(hi, boost::math::quantile(boost::math::complement(m1, 1e-8)));
  }
  return log_spaced_grid(lo, hi, n);
}

// Unnormalized log posterior of |sigma0|^2 for a single observation with an
// affine-gamma prior on the formal standard deviation:
//   -(1/2) log(v + T) - (c/2) v - (1/2) / (T + v),   v >= 0.
// A mix of shifted gamma and inverse gamma; no Gaussian matches it.
inline double mixed_gamma_log_density(double v, Temperature temperature, double c) {
  if (!(v >= 0.0)) throw DomainError("v must be >= 0");
  const double tv = v + temperature.value();
  if (!(tv > 0.0)) throw DomainError("singular: T + v must be > 0");
  return -0.5 * std::log(tv) - 0.5 * c * v - 0.5 / tv;
}

// Likelihood of real observations z ~ N(0, T I + (v - T) G), G = A A' of a
// code, parametrized by v = T + sigma0^2. G is diagonalized once; each
// likelihood evaluation is O(d). Codes must have (numerically) real G --
// true for real-valued codes and for spectral twins of real codes.
class ConstantFieldLikelihood {
 public:
  ConstantFieldLikelihood(const PulseCode& code, Temperature temperature)
      : temperature_(temperature.value()) {
    const CMatrix a = circulant_operator(code);
    const CMatrix g = a * a.adjoint();
    const double scale = std::max(1.0, g.cwiseAbs().maxCoeff());
    if (g.imag().cwiseAbs().maxCoeff() > 1e-8 * scale) {
      throw DomainError(
          "code has a genuinely complex A A'; the real-observation "
          "likelihood supports real codes and their spectral twins");
    }
    Eigen::SelfAdjointEigenSolver<RMatrix> es(g.real());
    if (es.info() != Eigen::Success) throw NumericError("eigensolver failed");
    lambda_ = es.eigenvalues().cwiseMax(0.0);
    basis_ = es.eigenvectors();
    const double lmax = lambda_.maxCoeff();
    active_.reserve(static_cast<std::size_t>(lambda_.size()));
    for (Eigen::Index i = 0; i < lambda_.size(); ++i) {
      if (temperature_ > 0.0 || (lmax > 0.0 && lambda_[i] > 1e-12 * lmax)) {
        active_.push_back(i);
      }
    }
  }

  Eigen::Index dim() const { return lambda_.size(); }
  int effective_dim() const { return static_cast<int>(active_.size()); }
  double temperature() const { return temperature_; }
  const RVector& eigenvalues() const { return lambda_; }

  // Largest v at which some noise-free spectral direction loses positivity;
  // the likelihood exists for v > v_floor().
  double v_floor() const {
    if (temperature_ == 0.0) return 0.0;
    const double lmax = lambda_.maxCoeff();
    if (lmax <= 1.0) return 0.0;
    return temperature_ * (1.0 - 1.0 / lmax);
  }

  // Real draw from N(0, Sigma(v_truth)); rank-deficient directions get 0.
  RVector sample_observation(double v_truth, RngStream& rng) const {
    if (!(v_truth >= temperature_)) {
      throw DomainError("truth must satisfy v >= T (sigma0^2 >= 0)");
    }
    RVector y(dim());
    for (Eigen::Index i = 0; i < dim(); ++i) {
      const double s = std::max(spectral_variance(v_truth, i), 0.0);
      y[i] = std::sqrt(s) * rng.normal();
    }
    return basis_ * y;
  }

  // Squared spectral coordinates of z; sufficient statistic for v.
  RVector spectral_sq(const RVector& z) const {
    if (z.size() != dim()) throw DimensionError("observation dimension mismatch");
    return (basis_.transpose() * z).array().square();
  }

  double log_likelihood(double v, const RVector& u_sq) const {
    if (u_sq.size() != dim()) throw DimensionError("spectral statistic dimension mismatch");
    if (!(v > v_floor())) return -std::numeric_limits<double>::infinity();
    double acc = 0.0;
    for (const Eigen::Index i : active_) {
      const double s = spectral_variance(v, i);
      if (!(s > 0.0)) return -std::numeric_limits<double>::infinity();
      acc += std::log(2.0 * kPi * s) + u_sq[i] / s;
    }
    return -0.5 * acc;
  }

 private:
  double spectral_variance(double v, Eigen::Index i) const {
    return temperature_ + (v - temperature_) * lambda_[i];
  }

  RMatrix basis_;
  RVector lambda_;
  double temperature_;
  std::vector<Eigen::Index> active_;
};

namespace detail {

// Grid + evaluation with tail-aware widening; deterministic given (lik, u_sq).
inline GridPosterior evaluate_constant_posterior(const ConstantFieldLikelihood& lik,
                                                 const RVector& u_sq,
                                                 double prior_psi, double prior_nu,
                                                 int grid_points) {
  double proxy_psi = prior_psi;
  for (Eigen::Index i = 0; i < u_sq.size(); ++i) proxy_psi += u_sq[i];
  const double proxy_nu = prior_nu + static_cast<double>(lik.effective_dim());

  const auto log_prior = [prior_psi, prior_nu](double v) {
    return iw_log_density_scalar(prior_psi, prior_nu, v);
  };
  const auto loglik = [&lik, &u_sq](double v) { return lik.log_likelihood(v, u_sq); };

  // keep the lower end where both log terms stay finite
  const double floor = lik.v_floor();
  const double lo_min = std::max(floor > 0.0 ? floor * (1.0 + 1e-9) + 1e-300 : 0.0,
                                 prior_psi / 1200.0);

  RVector base = conjugate_posterior_grid(proxy_psi, proxy_nu, grid_points);
  double lo = std::max(base[0], lo_min);
  double hi = std::max(base[base.size() - 1], lo * (1.0 + 1e-6));

  GridPosterior gp;
  for (int attempt = 0;; ++attempt) {
    gp = grid_posterior_scalar(loglik, log_prior, log_spaced_grid(lo, hi, grid_points));
    if (gp.tail_mass_bound < 1e-9 || attempt >= 5) break;
    lo = std::max(lo / 4.0, lo_min);
    hi *= 4.0;
  }
  if (!(gp.tail_mass_bound < 1e-6)) {
    throw GridError("posterior mass leaks off the quadrature grid");
  }
  return gp;
}

struct ReplicateStats {
  double post_mean = 0.0;
  double post_var = 0.0;
};

// Per-replicate grid posteriors of v for a scalar truth v_truth = T + sigma0^2.
// Replicate r draws from the substream base.derive(r), so results are
// independent of worker count and scheduling.
inline std::vector<ReplicateStats> constant_posterior_replicates(
    const PulseCode& code, Temperature temperature, double v_truth,
    const InverseWishartParams& prior, int replicates, const RngStream& base,
    int workers = 1, int grid_points = 2000) {
  if (prior.p() != 1) throw DimensionError("scalar posterior needs a p = 1 prior");
  if (replicates < 100) throw DomainError("replicates must be >= 100");
  if (grid_points < 100) throw GridError("grid needs at least 100 points");

  const ConstantFieldLikelihood lik(code, temperature);
  const double prior_psi = prior.scalar_scale();
  const double prior_nu = prior.dof();

  std::vector<ReplicateStats> stats(static_cast<std::size_t>(replicates));
  parallel_for_index(static_cast<std::size_t>(replicates), workers, [&](std::size_t r) {
    RngStream rng = base.derive(static_cast<std::uint64_t>(r));
    const RVector z = lik.sample_observation(v_truth, rng);
    const GridPosterior gp = evaluate_constant_posterior(lik, lik.spectral_sq(z),
                                                         prior_psi, prior_nu, grid_points);
    stats[r] = ReplicateStats{gp.mean, gp.variance};
  });
  return stats;
}

}  // namespace detail

// Across-replicate Monte Carlo summary of the posterior of v: `mean` is the
// average posterior mean, `variance` the average posterior variance, and
// `mc_stderr` the standard error of that variance estimate.
inline PosteriorSummary posterior_variance_mc(const PulseCode& code,
                                              const VarianceField& field_truth,
                                              Temperature temperature,
                                              const InverseWishartParams& prior,
                                              int replicates, const RngStream& base,
                                              int workers = 1, int grid_points = 2000) {
  const auto* constant = field_truth.as_constant();
  if (!constant) throw DomainError("posterior_variance_mc runs in constant-field mode");
  const auto stats = detail::constant_posterior_replicates(
      code, temperature, temperature.value() + constant->sigma0_sq, prior, replicates,
      base, workers, grid_points);

  const double n = static_cast<double>(stats.size());
  double mean_of_means = 0.0;
  double mean_of_vars = 0.0;
  for (const auto& s : stats) {
    mean_of_means += s.post_mean;
    mean_of_vars += s.post_var;
  }
  mean_of_means /= n;
  mean_of_vars /= n;
  double sq = 0.0;
  for (const auto& s : stats) {
    sq += (s.post_var - mean_of_vars) * (s.post_var - mean_of_vars);
  }
  const double se = stats.size() > 1 ? std::sqrt(sq / (n * (n - 1.0))) : 0.0;

  PosteriorSummary out;
  out.mean = mean_of_means;
  out.variance = mean_of_vars;
  out.method = SummaryMethod::monte_carlo;
  out.mc_stderr = se;
  return out;
}

// Side-by-side comparison of two codes under a shared truth pipeline: both
// posterior summaries reuse the same replicate substreams, so any summary
// difference reflects the codes, not the noise realizations. `equivalent`
// means the spectral moduli agree to 1e-9.
struct CompareCodesReport {
  double spectral_moduli_gap = 0.0;
  double covariance_gap = 0.0;
  PosteriorSummary summary1;
  PosteriorSummary summary2;
  bool equivalent = false;
};

inline CompareCodesReport compare_codes(const PulseCode& code1, const PulseCode& code2,
                                        const VarianceField& field_truth,
                                        Temperature temperature,
                                        const InverseWishartParams& prior,
                                        int replicates, const RngStream& base,
                                        int workers = 1, int grid_points = 2000) {
  if (code1.d() != code2.d()) throw DimensionError("codes must share the lattice size");
  if (!field_truth.as_constant()) throw DomainError("compare_codes needs a constant truth");

  CompareCodesReport report;
  const Spectrum s1 = spectrum(code1);
  const Spectrum s2 = spectrum(code2);
  report.spectral_moduli_gap = (s1.moduli - s2.moduli).cwiseAbs().maxCoeff();
  report.covariance_gap =
      (signal_covariance(code1, field_truth, temperature).matrix() -
       signal_covariance(code2, field_truth, temperature).matrix())
          .cwiseAbs()
          .maxCoeff();
  report.summary1 = posterior_variance_mc(code1, field_truth, temperature, prior,
                                          replicates, base, workers, grid_points);
  report.summary2 = posterior_variance_mc(code2, field_truth, temperature, prior,
                                          replicates, base, workers, grid_points);
  report.equivalent = report.spectral_moduli_gap < 1e-9;
  return report;
}

struct ContractionRow {
  Eigen::Index d = 0;
  double post_var_mean = 0.0;
  double post_var_se = 0.0;
};

// Mean posterior variance of v = T + sigma0^2 as the lattice grows; truth
// sigma0^2 may be zero here (degenerate noise-free data).
inline std::vector<ContractionRow> contraction_curve(
    const std::function<PulseCode(Eigen::Index)>& code_family, Temperature temperature,
    double sigma0_sq_truth, const std::vector<Eigen::Index>& d_list,
    const InverseWishartParams& prior, int replicates, const RngStream& base,
    int workers = 1, int grid_points = 2000) {
  if (d_list.empty()) throw DomainError("d_list must not be empty");
  for (std::size_t i = 1; i < d_list.size(); ++i) {
    if (!(d_list[i] > d_list[i - 1])) throw DomainError("d_list must be increasing");
  }
  if (!(sigma0_sq_truth >= 0.0)) throw DomainError("truth variance must be >= 0");

  std::vector<ContractionRow> rows;
  rows.reserve(d_list.size());
  for (std::size_t i = 0; i < d_list.size(); ++i) {
    const Eigen::Index d = d_list[i];
    const PulseCode code = code_family(d);
    if (code.d() != d) throw DimensionError("code family produced a wrong lattice size");
    const auto stats = detail::constant_posterior_replicates(
        code, temperature, temperature.value() + sigma0_sq_truth, prior, replicates,
        base.derive(0x434F4E54ULL + i), workers, grid_points);
    const double n = static_cast<double>(stats.size());
    double mean = 0.0;
    for (const auto& s : stats) mean += s.post_var;
    mean /= n;
    double sq = 0.0;
    for (const auto& s : stats) sq += (s.post_var - mean) * (s.post_var - mean);
    rows.push_back(ContractionRow{
        d, mean, stats.size() > 1 ? std::sqrt(sq / (n * (n - 1.0))) : 0.0});
  }
  return rows;
}

// Rescaling diagnostic Z = (v - (c1 + c3) sqrt(d)) / sqrt(d) applied to
// posterior draws; returns the sample mean and variance of Z. Reporting
// only -- the limiting constants are not asserted.
inline std::pair<double, double> clt_rescale_diagnostic(const RVector& posterior_draws,
                                                        Eigen::Index d,
                                                        const std::array<double, 3>& constants) {
  if (posterior_draws.size() < 1) throw DomainError("need at least one posterior draw");
  if (d < 1) throw DomainError("need d >= 1");
  const double root_d = std::sqrt(static_cast<double>(d));
  const double center = (constants[0] + constants[2]) * root_d;
  RVector z = (posterior_draws.array() - center) / root_d;
  const double mean = z.mean();
  if (z.size() == 1) return {mean, 0.0};
  const double var = (z.array() - mean).square().sum() /
                     static_cast<double>(z.size() - 1);
  return {mean, var};
}

// Smallest sup-norm distance between a grid density and any Gaussian pdf,
// found by a deterministic coarse-to-fine search over (mean, sd).
inline double best_gaussian_sup_gap(const RVector& grid, const RVector& density) {
  if (grid.size() != density.size() || grid.size() < 2) {
    throw DimensionError("grid and density must have equal length >= 2");
  }
  const Eigen::Index n = grid.size();
  RVector w(n);
  w[0] = 0.5 * (grid[1] - grid[0]);
  w[n - 1] = 0.5 * (grid[n - 1] - grid[n - 2]);
  for (Eigen::Index i = 1; i + 1 < n; ++i) w[i] = 0.5 * (grid[i + 1] - grid[i - 1]);
  double mu = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) mu += w[i] * grid[i] * density[i];
  double var = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) var += w[i] * (grid[i] - mu) * (grid[i] - mu) * density[i];
  double sd = std::sqrt(std::max(var, 1e-12));

  const auto sup_gap = [&](double m, double s) {
    double worst = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double x = (grid[i] - m) / s;
      const double pdf = std::exp(-0.5 * x * x) / (s * std::sqrt(2.0 * kPi));
      worst = std::max(worst, std::abs(density[i] - pdf));
    }
    return worst;
  };

  double best = std::numeric_limits<double>::infinity();
  double bm = mu;
  double bs = sd;
  double m_half = 2.5 * sd;
  double s_lo = 0.25;
  double s_hi = 4.0;
  for (int round = 0; round < 3; ++round) {
    const int steps = round == 0 ? 41 : 21;
    double round_best = std::numeric_limits<double>::infinity();
    double rm = bm;
    double rs = bs;
    for (int a = 0; a < steps; ++a) {
      const double m = bm - m_half + 2.0 * m_half * a / (steps - 1);
      for (int b = 0; b < steps; ++b) {
        const double s = bs * std::exp(std::log(s_lo) +
                                       (std::log(s_hi) - std::log(s_lo)) * b / (steps - 1));
        const double gap = sup_gap(m, s);
        if (gap < round_best) {
          round_best = gap;
          rm = m;
          rs = s;
        }
      }
    }
    best = std::min(best, round_best);
    bm = rm;
    bs = rs;
    m_half *= 0.25;
    s_lo = 0.7;
    s_hi = 1.0 / 0.7;
  }
  return best;
}

}  // namespace pulsecomp
