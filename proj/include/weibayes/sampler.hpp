#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "weibayes/log_density.hpp"
#include "weibayes/priors.hpp"
#include "weibayes/weibull.hpp"

namespace weibayes {

struct SamplerConfig {
  std::size_t iterations = 2000;
  std::size_t warmup = 1000;
  std::size_t chains = 4;
  double target_accept = 0.8;
  int max_tree_depth = 10;
  std::uint64_t seed = 20240917;
  /// Uniform jitter half-width applied to the initial point, per coordinate.
  double init_jitter = 0.5;
  /// When set, the step size is held fixed and no adaptation takes place.
  std::optional<double> fixed_step_size;
  /// Run chains on separate threads. Results do not depend on this flag.
  bool parallel = true;

  /// Throws ConfigError.
  void validate() const;
  std::size_t kept() const noexcept { return iterations - warmup; }
};

/// Post-warmup draws. Arrays are chain-major: element (c, i) lives at
/// c * kept + i, and unconstrained coordinate d at (c * kept + i) * dim + d.
struct PosteriorDraws {
  std::size_t chains = 0;
  std::size_t kept = 0;
  std::size_t dim = 0;
  std::vector<double> unconstrained;
  std::vector<double> shape;  // empty when the target carries no Weibull parameters
  std::vector<double> scale;
  std::vector<double> energy;
  std::vector<double> accept;
  std::vector<std::uint8_t> divergent;
  std::vector<int> tree_depth;
  std::vector<double> step_size;  // adapted value, one per chain
  std::vector<double> inv_metric; // chains x dim diagonal
  std::size_t divergence_count = 0;
  std::size_t warmup_divergences = 0;
  double accept_stat = 0.0;

  double at(std::size_t chain, std::size_t iter, std::size_t d) const {
    return unconstrained[(chain * kept + iter) * dim + d];
  }
  bool has_weibull() const noexcept { return !shape.empty(); }
  /// One series per chain for unconstrained coordinate d.
  std::vector<std::vector<double>> coordinate(std::size_t d) const;
  std::vector<std::vector<double>> shape_chains() const;
  std::vector<std::vector<double>> scale_chains() const;
};

struct PhasePoint {
  std::vector<double> q;
  std::vector<double> p;
  std::vector<double> grad;  // gradient of the log density at q
  double log_density = 0.0;
};

/// One leapfrog step of size eps for H = -log pi(q) + p' M^-1 p / 2 with a
/// diagonal inverse metric. Returns false when the new point is rejected by
/// the target or has non-finite values; the state is then unusable.
bool leapfrog(PhasePoint& z, double eps, const LogDensity& target, std::span<const double> inv_metric);

/// -log pi(q) + kinetic energy.
double hamiltonian(const PhasePoint& z, std::span<const double> inv_metric);

PosteriorDraws nuts_sample(const LogDensity& target, const SamplerConfig& config);
PosteriorDraws nuts_sample(const HierarchicalModel& model, const LifetimeSample& data, const SamplerConfig& config);

/// Split-chain potential scale reduction. Requires >= 2 chains of equal
/// length >= 4. Throws DiagnosticError when the within-chain variance is zero.
double r_hat(const std::vector<std::vector<double>>& chains);

/// Multi-chain effective sample size with Geyer's initial monotone sequence.
double ess(const std::vector<std::vector<double>>& chains);

/// Per-coordinate diagnostics: entries 0 and 1 are beta and alpha on their
/// natural scale, the rest are the unconstrained hyperparameters.
std::vector<double> r_hat(const PosteriorDraws& draws);
std::vector<double> ess(const PosteriorDraws& draws);

struct PosteriorSummary {
  WeibullParams mean_estimate{1.0, 1.0};
  double var_shape = 0.0;
  double var_scale = 0.0;
  double total_asymptotic_variance = 0.0;
  std::vector<double> r_hat;
  std::vector<double> ess;
  std::size_t divergences = 0;
  double accept_stat = 0.0;

  double sampling_variance_total() const noexcept { return var_shape + var_scale; }
  double max_r_hat() const noexcept;
  double min_ess() const noexcept;
};

/// Pooled posterior mean and variance of (beta, alpha). A coordinate with
/// no variance anywhere gets r_hat 1; chains frozen at different values get +inf.
PosteriorSummary summarize(const PosteriorDraws& draws, std::size_t n_data);

/// Columns: chain, iteration, shape, scale, energy, divergent.
void write_draws_csv(std::ostream& os, const PosteriorDraws& draws);

}  // namespace weibayes
