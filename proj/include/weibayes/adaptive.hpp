#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "weibayes/priors.hpp"
#include "weibayes/sampler.hpp"
#include "weibayes/weibull.hpp"

namespace weibayes {

/// m draws from the posterior predictive: each picks a posterior draw
/// uniformly and emits one Weibull variate under it.
std::vector<double> posterior_predictive_sample(const PosteriorDraws& draws, std::size_t m, std::uint64_t seed);

/// Binned D_KL(data || predictive) on common log-spaced bins spanning the
/// pooled range, with add-one smoothing of both histograms.
double kl_estimate(std::span<const double> predictive, std::span<const double> data, std::size_t bins = 16);
double kl_estimate(std::span<const double> predictive, const LifetimeSample& data, std::size_t bins = 16);

struct AdaptiveRound {
  std::size_t round = 0;
  double kl = 0.0;
  WeibullParams mean{1.0, 1.0};
  double var_shape = 0.0;
  double var_scale = 0.0;
};

struct AdaptiveState {
  std::size_t round = 0;
  HierarchicalModel current_model;
  double kl_estimate = 0.0;
  std::vector<AdaptiveRound> history;
  bool stopped_early = false;
};

struct AdaptiveOptions {
  /// Posterior predictive draws per KL measurement; 0 means max(1000, 10 n).
  std::size_t predictive_size = 0;
  std::size_t bins = 16;
  /// Relative width of the re-centered hyperpriors.
  double hyper_width = 0.01;
  double min_improvement = 1e-3;
};

/// Prior refit after one round: the same families, moment matched to the
/// posterior marginals, with hyperpriors re-centered on the new values.
HierarchicalModel refit_model(const HierarchicalModel& model, const PosteriorSummary& posterior, double hyper_width);

/// Alternates sampling, KL measurement and prior refitting for up to
/// `rounds` rounds. Stops early when the KL improvement falls below
/// min_improvement in two consecutive rounds.
AdaptiveState adapt(const LifetimeSample& data, const HierarchicalModel& init_model, std::size_t rounds,
                    const SamplerConfig& sampler_config, const AdaptiveOptions& options = {});

/// Columns: round, kl, shape, scale.
void write_trace_csv(std::ostream& os, const AdaptiveState& state);

}  // namespace weibayes
