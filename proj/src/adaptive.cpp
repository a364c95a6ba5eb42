#include "weibayes/adaptive.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "weibayes/error.hpp"
#include "weibayes/rng.hpp"

namespace weibayes {
namespace {

void recenter(std::vector<HyperSlot>& slots, const std::vector<double>& values, double width) {
  for (std::size_t i = 0; i < slots.size(); ++i) {
    HyperSlot& s = slots[i];
    s.init = values[i];
    if (s.role == HyperRole::Positive) {
      s.hyperprior = Hyperprior{std::log(values[i]), width};
    } else {
      const double spread = values.size() > 1 ? values[1] : 1.0;
      s.hyperprior = Hyperprior{values[i], width * std::max(std::abs(values[i]), spread)};
    }
  }
}

std::vector<double> matched(PriorKind kind, double mean, double var) {
  // A collapsed posterior still needs a proper prior.
  return moment_match(kind, mean, std::max(var, 1e-12 * mean * mean));
}

}  // namespace

std::vector<double> posterior_predictive_sample(const PosteriorDraws& draws, std::size_t m, std::uint64_t seed) {
  if (m == 0) throw DomainError("posterior_predictive_sample: m must be at least 1");
  if (!draws.has_weibull() || draws.shape.empty()) throw DomainError("posterior_predictive_sample: no draws");
  Rng rng(seed);
  std::vector<double> out;
  out.reserve(m);
  while (out.size() < m) {
    const std::size_t k = rng.index(draws.shape.size());
    const double t = draws.scale[k] * std::pow(-std::log(rng.uniform()), 1.0 / draws.shape[k]);
    if (t > 0.0 && std::isfinite(t)) out.push_back(t);
  }
  return out;
}

double kl_estimate(std::span<const double> predictive, std::span<const double> data, std::size_t bins) {
  if (predictive.empty() || data.empty()) throw DomainError("kl_estimate: empty input");
  if (predictive.size() < 50) throw DomainError("kl_estimate: at least 50 predictive samples are required");
  if (data.size() < 5) throw DomainError("kl_estimate: at least 5 data points are required");
  if (bins == 0) throw ConfigError("kl_estimate: bins must be positive");

  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto xs : {predictive, data}) {
    for (const double x : xs) {
      if (!(x > 0.0) || !std::isfinite(x)) throw DomainError("kl_estimate: samples must be positive and finite");
      lo = std::min(lo, std::log(x));
      hi = std::max(hi, std::log(x));
    }
  }
  if (!(hi > lo)) return 0.0;

  const double width = (hi - lo) / static_cast<double>(bins);
  auto histogram = [&](std::span<const double> xs) {
    std::vector<double> counts(bins, 1.0);
    for (const double x : xs) {
      const auto b = static_cast<std::size_t>((std::log(x) - lo) / width);
      counts[std::min(b, bins - 1)] += 1.0;
    }
    const double total = static_cast<double>(xs.size() + bins);
    for (double& c : counts) c /= total;
    return counts;
  };
  const std::vector<double> p = histogram(data);
  const std::vector<double> q = histogram(predictive);
  double kl = 0.0;
  for (std::size_t i = 0; i < bins; ++i) kl += p[i] * std::log(p[i] / q[i]);
  return std::max(kl, 0.0);
}

double kl_estimate(std::span<const double> predictive, const LifetimeSample& data, std::size_t bins) {
  return kl_estimate(predictive, data.times(), bins);
}

HierarchicalModel refit_model(const HierarchicalModel& model, const PosteriorSummary& posterior, double hyper_width) {
  if (!(hyper_width > 0.0)) throw ConfigError("refit_model: hyperprior width must be positive");
  HierarchicalModel next = model;
  next.init = posterior.mean_estimate;
  recenter(next.shape_hypers, matched(model.shape_kind, posterior.mean_estimate.shape(), posterior.var_shape),
           hyper_width);
  recenter(next.scale_hypers, matched(model.scale_kind, posterior.mean_estimate.scale(), posterior.var_scale),
           hyper_width);
  return next;
}

AdaptiveState adapt(const LifetimeSample& data, const HierarchicalModel& init_model, std::size_t rounds,
                    const SamplerConfig& sampler_config, const AdaptiveOptions& options) {
  if (rounds == 0) throw ConfigError("adapt: rounds must be at least 1");
  AdaptiveState state;
  state.current_model = init_model;
  const std::size_t m = options.predictive_size > 0 ? options.predictive_size : std::max<std::size_t>(1000, 10 * data.size());

  std::size_t stalled = 0;
  for (std::size_t r = 1; r <= rounds; ++r) {
    SamplerConfig cfg = sampler_config;
    cfg.seed = derive_seed(sampler_config.seed, r);
    PosteriorDraws draws;
    try {
      draws = nuts_sample(state.current_model, data, cfg);
    } catch (const SamplerError& e) {
      throw SamplerError("adaptive round " + std::to_string(r) + ": " + e.what());
    }
    const PosteriorSummary summary = summarize(draws, data.size());
    const std::vector<double> predictive = posterior_predictive_sample(draws, m, derive_seed(sampler_config.seed, r, 1));
    const double kl = kl_estimate(predictive, data, options.bins);

    if (!state.history.empty()) {
      stalled = state.history.back().kl - kl < options.min_improvement ? stalled + 1 : 0;
    }
    state.history.push_back({r, kl, summary.mean_estimate, summary.var_shape, summary.var_scale});
    state.round = r;
    state.kl_estimate = kl;
    state.current_model = refit_model(state.current_model, summary, options.hyper_width);
    if (stalled >= 2 && r < rounds) {
      state.stopped_early = true;
      break;
    }
  }
  return state;
}

void write_trace_csv(std::ostream& os, const AdaptiveState& state) {
  os << "round,kl,shape,scale\n";
  const auto old_precision = os.precision(10);
  for (const auto& h : state.history) {
    os << h.round << ',' << h.kl << ',' << h.mean.shape() << ',' << h.mean.scale() << '\n';
  }
  os.precision(old_precision);
}

}  // namespace weibayes
