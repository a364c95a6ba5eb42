#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "weibayes/estimators.hpp"
#include "weibayes/log_density.hpp"
#include "weibayes/weibull.hpp"

namespace weibayes {

enum class PriorKind { Exponential, Gamma, LogNormal, HalfNormal, HalfCauchy, InverseGamma };

inline constexpr std::array<PriorKind, 4> kShapePriorKinds = {PriorKind::Exponential, PriorKind::Gamma,
                                                              PriorKind::LogNormal, PriorKind::HalfNormal};
inline constexpr std::array<PriorKind, 6> kScalePriorKinds = {
    PriorKind::Exponential, PriorKind::Gamma,      PriorKind::LogNormal,
    PriorKind::HalfNormal,  PriorKind::HalfCauchy, PriorKind::InverseGamma};

std::string_view to_string(PriorKind kind) noexcept;
std::optional<PriorKind> parse_prior_kind(std::string_view name) noexcept;

/// HalfCauchy and InverseGamma are used for the scale parameter only.
bool admissible_for_shape(PriorKind kind) noexcept;

/// Whether a hyperparameter is sampled on the log scale (positive) or as is (location).
enum class HyperRole { Positive, Location };

/// Number and roles of a family's hyperparameters, in the order moment_match returns them:
/// Exponential (rate), Gamma (shape a, rate b), LogNormal (mu, sigma),
/// HalfNormal (mu, sigma), HalfCauchy (mu, sigma), InverseGamma (shape a, scale b).
std::span<const HyperRole> hyper_roles(PriorKind kind) noexcept;
std::span<const std::string_view> hyper_names(PriorKind kind) noexcept;

struct PriorFamily {
  PriorKind kind;
  std::vector<double> hyperparams;
};

/// Hyperparameters whose prior has the requested mean and variance
/// (location-scale assignment for HalfNormal and HalfCauchy).
std::vector<double> moment_match(PriorKind kind, double mean, double variance);

/// Log density of a prior and its derivatives with respect to the value and
/// each hyperparameter. Non-throwing; -inf outside the support.
struct PriorTerms {
  double value = 0.0;
  double d_value = 0.0;
  std::array<double, 2> d_hyper{};
};
PriorTerms log_prior_terms(PriorKind kind, std::span<const double> hyper, double value) noexcept;

/// Validated log density; throws DomainError for value <= 0 or bad hyperparameters.
double log_prior(const PriorFamily& family, double value);

/// Weakly informative prior on one hyperparameter: LogNormal(location, scale)
/// for positive hyperparameters, Normal(location, scale) for locations.
/// The scale is a standard deviation.
struct Hyperprior {
  double location = 0.0;
  double scale = 25.0;
};

inline constexpr Hyperprior kDefaultPositiveHyperprior{0.0, 25.0};
inline constexpr Hyperprior kDefaultLocationHyperprior{0.0, 100.0};

struct HyperSlot {
  std::string name;
  HyperRole role = HyperRole::Positive;
  Hyperprior hyperprior;
  double init = 1.0;
};

/// data ~ Weibull(beta, alpha); beta ~ shape family; alpha ~ scale family;
/// every family hyperparameter carries its own hyperprior.
struct HierarchicalModel {
  PriorKind shape_kind = PriorKind::Gamma;
  PriorKind scale_kind = PriorKind::Gamma;
  std::vector<HyperSlot> shape_hypers;
  std::vector<HyperSlot> scale_hypers;
  WeibullParams init{1.0, 1.0};

  std::string name() const;
  std::size_t dimension() const noexcept { return 2 + shape_hypers.size() + scale_hypers.size(); }

  /// Unconstrained layout: [log beta, log alpha, shape hypers..., scale hypers...],
  /// with positive hyperparameters on the log scale.
  std::vector<double> initial_point() const;
  std::vector<double> constrain(std::span<const double> unconstrained) const;
  std::vector<double> unconstrain(std::span<const double> constrained) const;

  std::string to_text() const;
  static HierarchicalModel from_text(std::string_view text);
};

/// Model whose hyperparameters start at the moment-matched values of the
/// bootstrap mean and variances, with default LogNormal(0, 25) / Normal(0, 100)
/// hyperpriors. Throws ConfigError for an inadmissible combination.
HierarchicalModel build_model(PriorKind shape_kind, PriorKind scale_kind, const BootstrapSummary& init);
HierarchicalModel build_model(PriorKind shape_kind, PriorKind scale_kind, const WeibullParams& mean,
                              double var_shape, double var_scale);

/// All 4 x 6 admissible (shape, scale) prior pairs.
std::vector<std::pair<PriorKind, PriorKind>> admissible_combinations();

struct PosteriorEval {
  double value = 0.0;
  std::vector<double> gradient;
  double log_likelihood = 0.0;
  double log_prior = 0.0;
  double log_hyperprior = 0.0;
  double log_jacobian = 0.0;
};

/// Unnormalized log posterior in unconstrained coordinates with its analytic
/// gradient. A non-finite intermediate yields value = -inf.
PosteriorEval log_posterior(const HierarchicalModel& model, std::span<const double> unconstrained,
                            const LifetimeSample& data);

/// Sampler adapter over a model and a dataset (both held by reference).
class WeibullPosterior final : public LogDensity {
 public:
  WeibullPosterior(const HierarchicalModel& model, const LifetimeSample& data) : model_(model), data_(data) {}

  std::size_t dimension() const override { return model_.dimension(); }
  double evaluate(std::span<const double> q, std::span<double> grad) const override;
  std::vector<double> initial_point() const override { return model_.initial_point(); }
  std::optional<WeibullParams> weibull_params(std::span<const double> q) const override;

 private:
  const HierarchicalModel& model_;
  const LifetimeSample& data_;
};

}  // namespace weibayes
