#pragma once

#include <compare>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "weibayes/estimators.hpp"
#include "weibayes/priors.hpp"
#include "weibayes/weibull.hpp"

namespace weibayes {

/// One of the 27 fitting strategies: a classical method or a (shape prior,
/// scale prior) hierarchical model.
struct ModelId {
  std::optional<ClassicalMethod> method;
  PriorKind shape_prior = PriorKind::Gamma;
  PriorKind scale_prior = PriorKind::Gamma;

  static ModelId classical(ClassicalMethod m) { return ModelId{m, PriorKind::Gamma, PriorKind::Gamma}; }
  static ModelId bayes(PriorKind shape, PriorKind scale) { return ModelId{std::nullopt, shape, scale}; }

  bool is_mcmc() const noexcept { return !method.has_value(); }
  /// "MLE", "Moments", "Regression", or "<shape>-<scale>".
  std::string name() const;
  /// Tie-break key: (shape prior, scale prior, method name); classical rows
  /// have empty prior names.
  std::string sort_key() const;

  friend bool operator==(const ModelId& a, const ModelId& b) {
    if (a.method || b.method) return a.method == b.method;
    return a.shape_prior == b.shape_prior && a.scale_prior == b.scale_prior;
  }
};

/// Classical methods first, then the 24 prior pairs in enumeration order.
std::vector<ModelId> all_models();

/// Accepts "mle", "moments", "regression" (or "ols") and prior pairs such as
/// "Gamma-HalfCauchy", case-insensitive.
std::optional<ModelId> parse_model_id(std::string_view text);

struct FitRecord {
  ModelId model;
  WeibullParams estimate{1.0, 1.0};
  double sampling_variance_total = 0.0;
  double asymptotic_variance_total = 0.0;
  std::string dataset_id;
};

struct GroupKey {
  HazardTag regime = HazardTag::Unknown;
  std::size_t n = 0;
  auto operator<=>(const GroupKey&) const = default;
};

struct EfficiencyReport {
  std::string dataset_id;
  GroupKey key;
  double true_shape = 0.0;
  std::vector<FitRecord> records;
  std::vector<std::optional<double>> wre;  // aligned with records; empty when undefined
  std::vector<std::string> warnings;

  std::optional<double> wre_of(const ModelId& m) const;
};

/// WRE_i = (s_i / sum s) / (V_i / sum V). Records with negative V are
/// excluded from both sums and get no value. Throws AggregationError on a
/// wrong record count, duplicate models, non-finite inputs or zero sums.
std::vector<std::optional<double>> wre(std::span<const FitRecord> records,
                                       std::optional<std::size_t> expected_count = 27,
                                       std::vector<std::string>* warnings = nullptr);

EfficiencyReport make_report(std::vector<FitRecord> records, GroupKey key, std::optional<std::size_t> expected_count,
                             double true_shape = 0.0);

struct AwreEntry {
  ModelId model;
  double awre = 0.0;
  std::size_t datasets = 0;
};

/// Mean WRE per model over the reports matching `key`, in first-seen model
/// order. Throws AggregationError for an empty group.
std::vector<AwreEntry> awre(std::span<const EfficiencyReport> reports, const GroupKey& key);

/// Unweighted componentwise mean of the point estimates.
WeibullParams integrated_estimate(std::span<const FitRecord> records, std::optional<std::size_t> expected_count = 27);

/// Models with a defined WRE, ascending, ties broken by sort_key().
std::vector<ModelId> rank_models(const EfficiencyReport& report);

enum class TableFormat { Csv, Markdown };

/// Columns: n, hazard, true_shape, method, shape_prior, scale_prior, shape, scale, sampling_variance, V, WRE.
void write_wre_table(std::ostream& os, std::span<const EfficiencyReport> reports, TableFormat format);

/// Columns: n, hazard, method, shape_prior, scale_prior, AWRE, datasets.
void write_awre_table(std::ostream& os, std::span<const std::pair<GroupKey, std::vector<AwreEntry>>> groups,
                      TableFormat format);

}  // namespace weibayes
