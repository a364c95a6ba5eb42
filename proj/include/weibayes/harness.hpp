#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "weibayes/efficiency.hpp"
#include "weibayes/estimators.hpp"
#include "weibayes/sampler.hpp"
#include "weibayes/weibull.hpp"

namespace weibayes {

using Logger = std::function<void(std::string_view)>;

struct StudyConfig {
  std::vector<std::size_t> sample_sizes = {15, 25, 55, 100};
  std::vector<double> dhr_shapes = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  std::vector<double> ihr_shapes = {1.1, 1.2, 1.3, 1.4, 1.5, 1.6, 1.7, 1.8, 1.9};
  double scale = 1.0;
  std::vector<ModelId> models = all_models();
  SamplerConfig sampler;
  std::size_t bootstrap_B = 1000;
  std::uint64_t seed = 20240917;
  std::string output_dir = "weibayes_out";
  /// Worker threads for the dataset x model grid; 0 means one per core.
  std::size_t threads = 0;

  /// Throws ConfigError.
  void validate() const;
  std::size_t dataset_count() const noexcept {
    return sample_sizes.size() * (dhr_shapes.size() + ihr_shapes.size());
  }

  /// JSON with the field names above; missing keys keep their defaults.
  static StudyConfig from_json(std::string_view text);
  static StudyConfig load(const std::filesystem::path& path);
  std::string to_json() const;
  /// FNV-1a of to_json().
  std::uint64_t hash() const;
};

/// Output directory after the WEIBAYES_OUT environment override.
std::filesystem::path resolve_output_dir(const StudyConfig& config);

struct DatasetSpec {
  HazardTag regime = HazardTag::Unknown;
  double shape = 1.0;
  std::size_t n = 0;
  std::string id;
};

/// DHR grid first, then IHR; sample sizes vary fastest.
std::vector<DatasetSpec> dataset_specs(const StudyConfig& config);

/// One dataset per spec, simulated with a seed derived from the study seed
/// and the dataset index. Throws ConfigError for an invalid grid.
std::vector<LifetimeSample> generate_datasets(const StudyConfig& config);

struct ModelFit {
  FitRecord record;
  std::optional<PosteriorSummary> posterior;
  std::optional<BootstrapSummary> bootstrap;
};

/// Fits one model. MCMC models are initialized from `mle_bootstrap`.
ModelFit fit_model(const ModelId& model, const LifetimeSample& data, const BootstrapSummary& mle_bootstrap,
                   const StudyConfig& config, std::uint64_t seed);

struct StudyReport {
  std::vector<EfficiencyReport> datasets;
  std::vector<std::pair<GroupKey, std::vector<AwreEntry>>> awre;
  std::vector<std::string> failures;
  std::vector<std::string> warnings;
  double runtime_seconds = 0.0;
};

StudyReport run_study(const StudyConfig& config, const Logger& log = {});

/// report/wre_<regime>_<n>.csv, report/awre.csv (plus .md twins when
/// format is Markdown), figures/efficiency_trends.svg and manifest.json.
void write_study_outputs(const StudyReport& report, const StudyConfig& config, const std::filesystem::path& out,
                         TableFormat format);

/// The 90 recorded survival times, zeros included.
std::span<const double> prostate_raw_times();
/// FNV-1a over the raw times printed with %g and joined by spaces.
std::uint64_t prostate_data_hash();

/// "prostate" selects the embedded dataset; an existing file path is read;
/// anything else is parsed as inline text. Values may be separated by
/// commas, whitespace or newlines. Nonpositive values are dropped and counted.
LifetimeSample load_lifetimes(std::string_view source, std::size_t* excluded = nullptr, const Logger& log = {});
LifetimeSample parse_lifetimes(std::string_view text, std::size_t* excluded = nullptr, const Logger& log = {});

struct ErrorBar {
  ModelId model;
  double shape = 0.0;
  double shape_lo = 0.0;
  double shape_hi = 0.0;
  double scale = 0.0;
  double scale_lo = 0.0;
  double scale_hi = 0.0;
};

struct MrlRow {
  double time = 0.0;
  double integrated = 0.0;
  std::vector<double> percent_deviation;  // aligned with ProstateReport::mrl_models
};

struct ProstateReport {
  LifetimeSample data{std::vector<double>{1.0}};
  std::vector<ModelFit> fits;
  EfficiencyReport efficiency;
  WeibullParams integrated{1.0, 1.0};
  EpsteinResult epstein;
  std::vector<ErrorBar> error_bars;
  std::vector<ModelId> mrl_models;
  std::vector<MrlRow> mrl;
};

inline constexpr std::array<double, 10> kMrlTimes = {2, 12, 17, 26, 28, 30, 35, 37, 42, 48};

/// Signed percent deviation of MRL under `p` from MRL under `reference`.
double mrl_percent_deviation(double t, const WeibullParams& p, const WeibullParams& reference);

ProstateReport prostate_report(const StudyConfig& config, const Logger& log = {});

/// report/prostate_estimates.csv, report/mrl.csv, figures/error_bars.svg, figures/mrl_curves.svg.
void write_prostate_outputs(const ProstateReport& report, const std::filesystem::path& out, TableFormat format);

struct PpcTable {
  std::vector<double> levels;
  std::vector<double> observed;
  std::vector<double> lower;
  std::vector<double> median;
  std::vector<double> upper;
  std::size_t replicates = 0;

  /// Levels whose observed quantile lies inside [lower, upper].
  std::size_t covered() const noexcept;
};

/// Posterior predictive check: `replicates` datasets of the data's size,
/// each drawn under one uniformly chosen posterior draw; quantiles at
/// levels (k - 0.5) / bins; 95% band across replicates.
PpcTable ppc(const PosteriorDraws& draws, const LifetimeSample& data, std::size_t bins, std::uint64_t seed,
             std::size_t replicates = 100);

void write_ppc_csv(std::ostream& os, const PpcTable& table);
std::string ppc_svg(const PpcTable& table);

/// Plain linear-interpolation empirical quantile of sorted values.
double empirical_quantile(std::span<const double> sorted, double p);

}  // namespace weibayes
