#include "weibayes/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "svg.hpp"
#include "weibayes/error.hpp"
#include "weibayes/kernels.hpp"
#include "weibayes/rng.hpp"

namespace weibayes {
namespace {

using nlohmann::ordered_json;

constexpr double kProstateRaw[] = {
    0,  0,  0,  2,  3,  4,  6,  7,  7,  8,  9,  9,  11, 11, 11, 12, 12, 12,  15,  15,  16,  16,  16,
    17, 17, 18, 19, 19, 20, 21, 22, 22, 23, 24, 25, 25, 26, 26, 26, 27, 27,  28,  28,  29,  29,  30,
    31, 32, 32, 32, 33, 33, 34, 35, 36, 37, 37, 38, 40, 41, 41, 42, 42, 43,  45,  45,  45,  46,  47,
    47, 48, 48, 51, 53, 53, 54, 54, 57, 60, 61, 62, 62, 67, 69, 87, 97, 97, 100, 145, 158};

// Stream tags for derive_seed, one per kind of random work.
enum SeedTag : std::uint64_t { kDatasetTag = 1, kMleBootstrapTag = 2, kCellTag = 3, kProstateTag = 4 };

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string fmt(double v, int digits) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

std::string hex(std::uint64_t v) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out)
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  return out;
}

std::size_t model_index(const ModelId& m) {
  const auto all = all_models();
  return static_cast<std::size_t>(std::find(all.begin(), all.end(), m) - all.begin());
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw RuntimeFailure("cannot write " + path.string());
  f << content;
}

// Runs fn(i) for i in [0, n) on up to `threads` workers.
template <class Fn>
void parallel_for(std::size_t n, std::size_t threads, Fn fn) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, n);
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

ordered_json sampler_to_json(const SamplerConfig& s) {
  ordered_json j;
  j["iterations"] = s.iterations;
  j["warmup"] = s.warmup;
  j["chains"] = s.chains;
  j["target_accept"] = s.target_accept;
  j["max_tree_depth"] = s.max_tree_depth;
  return j;
}

void sampler_from_json(const nlohmann::json& j, SamplerConfig& s) {
  if (j.contains("iterations")) s.iterations = j.at("iterations").get<std::size_t>();
  if (j.contains("warmup")) s.warmup = j.at("warmup").get<std::size_t>();
  if (j.contains("chains")) s.chains = j.at("chains").get<std::size_t>();
  if (j.contains("target_accept")) s.target_accept = j.at("target_accept").get<double>();
  if (j.contains("max_tree_depth")) s.max_tree_depth = j.at("max_tree_depth").get<int>();
  if (j.contains("seed")) s.seed = j.at("seed").get<std::uint64_t>();
}

std::string shape_tag(double shape) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", shape);
  return buf;
}

}  // namespace

void StudyConfig::validate() const {
  if (sample_sizes.empty()) throw ConfigError("study: sample_sizes is empty");
  for (const std::size_t n : sample_sizes)
    if (n < 2) throw ConfigError("study: sample sizes must be at least 2");
  if (dhr_shapes.empty() && ihr_shapes.empty()) throw ConfigError("study: both shape grids are empty");
  for (const double s : dhr_shapes)
    if (!(s > 0.0 && s < 1.0)) throw ConfigError("study: DHR shape " + shape_tag(s) + " is not in (0, 1)");
  for (const double s : ihr_shapes)
    if (!(s > 1.0) || !std::isfinite(s)) throw ConfigError("study: IHR shape " + shape_tag(s) + " is not above 1");
  if (!(scale > 0.0) || !std::isfinite(scale)) throw ConfigError("study: scale must be positive");
  if (models.empty()) throw ConfigError("study: no models selected");
  for (std::size_t i = 0; i < models.size(); ++i)
    for (std::size_t j = 0; j < i; ++j)
      if (models[i] == models[j]) throw ConfigError("study: duplicate model " + models[i].name());
  if (bootstrap_B < 100) throw ConfigError("study: bootstrap_B must be at least 100");
  sampler.validate();
}

StudyConfig StudyConfig::from_json(std::string_view text) {
  StudyConfig c;
  try {
    const nlohmann::json j = nlohmann::json::parse(text);
    if (!j.is_object()) throw ConfigError("study config: expected a JSON object");
    if (j.contains("sample_sizes")) c.sample_sizes = j.at("sample_sizes").get<std::vector<std::size_t>>();
    if (j.contains("shape_grids")) {
      const auto& g = j.at("shape_grids");
      c.dhr_shapes = g.contains("DHR") ? g.at("DHR").get<std::vector<double>>() : std::vector<double>{};
      c.ihr_shapes = g.contains("IHR") ? g.at("IHR").get<std::vector<double>>() : std::vector<double>{};
    }
    if (j.contains("scale")) c.scale = j.at("scale").get<double>();
    if (j.contains("models")) {
      const auto& m = j.at("models");
      if (m.is_string() && lower(m.get<std::string>()) == "all") {
        c.models = all_models();
      } else {
        c.models.clear();
        for (const auto& e : m) {
          const auto id = parse_model_id(e.get<std::string>());
          if (!id) throw ConfigError("study config: unknown model '" + e.get<std::string>() + "'");
          c.models.push_back(*id);
        }
      }
    }
    if (j.contains("sampler")) sampler_from_json(j.at("sampler"), c.sampler);
    if (j.contains("bootstrap_B")) c.bootstrap_B = j.at("bootstrap_B").get<std::size_t>();
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("output_dir")) c.output_dir = j.at("output_dir").get<std::string>();
    if (j.contains("threads")) c.threads = j.at("threads").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("study config: ") + e.what());
  }
  c.validate();
  return c;
}

StudyConfig StudyConfig::load(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read config file " + path.string());
  std::stringstream ss;
  ss << f.rdbuf();
  return from_json(ss.str());
}

std::string StudyConfig::to_json() const {
  ordered_json j;
  j["sample_sizes"] = sample_sizes;
  j["shape_grids"] = {{"DHR", dhr_shapes}, {"IHR", ihr_shapes}};
  j["scale"] = scale;
  std::vector<std::string> names;
  for (const auto& m : models) names.push_back(m.name());
  j["models"] = names;
  j["sampler"] = sampler_to_json(sampler);
  j["bootstrap_B"] = bootstrap_B;
  j["seed"] = seed;
  return j.dump(2);
}

std::uint64_t StudyConfig::hash() const { return fnv1a(to_json()); }

std::filesystem::path resolve_output_dir(const StudyConfig& config) {
  if (const char* env = std::getenv("WEIBAYES_OUT"); env && *env) return env;
  return config.output_dir;
}

std::vector<DatasetSpec> dataset_specs(const StudyConfig& config) {
  std::vector<DatasetSpec> out;
  for (const auto& [tag, grid] : {std::pair{HazardTag::DHR, &config.dhr_shapes}, {HazardTag::IHR, &config.ihr_shapes}}) {
    for (const double shape : *grid) {
      for (const std::size_t n : config.sample_sizes) {
        out.push_back({tag, shape, n, std::string(to_string(tag)) + "_shape" + shape_tag(shape) + "_n" + std::to_string(n)});
      }
    }
  }
  return out;
}

std::vector<LifetimeSample> generate_datasets(const StudyConfig& config) {
  config.validate();
  const auto specs = dataset_specs(config);
  std::vector<LifetimeSample> out;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    out.push_back(sample(WeibullParams(specs[i].shape, config.scale), specs[i].n, derive_seed(config.seed, kDatasetTag, i),
                         specs[i].id, specs[i].regime));
  }
  return out;
}

ModelFit fit_model(const ModelId& model, const LifetimeSample& data, const BootstrapSummary& mle_bootstrap,
                   const StudyConfig& config, std::uint64_t seed) {
  ModelFit fit;
  fit.record.model = model;
  fit.record.dataset_id = data.label();
  if (!model.is_mcmc()) {
    const BootstrapSummary bs = *model.method == ClassicalMethod::MLE
                                    ? mle_bootstrap
                                    : bootstrap(data, *model.method, config.bootstrap_B, seed);
    fit.record.estimate = bs.mean_estimate;
    fit.record.sampling_variance_total = bs.sampling_variance_total();
    fit.record.asymptotic_variance_total = bs.total_asymptotic_variance;
    fit.bootstrap = bs;
    return fit;
  }
  const HierarchicalModel hm = build_model(model.shape_prior, model.scale_prior, mle_bootstrap);
  SamplerConfig sc = config.sampler;
  sc.seed = seed;
  const PosteriorDraws draws = nuts_sample(hm, data, sc);
  const PosteriorSummary s = summarize(draws, data.size());
  fit.record.estimate = s.mean_estimate;
  fit.record.sampling_variance_total = s.sampling_variance_total();
  fit.record.asymptotic_variance_total = s.total_asymptotic_variance;
  fit.posterior = s;
  return fit;
}

StudyReport run_study(const StudyConfig& config, const Logger& log) {
  const auto start = std::chrono::steady_clock::now();
  config.validate();
  const auto specs = dataset_specs(config);
  const auto datasets = generate_datasets(config);
  const std::size_t n_models = config.models.size();

  std::vector<std::optional<BootstrapSummary>> mle(datasets.size());
  std::vector<std::string> mle_error(datasets.size());
  parallel_for(datasets.size(), config.threads, [&](std::size_t d) {
    try {
      mle[d] = bootstrap(datasets[d], ClassicalMethod::MLE, config.bootstrap_B, derive_seed(config.seed, kMleBootstrapTag, d));
    } catch (const std::exception& e) {
      mle_error[d] = e.what();
    }
  });

  struct Cell {
    std::optional<ModelFit> fit;
    std::string error;
  };
  std::vector<Cell> cells(datasets.size() * n_models);
  std::mutex log_mutex;
  std::atomic<std::size_t> done{0};
  StudyConfig cell_config = config;
  // Grid-level parallelism replaces chain-level threads.
  cell_config.sampler.parallel = config.threads == 1;
  parallel_for(cells.size(), config.threads, [&](std::size_t k) {
    const std::size_t d = k / n_models;
    const ModelId& m = config.models[k % n_models];
    Cell& cell = cells[k];
    if (!mle[d]) {
      cell.error = "MLE bootstrap failed: " + mle_error[d];
    } else {
      try {
        cell.fit = fit_model(m, datasets[d], *mle[d], cell_config, derive_seed(config.seed, kCellTag, d * 64 + model_index(m)));
      } catch (const std::exception& e) {
        cell.error = e.what();
      }
    }
    const std::size_t finished = ++done;
    if (log) {
      std::lock_guard lock(log_mutex);
      log(std::to_string(finished) + "/" + std::to_string(cells.size()) + " " + specs[d].id + " " + m.name() +
          (cell.error.empty() ? "" : " failed: " + cell.error));
    }
  });

  StudyReport report;
  for (std::size_t d = 0; d < datasets.size(); ++d) {
    std::vector<FitRecord> records;
    for (std::size_t i = 0; i < n_models; ++i) {
      const Cell& cell = cells[d * n_models + i];
      if (!cell.fit) {
        report.failures.push_back(specs[d].id + ": " + config.models[i].name() + ": " + cell.error);
        continue;
      }
      records.push_back(cell.fit->record);
      if (cell.fit->posterior) {
        const auto& p = *cell.fit->posterior;
        const double worst = std::max(p.r_hat[0], p.r_hat[1]);
        if (!(worst < 1.01)) {
          report.warnings.push_back(specs[d].id + ": " + config.models[i].name() + ": R-hat(shape, scale) " +
                                    fmt(p.r_hat[0], 4) + ", " + fmt(p.r_hat[1], 4));
        }
        if (p.divergences > 0) {
          report.warnings.push_back(specs[d].id + ": " + config.models[i].name() + ": " +
                                    std::to_string(p.divergences) + " divergent transitions");
        }
      }
    }
    if (records.size() < 2) {
      report.failures.push_back(specs[d].id + ": fewer than two successful fits; no efficiency report");
      continue;
    }
    try {
      EfficiencyReport rep = make_report(std::move(records), GroupKey{specs[d].regime, specs[d].n}, std::nullopt,
                                         specs[d].shape);
      rep.dataset_id = specs[d].id;
      for (const auto& w : rep.warnings) report.warnings.push_back(w);
      report.datasets.push_back(std::move(rep));
    } catch (const AggregationError& e) {
      report.failures.push_back(specs[d].id + ": " + e.what());
    }
  }

  std::vector<GroupKey> keys;
  for (const auto& rep : report.datasets)
    if (std::find(keys.begin(), keys.end(), rep.key) == keys.end()) keys.push_back(rep.key);
  std::sort(keys.begin(), keys.end());
  for (const auto& key : keys) report.awre.emplace_back(key, awre(report.datasets, key));

  report.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

void write_study_outputs(const StudyReport& report, const StudyConfig& config, const std::filesystem::path& out,
                         TableFormat format) {
  std::vector<GroupKey> keys;
  for (const auto& [key, entries] : report.awre) keys.push_back(key);
  for (const auto& key : keys) {
    std::vector<EfficiencyReport> group;
    for (const auto& rep : report.datasets)
      if (rep.key == key) group.push_back(rep);
    const std::string stem = "report/wre_" + lower(to_string(key.regime)) + "_" + std::to_string(key.n);
    std::ostringstream csv;
    write_wre_table(csv, group, TableFormat::Csv);
    write_file(out / (stem + ".csv"), csv.str());
    if (format == TableFormat::Markdown) {
      std::ostringstream md;
      write_wre_table(md, group, TableFormat::Markdown);
      write_file(out / (stem + ".md"), md.str());
    }
  }
  std::ostringstream awre_csv;
  write_awre_table(awre_csv, report.awre, TableFormat::Csv);
  write_file(out / "report/awre.csv", awre_csv.str());
  if (format == TableFormat::Markdown) {
    std::ostringstream md;
    write_awre_table(md, report.awre, TableFormat::Markdown);
    write_file(out / "report/awre.md", md.str());
  }

  std::string failures;
  for (const auto& f : report.failures) failures += f + "\n";
  write_file(out / "report/failures.txt", failures);
  std::string warnings;
  for (const auto& w : report.warnings) warnings += w + "\n";
  write_file(out / "report/warnings.txt", warnings);

  for (const HazardTag regime : {HazardTag::DHR, HazardTag::IHR}) {
    std::vector<svg::Series> series;
    for (const auto& [key, entries] : report.awre) {
      if (key.regime != regime) continue;
      for (const auto& e : entries) {
        auto it = std::find_if(series.begin(), series.end(), [&](const svg::Series& s) { return s.name == e.model.name(); });
        if (it == series.end()) {
          series.push_back({e.model.name(), {}, {}});
          it = series.end() - 1;
        }
        it->x.push_back(static_cast<double>(key.n));
        it->y.push_back(e.awre);
      }
    }
    if (series.empty()) continue;
    write_file(out / ("figures/efficiency_trends_" + lower(to_string(regime)) + ".svg"),
               svg::line_chart("AWRE by sample size (" + std::string(to_string(regime)) + ")", "sample size n", "AWRE",
                               series, 1.0));
  }

  ordered_json manifest;
  manifest["tool"] = "weibayes";
  manifest["version"] = "0.1.0";
  manifest["seed"] = config.seed;
  manifest["config_hash"] = hex(config.hash());
  manifest["kernel"] = std::string(kernels::isa_name(kernels::active_isa()));
  manifest["datasets"] = report.datasets.size();
  manifest["models"] = config.models.size();
  manifest["failures"] = report.failures.size();
  manifest["warnings"] = report.warnings.size();
  manifest["runtime_seconds"] = report.runtime_seconds;
  write_file(out / "manifest.json", manifest.dump(2) + "\n");
}

std::span<const double> prostate_raw_times() { return kProstateRaw; }

std::uint64_t prostate_data_hash() {
  std::string s;
  for (const double v : kProstateRaw) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    if (!s.empty()) s += ' ';
    s += buf;
  }
  return fnv1a(s);
}

LifetimeSample parse_lifetimes(std::string_view text, std::size_t* excluded, const Logger& log) {
  std::vector<double> values;
  std::size_t dropped = 0;
  std::size_t i = 0;
  auto is_sep = [](char c) { return c == ',' || c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == ';'; };
  while (i < text.size()) {
    if (is_sep(text[i])) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < text.size() && !is_sep(text[j])) ++j;
    const std::string_view token = text.substr(i, j - i);
    double v = 0.0;
    const char* first = token.data();
    if (!token.empty() && token.front() == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, token.data() + token.size(), v);
    if (ec != std::errc() || ptr != token.data() + token.size() || !std::isfinite(v)) {
      throw IngestionError("unparseable lifetime token '" + std::string(token) + "'");
    }
    if (v > 0.0) {
      values.push_back(v);
    } else {
      ++dropped;
    }
    i = j;
  }
  if (excluded) *excluded = dropped;
  if (dropped > 0 && log) log("excluded " + std::to_string(dropped) + " nonpositive lifetimes");
  if (values.empty()) throw IngestionError("no positive lifetimes in input");
  return LifetimeSample(std::move(values));
}

LifetimeSample load_lifetimes(std::string_view source, std::size_t* excluded, const Logger& log) {
  if (lower(source) == "prostate") {
    std::vector<double> values;
    for (const double v : kProstateRaw)
      if (v > 0.0) values.push_back(v);
    const std::size_t dropped = std::size(kProstateRaw) - values.size();
    if (excluded) *excluded = dropped;
    if (log) log("excluded " + std::to_string(dropped) + " nonpositive lifetimes");
    return LifetimeSample(std::move(values), "prostate");
  }
  std::error_code ec;
  const std::filesystem::path path{std::string(source)};
  if (source.size() < 4096 && std::filesystem::is_regular_file(path, ec)) {
    std::ifstream f(path);
    if (!f) throw IngestionError("cannot read " + path.string());
    std::stringstream ss;
    ss << f.rdbuf();
    LifetimeSample s = parse_lifetimes(ss.str(), excluded, log);
    return LifetimeSample(std::vector<double>(s.times().begin(), s.times().end()), path.filename().string());
  }
  return parse_lifetimes(source, excluded, log);
}

double mrl_percent_deviation(double t, const WeibullParams& p, const WeibullParams& reference) {
  const double ref = mean_residual_life(t, reference);
  return 100.0 * (mean_residual_life(t, p) - ref) / ref;
}

ProstateReport prostate_report(const StudyConfig& config, const Logger& log) {
  config.sampler.validate();
  if (config.models.empty()) throw ConfigError("prostate: no models selected");
  ProstateReport rep;
  rep.data = load_lifetimes("prostate", nullptr, log);
  const BootstrapSummary mle =
      bootstrap(rep.data, ClassicalMethod::MLE, config.bootstrap_B, derive_seed(config.seed, kProstateTag, 0));

  rep.fits.resize(config.models.size());
  std::vector<std::string> errors(config.models.size());
  StudyConfig cell_config = config;
  cell_config.sampler.parallel = config.threads == 1;
  parallel_for(config.models.size(), config.threads, [&](std::size_t i) {
    try {
      rep.fits[i] = fit_model(config.models[i], rep.data, mle, cell_config,
                              derive_seed(config.seed, kProstateTag, 1 + model_index(config.models[i])));
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });
  for (std::size_t i = 0; i < errors.size(); ++i) {
    if (!errors[i].empty()) throw RuntimeFailure("prostate: " + config.models[i].name() + ": " + errors[i]);
    if (log) log("fitted " + config.models[i].name());
  }

  std::vector<FitRecord> records;
  for (const auto& f : rep.fits) records.push_back(f.record);
  rep.integrated = integrated_estimate(records, std::nullopt);
  rep.efficiency = make_report(records, GroupKey{HazardTag::Unknown, rep.data.size()}, std::nullopt);
  rep.efficiency.dataset_id = "prostate";
  rep.epstein = epstein_test(rep.data);

  for (const auto& f : rep.fits) {
    const double half = 2.0 * std::sqrt(f.record.sampling_variance_total);
    rep.error_bars.push_back({f.record.model, f.record.estimate.shape(), f.record.estimate.shape() - half,
                              f.record.estimate.shape() + half, f.record.estimate.scale(),
                              f.record.estimate.scale() - half, f.record.estimate.scale() + half});
  }

  std::size_t mcmc_taken = 0;
  for (const ModelId& m : rank_models(rep.efficiency)) {
    if (m.is_mcmc() && mcmc_taken < 3) {
      rep.mrl_models.push_back(m);
      ++mcmc_taken;
    }
  }
  for (const ClassicalMethod cm : {ClassicalMethod::MLE, ClassicalMethod::OLSRegression, ClassicalMethod::Moments}) {
    const ModelId m = ModelId::classical(cm);
    if (std::find(config.models.begin(), config.models.end(), m) != config.models.end()) rep.mrl_models.push_back(m);
  }
  for (const double t : kMrlTimes) {
    MrlRow row;
    row.time = t;
    row.integrated = mean_residual_life(t, rep.integrated);
    for (const ModelId& m : rep.mrl_models) {
      const auto it = std::find_if(rep.fits.begin(), rep.fits.end(), [&](const ModelFit& f) { return f.record.model == m; });
      row.percent_deviation.push_back(mrl_percent_deviation(t, it->record.estimate, rep.integrated));
    }
    rep.mrl.push_back(std::move(row));
  }
  return rep;
}

void write_prostate_outputs(const ProstateReport& report, const std::filesystem::path& out, TableFormat format) {
  std::ostringstream est;
  est << "method,shape_prior,scale_prior,shape,scale,sampling_variance,V,WRE\n";
  const auto ranking = rank_models(report.efficiency);
  std::vector<ModelId> order;
  for (const auto& f : report.fits)
    if (!f.record.model.is_mcmc()) order.push_back(f.record.model);
  for (const auto& m : ranking)
    if (m.is_mcmc()) order.push_back(m);
  for (const auto& f : report.fits)
    if (std::find(order.begin(), order.end(), f.record.model) == order.end()) order.push_back(f.record.model);
  std::ostringstream md;
  md << "| method | shape prior | scale prior | shape | scale | WRE |\n|---|---|---|---|---|---|\n";
  for (const ModelId& m : order) {
    const auto& r = std::find_if(report.fits.begin(), report.fits.end(), [&](const ModelFit& f) { return f.record.model == m; })->record;
    const auto w = report.efficiency.wre_of(m);
    const std::string method = m.is_mcmc() ? "MCMC" : std::string(to_string(*m.method));
    const std::string sp = m.is_mcmc() ? std::string(to_string(m.shape_prior)) : "-";
    const std::string ap = m.is_mcmc() ? std::string(to_string(m.scale_prior)) : "-";
    const std::string wre_text = w ? fmt(*w, 3) : "undefined";
    est << method << ',' << sp << ',' << ap << ',' << fmt(r.estimate.shape(), 4) << ',' << fmt(r.estimate.scale(), 4)
        << ',' << fmt(r.sampling_variance_total, 6) << ',' << fmt(r.asymptotic_variance_total, 6) << ',' << wre_text
        << '\n';
    md << "| " << method << " | " << sp << " | " << ap << " | " << fmt(r.estimate.shape(), 3) << " | "
       << fmt(r.estimate.scale(), 3) << " | " << wre_text << " |\n";
  }
  est << "Integrated,-,-," << fmt(report.integrated.shape(), 4) << ',' << fmt(report.integrated.scale(), 4) << ",,,\n";
  write_file(out / "report/prostate_estimates.csv", est.str());

  std::ostringstream mrl;
  mrl << "time,integrated";
  for (const auto& m : report.mrl_models) mrl << ',' << m.name();
  mrl << '\n';
  md << "\nIntegrated estimate: shape " << fmt(report.integrated.shape(), 3) << ", scale "
     << fmt(report.integrated.scale(), 3) << "\n\nEpstein test: Z = " << fmt(report.epstein.statistic, 3)
     << ", p = " << fmt(report.epstein.p_value, 4) << ", verdict " << to_string(report.epstein.verdict) << "\n\n";
  md << "| time | integrated";
  for (const auto& m : report.mrl_models) md << " | " << m.name();
  md << " |\n|---|---";
  for (std::size_t i = 0; i < report.mrl_models.size(); ++i) md << "|---";
  md << "|\n";
  for (const auto& row : report.mrl) {
    mrl << fmt(row.time, 0) << ',' << fmt(row.integrated, 4);
    md << "| " << fmt(row.time, 0) << " | " << fmt(row.integrated, 2);
    for (const double d : row.percent_deviation) {
      mrl << ',' << fmt(d, 4);
      md << " | " << (d >= 0 ? "+" : "") << fmt(d, 2) << "%";
    }
    mrl << '\n';
    md << " |\n";
  }
  write_file(out / "report/mrl.csv", mrl.str());
  if (format == TableFormat::Markdown) write_file(out / "report/prostate.md", md.str());

  std::vector<svg::Interval> bars;
  for (const ModelId& m : order) {
    const auto& b = *std::find_if(report.error_bars.begin(), report.error_bars.end(), [&](const ErrorBar& e) { return e.model == m; });
    bars.push_back({m.name(), b.shape, b.shape_lo, b.shape_hi});
  }
  write_file(out / "figures/error_bars.svg",
             svg::interval_chart("Shape estimates, mean +/- 2 sd", "shape", bars, report.integrated.shape()));

  std::vector<svg::Series> curves;
  svg::Series integrated{"Integrated", {}, {}};
  for (double t = 0.0; t <= 60.0; t += 2.0) {
    integrated.x.push_back(t);
    integrated.y.push_back(mean_residual_life(t, report.integrated));
  }
  curves.push_back(integrated);
  for (const ModelId& m : report.mrl_models) {
    const auto& r = std::find_if(report.fits.begin(), report.fits.end(), [&](const ModelFit& f) { return f.record.model == m; })->record;
    svg::Series s{m.name(), {}, {}};
    for (double t = 0.0; t <= 60.0; t += 2.0) {
      s.x.push_back(t);
      s.y.push_back(mean_residual_life(t, r.estimate));
    }
    curves.push_back(std::move(s));
  }
  write_file(out / "figures/mrl_curves.svg", svg::line_chart("Mean residual life", "months", "MRL (months)", curves));
}

double empirical_quantile(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw DomainError("empirical_quantile: empty input");
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("empirical_quantile: p must lie in [0, 1]");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

std::size_t PpcTable::covered() const noexcept {
  std::size_t c = 0;
  for (std::size_t i = 0; i < observed.size(); ++i)
    if (observed[i] >= lower[i] && observed[i] <= upper[i]) ++c;
  return c;
}

PpcTable ppc(const PosteriorDraws& draws, const LifetimeSample& data, std::size_t bins, std::uint64_t seed,
             std::size_t replicates) {
  if (bins == 0) throw ConfigError("ppc: bins must be positive");
  if (replicates < 2) throw ConfigError("ppc: at least 2 replicates are required");
  if (!draws.has_weibull() || draws.shape.empty()) throw DomainError("ppc: draws carry no Weibull parameters");
  PpcTable t;
  t.replicates = replicates;
  for (std::size_t k = 0; k < bins; ++k) t.levels.push_back((static_cast<double>(k) + 0.5) / static_cast<double>(bins));
  for (const double p : t.levels) t.observed.push_back(empirical_quantile(data.times(), p));

  std::vector<std::vector<double>> per_level(bins, std::vector<double>(replicates));
  std::vector<double> rep(data.size());
  for (std::size_t r = 0; r < replicates; ++r) {
    Rng rng(derive_seed(seed, r));
    const std::size_t k = rng.index(draws.shape.size());
    const WeibullParams p(draws.shape[k], draws.scale[k]);
    for (double& x : rep) x = quantile(rng.uniform(), p);
    std::sort(rep.begin(), rep.end());
    for (std::size_t b = 0; b < bins; ++b) per_level[b][r] = empirical_quantile(rep, t.levels[b]);
  }
  for (auto& v : per_level) {
    std::sort(v.begin(), v.end());
    t.lower.push_back(empirical_quantile(v, 0.025));
    t.median.push_back(empirical_quantile(v, 0.5));
    t.upper.push_back(empirical_quantile(v, 0.975));
  }
  return t;
}

void write_ppc_csv(std::ostream& os, const PpcTable& table) {
  os << "level,observed,lower,median,upper\n";
  for (std::size_t i = 0; i < table.levels.size(); ++i) {
    os << fmt(table.levels[i], 4) << ',' << fmt(table.observed[i], 6) << ',' << fmt(table.lower[i], 6) << ','
       << fmt(table.median[i], 6) << ',' << fmt(table.upper[i], 6) << '\n';
  }
}

std::string ppc_svg(const PpcTable& table) {
  return svg::band_chart("Posterior predictive quantiles (" + std::to_string(table.replicates) + " replicates)",
                         "probability level", "lifetime", table.levels, table.lower, table.median, table.upper,
                         table.observed);
}

}  // namespace weibayes
