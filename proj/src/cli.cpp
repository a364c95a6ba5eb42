#include "weibayes/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "weibayes/adaptive.hpp"
#include "weibayes/error.hpp"
#include "weibayes/harness.hpp"
#include "weibayes/rng.hpp"

namespace weibayes {
namespace {

struct Globals {
  std::optional<std::uint64_t> seed;
  std::string config_path;
  std::string out_dir;
  std::string format = "csv";
  bool verbose = false;
};

std::string fixed(double v, int digits) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

StudyConfig load_config(const Globals& g) {
  StudyConfig c = g.config_path.empty() ? StudyConfig{} : StudyConfig::load(g.config_path);
  if (g.seed) c.seed = *g.seed;
  c.sampler.seed = c.seed;
  return c;
}

std::filesystem::path output_dir(const Globals& g, const StudyConfig& c) {
  return g.out_dir.empty() ? resolve_output_dir(c) : std::filesystem::path(g.out_dir);
}

TableFormat table_format(const Globals& g) { return g.format == "md" ? TableFormat::Markdown : TableFormat::Csv; }

std::vector<ModelId> parse_models(const std::string& list) {
  std::vector<ModelId> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::string lowered = item;
    for (char& ch : lowered) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    if (lowered == "all") return all_models();
    if (lowered == "classical") {
      for (const auto m : {ClassicalMethod::MLE, ClassicalMethod::Moments, ClassicalMethod::OLSRegression})
        out.push_back(ModelId::classical(m));
      continue;
    }
    if (lowered == "mcmc") {
      for (const auto& [s, a] : admissible_combinations()) out.push_back(ModelId::bayes(s, a));
      continue;
    }
    const auto id = parse_model_id(item);
    if (!id) throw ConfigError("unknown model '" + item + "'");
    out.push_back(*id);
  }
  if (out.empty()) throw ConfigError("no models selected");
  return out;
}

ModelId parse_mcmc_model(const std::string& name) {
  const auto id = parse_model_id(name);
  if (!id || !id->is_mcmc()) throw ConfigError("'" + name + "' is not a prior pair such as Gamma-Gamma");
  return *id;
}

// Rows of cells printed either as CSV or as a Markdown table.
void print_table(std::ostream& out, const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows,
                 TableFormat format) {
  const std::string sep = format == TableFormat::Csv ? "," : " | ";
  const std::string lead = format == TableFormat::Csv ? "" : "| ";
  const std::string tail = format == TableFormat::Csv ? "" : " |";
  auto line = [&](const std::vector<std::string>& cells) {
    out << lead;
    for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? sep : "") << cells[i];
    out << tail << '\n';
  };
  line(header);
  if (format == TableFormat::Markdown) {
    out << '|';
    for (std::size_t i = 0; i < header.size(); ++i) out << "---|";
    out << '\n';
  }
  for (const auto& r : rows) line(r);
}

Logger make_logger(const Globals& g, std::ostream& err) {
  if (!g.verbose) return {};
  return [&err](std::string_view msg) { err << msg << '\n'; };
}

int cmd_fit(const Globals& g, const std::string& data_source, const std::string& models, std::ostream& out,
            std::ostream& err) {
  StudyConfig c = load_config(g);
  const LifetimeSample data = load_lifetimes(data_source, nullptr, make_logger(g, err));
  c.models = parse_models(models);
  const BootstrapSummary mle = bootstrap(data, ClassicalMethod::MLE, c.bootstrap_B, derive_seed(c.seed, 4, 0));
  std::vector<ModelFit> fits;
  const auto all = all_models();
  for (const ModelId& m : c.models) {
    const auto idx = static_cast<std::uint64_t>(std::find(all.begin(), all.end(), m) - all.begin());
    fits.push_back(fit_model(m, data, mle, c, derive_seed(c.seed, 4, 1 + idx)));
  }
  std::vector<FitRecord> records;
  for (const auto& f : fits) records.push_back(f.record);
  std::optional<EfficiencyReport> rep;
  if (records.size() >= 2) rep = make_report(records, GroupKey{data.hazard_tag(), data.size()}, std::nullopt);

  std::vector<std::vector<std::string>> rows;
  for (const auto& f : fits) {
    std::vector<std::string> row = {f.record.model.name(), fixed(f.record.estimate.shape(), 3),
                                    fixed(f.record.estimate.scale(), 3), fixed(f.record.sampling_variance_total, 6),
                                    fixed(f.record.asymptotic_variance_total, 6)};
    const auto w = rep ? rep->wre_of(f.record.model) : std::nullopt;
    row.push_back(w ? fixed(*w, 3) : "-");
    row.push_back(f.posterior ? fixed(std::max(f.posterior->r_hat[0], f.posterior->r_hat[1]), 4) : "-");
    row.push_back(f.posterior ? std::to_string(f.posterior->divergences) : "-");
    rows.push_back(std::move(row));
  }
  print_table(out, {"model", "shape", "scale", "sampling_variance", "V", "WRE", "r_hat", "divergences"}, rows,
              table_format(g));
  return 0;
}

int cmd_simulate(const Globals& g, std::ostream& out, std::ostream& err) {
  const StudyConfig c = load_config(g);
  const StudyReport report = run_study(c, make_logger(g, err));
  const auto dir = output_dir(g, c);
  write_study_outputs(report, c, dir, table_format(g));
  write_awre_table(out, report.awre, table_format(g));
  err << "wrote " << dir.string() << " (" << report.datasets.size() << " datasets, " << report.failures.size()
      << " failures, " << fixed(report.runtime_seconds, 1) << " s)\n";
  return 0;
}

int cmd_prostate(const Globals& g, std::ostream& out, std::ostream& err) {
  const StudyConfig c = load_config(g);
  const ProstateReport rep = prostate_report(c, make_logger(g, err));
  const auto dir = output_dir(g, c);
  write_prostate_outputs(rep, dir, table_format(g));
  std::vector<std::vector<std::string>> rows;
  for (const ModelId& m : rank_models(rep.efficiency)) {
    const auto& r = std::find_if(rep.fits.begin(), rep.fits.end(), [&](const ModelFit& f) { return f.record.model == m; })->record;
    rows.push_back({m.name(), fixed(r.estimate.shape(), 3), fixed(r.estimate.scale(), 3), fixed(*rep.efficiency.wre_of(m), 3)});
  }
  print_table(out, {"model", "shape", "scale", "WRE"}, rows, table_format(g));
  out << "integrated: shape " << fixed(rep.integrated.shape(), 4) << ", scale " << fixed(rep.integrated.scale(), 4)
      << "\nEpstein: Z = " << fixed(rep.epstein.statistic, 3) << ", p = " << fixed(rep.epstein.p_value, 4) << ", "
      << to_string(rep.epstein.verdict) << '\n';
  return 0;
}

int cmd_mrl(const Globals& g, double shape, double scale, const std::vector<double>& times, int digits,
            std::ostream& out) {
  const WeibullParams p(shape, scale);
  std::vector<std::vector<std::string>> rows;
  for (const double t : times) rows.push_back({fixed(t, t == std::floor(t) ? 0 : 3), fixed(mean_residual_life(t, p), digits)});
  print_table(out, {"time", "mrl"}, rows, table_format(g));
  return 0;
}

int cmd_adapt(const Globals& g, const std::string& data_source, const std::string& model, std::size_t rounds,
              std::ostream& out, std::ostream& err) {
  const StudyConfig c = load_config(g);
  const LifetimeSample data = load_lifetimes(data_source, nullptr, make_logger(g, err));
  const ModelId id = parse_mcmc_model(model);
  const BootstrapSummary mle = bootstrap(data, ClassicalMethod::MLE, c.bootstrap_B, derive_seed(c.seed, 6, 0));
  const HierarchicalModel hm = build_model(id.shape_prior, id.scale_prior, mle);
  const AdaptiveState state = adapt(data, hm, rounds, c.sampler);
  std::ostringstream trace;
  write_trace_csv(trace, state);
  const auto dir = output_dir(g, c);
  std::filesystem::create_directories(dir / "report");
  std::ofstream(dir / "report/adapt_trace.csv") << trace.str();
  out << trace.str();
  if (state.stopped_early) err << "stopped early after round " << state.round << '\n';
  return 0;
}

int cmd_ppc(const Globals& g, const std::string& data_source, const std::string& model, std::size_t bins,
            std::size_t replicates, std::ostream& out, std::ostream& err) {
  const StudyConfig c = load_config(g);
  const LifetimeSample data = load_lifetimes(data_source, nullptr, make_logger(g, err));
  const ModelId id = parse_mcmc_model(model);
  if (bins == 0) throw ConfigError("ppc: bins must be positive");
  const BootstrapSummary mle = bootstrap(data, ClassicalMethod::MLE, c.bootstrap_B, derive_seed(c.seed, 7, 0));
  const HierarchicalModel hm = build_model(id.shape_prior, id.scale_prior, mle);
  const PosteriorDraws draws = nuts_sample(hm, data, c.sampler);
  const PpcTable table = ppc(draws, data, bins, derive_seed(c.seed, 7, 1), replicates);
  const auto dir = output_dir(g, c);
  std::filesystem::create_directories(dir / "report");
  std::filesystem::create_directories(dir / "figures");
  std::ostringstream csv;
  write_ppc_csv(csv, table);
  std::ofstream(dir / "report/ppc.csv") << csv.str();
  std::ofstream(dir / "figures/ppc.svg") << ppc_svg(table);
  std::ofstream draws_file(dir / "report/ppc_draws.csv");
  write_draws_csv(draws_file, draws);
  out << csv.str();
  err << table.covered() << " of " << table.levels.size() << " observed quantiles inside the 95% band\n";
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Weibull lifetime estimation: classical fits, hierarchical Bayesian NUTS, efficiency comparison",
               "weibayes"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--seed", g.seed, "Base random seed");
  app.add_option("--config", g.config_path, "Study configuration (JSON)");
  app.add_option("--out", g.out_dir, "Output directory (overrides WEIBAYES_OUT and the config)");
  app.add_option("--format", g.format, "Table format")->check(CLI::IsMember({"csv", "md"}));
  app.add_flag("-v,--verbose", g.verbose, "Progress messages on stderr");

  std::string data_source = "prostate";
  std::string models = "all";
  auto* fit = app.add_subcommand("fit", "Fit models to one dataset and print estimates");
  fit->add_option("--data", data_source, "'prostate', a file path, or inline values");
  fit->add_option("--models", models, "Comma-separated: mle, moments, regression, <Shape>-<Scale>, classical, mcmc, all");

  app.add_subcommand("simulate", "Run the simulation study from --config");
  app.add_subcommand("prostate", "Prostate cancer application report");

  double shape = 0.0;
  double scale = 0.0;
  std::vector<double> times(kMrlTimes.begin(), kMrlTimes.end());
  int digits = 2;
  auto* mrl = app.add_subcommand("mrl", "Mean residual life table");
  mrl->add_option("--shape", shape, "Weibull shape")->required();
  mrl->add_option("--scale", scale, "Weibull scale")->required();
  mrl->add_option("--times", times, "Comma-separated times")->delimiter(',');
  mrl->add_option("--digits", digits, "Decimal places")->check(CLI::Range(0, 12));

  std::string model = "Gamma-Gamma";
  std::size_t rounds = 5;
  auto* adapt_cmd = app.add_subcommand("adapt", "Adaptive prior updating");
  adapt_cmd->add_option("--data", data_source, "'prostate', a file path, or inline values");
  adapt_cmd->add_option("--model", model, "Prior pair, e.g. Gamma-Gamma");
  adapt_cmd->add_option("--rounds", rounds, "Maximum rounds")->check(CLI::PositiveNumber);

  std::size_t bins = 10;
  std::size_t replicates = 100;
  auto* ppc_cmd = app.add_subcommand("ppc", "Posterior predictive check");
  ppc_cmd->add_option("--data", data_source, "'prostate', a file path, or inline values");
  ppc_cmd->add_option("--model", model, "Prior pair, e.g. Gamma-Gamma");
  ppc_cmd->add_option("--bins", bins, "Number of quantile levels");
  ppc_cmd->add_option("--replicates", replicates, "Predictive datasets");

  for (auto* sub : app.get_subcommands({})) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n\n" << app.help();
    return 1;
  }

  try {
    if (fit->parsed()) return cmd_fit(g, data_source, models, out, err);
    if (app.got_subcommand("simulate")) return cmd_simulate(g, out, err);
    if (app.got_subcommand("prostate")) return cmd_prostate(g, out, err);
    if (mrl->parsed()) return cmd_mrl(g, shape, scale, times, digits, out);
    if (adapt_cmd->parsed()) return cmd_adapt(g, data_source, model, rounds, out, err);
    if (ppc_cmd->parsed()) return cmd_ppc(g, data_source, model, bins, replicates, out, err);
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const RuntimeFailure& e) {
    err << "failure: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "failure: " << e.what() << '\n';
    return 2;
  }
  err << app.help();
  return 1;
}

}  // namespace weibayes
