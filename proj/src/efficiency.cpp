#include "weibayes/efficiency.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "weibayes/error.hpp"

namespace weibayes {
namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out)
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  return out;
}

std::string fixed(double v, int digits) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

struct Row {
  std::vector<std::string> cells;
};

void emit(std::ostream& os, const std::vector<std::string>& header, const std::vector<Row>& rows, TableFormat format) {
  if (format == TableFormat::Csv) {
    for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
    os << '\n';
    for (const auto& r : rows) {
      for (std::size_t i = 0; i < r.cells.size(); ++i) os << (i ? "," : "") << r.cells[i];
      os << '\n';
    }
    return;
  }
  std::vector<std::size_t> width(header.size());
  for (std::size_t i = 0; i < header.size(); ++i) width[i] = std::max<std::size_t>(3, header[i].size());
  for (const auto& r : rows)
    for (std::size_t i = 0; i < r.cells.size(); ++i) width[i] = std::max(width[i], r.cells[i].size());
  auto line = [&](const std::vector<std::string>& cells) {
    os << '|';
    for (std::size_t i = 0; i < cells.size(); ++i) os << ' ' << std::left << std::setw(static_cast<int>(width[i])) << cells[i] << " |";
    os << '\n';
  };
  line(header);
  os << '|';
  for (const std::size_t w : width) os << std::string(w + 2, '-') << '|';
  os << '\n';
  for (const auto& r : rows) line(r.cells);
}

std::vector<std::string> model_cells(const ModelId& m) {
  if (!m.is_mcmc()) return {std::string(to_string(*m.method)), "-", "-"};
  return {"MCMC", std::string(to_string(m.shape_prior)), std::string(to_string(m.scale_prior))};
}

}  // namespace

std::string ModelId::name() const {
  if (method) return std::string(to_string(*method));
  return std::string(to_string(shape_prior)) + "-" + std::string(to_string(scale_prior));
}

std::string ModelId::sort_key() const {
  if (method) return std::string("\x01\x01") + std::string(to_string(*method));
  return std::string(to_string(shape_prior)) + '\x01' + std::string(to_string(scale_prior)) + '\x01';
}

std::vector<ModelId> all_models() {
  std::vector<ModelId> out = {ModelId::classical(ClassicalMethod::MLE), ModelId::classical(ClassicalMethod::Moments),
                              ModelId::classical(ClassicalMethod::OLSRegression)};
  for (const auto& [s, a] : admissible_combinations()) out.push_back(ModelId::bayes(s, a));
  return out;
}

std::optional<ModelId> parse_model_id(std::string_view text) {
  const std::string t = lower(text);
  if (t == "mle") return ModelId::classical(ClassicalMethod::MLE);
  if (t == "moments" || t == "mom") return ModelId::classical(ClassicalMethod::Moments);
  if (t == "regression" || t == "ols") return ModelId::classical(ClassicalMethod::OLSRegression);
  const auto dash = t.find('-');
  if (dash == std::string::npos) return std::nullopt;
  const auto s = parse_prior_kind(std::string_view(text).substr(0, dash));
  const auto a = parse_prior_kind(std::string_view(text).substr(dash + 1));
  if (!s || !a || !admissible_for_shape(*s)) return std::nullopt;
  return ModelId::bayes(*s, *a);
}

std::vector<std::optional<double>> wre(std::span<const FitRecord> records, std::optional<std::size_t> expected_count,
                                       std::vector<std::string>* warnings) {
  if (records.empty()) throw AggregationError("wre: no records");
  if (expected_count && records.size() != *expected_count) {
    throw AggregationError("wre: expected " + std::to_string(*expected_count) + " records, got " +
                           std::to_string(records.size()));
  }
  for (std::size_t i = 0; i < records.size(); ++i) {
    const FitRecord& r = records[i];
    if (!std::isfinite(r.sampling_variance_total) || !std::isfinite(r.asymptotic_variance_total)) {
      throw AggregationError("wre: non-finite variance for " + r.model.name());
    }
    if (r.sampling_variance_total < 0.0) throw AggregationError("wre: negative sampling variance for " + r.model.name());
    for (std::size_t j = 0; j < i; ++j)
      if (records[j].model == r.model) throw AggregationError("wre: duplicate model " + r.model.name());
  }

  double sum_s = 0.0;
  double sum_v = 0.0;
  for (const FitRecord& r : records) {
    if (r.asymptotic_variance_total < 0.0) {
      if (warnings) {
        warnings->push_back(r.dataset_id + ": " + r.model.name() +
                            " has negative total asymptotic variance; WRE undefined");
      }
      continue;
    }
    sum_s += r.sampling_variance_total;
    sum_v += r.asymptotic_variance_total;
  }
  if (!(sum_s > 0.0) || !(sum_v > 0.0)) throw AggregationError("wre: zero variance total");

  std::vector<std::optional<double>> out;
  out.reserve(records.size());
  for (const FitRecord& r : records) {
    if (r.asymptotic_variance_total < 0.0) {
      out.emplace_back();
      continue;
    }
    const double v_share = r.asymptotic_variance_total / sum_v;
    if (!(v_share > 0.0)) {
      out.emplace_back();
      continue;
    }
    out.emplace_back((r.sampling_variance_total / sum_s) / v_share);
  }
  return out;
}

std::optional<double> EfficiencyReport::wre_of(const ModelId& m) const {
  for (std::size_t i = 0; i < records.size(); ++i)
    if (records[i].model == m) return wre[i];
  return std::nullopt;
}

EfficiencyReport make_report(std::vector<FitRecord> records, GroupKey key, std::optional<std::size_t> expected_count,
                             double true_shape) {
  EfficiencyReport rep;
  rep.key = key;
  rep.true_shape = true_shape;
  if (!records.empty()) rep.dataset_id = records.front().dataset_id;
  rep.wre = wre(records, expected_count, &rep.warnings);
  rep.records = std::move(records);
  return rep;
}

std::vector<AwreEntry> awre(std::span<const EfficiencyReport> reports, const GroupKey& key) {
  std::vector<AwreEntry> out;
  std::size_t matched = 0;
  for (const auto& rep : reports) {
    if (rep.key != key) continue;
    ++matched;
    for (std::size_t i = 0; i < rep.records.size(); ++i) {
      if (!rep.wre[i]) continue;
      auto it = std::find_if(out.begin(), out.end(), [&](const AwreEntry& e) { return e.model == rep.records[i].model; });
      if (it == out.end()) {
        out.push_back({rep.records[i].model, 0.0, 0});
        it = out.end() - 1;
      }
      it->awre += *rep.wre[i];
      ++it->datasets;
    }
  }
  if (matched == 0) throw AggregationError("awre: no reports in group");
  for (auto& e : out) e.awre /= static_cast<double>(e.datasets);
  return out;
}

WeibullParams integrated_estimate(std::span<const FitRecord> records, std::optional<std::size_t> expected_count) {
  if (records.empty()) throw AggregationError("integrated_estimate: no records");
  if (expected_count && records.size() != *expected_count) {
    throw AggregationError("integrated_estimate: expected " + std::to_string(*expected_count) + " records, got " +
                           std::to_string(records.size()));
  }
  // Sorting first makes the floating-point sum independent of input order.
  std::vector<double> shapes;
  std::vector<double> scales;
  for (const auto& r : records) {
    shapes.push_back(r.estimate.shape());
    scales.push_back(r.estimate.scale());
  }
  std::sort(shapes.begin(), shapes.end());
  std::sort(scales.begin(), scales.end());
  double s = 0.0;
  double a = 0.0;
  for (std::size_t i = 0; i < shapes.size(); ++i) {
    s += shapes[i];
    a += scales[i];
  }
  const double n = static_cast<double>(records.size());
  return WeibullParams(s / n, a / n);
}

std::vector<ModelId> rank_models(const EfficiencyReport& report) {
  std::vector<std::pair<double, ModelId>> rows;
  for (std::size_t i = 0; i < report.records.size(); ++i)
    if (report.wre[i]) rows.emplace_back(*report.wre[i], report.records[i].model);
  std::sort(rows.begin(), rows.end(), [](const auto& x, const auto& y) {
    if (x.first != y.first) return x.first < y.first;
    return x.second.sort_key() < y.second.sort_key();
  });
  std::vector<ModelId> out;
  for (auto& r : rows) out.push_back(r.second);
  return out;
}

void write_wre_table(std::ostream& os, std::span<const EfficiencyReport> reports, TableFormat format) {
  const std::vector<std::string> header = {"n",     "hazard", "true_shape", "method", "shape_prior", "scale_prior",
                                           "shape", "scale",  "sampling_variance",    "V",           "WRE"};
  std::vector<Row> rows;
  for (const auto& rep : reports) {
    for (const ModelId& m : rank_models(rep)) {
      const auto it = std::find_if(rep.records.begin(), rep.records.end(), [&](const FitRecord& r) { return r.model == m; });
      auto cells = model_cells(m);
      Row row;
      row.cells = {std::to_string(rep.key.n), std::string(to_string(rep.key.regime)), fixed(rep.true_shape, 2)};
      row.cells.insert(row.cells.end(), cells.begin(), cells.end());
      row.cells.push_back(fixed(it->estimate.shape(), 4));
      row.cells.push_back(fixed(it->estimate.scale(), 4));
      row.cells.push_back(fixed(it->sampling_variance_total, 6));
      row.cells.push_back(fixed(it->asymptotic_variance_total, 6));
      row.cells.push_back(fixed(*rep.wre_of(m), 3));
      rows.push_back(std::move(row));
    }
    for (std::size_t i = 0; i < rep.records.size(); ++i) {
      if (rep.wre[i]) continue;
      auto cells = model_cells(rep.records[i].model);
      Row row;
      row.cells = {std::to_string(rep.key.n), std::string(to_string(rep.key.regime)), fixed(rep.true_shape, 2)};
      row.cells.insert(row.cells.end(), cells.begin(), cells.end());
      row.cells.push_back(fixed(rep.records[i].estimate.shape(), 4));
      row.cells.push_back(fixed(rep.records[i].estimate.scale(), 4));
      row.cells.push_back(fixed(rep.records[i].sampling_variance_total, 6));
      row.cells.push_back(fixed(rep.records[i].asymptotic_variance_total, 6));
      row.cells.push_back("undefined");
      rows.push_back(std::move(row));
    }
  }
  emit(os, header, rows, format);
}

void write_awre_table(std::ostream& os, std::span<const std::pair<GroupKey, std::vector<AwreEntry>>> groups,
                      TableFormat format) {
  const std::vector<std::string> header = {"n", "hazard", "method", "shape_prior", "scale_prior", "AWRE", "datasets"};
  std::vector<Row> rows;
  for (const auto& [key, entries] : groups) {
    std::vector<AwreEntry> sorted = entries;
    std::sort(sorted.begin(), sorted.end(), [](const AwreEntry& x, const AwreEntry& y) {
      if (x.awre != y.awre) return x.awre < y.awre;
      return x.model.sort_key() < y.model.sort_key();
    });
    for (const auto& e : sorted) {
      Row row;
      row.cells = {std::to_string(key.n), std::string(to_string(key.regime))};
      const auto cells = model_cells(e.model);
      row.cells.insert(row.cells.end(), cells.begin(), cells.end());
      row.cells.push_back(fixed(e.awre, 3));
      row.cells.push_back(std::to_string(e.datasets));
      rows.push_back(std::move(row));
    }
  }
  emit(os, header, rows, format);
}

}  // namespace weibayes
