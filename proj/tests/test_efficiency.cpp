#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "weibayes/efficiency.hpp"
#include "weibayes/error.hpp"
#include "weibayes/rng.hpp"

using namespace weibayes;

namespace {

std::vector<FitRecord> records(std::size_t count, std::uint64_t seed) {
  const auto models = all_models();
  Rng rng(seed);
  std::vector<FitRecord> out;
  for (std::size_t i = 0; i < count; ++i) {
    FitRecord r;
    r.model = models[i];
    r.estimate = WeibullParams(rng.uniform(0.5, 2.0), rng.uniform(0.5, 2.0));
    r.sampling_variance_total = rng.uniform(0.01, 1.0);
    r.asymptotic_variance_total = rng.uniform(0.01, 1.0);
    r.dataset_id = "d";
    out.push_back(r);
  }
  return out;
}

}  // namespace

TEST_CASE("model catalogue") {
  const auto models = all_models();
  CHECK(models.size() == 27);
  CHECK(models[0].name() == "MLE");
  CHECK(models[2].name() == "Regression");
  CHECK(std::count_if(models.begin(), models.end(), [](const ModelId& m) { return m.is_mcmc(); }) == 24);
  CHECK(parse_model_id("gamma-halfcauchy")->name() == "Gamma-HalfCauchy");
  CHECK(parse_model_id("ols") == ModelId::classical(ClassicalMethod::OLSRegression));
  CHECK_FALSE(parse_model_id("HalfCauchy-Gamma").has_value());
  CHECK_FALSE(parse_model_id("bogus").has_value());
}

TEST_CASE("identical records give unit WRE") {
  auto recs = records(27, 1);
  for (auto& r : recs) {
    r.sampling_variance_total = 0.3;
    r.asymptotic_variance_total = 0.7;
  }
  for (const auto& w : wre(recs)) CHECK(*w == doctest::Approx(1.0));
}

TEST_CASE("toy WRE computation") {
  auto recs = records(3, 2);
  const double s[] = {2.0, 1.0, 0.5};
  for (int i = 0; i < 3; ++i) {
    recs[i].sampling_variance_total = s[i];
    recs[i].asymptotic_variance_total = 1.0;
  }
  const auto w = wre(recs, 3);
  // shares 2/3.5, 1/3.5, 0.5/3.5 over V shares of 1/3
  CHECK(*w[0] == doctest::Approx(6.0 / 3.5));
  CHECK(*w[1] == doctest::Approx(3.0 / 3.5));
  CHECK(*w[2] == doctest::Approx(1.5 / 3.5));
}

TEST_CASE("WRE properties") {
  const auto recs = records(27, 3);
  const auto w = wre(recs);
  // V-share weighted WRE sums to one
  const double sum_v = std::accumulate(recs.begin(), recs.end(), 0.0,
                                       [](double a, const FitRecord& r) { return a + r.asymptotic_variance_total; });
  double weighted = 0.0;
  for (std::size_t i = 0; i < recs.size(); ++i) weighted += *w[i] * recs[i].asymptotic_variance_total / sum_v;
  CHECK(weighted == doctest::Approx(1.0).epsilon(1e-12));

  // invariant under rescaling all s or all V
  auto scaled = recs;
  for (auto& r : scaled) {
    r.sampling_variance_total *= 13.0;
    r.asymptotic_variance_total *= 0.01;
  }
  const auto w2 = wre(scaled);
  for (std::size_t i = 0; i < w.size(); ++i) CHECK(*w2[i] == doctest::Approx(*w[i]).epsilon(1e-12));

  // permutation moves values with their records
  auto perm = recs;
  std::reverse(perm.begin(), perm.end());
  const auto w3 = wre(perm);
  for (std::size_t i = 0; i < w.size(); ++i) CHECK(*w3[w.size() - 1 - i] == doctest::Approx(*w[i]).epsilon(1e-12));
}

TEST_CASE("WRE error handling") {
  auto recs = records(27, 4);
  CHECK_THROWS_AS(wre(std::span(recs).first(26)), AggregationError);
  auto dup = recs;
  dup[5].model = dup[4].model;
  CHECK_THROWS_AS(wre(dup), AggregationError);
  auto bad = recs;
  bad[0].sampling_variance_total = std::nan("");
  CHECK_THROWS_AS(wre(bad), AggregationError);
  auto zero = recs;
  for (auto& r : zero) r.sampling_variance_total = 0.0;
  CHECK_THROWS_AS(wre(zero), AggregationError);

  auto neg = recs;
  neg[3].asymptotic_variance_total = -0.5;
  std::vector<std::string> warnings;
  const auto w = wre(neg, 27, &warnings);
  CHECK_FALSE(w[3].has_value());
  CHECK(warnings.size() == 1);
  double s = 0, v = 0;
  for (std::size_t i = 0; i < neg.size(); ++i)
    if (i != 3) {
      s += neg[i].sampling_variance_total;
      v += neg[i].asymptotic_variance_total;
    }
  CHECK(*w[0] == doctest::Approx((neg[0].sampling_variance_total / s) / (neg[0].asymptotic_variance_total / v)));
}

TEST_CASE("AWRE averages within a group") {
  const GroupKey key{HazardTag::IHR, 15};
  std::vector<EfficiencyReport> reps = {make_report(records(27, 5), key, 27), make_report(records(27, 6), key, 27),
                                        make_report(records(27, 7), GroupKey{HazardTag::DHR, 15}, 27)};
  const auto a = awre(reps, key);
  CHECK(a.size() == 27);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].datasets == 2);
    CHECK(a[i].awre == doctest::Approx((*reps[0].wre_of(a[i].model) + *reps[1].wre_of(a[i].model)) / 2.0));
  }
  CHECK_THROWS_AS(awre(reps, GroupKey{HazardTag::IHR, 100}), AggregationError);
}

TEST_CASE("integrated estimate") {
  auto recs = records(27, 8);
  double s = 0, a = 0;
  for (const auto& r : recs) {
    s += r.estimate.shape();
    a += r.estimate.scale();
  }
  const WeibullParams e = integrated_estimate(recs);
  CHECK(e.shape() == doctest::Approx(s / 27));
  CHECK(e.scale() == doctest::Approx(a / 27));
  std::reverse(recs.begin(), recs.end());
  CHECK(integrated_estimate(recs) == e);
  CHECK_THROWS_AS(integrated_estimate(std::span(recs).first(3)), AggregationError);
}

TEST_CASE("ranking is ascending with deterministic ties") {
  auto recs = records(27, 9);
  recs[10].sampling_variance_total = recs[11].sampling_variance_total;
  recs[10].asymptotic_variance_total = recs[11].asymptotic_variance_total;
  const auto rep = make_report(recs, GroupKey{HazardTag::DHR, 25}, 27);
  const auto order = rank_models(rep);
  CHECK(order.size() == 27);
  for (std::size_t i = 1; i < order.size(); ++i) CHECK(*rep.wre_of(order[i - 1]) <= *rep.wre_of(order[i]));

  auto shuffled = recs;
  std::rotate(shuffled.begin(), shuffled.begin() + 7, shuffled.end());
  const auto order2 = rank_models(make_report(shuffled, GroupKey{HazardTag::DHR, 25}, 27));
  CHECK(order == order2);
}

TEST_CASE("tables") {
  const auto rep = make_report(records(27, 10), GroupKey{HazardTag::IHR, 55}, 27, 1.3);
  std::vector<EfficiencyReport> reps = {rep};
  std::ostringstream csv, md;
  write_wre_table(csv, reps, TableFormat::Csv);
  write_wre_table(md, reps, TableFormat::Markdown);
  const std::string c = csv.str(), m = md.str();
  CHECK(c.rfind("n,hazard,true_shape,method,shape_prior,scale_prior,shape,scale,sampling_variance,V,WRE\n", 0) == 0);
  CHECK(std::count(c.begin(), c.end(), '\n') == 28);
  CHECK(m.rfind("| n ", 0) == 0);
  CHECK(std::count(m.begin(), m.end(), '\n') == 29);

  std::vector<std::pair<GroupKey, std::vector<AwreEntry>>> groups = {{rep.key, awre(reps, rep.key)}};
  std::ostringstream at;
  write_awre_table(at, groups, TableFormat::Csv);
  const std::string t = at.str();
  CHECK(t.rfind("n,hazard,method,shape_prior,scale_prior,AWRE,datasets\n", 0) == 0);
  CHECK(std::count(t.begin(), t.end(), '\n') == 28);
}
