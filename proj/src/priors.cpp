#include "weibayes/priors.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "json.hpp"

#include "weibayes/error.hpp"
#include "weibayes/special.hpp"

namespace weibayes {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
const double kHalfLog2Pi = 0.5 * std::log(2.0 * std::numbers::pi);

constexpr std::array<HyperRole, 1> kRolesRate = {HyperRole::Positive};
constexpr std::array<HyperRole, 2> kRolesTwoPositive = {HyperRole::Positive, HyperRole::Positive};
constexpr std::array<HyperRole, 2> kRolesLocationScale = {HyperRole::Location, HyperRole::Positive};

constexpr std::array<std::string_view, 1> kNamesRate = {"lambda"};
constexpr std::array<std::string_view, 2> kNamesAB = {"A", "B"};
constexpr std::array<std::string_view, 2> kNamesMuSigma = {"mu", "sigma"};

// log of the positive-half mass of a location-scale Cauchy, P(theta > 0) = atan2(1, -c)/pi.
double log_cauchy_upper_mass(double c) { return std::log(std::atan2(1.0, -c) / std::numbers::pi); }

// d/dc log P(theta > 0) for the Cauchy mass above.
double cauchy_upper_mass_ratio(double c) {
  return 1.0 / (std::numbers::pi * (1.0 + c * c) * (std::atan2(1.0, -c) / std::numbers::pi));
}

bool finite_all(std::span<const double> xs) {
  for (const double x : xs)
    if (!std::isfinite(x)) return false;
  return true;
}

double hyperprior_log_density(HyperRole role, const Hyperprior& hp, double eta, double& d_eta) {
  // For positive slots eta = log h and the density is LogNormal in h; the
  // -log h term is returned here and its Jacobian partner is added separately.
  const double z = (eta - hp.location) / hp.scale;
  if (role == HyperRole::Positive) {
    d_eta = -1.0 - z / hp.scale;
    return -eta - std::log(hp.scale) - kHalfLog2Pi - 0.5 * z * z;
  }
  d_eta = -z / hp.scale;
  return -std::log(hp.scale) - kHalfLog2Pi - 0.5 * z * z;
}

std::vector<HyperSlot> make_slots(PriorKind kind, const std::vector<double>& init, const char* param_suffix) {
  const auto roles = hyper_roles(kind);
  const auto names = hyper_names(kind);
  std::vector<HyperSlot> slots;
  for (std::size_t i = 0; i < roles.size(); ++i) {
    HyperSlot s;
    s.name = std::string(names[i]) + "_" + param_suffix;
    s.role = roles[i];
    s.hyperprior = roles[i] == HyperRole::Positive ? kDefaultPositiveHyperprior : kDefaultLocationHyperprior;
    s.init = init[i];
    slots.push_back(std::move(s));
  }
  return slots;
}

struct Components {
  double log_likelihood = 0.0;
  double log_prior = 0.0;
  double log_hyperprior = 0.0;
  double log_jacobian = 0.0;
};

// Accumulates one family's prior on `value` = exp(eta_value) and that
// family's hyperpriors into the running gradient.
bool add_family(PriorKind kind, const std::vector<HyperSlot>& slots, std::span<const double> q, std::size_t offset,
                std::size_t value_index, double value, std::span<double> grad, Components& c) {
  std::array<double, 2> hyper{};
  for (std::size_t i = 0; i < slots.size(); ++i) {
    const double eta = q[offset + i];
    double d_eta = 0.0;
    c.log_hyperprior += hyperprior_log_density(slots[i].role, slots[i].hyperprior, eta, d_eta);
    grad[offset + i] += d_eta;
    if (slots[i].role == HyperRole::Positive) {
      hyper[i] = std::exp(eta);
      c.log_jacobian += eta;
      grad[offset + i] += 1.0;
    } else {
      hyper[i] = eta;
    }
    if (!std::isfinite(hyper[i]) || (slots[i].role == HyperRole::Positive && hyper[i] <= 0.0)) return false;
  }
  const PriorTerms t = log_prior_terms(kind, std::span<const double>(hyper.data(), slots.size()), value);
  if (!std::isfinite(t.value)) return false;
  c.log_prior += t.value;
  grad[value_index] += value * t.d_value;
  for (std::size_t i = 0; i < slots.size(); ++i) {
    grad[offset + i] += slots[i].role == HyperRole::Positive ? hyper[i] * t.d_hyper[i] : t.d_hyper[i];
  }
  return true;
}

double evaluate_posterior(const HierarchicalModel& model, std::span<const double> q, const LifetimeSample& data,
                          std::span<double> grad, Components& c) {
  std::fill(grad.begin(), grad.end(), 0.0);
  if (!finite_all(q)) return kNegInf;
  const double shape = std::exp(q[0]);
  const double scale = std::exp(q[1]);
  if (!(shape > 0.0) || !(scale > 0.0) || !std::isfinite(shape) || !std::isfinite(scale)) return kNegInf;

  const LikelihoodTerms lik = log_likelihood_terms(data, shape, scale);
  if (!std::isfinite(lik.value)) return kNegInf;
  c.log_likelihood = lik.value;
  grad[0] += shape * lik.d_shape;
  grad[1] += scale * lik.d_scale;

  c.log_jacobian += q[0] + q[1];
  grad[0] += 1.0;
  grad[1] += 1.0;

  const std::size_t shape_offset = 2;
  const std::size_t scale_offset = 2 + model.shape_hypers.size();
  if (!add_family(model.shape_kind, model.shape_hypers, q, shape_offset, 0, shape, grad, c)) return kNegInf;
  if (!add_family(model.scale_kind, model.scale_hypers, q, scale_offset, 1, scale, grad, c)) return kNegInf;

  const double total = c.log_likelihood + c.log_prior + c.log_hyperprior + c.log_jacobian;
  if (!std::isfinite(total) || !finite_all(grad)) return kNegInf;
  return total;
}

}  // namespace

std::string_view to_string(PriorKind kind) noexcept {
  switch (kind) {
    case PriorKind::Exponential:
      return "Exponential";
    case PriorKind::Gamma:
      return "Gamma";
    case PriorKind::LogNormal:
      return "LogNormal";
    case PriorKind::HalfNormal:
      return "HalfNormal";
    case PriorKind::HalfCauchy:
      return "HalfCauchy";
    case PriorKind::InverseGamma:
      break;
  }
  return "InverseGamma";
}

std::optional<PriorKind> parse_prior_kind(std::string_view name) noexcept {
  for (const PriorKind k : kScalePriorKinds) {
    const std::string_view canonical = to_string(k);
    if (canonical.size() != name.size()) continue;
    bool same = true;
    for (std::size_t i = 0; i < name.size(); ++i) {
      const auto lower = [](char ch) { return static_cast<char>(ch >= 'A' && ch <= 'Z' ? ch - 'A' + 'a' : ch); };
      if (lower(canonical[i]) != lower(name[i])) {
        same = false;
        break;
      }
    }
    if (same) return k;
  }
  return std::nullopt;
}

bool admissible_for_shape(PriorKind kind) noexcept {
  return kind != PriorKind::HalfCauchy && kind != PriorKind::InverseGamma;
}

std::span<const HyperRole> hyper_roles(PriorKind kind) noexcept {
  switch (kind) {
    case PriorKind::Exponential:
      return kRolesRate;
    case PriorKind::Gamma:
    case PriorKind::InverseGamma:
      return kRolesTwoPositive;
    case PriorKind::LogNormal:
    case PriorKind::HalfNormal:
    case PriorKind::HalfCauchy:
      break;
  }
  return kRolesLocationScale;
}

std::span<const std::string_view> hyper_names(PriorKind kind) noexcept {
  switch (kind) {
    case PriorKind::Exponential:
      return kNamesRate;
    case PriorKind::Gamma:
    case PriorKind::InverseGamma:
      return kNamesAB;
    case PriorKind::LogNormal:
    case PriorKind::HalfNormal:
    case PriorKind::HalfCauchy:
      break;
  }
  return kNamesMuSigma;
}

std::vector<double> moment_match(PriorKind kind, double mean, double variance) {
  if (!(mean > 0.0) || !std::isfinite(mean)) throw DomainError("moment_match: mean must be positive");
  if (!(variance > 0.0) || !std::isfinite(variance)) throw DomainError("moment_match: variance must be positive");
  const double ratio = variance / (mean * mean);
  switch (kind) {
    case PriorKind::Gamma:
      return {mean * mean / variance, mean / variance};
    case PriorKind::Exponential:
      return {1.0 / mean};
    case PriorKind::LogNormal:
      return {std::log(mean / std::sqrt(ratio + 1.0)), std::sqrt(std::log1p(ratio))};
    case PriorKind::HalfNormal:
    case PriorKind::HalfCauchy:
      return {mean, std::sqrt(variance)};
    case PriorKind::InverseGamma:
      break;
  }
  return {mean * mean / variance + 2.0, mean + mean * mean * mean / variance};
}

PriorTerms log_prior_terms(PriorKind kind, std::span<const double> h, double x) noexcept {
  PriorTerms t;
  if (!(x > 0.0) || !std::isfinite(x)) {
    t.value = kNegInf;
    return t;
  }
  switch (kind) {
    case PriorKind::Exponential: {
      const double b = h[0];
      t.value = std::log(b) - b * x;
      t.d_value = -b;
      t.d_hyper[0] = 1.0 / b - x;
      break;
    }
    case PriorKind::Gamma: {
      const double a = h[0], b = h[1];
      const double lx = std::log(x);
      t.value = a * std::log(b) - std::lgamma(a) + (a - 1.0) * lx - b * x;
      t.d_value = (a - 1.0) / x - b;
      t.d_hyper[0] = std::log(b) - digamma(a) + lx;
      t.d_hyper[1] = a / b - x;
      break;
    }
    case PriorKind::InverseGamma: {
      const double a = h[0], b = h[1];
      const double lx = std::log(x);
      t.value = a * std::log(b) - std::lgamma(a) - (a + 1.0) * lx - b / x;
      t.d_value = -(a + 1.0) / x + b / (x * x);
      t.d_hyper[0] = std::log(b) - digamma(a) - lx;
      t.d_hyper[1] = a / b - 1.0 / x;
      break;
    }
    case PriorKind::LogNormal: {
      const double mu = h[0], s = h[1];
      const double lx = std::log(x);
      const double z = (lx - mu) / s;
      t.value = -lx - std::log(s) - kHalfLog2Pi - 0.5 * z * z;
      t.d_value = (-1.0 - z / s) / x;
      t.d_hyper[0] = z / s;
      t.d_hyper[1] = (z * z - 1.0) / s;
      break;
    }
    case PriorKind::HalfNormal: {
      // Normal(mu, s) truncated to (0, inf); normalizer Phi(mu/s).
      const double mu = h[0], s = h[1];
      const double z = (x - mu) / s;
      const double c = mu / s;
      const double mills = normal_hazard_ratio(c);
      t.value = -std::log(s) - kHalfLog2Pi - 0.5 * z * z - log_normal_cdf(c);
      t.d_value = -z / s;
      t.d_hyper[0] = z / s - mills / s;
      t.d_hyper[1] = (z * z - 1.0) / s + mills * c / s;
      break;
    }
    case PriorKind::HalfCauchy: {
      // Cauchy(mu, s) truncated to (0, inf).
      const double mu = h[0], s = h[1];
      const double z = (x - mu) / s;
      const double c = mu / s;
      const double q = 1.0 + z * z;
      const double ratio = cauchy_upper_mass_ratio(c);
      t.value = -std::log(std::numbers::pi) - std::log(s) - std::log(q) - log_cauchy_upper_mass(c);
      t.d_value = -2.0 * z / (s * q);
      t.d_hyper[0] = 2.0 * z / (s * q) - ratio / s;
      t.d_hyper[1] = -1.0 / s + 2.0 * z * z / (s * q) + ratio * c / s;
      break;
    }
  }
  if (!std::isfinite(t.value)) t.value = kNegInf;
  return t;
}

double log_prior(const PriorFamily& family, double value) {
  const auto roles = hyper_roles(family.kind);
  if (family.hyperparams.size() != roles.size()) {
    throw DomainError("log_prior: " + std::string(to_string(family.kind)) + " takes " +
                      std::to_string(roles.size()) + " hyperparameters");
  }
  for (std::size_t i = 0; i < roles.size(); ++i) {
    const double h = family.hyperparams[i];
    if (!std::isfinite(h) || (roles[i] == HyperRole::Positive && !(h > 0.0))) {
      throw DomainError("log_prior: invalid hyperparameter for " + std::string(to_string(family.kind)));
    }
  }
  if (!(value > 0.0) || !std::isfinite(value)) throw DomainError("log_prior: value must be positive");
  return log_prior_terms(family.kind, family.hyperparams, value).value;
}

std::string HierarchicalModel::name() const {
  return std::string(to_string(shape_kind)) + "-" + std::string(to_string(scale_kind));
}

std::vector<double> HierarchicalModel::initial_point() const {
  std::vector<double> constrained = {init.shape(), init.scale()};
  for (const auto& s : shape_hypers) constrained.push_back(s.init);
  for (const auto& s : scale_hypers) constrained.push_back(s.init);
  return unconstrain(constrained);
}

std::vector<double> HierarchicalModel::constrain(std::span<const double> u) const {
  if (u.size() != dimension()) throw DomainError("constrain: dimension mismatch");
  std::vector<double> out(u.begin(), u.end());
  out[0] = std::exp(u[0]);
  out[1] = std::exp(u[1]);
  std::size_t i = 2;
  for (const auto* group : {&shape_hypers, &scale_hypers}) {
    for (const auto& s : *group) {
      if (s.role == HyperRole::Positive) out[i] = std::exp(u[i]);
      ++i;
    }
  }
  return out;
}

std::vector<double> HierarchicalModel::unconstrain(std::span<const double> c) const {
  if (c.size() != dimension()) throw DomainError("unconstrain: dimension mismatch");
  std::vector<double> out(c.begin(), c.end());
  out[0] = std::log(c[0]);
  out[1] = std::log(c[1]);
  std::size_t i = 2;
  for (const auto* group : {&shape_hypers, &scale_hypers}) {
    for (const auto& s : *group) {
      if (s.role == HyperRole::Positive) out[i] = std::log(c[i]);
      ++i;
    }
  }
  return out;
}

std::string HierarchicalModel::to_text() const {
  nlohmann::ordered_json j;
  j["shape_prior"] = std::string(to_string(shape_kind));
  j["scale_prior"] = std::string(to_string(scale_kind));
  auto dump_slots = [](const std::vector<HyperSlot>& slots) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& s : slots) {
      nlohmann::ordered_json e;
      e["name"] = s.name;
      e["hyperprior"] = s.role == HyperRole::Positive ? "LogNormal" : "Normal";
      e["location"] = s.hyperprior.location;
      e["scale"] = s.hyperprior.scale;
      e["init"] = s.init;
      arr.push_back(e);
    }
    return arr;
  };
  j["shape_hyperparameters"] = dump_slots(shape_hypers);
  j["scale_hyperparameters"] = dump_slots(scale_hypers);
  j["init"] = {{"shape", init.shape()}, {"scale", init.scale()}};
  return j.dump(2);
}

HierarchicalModel HierarchicalModel::from_text(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("model text: ") + e.what());
  }
  auto kind_of = [&](const char* key) {
    const auto k = parse_prior_kind(j.at(key).get<std::string>());
    if (!k) throw ConfigError(std::string("model text: unknown prior family in ") + key);
    return *k;
  };
  try {
    HierarchicalModel m = build_model(kind_of("shape_prior"), kind_of("scale_prior"),
                                      WeibullParams(j.at("init").at("shape").get<double>(),
                                                    j.at("init").at("scale").get<double>()),
                                      1.0, 1.0);
    auto load_slots = [](const nlohmann::json& arr, std::vector<HyperSlot>& slots) {
      if (arr.size() != slots.size()) throw ConfigError("model text: hyperparameter count mismatch");
      for (std::size_t i = 0; i < slots.size(); ++i) {
        slots[i].hyperprior.location = arr[i].at("location").get<double>();
        slots[i].hyperprior.scale = arr[i].at("scale").get<double>();
        slots[i].init = arr[i].at("init").get<double>();
      }
    };
    load_slots(j.at("shape_hyperparameters"), m.shape_hypers);
    load_slots(j.at("scale_hyperparameters"), m.scale_hypers);
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("model text: ") + e.what());
  }
}

HierarchicalModel build_model(PriorKind shape_kind, PriorKind scale_kind, const WeibullParams& mean,
                              double var_shape, double var_scale) {
  if (!admissible_for_shape(shape_kind)) {
    throw ConfigError(std::string(to_string(shape_kind)) + " is a scale-only prior and cannot be assigned to the shape");
  }
  HierarchicalModel m;
  m.shape_kind = shape_kind;
  m.scale_kind = scale_kind;
  m.init = mean;
  m.shape_hypers = make_slots(shape_kind, moment_match(shape_kind, mean.shape(), var_shape), "beta");
  m.scale_hypers = make_slots(scale_kind, moment_match(scale_kind, mean.scale(), var_scale), "alpha");
  return m;
}

HierarchicalModel build_model(PriorKind shape_kind, PriorKind scale_kind, const BootstrapSummary& init) {
  return build_model(shape_kind, scale_kind, init.mean_estimate, init.var_shape, init.var_scale);
}

std::vector<std::pair<PriorKind, PriorKind>> admissible_combinations() {
  std::vector<std::pair<PriorKind, PriorKind>> out;
  for (const PriorKind s : kShapePriorKinds)
    for (const PriorKind a : kScalePriorKinds) out.emplace_back(s, a);
  return out;
}

PosteriorEval log_posterior(const HierarchicalModel& model, std::span<const double> unconstrained,
                            const LifetimeSample& data) {
  if (unconstrained.size() != model.dimension()) throw DomainError("log_posterior: dimension mismatch");
  PosteriorEval out;
  out.gradient.assign(model.dimension(), 0.0);
  Components c;
  out.value = evaluate_posterior(model, unconstrained, data, out.gradient, c);
  out.log_likelihood = c.log_likelihood;
  out.log_prior = c.log_prior;
  out.log_hyperprior = c.log_hyperprior;
  out.log_jacobian = c.log_jacobian;
  return out;
}

double WeibullPosterior::evaluate(std::span<const double> q, std::span<double> grad) const {
  Components c;
  return evaluate_posterior(model_, q, data_, grad, c);
}

std::optional<WeibullParams> WeibullPosterior::weibull_params(std::span<const double> q) const {
  return WeibullParams(std::exp(q[0]), std::exp(q[1]));
}

}  // namespace weibayes
