#include "weibayes/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>
#include <thread>

#include "weibayes/error.hpp"
#include "weibayes/estimators.hpp"
#include "weibayes/rng.hpp"

namespace weibayes {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kMaxEnergyError = 1000.0;

double log_sum_exp(double a, double b) {
  if (a == -kInf) return b;
  if (b == -kInf) return a;
  const double m = std::max(a, b);
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void add_into(std::vector<double>& acc, std::span<const double> x) {
  for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += x[i];
}

// Dual averaging of log step size toward a target mean acceptance statistic.
class StepSizeAdapter {
 public:
  StepSizeAdapter(double delta) : delta_(delta) {}

  void restart(double eps) {
    mu_ = std::log(10.0 * eps);
    counter_ = 0;
    s_bar_ = 0.0;
    x_bar_ = 0.0;
  }

  double learn(double accept_stat) {
    ++counter_;
    accept_stat = std::min(1.0, accept_stat);
    const double t = static_cast<double>(counter_);
    const double eta = 1.0 / (t + kT0);
    s_bar_ = (1.0 - eta) * s_bar_ + eta * (delta_ - accept_stat);
    const double x = mu_ - s_bar_ * std::sqrt(t) / kGamma;
    const double x_eta = std::pow(t, -kKappa);
    x_bar_ = (1.0 - x_eta) * x_bar_ + x_eta * x;
    return std::exp(x);
  }

  double final_step() const { return std::exp(x_bar_); }

 private:
  static constexpr double kGamma = 0.05;
  static constexpr double kT0 = 10.0;
  static constexpr double kKappa = 0.75;
  double delta_;
  double mu_ = 0.0;
  std::size_t counter_ = 0;
  double s_bar_ = 0.0;
  double x_bar_ = 0.0;
};

// Windowed diagonal metric estimation: fast initial buffer, doubling slow
// windows, terminal buffer for the step size only.
class MetricAdapter {
 public:
  MetricAdapter(std::size_t dim, std::size_t warmup) : warmup_(warmup), mean_(dim, 0.0), m2_(dim, 0.0) {
    if (warmup < 20) {
      enabled_ = false;
      return;
    }
    if (init_buffer_ + base_window_ + term_buffer_ > warmup) {
      init_buffer_ = static_cast<std::size_t>(0.15 * static_cast<double>(warmup));
      term_buffer_ = static_cast<std::size_t>(0.1 * static_cast<double>(warmup));
      base_window_ = warmup - (init_buffer_ + term_buffer_);
    }
    window_size_ = base_window_;
    next_window_ = init_buffer_ + window_size_ - 1;
  }

  // Returns true when a window just closed and `inv_metric` was updated.
  bool learn(std::vector<double>& inv_metric, std::span<const double> q) {
    if (!enabled_) return false;
    if (in_window()) {
      ++n_;
      for (std::size_t i = 0; i < q.size(); ++i) {
        const double delta = q[i] - mean_[i];
        mean_[i] += delta / static_cast<double>(n_);
        m2_[i] += delta * (q[i] - mean_[i]);
      }
    }
    if (counter_ == next_window_ && counter_ != warmup_) {
      compute_next_window();
      const double n = static_cast<double>(n_);
      for (std::size_t i = 0; i < inv_metric.size(); ++i) {
        const double var = n_ > 1 ? m2_[i] / (n - 1.0) : 1.0;
        inv_metric[i] = (n / (n + 5.0)) * var + 1e-3 * (5.0 / (n + 5.0));
      }
      n_ = 0;
      std::fill(mean_.begin(), mean_.end(), 0.0);
      std::fill(m2_.begin(), m2_.end(), 0.0);
      ++counter_;
      return true;
    }
    ++counter_;
    return false;
  }

 private:
  bool in_window() const {
    return counter_ >= init_buffer_ && counter_ < warmup_ - term_buffer_ && counter_ != warmup_;
  }

  void compute_next_window() {
    const std::size_t last = warmup_ - term_buffer_ - 1;
    if (next_window_ == last) return;
    window_size_ *= 2;
    next_window_ = counter_ + window_size_;
    if (next_window_ != last && next_window_ + 2 * window_size_ >= warmup_ - term_buffer_) next_window_ = last;
  }

  bool enabled_ = true;
  std::size_t warmup_;
  std::size_t init_buffer_ = 75;
  std::size_t term_buffer_ = 50;
  std::size_t base_window_ = 25;
  std::size_t window_size_ = 0;
  std::size_t next_window_ = 0;
  std::size_t counter_ = 0;
  std::size_t n_ = 0;
  std::vector<double> mean_;
  std::vector<double> m2_;
};

struct Transition {
  double accept_stat = 0.0;
  double energy = 0.0;
  int depth = 0;
  bool divergent = false;
};

class NutsChain {
 public:
  NutsChain(const LogDensity& target, const SamplerConfig& config, std::size_t chain)
      : target_(target),
        config_(config),
        rng_(config.seed, chain + 1),
        dim_(target.dimension()),
        inv_metric_(dim_, 1.0) {}

  void initialize(std::size_t chain) {
    const std::vector<double> base = target_.initial_point();
    if (base.size() != dim_) throw SamplerError("initial point has the wrong dimension");
    z_.q.resize(dim_);
    z_.p.assign(dim_, 0.0);
    z_.grad.assign(dim_, 0.0);
    for (int attempt = 0; attempt < 100; ++attempt) {
      for (std::size_t i = 0; i < dim_; ++i) z_.q[i] = base[i] + rng_.uniform(-config_.init_jitter, config_.init_jitter);
      z_.log_density = target_.evaluate(z_.q, z_.grad);
      if (std::isfinite(z_.log_density)) return;
    }
    z_.q = base;
    z_.log_density = target_.evaluate(z_.q, z_.grad);
    if (!std::isfinite(z_.log_density)) {
      throw SamplerError("chain " + std::to_string(chain) + ": log density is not finite at the initial point");
    }
  }

  void run(std::size_t chain, PosteriorDraws& out) {
    initialize(chain);
    const std::size_t kept = config_.kept();
    StepSizeAdapter step_adapter(config_.target_accept);
    MetricAdapter metric_adapter(dim_, config_.warmup);
    if (config_.fixed_step_size) {
      eps_ = *config_.fixed_step_size;
    } else {
      init_step_size();
      step_adapter.restart(eps_);
    }

    std::size_t warmup_divergent = 0;
    for (std::size_t it = 0; it < config_.iterations; ++it) {
      const Transition tr = transition();
      if (it < config_.warmup) {
        if (tr.divergent) ++warmup_divergent;
        if (!config_.fixed_step_size) {
          eps_ = step_adapter.learn(tr.accept_stat);
          if (metric_adapter.learn(inv_metric_, z_.q)) {
            init_step_size();
            step_adapter.restart(eps_);
          }
          if (it + 1 == config_.warmup) eps_ = step_adapter.final_step();
        }
        continue;
      }
      const std::size_t k = chain * kept + (it - config_.warmup);
      std::copy(z_.q.begin(), z_.q.end(), out.unconstrained.begin() + static_cast<std::ptrdiff_t>(k * dim_));
      out.energy[k] = tr.energy;
      out.accept[k] = tr.accept_stat;
      out.divergent[k] = tr.divergent ? 1 : 0;
      out.tree_depth[k] = tr.depth;
      if (!out.shape.empty()) {
        const auto wp = target_.weibull_params(z_.q);
        out.shape[k] = wp->shape();
        out.scale[k] = wp->scale();
      }
    }
    if (config_.warmup > 0 && warmup_divergent == config_.warmup) {
      std::ostringstream msg;
      msg << "chain " << chain << ": every warmup transition diverged (step size " << eps_ << ")";
      throw SamplerError(msg.str());
    }
    warmup_divergences_ = warmup_divergent;
    out.step_size[chain] = eps_;
    std::copy(inv_metric_.begin(), inv_metric_.end(),
              out.inv_metric.begin() + static_cast<std::ptrdiff_t>(chain * dim_));
  }

  std::size_t warmup_divergences() const { return warmup_divergences_; }

 private:
  void sample_momentum(PhasePoint& z) {
    for (std::size_t i = 0; i < dim_; ++i) z.p[i] = rng_.normal() / std::sqrt(inv_metric_[i]);
  }

  std::vector<double> sharp(const std::vector<double>& p) const {
    std::vector<double> v(dim_);
    for (std::size_t i = 0; i < dim_; ++i) v[i] = inv_metric_[i] * p[i];
    return v;
  }

  static bool no_u_turn(std::span<const double> sharp_minus, std::span<const double> sharp_plus,
                        std::span<const double> rho) {
    return dot(sharp_plus, rho) > 0.0 && dot(sharp_minus, rho) > 0.0;
  }

  // Heuristic initial step: double or halve until a single leapfrog step's
  // acceptance probability crosses 0.8.
  void init_step_size() {
    PhasePoint z = z_;
    sample_momentum(z);
    const double h0 = hamiltonian(z, inv_metric_);
    auto delta_h = [&](double eps) {
      PhasePoint trial = z;
      if (!leapfrog(trial, eps, target_, inv_metric_)) return -kInf;
      const double h = hamiltonian(trial, inv_metric_);
      return std::isfinite(h) ? h0 - h : -kInf;
    };
    double dh = delta_h(eps_);
    const int direction = dh > std::log(0.8) ? 1 : -1;
    for (int i = 0; i < 100; ++i) {
      eps_ = direction == 1 ? 2.0 * eps_ : 0.5 * eps_;
      if (eps_ > 1e7 || eps_ < 1e-12) break;
      dh = delta_h(eps_);
      if (direction == 1 && !(dh > std::log(0.8))) break;
      if (direction == -1 && !(dh < std::log(0.8))) break;
    }
    eps_ = std::clamp(eps_, 1e-12, 1e7);
  }

  struct TreeScratch {
    double h0 = 0.0;
    std::size_t n_leapfrog = 0;
    double sum_metro_prob = 0.0;
    bool divergent = false;
  };

  bool build_tree(int depth, PhasePoint& z, PhasePoint& z_propose, std::vector<double>& p_sharp_beg,
                  std::vector<double>& p_sharp_end, std::vector<double>& rho, std::vector<double>& p_beg,
                  std::vector<double>& p_end, double sign, double& log_sum_weight, TreeScratch& s) {
    if (depth == 0) {
      const bool ok = leapfrog(z, sign * eps_, target_, inv_metric_);
      ++s.n_leapfrog;
      double h = ok ? hamiltonian(z, inv_metric_) : kInf;
      if (!std::isfinite(h)) h = kInf;
      if (h - s.h0 > kMaxEnergyError) s.divergent = true;
      log_sum_weight = log_sum_exp(log_sum_weight, s.h0 - h);
      s.sum_metro_prob += s.h0 - h > 0.0 ? 1.0 : std::exp(s.h0 - h);
      if (s.divergent) return false;
      z_propose = z;
      p_sharp_beg = sharp(z.p);
      p_sharp_end = p_sharp_beg;
      add_into(rho, z.p);
      p_beg = z.p;
      p_end = z.p;
      return true;
    }

    std::vector<double> p_sharp_init_end(dim_), p_init_end(dim_), rho_init(dim_, 0.0);
    double log_sum_weight_init = -kInf;
    if (!build_tree(depth - 1, z, z_propose, p_sharp_beg, p_sharp_init_end, rho_init, p_beg, p_init_end, sign,
                    log_sum_weight_init, s)) {
      return false;
    }

    PhasePoint z_propose_final = z;
    std::vector<double> p_sharp_final_beg(dim_), p_final_beg(dim_), rho_final(dim_, 0.0);
    double log_sum_weight_final = -kInf;
    if (!build_tree(depth - 1, z, z_propose_final, p_sharp_final_beg, p_sharp_end, rho_final, p_final_beg, p_end,
                    sign, log_sum_weight_final, s)) {
      return false;
    }

    const double log_sum_weight_subtree = log_sum_exp(log_sum_weight_init, log_sum_weight_final);
    log_sum_weight = log_sum_exp(log_sum_weight, log_sum_weight_subtree);
    if (rng_.uniform() < std::exp(log_sum_weight_final - log_sum_weight_subtree)) z_propose = std::move(z_propose_final);

    std::vector<double> rho_subtree = rho_init;
    add_into(rho_subtree, rho_final);
    add_into(rho, rho_subtree);

    bool persist = no_u_turn(p_sharp_beg, p_sharp_end, rho_subtree);
    std::vector<double> rho_extended = rho_init;
    add_into(rho_extended, p_final_beg);
    persist = persist && no_u_turn(p_sharp_beg, p_sharp_final_beg, rho_extended);
    rho_extended = rho_final;
    add_into(rho_extended, p_init_end);
    persist = persist && no_u_turn(p_sharp_init_end, p_sharp_end, rho_extended);
    return persist;
  }

  Transition transition() {
    sample_momentum(z_);
    TreeScratch s;
    s.h0 = hamiltonian(z_, inv_metric_);

    PhasePoint z_fwd = z_;
    PhasePoint z_bck = z_;
    PhasePoint z_sample = z_;
    PhasePoint z_propose = z_;

    std::vector<double> p_fwd_bck = z_.p, p_sharp_fwd_bck = sharp(z_.p);
    std::vector<double> p_sharp_fwd_fwd = p_sharp_fwd_bck, p_fwd_fwd = z_.p;
    std::vector<double> p_bck_fwd = z_.p, p_sharp_bck_fwd = p_sharp_fwd_bck;
    std::vector<double> p_sharp_bck_bck = p_sharp_fwd_bck, p_bck_bck = z_.p;
    std::vector<double> rho = z_.p;

    double log_sum_weight = 0.0;
    int depth = 0;
    while (depth < config_.max_tree_depth) {
      std::vector<double> rho_fwd(dim_, 0.0), rho_bck(dim_, 0.0);
      bool valid_subtree = false;
      double log_sum_weight_subtree = -kInf;

      if (rng_.uniform() > 0.5) {
        rho_bck = rho;
        p_bck_fwd = p_fwd_bck;
        p_sharp_bck_fwd = p_sharp_fwd_bck;
        valid_subtree = build_tree(depth, z_fwd, z_propose, p_sharp_fwd_bck, p_sharp_fwd_fwd, rho_fwd, p_fwd_bck,
                                   p_fwd_fwd, 1.0, log_sum_weight_subtree, s);
      } else {
        rho_fwd = rho;
        p_fwd_bck = p_bck_fwd;
        p_sharp_fwd_bck = p_sharp_bck_fwd;
        valid_subtree = build_tree(depth, z_bck, z_propose, p_sharp_bck_fwd, p_sharp_bck_bck, rho_bck, p_bck_fwd,
                                   p_bck_bck, -1.0, log_sum_weight_subtree, s);
      }
      if (!valid_subtree) break;
      ++depth;

      if (log_sum_weight_subtree > log_sum_weight) {
        z_sample = z_propose;
      } else if (rng_.uniform() < std::exp(log_sum_weight_subtree - log_sum_weight)) {
        z_sample = z_propose;
      }
      log_sum_weight = log_sum_exp(log_sum_weight, log_sum_weight_subtree);

      rho = rho_bck;
      add_into(rho, rho_fwd);

      // Orientation: the backward end of the whole trajectory is the forward
      // end of the backward subtree (p_*_bck_bck), and vice versa.
      bool persist = no_u_turn(p_sharp_bck_bck, p_sharp_fwd_fwd, rho);
      std::vector<double> rho_extended = rho_bck;
      add_into(rho_extended, p_fwd_bck);
      persist = persist && no_u_turn(p_sharp_bck_bck, p_sharp_fwd_bck, rho_extended);
      rho_extended = rho_fwd;
      add_into(rho_extended, p_bck_fwd);
      persist = persist && no_u_turn(p_sharp_bck_fwd, p_sharp_fwd_fwd, rho_extended);
      if (!persist) break;
    }

    z_ = std::move(z_sample);
    Transition tr;
    tr.depth = depth;
    tr.divergent = s.divergent;
    tr.accept_stat = s.n_leapfrog > 0 ? s.sum_metro_prob / static_cast<double>(s.n_leapfrog) : 0.0;
    tr.energy = hamiltonian(z_, inv_metric_);
    return tr;
  }

  const LogDensity& target_;
  const SamplerConfig& config_;
  Rng rng_;
  std::size_t dim_;
  std::vector<double> inv_metric_;
  PhasePoint z_;
  double eps_ = 1.0;
  std::size_t warmup_divergences_ = 0;
};

double mean_of(std::span<const double> x) {
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double sample_variance(std::span<const double> x) {
  if (x.size() < 2) return 0.0;
  const double m = mean_of(x);
  double s = 0.0;
  for (const double v : x) s += (v - m) * (v - m);
  return s / static_cast<double>(x.size() - 1);
}

std::vector<std::vector<double>> diagnostic_series(const PosteriorDraws& draws, std::size_t d) {
  if (d == 0 && draws.has_weibull()) return draws.shape_chains();
  if (d == 1 && draws.has_weibull()) return draws.scale_chains();
  return draws.coordinate(d);
}

bool all_constant(const std::vector<std::vector<double>>& chains) {
  const double v = chains.front().front();
  for (const auto& c : chains)
    for (const double x : c)
      if (x != v) return false;
  return true;
}

}  // namespace

void SamplerConfig::validate() const {
  if (chains < 2) throw ConfigError("sampler: at least 2 chains are required for split R-hat");
  if (warmup >= iterations) throw ConfigError("sampler: warmup must be smaller than iterations");
  if (iterations - warmup < 4) throw ConfigError("sampler: at least 4 kept draws per chain are required");
  if (!(target_accept > 0.0 && target_accept < 1.0)) throw ConfigError("sampler: target_accept must lie in (0, 1)");
  if (max_tree_depth < 1) throw ConfigError("sampler: max_tree_depth must be at least 1");
  if (!(init_jitter >= 0.0) || !std::isfinite(init_jitter)) throw ConfigError("sampler: init_jitter must be >= 0");
  if (fixed_step_size && !(*fixed_step_size > 0.0 && std::isfinite(*fixed_step_size))) {
    throw ConfigError("sampler: fixed step size must be positive");
  }
}

std::vector<std::vector<double>> PosteriorDraws::coordinate(std::size_t d) const {
  std::vector<std::vector<double>> out(chains, std::vector<double>(kept));
  for (std::size_t c = 0; c < chains; ++c)
    for (std::size_t i = 0; i < kept; ++i) out[c][i] = at(c, i, d);
  return out;
}

std::vector<std::vector<double>> PosteriorDraws::shape_chains() const {
  std::vector<std::vector<double>> out(chains);
  for (std::size_t c = 0; c < chains; ++c)
    out[c].assign(shape.begin() + static_cast<std::ptrdiff_t>(c * kept),
                  shape.begin() + static_cast<std::ptrdiff_t>((c + 1) * kept));
  return out;
}

std::vector<std::vector<double>> PosteriorDraws::scale_chains() const {
  std::vector<std::vector<double>> out(chains);
  for (std::size_t c = 0; c < chains; ++c)
    out[c].assign(scale.begin() + static_cast<std::ptrdiff_t>(c * kept),
                  scale.begin() + static_cast<std::ptrdiff_t>((c + 1) * kept));
  return out;
}

double hamiltonian(const PhasePoint& z, std::span<const double> inv_metric) {
  double k = 0.0;
  for (std::size_t i = 0; i < z.p.size(); ++i) k += inv_metric[i] * z.p[i] * z.p[i];
  return -z.log_density + 0.5 * k;
}

bool leapfrog(PhasePoint& z, double eps, const LogDensity& target, std::span<const double> inv_metric) {
  const std::size_t d = z.q.size();
  for (std::size_t i = 0; i < d; ++i) z.p[i] += 0.5 * eps * z.grad[i];
  for (std::size_t i = 0; i < d; ++i) z.q[i] += eps * inv_metric[i] * z.p[i];
  z.log_density = target.evaluate(z.q, z.grad);
  if (!std::isfinite(z.log_density)) return false;
  for (std::size_t i = 0; i < d; ++i) z.p[i] += 0.5 * eps * z.grad[i];
  for (std::size_t i = 0; i < d; ++i)
    if (!std::isfinite(z.p[i]) || !std::isfinite(z.q[i])) return false;
  return true;
}

PosteriorDraws nuts_sample(const LogDensity& target, const SamplerConfig& config) {
  config.validate();
  const std::size_t dim = target.dimension();
  if (dim == 0) throw ConfigError("sampler: target has dimension 0");

  PosteriorDraws out;
  out.chains = config.chains;
  out.kept = config.kept();
  out.dim = dim;
  const std::size_t total = out.chains * out.kept;
  out.unconstrained.assign(total * dim, 0.0);
  out.energy.assign(total, 0.0);
  out.accept.assign(total, 0.0);
  out.divergent.assign(total, 0);
  out.tree_depth.assign(total, 0);
  out.step_size.assign(out.chains, 0.0);
  out.inv_metric.assign(out.chains * dim, 1.0);
  if (target.weibull_params(target.initial_point())) {
    out.shape.assign(total, 0.0);
    out.scale.assign(total, 0.0);
  }

  std::vector<std::exception_ptr> errors(config.chains);
  std::vector<std::size_t> warmup_div(config.chains, 0);
  auto work = [&](std::size_t c) {
    try {
      NutsChain chain(target, config, c);
      chain.run(c, out);
      warmup_div[c] = chain.warmup_divergences();
    } catch (...) {
      errors[c] = std::current_exception();
    }
  };
  if (config.parallel && std::thread::hardware_concurrency() > 1) {
    std::vector<std::thread> workers;
    for (std::size_t c = 0; c < config.chains; ++c) workers.emplace_back(work, c);
    for (auto& w : workers) w.join();
  } else {
    for (std::size_t c = 0; c < config.chains; ++c) work(c);
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  out.divergence_count = static_cast<std::size_t>(std::count(out.divergent.begin(), out.divergent.end(), 1));
  out.warmup_divergences = std::accumulate(warmup_div.begin(), warmup_div.end(), std::size_t{0});
  out.accept_stat = mean_of(out.accept);
  return out;
}

PosteriorDraws nuts_sample(const HierarchicalModel& model, const LifetimeSample& data, const SamplerConfig& config) {
  const WeibullPosterior target(model, data);
  return nuts_sample(target, config);
}

double r_hat(const std::vector<std::vector<double>>& chains) {
  if (chains.size() < 2) throw DiagnosticError("r_hat: at least 2 chains are required");
  const std::size_t n = chains.front().size();
  if (n < 4) throw DiagnosticError("r_hat: at least 4 draws per chain are required");
  for (const auto& c : chains)
    if (c.size() != n) throw DiagnosticError("r_hat: chains must have equal length");

  const std::size_t half = n / 2;
  std::vector<double> means;
  std::vector<double> vars;
  for (const auto& c : chains) {
    const std::span<const double> all(c);
    for (const auto part : {all.first(half), all.last(half)}) {
      means.push_back(mean_of(part));
      vars.push_back(sample_variance(part));
    }
  }
  const double w = mean_of(vars);
  if (!(w > 0.0)) throw DiagnosticError("r_hat: zero within-chain variance");
  const double len = static_cast<double>(half);
  const double b = len * sample_variance(means);
  const double var_plus = (len - 1.0) / len * w + b / len;
  return std::sqrt(var_plus / w);
}

double ess(const std::vector<std::vector<double>>& chains) {
  const std::size_t m = chains.size();
  if (m == 0) throw DiagnosticError("ess: no chains");
  const std::size_t n = chains.front().size();
  if (n < 4) throw DiagnosticError("ess: at least 4 draws per chain are required");
  for (const auto& c : chains)
    if (c.size() != n) throw DiagnosticError("ess: chains must have equal length");

  std::vector<double> chain_mean(m);
  for (std::size_t c = 0; c < m; ++c) chain_mean[c] = mean_of(chains[c]);
  // Biased autocovariance of every chain at one lag, averaged over chains.
  auto mean_acov = [&](std::size_t lag) {
    double total = 0.0;
    for (std::size_t c = 0; c < m; ++c) {
      double s = 0.0;
      for (std::size_t i = 0; i + lag < n; ++i) s += (chains[c][i] - chain_mean[c]) * (chains[c][i + lag] - chain_mean[c]);
      total += s / static_cast<double>(n);
    }
    return total / static_cast<double>(m);
  };

  const double nd = static_cast<double>(n);
  const double mean_var = mean_acov(0) * nd / (nd - 1.0);
  double var_plus = mean_var * (nd - 1.0) / nd;
  if (m > 1) var_plus += sample_variance(chain_mean);
  if (!(var_plus > 0.0)) throw DiagnosticError("ess: zero variance");

  std::vector<double> rho(n, 0.0);
  rho[0] = 1.0;
  double rho_even = 1.0;
  double rho_odd = 1.0 - (mean_var - mean_acov(1)) / var_plus;
  std::size_t t = 0;
  while (t < n - 5 && rho_even + rho_odd > 0.0) {
    rho[t + 1] = rho_odd;
    rho_even = 1.0 - (mean_var - mean_acov(t + 2)) / var_plus;
    rho_odd = 1.0 - (mean_var - mean_acov(t + 3)) / var_plus;
    if (rho_even + rho_odd >= 0.0) {
      rho[t + 2] = rho_even;
      rho[t + 3] = rho_odd;
    }
    t += 2;
  }
  const std::size_t max_t = t;
  if (rho_even > 0.0) rho[max_t + 1] = rho_even;

  for (std::size_t k = 1; k + 2 <= max_t; k += 2) {
    if (rho[k + 1] + rho[k + 2] > rho[k - 1] + rho[k]) {
      rho[k + 1] = (rho[k - 1] + rho[k]) / 2.0;
      rho[k + 2] = rho[k + 1];
    }
  }
  const double total = static_cast<double>(m) * nd;
  double tau = -1.0 + 2.0 * std::accumulate(rho.begin(), rho.begin() + static_cast<std::ptrdiff_t>(max_t), 0.0) +
               rho[max_t];
  tau = std::max(tau, 1.0 / std::log10(total));
  return total / tau;
}

std::vector<double> r_hat(const PosteriorDraws& draws) {
  std::vector<double> out(draws.dim);
  for (std::size_t d = 0; d < draws.dim; ++d) out[d] = r_hat(diagnostic_series(draws, d));
  return out;
}

std::vector<double> ess(const PosteriorDraws& draws) {
  std::vector<double> out(draws.dim);
  for (std::size_t d = 0; d < draws.dim; ++d) out[d] = ess(diagnostic_series(draws, d));
  return out;
}

double PosteriorSummary::max_r_hat() const noexcept {
  double m = 0.0;
  for (const double r : r_hat) m = std::max(m, r);
  return m;
}

double PosteriorSummary::min_ess() const noexcept {
  double m = kInf;
  for (const double e : ess) m = std::min(m, e);
  return m;
}

PosteriorSummary summarize(const PosteriorDraws& draws, std::size_t n_data) {
  if (draws.chains == 0 || draws.kept == 0) throw DomainError("summarize: no draws");
  if (!draws.has_weibull()) throw DomainError("summarize: draws carry no Weibull parameters");
  PosteriorSummary s;
  s.mean_estimate = WeibullParams(mean_of(draws.shape), mean_of(draws.scale));
  s.var_shape = sample_variance(draws.shape);
  s.var_scale = sample_variance(draws.scale);
  s.total_asymptotic_variance = total_asymptotic_variance(s.mean_estimate, n_data);
  s.divergences = draws.divergence_count;
  s.accept_stat = draws.accept_stat;
  for (std::size_t d = 0; d < draws.dim; ++d) {
    const auto series = diagnostic_series(draws, d);
    if (all_constant(series)) {
      s.r_hat.push_back(1.0);
      s.ess.push_back(static_cast<double>(draws.chains * draws.kept));
      continue;
    }
    try {
      s.r_hat.push_back(draws.chains >= 2 && draws.kept >= 4 ? r_hat(series) : kInf);
    } catch (const DiagnosticError&) {
      s.r_hat.push_back(kInf);
    }
    try {
      s.ess.push_back(draws.kept >= 4 ? ess(series) : 0.0);
    } catch (const DiagnosticError&) {
      s.ess.push_back(0.0);
    }
  }
  return s;
}

void write_draws_csv(std::ostream& os, const PosteriorDraws& draws) {
  os << "chain,iteration,shape,scale,energy,divergent\n";
  const auto old_precision = os.precision(17);
  for (std::size_t c = 0; c < draws.chains; ++c) {
    for (std::size_t i = 0; i < draws.kept; ++i) {
      const std::size_t k = c * draws.kept + i;
      os << c << ',' << i << ',';
      if (draws.has_weibull()) {
        os << draws.shape[k] << ',' << draws.scale[k];
      } else {
        os << ',';
      }
      os << ',' << draws.energy[k] << ',' << static_cast<int>(draws.divergent[k]) << '\n';
    }
  }
  os.precision(old_precision);
}

}  // namespace weibayes
