#include "coupledbm/multibarrier.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "coupledbm/errors.hpp"
#include "coupledbm/gauss.hpp"
#include "coupledbm/parallel.hpp"

namespace cbm {
namespace {

void require_series_params(const BarrierParams& p, double t) {
  p.validate();
  if (!(p.rho < 1.0)) throw DomainError("series formulas require rho < 1");
  if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("t must be positive and finite");
}

// Phi(a) - Phi(b), evaluated on the tail side that keeps precision.
double phi_diff(double a, double b) {
  if (a > 0.0 && b > 0.0) return norm_cdf(-b) - norm_cdf(-a);
  return norm_cdf(a) - norm_cdf(b);
}

double checked_probability(double p, const char* what) {
  if (!(p >= -1e-10 && p <= 1.0 + 1e-10)) {
    throw ConsistencyError(std::string(what) + " outside [0, 1]: " + std::to_string(p));
  }
  return std::clamp(p, 0.0, 1.0);
}

}  // namespace

void BarrierParams::validate() const {
  if (!std::isfinite(nu) || !std::isfinite(eta)) throw ConfigError("barriers must be finite");
  if (!(eta > 0.0)) throw ConfigError("eta must be positive");
  if (!(nu < eta)) throw ConfigError("nu must be below eta");
  if (!(rho >= 0.0 && rho <= 1.0)) throw ConfigError("rho must lie in [0, 1]");
  if (max_reflections < 0) throw ConfigError("max_reflections must be nonnegative");
}

double alpha_seq(std::int64_t k, const BarrierParams& params) {
  if (k < 0) throw DomainError("alpha_seq: k must be nonnegative");
  if (k == 0) return 0.0;
  return (k % 2 == 1) ? params.eta : params.nu;
}

double u_seq(std::int64_t k, const BarrierParams& params) {
  if (k < 0) throw DomainError("u_seq: k must be nonnegative");
  if (!(params.rho < 1.0)) throw DomainError("u_seq: rho must be below 1");
  if (k == 0) return 0.0;
  const double rho = params.rho;
  const double up = static_cast<double>(k / 2);
  const double down = static_cast<double>((k - 1) / 2);
  return params.eta / std::sqrt(2.0 * (1.0 + rho)) +
         (params.eta - params.nu) / std::sqrt(2.0) * (up / std::sqrt(1.0 - rho) + down / std::sqrt(1.0 + rho));
}

double stopping_time_cdf(std::int64_t k, double t, const BarrierParams& params) {
  if (k < 1) throw DomainError("stopping_time_cdf: k must be at least 1");
  if (!(t > 0.0)) throw DomainError("stopping_time_cdf: t must be positive");
  return 2.0 * norm_cdf(-u_seq(k, params) / std::sqrt(t));
}

double regime_sigma(std::int64_t k, double rho) {
  return std::sqrt(2.0 * (1.0 + (k % 2 == 0 ? rho : -rho)));
}

MultiBarrierStepper::MultiBarrierStepper(const BarrierParams& params, double dt, Monitoring monitoring)
    : rho_(params.rho),
      s_(std::sqrt(std::max(0.0, 1.0 - params.rho * params.rho))),
      cap_(params.max_reflections),
      up_trigger_(upper_trigger(params.eta, regime_sigma(0, params.rho), dt, monitoring)),
      down_trigger_(lower_trigger(params.nu, regime_sigma(1, params.rho), dt, monitoring)) {
  params.validate();
}

bool MultiBarrierStepper::step(double dbx, double dby) {
  const double sign = (regime_ % 2 == 0) ? -1.0 : 1.0;
  x_ += dbx;
  y_ += sign * rho_ * dbx + s_ * dby;
  if (regime_ >= cap_) return false;
  const double spread = x_ - y_;
  const bool crossed = (regime_ % 2 == 0) ? spread >= up_trigger_ : spread <= down_trigger_;
  if (!crossed) return false;
  if (++regime_ > kReflectionSafetyCap) throw ConsistencyError("multi-barrier: reflection safety cap exceeded");
  return true;
}

MultiBarrierPath simulate_mb(const BarrierParams& params, const TimeGrid& grid, std::uint64_t seed,
                             std::uint64_t path_index, Monitoring monitoring) {
  const PathSet drivers = make_increments(grid, {"BX", "BY"}, seed, path_index);
  MultiBarrierStepper stepper(params, grid.dt(), monitoring);
  const int n = grid.n_steps();
  const auto dbx = drivers.row("BX");
  const auto dby = drivers.row("BY");

  MultiBarrierPath out;
  out.x.resize(n + 1);
  out.y.resize(n + 1);
  out.x(0) = 0.0;
  out.y(0) = 0.0;
  for (int k = 0; k < n; ++k) {
    if (stepper.step(dbx(k), dby(k))) {
      out.ladder.tau_index.push_back(k + 1);
      out.ladder.tau_detected.push_back(grid.time(k + 1));
    }
    out.x(k + 1) = stepper.x();
    out.y(k + 1) = stepper.y();
  }
  auto& ladder = out.ladder;
  ladder.n_reflections = stepper.regime();
  for (std::int64_t k = 0; k <= ladder.n_reflections; ++k) {
    ladder.alpha.push_back(alpha_seq(k, params));
    if (params.rho < 1.0) ladder.u.push_back(u_seq(k, params));
  }
  return out;
}

MbTerminal simulate_mb_terminal(const BarrierParams& params, const TimeGrid& grid, std::uint64_t seed,
                                std::uint64_t path_index, Monitoring monitoring) {
  MultiBarrierStepper stepper(params, grid.dt(), monitoring);
  GaussianStream dbx(seed, path_index, 0, grid.dt());
  GaussianStream dby(seed, path_index, 1, grid.dt());
  MbTerminal out;
  for (int k = 0; k < grid.n_steps(); ++k) {
    const double a = dbx();
    const double b = dby();
    if (stepper.step(a, b) && stepper.regime() == 1) out.first_switch = grid.time(k + 1);
  }
  out.x = stepper.x();
  out.y = stepper.y();
  out.n_reflections = stepper.regime();
  return out;
}

Eigen::MatrixXd mb_terminal_spreads(const BarrierParams& params, const std::vector<std::int64_t>& caps,
                                    const TimeGrid& grid, int n_paths, std::uint64_t seed, Monitoring monitoring,
                                    int threads) {
  if (n_paths < 1) throw ConfigError("n_paths must be positive");
  if (caps.empty()) throw ConfigError("mb_terminal_spreads: no reflection caps given");
  std::vector<MultiBarrierStepper> proto;
  for (const auto cap : caps) {
    BarrierParams p = params;
    p.max_reflections = cap;
    proto.emplace_back(p, grid.dt(), monitoring);
  }
  Eigen::MatrixXd out(n_paths, static_cast<Eigen::Index>(caps.size()));
  parallel_for(static_cast<std::size_t>(n_paths), threads, [&](std::size_t i) {
    std::vector<MultiBarrierStepper> steppers = proto;
    GaussianStream dbx(seed, i, 0, grid.dt());
    GaussianStream dby(seed, i, 1, grid.dt());
    for (int k = 0; k < grid.n_steps(); ++k) {
      const double a = dbx();
      const double b = dby();
      for (auto& s : steppers) s.step(a, b);
    }
    for (std::size_t c = 0; c < steppers.size(); ++c) {
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = steppers[c].spread();
    }
  });
  return out;
}

std::vector<MbTerminal> mb_terminals(const BarrierParams& params, const TimeGrid& grid, int n_paths,
                                     std::uint64_t seed, Monitoring monitoring, int threads) {
  if (n_paths < 1) throw ConfigError("n_paths must be positive");
  std::vector<MbTerminal> out(static_cast<std::size_t>(n_paths));
  parallel_for(out.size(), threads,
               [&](std::size_t i) { out[i] = simulate_mb_terminal(params, grid, seed, i, monitoring); });
  return out;
}

double p_term(std::int64_t n, double t, double x, const BarrierParams& params) {
  require_series_params(params, t);
  if (n < 0) throw DomainError("p_term: n must be nonnegative");
  if (!std::isfinite(x)) throw DomainError("p_term: x must be finite");
  const double st = std::sqrt(t);
  if (n == 0) return norm_cdf(-x / (regime_sigma(0, params.rho) * st));
  const double a = alpha_seq(n, params);
  const double um = u_seq(n, params) / st;
  const double z1 = (x - a) / (regime_sigma(n - 1, params.rho) * st);
  const double z2 = (x - a) / (regime_sigma(n, params.rho) * st);
  return x < a ? phi_diff(z1 - um, z2 - um) : phi_diff(z1 + um, z2 + um);
}

double survival_mb(std::int64_t n, double t, double x, const BarrierParams& params) {
  require_series_params(params, t);
  if (n < 0) throw DomainError("survival_mb: n must be nonnegative");
  double sum = p_term(0, t, x, params);
  for (std::int64_t k = 1; k <= n; ++k) {
    // Every later term is bounded by P(tau_k <= t); once that underflows
    // the remaining terms are exactly zero.
    if (stopping_time_cdf(k, t, params) == 0.0) break;
    sum += p_term(k, t, x, params);
  }
  return checked_probability(sum, "survival_mb");
}

SurvivalSeries survival_mb_inf(double t, double x, const BarrierParams& params, double tol) {
  require_series_params(params, t);
  if (!(tol > 0.0)) throw DomainError("survival_mb_inf: tol must be positive");
  constexpr std::int64_t kMaxTerms = 1'000'000;
  std::vector<double> terms;
  double tail = 0.0;
  for (std::int64_t k = 0;; ++k) {
    if (k >= kMaxTerms) throw ConsistencyError("survival_mb_inf: series did not converge");
    terms.push_back(p_term(k, t, x, params));
    tail = 0.0;
    for (std::int64_t j = k + 1; j < kMaxTerms; ++j) {
      const double b = stopping_time_cdf(j, t, params);
      tail += b;
      if (b < tol / 10.0) break;
    }
    if (tail < tol) break;
  }
  SurvivalSeries out;
  const auto n = static_cast<Eigen::Index>(terms.size());
  out.terms = Eigen::Map<const Eigen::VectorXd>(terms.data(), n);
  out.partial_sums.resize(n);
  double acc = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    acc += out.terms(k);
    checked_probability(acc, "survival_mb_inf partial sum");
    out.partial_sums(k) = acc;
  }
  out.tail_bound = tail;
  out.n_used = n - 1;
  return out;
}

}  // namespace cbm
