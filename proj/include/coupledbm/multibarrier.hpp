#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include <Eigen/Core>

#include "coupledbm/monitoring.hpp"
#include "coupledbm/path_engine.hpp"

namespace cbm {

inline constexpr std::int64_t kInfiniteReflections = std::numeric_limits<std::int64_t>::max();
inline constexpr std::int64_t kReflectionSafetyCap = 1'000'000;

/// Two-level barrier ladder: the correlation of Y with X flips sign each
/// time the spread X - Y reaches eta (from below) then nu (from above), ...
struct BarrierParams {
  double nu = 0.0;
  double eta = 0.5;
  double rho = 0.9;
  std::int64_t max_reflections = kInfiniteReflections;

  /// eta > 0, nu < eta, 0 <= rho <= 1, max_reflections >= 0; ConfigError otherwise.
  void validate() const;
  bool infinite() const { return max_reflections == kInfiniteReflections; }
};

struct ReflectionLadder {
  std::vector<double> alpha;         // alpha_0 .. alpha_N
  std::vector<double> u;             // u_0 .. u_N, empty when rho = 1
  std::vector<double> tau_detected;  // grid time of each switch
  std::vector<int> tau_index;        // grid index of each switch
  std::int64_t n_reflections = 0;
};

/// alpha_0 = 0, eta for odd k, nu for even k >= 2.
double alpha_seq(std::int64_t k, const BarrierParams& params);

/// u_0 = 0, u_k = eta/sqrt(2(1+rho)) + (eta-nu)/sqrt(2) * (floor(k/2)/sqrt(1-rho) + floor((k-1)/2)/sqrt(1+rho)).
double u_seq(std::int64_t k, const BarrierParams& params);

/// P(tau_k <= t) = 2 Phi(-u_k / sqrt(t)), k >= 1.
double stopping_time_cdf(std::int64_t k, double t, const BarrierParams& params);

/// Spread volatility in regime k: sqrt(2(1 + (-1)^k rho)).
double regime_sigma(std::int64_t k, double rho);

/// Time-stepping of (X, Y) with regime switching. Levels and increments
/// are in the same units; dt is the variance of one driver increment.
class MultiBarrierStepper {
 public:
  MultiBarrierStepper(const BarrierParams& params, double dt, Monitoring monitoring);

  /// Advances one step; returns true when the regime switched at this step.
  bool step(double dbx, double dby);

  double x() const { return x_; }
  double y() const { return y_; }
  double spread() const { return x_ - y_; }
  std::int64_t regime() const { return regime_; }

 private:
  double rho_;
  double s_;
  std::int64_t cap_;
  double up_trigger_;    // regime even: switch when spread >= up_trigger_
  double down_trigger_;  // regime odd: switch when spread <= down_trigger_
  double x_ = 0.0;
  double y_ = 0.0;
  std::int64_t regime_ = 0;
};

struct MultiBarrierPath {
  Eigen::VectorXd x;
  Eigen::VectorXd y;
  ReflectionLadder ladder;
};

/// Drivers "BX" (stream 0) and "BY" (stream 1).
MultiBarrierPath simulate_mb(const BarrierParams& params, const TimeGrid& grid, std::uint64_t seed,
                             std::uint64_t path_index, Monitoring monitoring = Monitoring::discrete);

struct MbTerminal {
  double x = 0.0;
  double y = 0.0;
  std::int64_t n_reflections = 0;
  double first_switch = std::numeric_limits<double>::infinity();
};

/// Terminal state only; same streams as simulate_mb.
MbTerminal simulate_mb_terminal(const BarrierParams& params, const TimeGrid& grid, std::uint64_t seed,
                                std::uint64_t path_index, Monitoring monitoring = Monitoring::discrete);

/// Terminal spreads X_T - Y^n_T for several reflection caps on common
/// random numbers: n_paths x caps.size(), row i from path_index i.
Eigen::MatrixXd mb_terminal_spreads(const BarrierParams& params, const std::vector<std::int64_t>& caps,
                                    const TimeGrid& grid, int n_paths, std::uint64_t seed,
                                    Monitoring monitoring = Monitoring::discrete, int threads = 1);

/// Terminal summaries for n_paths paths.
std::vector<MbTerminal> mb_terminals(const BarrierParams& params, const TimeGrid& grid, int n_paths,
                                     std::uint64_t seed, Monitoring monitoring = Monitoring::discrete,
                                     int threads = 1);

/// n-th term of the survival series: p_0 = Phi(-x/sqrt(2(1+rho)t)); for
/// m >= 1 the mass added by the m-th reflection,
///   Phi((x-a)/(s_{m-1}sqrt t) -+ u_m/sqrt t) - Phi((x-a)/(s_m sqrt t) -+ u_m/sqrt t)
/// with a = alpha_m, s_k = regime_sigma(k), and - for x < a, + otherwise.
double p_term(std::int64_t n, double t, double x, const BarrierParams& params);

/// P(X_t - Y^n_t >= x) = sum_{k <= n} p_k.
double survival_mb(std::int64_t n, double t, double x, const BarrierParams& params);

struct SurvivalSeries {
  Eigen::VectorXd terms;
  Eigen::VectorXd partial_sums;
  double tail_bound = 0.0;
  std::int64_t n_used = 0;  // index of the last term included

  double value() const { return partial_sums(partial_sums.size() - 1); }
};

/// P(X_t - Y_t >= x), summed until the bound on the remainder is below tol.
SurvivalSeries survival_mb_inf(double t, double x, const BarrierParams& params, double tol = 1e-10);

}  // namespace cbm
