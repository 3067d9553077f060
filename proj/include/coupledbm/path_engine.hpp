#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace cbm {

/// Row-major so that each driver's increments are contiguous.
using IncrementMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Uniform discretization of [0, t_end].
class TimeGrid {
 public:
  /// n_steps = round(t_end/dt); dt is then reset to t_end/n_steps so the grid
  /// ends exactly at t_end. Throws ConfigError when t_end/dt is not within
  /// 1e-9 of an integer or the grid is degenerate.
  static TimeGrid make(double t_end, double dt);

  double t_end() const { return t_end_; }
  double dt() const { return dt_; }
  int n_steps() const { return n_steps_; }
  double time(int k) const { return k == n_steps_ ? t_end_ : k * dt_; }
  /// Grid index of time t; throws ConfigError if t is not a grid point.
  int index_of(double t) const;

 private:
  TimeGrid(double t_end, double dt, int n_steps) : t_end_(t_end), dt_(dt), n_steps_(n_steps) {}
  double t_end_;
  double dt_;
  int n_steps_;
};

/// Key of the random stream for (seed, path_index, driver_index).
std::uint64_t stream_key(std::uint64_t seed, std::uint64_t path_index, std::uint64_t driver_index);

/// Sequential N(0, variance) draws from the stream identified by
/// stream_key. Gaussians come from the inverse CDF of 53-bit uniforms in
/// the open interval (0,1).
class GaussianStream {
 public:
  GaussianStream(std::uint64_t seed, std::uint64_t path_index, std::uint64_t driver_index, double variance = 1.0);

  double operator()() { return scale_ * standard(); }
  double standard();
  double uniform();

 private:
  std::mt19937_64 engine_;
  double scale_;
};

/// Independent Brownian increments for one Monte Carlo path.
struct PathSet {
  std::vector<std::string> labels;
  IncrementMatrix increments;  // one row per driver, n_steps columns
  std::uint64_t seed = 0;
  std::uint64_t path_index = 0;

  int n_drivers() const { return static_cast<int>(increments.rows()); }
  int n_steps() const { return static_cast<int>(increments.cols()); }
  /// Row index of a labelled driver; throws ConfigError if absent.
  int driver(std::string_view label) const;
  auto row(std::string_view label) const { return increments.row(driver(label)); }
};

/// n_drivers streams of i.i.d. N(0, dt) increments, deterministic in
/// (seed, path_index). Labels default to "W0", "W1", ...
PathSet make_increments(const TimeGrid& grid, int n_drivers, std::uint64_t seed, std::uint64_t path_index);
PathSet make_increments(const TimeGrid& grid, std::vector<std::string> labels, std::uint64_t seed,
                        std::uint64_t path_index);

/// Running sums B_{t_k}, B_0 = 0, length n_steps + 1.
Eigen::VectorXd cumulate(const PathSet& path, std::string_view driver);

template <typename Derived>
Eigen::VectorXd cumulate(const Eigen::MatrixBase<Derived>& increments) {
  Eigen::VectorXd out(increments.size() + 1);
  out(0) = 0.0;
  double acc = 0.0;
  for (Eigen::Index k = 0; k < increments.size(); ++k) {
    acc += increments(k);
    out(k + 1) = acc;
  }
  return out;
}

}  // namespace cbm
