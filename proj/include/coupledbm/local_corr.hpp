#pragma once

#include <cstdint>
#include <string_view>

#include <Eigen/Core>

#include "coupledbm/path_engine.hpp"

namespace cbm {

/// Spread-dependent correlation with plateaus rho_min (x <= nu) and
/// rho_max (x >= eta).
struct LocalCorrFn {
  enum class Shape { linear, smoothstep };

  double rho_min = -0.9;
  double rho_max = 0.9;
  double nu = 0.0;
  double eta = 0.5;
  Shape shape = Shape::linear;

  /// |rho_min|, |rho_max| < 1 and nu < eta; ConfigError otherwise.
  void validate() const;
};

LocalCorrFn::Shape parse_shape(std::string_view name);

double rho_tilde(double x, const LocalCorrFn& fn);

/// Euler step with coefficients frozen at the left end point:
///   Y += rho(X - Y) dBX + sqrt(1 - rho(X - Y)^2) dBY,  X += dBX.
/// `scale` converts the state to the units of nu and eta (the spread seen by
/// rho_tilde is scale * (X - Y)).
class LocalCorrStepper {
 public:
  explicit LocalCorrStepper(const LocalCorrFn& fn, double scale = 1.0);

  void step(double dbx, double dby);
  double x() const { return x_; }
  double y() const { return y_; }

 private:
  LocalCorrFn fn_;
  double scale_;
  double x_ = 0.0;
  double y_ = 0.0;
};

struct LocalPath {
  Eigen::VectorXd x;
  Eigen::VectorXd y;
};

/// Drivers "BX" (stream 0) and "BY" (stream 1).
LocalPath simulate_local(const LocalCorrFn& fn, const TimeGrid& grid, std::uint64_t seed, std::uint64_t path_index);

/// (X_T, Y_T) for n_paths paths, row i from path_index i.
Eigen::MatrixX2d local_terminals(const LocalCorrFn& fn, const TimeGrid& grid, int n_paths, std::uint64_t seed,
                                 int threads = 1);

}  // namespace cbm
