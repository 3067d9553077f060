#pragma once

#include <cstdint>

#include <Eigen/Core>

#include "coupledbm/monitoring.hpp"
#include "coupledbm/path_engine.hpp"

namespace cbm {

/// Brownian motion B1 reflected at level h, and a partner B2 correlated with
/// the reflection: B2 = rho * Btilde + sqrt(1 - rho^2) * Z.
struct SingleBarrierParams {
  double h = 1.0;
  double rho = 0.5;
  double t = 1.0;  // evaluation time of the static formulas

  /// h > 0, 0 < rho < 1, t > 0; throws DomainError otherwise.
  void validate() const;
};

struct SingleBarrierPath {
  Eigen::VectorXd b1;
  Eigen::VectorXd reflected;
  Eigen::VectorXd b2;
  int hit_index = -1;  // grid index of the detected crossing, -1 if none
};

/// Drivers "B1" (stream 0) and "Z" (stream 1). params.t is not used; the
/// horizon is grid.t_end(). Accepts rho in [0, 1].
SingleBarrierPath simulate_single_barrier(const SingleBarrierParams& params, const TimeGrid& grid,
                                          std::uint64_t seed, std::uint64_t path_index,
                                          Monitoring monitoring = Monitoring::discrete);

/// B1_T and B2_T only; same random streams as simulate_single_barrier.
Eigen::Vector2d single_barrier_terminal(const SingleBarrierParams& params, const TimeGrid& grid,
                                        std::uint64_t seed, std::uint64_t path_index,
                                        Monitoring monitoring = Monitoring::discrete);

/// n_paths x 2 matrix of (B1_T, B2_T), row i from path_index i.
Eigen::MatrixX2d single_barrier_terminals(const SingleBarrierParams& params, const TimeGrid& grid, int n_paths,
                                          std::uint64_t seed, Monitoring monitoring = Monitoring::discrete,
                                          int threads = 1);

/// Copula of (B1_t, B2_t) at t = params.t.
double copula_value(double u, double v, const SingleBarrierParams& params);

/// P(B1_t - B2_t >= x) at t = params.t.
double survival_diff(double x, const SingleBarrierParams& params);

}  // namespace cbm
