#include "coupledbm/reflection.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "coupledbm/errors.hpp"
#include "coupledbm/gauss.hpp"
#include "coupledbm/parallel.hpp"

namespace cbm {
namespace {

void check_simulation_params(const SingleBarrierParams& p) {
  if (!(p.h > 0.0) || !std::isfinite(p.h)) throw ConfigError("single barrier: h must be positive");
  if (!(p.rho >= 0.0 && p.rho <= 1.0)) throw ConfigError("single barrier: rho must lie in [0, 1]");
}

double clamp_probability(double p) {
  if (p < -1e-10 || p > 1.0 + 1e-10) {
    throw ConsistencyError("probability out of range: " + std::to_string(p));
  }
  return std::clamp(p, 0.0, 1.0);
}

}  // namespace

void SingleBarrierParams::validate() const {
  if (!(h > 0.0) || !std::isfinite(h)) throw DomainError("h must be positive and finite");
  if (!(rho > 0.0 && rho < 1.0)) throw DomainError("rho must lie in (0, 1)");
  if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("t must be positive and finite");
}

SingleBarrierPath simulate_single_barrier(const SingleBarrierParams& params, const TimeGrid& grid,
                                          std::uint64_t seed, std::uint64_t path_index, Monitoring monitoring) {
  check_simulation_params(params);
  const PathSet drivers = make_increments(grid, {"B1", "Z"}, seed, path_index);
  const int n = grid.n_steps();
  const double trigger = upper_trigger(params.h, 1.0, grid.dt(), monitoring);
  const double s = std::sqrt(std::max(0.0, 1.0 - params.rho * params.rho));

  SingleBarrierPath out;
  out.b1 = cumulate(drivers, "B1");
  const Eigen::VectorXd z = cumulate(drivers, "Z");
  out.reflected = -out.b1;
  for (int k = 1; k <= n; ++k) {
    if (out.b1(k) >= trigger) {
      out.hit_index = k;
      break;
    }
  }
  if (out.hit_index >= 0) {
    const double level = out.b1(out.hit_index);
    out.reflected.tail(n + 1 - out.hit_index).array() = out.b1.tail(n + 1 - out.hit_index).array() - 2.0 * level;
  }
  out.b2 = params.rho * out.reflected + s * z;
  return out;
}

Eigen::Vector2d single_barrier_terminal(const SingleBarrierParams& params, const TimeGrid& grid,
                                        std::uint64_t seed, std::uint64_t path_index, Monitoring monitoring) {
  check_simulation_params(params);
  const double trigger = upper_trigger(params.h, 1.0, grid.dt(), monitoring);
  GaussianStream db(seed, path_index, 0, grid.dt());
  GaussianStream dz(seed, path_index, 1, grid.dt());
  double b = 0.0;
  double z = 0.0;
  double level = 0.0;
  bool hit = false;
  for (int k = 0; k < grid.n_steps(); ++k) {
    b += db();
    if (!hit && b >= trigger) {
      hit = true;
      level = b;
    }
  }
  for (int k = 0; k < grid.n_steps(); ++k) z += dz();
  const double reflected = hit ? b - 2.0 * level : -b;
  const double s = std::sqrt(std::max(0.0, 1.0 - params.rho * params.rho));
  return {b, params.rho * reflected + s * z};
}

Eigen::MatrixX2d single_barrier_terminals(const SingleBarrierParams& params, const TimeGrid& grid, int n_paths,
                                          std::uint64_t seed, Monitoring monitoring, int threads) {
  if (n_paths < 1) throw ConfigError("n_paths must be positive");
  Eigen::MatrixX2d out(n_paths, 2);
  parallel_for(static_cast<std::size_t>(n_paths), threads, [&](std::size_t i) {
    out.row(static_cast<Eigen::Index>(i)) = single_barrier_terminal(params, grid, seed, i, monitoring).transpose();
  });
  return out;
}

double copula_value(double u, double v, const SingleBarrierParams& params) {
  params.validate();
  if (!(u >= 0.0 && u <= 1.0) || !(v >= 0.0 && v <= 1.0)) throw DomainError("copula arguments must lie in [0, 1]");
  if (u == 0.0 || v == 0.0) return 0.0;
  if (u == 1.0) return v;
  if (v == 1.0) return u;

  const double rho = params.rho;
  const double st = std::sqrt(params.t);
  const double a = norm_cdf_inv(u);
  const double b = norm_cdf_inv(v);  // Phi^{-1}(1 - v) = -b
  const double c = 2.0 * rho * params.h / st;
  const double d = 2.0 * params.h / st;

  double value;
  if (u >= norm_cdf(params.h / st)) {
    value = bvn_cdf(a, b + c, rho) + v - norm_cdf(b + c);
  } else {
    value = bvn_cdf(a, b, -rho) + bvn_cdf(a - d, -b - c, rho) + bvn_cdf(a - d, b, rho) - norm_cdf(a - d);
  }
  return clamp_probability(value);
}

double survival_diff(double x, const SingleBarrierParams& params) {
  params.validate();
  if (!std::isfinite(x)) throw DomainError("survival_diff: x must be finite");
  const double h = params.h;
  const double rho = params.rho;
  const double sm = std::sqrt(2.0 * (1.0 - rho) * params.t);
  const double sp = std::sqrt(2.0 * (1.0 + rho) * params.t);
  const double value = norm_cdf((-x + 2.0 * rho * h) / sm) * norm_cdf((x - 2.0 * h * (1.0 + rho)) / sp) +
                       norm_cdf((2.0 * h - x) / sm) * norm_cdf(-x / sp);
  return clamp_probability(value);
}

}  // namespace cbm
