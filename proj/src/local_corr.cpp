#include "coupledbm/local_corr.hpp"

#include <cmath>
#include <string>

#include "coupledbm/errors.hpp"
#include "coupledbm/parallel.hpp"

namespace cbm {

void LocalCorrFn::validate() const {
  if (!(std::abs(rho_min) < 1.0) || !(std::abs(rho_max) < 1.0)) {
    throw ConfigError("local correlation plateaus must satisfy |rho| < 1");
  }
  if (!std::isfinite(nu) || !std::isfinite(eta) || !(nu < eta)) throw ConfigError("local correlation: need nu < eta");
}

LocalCorrFn::Shape parse_shape(std::string_view name) {
  if (name == "linear") return LocalCorrFn::Shape::linear;
  if (name == "smoothstep") return LocalCorrFn::Shape::smoothstep;
  throw ConfigError("unknown local correlation shape '" + std::string(name) + "'");
}

double rho_tilde(double x, const LocalCorrFn& fn) {
  if (x <= fn.nu) return fn.rho_min;
  if (x >= fn.eta) return fn.rho_max;
  double w = (x - fn.nu) / (fn.eta - fn.nu);
  if (fn.shape == LocalCorrFn::Shape::smoothstep) w = w * w * (3.0 - 2.0 * w);
  return fn.rho_min + w * (fn.rho_max - fn.rho_min);
}

LocalCorrStepper::LocalCorrStepper(const LocalCorrFn& fn, double scale) : fn_(fn), scale_(scale) {
  fn_.validate();
  if (!(scale > 0.0)) throw ConfigError("local correlation: scale must be positive");
}

void LocalCorrStepper::step(double dbx, double dby) {
  const double r = rho_tilde(scale_ * (x_ - y_), fn_);
  y_ += r * dbx + std::sqrt(1.0 - r * r) * dby;
  x_ += dbx;
}

LocalPath simulate_local(const LocalCorrFn& fn, const TimeGrid& grid, std::uint64_t seed, std::uint64_t path_index) {
  const PathSet drivers = make_increments(grid, {"BX", "BY"}, seed, path_index);
  LocalCorrStepper stepper(fn);
  const int n = grid.n_steps();
  const auto dbx = drivers.row("BX");
  const auto dby = drivers.row("BY");
  LocalPath out;
  out.x.resize(n + 1);
  out.y.resize(n + 1);
  out.x(0) = 0.0;
  out.y(0) = 0.0;
  for (int k = 0; k < n; ++k) {
    stepper.step(dbx(k), dby(k));
    out.x(k + 1) = stepper.x();
    out.y(k + 1) = stepper.y();
  }
  return out;
}

Eigen::MatrixX2d local_terminals(const LocalCorrFn& fn, const TimeGrid& grid, int n_paths, std::uint64_t seed,
                                 int threads) {
  if (n_paths < 1) throw ConfigError("n_paths must be positive");
  fn.validate();
  Eigen::MatrixX2d out(n_paths, 2);
  parallel_for(static_cast<std::size_t>(n_paths), threads, [&](std::size_t i) {
    LocalCorrStepper stepper(fn);
    GaussianStream dbx(seed, i, 0, grid.dt());
    GaussianStream dby(seed, i, 1, grid.dt());
    for (int k = 0; k < grid.n_steps(); ++k) {
      const double a = dbx();
      stepper.step(a, dby());
    }
    out(static_cast<Eigen::Index>(i), 0) = stepper.x();
    out(static_cast<Eigen::Index>(i), 1) = stepper.y();
  });
  return out;
}

}  // namespace cbm
