#include "coupledbm/path_engine.hpp"

#include <cmath>

#include "coupledbm/errors.hpp"
#include "coupledbm/gauss.hpp"

namespace cbm {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace

TimeGrid TimeGrid::make(double t_end, double dt) {
  if (!(t_end > 0.0) || !(dt > 0.0) || !std::isfinite(t_end) || !std::isfinite(dt)) {
    throw ConfigError("TimeGrid: t_end and dt must be positive and finite");
  }
  const double ratio = t_end / dt;
  const double n = std::round(ratio);
  if (n < 1.0) throw ConfigError("TimeGrid: dt exceeds t_end");
  if (n > 2.0e9) throw ConfigError("TimeGrid: too many steps");
  if (std::abs(ratio - n) > 1e-9 * n) throw ConfigError("TimeGrid: t_end is not an integer multiple of dt");
  return TimeGrid(t_end, t_end / n, static_cast<int>(n));
}

int TimeGrid::index_of(double t) const {
  const double k = std::round(t / dt_);
  if (k < 0.0 || k > n_steps_ || std::abs(t - k * dt_) > 1e-9 * std::max(1.0, std::abs(t))) {
    throw ConfigError("TimeGrid: time " + std::to_string(t) + " is not a grid point");
  }
  return static_cast<int>(k);
}

std::uint64_t stream_key(std::uint64_t seed, std::uint64_t path_index, std::uint64_t driver_index) {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ (path_index * 0xD1B54A32D192ED03ULL));
  h = splitmix64(h ^ ((driver_index + 1) * 0xAEF17502108EF2D9ULL));
  return h;
}

GaussianStream::GaussianStream(std::uint64_t seed, std::uint64_t path_index, std::uint64_t driver_index,
                               double variance)
    : engine_(stream_key(seed, path_index, driver_index)), scale_(std::sqrt(variance)) {}

double GaussianStream::uniform() {
  // 53 random bits, shifted by half an ulp so 0 and 1 are never produced.
  return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

double GaussianStream::standard() { return norm_quantile_fast(uniform()); }

int PathSet::driver(std::string_view label) const {
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == label) return static_cast<int>(i);
  }
  throw ConfigError("PathSet: unknown driver '" + std::string(label) + "'");
}

PathSet make_increments(const TimeGrid& grid, std::vector<std::string> labels, std::uint64_t seed,
                        std::uint64_t path_index) {
  if (labels.empty()) throw ConfigError("make_increments: need at least one driver");
  PathSet out;
  out.labels = std::move(labels);
  out.seed = seed;
  out.path_index = path_index;
  out.increments.resize(static_cast<Eigen::Index>(out.labels.size()), grid.n_steps());
  for (Eigen::Index d = 0; d < out.increments.rows(); ++d) {
    GaussianStream stream(seed, path_index, static_cast<std::uint64_t>(d), grid.dt());
    double* row = out.increments.row(d).data();
    for (int k = 0; k < grid.n_steps(); ++k) row[k] = stream();
  }
  return out;
}

PathSet make_increments(const TimeGrid& grid, int n_drivers, std::uint64_t seed, std::uint64_t path_index) {
  if (n_drivers <= 0) throw ConfigError("make_increments: n_drivers must be positive");
  std::vector<std::string> labels;
  labels.reserve(n_drivers);
  for (int d = 0; d < n_drivers; ++d) labels.push_back("W" + std::to_string(d));
  return make_increments(grid, std::move(labels), seed, path_index);
}

Eigen::VectorXd cumulate(const PathSet& path, std::string_view driver) {
  return cumulate(path.increments.row(path.driver(driver)).transpose());
}

}  // namespace cbm
