#include "coupledbm/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "coupledbm/errors.hpp"
#include "coupledbm/gauss.hpp"

namespace cbm {
namespace {

std::vector<double> sorted_copy(const Eigen::Ref<const Eigen::VectorXd>& v) {
  std::vector<double> out(v.data(), v.data() + v.size());
  std::sort(out.begin(), out.end());
  return out;
}

// Neumaier-compensated sum.
double stable_sum(const std::vector<double>& v) {
  double sum = 0.0;
  double c = 0.0;
  for (const double x : v) {
    const double t = sum + x;
    c += std::abs(sum) >= std::abs(x) ? (sum - t) + x : (x - t) + sum;
    sum = t;
  }
  return sum + c;
}

// Rank (1..n) of each entry of a column, ties broken by position.
std::vector<std::int64_t> ranks(const Eigen::Ref<const Eigen::MatrixX2d>& m, int col) {
  const auto n = static_cast<std::size_t>(m.rows());
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return m(static_cast<Eigen::Index>(a), col) < m(static_cast<Eigen::Index>(b), col);
  });
  std::vector<std::int64_t> r(n);
  for (std::size_t i = 0; i < n; ++i) r[order[i]] = static_cast<std::int64_t>(i) + 1;
  return r;
}

}  // namespace

double normal_z(double level) {
  if (!(level > 0.0 && level < 1.0)) throw ConfigError("confidence level must lie in (0, 1)");
  return norm_cdf_inv(0.5 * (1.0 + level));
}

EmpiricalCurve empirical_survival(const Eigen::Ref<const Eigen::VectorXd>& samples,
                                  const Eigen::Ref<const Eigen::VectorXd>& xs, double level) {
  if (samples.size() == 0) throw ConfigError("empirical_survival: no samples");
  const double z = normal_z(level);
  const std::vector<double> s = sorted_copy(samples);
  const auto n = static_cast<double>(s.size());

  EmpiricalCurve out;
  out.level = level;
  const std::vector<double> x = sorted_copy(xs);
  const auto m = static_cast<Eigen::Index>(x.size());
  out.abscissae = Eigen::Map<const Eigen::VectorXd>(x.data(), m);
  out.values.resize(m);
  out.band_low.resize(m);
  out.band_high.resize(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto below = std::lower_bound(s.begin(), s.end(), x[static_cast<std::size_t>(i)]) - s.begin();
    const double p = (n - static_cast<double>(below)) / n;
    const double half = z * std::sqrt(p * (1.0 - p) / n);
    out.values(i) = p;
    out.band_low(i) = p - half;
    out.band_high(i) = p + half;
  }
  return out;
}

Eigen::MatrixXd empirical_copula(const Eigen::Ref<const Eigen::MatrixX2d>& pairs, int grid_size) {
  if (grid_size < 2) throw ConfigError("empirical_copula: grid_size must be at least 2");
  const std::int64_t n = pairs.rows();
  if (n < 2) throw ConfigError("empirical_copula: need at least 2 pairs");
  const auto r1 = ranks(pairs, 0);
  const auto r2 = ranks(pairs, 1);
  const std::int64_t g = grid_size;
  // Smallest grid index i with rank <= i n / g.
  auto bin = [&](std::int64_t r) { return (r * g + n - 1) / n; };
  Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(g + 1, g + 1);
  for (std::int64_t p = 0; p < n; ++p) counts(bin(r1[p]), bin(r2[p])) += 1.0;
  for (Eigen::Index i = 1; i <= g; ++i) counts.row(i) += counts.row(i - 1);
  for (Eigen::Index j = 1; j <= g; ++j) counts.col(j) += counts.col(j - 1);
  return counts / static_cast<double>(n);
}

MCEstimate mc_estimate(const Eigen::Ref<const Eigen::VectorXd>& values, double level, std::uint64_t seed) {
  if (values.size() < 2) throw ConfigError("mc_estimate: need at least 2 values");
  const double z = normal_z(level);
  std::vector<double> v = sorted_copy(values);
  const auto n = static_cast<double>(v.size());
  const double mean = stable_sum(v) / n;
  for (double& x : v) x = (x - mean) * (x - mean);
  std::sort(v.begin(), v.end());
  const double var = stable_sum(v) / (n - 1.0);

  MCEstimate out;
  out.mean = mean;
  out.std_error = std::sqrt(var / n);
  out.ci_low = mean - z * out.std_error;
  out.ci_high = mean + z * out.std_error;
  out.level = level;
  out.n_paths = static_cast<std::int64_t>(v.size());
  out.seed = seed;
  return out;
}

double ks_statistic(const Eigen::Ref<const Eigen::VectorXd>& samples, const std::function<double(double)>& cdf) {
  if (samples.size() == 0) throw ConfigError("ks_statistic: no samples");
  const std::vector<double> s = sorted_copy(samples);
  const auto n = static_cast<double>(s.size());
  double d = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double f = cdf(s[i]);
    d = std::max({d, (static_cast<double>(i) + 1.0) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

double ks_statistic_censored(const Eigen::Ref<const Eigen::VectorXd>& samples,
                             const std::function<double(double)>& cdf, double horizon) {
  if (samples.size() == 0) throw ConfigError("ks_statistic_censored: no samples");
  const std::vector<double> s = sorted_copy(samples);
  const auto n = static_cast<double>(s.size());
  double d = 0.0;
  std::size_t i = 0;
  for (; i < s.size() && s[i] <= horizon; ++i) {
    const double f = cdf(s[i]);
    d = std::max({d, (static_cast<double>(i) + 1.0) / n - f, f - static_cast<double>(i) / n});
  }
  // Gap between the last observed point and the horizon.
  return std::max(d, cdf(horizon) - static_cast<double>(i) / n);
}

}  // namespace cbm
