#pragma once

#include <cstdint>
#include <functional>

#include <Eigen/Core>

namespace cbm {

struct MCEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double level = 0.95;
  std::int64_t n_paths = 0;
  std::uint64_t seed = 0;
};

struct EmpiricalCurve {
  Eigen::VectorXd abscissae;  // ascending
  Eigen::VectorXd values;
  Eigen::VectorXd band_low;
  Eigen::VectorXd band_high;
  double level = 0.95;
};

/// Two-sided normal quantile z with P(|N| <= z) = level.
double normal_z(double level);

/// Fraction of samples >= x (ties included) for each x, with the band
/// p +- z sqrt(p(1-p)/n). xs are sorted on output.
EmpiricalCurve empirical_survival(const Eigen::Ref<const Eigen::VectorXd>& samples,
                                  const Eigen::Ref<const Eigen::VectorXd>& xs, double level = 0.95);

/// (g+1) x (g+1) matrix; entry (i, j) is the fraction of pairs whose ranks
/// satisfy rank1 <= i n / g and rank2 <= j n / g.
Eigen::MatrixXd empirical_copula(const Eigen::Ref<const Eigen::MatrixX2d>& pairs, int grid_size);

/// Sample mean, standard error and symmetric normal interval. The sum is
/// taken over sorted values so the result does not depend on input order.
MCEstimate mc_estimate(const Eigen::Ref<const Eigen::VectorXd>& values, double level = 0.95,
                       std::uint64_t seed = 0);

/// sup_x |F_n(x) - cdf(x)|.
double ks_statistic(const Eigen::Ref<const Eigen::VectorXd>& samples, const std::function<double(double)>& cdf);

/// sup over x <= horizon of |F_n(x) - cdf(x)|; samples above the horizon
/// (including +inf) count as censored but stay in n.
double ks_statistic_censored(const Eigen::Ref<const Eigen::VectorXd>& samples,
                             const std::function<double(double)>& cdf, double horizon);

}  // namespace cbm
