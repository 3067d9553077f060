#include "coupledbm/gauss.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include <Eigen/Eigenvalues>

#include "coupledbm/errors.hpp"

namespace cbm {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct GaussLegendre {
  std::vector<double> nodes;    // on (-1, 1), ascending
  std::vector<double> weights;
};

// Golub-Welsch on the Jacobi matrix of the Legendre recurrence, then a
// Newton polish of each node on P_n.
GaussLegendre make_gauss_legendre(int n) {
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    const double beta = k / std::sqrt(4.0 * k * k - 1.0);
    jacobi(k, k - 1) = beta;
    jacobi(k - 1, k) = beta;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jacobi);
  GaussLegendre rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    double x = solver.eigenvalues()(i);
    double dp = 1.0;
    for (int iter = 0; iter < 3; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      x -= p1 / dp;
    }
    rule.nodes[i] = x;
    rule.weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return rule;
}

const GaussLegendre& rule_for(double abs_rho) {
  static const std::array<GaussLegendre, 3> rules = {make_gauss_legendre(6), make_gauss_legendre(12),
                                                     make_gauss_legendre(20)};
  if (abs_rho < 0.3) return rules[0];
  if (abs_rho < 0.75) return rules[1];
  return rules[2];
}

// P(X > h, Y > k), Genz's BVND.
double bvn_upper(double h, double k, double r) {
  const GaussLegendre& gl = rule_for(std::abs(r));
  double hk = h * k;
  double bvn = 0.0;

  if (std::abs(r) < 0.925) {
    const double hs = (h * h + k * k) / 2.0;
    const double asr = std::asin(r);
    for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
      const double sn = std::sin(asr * (gl.nodes[i] + 1.0) / 2.0);
      bvn += gl.weights[i] * std::exp((sn * hk - hs) / (1.0 - sn * sn));
    }
    // Full-interval rule: equivalent to Genz's paired half-node sums.
    bvn = bvn * asr / (2.0 * kTwoPi) + norm_cdf(-h) * norm_cdf(-k);
    return bvn;
  }

  if (r < 0.0) {
    k = -k;
    hk = -hk;
  }
  if (std::abs(r) < 1.0) {
    const double as = (1.0 - r) * (1.0 + r);
    double a = std::sqrt(as);
    const double bs = (h - k) * (h - k);
    const double c = (4.0 - hk) / 8.0;
    const double d = (12.0 - hk) / 16.0;
    bvn = a * std::exp(-(bs / as + hk) / 2.0) *
          (1.0 - c * (bs - as) * (1.0 - d * bs / 5.0) / 3.0 + c * d * as * as / 5.0);
    if (hk > -160.0) {
      const double b = std::sqrt(bs);
      bvn -= std::exp(-hk / 2.0) * std::sqrt(kTwoPi) * norm_cdf(-b / a) * b *
             (1.0 - c * bs * (1.0 - d * bs / 5.0) / 3.0);
    }
    a /= 2.0;
    for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
      const double xs = std::pow(a * (gl.nodes[i] + 1.0), 2);
      const double rs = std::sqrt(1.0 - xs);
      bvn += a * gl.weights[i] *
             (std::exp(-bs / (2.0 * xs) - hk / (1.0 + rs)) / rs -
              std::exp(-(bs / xs + hk) / 2.0) * (1.0 + c * xs * (1.0 + d * xs)));
    }
    bvn = -bvn / kTwoPi;
  }
  if (r > 0.0) {
    bvn += norm_cdf(-std::max(h, k));
  } else {
    bvn = -bvn;
    if (k > h) {
      if (h < 0.0) {
        bvn += norm_cdf(k) - norm_cdf(h);
      } else {
        bvn += norm_cdf(-h) - norm_cdf(-k);
      }
    }
  }
  return bvn;
}

double clamp_probability(double p) { return std::clamp(p, 0.0, 1.0); }

}  // namespace

double norm_cdf(double x) {
  if (std::isnan(x)) throw DomainError("norm_cdf: NaN argument");
  return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

double norm_quantile_fast(double p) {
  const double q = p - 0.5;
  if (std::abs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    const double num =
        ((((((((2509.0809287301226727 * r + 33430.575583588128105) * r + 67265.770927008700853) * r +
              45921.953931549871457) * r + 13731.693765509461125) * r + 1971.5909503065514427) * r +
           133.14166789178437745) * r + 3.387132872796366608));
    const double den =
        ((((((((5226.495278852545925 * r + 28729.085735721942674) * r + 39307.89580009271061) * r +
              21213.794301586595867) * r + 5394.1960214247511077) * r + 687.1870074920579083) * r +
           42.313330701600911252) * r + 1.0));
    return q * num / den;
  }
  double r = q < 0.0 ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double val;
  if (r <= 5.0) {
    r -= 1.6;
    const double num =
        (((((((7.7454501427834140764e-4 * r + 0.0227238449892691845833) * r + 0.24178072517745061177) * r +
             1.27045825245236838258) * r + 3.64784832476320460504) * r + 5.7694972214606914055) * r +
          4.6303378461565452959) * r + 1.42343711074968357734);
    const double den =
        (((((((1.05075007164441684324e-9 * r + 5.475938084995344946e-4) * r + 0.0151986665636164571966) * r +
             0.14810397642748007459) * r + 0.68976733498510000455) * r + 1.6763848301838038494) * r +
          2.05319162663775882187) * r + 1.0);
    val = num / den;
  } else {
    r -= 5.0;
    const double num =
        (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r + 0.0012426609473880784386) * r +
             0.026532189526576123093) * r + 0.29656057182850489123) * r + 1.7848265399172913358) * r +
          5.4637849111641143699) * r + 6.6579046435011037772);
    const double den =
        (((((((2.04426310338993978564e-15 * r + 1.4215117583164458887e-7) * r + 1.8463183175100546818e-5) * r +
             7.868691311456132591e-4) * r + 0.0148753612908506148525) * r + 0.13692988092273580531) * r +
          0.59983220655588793769) * r + 1.0);
    val = num / den;
  }
  return q < 0.0 ? -val : val;
}

double norm_cdf_inv(double p) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("norm_cdf_inv: p must lie in (0,1)");
  double x = norm_quantile_fast(p);
  // One Halley step on Phi(x) - p.
  const double e = norm_cdf(x) - p;
  const double u = e * std::sqrt(kTwoPi) * std::exp(0.5 * x * x);
  if (std::isfinite(u)) x -= u / (1.0 + 0.5 * x * u);
  return x;
}

double bvn_cdf(double x, double y, double rho) {
  if (std::isnan(x) || std::isnan(y) || std::isnan(rho)) throw DomainError("bvn_cdf: NaN argument");
  if (std::abs(rho) > 1.0) throw DomainError("bvn_cdf: |rho| must not exceed 1");
  constexpr double inf = std::numeric_limits<double>::infinity();
  if (x == -inf || y == -inf) return 0.0;
  if (x == inf) return norm_cdf(y);
  if (y == inf) return norm_cdf(x);
  if (rho == 1.0) return norm_cdf(std::min(x, y));
  if (rho == -1.0) return std::max(norm_cdf(x) + norm_cdf(y) - 1.0, 0.0);
  return clamp_probability(bvn_upper(-x, -y, rho));
}

double phi_affine_integral(double a, double b, double x) {
  if (!std::isfinite(a) || !std::isfinite(b) || std::isnan(x)) {
    throw DomainError("phi_affine_integral: a and b must be finite, x not NaN");
  }
  const double s = std::sqrt(a * a + 1.0);
  return bvn_cdf(b / s, x, -a / s);
}

}  // namespace cbm
