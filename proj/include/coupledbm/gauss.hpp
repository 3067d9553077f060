#pragma once

#include <cmath>
#include <numbers>

#include <Eigen/Core>

namespace cbm {

/// Standard normal density.
template <typename Scalar>
inline Scalar norm_pdf(Scalar x) {
  return std::exp(Scalar(-0.5) * x * x) / std::sqrt(Scalar(2) * std::numbers::pi_v<Scalar>);
}

/// Standard normal CDF. Accepts +-inf; throws DomainError on NaN.
double norm_cdf(double x);

/// Elementwise Phi over an Eigen array expression.
template <typename Derived>
auto norm_cdf(const Eigen::ArrayBase<Derived>& x) {
  return x.unaryExpr([](typename Derived::Scalar v) { return norm_cdf(double(v)); });
}

/// Inverse standard normal CDF on the open interval (0,1).
///
/// Wichura's AS241 rational approximation followed by one Halley step on
/// Phi. Throws DomainError for p outside (0,1).
double norm_cdf_inv(double p);

/// AS241 without the refinement step and without argument checks.
/// Relative accuracy ~1e-16 over (0,1); used on the hot path of the
/// Gaussian generator, where p is always strictly inside (0,1).
double norm_quantile_fast(double p);

/// Bivariate standard normal CDF P(X <= x, Y <= y) with corr(X,Y) = rho.
///
/// |rho| < 1 uses the Drezner-Wesolowsky single-integral form evaluated by
/// Gauss-Legendre quadrature (Genz's scheme, 6/12/20 nodes depending on
/// |rho|), absolute error below 1e-14. rho = +-1 resolves to the Frechet
/// bounds. Infinite x or y resolve to the marginals.
double bvn_cdf(double x, double y, double rho);

/// Closed form of the Gaussian integral
///   int_{-inf}^{x} Phi(a u + b) phi(u) du = Phi_{-a/sqrt(a^2+1)}(b/sqrt(a^2+1), x).
/// x may be +inf.
double phi_affine_integral(double a, double b, double x);

}  // namespace cbm
