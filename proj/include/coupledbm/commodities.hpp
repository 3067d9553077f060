#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "coupledbm/estimators.hpp"
#include "coupledbm/local_corr.hpp"
#include "coupledbm/monitoring.hpp"
#include "coupledbm/multibarrier.hpp"
#include "coupledbm/path_engine.hpp"

namespace cbm {

inline constexpr double kDaysPerYear = 365.0;
inline constexpr double kHoursPerYear = 8760.0;

/// d f(t,T) / f(t,T) = sigma_s e^{-alpha_s (T-t)} dB^s_t + sigma_l dB^l_t
struct TwoFactorParams {
  double sigma_s = 0.0;
  double alpha_s = 1.0;
  double sigma_l = 0.0;

  void validate() const;
  /// Instantaneous volatility of f(., T) at time to maturity tau.
  double instantaneous_vol(double tau) const;
  /// Var[log f(t,T)].
  double log_variance(double t, double T) const;
};

TwoFactorParams electricity_params();
TwoFactorParams coal_params();

struct ConstantCorrelation {
  double rho = 0.0;
};
struct MultiBarrierDependence {
  BarrierParams barrier;
  Monitoring monitoring = Monitoring::discrete;
};
struct LocalDependence {
  LocalCorrFn fn;
};
using Dependence = std::variant<ConstantCorrelation, MultiBarrierDependence, LocalDependence>;

using ForwardCurve = std::function<double(double)>;
ForwardCurve flat_curve(double level);

enum class Commodity { electricity, coal };
Commodity parse_commodity(std::string_view name);

/// Dependence acts on the long-term drivers (B^{E,l}, B^{C,l}) only; the
/// short-term drivers are independent of everything else. Barrier levels
/// and local-correlation abscissae refer to the spread of the long-term
/// drivers measured on a clock with `dependence_clock` units per year.
struct MarketSetup {
  TwoFactorParams elec = electricity_params();
  TwoFactorParams coal = coal_params();
  ForwardCurve f0_elec = flat_curve(100.0);
  ForwardCurve f0_coal = flat_curve(100.0);
  double heat_rate = 1.0;
  Dependence dependence = ConstantCorrelation{};
  double dependence_clock = kHoursPerYear;

  void validate() const;
  const TwoFactorParams& params(Commodity c) const { return c == Commodity::electricity ? elec : coal; }
  const ForwardCurve& curve(Commodity c) const { return c == Commodity::electricity ? f0_elec : f0_coal; }
};

struct Product {
  enum class Kind { spot, month_ahead };
  Kind kind = Kind::spot;
  int month = 0;        // n of nMAH
  int resolution = 30;  // maturities averaged over the delivery period
  /// Start of delivery in years; default: t + 30 (n - 1) days.
  std::optional<double> delivery_start;

  static Product spot() { return {}; }
  static Product month_ahead(int n, int resolution = 30);
  /// "spot", "1MAH", ...
  static Product parse(std::string_view name);
  std::string name() const;
  void validate() const;
  /// Maturities averaged at evaluation time t: {t} for spot, otherwise
  /// `resolution` mid-points of 30-day delivery sub-intervals.
  std::vector<double> maturities(double t) const;
};

/// Market drivers "BX", "BY", "ES", "CS": the two independent inputs of
/// the long-term dependence model and the two short-term drivers.
PathSet make_market_drivers(const TimeGrid& grid, std::uint64_t seed, std::uint64_t path_index);

struct FactorState {
  double long_elec = 0.0;   // B^{E,l}
  double long_coal = 0.0;   // B^{C,l}
  double short_elec = 0.0;  // int_0^t e^{-alpha(t-u)} dB^{E,s}_u
  double short_coal = 0.0;
};

/// Advances the four factors one grid step from driver increments
/// (dBX, dBY, dES, dCS). Short factors use the exact OU transition.
class MarketStepper {
 public:
  MarketStepper(const MarketSetup& setup, double dt);
  void step(double dbx, double dby, double des, double dcs);
  const FactorState& state() const { return state_; }

 private:
  void step_long(double dbx, double dby);

  std::variant<std::monostate, MultiBarrierStepper, LocalCorrStepper> dependence_;
  double rho_const_ = 0.0;
  double decay_e_, weight_e_, decay_c_, weight_c_;
  FactorState state_;
};

/// log f(t,T) given the factor values at t.
double log_forward(const TwoFactorParams& p, double f0, double t, double T, double long_b, double short_a);

/// f(t_k, T) for grid points t_k <= min(T, t_end).
Eigen::VectorXd forward_path(const MarketSetup& setup, Commodity commodity, double T, const TimeGrid& grid,
                             const PathSet& drivers);

/// Price of a product at grid time t: average of f(t, T_j) over its maturities.
double product_price(const MarketSetup& setup, Commodity commodity, const Product& product, double t,
                     const TimeGrid& grid, const PathSet& drivers);

/// Same, from factor values already advanced to t.
double product_price(const MarketSetup& setup, Commodity commodity, const Product& product, double t,
                     const FactorState& state);

/// Spread f^E_product(t) - H f^C_product(t) per path and product:
/// n_paths x products.size(), row i from path_index i. The grid must
/// contain t.
Eigen::MatrixXd simulate_spreads(const MarketSetup& setup, const std::vector<Product>& products, double t,
                                 const TimeGrid& grid, int n_paths, std::uint64_t seed, int threads = 1);

EmpiricalCurve spread_survival(const MarketSetup& setup, const Product& product, double t,
                               const Eigen::Ref<const Eigen::VectorXd>& xs, int n_paths, const TimeGrid& grid,
                               std::uint64_t seed, double level = 0.95, int threads = 1);

/// Undiscounted E[(f^E - H f^C)^+] for one product.
MCEstimate price_spread_option(const MarketSetup& setup, const Product& product, double t, int n_paths,
                               const TimeGrid& grid, std::uint64_t seed, double level = 0.95, int threads = 1);

/// Same, for several products on common paths.
std::vector<MCEstimate> price_spread_options(const MarketSetup& setup, const std::vector<Product>& products,
                                             double t, int n_paths, const TimeGrid& grid, std::uint64_t seed,
                                             double level = 0.95, int threads = 1);

/// eta + log(H f^C(0,T) / f^E(0,T)) / sigma_ref, sigma_ref in the caller's
/// clock units.
double suggest_barrier_shift(const MarketSetup& setup, double eta_base, double sigma_ref, double T = 0.0);

}  // namespace cbm
