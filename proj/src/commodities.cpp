#include "coupledbm/commodities.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <tuple>

#include "coupledbm/errors.hpp"
#include "coupledbm/parallel.hpp"

namespace cbm {
namespace {

constexpr int kMarketDrivers = 4;

// e^{-alpha dt} and the factor making the OU step variance exact.
std::pair<double, double> ou_coefficients(double alpha, double dt) {
  const double decay = std::exp(-alpha * dt);
  const double weight = std::sqrt(-std::expm1(-2.0 * alpha * dt) / (2.0 * alpha * dt));
  return {decay, weight};
}

}  // namespace

void TwoFactorParams::validate() const {
  if (!(sigma_s >= 0.0) || !(sigma_l >= 0.0) || !std::isfinite(sigma_s) || !std::isfinite(sigma_l)) {
    throw ConfigError("two-factor volatilities must be nonnegative");
  }
  if (!(alpha_s > 0.0) || !std::isfinite(alpha_s)) throw ConfigError("alpha_s must be positive");
}

double TwoFactorParams::instantaneous_vol(double tau) const {
  const double s = sigma_s * std::exp(-alpha_s * tau);
  return std::sqrt(s * s + sigma_l * sigma_l);
}

double TwoFactorParams::log_variance(double t, double T) const {
  return sigma_s * sigma_s * std::exp(-2.0 * alpha_s * (T - t)) * -std::expm1(-2.0 * alpha_s * t) / (2.0 * alpha_s) +
         sigma_l * sigma_l * t;
}

TwoFactorParams electricity_params() { return {0.972925, 17.0363, 0.102555}; }
TwoFactorParams coal_params() { return {0.112134, 2.07832, 0.092602}; }

ForwardCurve flat_curve(double level) {
  return [level](double) { return level; };
}

Commodity parse_commodity(std::string_view name) {
  if (name == "electricity" || name == "elec") return Commodity::electricity;
  if (name == "coal") return Commodity::coal;
  throw ConfigError("unknown commodity '" + std::string(name) + "'");
}

void MarketSetup::validate() const {
  elec.validate();
  coal.validate();
  if (!f0_elec || !f0_coal) throw ConfigError("market setup: missing initial forward curve");
  if (!(heat_rate > 0.0) || !std::isfinite(heat_rate)) throw ConfigError("heat_rate must be positive");
  if (!(dependence_clock > 0.0) || !std::isfinite(dependence_clock)) {
    throw ConfigError("dependence_clock must be positive");
  }
  if (const auto* c = std::get_if<ConstantCorrelation>(&dependence)) {
    if (!(std::abs(c->rho) <= 1.0)) throw ConfigError("constant correlation must lie in [-1, 1]");
  } else if (const auto* m = std::get_if<MultiBarrierDependence>(&dependence)) {
    m->barrier.validate();
  } else {
    std::get<LocalDependence>(dependence).fn.validate();
  }
}

Product Product::month_ahead(int n, int resolution) {
  Product p;
  p.kind = Kind::month_ahead;
  p.month = n;
  p.resolution = resolution;
  p.validate();
  return p;
}

Product Product::parse(std::string_view name) {
  if (name == "spot" || name == "Spot") return spot();
  if (name.size() > 3 && name.substr(name.size() - 3) == "MAH") {
    const std::string digits(name.substr(0, name.size() - 3));
    if (!digits.empty() && std::all_of(digits.begin(), digits.end(), [](char c) { return c >= '0' && c <= '9'; })) {
      return month_ahead(std::stoi(digits));
    }
  }
  throw ConfigError("unknown product '" + std::string(name) + "' (expected spot or <n>MAH)");
}

std::string Product::name() const { return kind == Kind::spot ? "spot" : std::to_string(month) + "MAH"; }

void Product::validate() const {
  if (kind == Kind::month_ahead) {
    if (month < 1) throw ConfigError("month-ahead product needs n >= 1");
    if (resolution < 1) throw ConfigError("delivery resolution must be at least 1");
  }
}

std::vector<double> Product::maturities(double t) const {
  validate();
  if (kind == Kind::spot) return {t};
  const double period = 30.0 / kDaysPerYear;
  const double start = delivery_start.value_or(t + (month - 1) * period);
  if (start < t) throw DomainError("product " + name() + ": delivery already started at t");
  std::vector<double> out(static_cast<std::size_t>(resolution));
  for (int j = 0; j < resolution; ++j) out[static_cast<std::size_t>(j)] = start + (j + 0.5) * period / resolution;
  return out;
}

PathSet make_market_drivers(const TimeGrid& grid, std::uint64_t seed, std::uint64_t path_index) {
  return make_increments(grid, {"BX", "BY", "ES", "CS"}, seed, path_index);
}

MarketStepper::MarketStepper(const MarketSetup& setup, double dt) {
  setup.validate();
  const double root_clock = std::sqrt(setup.dependence_clock);
  if (const auto* c = std::get_if<ConstantCorrelation>(&setup.dependence)) {
    rho_const_ = c->rho;
  } else if (const auto* m = std::get_if<MultiBarrierDependence>(&setup.dependence)) {
    BarrierParams scaled = m->barrier;
    scaled.nu /= root_clock;
    scaled.eta /= root_clock;
    dependence_.emplace<MultiBarrierStepper>(scaled, dt, m->monitoring);
  } else {
    dependence_.emplace<LocalCorrStepper>(std::get<LocalDependence>(setup.dependence).fn, root_clock);
  }
  std::tie(decay_e_, weight_e_) = ou_coefficients(setup.elec.alpha_s, dt);
  std::tie(decay_c_, weight_c_) = ou_coefficients(setup.coal.alpha_s, dt);
}

void MarketStepper::step_long(double dbx, double dby) {
  if (auto* m = std::get_if<MultiBarrierStepper>(&dependence_)) {
    m->step(dbx, dby);
    state_.long_elec = m->x();
    state_.long_coal = m->y();
  } else if (auto* l = std::get_if<LocalCorrStepper>(&dependence_)) {
    l->step(dbx, dby);
    state_.long_elec = l->x();
    state_.long_coal = l->y();
  } else {
    state_.long_elec += dbx;
    state_.long_coal += rho_const_ * dbx + std::sqrt(1.0 - rho_const_ * rho_const_) * dby;
  }
}

void MarketStepper::step(double dbx, double dby, double des, double dcs) {
  step_long(dbx, dby);
  state_.short_elec = decay_e_ * state_.short_elec + weight_e_ * des;
  state_.short_coal = decay_c_ * state_.short_coal + weight_c_ * dcs;
}

double log_forward(const TwoFactorParams& p, double f0, double t, double T, double long_b, double short_a) {
  const double a = p.alpha_s;
  const double damp = std::exp(-a * (T - t));
  const double compensator =
      0.5 * p.sigma_s * p.sigma_s * (std::exp(-2.0 * a * (T - t)) - std::exp(-2.0 * a * T)) / (2.0 * a);
  return std::log(f0) + p.sigma_s * damp * short_a - compensator + p.sigma_l * long_b -
         0.5 * p.sigma_l * p.sigma_l * t;
}

Eigen::VectorXd forward_path(const MarketSetup& setup, Commodity commodity, double T, const TimeGrid& grid,
                             const PathSet& drivers) {
  if (!(T >= 0.0)) throw DomainError("forward_path: maturity must be nonnegative");
  if (drivers.n_drivers() != kMarketDrivers || drivers.n_steps() != grid.n_steps()) {
    throw ConfigError("forward_path: drivers do not match the market grid");
  }
  const double f0 = setup.curve(commodity)(T);
  if (!(f0 > 0.0)) throw ConfigError("forward_path: initial curve must be positive");
  const TwoFactorParams& p = setup.params(commodity);
  const int last = std::min(grid.n_steps(), static_cast<int>(std::floor(T / grid.dt() + 1e-9)));

  MarketStepper stepper(setup, grid.dt());
  Eigen::VectorXd out(last + 1);
  out(0) = f0;
  const bool elec = commodity == Commodity::electricity;
  for (int k = 0; k < last; ++k) {
    stepper.step(drivers.increments(0, k), drivers.increments(1, k), drivers.increments(2, k),
                 drivers.increments(3, k));
    const FactorState& s = stepper.state();
    const double t = grid.time(k + 1);
    out(k + 1) = std::exp(log_forward(p, f0, t, T, elec ? s.long_elec : s.long_coal,
                                      elec ? s.short_elec : s.short_coal));
  }
  return out;
}

namespace {

double price_from_state(const MarketSetup& setup, Commodity commodity, const std::vector<double>& maturities,
                        double t, const FactorState& s) {
  const bool elec = commodity == Commodity::electricity;
  const TwoFactorParams& p = setup.params(commodity);
  const ForwardCurve& curve = setup.curve(commodity);
  double sum = 0.0;
  for (const double T : maturities) {
    // f0 kept outside the exponential so zero volatility reproduces f0 exactly
    sum += curve(T) * std::exp(log_forward(p, 1.0, t, T, elec ? s.long_elec : s.long_coal,
                                           elec ? s.short_elec : s.short_coal));
  }
  return sum / static_cast<double>(maturities.size());
}

}  // namespace

double product_price(const MarketSetup& setup, Commodity commodity, const Product& product, double t,
                     const TimeGrid& grid, const PathSet& drivers) {
  if (drivers.n_drivers() != kMarketDrivers || drivers.n_steps() != grid.n_steps()) {
    throw ConfigError("product_price: drivers do not match the market grid");
  }
  const int stop = grid.index_of(t);
  const std::vector<double> maturities = product.maturities(t);
  MarketStepper stepper(setup, grid.dt());
  for (int k = 0; k < stop; ++k) {
    stepper.step(drivers.increments(0, k), drivers.increments(1, k), drivers.increments(2, k),
                 drivers.increments(3, k));
  }
  return price_from_state(setup, commodity, maturities, t, stepper.state());
}

double product_price(const MarketSetup& setup, Commodity commodity, const Product& product, double t,
                     const FactorState& state) {
  return price_from_state(setup, commodity, product.maturities(t), t, state);
}

Eigen::MatrixXd simulate_spreads(const MarketSetup& setup, const std::vector<Product>& products, double t,
                                 const TimeGrid& grid, int n_paths, std::uint64_t seed, int threads) {
  setup.validate();
  if (n_paths < 1) throw ConfigError("n_paths must be positive");
  if (products.empty()) throw ConfigError("simulate_spreads: no products");
  const int stop = grid.index_of(t);
  std::vector<std::vector<double>> maturities;
  for (const auto& p : products) maturities.push_back(p.maturities(t));
  const MarketStepper proto(setup, grid.dt());

  Eigen::MatrixXd out(n_paths, static_cast<Eigen::Index>(products.size()));
  parallel_for(static_cast<std::size_t>(n_paths), threads, [&](std::size_t i) {
    MarketStepper stepper = proto;
    GaussianStream bx(seed, i, 0, grid.dt());
    GaussianStream by(seed, i, 1, grid.dt());
    GaussianStream es(seed, i, 2, grid.dt());
    GaussianStream cs(seed, i, 3, grid.dt());
    for (int k = 0; k < stop; ++k) {
      const double a = bx();
      const double b = by();
      const double c = es();
      stepper.step(a, b, c, cs());
    }
    for (std::size_t j = 0; j < products.size(); ++j) {
      const double e = price_from_state(setup, Commodity::electricity, maturities[j], t, stepper.state());
      const double f = price_from_state(setup, Commodity::coal, maturities[j], t, stepper.state());
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = e - setup.heat_rate * f;
    }
  });
  return out;
}

EmpiricalCurve spread_survival(const MarketSetup& setup, const Product& product, double t,
                               const Eigen::Ref<const Eigen::VectorXd>& xs, int n_paths, const TimeGrid& grid,
                               std::uint64_t seed, double level, int threads) {
  const Eigen::MatrixXd spreads = simulate_spreads(setup, {product}, t, grid, n_paths, seed, threads);
  return empirical_survival(spreads.col(0), xs, level);
}

std::vector<MCEstimate> price_spread_options(const MarketSetup& setup, const std::vector<Product>& products,
                                             double t, int n_paths, const TimeGrid& grid, std::uint64_t seed,
                                             double level, int threads) {
  if (n_paths < 2) throw ConfigError("pricing needs at least 2 paths");
  const Eigen::MatrixXd spreads = simulate_spreads(setup, products, t, grid, n_paths, seed, threads);
  std::vector<MCEstimate> out;
  for (Eigen::Index j = 0; j < spreads.cols(); ++j) {
    const Eigen::VectorXd payoff = spreads.col(j).cwiseMax(0.0);
    out.push_back(mc_estimate(payoff, level, seed));
  }
  return out;
}

MCEstimate price_spread_option(const MarketSetup& setup, const Product& product, double t, int n_paths,
                               const TimeGrid& grid, std::uint64_t seed, double level, int threads) {
  return price_spread_options(setup, {product}, t, n_paths, grid, seed, level, threads).front();
}

double suggest_barrier_shift(const MarketSetup& setup, double eta_base, double sigma_ref, double T) {
  if (!(sigma_ref > 0.0)) throw DomainError("suggest_barrier_shift: sigma_ref must be positive");
  const double fe = setup.f0_elec(T);
  const double fc = setup.heat_rate * setup.f0_coal(T);
  if (!(fe > 0.0) || !(fc > 0.0)) throw DomainError("suggest_barrier_shift: curves must be positive");
  return eta_base + std::log(fc / fe) / sigma_ref;
}

}  // namespace cbm
