#include "coupledbm/app/runners.hpp"

#include <charconv>
#include <cmath>

#include "coupledbm/errors.hpp"
#include "coupledbm/gauss.hpp"
#include "coupledbm/parallel.hpp"
#include "coupledbm/path_engine.hpp"

namespace cbm::app {

namespace {

TimeGrid grid_of(const ExperimentConfig& cfg) { return TimeGrid::make(cfg.t_end, cfg.dt); }

// Exact terminal sampling; the grid plays no role for constant correlation.
Eigen::MatrixX2d constant_pairs(const ConstantModel& m, const ExperimentConfig& cfg) {
  Eigen::MatrixX2d out(cfg.n_paths, 2);
  const double s = std::sqrt(1.0 - m.rho * m.rho);
  parallel_for(static_cast<std::size_t>(cfg.n_paths), cfg.threads, [&](std::size_t i) {
    GaussianStream w1(cfg.seed, i, 0, cfg.t_end);
    GaussianStream w2(cfg.seed, i, 1, cfg.t_end);
    const double x = w1();
    const double z = w2();
    out(static_cast<Eigen::Index>(i), 0) = x;
    out(static_cast<Eigen::Index>(i), 1) = m.rho * x + s * z;
  });
  return out;
}

}  // namespace

std::string format_number(double x) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

std::optional<double> analytic_survival(const ExperimentConfig& cfg, double x) {
  const double t = cfg.t_end;
  if (const auto* s = std::get_if<SingleBarrierModel>(&cfg.model)) {
    return survival_diff(x, SingleBarrierParams{s->h, s->rho, t});
  }
  if (const auto* b = std::get_if<BarrierParams>(&cfg.model)) {
    return b->infinite() ? survival_mb_inf(t, x, *b).value() : survival_mb(b->max_reflections, t, x, *b);
  }
  if (const auto* c = std::get_if<ConstantModel>(&cfg.model)) {
    const double var = 2.0 * (1.0 - c->rho) * t;
    if (var <= 0.0) return x <= 0.0 ? 1.0 : 0.0;
    return norm_cdf(-x / std::sqrt(var));
  }
  return std::nullopt;
}

Eigen::MatrixX2d terminal_pairs(const ExperimentConfig& cfg) {
  const TimeGrid grid = grid_of(cfg);
  if (const auto* s = std::get_if<SingleBarrierModel>(&cfg.model)) {
    return single_barrier_terminals(SingleBarrierParams{s->h, s->rho, cfg.t_end}, grid, cfg.n_paths, cfg.seed,
                                    cfg.monitoring, cfg.threads);
  }
  if (const auto* b = std::get_if<BarrierParams>(&cfg.model)) {
    const auto term = mb_terminals(*b, grid, cfg.n_paths, cfg.seed, cfg.monitoring, cfg.threads);
    Eigen::MatrixX2d out(cfg.n_paths, 2);
    for (int i = 0; i < cfg.n_paths; ++i) {
      out(i, 0) = term[static_cast<std::size_t>(i)].x;
      out(i, 1) = term[static_cast<std::size_t>(i)].y;
    }
    return out;
  }
  if (const auto* l = std::get_if<LocalCorrFn>(&cfg.model)) {
    return local_terminals(*l, grid, cfg.n_paths, cfg.seed, cfg.threads);
  }
  if (const auto* c = std::get_if<ConstantModel>(&cfg.model)) return constant_pairs(*c, cfg);
  throw ConfigError("model: terminal pairs are not defined for the commodity model");
}

Eigen::VectorXd terminal_spreads(const ExperimentConfig& cfg) {
  if (const auto* c = std::get_if<CommodityModel>(&cfg.model)) {
    return simulate_spreads(c->setup, {c->product}, cfg.horizon(), grid_of(cfg), cfg.n_paths, cfg.seed,
                            cfg.threads)
        .col(0);
  }
  const Eigen::MatrixX2d p = terminal_pairs(cfg);
  return p.col(0) - p.col(1);
}

std::vector<SurvivalRow> run_survival(const ExperimentConfig& cfg) {
  cfg.validate();
  const Eigen::VectorXd xs = Eigen::Map<const Eigen::VectorXd>(cfg.xs.data(), static_cast<Eigen::Index>(cfg.xs.size()));
  const EmpiricalCurve curve = empirical_survival(terminal_spreads(cfg), xs, cfg.level);
  std::vector<SurvivalRow> rows;
  for (Eigen::Index i = 0; i < curve.abscissae.size(); ++i) {
    SurvivalRow r;
    r.x = curve.abscissae(i);
    r.analytic = analytic_survival(cfg, r.x);
    if (r.analytic && !(*r.analytic >= -1e-10 && *r.analytic <= 1.0 + 1e-10)) {
      throw ConsistencyError("analytic survival outside [0, 1] at x = " + format_number(r.x));
    }
    r.empirical = curve.values(i);
    r.band_low = curve.band_low(i);
    r.band_high = curve.band_high(i);
    rows.push_back(r);
  }
  return rows;
}

void write_survival_csv(std::ostream& os, const std::vector<SurvivalRow>& rows) {
  os << kSurvivalHeader << '\n';
  for (const auto& r : rows) {
    os << format_number(r.x) << ',' << (r.analytic ? format_number(*r.analytic) : "") << ','
       << format_number(r.empirical) << ',' << format_number(r.band_low) << ',' << format_number(r.band_high) << '\n';
  }
}

MCEstimate run_price(const ExperimentConfig& cfg) {
  const auto* c = std::get_if<CommodityModel>(&cfg.model);
  if (!c) throw ConfigError("model: price requires the commodity model, got " + cfg.model_name());
  cfg.validate();
  return price_spread_option(c->setup, c->product, cfg.horizon(), cfg.n_paths, grid_of(cfg), cfg.seed, cfg.level,
                             cfg.threads);
}

nlohmann::json to_json(const MCEstimate& e) {
  return nlohmann::json{{"mean", e.mean},       {"stderr", e.std_error}, {"ci", {e.ci_low, e.ci_high}},
                        {"level", e.level},     {"n_paths", e.n_paths},  {"seed", e.seed}};
}

void write_copula_csv(std::ostream& os, const Eigen::MatrixXd& copula) {
  const Eigen::Index g = copula.rows() - 1;
  os << "u,v,copula\n";
  for (Eigen::Index i = 0; i <= g; ++i) {
    for (Eigen::Index j = 0; j <= g; ++j) {
      os << format_number(static_cast<double>(i) / g) << ',' << format_number(static_cast<double>(j) / g) << ','
         << format_number(copula(i, j)) << '\n';
    }
  }
}

}  // namespace cbm::app
