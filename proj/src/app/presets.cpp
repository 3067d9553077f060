#include "coupledbm/app/presets.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>

#include "coupledbm/app/config.hpp"
#include "coupledbm/app/runners.hpp"
#include "coupledbm/errors.hpp"
#include "coupledbm/gauss.hpp"
#include "coupledbm/local_corr.hpp"
#include "coupledbm/multibarrier.hpp"
#include "coupledbm/parallel.hpp"
#include "coupledbm/reflection.hpp"

namespace cbm::app {

using nlohmann::json;

namespace {

constexpr double kBrownianDt = 1e-3;
constexpr double kHourDt = 1.0 / kHoursPerYear;

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (n - 1);
  return out;
}

Eigen::VectorXd as_vector(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::string cap_label(std::int64_t n) { return n == kInfiniteReflections ? "inf" : std::to_string(n); }

BarrierParams reference_barrier(std::int64_t n = kInfiniteReflections) {
  BarrierParams p;
  p.nu = 0.0;
  p.eta = 0.5;
  p.rho = 0.9;
  p.max_reflections = n;
  return p;
}

LocalCorrFn reference_local() { return LocalCorrFn{-0.9, 0.9, 0.0, 0.5, LocalCorrFn::Shape::linear}; }

class Run {
 public:
  Run(std::string name, const ReproduceOptions& opt) : name_(std::move(name)), opt_(opt) {
    std::filesystem::create_directories(opt_.out_dir);
    summary_["preset"] = name_;
    summary_["seed"] = opt_.seed;
    summary_["files"] = json::array();
    summary_["results"] = json::object();
  }

  int paths(int fallback) const { return opt_.n_paths.value_or(fallback); }
  double dt(double fallback) const { return opt_.dt.value_or(fallback); }
  double level(double fallback) const { return opt_.level.value_or(fallback); }
  std::uint64_t seed() const { return opt_.seed; }
  int threads() const { return opt_.threads; }
  json& results() { return summary_["results"]; }

  void write(const std::string& file, const std::function<void(std::ostream&)>& body) {
    std::ofstream os(opt_.out_dir / file, std::ios::binary);
    if (!os) throw ConfigError("out: cannot write " + (opt_.out_dir / file).string());
    body(os);
    summary_["files"].push_back(file);
  }

  // Times one stage; the duration lands in runtime_seconds only.
  template <typename Fn>
  void timed(const std::string& stage, Fn&& fn) {
    const auto start = std::chrono::steady_clock::now();
    fn();
    runtime_[stage] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }

  json finish() {
    summary_["runtime_seconds"] = runtime_;
    std::ofstream os(opt_.out_dir / (name_ + "_summary.json"), std::ios::binary);
    os << summary_.dump(2) << '\n';
    return summary_;
  }

 private:
  std::string name_;
  ReproduceOptions opt_;
  json summary_;
  json runtime_ = json::object();
};

void write_survival(Run& run, const std::string& file, const EmpiricalCurve& curve,
                    const std::function<std::optional<double>(double)>& analytic) {
  std::vector<SurvivalRow> rows;
  for (Eigen::Index i = 0; i < curve.abscissae.size(); ++i) {
    const double x = curve.abscissae(i);
    rows.push_back({x, analytic ? analytic(x) : std::nullopt, curve.values(i), curve.band_low(i), curve.band_high(i)});
  }
  run.write(file, [&](std::ostream& os) { write_survival_csv(os, rows); });
}

json point(const EmpiricalCurve& c, double x) {
  for (Eigen::Index i = 0; i < c.abscissae.size(); ++i) {
    if (c.abscissae(i) == x) {
      return json{{"x", x}, {"empirical", c.values(i)}, {"band", {c.band_low(i), c.band_high(i)}}};
    }
  }
  throw ConsistencyError("abscissa not on the output grid");
}

// Grid paths sampled every `stride` steps: columns t, path_0, ...
void write_paths(Run& run, const std::string& file, const TimeGrid& grid, const std::vector<Eigen::VectorXd>& paths,
                 int stride) {
  run.write(file, [&](std::ostream& os) {
    os << 't';
    for (std::size_t p = 0; p < paths.size(); ++p) os << ",path_" << p;
    os << '\n';
    for (int k = 0; k <= grid.n_steps(); k += stride) {
      os << format_number(grid.time(k));
      for (const auto& v : paths) os << ',' << format_number(v(k));
      os << '\n';
    }
  });
}

int stride_for(const TimeGrid& grid, double every) {
  return std::max(1, static_cast<int>(std::lround(every / grid.dt())));
}

double gaussian_copula(double u, double v, double rho) {
  if (u <= 0.0 || v <= 0.0) return 0.0;
  if (u >= 1.0) return v;
  if (v >= 1.0) return u;
  return bvn_cdf(norm_cdf_inv(u), norm_cdf_inv(v), rho);
}

void fig1(Run& run) {
  const int g = 50;
  const SingleBarrierParams p{2.0, 0.95, 1.0};
  Eigen::MatrixXd c(g + 1, g + 1);
  run.timed("analytic", [&] {
    for (int i = 0; i <= g; ++i) {
      for (int j = 0; j <= g; ++j) c(i, j) = copula_value(static_cast<double>(i) / g, static_cast<double>(j) / g, p);
    }
  });
  run.write("fig1_copula_rho0.95.csv", [&](std::ostream& os) { write_copula_csv(os, c); });
  double asym = 0.0;
  for (int i = 0; i <= g; ++i) {
    for (int j = 0; j <= g; ++j) asym = std::max(asym, std::abs(c(i, j) - c(j, i)));
  }
  run.results()["rho0.95"] = {{"h", 2.0}, {"t", 1.0}, {"max_asymmetry", asym}};

  // rho = 1 has no density; its copula is estimated from simulation.
  Eigen::MatrixXd e;
  const int n = run.paths(10000);
  run.timed("simulation", [&] {
    const auto grid = TimeGrid::make(1.0, run.dt(kBrownianDt));
    const auto pairs = single_barrier_terminals(SingleBarrierParams{2.0, 1.0, 1.0}, grid, n, run.seed(),
                                                Monitoring::corrected, run.threads());
    e = empirical_copula(pairs, g);
  });
  run.write("fig1_copula_rho1.csv", [&](std::ostream& os) { write_copula_csv(os, e); });
  run.results()["rho1"] = {{"h", 2.0}, {"t", 1.0}, {"n_paths", n}};
}

void fig2(Run& run) {
  const auto xs = as_vector(linspace(-3.0, 3.0, 121));
  const int n = run.paths(10000);
  for (const double t : {1.0, 20.0}) {
    const SingleBarrierParams p{0.25, 0.9, t};
    const std::string tag = "t" + format_number(t);
    EmpiricalCurve curve;
    run.timed(tag, [&] {
      const auto pairs = single_barrier_terminals(p, TimeGrid::make(t, run.dt(kBrownianDt)), n, run.seed(),
                                                  Monitoring::corrected, run.threads());
      curve = empirical_survival(pairs.col(0) - pairs.col(1), xs, run.level(0.95));
    });
    write_survival(run, "fig2_" + tag + ".csv", curve, [&](double x) { return survival_diff(x, p); });
    json r = point(curve, 0.0);
    r["analytic"] = survival_diff(0.0, p);
    run.results()[tag] = r;
  }
}

void fig3(Run& run) {
  const int n = run.paths(1000);
  const int g = 20;
  const auto grid = TimeGrid::make(1.0, run.dt(kBrownianDt));
  for (const std::int64_t cap : {0, 5, 10, 50}) {
    Eigen::MatrixXd c;
    run.timed("n" + cap_label(cap), [&] {
      const auto term = mb_terminals(reference_barrier(cap), grid, n, run.seed(), Monitoring::corrected, run.threads());
      Eigen::MatrixX2d pairs(n, 2);
      for (int i = 0; i < n; ++i) pairs.row(i) << term[i].x, term[i].y;
      c = empirical_copula(pairs, g);
    });
    run.write("fig3_n" + cap_label(cap) + ".csv", [&](std::ostream& os) { write_copula_csv(os, c); });
    double dev = 0.0;
    for (int i = 0; i <= g; ++i) {
      for (int j = 0; j <= g; ++j) {
        dev = std::max(dev, std::abs(c(i, j) - gaussian_copula(double(i) / g, double(j) / g, -0.9)));
      }
    }
    run.results()["n" + cap_label(cap)] = {{"max_dev_from_gaussian_minus_rho", dev}};
  }
}

void fig4(Run& run) {
  const std::vector<std::int64_t> caps{0, 1, 5, 10, 50, kInfiniteReflections};
  const auto xs = as_vector(linspace(-2.0, 2.0, 81));
  const int n = run.paths(10000);
  for (const double t : {1.0, 20.0}) {
    const std::string tag = "t" + format_number(t);
    Eigen::MatrixXd spreads;
    run.timed(tag, [&] {
      spreads = mb_terminal_spreads(reference_barrier(), caps, TimeGrid::make(t, run.dt(kBrownianDt)), n,
                                    run.seed(), Monitoring::corrected, run.threads());
    });
    for (std::size_t c = 0; c < caps.size(); ++c) {
      const BarrierParams p = reference_barrier(caps[c]);
      const auto series = [&](double x) -> std::optional<double> {
        return p.infinite() ? survival_mb_inf(t, x, p).value() : survival_mb(p.max_reflections, t, x, p);
      };
      const auto curve = empirical_survival(spreads.col(static_cast<Eigen::Index>(c)), xs, run.level(0.95));
      const std::string key = tag + "_n" + cap_label(caps[c]);
      write_survival(run, "fig4_" + key + ".csv", curve, series);
      json r = point(curve, 0.25);
      r["analytic"] = *series(0.25);
      run.results()[key] = r;
    }
  }
}

void fig5(Run& run) {
  const int n = run.paths(50);
  const auto grid = TimeGrid::make(20.0, run.dt(kBrownianDt));
  for (const std::int64_t cap : {0, 5, 10, 50}) {
    std::vector<Eigen::VectorXd> paths(static_cast<std::size_t>(n));
    run.timed("n" + cap_label(cap), [&] {
      parallel_for(paths.size(), run.threads(), [&](std::size_t i) {
        const auto path = simulate_mb(reference_barrier(cap), grid, run.seed(), i, Monitoring::corrected);
        paths[i] = path.x - path.y;
      });
    });
    write_paths(run, "fig5_n" + cap_label(cap) + ".csv", grid, paths, stride_for(grid, 0.01));
    int positive = 0;
    for (const auto& p : paths) positive += p(p.size() - 1) >= 0.0;
    run.results()["n" + cap_label(cap)] = {{"fraction_terminal_nonnegative", double(positive) / n}};
  }
}

void fig6(Run& run) {
  const int n = run.paths(1000);
  Eigen::MatrixXd c;
  run.timed("simulation", [&] {
    const auto pairs =
        local_terminals(reference_local(), TimeGrid::make(1.0, run.dt(kBrownianDt)), n, run.seed(), run.threads());
    c = empirical_copula(pairs, 20);
  });
  run.write("fig6_copula.csv", [&](std::ostream& os) { write_copula_csv(os, c); });
  double asym = 0.0;
  for (Eigen::Index i = 0; i < c.rows(); ++i) {
    for (Eigen::Index j = 0; j < c.cols(); ++j) asym = std::max(asym, std::abs(c(i, j) - c(j, i)));
  }
  run.results()["max_asymmetry"] = asym;
}

void commodity_survival(Run& run, const std::string& prefix, double t_days, double f0_coal,
                        const std::vector<TableColumn>& models, const std::vector<double>& xs) {
  const double t = t_days / kDaysPerYear;
  const auto grid = TimeGrid::make(t, run.dt(kHourDt));
  const auto products = table_products();
  const int n = run.paths(10000);
  for (const auto& m : models) {
    Eigen::MatrixXd spreads;
    run.timed(m.label, [&] {
      spreads = simulate_spreads(preset_market(100.0, f0_coal, m.dependence), products, t, grid, n, run.seed(),
                                 run.threads());
    });
    for (std::size_t p = 0; p < products.size(); ++p) {
      const auto curve = empirical_survival(spreads.col(static_cast<Eigen::Index>(p)), as_vector(xs), run.level(0.95));
      const std::string key = m.label + "_" + products[p].name();
      write_survival(run, prefix + "_" + key + ".csv", curve, nullptr);
      run.results()[key] = point(curve, 0.0);
    }
  }
}

MultiBarrierDependence market_barrier(double nu, double eta, double rho) {
  MultiBarrierDependence d;
  d.barrier.nu = nu;
  d.barrier.eta = eta;
  d.barrier.rho = rho;
  d.monitoring = Monitoring::discrete;
  return d;
}

void fig7(Run& run) {
  commodity_survival(run, "fig7", 365.0, 100.0,
                     {{"multi_barrier", market_barrier(0.0, 0.5, 0.9)}, {"benchmark", ConstantCorrelation{0.275}}},
                     linspace(-40.0, 40.0, 81));
}

void fig8(Run& run) {
  const auto grid = TimeGrid::make(1.0, run.dt(kHourDt));
  const MarketSetup setup = preset_market(100.0, 100.0, market_barrier(0.0, 0.5, 0.9));
  const auto products = table_products();
  const int stride = stride_for(grid, 1.0 / kDaysPerYear);
  std::vector<std::vector<double>> rows;
  run.timed("simulation", [&] {
    MarketStepper stepper(setup, grid.dt());
    GaussianStream bx(run.seed(), 0, 0, grid.dt());
    GaussianStream by(run.seed(), 0, 1, grid.dt());
    GaussianStream es(run.seed(), 0, 2, grid.dt());
    GaussianStream cs(run.seed(), 0, 3, grid.dt());
    for (int k = 0;; ++k) {
      if (k % stride == 0 || k == grid.n_steps()) {
        const double t = grid.time(k);
        std::vector<double> row{t * kDaysPerYear};
        for (const auto& p : products) {
          row.push_back(product_price(setup, Commodity::electricity, p, t, stepper.state()));
          row.push_back(setup.heat_rate * product_price(setup, Commodity::coal, p, t, stepper.state()));
        }
        rows.push_back(std::move(row));
      }
      if (k == grid.n_steps()) break;
      const double a = bx(), b = by(), c = es(), d = cs();
      stepper.step(a, b, c, d);
    }
  });
  run.write("fig8_trajectory.csv", [&](std::ostream& os) {
    os << "t_days";
    for (const auto& p : products) os << ',' << p.name() << "_elec," << p.name() << "_coal";
    os << '\n';
    for (const auto& r : rows) {
      for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << format_number(r[i]);
      os << '\n';
    }
  });
  run.results()["n_points"] = rows.size();
}

void fig9(Run& run) {
  commodity_survival(run, "fig9", 335.0, 120.0,
                     {{"multi_barrier", market_barrier(0.0, 0.5, 0.9)}, {"benchmark", ConstantCorrelation{0.275}}},
                     linspace(-60.0, 20.0, 81));
}

void fig10(Run& run) {
  commodity_survival(run, "fig10", 335.0, 120.0,
                     {{"multi_barrier", market_barrier(170.0, 170.5, 0.9)}, {"benchmark", ConstantCorrelation{0.275}}},
                     linspace(-60.0, 20.0, 81));
}

void table(Run& run, const std::string& name, double f0_coal, double nu, double eta) {
  const auto grid = TimeGrid::make(1.0, run.dt(kHourDt));
  const auto products = table_products();
  const int n = run.paths(10000);
  const double level = run.level(0.95);
  json cells = json::array();
  std::vector<std::string> lines;
  for (const auto& col : table_columns(nu, eta)) {
    std::vector<MCEstimate> est;
    run.timed(col.label, [&] {
      est = price_spread_options(preset_market(100.0, f0_coal, col.dependence), products, 1.0, n, grid, run.seed(),
                                 level, run.threads());
    });
    for (std::size_t p = 0; p < products.size(); ++p) {
      const auto& e = est[p];
      json cell = to_json(e);
      cell["product"] = products[p].name();
      cell["model"] = col.label;
      cells.push_back(cell);
      lines.push_back(products[p].name() + ',' + col.label + ',' + format_number(e.mean) + ',' +
                      format_number(e.std_error) + ',' + format_number(e.ci_low) + ',' + format_number(e.ci_high));
    }
  }
  run.write(name + ".csv", [&](std::ostream& os) {
    os << "product,model,mean,stderr,ci_low,ci_high\n";
    for (const auto& l : lines) os << l << '\n';
  });
  run.results()["cells"] = cells;
}

void local_survival(Run& run) {
  const auto xs = as_vector(linspace(-2.0, 2.0, 81));
  const int n = run.paths(1000);
  for (const double t : {1.0, 20.0}) {
    const std::string tag = "t" + format_number(t);
    EmpiricalCurve curve;
    run.timed(tag, [&] {
      const auto pairs = local_terminals(reference_local(), TimeGrid::make(t, run.dt(kBrownianDt)), n, run.seed(),
                                         run.threads());
      curve = empirical_survival(pairs.col(0) - pairs.col(1), xs, run.level(0.99));
    });
    write_survival(run, "local_survival_" + tag + ".csv", curve, nullptr);
    run.results()[tag] = point(curve, 0.25);
  }
}

void local_paths(Run& run) {
  const int n = run.paths(50);
  const auto grid = TimeGrid::make(20.0, run.dt(kBrownianDt));
  std::vector<Eigen::VectorXd> paths(static_cast<std::size_t>(n));
  run.timed("simulation", [&] {
    parallel_for(paths.size(), run.threads(), [&](std::size_t i) {
      const auto path = simulate_local(reference_local(), grid, run.seed(), i);
      paths[i] = path.x - path.y;
    });
  });
  write_paths(run, "local_paths.csv", grid, paths, stride_for(grid, 0.01));
}

void mb_trajectory(Run& run) {
  const auto grid = TimeGrid::make(20.0, run.dt(kBrownianDt));
  const auto path = simulate_mb(reference_barrier(), grid, run.seed(), 0, Monitoring::corrected);
  const int stride = stride_for(grid, 0.01);
  run.write("mb_trajectory.csv", [&](std::ostream& os) {
    os << "t,x,y,spread\n";
    for (int k = 0; k <= grid.n_steps(); k += stride) {
      os << format_number(grid.time(k)) << ',' << format_number(path.x(k)) << ',' << format_number(path.y(k)) << ','
         << format_number(path.x(k) - path.y(k)) << '\n';
    }
  });
  run.write("mb_trajectory_switches.csv", [&](std::ostream& os) {
    os << "k,tau,alpha\n";
    for (std::size_t k = 0; k < path.ladder.tau_detected.size(); ++k) {
      os << k + 1 << ',' << format_number(path.ladder.tau_detected[k]) << ',' << format_number(path.ladder.alpha[k + 1])
         << '\n';
    }
  });
  run.results()["n_reflections"] = path.ladder.n_reflections;
}

using PresetFn = std::function<void(Run&)>;

const std::map<std::string, PresetFn>& registry() {
  static const std::map<std::string, PresetFn> r{
      {"fig1", fig1},
      {"fig2", fig2},
      {"fig3", fig3},
      {"fig4", fig4},
      {"fig5", fig5},
      {"fig6", fig6},
      {"fig7", fig7},
      {"fig8", fig8},
      {"fig9", fig9},
      {"fig10", fig10},
      {"table2", [](Run& run) { table(run, "table2", 100.0, 0.0, 0.5); }},
      {"table3", [](Run& run) { table(run, "table3", 120.0, 170.0, 170.5); }},
      {"local_survival", local_survival},
      {"local_paths", local_paths},
      {"mb_trajectory", mb_trajectory},
  };
  return r;
}

}  // namespace

const std::vector<PresetInfo>& presets() {
  static const std::vector<PresetInfo> list{
      {"fig1", "single-barrier copula at t=1, h=2: closed form for rho=0.95, simulated for rho=1"},
      {"fig2", "single-barrier survival of B1-B2, h=0.25, rho=0.9, t=1 and t=20"},
      {"fig3", "multi-barrier empirical copula of (X, Y^n), n=0,5,10,50, t=1"},
      {"fig4", "multi-barrier survival of X-Y^n, series and simulation, t=1 and t=20"},
      {"fig5", "50 paths of X-Y^n on [0, 20], n=0,5,10,50"},
      {"fig6", "local-correlation empirical copula at t=1"},
      {"fig7", "electricity-coal spread survival at 365 days, multi-barrier vs benchmark"},
      {"fig8", "one-year trajectory of electricity and coal products"},
      {"fig9", "spread survival at 335 days from 100 vs 120, barriers 0/0.5"},
      {"fig10", "spread survival at 335 days from 100 vs 120, barriers 170/170.5"},
      {"table2", "spread option prices, equal initial values, barriers 0/0.5"},
      {"table3", "spread option prices, 100 vs 120, barriers 170/170.5"},
      {"local_survival", "local-correlation survival of X-Y with 99% bands, t=1 and t=20"},
      {"local_paths", "50 local-correlation paths of X-Y on [0, 20]"},
      {"mb_trajectory", "one multi-barrier trajectory of X, Y and X-Y"},
  };
  return list;
}

json run_reproduce(const std::string& name, const ReproduceOptions& options) {
  const auto& r = registry();
  const auto it = r.find(name);
  if (it == r.end()) {
    std::string known;
    for (const auto& p : presets()) known += (known.empty() ? "" : ", ") + p.name;
    throw ConfigError("preset: unknown preset \"" + name + "\" (" + known + ")");
  }
  if (options.n_paths && *options.n_paths < 1) throw ConfigError("paths: must be at least 1");
  if (options.dt && !(*options.dt > 0.0)) throw ConfigError("dt: must be positive");
  if (options.level && !(*options.level > 0.0 && *options.level < 1.0)) throw ConfigError("level: must be in (0, 1)");
  if (options.threads < 1) throw ConfigError("threads: must be at least 1");
  Run run(name, options);
  it->second(run);
  return run.finish();
}

MarketSetup preset_market(double f0_elec, double f0_coal, Dependence dependence) {
  MarketSetup s;
  s.f0_elec = flat_curve(f0_elec);
  s.f0_coal = flat_curve(f0_coal);
  s.heat_rate = 1.0;
  s.dependence = std::move(dependence);
  s.dependence_clock = kHoursPerYear;
  return s;
}

std::vector<TableColumn> table_columns(double nu, double eta) {
  return {{"rho0", ConstantCorrelation{0.0}},
          {"mb0.3", market_barrier(nu, eta, 0.3)},
          {"mb0.6", market_barrier(nu, eta, 0.6)},
          {"mb0.9", market_barrier(nu, eta, 0.9)},
          {"benchmark0.275", ConstantCorrelation{0.275}}};
}

std::vector<Product> table_products() {
  return {Product::spot(), Product::month_ahead(1), Product::month_ahead(3), Product::month_ahead(6)};
}

}  // namespace cbm::app
