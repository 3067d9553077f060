#include "coupledbm/app/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "coupledbm/errors.hpp"

namespace cbm::app {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& field, const std::string& what) { throw ConfigError(field + ": " + what); }

std::string join(const std::string& prefix, const std::string& key) {
  return prefix.empty() ? key : prefix + "." + key;
}

// Reads keys of one JSON object and rejects keys nobody asked for.
class Fields {
 public:
  Fields(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(path_.empty() ? "config" : path_, "expected an object");
  }

  std::string field(const std::string& key) const { return join(path_, key); }
  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key) && !j_.at(key).is_null();
  }
  const json& at(const std::string& key) {
    if (!has(key)) fail(field(key), "required field missing");
    return j_.at(key);
  }

  double number(const std::string& key, std::optional<double> fallback = std::nullopt) {
    if (!has(key)) {
      if (fallback) return *fallback;
      fail(field(key), "required field missing");
    }
    const json& v = j_.at(key);
    if (!v.is_number()) fail(field(key), "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) fail(field(key), "must be finite");
    return x;
  }

  std::int64_t integer(const std::string& key, std::int64_t fallback) {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (v.is_number_integer()) return v.get<std::int64_t>();
    if (v.is_number_float()) {
      const double x = v.get<double>();
      if (std::isfinite(x) && x == std::floor(x) && std::abs(x) < 9e15) return static_cast<std::int64_t>(x);
    }
    fail(field(key), "expected an integer");
  }

  std::string text(const std::string& key, std::optional<std::string> fallback = std::nullopt) {
    if (!has(key)) {
      if (fallback) return *fallback;
      fail(field(key), "required field missing");
    }
    const json& v = j_.at(key);
    if (!v.is_string()) fail(field(key), "expected a string");
    return v.get<std::string>();
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) fail(field(it.key()), "unknown field");
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

// Runs a module validator and attaches the field prefix to its message.
template <typename Fn>
void checked(const std::string& field, Fn&& fn) {
  try {
    fn();
  } catch (const ConfigError& e) {
    fail(field, e.what());
  } catch (const DomainError& e) {
    fail(field, e.what());
  }
}

double in_range(double x, double lo, double hi, const std::string& field, bool open = false) {
  const bool ok = open ? (x > lo && x < hi) : (x >= lo && x <= hi);
  if (!ok) {
    std::ostringstream os;
    os << "must be in " << (open ? "(" : "[") << lo << ", " << hi << (open ? ")" : "]") << ", got " << x;
    fail(field, os.str());
  }
  return x;
}

double positive(double x, const std::string& field) {
  if (!(x > 0.0)) fail(field, "must be positive");
  return x;
}

std::int64_t reflection_cap(Fields& f, const std::string& key) {
  if (!f.has(key)) return kInfiniteReflections;
  const json& v = f.at(key);
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "inf" || s == "infinity") return kInfiniteReflections;
    fail(f.field(key), "expected a nonnegative integer or \"inf\"");
  }
  const std::int64_t n = f.integer(key, 0);
  if (n < 0) fail(f.field(key), "must be nonnegative");
  return n;
}

Monitoring monitoring_field(Fields& f, const std::string& key, Monitoring fallback) {
  if (!f.has(key)) return fallback;
  const std::string s = f.text(key);
  Monitoring m{};
  checked(f.field(key), [&] { m = parse_monitoring(s); });
  return m;
}

BarrierParams barrier_params(Fields& f) {
  BarrierParams p;
  p.nu = f.number("nu", 0.0);
  p.eta = f.number("eta", 0.5);
  p.rho = in_range(f.number("rho", 0.9), 0.0, 1.0, f.field("rho"));
  if (!(p.eta > 0.0)) fail(f.field("eta"), "must be positive");
  if (!(p.nu < p.eta)) fail(f.field("nu"), "must be below eta");
  p.max_reflections = reflection_cap(f, "n");
  checked(f.field("n"), [&] { p.validate(); });
  return p;
}

LocalCorrFn local_fn(Fields& f) {
  LocalCorrFn fn;
  fn.rho_min = in_range(f.number("rho_min", -0.9), -1.0, 1.0, f.field("rho_min"), true);
  fn.rho_max = in_range(f.number("rho_max", 0.9), -1.0, 1.0, f.field("rho_max"), true);
  fn.nu = f.number("nu", 0.0);
  fn.eta = f.number("eta", 0.5);
  if (!(fn.nu < fn.eta)) fail(f.field("nu"), "must be below eta");
  if (f.has("shape")) {
    const std::string s = f.text("shape");
    checked(f.field("shape"), [&] { fn.shape = parse_shape(s); });
  }
  checked(f.field("shape"), [&] { fn.validate(); });
  return fn;
}

TwoFactorParams two_factor(Fields& parent, const std::string& key, TwoFactorParams p) {
  if (!parent.has(key)) return p;
  Fields f(parent.at(key), parent.field(key));
  p.sigma_s = f.number("sigma_s", p.sigma_s);
  p.alpha_s = f.number("alpha_s", p.alpha_s);
  p.sigma_l = f.number("sigma_l", p.sigma_l);
  if (p.sigma_s < 0.0) fail(f.field("sigma_s"), "must be nonnegative");
  if (p.sigma_l < 0.0) fail(f.field("sigma_l"), "must be nonnegative");
  positive(p.alpha_s, f.field("alpha_s"));
  f.finish();
  return p;
}

Dependence dependence(Fields& parent) {
  if (!parent.has("dependence")) return ConstantCorrelation{0.0};
  Fields f(parent.at("dependence"), parent.field("dependence"));
  const std::string type = f.text("type");
  Dependence out;
  if (type == "constant") {
    out = ConstantCorrelation{in_range(f.number("rho"), -1.0, 1.0, f.field("rho"))};
  } else if (type == "multi_barrier") {
    MultiBarrierDependence d;
    d.barrier = barrier_params(f);
    d.monitoring = monitoring_field(f, "monitoring", Monitoring::discrete);
    out = d;
  } else if (type == "local") {
    out = LocalDependence{local_fn(f)};
  } else {
    fail(f.field("type"), "unknown dependence \"" + type + "\" (constant, multi_barrier, local)");
  }
  f.finish();
  return out;
}

CommodityModel commodity(Fields& f) {
  CommodityModel m;
  m.setup.elec = two_factor(f, "electricity", electricity_params());
  m.setup.coal = two_factor(f, "coal", coal_params());
  m.setup.f0_elec = flat_curve(positive(f.number("f0_elec", 100.0), f.field("f0_elec")));
  m.setup.f0_coal = flat_curve(positive(f.number("f0_coal", 100.0), f.field("f0_coal")));
  m.setup.heat_rate = positive(f.number("heat_rate", 1.0), f.field("heat_rate"));
  m.setup.dependence = dependence(f);
  if (f.has("clock")) m.setup.dependence_clock = parse_clock(f.at("clock"), f.field("clock"));
  const std::string product = f.text("product", "spot");
  checked(f.field("product"), [&] { m.product = Product::parse(product); });
  if (f.has("t")) m.t = positive(f.number("t"), f.field("t"));
  checked(f.field("dependence"), [&] { m.setup.validate(); });
  return m;
}

}  // namespace

double parse_clock(const json& value, const std::string& field) {
  if (value.is_string()) {
    const auto s = value.get<std::string>();
    if (s == "hour") return kHoursPerYear;
    if (s == "day") return kDaysPerYear;
    if (s == "year") return 1.0;
    fail(field, "unknown clock \"" + s + "\" (hour, day, year or a number of units per year)");
  }
  if (!value.is_number()) fail(field, "expected \"hour\", \"day\", \"year\" or a number");
  const double c = value.get<double>();
  if (!(c > 0.0) || !std::isfinite(c)) fail(field, "must be positive");
  return c;
}

std::string ExperimentConfig::model_name() const {
  struct Name {
    std::string operator()(const SingleBarrierModel&) const { return "single_barrier"; }
    std::string operator()(const BarrierParams&) const { return "multi_barrier"; }
    std::string operator()(const LocalCorrFn&) const { return "local"; }
    std::string operator()(const ConstantModel&) const { return "constant"; }
    std::string operator()(const CommodityModel&) const { return "commodity"; }
  };
  return std::visit(Name{}, model);
}

double ExperimentConfig::horizon() const {
  if (const auto* c = std::get_if<CommodityModel>(&model); c && c->t) return *c->t;
  return t_end;
}

void ExperimentConfig::validate() const {
  if (!(t_end > 0.0) || !std::isfinite(t_end)) fail("grid.t_end", "must be positive");
  if (!(dt > 0.0) || !(dt <= t_end)) fail("grid.dt", "must be in (0, t_end]");
  checked("grid.dt", [&] { (void)TimeGrid::make(t_end, dt); });
  if (n_paths < 1) fail("n_paths", "must be at least 1");
  in_range(level, 0.0, 1.0, "level", true);
  if (threads < 1) fail("threads", "must be at least 1");
  if (copula_grid < 1) fail("outputs.copula_grid", "must be at least 1");
  for (const double x : xs) {
    if (!std::isfinite(x)) fail("outputs.xs", "values must be finite");
  }
  if (const auto* c = std::get_if<CommodityModel>(&model)) {
    if (c->t && *c->t > t_end + 1e-12) fail("params.t", "must not exceed grid.t_end");
    const TimeGrid grid = TimeGrid::make(t_end, dt);
    checked("params.t", [&] { (void)grid.index_of(horizon()); });
  }
  if (const auto* s = std::get_if<SingleBarrierModel>(&model)) {
    SingleBarrierParams p{s->h, s->rho, t_end};
    checked("params", [&] { p.validate(); });
  }
}

ExperimentConfig parse_config(const json& doc) {
  Fields top(doc, "");
  ExperimentConfig cfg;
  const std::string model = top.text("model");
  const json empty = json::object();
  Fields params(top.has("params") ? top.at("params") : empty, "params");

  if (model == "single_barrier") {
    SingleBarrierModel m;
    m.h = positive(params.number("h", m.h), params.field("h"));
    m.rho = in_range(params.number("rho", m.rho), 0.0, 1.0, params.field("rho"), true);
    cfg.model = m;
  } else if (model == "multi_barrier") {
    cfg.model = barrier_params(params);
  } else if (model == "local") {
    cfg.model = local_fn(params);
  } else if (model == "constant") {
    cfg.model = ConstantModel{in_range(params.number("rho", 0.0), -1.0, 1.0, params.field("rho"))};
  } else if (model == "commodity") {
    cfg.model = commodity(params);
    cfg.dt = 1.0 / kHoursPerYear;
    cfg.monitoring = Monitoring::discrete;
  } else {
    fail("model", "unknown model \"" + model + "\" (single_barrier, multi_barrier, local, constant, commodity)");
  }
  params.finish();

  if (top.has("grid")) {
    Fields g(top.at("grid"), "grid");
    cfg.t_end = positive(g.number("t_end", cfg.t_end), "grid.t_end");
    cfg.dt = positive(g.number("dt", cfg.dt), "grid.dt");
    g.finish();
  }
  const std::int64_t n = top.integer("n_paths", cfg.n_paths);
  if (n < 1 || n > 1'000'000'000) fail("n_paths", "must be in [1, 1e9]");
  cfg.n_paths = static_cast<int>(n);
  const std::int64_t seed = top.integer("seed", 1);
  if (seed < 0) fail("seed", "must be nonnegative");
  cfg.seed = static_cast<std::uint64_t>(seed);
  cfg.level = in_range(top.number("level", cfg.level), 0.0, 1.0, "level", true);
  const std::int64_t threads = top.integer("threads", 1);
  if (threads < 1 || threads > 1024) fail("threads", "must be in [1, 1024]");
  cfg.threads = static_cast<int>(threads);
  cfg.monitoring = monitoring_field(top, "monitoring", cfg.monitoring);

  if (top.has("outputs")) {
    Fields o(top.at("outputs"), "outputs");
    if (o.has("xs")) {
      const json& xs = o.at("xs");
      if (!xs.is_array()) fail("outputs.xs", "expected an array of numbers");
      for (std::size_t i = 0; i < xs.size(); ++i) {
        if (!xs[i].is_number()) fail("outputs.xs[" + std::to_string(i) + "]", "expected a number");
        cfg.xs.push_back(xs[i].get<double>());
      }
    }
    const std::int64_t g = o.integer("copula_grid", cfg.copula_grid);
    if (g < 1 || g > 1000) fail("outputs.copula_grid", "must be in [1, 1000]");
    cfg.copula_grid = static_cast<int>(g);
    o.finish();
  }
  top.finish();
  if (cfg.xs.empty()) {
    for (int i = -10; i <= 10; ++i) cfg.xs.push_back(0.1 * i);
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig parse_config_text(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return parse_config(doc);
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_config_text(buf.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

void apply(const Overrides& o, ExperimentConfig& cfg) {
  if (o.seed) cfg.seed = *o.seed;
  if (o.n_paths) cfg.n_paths = *o.n_paths;
  if (o.dt) cfg.dt = *o.dt;
  if (o.threads) cfg.threads = *o.threads;
  if (o.level) cfg.level = *o.level;
  cfg.validate();
}

}  // namespace cbm::app
