#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "coupledbm/app/config.hpp"
#include "coupledbm/app/presets.hpp"
#include "coupledbm/app/runners.hpp"
#include "coupledbm/errors.hpp"

using namespace cbm;
using namespace cbm::app;

namespace {

std::string config_error(std::string_view text) {
  try {
    parse_config_text(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "no error";
}

std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("coupledbm_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(COUPLEDBM_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(SurvivalCsv, GoldenHeader) {
  std::ostringstream os;
  write_survival_csv(os, {});
  EXPECT_EQ(os.str(), "x,analytic,empirical,band_low,band_high\n");
}

TEST(SurvivalCsv, EmptyAnalyticColumnForLocal) {
  std::ostringstream os;
  write_survival_csv(os, {{0.25, std::nullopt, 0.5, 0.4, 0.6}});
  EXPECT_EQ(os.str(), "x,analytic,empirical,band_low,band_high\n0.25,,0.5,0.4,0.6\n");
}

TEST(FormatNumber, RoundTrips) {
  for (const double x : {0.1, 1.0 / 3.0, -2.5e-300, 8.39, 0.0}) {
    EXPECT_EQ(std::stod(format_number(x)), x);
  }
}

TEST(ConfigParse, FieldPreciseErrors) {
  EXPECT_NE(config_error(R"({"model":"multi_barrier","params":{"rho":1.5}})").find("params.rho"), std::string::npos);
  EXPECT_NE(config_error(R"({"model":"multi_barrier","params":{"nu":1,"eta":0.5}})").find("params.nu"),
            std::string::npos);
  EXPECT_NE(config_error(R"({"model":"single_barrier","params":{"h":-1}})").find("params.h"), std::string::npos);
  EXPECT_NE(config_error(R"({"model":"local","params":{"rho_min":-1}})").find("params.rho_min"), std::string::npos);
  EXPECT_NE(config_error(R"({"model":"constant","grid":{"dt":"x"}})").find("grid.dt"), std::string::npos);
  EXPECT_NE(config_error(R"({"model":"constant","grid":{"t_end":1,"dt":0.3}})").find("grid.dt"), std::string::npos);
  EXPECT_NE(config_error(R"({"model":"constant","n_paths":0})").find("n_paths"), std::string::npos);
  EXPECT_NE(config_error(R"({"model":"constant","level":1})").find("level"), std::string::npos);
  EXPECT_NE(config_error(R"({"model":"constant","outputs":{"xs":[0,"a"]}})").find("outputs.xs[1]"),
            std::string::npos);
  EXPECT_NE(config_error(R"({"model":"constant","extra":1})").find("extra: unknown field"), std::string::npos);
  EXPECT_NE(config_error(R"({"params":{}})").find("model"), std::string::npos);
  EXPECT_NE(config_error(R"({"model":"heston"})").find("model"), std::string::npos);
  EXPECT_NE(config_error(R"({"model":"constant","monitoring":"bridge"})").find("monitoring"), std::string::npos);
}

TEST(ConfigParse, SyntaxErrorReportsLine) {
  const std::string msg = config_error("{\n\"model\": \"constant\",\n\"seed\": ,\n}");
  EXPECT_NE(msg.find("line 3"), std::string::npos) << msg;
}

TEST(ConfigParse, CommodityFields) {
  const auto msg = config_error(
      R"({"model":"commodity","params":{"dependence":{"type":"multi_barrier","rho":2}}})");
  EXPECT_NE(msg.find("params.dependence.rho"), std::string::npos) << msg;
  EXPECT_NE(config_error(R"({"model":"commodity","params":{"product":"7YAH"}})").find("params.product"),
            std::string::npos);
  EXPECT_NE(config_error(R"({"model":"commodity","params":{"clock":"week"}})").find("params.clock"),
            std::string::npos);
  EXPECT_NE(config_error(R"({"model":"commodity","params":{"coal":{"alpha_s":0}}})").find("params.coal.alpha_s"),
            std::string::npos);
  EXPECT_NE(config_error(R"({"model":"commodity","params":{"t":2}})").find("params.t"), std::string::npos);

  const auto cfg = parse_config_text(R"({"model":"commodity",
    "params":{"f0_coal":120,"product":"3MAH","clock":"hour",
              "dependence":{"type":"multi_barrier","nu":170,"eta":170.5,"rho":0.6}},
    "grid":{"t_end":1}})");
  const auto& m = std::get<CommodityModel>(cfg.model);
  EXPECT_EQ(m.product.name(), "3MAH");
  EXPECT_DOUBLE_EQ(m.setup.f0_coal(1.0), 120.0);
  EXPECT_DOUBLE_EQ(m.setup.dependence_clock, 8760.0);
  EXPECT_DOUBLE_EQ(cfg.dt, 1.0 / 8760.0);
  EXPECT_EQ(cfg.monitoring, Monitoring::discrete);
  const auto& d = std::get<MultiBarrierDependence>(m.setup.dependence);
  EXPECT_DOUBLE_EQ(d.barrier.eta, 170.5);
  EXPECT_TRUE(d.barrier.infinite());
}

TEST(ConfigParse, ReflectionCap) {
  auto cfg = parse_config_text(R"({"model":"multi_barrier","params":{"n":"inf"}})");
  EXPECT_TRUE(std::get<BarrierParams>(cfg.model).infinite());
  cfg = parse_config_text(R"({"model":"multi_barrier","params":{"n":5}})");
  EXPECT_EQ(std::get<BarrierParams>(cfg.model).max_reflections, 5);
  EXPECT_NE(config_error(R"({"model":"multi_barrier","params":{"n":-1}})").find("params.n"), std::string::npos);
  EXPECT_NE(config_error(R"({"model":"multi_barrier","params":{"n":2.5}})").find("params.n"), std::string::npos);
}

TEST(ConfigParse, OverridesAreValidated) {
  auto cfg = parse_config_text(R"({"model":"constant","seed":4})");
  apply({std::uint64_t{9}, 123, 0.01, 3, 0.99}, cfg);
  EXPECT_EQ(cfg.seed, 9u);
  EXPECT_EQ(cfg.n_paths, 123);
  EXPECT_DOUBLE_EQ(cfg.dt, 0.01);
  EXPECT_EQ(cfg.threads, 3);
  EXPECT_DOUBLE_EQ(cfg.level, 0.99);
  EXPECT_THROW(apply({std::nullopt, 0, std::nullopt, std::nullopt, std::nullopt}, cfg), ConfigError);
}

TEST(RunSurvival, MultiBarrierNoReflectionAtZero) {
  auto cfg = parse_config_text(
      R"({"model":"multi_barrier","params":{"n":0,"rho":0.9},"n_paths":500,"outputs":{"xs":[0]}})");
  const auto rows = run_survival(cfg);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_DOUBLE_EQ(*rows[0].analytic, 0.5);
}

TEST(RunSurvival, SingleBarrierNearSevenTenths) {
  auto cfg = parse_config_text(
      R"({"model":"single_barrier","params":{"h":0.25,"rho":0.9},"n_paths":2000,"outputs":{"xs":[0]}})");
  const auto rows = run_survival(cfg);
  EXPECT_NEAR(*rows[0].analytic, 0.7, 0.01);
  EXPECT_NEAR(rows[0].empirical, *rows[0].analytic, 4.0 * std::sqrt(0.25 / 2000));
}

TEST(RunSurvival, ConstantMatchesClosedForm) {
  auto cfg = parse_config_text(
      R"({"model":"constant","params":{"rho":-0.5},"grid":{"t_end":2,"dt":0.5},"n_paths":20000,
          "outputs":{"xs":[-1,0,1.5]}})");
  for (const auto& r : run_survival(cfg)) {
    EXPECT_GE(*r.analytic, r.band_low - 0.005);
    EXPECT_LE(*r.analytic, r.band_high + 0.005);
  }
}

TEST(RunSurvival, LocalAboveHalfAtQuarter) {
  auto cfg = parse_config_text(
      R"({"model":"local","params":{"rho_min":-0.9,"rho_max":0.9,"nu":0,"eta":0.5},
          "grid":{"t_end":1,"dt":0.001},"n_paths":10000,"outputs":{"xs":[0.25]},"threads":2})");
  const auto rows = run_survival(cfg);
  EXPECT_FALSE(rows[0].analytic.has_value());
  EXPECT_GT(rows[0].empirical, 0.5);
  EXPECT_GT(rows[0].band_low, 0.5);
}

TEST(RunPrice, DegenerateVolatilityIsIntrinsic) {
  auto cfg = parse_config_text(R"({"model":"commodity",
    "params":{"electricity":{"sigma_s":0,"sigma_l":0},"coal":{"sigma_s":0,"sigma_l":0},
              "f0_elec":110,"f0_coal":50,"heat_rate":2,"product":"3MAH"},
    "grid":{"t_end":0.1},"n_paths":257})");
  const auto e = run_price(cfg);
  EXPECT_EQ(e.mean, 10.0);
  EXPECT_EQ(e.std_error, 0.0);
  EXPECT_EQ(e.ci_low, 10.0);
  EXPECT_EQ(e.ci_high, 10.0);
}

TEST(RunPrice, ByteIdenticalAcrossThreadCounts) {
  const char* text = R"({"model":"commodity","params":{"product":"1MAH",
    "dependence":{"type":"multi_barrier","rho":0.6}},"grid":{"t_end":0.05},"n_paths":300,"seed":11})";
  auto a = parse_config_text(text);
  auto b = a;
  b.threads = 3;
  EXPECT_EQ(to_json(run_price(a)).dump(), to_json(run_price(b)).dump());
  EXPECT_EQ(to_json(run_price(a)).dump(), to_json(run_price(a)).dump());
}

TEST(RunPrice, RejectsBrownianModels) {
  EXPECT_THROW(run_price(parse_config_text(R"({"model":"constant"})")), ConfigError);
}

TEST(Reproduce, UnknownPreset) {
  ReproduceOptions opt;
  opt.out_dir = scratch("unknown");
  EXPECT_THROW(run_reproduce("fig99", opt), ConfigError);
}

TEST(Reproduce, EveryListedPresetIsRegistered) {
  for (const auto& p : presets()) {
    ReproduceOptions opt;
    opt.out_dir = scratch("listed");
    opt.n_paths = 0;  // rejected before any work
    try {
      run_reproduce(p.name, opt);
      ADD_FAILURE() << p.name;
    } catch (const ConfigError& e) {
      EXPECT_EQ(std::string(e.what()).find("unknown preset"), std::string::npos) << p.name;
    }
  }
}

TEST(Reproduce, Fig3NoReflectionIsGaussianCopula) {
  ReproduceOptions opt;
  opt.out_dir = scratch("fig3");
  opt.n_paths = 10000;
  opt.threads = 2;
  const auto s = run_reproduce("fig3", opt);
  EXPECT_LE(s["results"]["n0"]["max_dev_from_gaussian_minus_rho"].get<double>(), 0.02);
  EXPECT_TRUE(std::filesystem::exists(opt.out_dir / "fig3_n0.csv"));
  EXPECT_TRUE(std::filesystem::exists(opt.out_dir / "fig3_summary.json"));
}

TEST(Reproduce, ThreadCountDoesNotChangeOutput) {
  ReproduceOptions a;
  a.n_paths = 300;
  a.seed = 5;
  a.out_dir = scratch("det1");
  ReproduceOptions b = a;
  b.threads = 4;
  b.out_dir = scratch("det4");
  auto sa = run_reproduce("fig2", a);
  auto sb = run_reproduce("fig2", b);
  sa.erase("runtime_seconds");
  sb.erase("runtime_seconds");
  EXPECT_EQ(sa.dump(), sb.dump());
  for (const auto& f : sa["files"]) {
    EXPECT_EQ(slurp(a.out_dir / f.get<std::string>()), slurp(b.out_dir / f.get<std::string>())) << f;
  }
}

TEST(Cli, ExitCodes) {
  const auto dir = scratch("cli");
  std::ofstream(dir / "bad.json") << R"({"model":"multi_barrier","params":{"rho":3}})";
  std::ofstream(dir / "ok.json") << R"({"model":"constant","n_paths":50,"outputs":{"xs":[0]}})";
  EXPECT_EQ(run_cli("survival --config " + (dir / "ok.json").string()), 0);
  EXPECT_EQ(run_cli("survival --config " + (dir / "bad.json").string()), 2);
  EXPECT_EQ(run_cli("price --config " + (dir / "ok.json").string()), 2);
  EXPECT_EQ(run_cli("reproduce --preset nope --out " + dir.string()), 2);
  EXPECT_EQ(run_cli("survival --bogus"), 2);
  EXPECT_EQ(run_cli("reproduce --list"), 0);
}
