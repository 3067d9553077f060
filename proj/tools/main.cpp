#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "coupledbm/app/config.hpp"
#include "coupledbm/app/presets.hpp"
#include "coupledbm/app/runners.hpp"
#include "coupledbm/errors.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitConsistency = 3;

struct Flags {
  std::string config;
  std::string preset;
  std::optional<std::uint64_t> seed;
  std::optional<int> paths;
  std::optional<double> dt;
  std::optional<int> threads;
  std::optional<double> level;
  std::string out;
  bool list = false;
};

void add_common(CLI::App* cmd, Flags& f) {
  cmd->add_option("--seed", f.seed, "random seed");
  cmd->add_option("--paths", f.paths, "number of Monte Carlo paths");
  cmd->add_option("--dt", f.dt, "time step in years");
  cmd->add_option("--threads", f.threads, "worker threads (results do not depend on it)");
  cmd->add_option("--level", f.level, "confidence level in (0, 1)");
  cmd->add_option("--out", f.out, "output directory (default: stdout for survival and price)");
}

cbm::app::ExperimentConfig configured(const Flags& f) {
  auto cfg = cbm::app::load_config(f.config);
  cbm::app::apply({f.seed, f.paths, f.dt, f.threads, f.level}, cfg);
  return cfg;
}

// Writes to <out>/<file> when --out is given, to stdout otherwise.
template <typename Fn>
void emit(const Flags& f, const std::string& file, Fn&& body) {
  if (f.out.empty()) {
    body(std::cout);
    return;
  }
  std::filesystem::create_directories(f.out);
  const auto path = std::filesystem::path(f.out) / file;
  std::ofstream os(path, std::ios::binary);
  if (!os) throw cbm::ConfigError("out: cannot write " + path.string());
  body(os);
  std::cerr << "wrote " << path.string() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Coupled Brownian motions: survival curves, copulas and spread option prices"};
  app.require_subcommand(1);
  Flags f;

  auto* survival = app.add_subcommand("survival", "survival curve of X_t - Y_t as CSV");
  survival->add_option("--config", f.config, "experiment JSON")->required()->check(CLI::ExistingFile);
  add_common(survival, f);

  auto* price = app.add_subcommand("price", "spread option price as JSON");
  price->add_option("--config", f.config, "commodity experiment JSON")->required()->check(CLI::ExistingFile);
  add_common(price, f);

  auto* reproduce = app.add_subcommand("reproduce", "regenerate the data behind a figure or table");
  reproduce->add_option("--preset", f.preset, "preset name");
  reproduce->add_flag("--list", f.list, "list presets");
  add_common(reproduce, f);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*survival) {
      const auto rows = cbm::app::run_survival(configured(f));
      emit(f, "survival.csv", [&](std::ostream& os) { cbm::app::write_survival_csv(os, rows); });
    } else if (*price) {
      const auto est = cbm::app::run_price(configured(f));
      emit(f, "price.json", [&](std::ostream& os) { os << cbm::app::to_json(est).dump(2) << '\n'; });
    } else if (*reproduce) {
      if (f.list) {
        for (const auto& p : cbm::app::presets()) std::cout << p.name << "  " << p.description << '\n';
        return 0;
      }
      if (f.preset.empty()) throw cbm::ConfigError("preset: --preset NAME is required (see --list)");
      cbm::app::ReproduceOptions opt;
      opt.seed = f.seed.value_or(1);
      opt.n_paths = f.paths;
      opt.dt = f.dt;
      opt.level = f.level;
      opt.threads = f.threads.value_or(1);
      opt.out_dir = f.out.empty() ? std::filesystem::path("out") / f.preset : std::filesystem::path(f.out);
      const auto summary = cbm::app::run_reproduce(f.preset, opt);
      std::cout << summary.dump(2) << '\n';
    }
  } catch (const cbm::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const cbm::DomainError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const cbm::ConsistencyError& e) {
    std::cerr << "consistency error: " << e.what() << '\n';
    return kExitConsistency;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
