#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"

#include "coupledbm/commodities.hpp"
#include "coupledbm/local_corr.hpp"
#include "coupledbm/monitoring.hpp"
#include "coupledbm/multibarrier.hpp"
#include "coupledbm/reflection.hpp"

namespace cbm::app {

struct SingleBarrierModel {
  double h = 0.25;
  double rho = 0.9;
};

/// X = W1, Y = rho W1 + sqrt(1 - rho^2) W2.
struct ConstantModel {
  double rho = 0.0;
};

struct CommodityModel {
  MarketSetup setup;
  Product product;
  std::optional<double> t;  // evaluation time in years; default grid t_end
};

using Model = std::variant<SingleBarrierModel, BarrierParams, LocalCorrFn, ConstantModel, CommodityModel>;

struct ExperimentConfig {
  Model model;
  double t_end = 1.0;
  double dt = 1e-3;
  int n_paths = 10000;
  std::uint64_t seed = 1;
  double level = 0.95;
  int threads = 1;
  Monitoring monitoring = Monitoring::corrected;
  std::vector<double> xs;
  int copula_grid = 20;

  std::string model_name() const;
  /// Evaluation time: t_end, or the commodity "t" when given.
  double horizon() const;
  /// Cross-field checks; ConfigError naming the offending field.
  void validate() const;
};

/// Command-line overrides applied on top of a config file.
struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> n_paths;
  std::optional<double> dt;
  std::optional<int> threads;
  std::optional<double> level;
};

/// Field-precise ConfigError messages of the form "params.rho: ...".
ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig parse_config_text(std::string_view text);
ExperimentConfig load_config(const std::filesystem::path& path);

void apply(const Overrides& o, ExperimentConfig& cfg);

/// "hour" -> 8760, "day" -> 365, "year" -> 1, or a positive number.
double parse_clock(const nlohmann::json& value, const std::string& field);

}  // namespace cbm::app
