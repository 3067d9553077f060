#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "coupledbm/commodities.hpp"

namespace cbm::app {

struct ReproduceOptions {
  std::uint64_t seed = 1;
  std::optional<int> n_paths;  // replaces the preset's simulation count
  std::optional<double> dt;    // replaces the preset's time step (years)
  std::optional<double> level;
  int threads = 1;
  std::filesystem::path out_dir = ".";
};

struct PresetInfo {
  std::string name;
  std::string description;
};

const std::vector<PresetInfo>& presets();

/// Writes the preset's CSV files and <name>_summary.json into out_dir and
/// returns the summary. Timing fields live under "runtime_seconds" only.
nlohmann::json run_reproduce(const std::string& name, const ReproduceOptions& options);

/// Market of the commodity presets: default two-factor parameters, flat curves,
/// hourly dependence clock.
MarketSetup preset_market(double f0_elec, double f0_coal, Dependence dependence);

/// Dependence columns of the spread option tables, in print order.
struct TableColumn {
  std::string label;
  Dependence dependence;
};
std::vector<TableColumn> table_columns(double nu, double eta);

/// Products priced in the tables: spot, 1MAH, 3MAH, 6MAH.
std::vector<Product> table_products();

}  // namespace cbm::app
