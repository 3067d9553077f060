#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "json.hpp"

#include "coupledbm/app/config.hpp"
#include "coupledbm/estimators.hpp"

namespace cbm::app {

inline constexpr const char* kSurvivalHeader = "x,analytic,empirical,band_low,band_high";

struct SurvivalRow {
  double x = 0.0;
  std::optional<double> analytic;  // empty when the model has no closed form
  double empirical = 0.0;
  double band_low = 0.0;
  double band_high = 0.0;
};

/// Shortest decimal that round-trips to the same double.
std::string format_number(double x);

/// Closed-form P(X_T - Y_T >= x) where the model has one.
std::optional<double> analytic_survival(const ExperimentConfig& cfg, double x);

/// Terminal X_T - Y_T (commodity: product spread at the horizon), one per path.
Eigen::VectorXd terminal_spreads(const ExperimentConfig& cfg);

/// Terminal (X_T, Y_T) pairs for the Brownian models.
Eigen::MatrixX2d terminal_pairs(const ExperimentConfig& cfg);

std::vector<SurvivalRow> run_survival(const ExperimentConfig& cfg);
void write_survival_csv(std::ostream& os, const std::vector<SurvivalRow>& rows);

/// Spread option price; commodity configs only.
MCEstimate run_price(const ExperimentConfig& cfg);
nlohmann::json to_json(const MCEstimate& e);

/// Matrix as CSV with a "u,v,copula" long layout on the grid i/g, j/g.
void write_copula_csv(std::ostream& os, const Eigen::MatrixXd& copula);

}  // namespace cbm::app
