#include "coupledbm/monitoring.hpp"

#include <string>

#include "coupledbm/errors.hpp"

namespace cbm {

Monitoring parse_monitoring(std::string_view name) {
  if (name == "discrete") return Monitoring::discrete;
  if (name == "corrected") return Monitoring::corrected;
  throw ConfigError("unknown monitoring '" + std::string(name) + "' (expected discrete|corrected)");
}

std::string_view to_string(Monitoring m) { return m == Monitoring::discrete ? "discrete" : "corrected"; }

}  // namespace cbm
