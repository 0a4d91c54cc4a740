#include "polypart/dynpart.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace polypart {

double RefineConfig::eps_for(int var) const {
  const auto it = eps_override.find(var);
  return it == eps_override.end() ? eps : it->second;
}

namespace {

double checked_value(const PartitionMap& pm, int var, const std::vector<double>& x_star) {
  if (var < 0 || static_cast<std::size_t>(var) >= x_star.size()) {
    throw Error("point has no entry for variable " + std::to_string(var));
  }
  const double v = x_star[static_cast<std::size_t>(var)];
  const Interval d = pm.domain();
  const double slack = 1e-7 * std::max(1.0, d.width());
  if (!std::isfinite(v) || !d.contains(v, slack)) {
    throw Error("value " + std::to_string(v) + " of variable " + std::to_string(var) + " lies outside [" +
                std::to_string(d.lo) + ", " + std::to_string(d.hi) + "]");
  }
  return std::clamp(v, d.lo, d.hi);
}

}  // namespace

RefineResult refine(const PartitionMaps& pmaps, const std::vector<double>& x_star, const RefineConfig& cfg) {
  if (!(cfg.delta > 1.0)) throw Error("delta must exceed 1");
  RefineResult out;
  out.pmaps = pmaps;
  for (auto& [var, pm] : out.pmaps) {
    const double eps = cfg.eps_for(var);
    if (!(eps > 0.0)) throw Error("eps must be positive");
    const double x = checked_value(pm, var, x_star);
    const Interval act = pm.active_interval();
    const double l = act.width() / cfg.delta;
    if (!(l > eps)) continue;
    const Interval d = pm.domain();
    const double lo = std::max(d.lo, x - l);
    const double hi = std::min(d.hi, x + l);
    bool changed = pm.insert(lo);
    changed = pm.insert(hi) || changed;
    pm.set_active(pm.locate(x));
    out.refined_any = out.refined_any || changed;
  }
  return out;
}

std::map<int, int> locate_active(const PartitionMaps& pmaps, const std::vector<double>& x_star) {
  std::map<int, int> out;
  for (const auto& [var, pm] : pmaps) out[var] = pm.locate(checked_value(pm, var, x_star));
  return out;
}

void update_active(PartitionMaps& pmaps, const std::vector<double>& x_star) {
  for (const auto& [var, k] : locate_active(pmaps, x_star)) pmaps.at(var).set_active(k);
}

}  // namespace polypart
