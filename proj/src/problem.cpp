#include "dsm/problem.hpp"

#include "dsm/error.hpp"

#include <filesystem>

#ifndef DSM_DATA_DIR
#define DSM_DATA_DIR "data"
#endif

namespace dsm {

void Problem::validate() const {
    if (!grid.valid()) throw ConfigError("invalid time grid");
    if (appliances.empty()) throw ConfigError("no appliances");
    const auto report = validate_appliance_set(appliances, grid);
    if (!report.usable()) throw ConfigError("appliance set rejected: " + report.issues.front().message);
    const auto T = static_cast<std::size_t>(grid.slot_count);
    if (price.size() != T) throw DimensionError("price series length does not match the grid");
    if (pv.size() != T) throw DimensionError("PV series length does not match the grid");
    if (network)
        for (const auto& h : network->neighbors.house_kw)
            if (h.size() != T) throw DimensionError("neighbour load length does not match the grid");
    if (!(penalty_usd_per_kwh >= 0.0)) throw ConfigError("penalty price must be non-negative");
    if (!(max_demand_kw > 0.0)) throw ConfigError("maximum demand must be positive");
}

bool Problem::keeps_original(const Appliance& a) const {
    if (!use_effective_window || !a.flexible() || a.original_on_slots.empty()) return false;
    return !a.window.contains(a.original_on_slots.front()) || !a.window.contains(a.original_on_slots.back());
}

OnSlots Problem::original_on_slots() const {
    OnSlots out;
    out.reserve(appliances.size());
    for (const auto& a : appliances) out.push_back(a.original_on_slots);
    return out;
}

Problem Problem::canonical(bool with_pv, double penalty_usd_per_kwh) {
    Problem p;
    p.grid = TimeGrid::canonical();
    p.appliances = load_appliances_csv(std::filesystem::path(DSM_DATA_DIR) / "appliances_canonical.csv");
    p.price = canonical_price_profile(p.grid);
    p.pv = with_pv ? canonical_pv_profile() : zero_pv(p.grid);
    p.network.emplace(FeederModel::canonical(), canonical_neighbor_loads());
    p.max_demand_kw = 12.4;
    p.penalty_usd_per_kwh = penalty_usd_per_kwh;
    return p;
}

} // namespace dsm
