#pragma once

// Everything an evaluation needs: appliances, grid, exogenous series, the
// optional feeder, and the constraint and penalty settings.

#include "dsm/domain.hpp"
#include "dsm/feeder.hpp"
#include "dsm/profiles.hpp"

#include <limits>
#include <optional>
#include <vector>

namespace dsm {

/// Per-appliance ascending on-slot lists, in appliance order.
using OnSlots = std::vector<std::vector<Slot>>;

struct VoltageBand {
    double min_pu = 0.95;
    double max_pu = 1.05;
};

struct Problem {
    TimeGrid grid;
    std::vector<Appliance> appliances;
    PriceSeries price;
    PvSeries pv;
    std::optional<Network> network;
    double max_demand_kw = std::numeric_limits<double>::infinity();
    double penalty_usd_per_kwh = 0.0;
    VoltageBand band;
    /// Check windows against the declared window widened to the original
    /// slots (see Appliance::effective_window), and let an appliance whose
    /// original slots lie outside its declared window stay where it was.
    /// Moves always land inside the declared window.
    bool use_effective_window = true;

    /// Throws on dimension mismatches or unusable appliance data.
    void validate() const;

    SlotWindow window_of(const Appliance& a) const {
        return use_effective_window ? a.effective_window() : a.window;
    }
    /// True when `a` may keep original slots that fall outside its window.
    bool keeps_original(const Appliance& a) const;
    Schedule original() const { return original_schedule(appliances, grid); }
    OnSlots original_on_slots() const;

    /// The canonical appliances with the canonical tariff and feeder; PV optional.
    static Problem canonical(bool with_pv, double penalty_usd_per_kwh = 0.0);
};

} // namespace dsm
