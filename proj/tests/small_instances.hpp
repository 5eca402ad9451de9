#pragma once

// Deterministic small instances for checking the optimizer against the
// exhaustive oracle.

#include "dsm/oracle.hpp"

#include <random>
#include <string>
#include <vector>

namespace dsm::testing {

struct NamedInstance {
    std::string name;
    SmallInstance instance;
};

inline Appliance make_appliance(int id, ApplianceClass cls, Slot s, Slot f, int duration, double kw,
                                std::vector<Slot> original) {
    Appliance a;
    a.id = id;
    a.cls = cls;
    a.window = {s, f};
    a.duration = duration;
    a.rated_kw = kw;
    a.original_on_slots = std::move(original);
    return a;
}

inline std::vector<Slot> all_slots(int T) {
    std::vector<Slot> v;
    for (Slot t = 1; t <= T; ++t) v.push_back(t);
    return v;
}

/// Base instance `k` (0-based) of the suite at the given penalty price.
inline SmallInstance small_instance(int k, double penalty_usd_per_kwh) {
    using C = ApplianceClass;
    std::mt19937 rng(1000u + static_cast<unsigned>(k));
    // Bases 0-3 include evening-style price spikes so penalties trade off
    // against real savings; bases 4-5 use a mild three-level tariff.
    const double spiky[] = {0.04, 0.05, 0.08, 0.13, 0.30, 0.45};
    const double mild[] = {0.04, 0.05, 0.08, 0.10, 0.13};
    const bool spikes = k % 6 < 4;
    std::uniform_int_distribution<int> pick(0, spikes ? 5 : 4);

    SmallInstance inst;
    auto& p = inst.problem;
    p.grid = {12, 0.5};
    p.penalty_usd_per_kwh = penalty_usd_per_kwh;
    for (int t = 0; t < 12; ++t) p.price.usd_per_kwh.push_back(spikes ? spiky[pick(rng)] : mild[pick(rng)]);
    p.pv = zero_pv(p.grid);
    p.appliances.push_back(make_appliance(1, C::Baseline, 1, 12, 12, 0.3, all_slots(12)));

    switch (k % 6) {
    case 0: // one of each flexible class, no demand cap
        p.appliances.push_back(make_appliance(2, C::Uninterruptible, 1, 12, 3, 1.2, {7, 8, 9}));
        p.appliances.push_back(make_appliance(3, C::Interruptible, 3, 10, 3, 0.9, {5, 6, 7}));
        p.appliances.push_back(make_appliance(4, C::Interruptible, 1, 8, 2, 1.6, {4, 5}));
        break;
    case 1: // demand cap binds: two appliances cannot share a slot
        p.appliances.push_back(make_appliance(2, C::Interruptible, 1, 9, 3, 2.0, {1, 2, 3}));
        p.appliances.push_back(make_appliance(3, C::Interruptible, 2, 10, 3, 1.8, {6, 7, 8}));
        p.appliances.push_back(make_appliance(4, C::Uninterruptible, 1, 12, 2, 1.5, {10, 11}));
        p.max_demand_kw = 3.9;
        break;
    case 2: // PV at midday, moderate cap
        p.appliances.push_back(make_appliance(2, C::Uninterruptible, 2, 12, 4, 1.0, {8, 9, 10, 11}));
        p.appliances.push_back(make_appliance(3, C::Interruptible, 1, 8, 3, 1.4, {1, 2, 3}));
        p.appliances.push_back(make_appliance(4, C::Interruptible, 4, 12, 2, 0.7, {11, 12}));
        p.pv = synth_pv_profile(2.5, 4, 11, std::vector<CloudDip>{{7, 0.5}}, p.grid);
        p.max_demand_kw = 3.5;
        break;
    case 3: // small feeder with two neighbours
        p.appliances.push_back(make_appliance(2, C::Interruptible, 1, 8, 3, 1.5, {6, 7, 8}));
        p.appliances.push_back(make_appliance(3, C::Uninterruptible, 3, 12, 3, 2.2, {9, 10, 11}));
        p.appliances.push_back(make_appliance(4, C::Interruptible, 5, 12, 2, 0.8, {5, 6}));
        {
            NeighborLoads n;
            for (int h = 0; h < 2; ++h) {
                std::vector<double> load;
                for (int t = 0; t < 12; ++t) load.push_back(2.0 + 0.25 * ((t + 3 * h) % 5));
                n.house_kw.push_back(load);
            }
            p.network.emplace(FeederModel::chain(3, 0.01, 0.006), std::move(n));
        }
        break;
    case 4: // feeder and PV, tight cap
        p.appliances.push_back(make_appliance(2, C::Uninterruptible, 1, 10, 3, 1.8, {4, 5, 6}));
        p.appliances.push_back(make_appliance(3, C::Interruptible, 2, 9, 2, 1.3, {5, 6}));
        p.appliances.push_back(make_appliance(4, C::Interruptible, 3, 12, 3, 1.1, {9, 10, 11}));
        p.pv = synth_pv_profile(2.0, 3, 10, {}, p.grid);
        p.max_demand_kw = 3.3;
        {
            NeighborLoads n;
            n.house_kw.push_back(std::vector<double>(12, 3.0));
            p.network.emplace(FeederModel::chain(2, 0.012, 0.008), std::move(n));
        }
        break;
    default: // two uninterruptible appliances competing for cheap slots
        p.appliances.push_back(make_appliance(2, C::Uninterruptible, 1, 12, 4, 2.0, {6, 7, 8, 9}));
        p.appliances.push_back(make_appliance(3, C::Uninterruptible, 1, 12, 3, 1.7, {2, 3, 4}));
        p.appliances.push_back(make_appliance(4, C::Interruptible, 1, 9, 3, 0.6, {7, 8, 9}));
        p.max_demand_kw = 2.7;
        break;
    }
    return inst;
}

inline constexpr double kSuitePenalties[] = {0.0, 0.05, 0.10, 0.20};
inline constexpr int kSuiteBases = 6;

/// kSuiteBases base instances × 4 penalty prices.
inline std::vector<NamedInstance> small_instance_suite() {
    std::vector<NamedInstance> out;
    for (int k = 0; k < kSuiteBases; ++k)
        for (double pen : kSuitePenalties)
            out.push_back({"base" + std::to_string(k) + "_pi" + std::to_string(static_cast<int>(pen * 100)),
                           small_instance(k, pen)});
    return out;
}

} // namespace dsm::testing
