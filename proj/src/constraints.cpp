#include "dsm/constraints.hpp"

#include "dsm/error.hpp"

namespace dsm {

namespace {

void require_rows(const Schedule& schedule, std::span<const Appliance> appliances) {
    if (schedule.appliance_count() != appliances.size())
        throw DimensionError("schedule rows do not match appliance count");
}

} // namespace

bool FeasibilityReport::feasible() const {
    return duration.empty() && window.empty() && max_demand.empty() && voltage.empty() &&
           power_flow_failures.empty() && contiguity.empty() && baseline.empty();
}

std::vector<ApplianceViolation> check_duration(const Schedule& schedule, std::span<const Appliance> appliances) {
    require_rows(schedule, appliances);
    std::vector<ApplianceViolation> out;
    for (std::size_t a = 0; a < appliances.size(); ++a) {
        const int on = schedule.row_sum(a);
        if (on != appliances[a].duration)
            out.push_back({appliances[a].id, "on for " + std::to_string(on) + " slots, duration is " +
                                                 std::to_string(appliances[a].duration)});
    }
    return out;
}

std::vector<ApplianceViolation> check_window(const Schedule& schedule, std::span<const Appliance> appliances,
                                             bool use_effective_window) {
    require_rows(schedule, appliances);
    std::vector<ApplianceViolation> out;
    for (std::size_t a = 0; a < appliances.size(); ++a) {
        const auto w = use_effective_window ? appliances[a].effective_window() : appliances[a].window;
        for (Slot t = 1; t <= schedule.slot_count(); ++t)
            if (schedule.on(a, t) && !w.contains(t)) {
                out.push_back({appliances[a].id, "on at slot " + std::to_string(t) + " outside window " +
                                                     std::to_string(w.start) + "-" + std::to_string(w.end)});
                break;
            }
    }
    return out;
}

std::vector<DemandViolation> check_max_demand(const Schedule& schedule, std::span<const Appliance> appliances,
                                              double max_demand_kw) {
    const auto power = aggregate_power(schedule, appliances);
    std::vector<DemandViolation> out;
    for (std::size_t t = 0; t < power.size(); ++t)
        if (power[t] > max_demand_kw + 1e-9) out.push_back({static_cast<Slot>(t + 1), power[t]});
    return out;
}

std::pair<std::vector<ApplianceViolation>, std::vector<ApplianceViolation>>
check_contiguity(const Schedule& schedule, std::span<const Appliance> appliances) {
    require_rows(schedule, appliances);
    std::vector<ApplianceViolation> runs;
    std::vector<ApplianceViolation> fixed;
    for (std::size_t a = 0; a < appliances.size(); ++a) {
        const auto& app = appliances[a];
        const auto slots = schedule.on_slots(a);
        if (app.cls == ApplianceClass::Uninterruptible && !slots.empty() &&
            slots.back() - slots.front() + 1 != static_cast<int>(slots.size()))
            runs.push_back({app.id, "uninterruptible appliance runs in more than one block"});
        if (app.cls == ApplianceClass::Baseline && static_cast<int>(slots.size()) != schedule.slot_count())
            fixed.push_back({app.id, "baseline appliance is off in some slot"});
    }
    return {std::move(runs), std::move(fixed)};
}

FeasibilityReport is_feasible(const Schedule& schedule, const Evaluator& evaluator) {
    const auto& p = evaluator.problem();
    FeasibilityReport r;
    r.duration = check_duration(schedule, p.appliances);
    r.window = check_window(schedule, p.appliances, p.use_effective_window);
    r.max_demand = check_max_demand(schedule, p.appliances, p.max_demand_kw);
    std::tie(r.contiguity, r.baseline) = check_contiguity(schedule, p.appliances);

    if (p.network) {
        const auto gross = aggregate_power(schedule, p.appliances);
        std::vector<BusState> states;
        for (Slot t = 1; t <= p.grid.slot_count; ++t) {
            try {
                states.push_back(evaluator.solve_slot(t, gross[static_cast<std::size_t>(t - 1)]));
            } catch (const ConvergenceError&) {
                r.power_flow_failures.push_back(t);
            }
        }
        r.voltage = voltage_band_check(states, p.band.min_pu, p.band.max_pu);
    }
    return r;
}

FeasibilityReport is_feasible(const Schedule& schedule, const Problem& problem) {
    Evaluator ev(problem);
    return is_feasible(schedule, ev);
}

nlohmann::ordered_json to_json(const FeasibilityReport& r) {
    auto appliance_list = [](const std::vector<ApplianceViolation>& v) {
        auto arr = nlohmann::ordered_json::array();
        for (const auto& x : v) arr.push_back({{"appliance", x.appliance_id}, {"message", x.message}});
        return arr;
    };
    nlohmann::ordered_json j;
    j["feasible"] = r.feasible();
    j["duration"] = appliance_list(r.duration);
    j["window"] = appliance_list(r.window);
    j["max_demand"] = nlohmann::ordered_json::array();
    for (const auto& v : r.max_demand) j["max_demand"].push_back({{"slot", v.slot}, {"demand_kw", v.demand_kw}});
    j["voltage"] = nlohmann::ordered_json::array();
    for (const auto& v : r.voltage)
        j["voltage"].push_back({{"slot", v.slot}, {"bus", v.bus}, {"v_pu", v.magnitude}});
    j["power_flow_failures"] = r.power_flow_failures;
    j["contiguity"] = appliance_list(r.contiguity);
    j["baseline"] = appliance_list(r.baseline);
    return j;
}

} // namespace dsm
