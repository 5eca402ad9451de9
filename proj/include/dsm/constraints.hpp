#pragma once

// Feasibility of a schedule: duration, window, maximum demand, voltage band,
// uninterruptible contiguity and fixed baseline rows.

#include "dsm/costing.hpp"
#include "dsm/problem.hpp"

#include "json.hpp"

#include <span>
#include <string>
#include <vector>

namespace dsm {

struct ApplianceViolation {
    int appliance_id = 0;
    std::string message;
};

struct DemandViolation {
    Slot slot = 0;
    double demand_kw = 0.0;
};

struct FeasibilityReport {
    std::vector<ApplianceViolation> duration;
    std::vector<ApplianceViolation> window;
    std::vector<DemandViolation> max_demand;
    std::vector<VoltageViolation> voltage;
    std::vector<Slot> power_flow_failures;
    std::vector<ApplianceViolation> contiguity;
    std::vector<ApplianceViolation> baseline;

    bool feasible() const;
};

std::vector<ApplianceViolation> check_duration(const Schedule& schedule, std::span<const Appliance> appliances);
std::vector<ApplianceViolation> check_window(const Schedule& schedule, std::span<const Appliance> appliances,
                                             bool use_effective_window);
/// Gross appliance power (no PV netting) against the cap.
std::vector<DemandViolation> check_max_demand(const Schedule& schedule, std::span<const Appliance> appliances,
                                              double max_demand_kw);
/// Uninterruptible rows must form one run; baseline rows must be all ones.
/// Returns {contiguity violations, baseline violations}.
std::pair<std::vector<ApplianceViolation>, std::vector<ApplianceViolation>>
check_contiguity(const Schedule& schedule, std::span<const Appliance> appliances);

/// Runs every check. The voltage check solves the feeder at each slot with
/// neighbour loads and PV applied; a non-converging slot is recorded as a
/// voltage failure.
FeasibilityReport is_feasible(const Schedule& schedule, const Problem& problem);
FeasibilityReport is_feasible(const Schedule& schedule, const Evaluator& evaluator);

nlohmann::ordered_json to_json(const FeasibilityReport& report);

} // namespace dsm
