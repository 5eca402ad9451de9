#pragma once

// Exhaustive optimizer for small instances, used as ground truth.

#include "dsm/costing.hpp"
#include "dsm/problem.hpp"

#include "json.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

namespace dsm {

inline constexpr double kEnumerationLimit = 1e7;
inline constexpr int kMaxOracleFlexible = 4;
inline constexpr int kMaxOracleSlots = 16;

struct SmallInstance {
    Problem problem;

    /// Throws ConfigError unless the instance is small enough for the oracle.
    void validate() const;
};

/// Product of per-appliance placement counts, before any pruning.
double placement_count(const Problem& problem);

/// Calls `visit` once per schedule that satisfies duration, window,
/// contiguity and maximum demand (and the voltage band when the problem has a
/// feeder). Placements are visited in lexicographic on-slot order. Returns the
/// number of schedules visited. Throws GuardError above kEnumerationLimit.
std::uint64_t enumerate_feasible(const SmallInstance& instance, const Evaluator& evaluator,
                                 const std::function<void(const OnSlots&)>& visit);
std::uint64_t enumerate_feasible(const SmallInstance& instance, const std::function<void(const OnSlots&)>& visit);

struct OracleResult {
    OnSlots on_slots;
    Schedule schedule;
    CostBreakdown cost;
    /// Every feasible schedule whose total cost ties the optimum.
    std::vector<OnSlots> ties;
    std::uint64_t feasible_count = 0;
};

/// Global minimum of C_e + C_p; ties broken by smaller Σ ΔT_a, then
/// lexicographically earliest on-slots. Throws Error if nothing is feasible.
OracleResult exhaustive_optimize(const SmallInstance& instance);
OracleResult exhaustive_optimize(const SmallInstance& instance, const Evaluator& evaluator);

SmallInstance parse_instance_json(const nlohmann::json& j);
SmallInstance load_instance_json(const std::filesystem::path& path);

nlohmann::ordered_json to_json(const OracleResult& result, const Problem& problem);

} // namespace dsm
