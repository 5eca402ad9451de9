#pragma once

// Electricity and inconvenience cost, shift distance and PV utilization, plus
// the cached evaluator used inside the optimizers.

#include "dsm/problem.hpp"

#include "json.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace dsm {

struct CostBreakdown {
    double c_e_usd = 0.0;
    double c_p_usd = 0.0;
    double total_usd = 0.0;
    std::vector<int> appliance_ids;
    std::vector<int> shifts; // ΔT_a in slots, appliance order
    std::optional<double> pv_utilization;
    std::vector<double> gross_kw;
    std::vector<double> net_kw;
    std::vector<double> billed_loss_kw;

    int total_shift() const;
    double weighted_shift_kw_slots(std::span<const Appliance> appliances) const;
};

struct NetLoad {
    std::vector<double> net_kw;
    std::vector<double> surplus_kw;
};

/// Grid import after local PV, clamped at zero, and the exported surplus.
NetLoad net_household_load(std::span<const double> gross_kw, const PvSeries& pv);
NetLoad net_household_load(const Schedule& schedule, std::span<const Appliance> appliances, const PvSeries& pv);

/// Σ_t (net + loss)·price·slot_hours in USD.
double electricity_cost(std::span<const double> net_kw, std::span<const double> loss_kw, const PriceSeries& price,
                        const TimeGrid& grid);

/// Σ_k |new_k − old_k| over both slot lists in ascending order.
int shift_distance(const Appliance& appliance, std::span<const Slot> new_on_slots);

/// slot_hours · π_p · Σ_a ΔT_a·r_a in USD.
double penalty_cost(std::span<const int> shifts, std::span<const Appliance> appliances, double penalty_usd_per_kwh,
                    const TimeGrid& grid);

/// Share of available PV energy coincident with gross appliance demand.
/// Throws UndefinedMetricError when the PV series is identically zero.
double pv_utilization(std::span<const double> gross_kw, const PvSeries& pv, const TimeGrid& grid);

/// Costs within this many dollars are ties.
inline constexpr double kCostTieTolerance = 1e-9;

/// Objective ordering shared by the optimizer and the oracle: lower cost
/// first, then smaller Σ ΔT_a, then lexicographically earliest on-slots.
bool better_outcome(double cost_a, int shift_a, const OnSlots& a, double cost_b, int shift_b, const OnSlots& b);

/// Compact evaluation used in search loops.
struct Score {
    double c_e_usd = 0.0;
    double c_p_usd = 0.0;
    int total_shift = 0;
    double md_excess_kw_slots = 0.0;  // Σ_t max(gross − MD, 0)
    double voltage_excess_pu = 0.0;   // Σ_{t,b} distance outside the voltage band
    int flow_failures = 0;            // slots whose power flow did not converge

    double total_usd() const { return c_e_usd + c_p_usd; }
    bool soft_feasible() const { return md_excess_kw_slots <= 0.0 && voltage_excess_pu <= 0.0 && flow_failures == 0; }
};

/// Power-flow results for one slot at a given smart-home gross demand.
struct SlotFlow {
    double billed_loss_kw = 0.0;
    double band_excess_pu = 0.0;
    double min_pu = 1.0;
    double max_pu = 1.0;
    bool converged = true;
};

/// Evaluates schedules of one Problem. Power flows are memoised per slot,
/// keyed by the smart-home gross demand rounded to 1 W; the flow is solved at
/// the rounded demand so results do not depend on evaluation order. Safe to
/// use from several threads. The Problem must outlive the evaluator.
class Evaluator {
public:
    explicit Evaluator(const Problem& problem);
    ~Evaluator();
    Evaluator(const Evaluator&) = delete;
    Evaluator& operator=(const Evaluator&) = delete;

    const Problem& problem() const { return problem_; }

    SlotFlow slot_flow(Slot t, double gross_kw) const;
    BusState solve_slot(Slot t, double gross_kw) const;

    Score score(const OnSlots& on_slots) const;
    /// Full breakdown; throws ConvergenceError if any slot's flow fails.
    CostBreakdown total_cost(const Schedule& schedule) const;
    CostBreakdown total_cost(const OnSlots& on_slots) const;

    std::vector<double> gross_kw(const OnSlots& on_slots) const;
    std::uint64_t flow_solves() const;

private:
    struct Cache;
    const Problem& problem_;
    std::unique_ptr<Cache> cache_;
};

/// Fields: c_e_usd, c_p_usd, total_usd, shifts, pv_utilization, and the
/// per-slot series.
nlohmann::ordered_json to_json(const CostBreakdown& cost);

} // namespace dsm
