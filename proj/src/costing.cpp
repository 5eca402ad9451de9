#include "dsm/costing.hpp"

#include "dsm/error.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <shared_mutex>
#include <unordered_map>

namespace dsm {

int CostBreakdown::total_shift() const {
    int s = 0;
    for (int d : shifts) s += d;
    return s;
}

double CostBreakdown::weighted_shift_kw_slots(std::span<const Appliance> appliances) const {
    double w = 0.0;
    for (std::size_t a = 0; a < shifts.size() && a < appliances.size(); ++a) w += shifts[a] * appliances[a].rated_kw;
    return w;
}

NetLoad net_household_load(std::span<const double> gross_kw, const PvSeries& pv) {
    if (gross_kw.size() != pv.size()) throw DimensionError("load and PV series lengths differ");
    NetLoad out;
    out.net_kw.resize(gross_kw.size());
    out.surplus_kw.resize(gross_kw.size());
    for (std::size_t t = 0; t < gross_kw.size(); ++t) {
        out.net_kw[t] = std::max(gross_kw[t] - pv[t], 0.0);
        out.surplus_kw[t] = std::max(pv[t] - gross_kw[t], 0.0);
    }
    return out;
}

NetLoad net_household_load(const Schedule& schedule, std::span<const Appliance> appliances, const PvSeries& pv) {
    const auto gross = aggregate_power(schedule, appliances);
    return net_household_load(gross, pv);
}

double electricity_cost(std::span<const double> net_kw, std::span<const double> loss_kw, const PriceSeries& price,
                        const TimeGrid& grid) {
    if (net_kw.size() != price.size() || loss_kw.size() != price.size())
        throw DimensionError("cost series lengths differ");
    double sum = 0.0;
    for (std::size_t t = 0; t < net_kw.size(); ++t) sum += (net_kw[t] + loss_kw[t]) * price[t];
    return sum * grid.slot_hours;
}

int shift_distance(const Appliance& appliance, std::span<const Slot> new_on_slots) {
    const auto& old = appliance.original_on_slots;
    if (new_on_slots.size() != old.size() || static_cast<int>(new_on_slots.size()) != appliance.duration)
        throw DimensionError("appliance " + std::to_string(appliance.id) + ": expected " +
                             std::to_string(appliance.duration) + " on-slots, got " +
                             std::to_string(new_on_slots.size()));
    int d = 0;
    for (std::size_t k = 0; k < old.size(); ++k) d += std::abs(new_on_slots[k] - old[k]);
    return d;
}

double penalty_cost(std::span<const int> shifts, std::span<const Appliance> appliances, double penalty_usd_per_kwh,
                    const TimeGrid& grid) {
    if (shifts.size() != appliances.size()) throw DimensionError("shift count does not match appliance count");
    if (penalty_usd_per_kwh < 0.0) throw Error("penalty price must be non-negative");
    double weighted = 0.0;
    for (std::size_t a = 0; a < shifts.size(); ++a) weighted += shifts[a] * appliances[a].rated_kw;
    return grid.slot_hours * penalty_usd_per_kwh * weighted;
}

double pv_utilization(std::span<const double> gross_kw, const PvSeries& pv, const TimeGrid& grid) {
    if (gross_kw.size() != pv.size()) throw DimensionError("load and PV series lengths differ");
    double used = 0.0;
    double available = 0.0;
    for (std::size_t t = 0; t < gross_kw.size(); ++t) {
        used += std::min(gross_kw[t], pv[t]) * grid.slot_hours;
        available += pv[t] * grid.slot_hours;
    }
    if (!(available > 0.0)) throw UndefinedMetricError("PV utilization is undefined without PV generation");
    return used / available;
}

bool better_outcome(double cost_a, int shift_a, const OnSlots& a, double cost_b, int shift_b, const OnSlots& b) {
    if (cost_a < cost_b - kCostTieTolerance) return true;
    if (cost_b < cost_a - kCostTieTolerance) return false;
    if (shift_a != shift_b) return shift_a < shift_b;
    return a < b;
}

struct Evaluator::Cache {
    struct SlotCache {
        mutable std::shared_mutex mutex;
        std::unordered_map<long long, SlotFlow> flows;
        double baseline_loss_kw = 0.0;
    };
    std::vector<SlotCache> slots;
    std::atomic<std::uint64_t> solves{0};

    explicit Cache(std::size_t n) : slots(n) {}
};

Evaluator::Evaluator(const Problem& problem)
    : problem_(problem), cache_(std::make_unique<Cache>(static_cast<std::size_t>(problem.grid.slot_count))) {
    problem_.validate();
    if (problem_.network) {
        // Loss of the feeder with the smart home disconnected, per slot.
        for (Slot t = 1; t <= problem_.grid.slot_count; ++t) {
            auto inj = problem_.network->injections(t, 0.0, 0.0);
            cache_->slots[static_cast<std::size_t>(t - 1)].baseline_loss_kw =
                feeder_loss(solve_power_flow(problem_.network->feeder, inj, problem_.network->options));
        }
    }
}

Evaluator::~Evaluator() = default;

std::uint64_t Evaluator::flow_solves() const { return cache_->solves.load(); }

BusState Evaluator::solve_slot(Slot t, double gross_kw) const {
    if (!problem_.network) throw Error("problem has no feeder");
    const double pv = problem_.pv[static_cast<std::size_t>(t - 1)];
    auto st = solve_power_flow(problem_.network->feeder, problem_.network->injections(t, gross_kw, pv),
                               problem_.network->options);
    st.slot = t;
    return st;
}

SlotFlow Evaluator::slot_flow(Slot t, double gross_kw) const {
    if (!problem_.network) return {};
    auto& sc = cache_->slots[static_cast<std::size_t>(t - 1)];
    const long long key = std::llround(gross_kw * 1000.0);
    {
        std::shared_lock lock(sc.mutex);
        if (auto it = sc.flows.find(key); it != sc.flows.end()) return it->second;
    }

    SlotFlow flow;
    try {
        const auto st = solve_slot(t, static_cast<double>(key) / 1000.0);
        flow.billed_loss_kw = std::max(feeder_loss(st) - sc.baseline_loss_kw, 0.0);
        flow.min_pu = flow.max_pu = st.magnitude(1);
        for (int b = 1; b < static_cast<int>(st.voltage.size()); ++b) {
            const double m = st.magnitude(b);
            flow.min_pu = std::min(flow.min_pu, m);
            flow.max_pu = std::max(flow.max_pu, m);
            flow.band_excess_pu += std::max(problem_.band.min_pu - m, 0.0) + std::max(m - problem_.band.max_pu, 0.0);
        }
    } catch (const ConvergenceError&) {
        flow = SlotFlow{};
        flow.converged = false;
    }
    cache_->solves.fetch_add(1, std::memory_order_relaxed);

    std::unique_lock lock(sc.mutex);
    return sc.flows.emplace(key, flow).first->second;
}

std::vector<double> Evaluator::gross_kw(const OnSlots& on_slots) const {
    const auto& apps = problem_.appliances;
    if (on_slots.size() != apps.size()) throw DimensionError("on-slot lists do not match appliance count");
    std::vector<double> gross(static_cast<std::size_t>(problem_.grid.slot_count), 0.0);
    for (std::size_t a = 0; a < apps.size(); ++a)
        for (Slot t : on_slots[a]) gross[static_cast<std::size_t>(t - 1)] += apps[a].rated_kw;
    return gross;
}

Score Evaluator::score(const OnSlots& on_slots) const {
    const auto& p = problem_;
    const auto gross = gross_kw(on_slots);
    Score s;
    double energy_cost = 0.0;
    for (std::size_t i = 0; i < gross.size(); ++i) {
        const Slot t = static_cast<Slot>(i + 1);
        const double net = std::max(gross[i] - p.pv[i], 0.0);
        double loss = 0.0;
        if (p.network) {
            const auto flow = slot_flow(t, gross[i]);
            if (!flow.converged) {
                ++s.flow_failures;
            } else {
                loss = flow.billed_loss_kw;
                s.voltage_excess_pu += flow.band_excess_pu;
            }
        }
        energy_cost += (net + loss) * p.price[i];
        s.md_excess_kw_slots += std::max(gross[i] - p.max_demand_kw, 0.0);
    }
    s.c_e_usd = energy_cost * p.grid.slot_hours;

    double weighted = 0.0;
    for (std::size_t a = 0; a < p.appliances.size(); ++a) {
        const auto& app = p.appliances[a];
        if (app.cls == ApplianceClass::Baseline) continue;
        const int d = shift_distance(app, on_slots[a]);
        s.total_shift += d;
        weighted += d * app.rated_kw;
    }
    s.c_p_usd = p.grid.slot_hours * p.penalty_usd_per_kwh * weighted;
    return s;
}

CostBreakdown Evaluator::total_cost(const Schedule& schedule) const { return total_cost(schedule.all_on_slots()); }

CostBreakdown Evaluator::total_cost(const OnSlots& on_slots) const {
    const auto& p = problem_;
    CostBreakdown c;
    c.gross_kw = gross_kw(on_slots);
    c.net_kw = net_household_load(c.gross_kw, p.pv).net_kw;
    c.billed_loss_kw.assign(c.gross_kw.size(), 0.0);
    if (p.network) {
        for (std::size_t i = 0; i < c.gross_kw.size(); ++i) {
            const auto flow = slot_flow(static_cast<Slot>(i + 1), c.gross_kw[i]);
            if (!flow.converged)
                throw ConvergenceError("power flow did not converge at slot " + std::to_string(i + 1));
            c.billed_loss_kw[i] = flow.billed_loss_kw;
        }
    }
    c.c_e_usd = electricity_cost(c.net_kw, c.billed_loss_kw, p.price, p.grid);

    for (std::size_t a = 0; a < p.appliances.size(); ++a) {
        const auto& app = p.appliances[a];
        c.appliance_ids.push_back(app.id);
        c.shifts.push_back(app.cls == ApplianceClass::Baseline ? 0 : shift_distance(app, on_slots[a]));
    }
    c.c_p_usd = penalty_cost(c.shifts, p.appliances, p.penalty_usd_per_kwh, p.grid);
    c.total_usd = c.c_e_usd + c.c_p_usd;
    if (p.pv.total() > 0.0) c.pv_utilization = pv_utilization(c.gross_kw, p.pv, p.grid);
    return c;
}

nlohmann::ordered_json to_json(const CostBreakdown& cost) {
    nlohmann::ordered_json j;
    j["c_e_usd"] = cost.c_e_usd;
    j["c_p_usd"] = cost.c_p_usd;
    j["total_usd"] = cost.total_usd;
    j["shifts"] = nlohmann::ordered_json::array();
    for (std::size_t a = 0; a < cost.shifts.size(); ++a)
        j["shifts"].push_back({{"appliance", cost.appliance_ids[a]}, {"slots", cost.shifts[a]}});
    if (cost.pv_utilization)
        j["pv_utilization"] = *cost.pv_utilization;
    else
        j["pv_utilization"] = nullptr;
    j["gross_kw"] = cost.gross_kw;
    j["net_kw"] = cost.net_kw;
    j["billed_loss_kw"] = cost.billed_loss_kw;
    return j;
}

} // namespace dsm
