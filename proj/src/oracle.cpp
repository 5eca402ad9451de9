#include "dsm/oracle.hpp"

#include "csv_util.hpp"
#include "dsm/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

namespace dsm {

namespace {

std::vector<std::vector<Slot>> placements(const Problem& p, const Appliance& a) {
    std::vector<std::vector<Slot>> out;
    if (a.cls == ApplianceClass::Baseline) {
        out.push_back(a.original_on_slots);
        return out;
    }
    const auto w = a.window;
    if (p.keeps_original(a)) out.push_back(a.original_on_slots);
    if (a.cls == ApplianceClass::Uninterruptible) {
        for (Slot s = w.start; s + a.duration - 1 <= w.end; ++s) {
            std::vector<Slot> row;
            for (int k = 0; k < a.duration; ++k) row.push_back(s + k);
            out.push_back(std::move(row));
        }
        std::sort(out.begin(), out.end());
        return out;
    }
    // k-combinations of the window in lexicographic order
    std::vector<Slot> row(static_cast<std::size_t>(a.duration));
    for (int k = 0; k < a.duration; ++k) row[static_cast<std::size_t>(k)] = w.start + k;
    for (;;) {
        out.push_back(row);
        int k = a.duration - 1;
        while (k >= 0 && row[static_cast<std::size_t>(k)] == w.end - (a.duration - 1 - k)) --k;
        if (k < 0) break;
        ++row[static_cast<std::size_t>(k)];
        for (int j = k + 1; j < a.duration; ++j)
            row[static_cast<std::size_t>(j)] = row[static_cast<std::size_t>(j - 1)] + 1;
    }
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace

void SmallInstance::validate() const {
    problem.validate();
    const auto flexible = std::count_if(problem.appliances.begin(), problem.appliances.end(),
                                        [](const Appliance& a) { return a.flexible(); });
    if (flexible > kMaxOracleFlexible)
        throw ConfigError("oracle instances allow at most " + std::to_string(kMaxOracleFlexible) +
                          " flexible appliances");
    if (problem.grid.slot_count > kMaxOracleSlots)
        throw ConfigError("oracle instances allow at most " + std::to_string(kMaxOracleSlots) + " slots");
}

double placement_count(const Problem& problem) {
    double count = 1.0;
    for (const auto& a : problem.appliances) {
        if (a.cls == ApplianceClass::Baseline) continue;
        const int n = a.window.length();
        double c = 1.0;
        if (a.cls == ApplianceClass::Uninterruptible) {
            c = std::max(n - a.duration + 1, 0);
        } else {
            for (int k = 0; k < a.duration; ++k) c = c * (n - k) / (k + 1);
            c = std::round(c);
        }
        count *= c + (problem.keeps_original(a) ? 1.0 : 0.0);
    }
    return count;
}

std::uint64_t enumerate_feasible(const SmallInstance& instance, const Evaluator& evaluator,
                                 const std::function<void(const OnSlots&)>& visit) {
    instance.validate();
    const auto& p = instance.problem;
    const double count = placement_count(p);
    if (count > kEnumerationLimit) throw GuardError(count, kEnumerationLimit);

    std::vector<std::vector<std::vector<Slot>>> options;
    for (const auto& a : p.appliances) options.push_back(placements(p, a));

    const std::size_t apps = p.appliances.size();
    OnSlots current(apps);
    std::vector<double> load(static_cast<std::size_t>(p.grid.slot_count), 0.0);
    std::uint64_t visited = 0;

    std::function<void(std::size_t)> place = [&](std::size_t a) {
        if (a == apps) {
            if (p.network)
                for (Slot t = 1; t <= p.grid.slot_count; ++t) {
                    const auto flow = evaluator.slot_flow(t, load[static_cast<std::size_t>(t - 1)]);
                    if (!flow.converged || flow.band_excess_pu > 0.0) return;
                }
            ++visited;
            visit(current);
            return;
        }
        const double r = p.appliances[a].rated_kw;
        for (const auto& row : options[a]) {
            bool fits = true;
            for (Slot t : row) {
                auto& l = load[static_cast<std::size_t>(t - 1)];
                l += r;
                if (l > p.max_demand_kw + 1e-9) fits = false;
            }
            if (fits) {
                current[a] = row;
                place(a + 1);
            }
            for (Slot t : row) load[static_cast<std::size_t>(t - 1)] -= r;
        }
    };
    place(0);
    return visited;
}

std::uint64_t enumerate_feasible(const SmallInstance& instance, const std::function<void(const OnSlots&)>& visit) {
    Evaluator ev(instance.problem);
    return enumerate_feasible(instance, ev, visit);
}

OracleResult exhaustive_optimize(const SmallInstance& instance, const Evaluator& evaluator) {
    struct Entry {
        OnSlots slots;
        double cost;
        int shift;
    };
    std::optional<Entry> best;
    std::vector<Entry> near; // candidates within tolerance of the lowest cost seen
    double lowest = std::numeric_limits<double>::infinity();

    const auto visited = enumerate_feasible(instance, evaluator, [&](const OnSlots& s) {
        const auto sc = evaluator.score(s);
        Entry e{s, sc.total_usd(), sc.total_shift};
        if (!best || better_outcome(e.cost, e.shift, e.slots, best->cost, best->shift, best->slots)) best = e;
        if (e.cost < lowest - kCostTieTolerance) near.clear();
        if (e.cost <= lowest + kCostTieTolerance) {
            lowest = std::min(lowest, e.cost);
            near.push_back(std::move(e));
        }
    });
    if (!best) throw Error("instance has no feasible schedule");

    OracleResult r;
    r.on_slots = best->slots;
    r.schedule = schedule_from_on_slots(r.on_slots, instance.problem.grid.slot_count, instance.problem.appliances);
    r.cost = evaluator.total_cost(r.on_slots);
    for (auto& e : near)
        if (e.cost <= lowest + kCostTieTolerance) r.ties.push_back(std::move(e.slots));
    r.feasible_count = visited;
    return r;
}

OracleResult exhaustive_optimize(const SmallInstance& instance) {
    Evaluator ev(instance.problem);
    return exhaustive_optimize(instance, ev);
}

SmallInstance parse_instance_json(const nlohmann::json& j) {
    try {
        SmallInstance inst;
        auto& p = inst.problem;
        p.grid.slot_count = j.at("slot_count").get<int>();
        p.grid.slot_hours = j.value("slot_hours", 0.5);
        for (const auto& a : j.at("appliances")) {
            Appliance app;
            app.id = a.at("id").get<int>();
            app.cls = parse_appliance_class(a.at("class").get<std::string>());
            app.window = {a.at("window").at(0).get<int>(), a.at("window").at(1).get<int>()};
            app.duration = a.at("duration").get<int>();
            app.rated_kw = a.at("rated_kw").get<double>();
            app.original_on_slots = a.at("original_slots").get<std::vector<int>>();
            p.appliances.push_back(std::move(app));
        }
        p.price.usd_per_kwh = j.at("price_usd_per_kwh").get<std::vector<double>>();
        p.price.label = "instance";
        if (j.contains("pv_kw")) {
            p.pv.kw = j.at("pv_kw").get<std::vector<double>>();
            p.pv.capacity_kw = *std::max_element(p.pv.kw.begin(), p.pv.kw.end());
        } else {
            p.pv = zero_pv(p.grid);
        }
        if (j.contains("max_demand_kw")) p.max_demand_kw = j.at("max_demand_kw").get<double>();
        if (j.contains("penalty_cents"))
            p.penalty_usd_per_kwh = j.at("penalty_cents").get<double>() / 100.0;
        else
            p.penalty_usd_per_kwh = j.value("penalty_usd_per_kwh", 0.0);
        if (j.contains("voltage_band_pu"))
            p.band = {j.at("voltage_band_pu").at(0).get<double>(), j.at("voltage_band_pu").at(1).get<double>()};
        if (j.contains("feeder") && !j.at("feeder").is_null()) {
            const auto& f = j.at("feeder");
            NeighborLoads n;
            n.house_kw = f.at("neighbor_kw").get<std::vector<std::vector<double>>>();
            n.power_factor = f.value("power_factor", 0.95);
            p.network.emplace(parse_feeder_json(f.dump(), "<instance feeder>"), std::move(n));
        }
        inst.validate();
        return inst;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("<instance>", 0, 0, e.what());
    }
}

SmallInstance load_instance_json(const std::filesystem::path& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(detail::read_file(path.string()));
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path.string(), 0, 0, e.what());
    }
    return parse_instance_json(j);
}

nlohmann::ordered_json to_json(const OracleResult& result, const Problem& problem) {
    nlohmann::ordered_json j;
    j["feasible_count"] = result.feasible_count;
    j["tie_count"] = result.ties.size();
    j["schedule"] = nlohmann::ordered_json::array();
    for (std::size_t a = 0; a < problem.appliances.size(); ++a)
        j["schedule"].push_back({{"id", problem.appliances[a].id}, {"on_slots", result.on_slots[a]}});
    j["cost"] = to_json(result.cost);
    return j;
}

} // namespace dsm
