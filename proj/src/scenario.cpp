#include "dsm/scenario.hpp"

#include "csv_util.hpp"
#include "dsm/error.hpp"

#include <cstdio>
#include <fstream>

namespace dsm {

namespace fs = std::filesystem;

namespace {

std::string fixed6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << text;
}

void require_file(const fs::path& p, const std::string& what) {
    if (!fs::exists(p)) throw ConfigError(what + " file not found: " + p.string());
}

CsaConfig parse_csa(const nlohmann::json& j, CsaConfig c) {
    c.population_size = j.value("population_size", c.population_size);
    c.generations = j.value("generations", c.generations);
    c.clone_factor = j.value("clone_factor", c.clone_factor);
    c.max_clones = j.value("max_clones", c.max_clones);
    c.hypermutation_scale = j.value("hypermutation_scale", c.hypermutation_scale);
    c.replacement_fraction = j.value("replacement_fraction", c.replacement_fraction);
    c.constraint_penalty_weight = j.value("constraint_penalty_weight", c.constraint_penalty_weight);
    c.stall_generations = j.value("stall_generations", c.stall_generations);
    c.threads = j.value("threads", c.threads);
    c.rng_seed = j.value("rng_seed", c.rng_seed);
    return c;
}

std::vector<double> smart_home_voltages(const Evaluator& ev, const Schedule& schedule) {
    const auto& p = ev.problem();
    std::vector<double> v;
    if (!p.network) return v;
    const auto gross = aggregate_power(schedule, p.appliances);
    for (Slot t = 1; t <= p.grid.slot_count; ++t)
        v.push_back(ev.solve_slot(t, gross[static_cast<std::size_t>(t - 1)]).magnitude(p.network->feeder.smart_home_bus()));
    return v;
}

nlohmann::ordered_json schedule_json(const Schedule& s, const std::vector<Appliance>& apps) {
    auto arr = nlohmann::ordered_json::array();
    for (std::size_t a = 0; a < apps.size(); ++a) arr.push_back({{"id", apps[a].id}, {"on_slots", s.on_slots(a)}});
    return arr;
}

} // namespace

void ScenarioConfig::validate() const {
    require_file(appliances, "appliance");
    require_file(price, "price");
    if (pv_enabled) {
        if (!pv) throw ConfigError("pv_enabled is set but no PV file is configured");
        require_file(*pv, "PV");
    }
    if (neighbors.has_value() != feeder.has_value())
        throw ConfigError("neighbors and feeder must be configured together");
    if (neighbors) require_file(*neighbors, "neighbour load");
    if (feeder) require_file(*feeder, "feeder");
    if (penalty_cents.empty()) throw ConfigError("penalty price list is empty");
    for (double c : penalty_cents)
        if (c < 0.0) throw ConfigError("penalty prices must be non-negative");
    if (!grid.valid()) throw ConfigError("invalid time grid");
    csa.validate();
}

ScenarioConfig load_scenario_config(const fs::path& path) {
    if (!fs::exists(path)) throw ConfigError("config file not found: " + path.string());
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(detail::read_file(path.string()));
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path.string(), 0, 0, e.what());
    }
    const fs::path base = path.parent_path();
    auto resolve = [&](const std::string& p) { return fs::path(p).is_absolute() ? fs::path(p) : base / p; };

    ScenarioConfig c;
    try {
        c.name = j.value("name", path.stem().string());
        c.appliances = resolve(j.at("appliances").get<std::string>());
        c.price = resolve(j.at("price").get<std::string>());
        if (j.contains("pv")) c.pv = resolve(j.at("pv").get<std::string>());
        c.pv_capacity_kw = j.value("pv_capacity_kw", c.pv_capacity_kw);
        c.pv_enabled = j.value("pv_enabled", c.pv.has_value());
        if (j.contains("neighbors")) c.neighbors = resolve(j.at("neighbors").get<std::string>());
        if (j.contains("feeder")) c.feeder = resolve(j.at("feeder").get<std::string>());
        c.power_factor = j.value("power_factor", c.power_factor);
        c.grid.slot_count = j.value("slot_count", c.grid.slot_count);
        c.grid.slot_hours = j.value("slot_hours", c.grid.slot_hours);
        c.max_demand_kw = j.value("max_demand_kw", c.max_demand_kw);
        if (j.contains("voltage_band_pu"))
            c.band = {j.at("voltage_band_pu").at(0).get<double>(), j.at("voltage_band_pu").at(1).get<double>()};
        c.use_effective_window = j.value("use_effective_window", c.use_effective_window);
        if (j.contains("penalty_cents")) c.penalty_cents = j.at("penalty_cents").get<std::vector<double>>();
        if (j.contains("csa")) c.csa = parse_csa(j.at("csa"), c.csa);
        if (j.contains("seed")) c.csa.rng_seed = j.at("seed").get<std::uint64_t>();
        // Output goes where the user runs the tool, not next to the config.
        c.output_dir = j.value("output_dir", "out/" + c.name);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path.string(), 0, 0, e.what());
    }
    return c;
}

Problem build_problem(const ScenarioConfig& config, double penalty_usd_per_kwh) {
    config.validate();
    Problem p;
    p.grid = config.grid;
    p.appliances = load_appliances_csv(config.appliances);
    p.price = load_price_series(config.price, p.grid.slot_count);
    p.pv = config.pv_enabled ? load_pv_series(*config.pv, p.grid.slot_count, config.pv_capacity_kw)
                             : zero_pv(p.grid);
    if (config.feeder)
        p.network.emplace(load_feeder_json(*config.feeder),
                          load_neighbor_loads(*config.neighbors, p.grid.slot_count, config.power_factor));
    p.max_demand_kw = config.max_demand_kw;
    p.penalty_usd_per_kwh = penalty_usd_per_kwh;
    p.band = config.band;
    p.use_effective_window = config.use_effective_window;
    p.validate();
    return p;
}

std::string penalty_label(double cents) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", cents);
    return buf;
}

bool ScenarioReport::all_feasible() const {
    for (const auto& r : runs)
        if (!r.result.success) return false;
    return !runs.empty();
}

ScenarioReport run_scenario(const ScenarioConfig& config) {
    config.validate();
    fs::create_directories(config.output_dir);

    ScenarioReport report;
    report.config = config;

    nlohmann::ordered_json j;
    j["schema_version"] = kReportSchemaVersion;
    j["scenario"] = config.name;
    j["pv_enabled"] = config.pv_enabled;
    j["max_demand_kw"] = config.max_demand_kw;
    j["voltage_band_pu"] = {config.band.min_pu, config.band.max_pu};
    j["seed"] = config.csa.rng_seed;
    j["table"] = nlohmann::ordered_json::array();
    j["runs"] = nlohmann::ordered_json::array();

    for (double cents : config.penalty_cents) {
        const Problem problem = build_problem(config, cents_to_usd(cents));
        const Evaluator ev(problem);
        const auto original = problem.original();

        if (report.runs.empty()) {
            report.original_cost = ev.total_cost(original);
            report.original_feasible = is_feasible(original, ev).feasible();
            j["original"] = {{"feasible", report.original_feasible}, {"cost", to_json(report.original_cost)}};
        }

        ScenarioRun run;
        run.penalty_cents = cents;
        run.result = optimize(ev, config.csa);
        run.smart_home_v_original = smart_home_voltages(ev, original);
        run.smart_home_v_dsm = smart_home_voltages(ev, run.result.schedule);

        const auto label = penalty_label(cents);
        const auto& res = run.result;
        const auto gross_original = aggregate_power(original, problem.appliances);
        const auto gross_dsm = aggregate_power(res.schedule, problem.appliances);

        std::string profile = "slot,original_kw,dsm_kw,pv_kw,price\n";
        for (std::size_t t = 0; t < gross_dsm.size(); ++t)
            profile += std::to_string(t + 1) + "," + fixed6(gross_original[t]) + "," + fixed6(gross_dsm[t]) + "," +
                       fixed6(problem.pv[t]) + "," + fixed6(problem.price[t]) + "\n";
        write_text(config.output_dir / ("profile_" + label + ".csv"), profile);

        std::string voltage = "slot,bus,v_pu\n";
        if (problem.network)
            for (Slot t = 1; t <= problem.grid.slot_count; ++t) {
                const auto st = ev.solve_slot(t, gross_dsm[static_cast<std::size_t>(t - 1)]);
                for (int b = 0; b < problem.network->feeder.bus_count(); ++b)
                    voltage += std::to_string(t) + "," + std::to_string(b) + "," + fixed6(st.magnitude(b)) + "\n";
            }
        write_text(config.output_dir / ("voltage_" + label + ".csv"), voltage);
        write_text(config.output_dir / ("convergence_" + label + ".csv"), convergence_csv(res.history));
        write_text(config.output_dir / ("schedule_" + label + ".csv"),
                   format_schedule_csv(res.schedule, problem.appliances));

        nlohmann::ordered_json r;
        r["penalty_cents"] = cents;
        r["penalty_usd_per_kwh"] = problem.penalty_usd_per_kwh;
        r["success"] = res.success;
        if (!res.success) r["failure"] = res.failure;
        r["total_usd"] = res.cost.total_usd;
        r["c_e_usd"] = res.cost.c_e_usd;
        r["c_p_usd"] = res.cost.c_p_usd;
        r["pv_utilization"] = res.cost.pv_utilization ? nlohmann::ordered_json(*res.cost.pv_utilization)
                                                      : nlohmann::ordered_json(nullptr);
        r["weighted_shift_kw_slots"] = res.cost.weighted_shift_kw_slots(problem.appliances);
        r["evaluations"] = res.evaluations;
        r["generations"] = res.history.empty() ? 0 : res.history.back().generation;
        r["cost"] = to_json(res.cost);
        r["feasibility"] = to_json(res.feasibility);
        r["schedule"] = schedule_json(res.schedule, problem.appliances);
        r["smart_home_voltage_pu"] = {{"original", run.smart_home_v_original}, {"dsm", run.smart_home_v_dsm}};
        r["files"] = {{"profile", "profile_" + label + ".csv"},
                      {"voltage", "voltage_" + label + ".csv"},
                      {"convergence", "convergence_" + label + ".csv"},
                      {"schedule", "schedule_" + label + ".csv"}};
        j["runs"].push_back(std::move(r));
        j["table"].push_back({{"penalty_cents", cents},
                              {"total_usd", res.cost.total_usd},
                              {"c_e_usd", res.cost.c_e_usd},
                              {"c_p_usd", res.cost.c_p_usd}});
        report.runs.push_back(std::move(run));
    }
    j["all_feasible"] = report.all_feasible();
    write_text(config.output_dir / "report.json", j.dump(2) + "\n");
    report.json = std::move(j);
    return report;
}

nlohmann::ordered_json explain(const fs::path& schedule_file, const ScenarioConfig& config,
                               double penalty_usd_per_kwh) {
    const Problem problem = build_problem(config, penalty_usd_per_kwh);
    const Evaluator ev(problem);
    const auto schedule = load_schedule_csv(schedule_file, problem.appliances, problem.grid);

    nlohmann::ordered_json j;
    j["schema_version"] = kReportSchemaVersion;
    j["penalty_usd_per_kwh"] = penalty_usd_per_kwh;
    const auto report = is_feasible(schedule, ev);
    j["feasibility"] = to_json(report);
    const bool evaluable = report.duration.empty() && report.power_flow_failures.empty();
    if (evaluable)
        j["cost"] = to_json(ev.total_cost(schedule));
    else
        j["cost"] = nullptr;
    return j;
}

} // namespace dsm
