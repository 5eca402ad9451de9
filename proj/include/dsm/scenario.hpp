#pragma once

// Scenario runner behind the dsm-sched command line tool.

#include "dsm/constraints.hpp"
#include "dsm/costing.hpp"
#include "dsm/csa.hpp"
#include "dsm/problem.hpp"

#include "json.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace dsm {

inline constexpr int kReportSchemaVersion = 1;

struct ScenarioConfig {
    std::string name = "scenario";
    std::filesystem::path appliances;
    std::filesystem::path price;
    std::optional<std::filesystem::path> pv;
    double pv_capacity_kw = 6.0;
    bool pv_enabled = false;
    std::optional<std::filesystem::path> neighbors;
    std::optional<std::filesystem::path> feeder;
    double power_factor = 0.95;
    TimeGrid grid;
    double max_demand_kw = 12.4;
    VoltageBand band;
    bool use_effective_window = true;
    std::vector<double> penalty_cents{0.0};
    CsaConfig csa;
    std::filesystem::path output_dir = "out";

    /// Throws ConfigError naming any referenced file that does not exist.
    void validate() const;
};

/// Reads a JSON scenario file. Relative paths resolve against its directory.
ScenarioConfig load_scenario_config(const std::filesystem::path& path);

/// Loads fixtures and builds the problem for one penalty price.
Problem build_problem(const ScenarioConfig& config, double penalty_usd_per_kwh);

/// Exact ¢/kWh → $/kWh conversion.
inline double cents_to_usd(double cents) { return cents / 100.0; }
std::string penalty_label(double cents);

struct ScenarioRun {
    double penalty_cents = 0.0;
    OptimResult result;
    std::vector<double> smart_home_v_original;
    std::vector<double> smart_home_v_dsm;
};

struct ScenarioReport {
    ScenarioConfig config;
    CostBreakdown original_cost;
    bool original_feasible = false;
    std::vector<ScenarioRun> runs;
    nlohmann::ordered_json json;

    bool all_feasible() const;
};

/// Optimizes every penalty price, writes report.json and the per-price CSVs
/// into config.output_dir, and returns the report.
ScenarioReport run_scenario(const ScenarioConfig& config);

/// Evaluates a user schedule (on-slots CSV) without optimizing.
nlohmann::ordered_json explain(const std::filesystem::path& schedule_file, const ScenarioConfig& config,
                               double penalty_usd_per_kwh);

} // namespace dsm
