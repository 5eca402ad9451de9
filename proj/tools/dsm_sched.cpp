// dsm-sched: day-ahead household appliance scheduler.
//
//   dsm-sched run --config <file> [--penalty-cents LIST] [--seed N] [--out DIR]
//   dsm-sched explain --schedule <file> --config <file> [--penalty-cents X]
//   dsm-sched oracle --instance <file>

#include "dsm/error.hpp"
#include "dsm/oracle.hpp"
#include "dsm/scenario.hpp"

#include "CLI11.hpp"

#include <iostream>

namespace {

std::vector<double> parse_cents(const std::string& text) {
    std::vector<double> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        auto end = text.find(',', start);
        if (end == std::string::npos) end = text.size();
        const auto item = text.substr(start, end - start);
        std::size_t used = 0;
        double v = std::stod(item, &used);
        if (used != item.size()) throw dsm::ConfigError("bad penalty value '" + item + "'");
        out.push_back(v);
        start = end + 1;
    }
    return out;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Day-ahead household demand-side management scheduler"};
    app.require_subcommand(1);

    std::string config_path;
    std::string penalty_list;
    std::uint64_t seed = 0;
    std::string out_dir;
    int threads = -1;

    auto* run = app.add_subcommand("run", "optimize a scenario and write reports");
    run->add_option("--config", config_path, "scenario JSON file")->required();
    run->add_option("--penalty-cents", penalty_list, "comma-separated penalty prices in cents/kWh");
    run->add_option("--seed", seed, "random seed");
    run->add_option("--out", out_dir, "output directory");
    run->add_option("--threads", threads, "evaluation threads");

    std::string schedule_path;
    auto* explain = app.add_subcommand("explain", "evaluate a schedule without optimizing");
    explain->add_option("--schedule", schedule_path, "on-slots CSV (id,on_slots)")->required();
    explain->add_option("--config", config_path, "scenario JSON file")->required();
    explain->add_option("--penalty-cents", penalty_list, "penalty price in cents/kWh (default: first in config)");

    std::string instance_path;
    auto* oracle = app.add_subcommand("oracle", "solve a small instance exhaustively");
    oracle->add_option("--instance", instance_path, "instance JSON file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) {
            auto config = dsm::load_scenario_config(config_path);
            if (!penalty_list.empty()) config.penalty_cents = parse_cents(penalty_list);
            if (run->count("--seed")) config.csa.rng_seed = seed;
            if (!out_dir.empty()) config.output_dir = out_dir;
            if (threads >= 0) config.csa.threads = threads;

            const auto report = dsm::run_scenario(config);
            for (const auto& row : report.json["table"])
                std::cout << "pi_p=" << row["penalty_cents"].get<double>() << "c/kWh  total=$"
                          << row["total_usd"].get<double>() << "  C_e=$" << row["c_e_usd"].get<double>()
                          << "  C_p=$" << row["c_p_usd"].get<double>() << "\n";
            std::cout << "report: " << (config.output_dir / "report.json").string() << "\n";
            if (!report.all_feasible()) {
                nlohmann::ordered_json diag;
                diag["error"] = "optimizer produced an infeasible or failed run";
                for (const auto& r : report.json["runs"])
                    if (!r["success"].get<bool>())
                        diag["runs"].push_back({{"penalty_cents", r["penalty_cents"]},
                                                {"failure", r.value("failure", "")},
                                                {"feasibility", r["feasibility"]}});
                std::cerr << diag.dump(2) << "\n";
                return 2;
            }
            return 0;
        }
        if (*explain) {
            auto config = dsm::load_scenario_config(config_path);
            const double cents = penalty_list.empty() ? config.penalty_cents.front() : parse_cents(penalty_list).front();
            const auto j = dsm::explain(schedule_path, config, dsm::cents_to_usd(cents));
            std::cout << j.dump(2) << "\n";
            return j["feasibility"]["feasible"].get<bool>() ? 0 : 2;
        }
        if (*oracle) {
            const auto instance = dsm::load_instance_json(instance_path);
            const auto result = dsm::exhaustive_optimize(instance);
            std::cout << dsm::to_json(result, instance.problem).dump(2) << "\n";
            return 0;
        }
    } catch (const dsm::Error& e) {
        nlohmann::ordered_json err{{"error", e.what()}};
        std::cerr << err.dump(2) << "\n";
        return 1;
    } catch (const std::exception& e) {
        nlohmann::ordered_json err{{"error", e.what()}};
        std::cerr << err.dump(2) << "\n";
        return 1;
    }
    return 0;
}
