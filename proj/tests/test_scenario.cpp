#include "doctest.h"

#include "dsm/constraints.hpp"
#include "dsm/error.hpp"
#include "dsm/oracle.hpp"
#include "dsm/scenario.hpp"
#include "small_instances.hpp"
#include "test_support.hpp"

#include "json.hpp"

#include <fstream>
#include <sstream>

using namespace dsm;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void spit(const fs::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

ScenarioConfig canonical_config(const std::string& name, std::vector<double> cents, bool pv, const fs::path& out) {
    auto c = load_scenario_config(dsm::testing::data_dir() / "scenarios" / "scenario_c.json");
    c.name = name;
    c.penalty_cents = std::move(cents);
    c.pv_enabled = pv;
    c.csa.generations = 40;
    c.csa.stall_generations = 40;
    c.csa.rng_seed = 3;
    c.output_dir = out;
    return c;
}

/// Writes the fixtures of a feeder-less small instance and a config for it.
fs::path write_small_scenario(const Problem& p, const fs::path& dir) {
    std::string apps = "id,class,window_start,window_end,duration,rated_kw,original_slots\n";
    for (const auto& a : p.appliances) {
        std::ostringstream row;
        row << a.id << ',' << to_string(a.cls) << ',' << a.window.start << ',' << a.window.end << ',' << a.duration
            << ',' << a.rated_kw << ',' << format_slot_list(a.original_on_slots) << '\n';
        apps += row.str();
    }
    spit(dir / "apps.csv", apps);
    spit(dir / "price.csv", write_series(p.price.usd_per_kwh));
    nlohmann::json cfg = {{"name", "small"},
                          {"appliances", "apps.csv"},
                          {"price", "price.csv"},
                          {"slot_count", p.grid.slot_count},
                          {"slot_hours", p.grid.slot_hours},
                          {"max_demand_kw", p.max_demand_kw},
                          {"penalty_cents", {p.penalty_usd_per_kwh * 100.0}},
                          {"output_dir", (dir / "out").string()}};
    spit(dir / "config.json", cfg.dump(2));
    return dir / "config.json";
}

/// "path type" lines describing the shape of a JSON document.
void skeleton(const nlohmann::ordered_json& j, const std::string& path, std::vector<std::string>& out) {
    out.push_back(path + " " + std::string(j.type_name()));
    if (j.is_object())
        for (const auto& [k, v] : j.items()) skeleton(v, path + "/" + k, out);
    else if (j.is_array() && !j.empty() && j.front().is_structured())
        skeleton(j.front(), path + "[]", out);
}

} // namespace

TEST_CASE("config errors name the offending path") {
    auto c = load_scenario_config(dsm::testing::data_dir() / "scenarios" / "scenario_a.json");
    CHECK_NOTHROW(c.validate());
    c.price = "/nonexistent/price.csv";
    try {
        c.validate();
        FAIL("expected a config error");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("/nonexistent/price.csv") != std::string::npos);
    }
    c = load_scenario_config(dsm::testing::data_dir() / "scenarios" / "scenario_a.json");
    c.penalty_cents.clear();
    CHECK_THROWS_AS(c.validate(), ConfigError);
    CHECK_THROWS_AS(load_scenario_config("/nonexistent/config.json"), ConfigError);
}

TEST_CASE("presets reproduce the three experiment setups") {
    const auto a = load_scenario_config(dsm::testing::data_dir() / "scenarios" / "scenario_a.json");
    const auto b = load_scenario_config(dsm::testing::data_dir() / "scenarios" / "scenario_b.json");
    const auto c = load_scenario_config(dsm::testing::data_dir() / "scenarios" / "scenario_c.json");
    CHECK(a.penalty_cents == std::vector<double>{0});
    CHECK_FALSE(a.pv_enabled);
    CHECK(b.penalty_cents == std::vector<double>{5, 10, 20});
    CHECK_FALSE(b.pv_enabled);
    CHECK(c.penalty_cents == std::vector<double>{0, 5, 10, 20});
    CHECK(c.pv_enabled);
    for (const auto* cfg : {&a, &b, &c}) {
        CHECK(cfg->max_demand_kw == 12.4);
        CHECK(cfg->feeder.has_value());
    }
    CHECK(cents_to_usd(5) == 0.05);
    CHECK(penalty_label(5) == "5");
    CHECK(penalty_label(2.5) == "2.5");
}

TEST_CASE("scenario run writes a feasible, versioned, reproducible report") {
    const auto dir = dsm::testing::scratch_dir("scenario_run");
    const auto cfg = canonical_config("a_short", {0}, false, dir / "first");
    const auto report = run_scenario(cfg);
    REQUIRE(report.all_feasible());
    REQUIRE(report.runs.size() == 1);
    CHECK(report.runs[0].result.cost.c_p_usd == 0.0);
    CHECK(report.runs[0].result.cost.total_usd < report.original_cost.total_usd);

    const auto j = nlohmann::ordered_json::parse(slurp(dir / "first" / "report.json"));
    CHECK(j["schema_version"] == kReportSchemaVersion);
    CHECK(j["table"].size() == 1);
    CHECK(j["table"][0]["c_p_usd"].get<double>() == 0.0);
    CHECK(j["all_feasible"].get<bool>());

    for (const char* f : {"profile_0.csv", "voltage_0.csv", "convergence_0.csv", "schedule_0.csv"})
        CHECK(fs::exists(dir / "first" / f));
    CHECK(slurp(dir / "first" / "profile_0.csv").rfind("slot,original_kw,dsm_kw,pv_kw,price\n", 0) == 0);
    CHECK(slurp(dir / "first" / "voltage_0.csv").rfind("slot,bus,v_pu\n", 0) == 0);

    // the written schedule passes the feasibility check on its own
    const auto problem = build_problem(cfg, 0.0);
    const auto sched = load_schedule_csv(dir / "first" / "schedule_0.csv", problem.appliances, problem.grid);
    CHECK(is_feasible(sched, problem).feasible());

    auto again = cfg;
    again.output_dir = dir / "second";
    run_scenario(again);
    for (const auto& entry : fs::directory_iterator(dir / "first"))
        CHECK(slurp(entry.path()) == slurp(dir / "second" / entry.path().filename()));
}

TEST_CASE("report schema matches the pinned golden") {
    const auto dir = dsm::testing::scratch_dir("scenario_schema");
    auto cfg = canonical_config("schema", {0, 5}, true, dir);
    cfg.csa.generations = 5;
    run_scenario(cfg);
    std::vector<std::string> lines;
    skeleton(nlohmann::ordered_json::parse(slurp(dir / "report.json")), "", lines);
    std::string got;
    for (const auto& l : lines) got += l + "\n";
    spit(dir / "report_schema.txt", got); // for diffing against the golden on failure
    CHECK(got == slurp(fs::path(DSM_TEST_DIR) / "golden" / "report_schema.txt"));
}

TEST_CASE("explain evaluates a schedule without optimizing") {
    const auto cfg = load_scenario_config(dsm::testing::data_dir() / "scenarios" / "scenario_a.json");

    SUBCASE("original schedule is feasible with zero penalty cost") {
        const auto j = explain(dsm::testing::data_dir() / "schedules" / "original_canonical.csv", cfg, 0.10);
        CHECK(j["feasibility"]["feasible"].get<bool>());
        CHECK(j["cost"]["c_p_usd"].get<double>() == 0.0);
    }
    SUBCASE("a hand-edited schedule over the demand cap lists the slot") {
        const auto dir = dsm::testing::scratch_dir("explain_md");
        std::string text = slurp(dsm::testing::data_dir() / "schedules" / "original_canonical.csv");
        // appliance 24 (2.0 kW) moved onto the original evening peak at slots 35-36
        const auto pos = text.find("\n24,");
        const auto end = text.find('\n', pos + 1);
        text.replace(pos, end - pos, "\n24,35;36;37;38");
        spit(dir / "edited.csv", text);
        const auto j = explain(dir / "edited.csv", cfg, 0.0);
        CHECK_FALSE(j["feasibility"]["feasible"].get<bool>());
        REQUIRE_FALSE(j["feasibility"]["max_demand"].empty());
        REQUIRE(j["feasibility"]["max_demand"].size() == 2);
        CHECK(j["feasibility"]["max_demand"][0]["slot"].get<int>() == 35);
        CHECK(j["feasibility"]["max_demand"][1]["slot"].get<int>() == 36);
    }
    SUBCASE("malformed schedule file") {
        const auto dir = dsm::testing::scratch_dir("explain_bad");
        spit(dir / "bad.csv", "id,on_slots\n4,x;y\n");
        CHECK_THROWS_AS(explain(dir / "bad.csv", cfg, 0.0), ParseError);
    }
}

TEST_CASE("explain agrees with the oracle on its optimal schedule") {
    const auto dir = dsm::testing::scratch_dir("explain_oracle");
    const auto inst = dsm::testing::small_instance(1, 0.05);
    const auto best = exhaustive_optimize(inst);
    const auto cfg = load_scenario_config(write_small_scenario(inst.problem, dir));
    spit(dir / "best.csv", format_schedule_csv(best.schedule, inst.problem.appliances));
    const auto j = explain(dir / "best.csv", cfg, inst.problem.penalty_usd_per_kwh);
    CHECK(j["feasibility"]["feasible"].get<bool>());
    CHECK(j["cost"]["total_usd"].get<double>() == doctest::Approx(best.cost.total_usd).epsilon(1e-12));
}
