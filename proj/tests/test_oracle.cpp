#include "doctest.h"

#include "dsm/constraints.hpp"
#include "dsm/error.hpp"
#include "dsm/oracle.hpp"
#include "small_instances.hpp"
#include "test_support.hpp"

#include <cmath>

using namespace dsm;
using dsm::testing::make_appliance;
using dsm::testing::small_instance;

namespace {

SmallInstance single(ApplianceClass cls, SlotWindow w, int duration, std::vector<Slot> original, int T = 8) {
    SmallInstance inst;
    auto& p = inst.problem;
    p.grid = {T, 0.5};
    p.price.usd_per_kwh.assign(static_cast<std::size_t>(T), 0.08);
    p.pv = zero_pv(p.grid);
    p.appliances.push_back(make_appliance(1, cls, w.start, w.end, duration, 1.0, std::move(original)));
    return inst;
}

double weighted_shift(const OracleResult& r, const Problem& p) {
    return r.cost.weighted_shift_kw_slots(p.appliances);
}

bool original_feasible(const Problem& p) { return is_feasible(p.original(), p).feasible(); }

} // namespace

TEST_CASE("enumeration counts match closed-form combinatorics") {
    const auto count = [](const SmallInstance& inst) { return enumerate_feasible(inst, [](const OnSlots&) {}); };
    CHECK(count(single(ApplianceClass::Uninterruptible, {1, 8}, 3, {1, 2, 3})) == 6);
    CHECK(count(single(ApplianceClass::Interruptible, {1, 5}, 2, {1, 2})) == 10);
    CHECK(count(single(ApplianceClass::Interruptible, {3, 6}, 4, {3, 4, 5, 6})) == 1);
    CHECK(count(single(ApplianceClass::Uninterruptible, {3, 6}, 4, {3, 4, 5, 6})) == 1);
    for (int n = 1; n <= 10; ++n)
        for (int d = 1; d <= n; ++d) {
            std::vector<Slot> orig;
            for (Slot t = 1; t <= d; ++t) orig.push_back(t);
            const auto inst = single(ApplianceClass::Interruptible, {1, n}, d, orig, 10);
            CHECK(count(inst) == static_cast<std::uint64_t>(std::lround(std::tgamma(n + 1) /
                                                                        (std::tgamma(d + 1) * std::tgamma(n - d + 1)))));
            CHECK(count(single(ApplianceClass::Uninterruptible, {1, n}, d, orig, 10)) ==
                  static_cast<std::uint64_t>(n - d + 1));
        }
}

TEST_CASE("enumeration visits each schedule once, in lexicographic order") {
    const auto inst = small_instance(0, 0.0);
    std::vector<OnSlots> seen;
    enumerate_feasible(inst, [&](const OnSlots& s) { seen.push_back(s); });
    CHECK(seen.size() == static_cast<std::size_t>(placement_count(inst.problem)));
    for (std::size_t i = 1; i < seen.size(); ++i) CHECK(seen[i - 1] < seen[i]);
}

TEST_CASE("every enumerated schedule passes the full feasibility check") {
    for (int k : {1, 3, 4}) {
        const auto inst = small_instance(k, 0.0);
        const Evaluator ev(inst.problem);
        std::uint64_t checked = 0, visited = 0;
        enumerate_feasible(inst, ev, [&](const OnSlots& s) {
            if (visited++ % 7 != 0) return; // a deterministic sample keeps this fast
            const auto rep = is_feasible(schedule_from_on_slots(s, inst.problem.grid.slot_count), ev);
            CHECK(rep.feasible());
            ++checked;
        });
        CHECK(checked > 0);
        const auto total = static_cast<std::uint64_t>(placement_count(inst.problem));
        if (std::isfinite(inst.problem.max_demand_kw))
            CHECK(visited < total); // the demand cap prunes
        else
            CHECK(visited == total);
    }
}

TEST_CASE("guard refuses oversized instances with the computed count") {
    SmallInstance inst;
    auto& p = inst.problem;
    p.grid = {16, 0.5};
    p.price.usd_per_kwh.assign(16, 0.08);
    p.pv = zero_pv(p.grid);
    for (int id = 1; id <= 4; ++id)
        p.appliances.push_back(make_appliance(id, ApplianceClass::Interruptible, 1, 16, 8, 0.5, {1, 2, 3, 4, 5, 6, 7, 8}));
    CHECK(placement_count(p) == doctest::Approx(std::pow(12870.0, 4)));
    try {
        enumerate_feasible(inst, [](const OnSlots&) {});
        FAIL("expected the guard to trip");
    } catch (const GuardError& e) {
        CHECK(e.count() == doctest::Approx(std::pow(12870.0, 4)));
    }

    auto too_long = single(ApplianceClass::Interruptible, {1, 17}, 2, {1, 2}, 17);
    CHECK_THROWS_AS(too_long.validate(), ConfigError);
    auto too_many = small_instance(0, 0.0);
    too_many.problem.appliances.push_back(make_appliance(9, ApplianceClass::Interruptible, 1, 12, 1, 0.1, {1}));
    too_many.problem.appliances.push_back(make_appliance(10, ApplianceClass::Interruptible, 1, 12, 1, 0.1, {1}));
    CHECK_THROWS_AS(too_many.validate(), ConfigError);
}

TEST_CASE("flat price with a positive penalty keeps the original schedule") {
    for (int k = 0; k < 4; ++k) {
        auto inst = small_instance(k, 0.05);
        std::fill(inst.problem.price.usd_per_kwh.begin(), inst.problem.price.usd_per_kwh.end(), 0.08);
        inst.problem.pv = zero_pv(inst.problem.grid);
        inst.problem.network.reset();
        const auto r = exhaustive_optimize(inst);
        CHECK(r.on_slots == inst.problem.original_on_slots());
        CHECK(r.cost.c_p_usd == 0.0);
    }
}

TEST_CASE("a strictly cheapest placement is found") {
    auto inst = single(ApplianceClass::Uninterruptible, {1, 8}, 3, {1, 2, 3});
    inst.problem.price.usd_per_kwh = {0.2, 0.2, 0.2, 0.2, 0.05, 0.04, 0.05, 0.2};
    const auto r = exhaustive_optimize(inst);
    CHECK(r.on_slots == OnSlots{{5, 6, 7}});
    CHECK(r.ties.size() == 1);
    CHECK(r.feasible_count == 6);
}

TEST_CASE("ties are reported and broken by shift then lexicographic order") {
    auto inst = single(ApplianceClass::Interruptible, {1, 6}, 1, {3}, 6);
    inst.problem.price.usd_per_kwh = {0.04, 0.2, 0.2, 0.2, 0.04, 0.2};
    const auto r = exhaustive_optimize(inst);
    CHECK(r.ties.size() == 2);
    CHECK(r.on_slots == OnSlots{{1}}); // shift 2 from slot 3 either way; slot 1 is earliest
    inst.problem.appliances[0].original_on_slots = {4};
    CHECK(exhaustive_optimize(inst).on_slots == OnSlots{{5}});
}

TEST_CASE("oracle optimum is never worse than a feasible original") {
    for (const auto& [name, inst] : dsm::testing::small_instance_suite()) {
        CAPTURE(name);
        const Evaluator ev(inst.problem);
        const auto r = exhaustive_optimize(inst, ev);
        if (original_feasible(inst.problem))
            CHECK(r.cost.total_usd <= ev.total_cost(inst.problem.original()).total_usd + kCostTieTolerance);
        CHECK(r.cost.total_usd == doctest::Approx(r.cost.c_e_usd + r.cost.c_p_usd));
    }
}

TEST_CASE("optimal weighted shift is non-increasing in the penalty price") {
    for (int k = 0; k < dsm::testing::kSuiteBases; ++k) {
        CAPTURE(k);
        double prev = std::numeric_limits<double>::infinity();
        for (double pi : dsm::testing::kSuitePenalties) {
            const auto inst = small_instance(k, pi);
            const double w = weighted_shift(exhaustive_optimize(inst), inst.problem);
            CHECK(w <= prev + 1e-12);
            prev = w;
        }
    }
}

TEST_CASE("instance JSON file") {
    const auto inst = load_instance_json(dsm::testing::data_dir() / "instances" / "small_feeder.json");
    CHECK(inst.problem.grid.slot_count == 12);
    CHECK(inst.problem.penalty_usd_per_kwh == doctest::Approx(0.05));
    REQUIRE(inst.problem.network.has_value());
    CHECK(inst.problem.network->feeder.bus_count() == 4);

    const auto r = exhaustive_optimize(inst);
    const auto j = to_json(r, inst.problem);
    CHECK(j["cost"]["total_usd"].get<double>() == doctest::Approx(r.cost.total_usd));
    CHECK(j["schedule"].size() == 4);

    CHECK_THROWS_AS(parse_instance_json(nlohmann::json::parse("{\"slot_count\": 12}")), ParseError);
}

TEST_CASE("an original placement outside the window is one extra option") {
    auto inst = single(ApplianceClass::Uninterruptible, {1, 4}, 2, {6, 7});
    CHECK(inst.problem.keeps_original(inst.problem.appliances[0]));
    std::vector<OnSlots> seen;
    enumerate_feasible(inst, [&](const OnSlots& s) { seen.push_back(s); });
    CHECK(seen == std::vector<OnSlots>{{{1, 2}}, {{2, 3}}, {{3, 4}}, {{6, 7}}});

    inst.problem.use_effective_window = false;
    CHECK(enumerate_feasible(inst, [](const OnSlots&) {}) == 3);

    // an expensive original is left for a cheaper slot inside the window
    auto dear = single(ApplianceClass::Uninterruptible, {1, 4}, 2, {6, 7});
    dear.problem.price.usd_per_kwh = {0.08, 0.08, 0.04, 0.04, 0.08, 0.30, 0.30, 0.08};
    CHECK(exhaustive_optimize(dear).on_slots == OnSlots{{3, 4}});
}
