#include "doctest.h"

#include "dsm/constraints.hpp"
#include "dsm/costing.hpp"
#include "test_support.hpp"

#include <algorithm>
#include <limits>

using namespace dsm;

namespace {

std::size_t index_of(const Problem& p, int id) {
    for (std::size_t a = 0; a < p.appliances.size(); ++a)
        if (p.appliances[a].id == id) return a;
    throw std::logic_error("no such appliance");
}

void set_row(Schedule& s, std::size_t row, const std::vector<Slot>& slots) {
    for (Slot t = 1; t <= s.slot_count(); ++t) s.set(row, t, false);
    for (Slot t : slots) s.set(row, t, true);
}

} // namespace

TEST_CASE("check_duration") {
    const auto p = Problem::canonical(false);
    auto s = p.original();
    CHECK(check_duration(s, p.appliances).empty());

    const auto a = index_of(p, 11);
    auto extra = s.on_slots(a);
    set_row(s, a, extra);
    s.set(a, extra.back() + 1, true);
    CHECK(check_duration(s, p.appliances).size() == 1);

    set_row(s, a, {});
    REQUIRE(check_duration(s, p.appliances).size() == 1);
    CHECK(check_duration(s, p.appliances)[0].appliance_id == 11);
}

TEST_CASE("check_window") {
    const auto p = Problem::canonical(false);
    auto s = p.original();
    CHECK(check_window(s, p.appliances, true).empty());

    const auto a11 = index_of(p, 11);
    auto row = s.on_slots(a11);
    row.back() = 20;
    set_row(s, a11, row);
    const auto v = check_window(s, p.appliances, true);
    REQUIRE(v.size() == 1);
    CHECK(v[0].appliance_id == 11);

    auto t = p.original();
    set_row(t, index_of(p, 6), {24, 25, 26});
    CHECK(check_window(t, p.appliances, true).empty());
    CHECK_FALSE(check_window(t, p.appliances, false).empty());

    CHECK(check_window(Schedule(p.appliances.size(), 48), p.appliances, true).empty());
}

TEST_CASE("check_max_demand") {
    const auto p = Problem::canonical(false);
    const auto s = p.original();
    CHECK(check_max_demand(s, p.appliances, 12.4).empty());
    CHECK(check_max_demand(s, p.appliances, std::numeric_limits<double>::infinity()).empty());

    // 12.5 kW at one slot against 12.4
    std::vector<Appliance> one{p.appliances[0]};
    one[0].rated_kw = 12.5;
    Schedule single(1, 48);
    for (Slot t = 1; t <= 48; ++t) single.set(0, t, t == 30);
    const auto v = check_max_demand(single, one, 12.4);
    REQUIRE(v.size() == 1);
    CHECK(v[0].slot == 30);
    CHECK(v[0].demand_kw == doctest::Approx(12.5));

    // raising MD never adds violations
    std::size_t prev = check_max_demand(s, p.appliances, 2.0).size();
    for (double md = 2.5; md <= 13.0; md += 0.5) {
        const auto now = check_max_demand(s, p.appliances, md).size();
        CHECK(now <= prev);
        prev = now;
    }
}

TEST_CASE("check_contiguity") {
    const auto p = Problem::canonical(false);
    auto s = p.original();
    auto [cont, base] = check_contiguity(s, p.appliances);
    CHECK(cont.empty());
    CHECK(base.empty());

    const auto a8 = index_of(p, 8);
    set_row(s, a8, {30, 31});
    CHECK(check_contiguity(s, p.appliances).first.empty());
    set_row(s, a8, {30, 32});
    CHECK(check_contiguity(s, p.appliances).first.size() == 1);

    s.set(0, 17, false);
    CHECK(check_contiguity(s, p.appliances).second.size() == 1);
}

TEST_CASE("is_feasible") {
    const auto p = Problem::canonical(false);
    const Evaluator ev(p);
    const auto s = p.original();
    const auto r = is_feasible(s, ev);
    CHECK(r.feasible());
    CHECK(is_feasible(s, p).feasible());
    CHECK(is_feasible(s, Problem::canonical(true)).feasible());

    SUBCASE("stacking every interruptible appliance at one slot breaks MD") {
        auto stacked = s;
        for (std::size_t a = 0; a < p.appliances.size(); ++a) {
            if (p.appliances[a].cls != ApplianceClass::Interruptible) continue;
            stacked.set(a, 20, true);
        }
        const auto rep = is_feasible(stacked, ev);
        CHECK_FALSE(rep.feasible());
        CHECK(std::any_of(rep.max_demand.begin(), rep.max_demand.end(), [](auto& d) { return d.slot == 20; }));
    }
    SUBCASE("widened voltage band reports no voltage violations") {
        auto wide = p;
        wide.band = {0.0, std::numeric_limits<double>::infinity()};
        const Evaluator ev_wide(wide);
        CHECK(is_feasible(s, ev_wide).voltage.empty());
    }
    SUBCASE("overall flag is the conjunction of the lists") {
        auto bad = s;
        set_row(bad, index_of(p, 8), {30, 32});
        const auto rep = is_feasible(bad, ev);
        CHECK_FALSE(rep.feasible());
        CHECK(rep.contiguity.size() == 1);
        CHECK(rep.duration.empty());
        CHECK(rep.window.empty());
        const auto j = to_json(rep);
        CHECK_FALSE(j["feasible"].get<bool>());
    }
}
