#include "dsm/profiles.hpp"

#include "csv_util.hpp"
#include "dsm/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <numeric>

namespace dsm {

namespace {

std::string fixed6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

void require_nonnegative(std::span<const double> values, const std::string& source, std::size_t column) {
    for (std::size_t i = 0; i < values.size(); ++i)
        if (values[i] < 0.0)
            throw ParseError(source, i + 2, column, "negative value " + fixed6(values[i]));
}

// Fraction of peak for a typical house, one value per half hour.
constexpr double kNeighborShape[48] = {
    0.30, 0.28, 0.27, 0.26, 0.25, 0.25, 0.25, 0.26, 0.27, 0.30, 0.35, 0.42, // 00:00-06:00
    0.55, 0.68, 0.78, 0.80, 0.75, 0.65,                                     // 06:00-09:00
    0.55, 0.50, 0.48, 0.46, 0.45, 0.45, 0.46, 0.47, 0.46, 0.45, 0.46, 0.48, // 09:00-15:00
    0.52, 0.58, 0.65, 0.75,                                                 // 15:00-17:00
    0.88, 0.96, 1.00, 0.98, 0.92, 0.85,                                     // 17:00-20:00
    0.78, 0.70, 0.62, 0.55, 0.48, 0.42, 0.36, 0.32,                         // 20:00-24:00
};

constexpr double kNeighborPeakKw = 5.6;

} // namespace

double PvSeries::total() const { return std::accumulate(kw.begin(), kw.end(), 0.0); }

std::vector<double> parse_series_csv(const std::string& text, int expected_length, const std::string& source) {
    auto lines = detail::read_lines(text);
    if (lines.empty()) throw ParseError(source, 0, 0, "empty series file");
    auto head = detail::split(lines.front().second, ',');
    if (head.size() != 2 || head[0] != "slot")
        throw ParseError(source, lines.front().first, 0, "expected header slot,value");

    std::vector<double> values;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto& [row, line] = lines[i];
        auto cells = detail::split(line, ',');
        if (cells.size() != 2) throw ParseError(source, row, 0, "expected 2 columns");
        int slot = 0;
        if (!detail::parse_int(cells[0], slot)) throw ParseError(source, row, 1, "not an integer: '" + cells[0] + "'");
        if (slot != static_cast<int>(values.size()) + 1)
            throw ParseError(source, row, 1, "slots must be consecutive from 1, found " + cells[0]);
        double v = 0.0;
        if (!detail::parse_double(cells[1], v) || !std::isfinite(v))
            throw ParseError(source, row, 2, "not a number: '" + cells[1] + "'");
        if (v < 0.0) throw ParseError(source, row, 2, "negative value " + cells[1]);
        values.push_back(v);
    }
    if (static_cast<int>(values.size()) != expected_length)
        throw ParseError(source, 0, 0,
                         "expected " + std::to_string(expected_length) + " rows, found " + std::to_string(values.size()));
    return values;
}

PriceSeries load_price_series(const std::filesystem::path& path, int expected_length) {
    PriceSeries p;
    p.usd_per_kwh = parse_series_csv(detail::read_file(path.string()), expected_length, path.string());
    p.label = path.filename().string();
    return p;
}

PvSeries load_pv_series(const std::filesystem::path& path, int expected_length, double capacity_kw) {
    PvSeries pv;
    pv.capacity_kw = capacity_kw;
    pv.kw = parse_series_csv(detail::read_file(path.string()), expected_length, path.string());
    for (std::size_t i = 0; i < pv.kw.size(); ++i)
        if (pv.kw[i] > capacity_kw + 1e-9)
            throw ParseError(path.string(), i + 2, 2, "PV output " + fixed6(pv.kw[i]) + " kW exceeds capacity " +
                                                          fixed6(capacity_kw) + " kW");
    return pv;
}

NeighborLoads load_neighbor_loads(const std::filesystem::path& path, int expected_length, double power_factor) {
    const std::string source = path.string();
    auto lines = detail::read_lines(detail::read_file(source));
    if (lines.empty()) throw ParseError(source, 0, 0, "empty neighbor load file");
    auto head = detail::split(lines.front().second, ',');
    if (head.size() < 2 || head[0] != "slot")
        throw ParseError(source, lines.front().first, 0, "expected header slot,house_1,...");

    NeighborLoads loads;
    loads.power_factor = power_factor;
    loads.house_kw.assign(head.size() - 1, {});
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto& [row, line] = lines[i];
        auto cells = detail::split(line, ',');
        if (cells.size() != head.size())
            throw ParseError(source, row, 0, "expected " + std::to_string(head.size()) + " columns");
        int slot = 0;
        if (!detail::parse_int(cells[0], slot) || slot != static_cast<int>(i))
            throw ParseError(source, row, 1, "slots must be consecutive from 1");
        for (std::size_t c = 1; c < cells.size(); ++c) {
            double v = 0.0;
            if (!detail::parse_double(cells[c], v) || !std::isfinite(v))
                throw ParseError(source, row, c + 1, "not a number: '" + cells[c] + "'");
            if (v < 0.0) throw ParseError(source, row, c + 1, "negative value " + cells[c]);
            loads.house_kw[c - 1].push_back(v);
        }
    }
    const auto rows = loads.house_kw.front().size();
    if (static_cast<int>(rows) != expected_length)
        throw ParseError(source, 0, 0,
                         "expected " + std::to_string(expected_length) + " rows, found " + std::to_string(rows));
    for (const auto& h : loads.house_kw) require_nonnegative(h, source, 0);
    return loads;
}

std::string write_series(std::span<const double> values) {
    std::string out = "slot,value\n";
    for (std::size_t i = 0; i < values.size(); ++i) out += std::to_string(i + 1) + "," + fixed6(values[i]) + "\n";
    return out;
}

std::string write_neighbor_loads(const NeighborLoads& loads) {
    std::string out = "slot";
    for (std::size_t h = 0; h < loads.house_count(); ++h) out += ",house_" + std::to_string(h + 1);
    out += "\n";
    const std::size_t rows = loads.house_kw.empty() ? 0 : loads.house_kw.front().size();
    for (std::size_t t = 0; t < rows; ++t) {
        out += std::to_string(t + 1);
        for (const auto& h : loads.house_kw) out += "," + fixed6(h[t]);
        out += "\n";
    }
    return out;
}

PvSeries synth_pv_profile(double capacity_kw, Slot sunrise, Slot sunset, std::span<const CloudDip> dips,
                          const TimeGrid& grid) {
    if (!(capacity_kw > 0.0)) throw Error("PV capacity must be positive");
    if (sunrise >= sunset) throw Error("sunrise slot must precede sunset slot");
    if (sunrise < 1 || sunset > grid.slot_count + 1) throw Error("daylight slots outside the grid");

    PvSeries pv;
    pv.capacity_kw = capacity_kw;
    pv.kw.assign(static_cast<std::size_t>(grid.slot_count), 0.0);
    const double span_slots = sunset - sunrise;
    for (Slot t = sunrise; t < sunset; ++t) {
        const double phase = (t - sunrise + 0.5) / span_slots;
        pv.kw[static_cast<std::size_t>(t - 1)] = capacity_kw * std::sin(std::numbers::pi * phase);
    }
    for (const auto& dip : dips) {
        if (dip.fraction < 0.0 || dip.fraction > 1.0) throw Error("cloud dip fraction must lie in [0, 1]");
        if (dip.slot < 1 || dip.slot > grid.slot_count) throw Error("cloud dip slot outside the grid");
        pv.kw[static_cast<std::size_t>(dip.slot - 1)] *= 1.0 - dip.fraction;
    }
    return pv;
}

PriceSeries canonical_price_profile(const TimeGrid& grid) {
    PriceSeries p;
    p.label = "canonical three-level tariff";
    p.usd_per_kwh.reserve(static_cast<std::size_t>(grid.slot_count));
    for (Slot t = 1; t <= grid.slot_count; ++t) {
        const double hour = std::fmod((t - 1) * grid.slot_hours, 24.0);
        double price = 0.08;
        if (hour < 6.0 || hour >= 22.0)
            price = 0.04;
        else if (hour >= 17.0 && hour < 20.0)
            price = 0.13;
        p.usd_per_kwh.push_back(price);
    }
    return p;
}

PvSeries canonical_pv_profile() {
    const CloudDip dips[] = {{21, 0.5}, {22, 0.25}, {31, 0.4}, {32, 0.2}};
    return synth_pv_profile(6.0, 14, 39, dips);
}

NeighborLoads canonical_neighbor_loads(std::size_t houses, double power_factor) {
    NeighborLoads loads;
    loads.power_factor = power_factor;
    std::vector<double> house;
    for (double f : kNeighborShape) house.push_back(std::round(f * kNeighborPeakKw * 1e6) / 1e6);
    loads.house_kw.assign(houses, house);
    return loads;
}

PvSeries zero_pv(const TimeGrid& grid) {
    PvSeries pv;
    pv.kw.assign(static_cast<std::size_t>(grid.slot_count), 0.0);
    return pv;
}

} // namespace dsm
