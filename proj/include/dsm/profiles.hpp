#pragma once

// Exogenous day-ahead series: electricity price, rooftop PV output and the
// loads of the other houses on the feeder.

#include "dsm/domain.hpp"

#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace dsm {

struct PriceSeries {
    std::vector<double> usd_per_kwh;
    std::string label;

    std::size_t size() const { return usd_per_kwh.size(); }
    double operator[](std::size_t i) const { return usd_per_kwh[i]; }
};

struct PvSeries {
    std::vector<double> kw;
    double capacity_kw = 0.0;

    std::size_t size() const { return kw.size(); }
    double operator[](std::size_t i) const { return kw[i]; }
    double total() const;
};

/// Per-house kW series for the non-smart houses, in feeder order.
struct NeighborLoads {
    std::vector<std::vector<double>> house_kw;
    double power_factor = 0.95;

    std::size_t house_count() const { return house_kw.size(); }
};

struct CloudDip {
    Slot slot = 1;
    double fraction = 0.0;
};

PriceSeries load_price_series(const std::filesystem::path& path, int expected_length);
PvSeries load_pv_series(const std::filesystem::path& path, int expected_length, double capacity_kw);
NeighborLoads load_neighbor_loads(const std::filesystem::path& path, int expected_length,
                                  double power_factor = 0.95);

/// Parses a `slot,value` CSV. Errors name the offending row and column.
std::vector<double> parse_series_csv(const std::string& text, int expected_length,
                                     const std::string& source = "<series>");

/// `slot,value` CSV with values at fixed 6-decimal precision.
std::string write_series(std::span<const double> values);
std::string write_neighbor_loads(const NeighborLoads& loads);

/// Half-sine bell over slots [sunrise, sunset) peaking at capacity, scaled by
/// (1 - fraction) at each dip slot, zero elsewhere.
PvSeries synth_pv_profile(double capacity_kw, Slot sunrise, Slot sunset, std::span<const CloudDip> dips,
                          const TimeGrid& grid = TimeGrid::canonical());

/// Three-level tariff: 0.04 $/kWh 00-06 and 22-24, 0.13 $/kWh 17-20,
/// 0.08 $/kWh otherwise. Slot levels follow each slot's start time.
PriceSeries canonical_price_profile(const TimeGrid& grid = TimeGrid::canonical());

/// 6 kW panel, daylight 06:30-19:00, with a late-morning and an
/// early-afternoon cloud dip (the deepest halves the output).
PvSeries canonical_pv_profile();

/// Twelve identical residential profiles with morning and evening peaks,
/// each peaking at 5.6 kW.
NeighborLoads canonical_neighbor_loads(std::size_t houses = 12, double power_factor = 0.95);

PvSeries zero_pv(const TimeGrid& grid);

} // namespace dsm
