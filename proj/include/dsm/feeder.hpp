#pragma once

// Radial distribution feeder and a backward/forward sweep AC power flow.
//
// All impedances are per-unit on (base_kva, base_kv). Injections are given in
// kW / kvar and converted internally. Bus 0 is the slack (substation) bus.

#include "dsm/domain.hpp"
#include "dsm/profiles.hpp"

#include <complex>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace dsm {

struct Line {
    int from = 0;
    int to = 0;
    double r_pu = 0.0;
    double x_pu = 0.0;
};

class FeederModel {
public:
    /// Validates that the lines form a tree rooted at bus 0 that spans every
    /// bus; throws TopologyError otherwise.
    FeederModel(double base_kva, double base_kv, double slack_voltage_pu, std::vector<Line> lines,
                int smart_home_bus);

    /// Slack plus a chain of equal segments with the smart home at the end.
    static FeederModel chain(int house_buses, double r_pu, double x_pu, double base_kva = 100.0,
                             double base_kv = 12.47, double slack_voltage_pu = 1.0);

    /// 13 house buses (12 neighbours, smart home last) on a 100 kVA base.
    static FeederModel canonical();

    double base_kva() const { return base_kva_; }
    double base_kv() const { return base_kv_; }
    double slack_voltage_pu() const { return slack_voltage_; }
    int smart_home_bus() const { return smart_home_bus_; }
    int bus_count() const { return static_cast<int>(parent_.size()); }
    const std::vector<Line>& lines() const { return lines_; }

    int parent(int bus) const { return parent_[static_cast<std::size_t>(bus)]; }
    int depth(int bus) const { return depth_[static_cast<std::size_t>(bus)]; }
    /// Buses in breadth-first order from the slack.
    const std::vector<int>& order() const { return order_; }
    /// Impedance of the line feeding `bus` from its parent.
    std::complex<double> upstream_impedance(int bus) const { return z_[static_cast<std::size_t>(bus)]; }
    /// Buses on the path from the slack (exclusive) to `bus` (inclusive).
    std::vector<int> path_to(int bus) const;
    /// Non-slack buses other than the smart home, ascending.
    std::vector<int> neighbor_buses() const;

private:
    double base_kva_;
    double base_kv_;
    double slack_voltage_;
    std::vector<Line> lines_;
    int smart_home_bus_;
    std::vector<int> parent_;
    std::vector<int> depth_;
    std::vector<int> order_;
    std::vector<std::complex<double>> z_;
};

FeederModel load_feeder_json(const std::filesystem::path& path);
FeederModel parse_feeder_json(const std::string& text, const std::string& source = "<feeder>");
std::string feeder_to_json(const FeederModel& feeder);

struct SlotInjections {
    std::vector<double> p_kw;   // demand per bus, index 0 unused
    std::vector<double> q_kvar;
    double pv_kw = 0.0;         // generation at the smart-home bus
};

struct PowerFlowOptions {
    double tol = 1e-10;
    int max_iter = 50;
};

struct BusState {
    std::vector<std::complex<double>> voltage; // per unit
    double loss_kw = 0.0;
    std::complex<double> slack_power_kva{};    // power delivered by the substation
    int iterations = 0;
    int slot = 0;

    double magnitude(int bus) const { return std::abs(voltage[static_cast<std::size_t>(bus)]); }
    double angle(int bus) const { return std::arg(voltage[static_cast<std::size_t>(bus)]); }
};

BusState solve_power_flow(const FeederModel& feeder, const SlotInjections& inj, PowerFlowOptions opts = {});

/// Total I²R loss of a solved state in kW.
double feeder_loss(const BusState& state);

/// Loss with the smart home's net load minus loss with it removed, floored at 0.
double incremental_home_loss(const FeederModel& feeder, const SlotInjections& inj, PowerFlowOptions opts = {});

struct VoltageViolation {
    int slot = 0;
    int bus = 0;
    double magnitude = 0.0;
};

/// Every (slot, bus) whose magnitude leaves [v_min, v_max]; slack excluded.
std::vector<VoltageViolation> voltage_band_check(std::span<const BusState> states, double v_min, double v_max);

/// The feeder together with the exogenous neighbour demand.
struct Network {
    FeederModel feeder;
    NeighborLoads neighbors;
    PowerFlowOptions options;

    Network(FeederModel f, NeighborLoads n, PowerFlowOptions o = {});

    /// Injections at `slot` (1-based) for a smart home drawing `home_kw` gross
    /// appliance power with `pv_kw` of local generation. Reactive demand
    /// follows the neighbour power factor; PV runs at unity power factor.
    SlotInjections injections(Slot slot, double home_kw, double pv_kw) const;

private:
    std::vector<int> neighbor_bus_;
    double q_ratio_;
};

} // namespace dsm
