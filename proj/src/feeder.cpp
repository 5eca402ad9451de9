#include "dsm/feeder.hpp"

#include "csv_util.hpp"
#include "dsm/error.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

namespace dsm {

namespace {

// Canonical segment impedance, per unit on 100 kVA / 12.47 kV.
constexpr double kCanonicalR = 0.006;
constexpr double kCanonicalX = 0.00375;

} // namespace

FeederModel::FeederModel(double base_kva, double base_kv, double slack_voltage_pu, std::vector<Line> lines,
                         int smart_home_bus)
    : base_kva_(base_kva), base_kv_(base_kv), slack_voltage_(slack_voltage_pu), lines_(std::move(lines)),
      smart_home_bus_(smart_home_bus) {
    if (!(base_kva_ > 0.0) || !(base_kv_ > 0.0)) throw TopologyError("feeder base values must be positive");
    if (!(slack_voltage_ > 0.0)) throw TopologyError("slack voltage must be positive");
    if (lines_.empty()) throw TopologyError("feeder has no lines");

    const int buses = static_cast<int>(lines_.size()) + 1;
    parent_.assign(static_cast<std::size_t>(buses), -1);
    z_.assign(static_cast<std::size_t>(buses), {});
    std::vector<std::vector<int>> children(static_cast<std::size_t>(buses));
    for (const auto& l : lines_) {
        if (l.from < 0 || l.from >= buses || l.to < 0 || l.to >= buses || l.from == l.to)
            throw TopologyError("line " + std::to_string(l.from) + "-" + std::to_string(l.to) +
                                " references an unknown bus (a radial feeder with n lines has buses 0..n)");
        if (l.r_pu < 0.0 || l.x_pu < 0.0) throw TopologyError("line impedances must be non-negative");
        if (l.to == 0 || parent_[static_cast<std::size_t>(l.to)] != -1)
            throw TopologyError("bus " + std::to_string(l.to) + " is fed by more than one line; feeder is not radial");
        parent_[static_cast<std::size_t>(l.to)] = l.from;
        z_[static_cast<std::size_t>(l.to)] = {l.r_pu, l.x_pu};
        children[static_cast<std::size_t>(l.from)].push_back(l.to);
    }

    depth_.assign(static_cast<std::size_t>(buses), -1);
    depth_[0] = 0;
    std::deque<int> queue{0};
    while (!queue.empty()) {
        int b = queue.front();
        queue.pop_front();
        order_.push_back(b);
        for (int c : children[static_cast<std::size_t>(b)]) {
            depth_[static_cast<std::size_t>(c)] = depth_[static_cast<std::size_t>(b)] + 1;
            queue.push_back(c);
        }
    }
    if (static_cast<int>(order_.size()) != buses)
        throw TopologyError("feeder is not connected to the slack bus or contains a loop");

    if (smart_home_bus_ < 1 || smart_home_bus_ >= buses) throw TopologyError("smart home bus is not a load bus");
    if (depth_[static_cast<std::size_t>(smart_home_bus_)] != *std::max_element(depth_.begin(), depth_.end()))
        throw TopologyError("smart home bus must be at the end of the feeder");
}

FeederModel FeederModel::chain(int house_buses, double r_pu, double x_pu, double base_kva, double base_kv,
                               double slack_voltage_pu) {
    std::vector<Line> lines;
    for (int b = 1; b <= house_buses; ++b) lines.push_back({b - 1, b, r_pu, x_pu});
    return FeederModel(base_kva, base_kv, slack_voltage_pu, std::move(lines), house_buses);
}

FeederModel FeederModel::canonical() { return chain(13, kCanonicalR, kCanonicalX); }

std::vector<int> FeederModel::path_to(int bus) const {
    std::vector<int> path;
    for (int b = bus; b != 0; b = parent(b)) path.push_back(b);
    std::reverse(path.begin(), path.end());
    return path;
}

std::vector<int> FeederModel::neighbor_buses() const {
    std::vector<int> out;
    for (int b = 1; b < bus_count(); ++b)
        if (b != smart_home_bus_) out.push_back(b);
    return out;
}

FeederModel parse_feeder_json(const std::string& text, const std::string& source) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
        std::vector<Line> lines;
        for (const auto& l : j.at("lines"))
            lines.push_back({l.at("from").get<int>(), l.at("to").get<int>(), l.at("r_pu").get<double>(),
                             l.at("x_pu").get<double>()});
        return FeederModel(j.at("base_kva").get<double>(), j.at("base_kv").get<double>(),
                           j.value("slack_voltage_pu", 1.0), std::move(lines), j.at("smart_home_bus").get<int>());
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(source, 0, 0, e.what());
    }
}

FeederModel load_feeder_json(const std::filesystem::path& path) {
    return parse_feeder_json(detail::read_file(path.string()), path.string());
}

std::string feeder_to_json(const FeederModel& feeder) {
    nlohmann::ordered_json j;
    j["base_kva"] = feeder.base_kva();
    j["base_kv"] = feeder.base_kv();
    j["slack_voltage_pu"] = feeder.slack_voltage_pu();
    j["smart_home_bus"] = feeder.smart_home_bus();
    j["lines"] = nlohmann::ordered_json::array();
    for (const auto& l : feeder.lines())
        j["lines"].push_back({{"from", l.from}, {"to", l.to}, {"r_pu", l.r_pu}, {"x_pu", l.x_pu}});
    return j.dump(2) + "\n";
}

BusState solve_power_flow(const FeederModel& feeder, const SlotInjections& inj, PowerFlowOptions opts) {
    if (!(opts.tol > 0.0)) throw Error("power-flow tolerance must be positive");
    const auto n = static_cast<std::size_t>(feeder.bus_count());
    if (inj.p_kw.size() != n || inj.q_kvar.size() != n)
        throw DimensionError("injection vectors do not match the feeder bus count");

    const double base = feeder.base_kva();
    std::vector<std::complex<double>> load(n);
    for (std::size_t b = 1; b < n; ++b) load[b] = {inj.p_kw[b] / base, inj.q_kvar[b] / base};
    load[static_cast<std::size_t>(feeder.smart_home_bus())] -= inj.pv_kw / base;

    const auto& order = feeder.order();
    const std::complex<double> slack{feeder.slack_voltage_pu(), 0.0};
    BusState st;
    st.voltage.assign(n, slack);
    std::vector<std::complex<double>> current(n);

    auto backward = [&] {
        for (std::size_t b = 1; b < n; ++b) current[b] = std::conj(load[b] / st.voltage[b]);
        for (auto it = order.rbegin(); it != order.rend(); ++it) {
            const int b = *it;
            if (b == 0) continue;
            const int p = feeder.parent(b);
            if (p != 0) current[static_cast<std::size_t>(p)] += current[static_cast<std::size_t>(b)];
        }
    };

    bool converged = false;
    for (int iter = 1; iter <= opts.max_iter; ++iter) {
        backward();
        double change = 0.0;
        for (int b : order) {
            if (b == 0) continue;
            const auto ub = static_cast<std::size_t>(b);
            const auto v = st.voltage[static_cast<std::size_t>(feeder.parent(b))] -
                           feeder.upstream_impedance(b) * current[ub];
            change = std::max(change, std::abs(v - st.voltage[ub]));
            st.voltage[ub] = v;
        }
        st.iterations = iter;
        if (!std::isfinite(change)) break;
        if (change < opts.tol) {
            converged = true;
            break;
        }
    }
    if (!converged)
        throw ConvergenceError("power flow did not converge within " + std::to_string(opts.max_iter) + " iterations");

    backward();
    double loss = 0.0;
    std::complex<double> from_slack{};
    for (std::size_t b = 1; b < n; ++b) {
        loss += std::norm(current[b]) * feeder.upstream_impedance(static_cast<int>(b)).real();
        if (feeder.parent(static_cast<int>(b)) == 0) from_slack += current[b];
    }
    st.loss_kw = loss * base;
    st.slack_power_kva = st.voltage[0] * std::conj(from_slack) * base;
    return st;
}

double feeder_loss(const BusState& state) { return state.loss_kw; }

double incremental_home_loss(const FeederModel& feeder, const SlotInjections& inj, PowerFlowOptions opts) {
    const double with_home = feeder_loss(solve_power_flow(feeder, inj, opts));
    SlotInjections without = inj;
    const auto home = static_cast<std::size_t>(feeder.smart_home_bus());
    without.p_kw[home] = 0.0;
    without.q_kvar[home] = 0.0;
    without.pv_kw = 0.0;
    const double baseline = feeder_loss(solve_power_flow(feeder, without, opts));
    return std::max(with_home - baseline, 0.0);
}

std::vector<VoltageViolation> voltage_band_check(std::span<const BusState> states, double v_min, double v_max) {
    std::vector<VoltageViolation> out;
    for (const auto& st : states)
        for (int b = 1; b < static_cast<int>(st.voltage.size()); ++b) {
            const double m = st.magnitude(b);
            if (m < v_min || m > v_max) out.push_back({st.slot, b, m});
        }
    return out;
}

Network::Network(FeederModel f, NeighborLoads n, PowerFlowOptions o)
    : feeder(std::move(f)), neighbors(std::move(n)), options(o), neighbor_bus_(feeder.neighbor_buses()) {
    if (neighbors.house_count() != neighbor_bus_.size())
        throw DimensionError("feeder has " + std::to_string(neighbor_bus_.size()) + " neighbour buses but " +
                             std::to_string(neighbors.house_count()) + " neighbour load series were given");
    const double pf = neighbors.power_factor;
    if (!(pf > 0.0 && pf <= 1.0)) throw Error("power factor must lie in (0, 1]");
    q_ratio_ = std::sqrt(1.0 - pf * pf) / pf;
}

SlotInjections Network::injections(Slot slot, double home_kw, double pv_kw) const {
    const auto n = static_cast<std::size_t>(feeder.bus_count());
    SlotInjections inj;
    inj.p_kw.assign(n, 0.0);
    inj.q_kvar.assign(n, 0.0);
    const auto t = static_cast<std::size_t>(slot - 1);
    for (std::size_t h = 0; h < neighbor_bus_.size(); ++h) {
        const auto b = static_cast<std::size_t>(neighbor_bus_[h]);
        inj.p_kw[b] = neighbors.house_kw[h].at(t);
        inj.q_kvar[b] = inj.p_kw[b] * q_ratio_;
    }
    const auto home = static_cast<std::size_t>(feeder.smart_home_bus());
    inj.p_kw[home] = home_kw;
    inj.q_kvar[home] = home_kw * q_ratio_;
    inj.pv_kw = pv_kw;
    return inj;
}

} // namespace dsm
