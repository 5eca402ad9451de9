#include "dsm/domain.hpp"

#include "csv_util.hpp"
#include "dsm/error.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace dsm {

namespace detail {

std::vector<std::pair<std::size_t, std::string>> read_lines(const std::string& text) {
    std::vector<std::pair<std::size_t, std::string>> lines;
    std::istringstream in(text);
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        auto t = trim(line);
        if (!t.empty()) lines.emplace_back(n, std::move(t));
    }
    return lines;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

bool parse_double(const std::string& s, double& out) {
    if (s.empty()) return false;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    if (*first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc() && ptr == last;
}

bool parse_int(const std::string& s, int& out) {
    if (s.empty()) return false;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && ptr == s.data() + s.size();
}

} // namespace detail

std::string to_string(ApplianceClass c) {
    switch (c) {
    case ApplianceClass::Baseline: return "baseline";
    case ApplianceClass::Uninterruptible: return "uninterruptible";
    case ApplianceClass::Interruptible: return "interruptible";
    }
    return "?";
}

ApplianceClass parse_appliance_class(const std::string& text) {
    std::string lower;
    for (char ch : text) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
    if (lower == "baseline" || lower == "inflexible") return ApplianceClass::Baseline;
    if (lower == "uninterruptible") return ApplianceClass::Uninterruptible;
    if (lower == "interruptible") return ApplianceClass::Interruptible;
    throw Error("unknown appliance class '" + text + "'");
}

SlotWindow Appliance::effective_window() const {
    SlotWindow w = window;
    for (Slot t : original_on_slots) {
        w.start = std::min(w.start, t);
        w.end = std::max(w.end, t);
    }
    return w;
}

Schedule::Schedule(std::size_t appliance_count, int slot_count)
    : rows_(appliance_count), cols_(slot_count),
      cells_(appliance_count * static_cast<std::size_t>(slot_count), 0) {}

int Schedule::row_sum(std::size_t appliance) const {
    auto first = cells_.begin() + static_cast<std::ptrdiff_t>(appliance * static_cast<std::size_t>(cols_));
    return static_cast<int>(std::count(first, first + cols_, std::uint8_t{1}));
}

std::vector<Slot> Schedule::on_slots(std::size_t appliance) const {
    std::vector<Slot> out;
    for (Slot t = 1; t <= cols_; ++t)
        if (on(appliance, t)) out.push_back(t);
    return out;
}

std::vector<std::vector<Slot>> Schedule::all_on_slots() const {
    std::vector<std::vector<Slot>> out;
    out.reserve(rows_);
    for (std::size_t a = 0; a < rows_; ++a) out.push_back(on_slots(a));
    return out;
}

std::string to_string(IssueKind kind) {
    switch (kind) {
    case IssueKind::BadWindow: return "bad_window";
    case IssueKind::BadDuration: return "bad_duration";
    case IssueKind::NonPositivePower: return "non_positive_power";
    case IssueKind::OriginalLengthMismatch: return "original_length_mismatch";
    case IssueKind::OriginalNotAscending: return "original_not_ascending";
    case IssueKind::OriginalOutOfGrid: return "original_out_of_grid";
    case IssueKind::OriginalOutsideWindow: return "original_outside_window";
    case IssueKind::BaselineNotFullDay: return "baseline_not_full_day";
    case IssueKind::UninterruptibleNotContiguous: return "uninterruptible_not_contiguous";
    case IssueKind::DuplicateId: return "duplicate_id";
    }
    return "?";
}

bool ValidationReport::usable() const {
    return std::all_of(issues.begin(), issues.end(),
                       [](const ValidationIssue& i) { return i.kind == IssueKind::OriginalOutsideWindow; });
}

std::vector<int> ValidationReport::flagged_ids() const {
    std::set<int> ids;
    for (const auto& i : issues) ids.insert(i.appliance_id);
    return {ids.begin(), ids.end()};
}

ValidationReport validate_appliance_set(std::span<const Appliance> appliances, const TimeGrid& grid) {
    ValidationReport report;
    std::set<int> seen;
    const int T = grid.slot_count;
    auto add = [&](const Appliance& a, IssueKind kind, std::string msg) {
        report.issues.push_back({a.id, kind, "appliance " + std::to_string(a.id) + ": " + std::move(msg)});
    };

    for (const auto& a : appliances) {
        if (!seen.insert(a.id).second) add(a, IssueKind::DuplicateId, "duplicate id");

        const bool window_ok = a.window.start >= 1 && a.window.start <= a.window.end && a.window.end <= T;
        if (!window_ok)
            add(a, IssueKind::BadWindow,
                "window " + std::to_string(a.window.start) + "-" + std::to_string(a.window.end) +
                    " not within 1-" + std::to_string(T));
        if (a.duration < 1 || (window_ok && a.duration > a.window.length()))
            add(a, IssueKind::BadDuration, "duration " + std::to_string(a.duration) + " does not fit the window");
        if (!(a.rated_kw > 0.0)) add(a, IssueKind::NonPositivePower, "rated power must be positive");

        if (a.cls == ApplianceClass::Baseline && (a.duration != T || a.window.start != 1 || a.window.end != T))
            add(a, IssueKind::BaselineNotFullDay, "baseline appliances run every slot of the day");

        const auto& orig = a.original_on_slots;
        if (static_cast<int>(orig.size()) != a.duration)
            add(a, IssueKind::OriginalLengthMismatch,
                "original schedule has " + std::to_string(orig.size()) + " slots, duration is " +
                    std::to_string(a.duration));
        if (!std::is_sorted(orig.begin(), orig.end()) ||
            std::adjacent_find(orig.begin(), orig.end()) != orig.end())
            add(a, IssueKind::OriginalNotAscending, "original slots must be strictly ascending");
        if (std::any_of(orig.begin(), orig.end(), [&](Slot t) { return t < 1 || t > T; })) {
            add(a, IssueKind::OriginalOutOfGrid, "original slot outside 1-" + std::to_string(T));
        } else if (window_ok &&
                   std::any_of(orig.begin(), orig.end(), [&](Slot t) { return !a.window.contains(t); })) {
            const auto eff = a.effective_window();
            add(a, IssueKind::OriginalOutsideWindow,
                "original schedule outside window; effective window " + std::to_string(eff.start) + "-" +
                    std::to_string(eff.end));
            report.effective_windows.emplace_back(a.id, eff);
        }
        if (a.cls == ApplianceClass::Uninterruptible && !orig.empty() &&
            orig.back() - orig.front() + 1 != static_cast<int>(orig.size()))
            add(a, IssueKind::UninterruptibleNotContiguous, "original slots of an uninterruptible appliance are not contiguous");
    }
    return report;
}

std::vector<double> aggregate_power(const Schedule& schedule, std::span<const Appliance> appliances) {
    if (schedule.appliance_count() != appliances.size())
        throw DimensionError("schedule has " + std::to_string(schedule.appliance_count()) + " rows but " +
                             std::to_string(appliances.size()) + " appliances were given");
    std::vector<double> power(static_cast<std::size_t>(schedule.slot_count()), 0.0);
    for (std::size_t a = 0; a < appliances.size(); ++a)
        for (Slot t = 1; t <= schedule.slot_count(); ++t)
            if (schedule.on(a, t)) power[static_cast<std::size_t>(t - 1)] += appliances[a].rated_kw;
    return power;
}

Schedule schedule_from_on_slots(const std::vector<std::vector<Slot>>& on_slots, int slot_count,
                                std::span<const Appliance> appliances) {
    if (!appliances.empty() && appliances.size() != on_slots.size())
        throw DimensionError("on-slot lists do not match appliance count");
    Schedule s(on_slots.size(), slot_count);
    for (std::size_t a = 0; a < on_slots.size(); ++a) {
        const auto& row = on_slots[a];
        if (!appliances.empty() && static_cast<int>(row.size()) != appliances[a].duration)
            throw DimensionError("appliance " + std::to_string(appliances[a].id) + ": " +
                                 std::to_string(row.size()) + " on-slots given, duration is " +
                                 std::to_string(appliances[a].duration));
        for (Slot t : row) {
            if (t < 1 || t > slot_count)
                throw Error("slot " + std::to_string(t) + " out of range 1-" + std::to_string(slot_count));
            if (s.on(a, t)) throw Error("duplicate slot " + std::to_string(t) + " in row " + std::to_string(a + 1));
            s.set(a, t, true);
        }
    }
    return s;
}

Schedule original_schedule(std::span<const Appliance> appliances, const TimeGrid& grid) {
    std::vector<std::vector<Slot>> rows;
    rows.reserve(appliances.size());
    for (const auto& a : appliances) rows.push_back(a.original_on_slots);
    return schedule_from_on_slots(rows, grid.slot_count, appliances);
}

std::vector<Slot> parse_slot_list(const std::string& text) {
    std::vector<Slot> out;
    if (detail::trim(text).empty()) return out;
    for (const auto& item : detail::split(text, ';')) {
        auto dash = item.find('-');
        if (dash != std::string::npos && dash > 0) {
            int lo = 0;
            int hi = 0;
            if (!detail::parse_int(detail::trim(item.substr(0, dash)), lo) ||
                !detail::parse_int(detail::trim(item.substr(dash + 1)), hi) || hi < lo)
                throw Error("bad slot range '" + item + "'");
            for (int t = lo; t <= hi; ++t) out.push_back(t);
        } else {
            int t = 0;
            if (!detail::parse_int(item, t)) throw Error("bad slot '" + item + "'");
            out.push_back(t);
        }
    }
    return out;
}

std::string format_slot_list(std::span<const Slot> slots) {
    std::string out;
    for (std::size_t i = 0; i < slots.size(); ++i) {
        if (i) out += ';';
        out += std::to_string(slots[i]);
    }
    return out;
}

std::vector<Appliance> parse_appliances_csv(const std::string& text, const std::string& source) {
    static const std::vector<std::string> header = {"id", "class", "window_start", "window_end",
                                                    "duration", "rated_kw", "original_slots"};
    auto lines = detail::read_lines(text);
    if (lines.empty()) throw ParseError(source, 0, 0, "empty appliance file");
    if (detail::split(lines.front().second, ',') != header)
        throw ParseError(source, lines.front().first, 0,
                         "expected header id,class,window_start,window_end,duration,rated_kw,original_slots");

    std::vector<Appliance> out;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto& [row, line] = lines[i];
        auto cells = detail::split(line, ',');
        if (cells.size() != header.size())
            throw ParseError(source, row, 0, "expected 7 columns, found " + std::to_string(cells.size()));
        Appliance a;
        auto int_cell = [&](std::size_t col, int& dst) {
            if (!detail::parse_int(cells[col], dst))
                throw ParseError(source, row, col + 1, "not an integer: '" + cells[col] + "'");
        };
        int_cell(0, a.id);
        try {
            a.cls = parse_appliance_class(cells[1]);
        } catch (const Error& e) {
            throw ParseError(source, row, 2, e.what());
        }
        int_cell(2, a.window.start);
        int_cell(3, a.window.end);
        int_cell(4, a.duration);
        if (!detail::parse_double(cells[5], a.rated_kw))
            throw ParseError(source, row, 6, "not a number: '" + cells[5] + "'");
        try {
            a.original_on_slots = parse_slot_list(cells[6]);
        } catch (const Error& e) {
            throw ParseError(source, row, 7, e.what());
        }
        out.push_back(std::move(a));
    }
    if (out.empty()) throw ParseError(source, 0, 0, "no appliances");
    return out;
}

std::vector<Appliance> load_appliances_csv(const std::filesystem::path& path) {
    return parse_appliances_csv(detail::read_file(path.string()), path.string());
}

Schedule load_schedule_csv(const std::filesystem::path& path, std::span<const Appliance> appliances,
                           const TimeGrid& grid) {
    const std::string source = path.string();
    auto lines = detail::read_lines(detail::read_file(source));
    if (lines.empty() || detail::split(lines.front().second, ',') != std::vector<std::string>{"id", "on_slots"})
        throw ParseError(source, lines.empty() ? 0 : lines.front().first, 0, "expected header id,on_slots");

    std::map<int, std::size_t> index;
    for (std::size_t a = 0; a < appliances.size(); ++a) index[appliances[a].id] = a;

    std::vector<std::vector<Slot>> rows(appliances.size());
    std::vector<bool> given(appliances.size(), false);
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto& [row, line] = lines[i];
        auto cells = detail::split(line, ',');
        if (cells.size() != 2) throw ParseError(source, row, 0, "expected 2 columns");
        int id = 0;
        if (!detail::parse_int(cells[0], id)) throw ParseError(source, row, 1, "not an integer: '" + cells[0] + "'");
        auto it = index.find(id);
        if (it == index.end()) throw ParseError(source, row, 1, "unknown appliance id " + std::to_string(id));
        if (given[it->second]) throw ParseError(source, row, 1, "appliance listed twice");
        try {
            rows[it->second] = parse_slot_list(cells[1]);
        } catch (const Error& e) {
            throw ParseError(source, row, 2, e.what());
        }
        given[it->second] = true;
    }
    for (std::size_t a = 0; a < appliances.size(); ++a) {
        if (given[a]) continue;
        if (appliances[a].cls != ApplianceClass::Baseline)
            throw ParseError(source, 0, 0, "missing row for appliance " + std::to_string(appliances[a].id));
        rows[a] = appliances[a].original_on_slots;
    }
    try {
        return schedule_from_on_slots(rows, grid.slot_count, appliances);
    } catch (const ParseError&) {
        throw;
    } catch (const Error& e) {
        throw ParseError(source, 0, 0, e.what());
    }
}

std::string format_schedule_csv(const Schedule& schedule, std::span<const Appliance> appliances) {
    std::string out = "id,on_slots\n";
    for (std::size_t a = 0; a < appliances.size(); ++a) {
        const auto slots = schedule.on_slots(a);
        out += std::to_string(appliances[a].id) + "," + format_slot_list(slots) + "\n";
    }
    return out;
}

} // namespace dsm
