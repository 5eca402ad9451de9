#pragma once

// Appliances, the day-ahead time grid, and on/off schedules.
//
// Slot numbers are 1-based throughout the public interface: slot 1 is the
// first half hour of the day. Schedule stores its matrix densely and exposes
// 1-based accessors.

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace dsm {

using Slot = int;

struct TimeGrid {
    int slot_count = 48;
    double slot_hours = 0.5;

    static TimeGrid canonical() { return {}; }

    double horizon_hours() const { return slot_count * slot_hours; }
    bool valid() const { return slot_count >= 1 && slot_hours > 0.0; }
};

enum class ApplianceClass { Baseline, Uninterruptible, Interruptible };

std::string to_string(ApplianceClass c);
ApplianceClass parse_appliance_class(const std::string& text);

struct SlotWindow {
    Slot start = 1;
    Slot end = 1;

    int length() const { return end - start + 1; }
    bool contains(Slot t) const { return t >= start && t <= end; }
    friend bool operator==(const SlotWindow&, const SlotWindow&) = default;
};

struct Appliance {
    int id = 0;
    ApplianceClass cls = ApplianceClass::Interruptible;
    SlotWindow window;
    int duration = 1;
    double rated_kw = 0.0;
    std::vector<Slot> original_on_slots;

    bool flexible() const { return cls != ApplianceClass::Baseline; }

    /// Declared window widened to also cover the original on-slots.
    SlotWindow effective_window() const;
};

class Schedule {
public:
    Schedule() = default;
    Schedule(std::size_t appliance_count, int slot_count);

    std::size_t appliance_count() const { return rows_; }
    int slot_count() const { return cols_; }

    bool on(std::size_t appliance, Slot t) const {
        return cells_[appliance * static_cast<std::size_t>(cols_) + static_cast<std::size_t>(t - 1)] != 0;
    }
    void set(std::size_t appliance, Slot t, bool value) {
        cells_[appliance * static_cast<std::size_t>(cols_) + static_cast<std::size_t>(t - 1)] = value ? 1 : 0;
    }

    int row_sum(std::size_t appliance) const;

    /// Ascending 1-based on-slots of one appliance row.
    std::vector<Slot> on_slots(std::size_t appliance) const;
    std::vector<std::vector<Slot>> all_on_slots() const;

    friend bool operator==(const Schedule&, const Schedule&) = default;

private:
    std::size_t rows_ = 0;
    int cols_ = 0;
    std::vector<std::uint8_t> cells_;
};

enum class IssueKind {
    BadWindow,
    BadDuration,
    NonPositivePower,
    OriginalLengthMismatch,
    OriginalNotAscending,
    OriginalOutOfGrid,
    OriginalOutsideWindow,
    BaselineNotFullDay,
    UninterruptibleNotContiguous,
    DuplicateId,
};

std::string to_string(IssueKind kind);

struct ValidationIssue {
    int appliance_id = 0;
    IssueKind kind = IssueKind::BadWindow;
    std::string message;
};

struct ValidationReport {
    std::vector<ValidationIssue> issues;
    /// One entry per appliance whose original slots leave the declared window.
    std::vector<std::pair<int, SlotWindow>> effective_windows;

    bool ok() const { return issues.empty(); }
    /// True when the only issues are original slots outside the window, which
    /// are tolerated by widening to the effective window.
    bool usable() const;
    std::vector<int> flagged_ids() const;
};

ValidationReport validate_appliance_set(std::span<const Appliance> appliances, const TimeGrid& grid);

/// Slot-wise aggregate appliance power Σ r_a·u_a(t) in kW.
std::vector<double> aggregate_power(const Schedule& schedule, std::span<const Appliance> appliances);

/// Builds the binary matrix from per-appliance on-slot lists. When
/// `appliances` is non-empty each list must match that appliance's duration.
Schedule schedule_from_on_slots(const std::vector<std::vector<Slot>>& on_slots, int slot_count,
                                std::span<const Appliance> appliances = {});

/// The "without DSM" schedule built from each appliance's original slots.
Schedule original_schedule(std::span<const Appliance> appliances, const TimeGrid& grid);

std::vector<Appliance> load_appliances_csv(const std::filesystem::path& path);
std::vector<Appliance> parse_appliances_csv(const std::string& text, const std::string& source = "<appliances>");

/// Parses a `;`-separated ascending slot list; `a-b` ranges are accepted.
std::vector<Slot> parse_slot_list(const std::string& text);
std::string format_slot_list(std::span<const Slot> slots);

/// On-slots schedule file: header `id,on_slots`, one row per appliance.
Schedule load_schedule_csv(const std::filesystem::path& path, std::span<const Appliance> appliances,
                           const TimeGrid& grid);
std::string format_schedule_csv(const Schedule& schedule, std::span<const Appliance> appliances);

} // namespace dsm
