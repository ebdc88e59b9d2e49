#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace capadvisor {

class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Malformed input data: trace rows, manifest fields, CLI values.
class ParseError : public Error {
  public:
    using Error::Error;
};

/// An operation was called outside its numeric domain.
class DomainError : public Error {
  public:
    using Error::Error;
};

/// A requested power cap cannot satisfy the CPU's demand.
class InfeasibleCapError : public Error {
  public:
    using Error::Error;
};

enum class Component { Superchip, Cpu, Gpu };

std::string_view component_label(Component component);
std::optional<Component> component_from_label(std::string_view label);

/// One timestamped power reading for one component. Timestamps are integer
/// nanoseconds from run start so interval arithmetic stays exact.
struct PowerSample {
    std::int64_t timestamp_ns = 0;
    Component component = Component::Superchip;
    double power_w = 0.0;
};

/// Samples of a single component, strictly increasing in timestamp.
using PowerStream = std::vector<PowerSample>;

/// One invocation of a named GPU task.
struct TaskInterval {
    std::string task;
    std::int64_t start_ns = 0;
    std::int64_t end_ns = 0;
    std::string run_id;
};

/// A superchip-level power limit in watts.
struct CapSetting {
    int watts = 0;

    friend auto operator<=>(const CapSetting&, const CapSetting&) = default;
};

/// Aggregated totals for one task at one cap, averaged over runs.
/// avg_power_w is stored rather than recomputed so third-party tables can be
/// round-tripped verbatim; consistency is a validation concern.
struct TaskProfile {
    std::string task;
    CapSetting cap;
    double total_runtime_s = 0.0;
    double total_energy_j = 0.0;
    std::int64_t call_count = 0;
    double avg_power_w = 0.0;
};

/// Both decision metrics evaluated for one (task, cap) cell.
struct MetricPoint {
    std::string task;
    CapSetting cap;
    double sed = 1.0;
    double n_energy = 0.0;
    double n_runtime = 0.0;
    double distance = 0.0;
};

/// Per-task chosen caps plus signed percent changes vs the baseline cell.
struct Recommendation {
    std::string task;
    CapSetting sed_cap;
    CapSetting ed_cap;
    double sed_energy_pct = 0.0;
    double sed_runtime_pct = 0.0;
    double ed_energy_pct = 0.0;
    double ed_runtime_pct = 0.0;
};

/// Relative tolerance for the stored avg_power vs energy/runtime check.
inline constexpr double kAvgPowerTolerance = 0.005;

/// Task name used for derived GPU-idle phases.
inline constexpr std::string_view kIdleTaskName = "gpu compute idle";

/// Task-by-cap grid of averaged profiles with a designated baseline cap.
/// Imported files can be incomplete, so cells may be absent; validate_matrix
/// reports those. Immutable after construction.
class ProfileMatrix {
  public:
    ProfileMatrix() = default;

    /// Dense construction, cells row-major by task. Every cell must carry the
    /// task/cap of its grid position.
    ProfileMatrix(std::vector<std::string> tasks, std::vector<CapSetting> caps,
                  std::vector<TaskProfile> cells, CapSetting baseline_cap);

    /// Builds from an unordered cell list. Task and cap order follow first
    /// appearance; duplicate (task, cap) pairs are rejected. Baseline defaults
    /// to the highest cap present.
    static ProfileMatrix from_cells(std::vector<TaskProfile> cells,
                                    std::optional<CapSetting> baseline = std::nullopt);

    std::span<const std::string> tasks() const { return tasks_; }
    std::span<const CapSetting> caps() const { return caps_; }
    CapSetting baseline_cap() const { return baseline_cap_; }

    std::size_t task_count() const { return tasks_.size(); }
    std::size_t cap_count() const { return caps_.size(); }

    std::optional<std::size_t> task_index(std::string_view task) const;
    std::optional<std::size_t> cap_index(CapSetting cap) const;
    std::optional<std::size_t> baseline_index() const { return cap_index(baseline_cap_); }

    bool has_cell(std::size_t task_idx, std::size_t cap_idx) const;
    const TaskProfile& cell(std::size_t task_idx, std::size_t cap_idx) const;
    const TaskProfile* find_cell(std::string_view task, CapSetting cap) const;

    /// Copy of this matrix with a different baseline cap (must be a member of
    /// caps()).
    ProfileMatrix with_baseline(CapSetting cap) const;

  private:
    std::vector<std::string> tasks_;
    std::vector<CapSetting> caps_;
    std::vector<TaskProfile> cells_;  // row-major: task_idx * cap_count + cap_idx
    std::vector<std::uint8_t> present_;
    CapSetting baseline_cap_;
};

struct Violation {
    enum class Severity { Error, Warning };

    Severity severity = Severity::Error;
    std::string task;  // empty when not cell-specific
    CapSetting cap;    // watts == 0 when not cell-specific
    std::string message;
};

struct ValidationReport {
    std::vector<Violation> violations;
    std::size_t missing_or_empty_cells = 0;

    bool ok() const { return error_count() == 0; }
    std::size_t error_count() const;
    std::size_t warning_count() const;
    /// True when every (task, cap) cell exists and carries nonzero data,
    /// i.e. the matrix is usable for metric computation.
    bool complete() const { return missing_or_empty_cells == 0; }
};

/// Checks every type invariant over the matrix. Violations are data, not
/// failures: invariant breaches are errors, empty/zero-filled cells are
/// warnings.
ValidationReport validate_matrix(const ProfileMatrix& matrix);

}  // namespace capadvisor
