#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "capadvisor/core.hpp"

namespace capadvisor {

struct ComponentStreams {
    PowerStream superchip;
    PowerStream cpu;
    PowerStream gpu;
};

/// Parsed power-trace file: sample streams plus the optional cap declared in
/// a leading "# cap_w=<watts>" comment.
struct PowerTraceFile {
    ComponentStreams streams;
    std::optional<int> declared_cap_w;
};

struct TimeSpan {
    std::int64_t begin_ns = 0;
    std::int64_t end_ns = 0;
};

/// One run of the application at one cap: raw streams plus task intervals.
struct RunRecord {
    std::string run_id;
    CapSetting cap;
    ComponentStreams samples;
    std::vector<TaskInterval> intervals;
    std::int64_t span_begin_ns = 0;
    std::int64_t span_end_ns = 0;

    TimeSpan span() const { return {span_begin_ns, span_end_ns}; }
};

struct TraceRef {
    CapSetting cap;
    int run_index = 0;
    std::filesystem::path power_file;
    std::filesystem::path interval_file;
};

struct ExperimentManifest {
    std::vector<CapSetting> caps;
    int runs_per_cap = 0;
    double sample_period_ms = 0.0;
    std::vector<TraceRef> traces;
};

// --- trace parsing / writing ---------------------------------------------

/// Power-trace CSV: header `timestamp_ns,component,power_w`, component in
/// {superchip,cpu,gpu}. Streams come back sorted; non-monotone timestamps,
/// unknown components and negative powers are rejected with line numbers.
PowerTraceFile parse_power_trace(std::istream& source);

/// Task-interval CSV: header `task,start_ns,end_ns`. run_id is stamped onto
/// every interval.
std::vector<TaskInterval> parse_task_intervals(std::istream& source, std::string_view run_id = {});

void write_power_trace(std::ostream& out, const ComponentStreams& streams,
                       std::optional<int> cap_w = std::nullopt);
void write_task_intervals(std::ostream& out, std::span<const TaskInterval> intervals);

// --- derivations ----------------------------------------------------------

/// GPU power as superchip minus CPU, with the CPU signal linearly
/// interpolated at each superchip timestamp and the result clamped at 0.
/// Emits one sample per superchip sample inside the CPU stream's range.
PowerStream derive_gpu_power(const PowerStream& superchip, const PowerStream& cpu);

/// Maximal gaps of `span` not covered by any interval, named "gpu compute
/// idle". Gaps shorter than min_gap_ns are dropped (default keeps them all).
std::vector<TaskInterval> derive_idle_intervals(std::span<const TaskInterval> intervals,
                                                TimeSpan span, std::int64_t min_gap_ns = 0);

/// Appends derived idle intervals to the run, stamped with its run_id.
void append_idle_intervals(RunRecord& run, std::int64_t min_gap_ns = 0);

/// Trapezoidal integral of power over [start, end] in joules, boundary powers
/// linearly interpolated between bracketing samples. The interval may overhang
/// the sampled range by at most one mean sample period on each side.
double integrate_energy(const PowerStream& stream, const TaskInterval& interval);

// --- aggregation ----------------------------------------------------------

struct TaskAggregate {
    std::string task;
    double total_runtime_s = 0.0;
    double total_energy_j = 0.0;
    std::int64_t call_count = 0;
};

/// Per-task totals over one run's intervals (idle intervals included if
/// previously appended). Tasks appear in first-interval order.
std::vector<TaskAggregate> aggregate_run(const RunRecord& run, const PowerStream& gpu);

/// Arithmetic mean of per-run totals at one cap. Tasks missing from some runs
/// contribute zero for those runs; call_count is the rounded mean; avg_power
/// is mean energy over mean runtime.
std::vector<TaskProfile> average_runs(std::span<const std::vector<TaskAggregate>> run_aggregates,
                                      CapSetting cap);

/// The run's GPU stream: explicit gpu samples if the trace carried them,
/// otherwise derived from superchip minus CPU.
PowerStream run_gpu_stream(const RunRecord& run);

/// Assembles the task x cap matrix over the union of task names across caps.
/// Tasks absent at some cap yield zero-filled cells (flagged by
/// validate_matrix); baseline is the manifest's highest cap.
ProfileMatrix build_matrix(const ExperimentManifest& manifest, std::span<const RunRecord> runs);

// --- manifest + run loading -----------------------------------------------

/// Manifest JSON: keys `caps`, `runs_per_cap`, `sample_period_ms`, `traces`
/// (array of {cap_w, run_index, power_file, interval_file}); relative file
/// paths are resolved against base_dir.
ExperimentManifest parse_manifest(std::istream& in, const std::filesystem::path& base_dir);
ExperimentManifest load_manifest(const std::filesystem::path& path);
std::string manifest_to_json(const ExperimentManifest& manifest,
                             const std::filesystem::path& base_dir);

/// Loads one (cap, run) trace pair, checks interval/span consistency and the
/// declared cap, and derives idle intervals.
RunRecord load_run(const TraceRef& ref);

/// Loads every run in the manifest, in parallel across (cap, run) pairs.
std::vector<RunRecord> load_experiment(const ExperimentManifest& manifest);

// --- matrix CSV -----------------------------------------------------------

/// Matrix CSV: header `task,cap_w,total_runtime_s,total_energy_j,call_count,
/// avg_power_w`. A `# baseline_cap_w=<watts>` comment preserves a non-default
/// baseline; without it the highest cap is the baseline.
void write_matrix_csv(std::ostream& out, const ProfileMatrix& matrix);
ProfileMatrix parse_matrix_csv(std::istream& in);

void save_matrix_csv(const std::filesystem::path& path, const ProfileMatrix& matrix);
ProfileMatrix load_matrix_csv(const std::filesystem::path& path);

}  // namespace capadvisor
