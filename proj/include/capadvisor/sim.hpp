#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "capadvisor/core.hpp"
#include "capadvisor/ingest.hpp"

namespace capadvisor {

/// One synthetic GPU task. compute_intensity 1 means fully compute-bound
/// (runtime scales as 1/f under throttling), 0 means fully memory-bound
/// (runtime unaffected by clocks).
struct TaskSpec {
    std::string name;
    double base_runtime_s = 0.0;  // per invocation at full clock
    double compute_intensity = 1.0;
    double peak_power_w = 0.0;  // GPU draw at full clock
    int invocations = 1;
    std::int64_t gap_ns = 0;  // idle gap after each invocation
};

/// CPU-first power-steering chip model. The CPU draws cpu_power_w while the
/// GPU computes and cpu_burst_power_w during GPU-idle phases; the GPU gets
/// whatever the cap leaves over, enforced through DVFS with power scaling as
/// f^alpha above the idle floor.
struct ChipSpec {
    double gpu_idle_power_w = 0.0;
    double cpu_power_w = 0.0;
    double cpu_burst_power_w = 0.0;
    double alpha = 2.5;
    double min_frequency_ratio = 0.1;
};

struct WorkloadSpec {
    ChipSpec chip;
    std::vector<TaskSpec> tasks;
};

/// Workload JSON: a `chip` block (gpu_idle_power_w, cpu_power_w,
/// cpu_burst_power_w, alpha, min_frequency_ratio) and a `tasks` array (name,
/// base_runtime_s, compute_intensity, peak_power_w, invocations, gap_ns).
WorkloadSpec parse_workload(std::istream& in);
WorkloadSpec load_workload(const std::filesystem::path& path);

/// GPU clock ratio the steering settles on under `cap`: 1 when the leftover
/// budget covers the task's peak draw, otherwise the power model's inverse,
/// clamped to [min_frequency_ratio, 1]. Throws InfeasibleCapError when the
/// cap cannot cover the CPU demand.
double effective_frequency(double cap_w, const ChipSpec& chip, const TaskSpec& task);

/// GPU power at clock ratio f: idle + (peak - idle) * f^alpha.
double model_power(double frequency_ratio, const ChipSpec& chip, const TaskSpec& task);

/// Invocation runtime at clock ratio f: base * (c/f + (1 - c)).
double model_runtime(double base_runtime_s, double compute_intensity, double frequency_ratio);

/// Steady state of one task under one cap. gpu_power_w never exceeds the
/// leftover budget, even when the frequency floor binds.
struct OperatingPoint {
    double frequency_ratio = 1.0;
    double gpu_power_w = 0.0;
    double runtime_s = 0.0;  // per invocation
};

OperatingPoint operating_point(double cap_w, const ChipSpec& chip, const TaskSpec& task);

struct NoiseSpec {
    std::uint64_t seed = 0;
    double relative_sigma = 0.0;  // 0 = deterministic
};

/// Synthesizes one run: invocations scheduled round-robin and back-to-back
/// with each task's idle gap, superchip and CPU streams sampled on the
/// sample-period grid plus every power transition, multiplicative Gaussian
/// noise per sample. Identical seeds give identical records.
RunRecord synthesize_run(std::span<const TaskSpec> workload, const ChipSpec& chip, CapSetting cap,
                         double sample_period_ms, const NoiseSpec& noise,
                         std::string run_id = {});

/// Closed-form per-task profiles, bypassing sampling: energy is
/// gpu_power * runtime per invocation. Includes the derived idle row when the
/// workload has gaps. Baseline is the highest cap.
ProfileMatrix oracle_profiles(std::span<const TaskSpec> workload, const ChipSpec& chip,
                              std::span<const CapSetting> caps);

/// Full sweep on disk: one trace pair per (cap, run) plus manifest.json,
/// byte-identical for identical seeds. Returns the manifest with resolved
/// paths.
ExperimentManifest synthesize_sweep(const WorkloadSpec& workload,
                                    std::span<const CapSetting> caps, int runs,
                                    std::uint64_t seed, double sample_period_ms,
                                    double relative_sigma,
                                    const std::filesystem::path& out_dir);

}  // namespace capadvisor
