#include "capadvisor/sim.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <utility>

#include <json.hpp>

#include "capadvisor/util.hpp"

namespace capadvisor {

namespace {

/// Box-Muller over mt19937_64; deterministic across standard-library
/// implementations, unlike std::normal_distribution.
class GaussianNoise {
  public:
    explicit GaussianNoise(std::uint64_t seed) : rng_(seed) {}

    double next() {
        double u1 = (static_cast<double>(rng_() >> 11) + 1.0) * 0x1.0p-53;  // (0, 1]
        double u2 = static_cast<double>(rng_() >> 11) * 0x1.0p-53;          // [0, 1)
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.141592653589793 * u2);
    }

  private:
    std::mt19937_64 rng_;
};

struct Segment {
    std::int64_t begin_ns = 0;
    std::int64_t end_ns = 0;
    double gpu_w = 0.0;
    double cpu_w = 0.0;
};

void validate_chip(const ChipSpec& chip) {
    if (chip.gpu_idle_power_w < 0.0) {
        throw DomainError("chip: gpu_idle_power_w must be non-negative");
    }
    if (chip.alpha < 1.0) {
        throw DomainError("chip: alpha must be at least 1");
    }
    if (!(chip.min_frequency_ratio > 0.0 && chip.min_frequency_ratio <= 1.0)) {
        throw DomainError("chip: min_frequency_ratio must lie in (0, 1]");
    }
}

void validate_task(const ChipSpec& chip, const TaskSpec& task) {
    if (task.name.empty()) {
        throw DomainError("task: name must not be empty");
    }
    if (task.name == kIdleTaskName) {
        throw DomainError("task: '" + std::string(kIdleTaskName) +
                          "' is reserved for derived idle phases");
    }
    if (!(task.base_runtime_s > 0.0)) {
        throw DomainError("task '" + task.name + "': base_runtime_s must be positive");
    }
    if (task.compute_intensity < 0.0 || task.compute_intensity > 1.0) {
        throw DomainError("task '" + task.name + "': compute_intensity must lie in [0, 1]");
    }
    if (!(task.peak_power_w > chip.gpu_idle_power_w)) {
        throw DomainError("task '" + task.name +
                          "': peak_power_w must exceed the chip's idle floor");
    }
    if (task.invocations < 1) {
        throw DomainError("task '" + task.name + "': invocations must be at least 1");
    }
    if (task.gap_ns < 0) {
        throw DomainError("task '" + task.name + "': gap_ns must be non-negative");
    }
}

}  // namespace

WorkloadSpec parse_workload(std::istream& in) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("workload: ") + e.what());
    }
    WorkloadSpec workload;
    try {
        const auto& chip = doc.at("chip");
        workload.chip.gpu_idle_power_w = chip.at("gpu_idle_power_w").get<double>();
        workload.chip.cpu_power_w = chip.at("cpu_power_w").get<double>();
        workload.chip.cpu_burst_power_w =
            chip.value("cpu_burst_power_w", workload.chip.cpu_power_w);
        workload.chip.alpha = chip.value("alpha", 2.5);
        workload.chip.min_frequency_ratio = chip.value("min_frequency_ratio", 0.1);

        for (const auto& entry : doc.at("tasks")) {
            TaskSpec task;
            task.name = entry.at("name").get<std::string>();
            task.base_runtime_s = entry.at("base_runtime_s").get<double>();
            task.compute_intensity = entry.at("compute_intensity").get<double>();
            task.peak_power_w = entry.at("peak_power_w").get<double>();
            task.invocations = entry.value("invocations", 1);
            task.gap_ns = entry.value("gap_ns", std::int64_t{0});
            workload.tasks.push_back(std::move(task));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("workload: ") + e.what());
    }

    try {
        validate_chip(workload.chip);
        if (workload.tasks.empty()) {
            throw DomainError("workload: tasks list is empty");
        }
        for (std::size_t i = 0; i < workload.tasks.size(); ++i) {
            validate_task(workload.chip, workload.tasks[i]);
            for (std::size_t j = 0; j < i; ++j) {
                if (workload.tasks[j].name == workload.tasks[i].name) {
                    throw DomainError("duplicate task name '" + workload.tasks[i].name + "'");
                }
            }
        }
    } catch (const DomainError& e) {
        throw ParseError(e.what());
    }
    return workload;
}

WorkloadSpec load_workload(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error("cannot open workload spec: " + path.string());
    }
    try {
        return parse_workload(in);
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

double effective_frequency(double cap_w, const ChipSpec& chip, const TaskSpec& task) {
    if (!(cap_w > chip.cpu_power_w)) {
        throw InfeasibleCapError("cap " + format_double(cap_w) +
                                 " W infeasible: CPU demand is " +
                                 format_double(chip.cpu_power_w) + " W");
    }
    const double gpu_budget = cap_w - chip.cpu_power_w;
    if (task.peak_power_w <= gpu_budget) {
        return 1.0;
    }
    double frequency;
    if (gpu_budget <= chip.gpu_idle_power_w) {
        frequency = chip.min_frequency_ratio;
    } else {
        frequency = std::pow((gpu_budget - chip.gpu_idle_power_w) /
                                 (task.peak_power_w - chip.gpu_idle_power_w),
                             1.0 / chip.alpha);
    }
    return std::clamp(frequency, chip.min_frequency_ratio, 1.0);
}

double model_power(double frequency_ratio, const ChipSpec& chip, const TaskSpec& task) {
    return chip.gpu_idle_power_w +
           (task.peak_power_w - chip.gpu_idle_power_w) * std::pow(frequency_ratio, chip.alpha);
}

double model_runtime(double base_runtime_s, double compute_intensity, double frequency_ratio) {
    if (!(frequency_ratio > 0.0)) {
        throw DomainError("model_runtime: frequency ratio must be positive");
    }
    return base_runtime_s * (compute_intensity / frequency_ratio + (1.0 - compute_intensity));
}

OperatingPoint operating_point(double cap_w, const ChipSpec& chip, const TaskSpec& task) {
    OperatingPoint op;
    op.frequency_ratio = effective_frequency(cap_w, chip, task);
    op.gpu_power_w = model_power(op.frequency_ratio, chip, task);
    // When the frequency floor binds, the cap still wins on power.
    const double gpu_budget = cap_w - chip.cpu_power_w;
    if (op.gpu_power_w > gpu_budget) {
        op.gpu_power_w = gpu_budget;
    }
    op.runtime_s = model_runtime(task.base_runtime_s, task.compute_intensity, op.frequency_ratio);
    return op;
}

RunRecord synthesize_run(std::span<const TaskSpec> workload, const ChipSpec& chip, CapSetting cap,
                         double sample_period_ms, const NoiseSpec& noise, std::string run_id) {
    validate_chip(chip);
    if (workload.empty()) {
        throw DomainError("synthesize_run: workload is empty");
    }
    if (!(sample_period_ms > 0.0)) {
        throw DomainError("synthesize_run: sample period must be positive");
    }
    const std::int64_t period_ns = std::llround(sample_period_ms * 1e6);
    if (period_ns < 1) {
        throw DomainError("synthesize_run: sample period rounds below 1 ns");
    }

    std::vector<OperatingPoint> ops;
    std::vector<std::int64_t> runtime_ns;
    ops.reserve(workload.size());
    for (const TaskSpec& task : workload) {
        validate_task(chip, task);
        ops.push_back(operating_point(static_cast<double>(cap.watts), chip, task));
        std::int64_t ns = std::llround(ops.back().runtime_s * 1e9);
        if (ns < 1) {
            throw DomainError("task '" + task.name + "': modeled runtime rounds below 1 ns");
        }
        runtime_ns.push_back(ns);
    }

    const double capped_burst_w =
        std::min(chip.cpu_burst_power_w,
                 std::max(0.0, static_cast<double>(cap.watts) - chip.gpu_idle_power_w));

    RunRecord run;
    run.run_id = std::move(run_id);
    run.cap = cap;

    // Round-robin schedule, each invocation followed by its task's gap.
    std::vector<Segment> segments;
    std::vector<int> remaining(workload.size());
    for (std::size_t i = 0; i < workload.size(); ++i) {
        remaining[i] = workload[i].invocations;
    }
    std::int64_t cursor = 0;
    bool pending = true;
    while (pending) {
        pending = false;
        for (std::size_t i = 0; i < workload.size(); ++i) {
            if (remaining[i] == 0) {
                continue;
            }
            --remaining[i];
            pending = pending || remaining[i] > 0;
            run.intervals.push_back(
                {workload[i].name, cursor, cursor + runtime_ns[i], run.run_id});
            segments.push_back(
                {cursor, cursor + runtime_ns[i], ops[i].gpu_power_w, chip.cpu_power_w});
            cursor += runtime_ns[i];
            if (workload[i].gap_ns > 0) {
                segments.push_back({cursor, cursor + workload[i].gap_ns, chip.gpu_idle_power_w,
                                    capped_burst_w});
                cursor += workload[i].gap_ns;
            }
        }
    }
    const std::int64_t run_end = cursor;
    run.span_begin_ns = 0;
    run.span_end_ns = run_end;

    // Sample instants: the uniform grid plus a 1 ns straddle around every
    // power transition, so linear interpolation reconstructs the steps.
    std::vector<std::int64_t> instants;
    for (std::int64_t t = 0; t < run_end; t += period_ns) {
        instants.push_back(t);
    }
    instants.push_back(run_end);
    for (std::size_t s = 1; s < segments.size(); ++s) {
        instants.push_back(segments[s].begin_ns - 1);
        instants.push_back(segments[s].begin_ns);
    }
    std::sort(instants.begin(), instants.end());
    instants.erase(std::unique(instants.begin(), instants.end()), instants.end());

    GaussianNoise gaussian(noise.seed);
    const bool noisy = noise.relative_sigma != 0.0;
    auto perturb = [&](double power) {
        if (!noisy) {
            return power;
        }
        double value = power * (1.0 + noise.relative_sigma * gaussian.next());
        return value < 0.0 ? 0.0 : value;
    };

    run.samples.superchip.reserve(instants.size());
    run.samples.cpu.reserve(instants.size());
    std::size_t seg = 0;
    for (std::int64_t t : instants) {
        while (seg + 1 < segments.size() && t >= segments[seg + 1].begin_ns) {
            ++seg;
        }
        const double gpu_w = segments[seg].gpu_w;
        const double cpu_w = segments[seg].cpu_w;
        run.samples.superchip.push_back(
            {t, Component::Superchip, perturb(cpu_w + gpu_w)});
        run.samples.cpu.push_back({t, Component::Cpu, perturb(cpu_w)});
    }
    return run;
}

ProfileMatrix oracle_profiles(std::span<const TaskSpec> workload, const ChipSpec& chip,
                              std::span<const CapSetting> caps) {
    validate_chip(chip);
    if (workload.empty()) {
        throw DomainError("oracle_profiles: workload is empty");
    }
    if (caps.empty()) {
        throw DomainError("oracle_profiles: caps list is empty");
    }
    for (const TaskSpec& task : workload) {
        validate_task(chip, task);
    }

    std::int64_t total_gap_ns = 0;
    std::int64_t gap_calls = 0;
    for (const TaskSpec& task : workload) {
        if (task.gap_ns > 0) {
            total_gap_ns += task.gap_ns * task.invocations;
            gap_calls += task.invocations;
        }
    }

    std::vector<std::string> tasks;
    for (const TaskSpec& task : workload) {
        tasks.push_back(task.name);
    }
    if (total_gap_ns > 0) {
        tasks.emplace_back(kIdleTaskName);
    }

    std::vector<TaskProfile> cells;
    cells.reserve(tasks.size() * caps.size());
    for (const TaskSpec& task : workload) {
        for (CapSetting cap : caps) {
            OperatingPoint op = operating_point(static_cast<double>(cap.watts), chip, task);
            TaskProfile cell;
            cell.task = task.name;
            cell.cap = cap;
            cell.total_runtime_s = op.runtime_s * task.invocations;
            cell.total_energy_j = op.gpu_power_w * op.runtime_s * task.invocations;
            cell.call_count = task.invocations;
            cell.avg_power_w = cell.total_energy_j / cell.total_runtime_s;
            cells.push_back(std::move(cell));
        }
    }
    if (total_gap_ns > 0) {
        const double idle_runtime_s = static_cast<double>(total_gap_ns) * 1e-9;
        for (CapSetting cap : caps) {
            TaskProfile cell;
            cell.task = kIdleTaskName;
            cell.cap = cap;
            cell.total_runtime_s = idle_runtime_s;
            cell.total_energy_j = chip.gpu_idle_power_w * idle_runtime_s;
            cell.call_count = gap_calls;
            cell.avg_power_w = chip.gpu_idle_power_w;
            cells.push_back(std::move(cell));
        }
    }

    CapSetting baseline = *std::max_element(caps.begin(), caps.end());
    return ProfileMatrix(std::move(tasks), {caps.begin(), caps.end()}, std::move(cells),
                         baseline);
}

ExperimentManifest synthesize_sweep(const WorkloadSpec& workload,
                                    std::span<const CapSetting> caps, int runs,
                                    std::uint64_t seed, double sample_period_ms,
                                    double relative_sigma,
                                    const std::filesystem::path& out_dir) {
    if (caps.empty()) {
        throw DomainError("synthesize_sweep: caps list is empty");
    }
    if (runs < 1) {
        throw DomainError("synthesize_sweep: runs must be at least 1");
    }
    // Fail on an infeasible cap before any file is written.
    for (CapSetting cap : caps) {
        for (const TaskSpec& task : workload.tasks) {
            operating_point(static_cast<double>(cap.watts), workload.chip, task);
        }
    }
    std::filesystem::create_directories(out_dir);

    ExperimentManifest manifest;
    manifest.caps.assign(caps.begin(), caps.end());
    manifest.runs_per_cap = runs;
    manifest.sample_period_ms = sample_period_ms;
    for (CapSetting cap : caps) {
        for (int r = 0; r < runs; ++r) {
            std::string stem = "cap" + format_int(cap.watts) + "_run" + format_int(r);
            manifest.traces.push_back({cap, r, out_dir / (stem + "_power.csv"),
                                       out_dir / (stem + "_intervals.csv")});
        }
    }

    parallel_for(manifest.traces.size(), [&](std::size_t i) {
        const TraceRef& ref = manifest.traces[i];
        NoiseSpec noise{mix_seed(seed, static_cast<std::uint64_t>(ref.cap.watts),
                                 static_cast<std::uint64_t>(ref.run_index)),
                        relative_sigma};
        RunRecord run = synthesize_run(workload.tasks, workload.chip, ref.cap, sample_period_ms,
                                       noise,
                                       "cap" + format_int(ref.cap.watts) + "_run" +
                                           format_int(ref.run_index));
        std::ostringstream power;
        write_power_trace(power, run.samples, ref.cap.watts);
        write_file_atomic(ref.power_file, power.str());

        std::ostringstream intervals;
        write_task_intervals(intervals, run.intervals);
        write_file_atomic(ref.interval_file, intervals.str());
    });

    write_file_atomic(out_dir / "manifest.json", manifest_to_json(manifest, out_dir));
    return manifest;
}

}  // namespace capadvisor
