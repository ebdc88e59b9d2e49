#include "capadvisor/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_map>
#include <utility>

#include <json.hpp>

#include "capadvisor/util.hpp"

namespace capadvisor {

namespace {

constexpr std::string_view kPowerHeader = "timestamp_ns,component,power_w";
constexpr std::string_view kIntervalHeader = "task,start_ns,end_ns";
constexpr std::string_view kMatrixHeader =
    "task,cap_w,total_runtime_s,total_energy_j,call_count,avg_power_w";

std::string_view strip_cr(std::string_view line) {
    if (!line.empty() && line.back() == '\r') {
        line.remove_suffix(1);
    }
    return line;
}

/// "# key=value" comment payload, or nullopt if the line is not a comment.
std::optional<std::pair<std::string_view, std::string_view>> comment_entry(std::string_view line) {
    if (line.empty() || line.front() != '#') {
        return std::nullopt;
    }
    line.remove_prefix(1);
    while (!line.empty() && line.front() == ' ') {
        line.remove_prefix(1);
    }
    std::size_t eq = line.find('=');
    if (eq == std::string_view::npos) {
        return std::pair{line, std::string_view{}};
    }
    return std::pair{line.substr(0, eq), line.substr(eq + 1)};
}

[[noreturn]] void parse_fail(std::size_t line_no, const std::string& message) {
    throw ParseError("line " + format_int(static_cast<std::int64_t>(line_no)) + ": " + message);
}

// Task names are opaque bytes, but the CSV formats are unquoted.
void require_csv_safe(std::string_view task) {
    if (task.find_first_of(",\r\n") != std::string_view::npos) {
        throw DomainError("task name contains a CSV delimiter: '" + std::string(task) + "'");
    }
}

/// Linear interpolation at t; requires front().ts <= t <= back().ts.
double interpolate_power(const PowerStream& stream, std::int64_t t) {
    auto it = std::lower_bound(stream.begin(), stream.end(), t,
                               [](const PowerSample& s, std::int64_t ts) {
                                   return s.timestamp_ns < ts;
                               });
    if (it->timestamp_ns == t) {
        return it->power_w;
    }
    const PowerSample& hi = *it;
    const PowerSample& lo = *(it - 1);
    double fraction = static_cast<double>(t - lo.timestamp_ns) /
                      static_cast<double>(hi.timestamp_ns - lo.timestamp_ns);
    return lo.power_w + (hi.power_w - lo.power_w) * fraction;
}

}  // namespace

PowerTraceFile parse_power_trace(std::istream& source) {
    PowerTraceFile trace;
    std::string raw;
    std::size_t line_no = 0;
    bool header_seen = false;
    std::int64_t last_ts[3] = {0, 0, 0};
    bool has_sample[3] = {false, false, false};

    while (std::getline(source, raw)) {
        ++line_no;
        std::string_view line = strip_cr(raw);
        if (line.empty()) {
            continue;
        }
        if (auto entry = comment_entry(line)) {
            if (entry->first == "cap_w") {
                trace.declared_cap_w =
                    static_cast<int>(parse_int(entry->second, "cap_w comment"));
            }
            continue;
        }
        if (!header_seen) {
            if (line != kPowerHeader) {
                parse_fail(line_no, "expected header '" + std::string(kPowerHeader) + "'");
            }
            header_seen = true;
            continue;
        }
        auto fields = split_csv(line);
        if (fields.size() != 3) {
            parse_fail(line_no, "expected 3 fields, got " + format_int(fields.size()));
        }
        PowerSample sample;
        try {
            sample.timestamp_ns = parse_int(fields[0], "timestamp_ns");
            sample.power_w = parse_double(fields[2], "power_w");
        } catch (const ParseError& e) {
            parse_fail(line_no, e.what());
        }
        auto component = component_from_label(fields[1]);
        if (!component) {
            parse_fail(line_no, "unknown component '" + std::string(fields[1]) + "'");
        }
        sample.component = *component;
        if (sample.power_w < 0.0) {
            parse_fail(line_no, "negative power " + format_double(sample.power_w));
        }
        auto idx = static_cast<std::size_t>(*component);
        if (has_sample[idx] && sample.timestamp_ns <= last_ts[idx]) {
            parse_fail(line_no, "non-monotone timestamp for component '" +
                                    std::string(fields[1]) + "'");
        }
        last_ts[idx] = sample.timestamp_ns;
        has_sample[idx] = true;
        switch (*component) {
            case Component::Superchip: trace.streams.superchip.push_back(sample); break;
            case Component::Cpu: trace.streams.cpu.push_back(sample); break;
            case Component::Gpu: trace.streams.gpu.push_back(sample); break;
        }
    }
    if (!header_seen) {
        throw ParseError("power trace is empty (missing header)");
    }
    return trace;
}

std::vector<TaskInterval> parse_task_intervals(std::istream& source, std::string_view run_id) {
    std::vector<TaskInterval> intervals;
    std::string raw;
    std::size_t line_no = 0;
    bool header_seen = false;

    while (std::getline(source, raw)) {
        ++line_no;
        std::string_view line = strip_cr(raw);
        if (line.empty()) {
            continue;
        }
        if (comment_entry(line)) {
            continue;
        }
        if (!header_seen) {
            if (line != kIntervalHeader) {
                parse_fail(line_no, "expected header '" + std::string(kIntervalHeader) + "'");
            }
            header_seen = true;
            continue;
        }
        auto fields = split_csv(line);
        if (fields.size() != 3) {
            parse_fail(line_no, "expected 3 fields, got " + format_int(fields.size()));
        }
        TaskInterval interval;
        interval.task = std::string(fields[0]);
        interval.run_id = std::string(run_id);
        try {
            interval.start_ns = parse_int(fields[1], "start_ns");
            interval.end_ns = parse_int(fields[2], "end_ns");
        } catch (const ParseError& e) {
            parse_fail(line_no, e.what());
        }
        if (interval.task.empty()) {
            parse_fail(line_no, "empty task name");
        }
        if (interval.start_ns >= interval.end_ns) {
            parse_fail(line_no, "interval start must precede end");
        }
        intervals.push_back(std::move(interval));
    }
    if (!header_seen) {
        throw ParseError("interval file is empty (missing header)");
    }
    return intervals;
}

void write_power_trace(std::ostream& out, const ComponentStreams& streams,
                       std::optional<int> cap_w) {
    if (cap_w) {
        out << "# cap_w=" << *cap_w << '\n';
    }
    out << kPowerHeader << '\n';
    const PowerStream* order[3] = {&streams.superchip, &streams.cpu, &streams.gpu};
    std::size_t pos[3] = {0, 0, 0};
    while (true) {
        int best = -1;
        for (int s = 0; s < 3; ++s) {
            if (pos[s] >= order[s]->size()) {
                continue;
            }
            if (best < 0 ||
                (*order[s])[pos[s]].timestamp_ns < (*order[best])[pos[best]].timestamp_ns) {
                best = s;
            }
        }
        if (best < 0) {
            break;
        }
        const PowerSample& sample = (*order[best])[pos[best]++];
        out << format_int(sample.timestamp_ns) << ',' << component_label(sample.component) << ','
            << format_double(sample.power_w) << '\n';
    }
}

void write_task_intervals(std::ostream& out, std::span<const TaskInterval> intervals) {
    out << kIntervalHeader << '\n';
    for (const TaskInterval& interval : intervals) {
        require_csv_safe(interval.task);
        out << interval.task << ',' << format_int(interval.start_ns) << ','
            << format_int(interval.end_ns) << '\n';
    }
}

PowerStream derive_gpu_power(const PowerStream& superchip, const PowerStream& cpu) {
    if (superchip.empty() || cpu.empty()) {
        throw DomainError("derive_gpu_power: empty input stream");
    }
    if (superchip.back().timestamp_ns < cpu.front().timestamp_ns ||
        cpu.back().timestamp_ns < superchip.front().timestamp_ns) {
        throw DomainError("derive_gpu_power: superchip and cpu streams do not overlap in time");
    }
    PowerStream gpu;
    gpu.reserve(superchip.size());
    for (const PowerSample& sample : superchip) {
        if (sample.timestamp_ns < cpu.front().timestamp_ns ||
            sample.timestamp_ns > cpu.back().timestamp_ns) {
            continue;
        }
        double power = sample.power_w - interpolate_power(cpu, sample.timestamp_ns);
        gpu.push_back({sample.timestamp_ns, Component::Gpu, power < 0.0 ? 0.0 : power});
    }
    return gpu;
}

std::vector<TaskInterval> derive_idle_intervals(std::span<const TaskInterval> intervals,
                                                TimeSpan span, std::int64_t min_gap_ns) {
    std::vector<const TaskInterval*> sorted;
    sorted.reserve(intervals.size());
    for (const TaskInterval& interval : intervals) {
        sorted.push_back(&interval);
    }
    std::sort(sorted.begin(), sorted.end(), [](const TaskInterval* a, const TaskInterval* b) {
        return a->start_ns < b->start_ns;
    });
    for (std::size_t i = 1; i < sorted.size(); ++i) {
        if (sorted[i]->start_ns < sorted[i - 1]->end_ns) {
            throw DomainError("overlapping intervals: '" + sorted[i - 1]->task + "' ends at " +
                              format_int(sorted[i - 1]->end_ns) + " ns after '" +
                              sorted[i]->task + "' starts at " +
                              format_int(sorted[i]->start_ns) + " ns");
        }
    }

    std::vector<TaskInterval> idle;
    std::int64_t cursor = span.begin_ns;
    auto emit = [&](std::int64_t from, std::int64_t to) {
        std::int64_t gap = to - from;
        if (gap > 0 && gap >= min_gap_ns) {
            idle.push_back({std::string(kIdleTaskName), from, to, {}});
        }
    };
    for (const TaskInterval* interval : sorted) {
        emit(cursor, std::min(interval->start_ns, span.end_ns));
        cursor = std::max(cursor, interval->end_ns);
    }
    emit(cursor, span.end_ns);
    return idle;
}

void append_idle_intervals(RunRecord& run, std::int64_t min_gap_ns) {
    auto idle = derive_idle_intervals(run.intervals, run.span(), min_gap_ns);
    run.intervals.reserve(run.intervals.size() + idle.size());
    for (TaskInterval& interval : idle) {
        interval.run_id = run.run_id;
        run.intervals.push_back(std::move(interval));
    }
}

double integrate_energy(const PowerStream& stream, const TaskInterval& interval) {
    if (interval.start_ns >= interval.end_ns) {
        throw DomainError("integrate_energy: interval start must precede end");
    }
    if (stream.size() < 2) {
        throw DomainError("integrate_energy: no samples bracket the interval");
    }
    const std::int64_t front_ts = stream.front().timestamp_ns;
    const std::int64_t back_ts = stream.back().timestamp_ns;
    // Overhang allowance: one mean sample period on each side.
    const std::int64_t slack =
        (back_ts - front_ts + static_cast<std::int64_t>(stream.size()) - 2) /
        (static_cast<std::int64_t>(stream.size()) - 1);

    auto power_at = [&](std::int64_t t) -> double {
        if (t < front_ts) {
            if (front_ts - t > slack) {
                throw DomainError("integrate_energy: no samples bracket the interval (needs " +
                                  format_int(t) + " ns, stream starts at " +
                                  format_int(front_ts) + " ns)");
            }
            return stream.front().power_w;
        }
        if (t > back_ts) {
            if (t - back_ts > slack) {
                throw DomainError("integrate_energy: no samples bracket the interval (needs " +
                                  format_int(t) + " ns, stream ends at " + format_int(back_ts) +
                                  " ns)");
            }
            return stream.back().power_w;
        }
        return interpolate_power(stream, t);
    };

    const double start_power = power_at(interval.start_ns);
    const double end_power = power_at(interval.end_ns);

    auto first_inside = std::upper_bound(stream.begin(), stream.end(), interval.start_ns,
                                         [](std::int64_t ts, const PowerSample& s) {
                                             return ts < s.timestamp_ns;
                                         });
    double energy = 0.0;
    std::int64_t prev_ts = interval.start_ns;
    double prev_power = start_power;
    for (auto it = first_inside; it != stream.end() && it->timestamp_ns < interval.end_ns; ++it) {
        energy += (prev_power + it->power_w) * 0.5 *
                  (static_cast<double>(it->timestamp_ns - prev_ts) * 1e-9);
        prev_ts = it->timestamp_ns;
        prev_power = it->power_w;
    }
    energy += (prev_power + end_power) * 0.5 *
              (static_cast<double>(interval.end_ns - prev_ts) * 1e-9);
    return energy;
}

std::vector<TaskAggregate> aggregate_run(const RunRecord& run, const PowerStream& gpu) {
    std::vector<TaskAggregate> aggregates;
    std::unordered_map<std::string_view, std::size_t> index;
    for (const TaskInterval& interval : run.intervals) {
        auto [it, inserted] = index.try_emplace(interval.task, aggregates.size());
        if (inserted) {
            aggregates.push_back({interval.task, 0.0, 0.0, 0});
        }
        TaskAggregate& agg = aggregates[it->second];
        agg.total_runtime_s += static_cast<double>(interval.end_ns - interval.start_ns) * 1e-9;
        agg.total_energy_j += integrate_energy(gpu, interval);
        agg.call_count += 1;
    }
    return aggregates;
}

std::vector<TaskProfile> average_runs(std::span<const std::vector<TaskAggregate>> run_aggregates,
                                      CapSetting cap) {
    if (run_aggregates.empty()) {
        throw DomainError("average_runs: no runs to average");
    }
    struct Sum {
        double runtime = 0.0;
        double energy = 0.0;
        std::int64_t calls = 0;
    };
    std::vector<std::string> order;
    std::unordered_map<std::string, std::size_t> index;
    std::vector<Sum> sums;
    for (const auto& run : run_aggregates) {
        for (const TaskAggregate& agg : run) {
            auto [it, inserted] = index.try_emplace(agg.task, order.size());
            if (inserted) {
                order.push_back(agg.task);
                sums.emplace_back();
            }
            Sum& sum = sums[it->second];
            sum.runtime += agg.total_runtime_s;
            sum.energy += agg.total_energy_j;
            sum.calls += agg.call_count;
        }
    }
    const double n = static_cast<double>(run_aggregates.size());
    std::vector<TaskProfile> profiles;
    profiles.reserve(order.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        TaskProfile profile;
        profile.task = order[i];
        profile.cap = cap;
        profile.total_runtime_s = sums[i].runtime / n;
        profile.total_energy_j = sums[i].energy / n;
        profile.call_count = std::llround(static_cast<double>(sums[i].calls) / n);
        profile.avg_power_w =
            profile.total_runtime_s > 0.0 ? profile.total_energy_j / profile.total_runtime_s : 0.0;
        profiles.push_back(std::move(profile));
    }
    return profiles;
}

PowerStream run_gpu_stream(const RunRecord& run) {
    if (!run.samples.gpu.empty()) {
        return run.samples.gpu;
    }
    return derive_gpu_power(run.samples.superchip, run.samples.cpu);
}

ProfileMatrix build_matrix(const ExperimentManifest& manifest, std::span<const RunRecord> runs) {
    for (const RunRecord& run : runs) {
        if (std::find(manifest.caps.begin(), manifest.caps.end(), run.cap) ==
            manifest.caps.end()) {
            throw Error("run '" + run.run_id + "' has cap " + format_int(run.cap.watts) +
                        " W, which is not in the manifest cap list");
        }
    }

    // Per-run aggregation is independent; parallelize across runs.
    std::vector<std::vector<TaskAggregate>> per_run(runs.size());
    parallel_for(runs.size(), [&](std::size_t i) {
        per_run[i] = aggregate_run(runs[i], run_gpu_stream(runs[i]));
    });

    std::vector<std::vector<TaskProfile>> columns;
    columns.reserve(manifest.caps.size());
    for (CapSetting cap : manifest.caps) {
        std::vector<std::vector<TaskAggregate>> at_cap;
        for (std::size_t i = 0; i < runs.size(); ++i) {
            if (runs[i].cap == cap) {
                at_cap.push_back(per_run[i]);
            }
        }
        if (static_cast<int>(at_cap.size()) != manifest.runs_per_cap) {
            throw Error("cap " + format_int(cap.watts) + " W: expected " +
                        format_int(manifest.runs_per_cap) + " runs, got " +
                        format_int(static_cast<std::int64_t>(at_cap.size())));
        }
        columns.push_back(average_runs(at_cap, cap));
    }

    std::vector<std::string> tasks;
    for (const auto& column : columns) {
        for (const TaskProfile& profile : column) {
            if (std::find(tasks.begin(), tasks.end(), profile.task) == tasks.end()) {
                tasks.push_back(profile.task);
            }
        }
    }

    std::vector<TaskProfile> cells;
    cells.reserve(tasks.size() * manifest.caps.size());
    for (const std::string& task : tasks) {
        for (std::size_t c = 0; c < manifest.caps.size(); ++c) {
            auto it = std::find_if(columns[c].begin(), columns[c].end(),
                                   [&](const TaskProfile& p) { return p.task == task; });
            if (it != columns[c].end()) {
                cells.push_back(*it);
            } else {
                cells.push_back({task, manifest.caps[c], 0.0, 0.0, 0, 0.0});
            }
        }
    }

    CapSetting baseline = *std::max_element(manifest.caps.begin(), manifest.caps.end());
    return ProfileMatrix(std::move(tasks), {manifest.caps.begin(), manifest.caps.end()},
                         std::move(cells), baseline);
}

ExperimentManifest parse_manifest(std::istream& in, const std::filesystem::path& base_dir) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("manifest: ") + e.what());
    }
    ExperimentManifest manifest;
    try {
        for (const auto& cap : doc.at("caps")) {
            manifest.caps.push_back({cap.get<int>()});
        }
        manifest.runs_per_cap = doc.at("runs_per_cap").get<int>();
        manifest.sample_period_ms = doc.at("sample_period_ms").get<double>();
        for (const auto& entry : doc.at("traces")) {
            TraceRef ref;
            ref.cap = {entry.at("cap_w").get<int>()};
            ref.run_index = entry.at("run_index").get<int>();
            auto resolve = [&](const std::string& p) {
                std::filesystem::path path(p);
                return path.is_absolute() ? path : base_dir / path;
            };
            ref.power_file = resolve(entry.at("power_file").get<std::string>());
            ref.interval_file = resolve(entry.at("interval_file").get<std::string>());
            manifest.traces.push_back(std::move(ref));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("manifest: ") + e.what());
    }

    if (manifest.caps.empty()) {
        throw ParseError("manifest: caps list is empty");
    }
    if (manifest.runs_per_cap <= 0) {
        throw ParseError("manifest: runs_per_cap must be positive");
    }
    for (CapSetting cap : manifest.caps) {
        if (cap.watts <= 0) {
            throw ParseError("manifest: caps must be positive wattages");
        }
    }
    // Every (cap, run_index) pair must be referenced exactly once.
    std::vector<std::pair<int, int>> seen;
    for (const TraceRef& ref : manifest.traces) {
        if (std::find(manifest.caps.begin(), manifest.caps.end(), ref.cap) ==
            manifest.caps.end()) {
            throw ParseError("manifest: trace cap " + format_int(ref.cap.watts) +
                             " W is not in the caps list");
        }
        if (ref.run_index < 0 || ref.run_index >= manifest.runs_per_cap) {
            throw ParseError("manifest: run_index " + format_int(ref.run_index) +
                             " out of range for runs_per_cap " +
                             format_int(manifest.runs_per_cap));
        }
        std::pair<int, int> key{ref.cap.watts, ref.run_index};
        if (std::find(seen.begin(), seen.end(), key) != seen.end()) {
            throw ParseError("manifest: (cap " + format_int(key.first) + " W, run " +
                             format_int(key.second) + ") referenced more than once");
        }
        seen.push_back(key);
    }
    if (seen.size() != manifest.caps.size() * static_cast<std::size_t>(manifest.runs_per_cap)) {
        throw ParseError("manifest: expected " +
                         format_int(static_cast<std::int64_t>(
                             manifest.caps.size() * static_cast<std::size_t>(manifest.runs_per_cap))) +
                         " trace entries, got " +
                         format_int(static_cast<std::int64_t>(seen.size())));
    }
    return manifest;
}

ExperimentManifest load_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error("cannot open manifest: " + path.string());
    }
    try {
        return parse_manifest(in, path.parent_path());
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

std::string manifest_to_json(const ExperimentManifest& manifest,
                             const std::filesystem::path& base_dir) {
    nlohmann::json doc;
    doc["caps"] = nlohmann::json::array();
    for (CapSetting cap : manifest.caps) {
        doc["caps"].push_back(cap.watts);
    }
    doc["runs_per_cap"] = manifest.runs_per_cap;
    doc["sample_period_ms"] = manifest.sample_period_ms;
    doc["traces"] = nlohmann::json::array();
    auto relativize = [&](const std::filesystem::path& path) {
        auto rel = path.lexically_relative(base_dir);
        return rel.empty() || rel.native().starts_with("..") ? path.generic_string()
                                                             : rel.generic_string();
    };
    for (const TraceRef& ref : manifest.traces) {
        doc["traces"].push_back({{"cap_w", ref.cap.watts},
                                 {"run_index", ref.run_index},
                                 {"power_file", relativize(ref.power_file)},
                                 {"interval_file", relativize(ref.interval_file)}});
    }
    return doc.dump(2) + "\n";
}

RunRecord load_run(const TraceRef& ref) {
    RunRecord run;
    run.cap = ref.cap;
    run.run_id = "cap" + format_int(ref.cap.watts) + "_run" + format_int(ref.run_index);

    std::ifstream power(ref.power_file);
    if (!power) {
        throw Error("cannot open power trace: " + ref.power_file.string());
    }
    PowerTraceFile trace;
    try {
        trace = parse_power_trace(power);
    } catch (const ParseError& e) {
        throw ParseError(ref.power_file.string() + ": " + e.what());
    }
    if (trace.declared_cap_w && *trace.declared_cap_w != ref.cap.watts) {
        throw Error("cap mismatch: manifest lists " + format_int(ref.cap.watts) + " W but " +
                    ref.power_file.string() + " declares " +
                    format_int(*trace.declared_cap_w) + " W");
    }
    run.samples = std::move(trace.streams);

    std::ifstream intervals(ref.interval_file);
    if (!intervals) {
        throw Error("cannot open interval file: " + ref.interval_file.string());
    }
    try {
        run.intervals = parse_task_intervals(intervals, run.run_id);
    } catch (const ParseError& e) {
        throw ParseError(ref.interval_file.string() + ": " + e.what());
    }

    bool any = false;
    for (const PowerStream* stream :
         {&run.samples.superchip, &run.samples.cpu, &run.samples.gpu}) {
        if (stream->empty()) {
            continue;
        }
        if (!any) {
            run.span_begin_ns = stream->front().timestamp_ns;
            run.span_end_ns = stream->back().timestamp_ns;
            any = true;
        } else {
            run.span_begin_ns = std::min(run.span_begin_ns, stream->front().timestamp_ns);
            run.span_end_ns = std::max(run.span_end_ns, stream->back().timestamp_ns);
        }
    }
    if (!any) {
        throw Error("power trace has no samples: " + ref.power_file.string());
    }
    for (const TaskInterval& interval : run.intervals) {
        if (interval.start_ns < run.span_begin_ns || interval.end_ns > run.span_end_ns) {
            throw Error("interval '" + interval.task + "' [" + format_int(interval.start_ns) +
                        ", " + format_int(interval.end_ns) + ") ns lies outside the sampled span of " +
                        ref.power_file.string());
        }
    }

    append_idle_intervals(run);
    return run;
}

std::vector<RunRecord> load_experiment(const ExperimentManifest& manifest) {
    std::vector<RunRecord> runs(manifest.traces.size());
    parallel_for(manifest.traces.size(),
                 [&](std::size_t i) { runs[i] = load_run(manifest.traces[i]); });
    return runs;
}

void write_matrix_csv(std::ostream& out, const ProfileMatrix& matrix) {
    out << "# baseline_cap_w=" << matrix.baseline_cap().watts << '\n';
    out << kMatrixHeader << '\n';
    for (std::size_t t = 0; t < matrix.task_count(); ++t) {
        for (std::size_t c = 0; c < matrix.cap_count(); ++c) {
            if (!matrix.has_cell(t, c)) {
                continue;
            }
            const TaskProfile& cell = matrix.cell(t, c);
            require_csv_safe(cell.task);
            out << cell.task << ',' << format_int(cell.cap.watts) << ','
                << format_double(cell.total_runtime_s) << ','
                << format_double(cell.total_energy_j) << ',' << format_int(cell.call_count)
                << ',' << format_double(cell.avg_power_w) << '\n';
        }
    }
}

ProfileMatrix parse_matrix_csv(std::istream& in) {
    std::vector<TaskProfile> cells;
    std::optional<CapSetting> baseline;
    std::string raw;
    std::size_t line_no = 0;
    bool header_seen = false;

    while (std::getline(in, raw)) {
        ++line_no;
        std::string_view line = strip_cr(raw);
        if (line.empty()) {
            continue;
        }
        if (auto entry = comment_entry(line)) {
            if (entry->first == "baseline_cap_w") {
                baseline = CapSetting{
                    static_cast<int>(parse_int(entry->second, "baseline_cap_w comment"))};
            }
            continue;
        }
        if (!header_seen) {
            if (line != kMatrixHeader) {
                parse_fail(line_no, "expected header '" + std::string(kMatrixHeader) + "'");
            }
            header_seen = true;
            continue;
        }
        auto fields = split_csv(line);
        if (fields.size() != 6) {
            parse_fail(line_no, "expected 6 fields, got " + format_int(fields.size()));
        }
        TaskProfile cell;
        cell.task = std::string(fields[0]);
        try {
            cell.cap = {static_cast<int>(parse_int(fields[1], "cap_w"))};
            cell.total_runtime_s = parse_double(fields[2], "total_runtime_s");
            cell.total_energy_j = parse_double(fields[3], "total_energy_j");
            cell.call_count = parse_int(fields[4], "call_count");
            cell.avg_power_w = parse_double(fields[5], "avg_power_w");
        } catch (const ParseError& e) {
            parse_fail(line_no, e.what());
        }
        if (cell.task.empty()) {
            parse_fail(line_no, "empty task name");
        }
        if (cell.cap.watts <= 0) {
            parse_fail(line_no, "cap_w must be positive");
        }
        cells.push_back(std::move(cell));
    }
    if (!header_seen) {
        throw ParseError("matrix CSV is empty (missing header)");
    }
    try {
        return ProfileMatrix::from_cells(std::move(cells), baseline);
    } catch (const DomainError& e) {
        throw ParseError(e.what());
    }
}

void save_matrix_csv(const std::filesystem::path& path, const ProfileMatrix& matrix) {
    std::ostringstream out;
    write_matrix_csv(out, matrix);
    write_file_atomic(path, out.str());
}

ProfileMatrix load_matrix_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error("cannot open matrix CSV: " + path.string());
    }
    try {
        return parse_matrix_csv(in);
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

}  // namespace capadvisor
