#include "capadvisor/report.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "capadvisor/util.hpp"

namespace capadvisor {

namespace {

std::string fixed2(double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.2f", value);
    return buf;
}

bool include_sed(MetricFilter filter) { return filter != MetricFilter::Ed; }
bool include_ed(MetricFilter filter) { return filter != MetricFilter::Sed; }

}  // namespace

ReportBundle build_report(const ProfileMatrix& matrix, const ReportOptions& options) {
    ReportBundle bundle;
    bundle.matrix = options.baseline_cap ? matrix.with_baseline(*options.baseline_cap) : matrix;
    bundle.validation = validate_matrix(bundle.matrix);
    if (!bundle.validation.ok() || !bundle.validation.complete()) {
        throw DomainError("matrix failed validation; cannot compute metrics");
    }

    const ProfileMatrix& m = bundle.matrix;
    auto baseline_idx = m.baseline_index();

    // Table-1 layout: descending baseline energy, idle phase last.
    bundle.task_order.resize(m.task_count());
    std::iota(bundle.task_order.begin(), bundle.task_order.end(), std::size_t{0});
    std::stable_sort(bundle.task_order.begin(), bundle.task_order.end(),
                     [&](std::size_t a, std::size_t b) {
                         bool idle_a = m.tasks()[a] == kIdleTaskName;
                         bool idle_b = m.tasks()[b] == kIdleTaskName;
                         if (idle_a != idle_b) {
                             return idle_b;
                         }
                         return m.cell(a, *baseline_idx).total_energy_j >
                                m.cell(b, *baseline_idx).total_energy_j;
                     });

    bundle.series = compute_series(m);
    bundle.recommendations = build_recommendations(m);
    bundle.projections = aggregate_projection(bundle.recommendations);
    return bundle;
}

std::string render_baseline_table_csv(const ReportBundle& bundle) {
    const ProfileMatrix& m = bundle.matrix;
    auto baseline_idx = *m.baseline_index();
    std::ostringstream out;
    out << "# baseline_cap_w=" << m.baseline_cap().watts << '\n';
    out << "task,total_time_s,calls,total_energy_j,avg_power_w\n";
    for (std::size_t t : bundle.task_order) {
        const TaskProfile& cell = m.cell(t, baseline_idx);
        out << cell.task << ',' << format_double(cell.total_runtime_s) << ','
            << format_int(cell.call_count) << ',' << format_double(cell.total_energy_j) << ','
            << format_double(cell.avg_power_w) << '\n';
    }
    return std::move(out).str();
}

std::string render_series_csv(const ReportBundle& bundle) {
    std::ostringstream out;
    out << "task,cap_w,sed,n_energy,n_runtime,distance\n";
    for (std::size_t t : bundle.task_order) {
        const MetricSeries& series = bundle.series[t];
        for (const MetricPoint& point : series.points) {
            out << point.task << ',' << format_int(point.cap.watts) << ','
                << format_double(point.sed) << ',' << format_double(point.n_energy) << ','
                << format_double(point.n_runtime) << ',' << format_double(point.distance)
                << '\n';
        }
    }
    return std::move(out).str();
}

std::string render_comparison_csv(const ReportBundle& bundle, MetricFilter filter) {
    std::ostringstream out;
    out << "task";
    if (include_sed(filter)) {
        out << ",sed_cap_w,sed_energy_reduction_pct,sed_runtime_increase_pct";
    }
    if (include_ed(filter)) {
        out << ",ed_cap_w,ed_energy_reduction_pct,ed_runtime_increase_pct";
    }
    out << '\n';
    for (std::size_t t : bundle.task_order) {
        const Recommendation& rec = bundle.recommendations[t];
        out << rec.task;
        if (include_sed(filter)) {
            out << ',' << format_int(rec.sed_cap.watts) << ','
                << format_double(-rec.sed_energy_pct) << ',' << format_double(rec.sed_runtime_pct);
        }
        if (include_ed(filter)) {
            out << ',' << format_int(rec.ed_cap.watts) << ','
                << format_double(-rec.ed_energy_pct) << ',' << format_double(rec.ed_runtime_pct);
        }
        out << '\n';
    }
    return std::move(out).str();
}

std::string render_comparison_text(const ReportBundle& bundle, MetricFilter filter) {
    const bool sed = include_sed(filter);
    const bool ed = include_ed(filter);

    std::size_t name_width = 8;
    for (std::size_t t : bundle.task_order) {
        name_width = std::max(name_width, bundle.recommendations[t].task.size());
    }

    std::ostringstream out;
    out << "Most suitable power caps vs baseline " << bundle.matrix.baseline_cap().watts
        << " W (energy reduction %, runtime increase %)\n\n";
    auto pad = [&](std::string text, std::size_t width) {
        if (text.size() < width) {
            text.append(width - text.size(), ' ');
        }
        return text;
    };
    out << pad("GPU task", name_width);
    if (sed) {
        out << "  " << pad("SED cap", 9) << pad("energy%", 9) << pad("runtime%", 9);
    }
    if (ed) {
        out << "  " << pad("ED cap", 9) << pad("energy%", 9) << pad("runtime%", 9);
    }
    out << '\n';
    for (std::size_t t : bundle.task_order) {
        const Recommendation& rec = bundle.recommendations[t];
        out << pad(rec.task, name_width);
        if (sed) {
            out << "  " << pad(format_int(rec.sed_cap.watts) + " W", 9)
                << pad(fixed2(-rec.sed_energy_pct), 9) << pad(fixed2(rec.sed_runtime_pct), 9);
        }
        if (ed) {
            out << "  " << pad(format_int(rec.ed_cap.watts) + " W", 9)
                << pad(fixed2(-rec.ed_energy_pct), 9) << pad(fixed2(rec.ed_runtime_pct), 9);
        }
        out << '\n';
    }

    out << "\nAggregate projection (ideal, overhead-free sum over tasks):\n";
    for (const Projection& projection : bundle.projections) {
        if (projection.metric == MetricKind::Sed && !sed) {
            continue;
        }
        if (projection.metric == MetricKind::Ed && !ed) {
            continue;
        }
        out << "  " << (projection.metric == MetricKind::Sed ? "SED" : "ED ")
            << ": energy reduction " << fixed2(projection.energy_reduction_pct_sum)
            << " %, runtime increase " << fixed2(projection.runtime_increase_pct_sum) << " %\n";
    }

    bool noted = false;
    for (std::size_t t : bundle.task_order) {
        const MetricSeries& series = bundle.series[t];
        if (series.energy_indifferent || series.runtime_indifferent) {
            if (!noted) {
                out << '\n';
                noted = true;
            }
            out << "note: task '" << series.task << "' is metric-indifferent ("
                << (series.energy_indifferent ? "constant energy" : "")
                << (series.energy_indifferent && series.runtime_indifferent ? ", " : "")
                << (series.runtime_indifferent ? "constant runtime" : "") << ")\n";
        }
    }
    return std::move(out).str();
}

std::string render_projections_csv(const ReportBundle& bundle, MetricFilter filter) {
    std::ostringstream out;
    out << "metric,energy_reduction_pct_sum,runtime_increase_pct_sum\n";
    for (const Projection& projection : bundle.projections) {
        if (projection.metric == MetricKind::Sed && !include_sed(filter)) {
            continue;
        }
        if (projection.metric == MetricKind::Ed && !include_ed(filter)) {
            continue;
        }
        out << metric_label(projection.metric) << ','
            << format_double(projection.energy_reduction_pct_sum) << ','
            << format_double(projection.runtime_increase_pct_sum) << '\n';
    }
    return std::move(out).str();
}

void write_report_files(const ReportBundle& bundle, const ReportOptions& options,
                        const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    write_file_atomic(out_dir / "baseline_table.csv", render_baseline_table_csv(bundle));
    write_file_atomic(out_dir / "metric_series.csv", render_series_csv(bundle));
    write_file_atomic(out_dir / "comparison.csv",
                      render_comparison_csv(bundle, options.metric));
    write_file_atomic(out_dir / "comparison.txt",
                      render_comparison_text(bundle, options.metric));
    write_file_atomic(out_dir / "projections.csv",
                      render_projections_csv(bundle, options.metric));
}

}  // namespace capadvisor
