#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "capadvisor/core.hpp"
#include "capadvisor/metrics.hpp"

namespace capadvisor {

enum class MetricFilter { Sed, Ed, Both };

struct ReportOptions {
    MetricFilter metric = MetricFilter::Both;
    std::optional<CapSetting> baseline_cap;  // overrides the matrix default
};

/// Everything cmd_analyze emits, computed once from a validated matrix.
/// task_order lists matrix task indices by descending baseline energy with
/// the idle row last, the layout the baseline and comparison tables use.
struct ReportBundle {
    ProfileMatrix matrix;
    std::vector<std::size_t> task_order;
    std::vector<MetricSeries> series;
    std::vector<Recommendation> recommendations;
    std::vector<Projection> projections;
    ValidationReport validation;
};

/// Throws DomainError if the matrix is unusable (the CLI validates first and
/// exits 2 before getting here).
ReportBundle build_report(const ProfileMatrix& matrix, const ReportOptions& options);

std::string render_baseline_table_csv(const ReportBundle& bundle);
std::string render_series_csv(const ReportBundle& bundle);
std::string render_comparison_csv(const ReportBundle& bundle, MetricFilter filter);
/// Table-2-style text: energy as positive "reduction", runtime as positive
/// "increase", two decimal places, projection lines appended.
std::string render_comparison_text(const ReportBundle& bundle, MetricFilter filter);
std::string render_projections_csv(const ReportBundle& bundle, MetricFilter filter);

/// Writes baseline_table.csv, metric_series.csv, comparison.csv,
/// comparison.txt and projections.csv into out_dir (created if needed),
/// honoring the metric filter. All writes are atomic.
void write_report_files(const ReportBundle& bundle, const ReportOptions& options,
                        const std::filesystem::path& out_dir);

}  // namespace capadvisor
