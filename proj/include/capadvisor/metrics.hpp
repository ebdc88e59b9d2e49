#pragma once

#include <span>
#include <string>
#include <vector>

#include "capadvisor/core.hpp"

namespace capadvisor {

/// Both metrics for one task across the matrix's caps, matrix cap order.
struct MetricSeries {
    std::string task;
    std::vector<MetricPoint> points;
    bool energy_indifferent = false;   // energy constant across caps
    bool runtime_indifferent = false;  // runtime constant across caps

    bool metric_indifferent() const { return energy_indifferent && runtime_indifferent; }
};

enum class MetricKind { Sed, Ed };

std::string_view metric_label(MetricKind metric);

/// Column sums of the per-task percent table: an ideal, overhead-free
/// projection of what task-level cap switching could save.
struct Projection {
    MetricKind metric = MetricKind::Sed;
    double energy_reduction_pct_sum = 0.0;
    double runtime_increase_pct_sum = 0.0;
};

/// (baseline_runtime * baseline_energy) / (runtime * energy). Above 1 means
/// the candidate improves the runtime-energy product.
double speedup_energy_delay(double baseline_runtime_s, double baseline_energy_j,
                            double runtime_s, double energy_j);

struct NormalizedSeries {
    std::vector<double> values;
    bool indifferent = false;  // max == min; every value mapped to 0
};

/// Min-max feature scaling onto [0, 1]. A constant series maps to all zeros
/// and is flagged indifferent instead of erroring.
NormalizedSeries min_max_normalize(std::span<const double> values);

/// sqrt(n_energy^2 + n_runtime^2); inputs must lie in [0, 1].
double euclidean_distance(double n_energy, double n_runtime);

/// Evaluates both metrics for every task: SED against the baseline cell,
/// normalized energy/runtime across that task's caps, distance per cap.
std::vector<MetricSeries> compute_series(const ProfileMatrix& matrix);

/// Cap with the highest SED; ties break toward the lower cap.
CapSetting select_sed(const MetricSeries& series);
/// Cap with the lowest distance; ties break toward the lower cap.
CapSetting select_ed(const MetricSeries& series);

/// Signed percent change of candidate vs baseline. Rendering layers show
/// energy as positive "reduction" and runtime as positive "increase".
double percent_change(double candidate, double baseline);

std::vector<Recommendation> build_recommendations(const ProfileMatrix& matrix);

/// One projection per metric, summing energy-reduction and runtime-increase
/// percents over all recommendations.
std::vector<Projection> aggregate_projection(std::span<const Recommendation> recommendations);

}  // namespace capadvisor
