#include "capadvisor/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "capadvisor/util.hpp"

namespace capadvisor {

std::string_view metric_label(MetricKind metric) {
    return metric == MetricKind::Sed ? "sed" : "ed";
}

double speedup_energy_delay(double baseline_runtime_s, double baseline_energy_j,
                            double runtime_s, double energy_j) {
    if (baseline_runtime_s <= 0.0 || baseline_energy_j <= 0.0 || runtime_s <= 0.0 ||
        energy_j <= 0.0) {
        throw DomainError("speedup_energy_delay: runtime and energy must be positive");
    }
    return (baseline_runtime_s * baseline_energy_j) / (runtime_s * energy_j);
}

NormalizedSeries min_max_normalize(std::span<const double> values) {
    if (values.size() < 2) {
        throw DomainError("min_max_normalize: need at least 2 values");
    }
    auto [min_it, max_it] = std::minmax_element(values.begin(), values.end());
    NormalizedSeries result;
    result.values.reserve(values.size());
    if (*min_it == *max_it) {
        result.indifferent = true;
        result.values.assign(values.size(), 0.0);
        return result;
    }
    const double range = *max_it - *min_it;
    for (double value : values) {
        result.values.push_back((value - *min_it) / range);
    }
    return result;
}

double euclidean_distance(double n_energy, double n_runtime) {
    if (n_energy < 0.0 || n_energy > 1.0 || n_runtime < 0.0 || n_runtime > 1.0) {
        throw DomainError("euclidean_distance: inputs must lie in [0, 1]");
    }
    return std::sqrt(n_energy * n_energy + n_runtime * n_runtime);
}

std::vector<MetricSeries> compute_series(const ProfileMatrix& matrix) {
    auto baseline_idx = matrix.baseline_index();
    if (!baseline_idx) {
        throw DomainError("baseline cap " + format_int(matrix.baseline_cap().watts) +
                          " W is not in the matrix");
    }

    std::vector<MetricSeries> all;
    all.reserve(matrix.task_count());
    for (std::size_t t = 0; t < matrix.task_count(); ++t) {
        const std::string& task = matrix.tasks()[t];
        MetricSeries series;
        series.task = task;

        if (matrix.cap_count() == 1) {
            // Degenerate sweep: the baseline is the only candidate.
            const TaskProfile& only = matrix.cell(t, 0);
            if (only.total_runtime_s <= 0.0 || only.total_energy_j <= 0.0) {
                throw DomainError("zero-valued baseline cell for task '" + task + "'");
            }
            series.energy_indifferent = true;
            series.runtime_indifferent = true;
            series.points.push_back({task, only.cap, 1.0, 0.0, 0.0, 0.0});
            all.push_back(std::move(series));
            continue;
        }

        std::vector<double> runtimes;
        std::vector<double> energies;
        runtimes.reserve(matrix.cap_count());
        energies.reserve(matrix.cap_count());
        for (std::size_t c = 0; c < matrix.cap_count(); ++c) {
            const TaskProfile& cell = matrix.cell(t, c);  // absent cells throw here
            runtimes.push_back(cell.total_runtime_s);
            energies.push_back(cell.total_energy_j);
        }
        const double base_runtime = runtimes[*baseline_idx];
        const double base_energy = energies[*baseline_idx];
        if (base_runtime <= 0.0 || base_energy <= 0.0) {
            throw DomainError("zero-valued baseline cell for task '" + task + "'");
        }

        NormalizedSeries n_energy = min_max_normalize(energies);
        NormalizedSeries n_runtime = min_max_normalize(runtimes);
        series.energy_indifferent = n_energy.indifferent;
        series.runtime_indifferent = n_runtime.indifferent;

        for (std::size_t c = 0; c < matrix.cap_count(); ++c) {
            if (runtimes[c] <= 0.0 || energies[c] <= 0.0) {
                throw DomainError("non-positive cell for task '" + task + "' at " +
                                  format_int(matrix.caps()[c].watts) + " W");
            }
            MetricPoint point;
            point.task = task;
            point.cap = matrix.caps()[c];
            point.sed = speedup_energy_delay(base_runtime, base_energy, runtimes[c], energies[c]);
            point.n_energy = n_energy.values[c];
            point.n_runtime = n_runtime.values[c];
            point.distance = euclidean_distance(point.n_energy, point.n_runtime);
            series.points.push_back(std::move(point));
        }
        all.push_back(std::move(series));
    }
    return all;
}

CapSetting select_sed(const MetricSeries& series) {
    if (series.points.empty()) {
        throw DomainError("select_sed: empty metric series");
    }
    const MetricPoint* best = &series.points.front();
    for (const MetricPoint& point : series.points) {
        if (point.sed > best->sed ||
            (point.sed == best->sed && point.cap.watts < best->cap.watts)) {
            best = &point;
        }
    }
    return best->cap;
}

CapSetting select_ed(const MetricSeries& series) {
    if (series.points.empty()) {
        throw DomainError("select_ed: empty metric series");
    }
    const MetricPoint* best = &series.points.front();
    for (const MetricPoint& point : series.points) {
        if (point.distance < best->distance ||
            (point.distance == best->distance && point.cap.watts < best->cap.watts)) {
            best = &point;
        }
    }
    return best->cap;
}

double percent_change(double candidate, double baseline) {
    if (baseline <= 0.0) {
        throw DomainError("percent_change: baseline must be positive");
    }
    return (candidate - baseline) / baseline * 100.0;
}

std::vector<Recommendation> build_recommendations(const ProfileMatrix& matrix) {
    auto series = compute_series(matrix);
    std::vector<Recommendation> recommendations;
    recommendations.reserve(series.size());
    for (const MetricSeries& s : series) {
        const TaskProfile* baseline = matrix.find_cell(s.task, matrix.baseline_cap());
        if (!baseline) {
            throw DomainError("missing baseline cell for task '" + s.task + "'");
        }
        Recommendation rec;
        rec.task = s.task;
        rec.sed_cap = select_sed(s);
        rec.ed_cap = select_ed(s);
        const TaskProfile* sed_cell = matrix.find_cell(s.task, rec.sed_cap);
        const TaskProfile* ed_cell = matrix.find_cell(s.task, rec.ed_cap);
        rec.sed_energy_pct = percent_change(sed_cell->total_energy_j, baseline->total_energy_j);
        rec.sed_runtime_pct =
            percent_change(sed_cell->total_runtime_s, baseline->total_runtime_s);
        rec.ed_energy_pct = percent_change(ed_cell->total_energy_j, baseline->total_energy_j);
        rec.ed_runtime_pct = percent_change(ed_cell->total_runtime_s, baseline->total_runtime_s);
        recommendations.push_back(std::move(rec));
    }
    return recommendations;
}

std::vector<Projection> aggregate_projection(std::span<const Recommendation> recommendations) {
    if (recommendations.empty()) {
        throw DomainError("aggregate_projection: no recommendations");
    }
    Projection sed{MetricKind::Sed, 0.0, 0.0};
    Projection ed{MetricKind::Ed, 0.0, 0.0};
    for (const Recommendation& rec : recommendations) {
        sed.energy_reduction_pct_sum += -rec.sed_energy_pct;
        sed.runtime_increase_pct_sum += rec.sed_runtime_pct;
        ed.energy_reduction_pct_sum += -rec.ed_energy_pct;
        ed.runtime_increase_pct_sum += rec.ed_runtime_pct;
    }
    return {sed, ed};
}

}  // namespace capadvisor
