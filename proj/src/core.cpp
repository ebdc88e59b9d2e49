#include "capadvisor/core.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "capadvisor/util.hpp"

namespace capadvisor {

std::string_view component_label(Component component) {
    switch (component) {
        case Component::Superchip: return "superchip";
        case Component::Cpu: return "cpu";
        case Component::Gpu: return "gpu";
    }
    return "superchip";
}

std::optional<Component> component_from_label(std::string_view label) {
    if (label == "superchip") return Component::Superchip;
    if (label == "cpu") return Component::Cpu;
    if (label == "gpu") return Component::Gpu;
    return std::nullopt;
}

ProfileMatrix::ProfileMatrix(std::vector<std::string> tasks, std::vector<CapSetting> caps,
                             std::vector<TaskProfile> cells, CapSetting baseline_cap)
    : tasks_(std::move(tasks)),
      caps_(std::move(caps)),
      cells_(std::move(cells)),
      baseline_cap_(baseline_cap) {
    if (cells_.size() != tasks_.size() * caps_.size()) {
        throw DomainError("profile matrix: cell count does not match tasks x caps grid");
    }
    for (std::size_t t = 0; t < tasks_.size(); ++t) {
        for (std::size_t c = 0; c < caps_.size(); ++c) {
            const TaskProfile& cell = cells_[t * caps_.size() + c];
            if (cell.task != tasks_[t] || cell.cap != caps_[c]) {
                throw DomainError("profile matrix: cell (" + cell.task + ", " +
                                  format_int(cell.cap.watts) + " W) placed at grid position (" +
                                  tasks_[t] + ", " + format_int(caps_[c].watts) + " W)");
            }
        }
    }
    present_.assign(cells_.size(), 1);
}

ProfileMatrix ProfileMatrix::from_cells(std::vector<TaskProfile> cells,
                                        std::optional<CapSetting> baseline) {
    ProfileMatrix matrix;
    for (const TaskProfile& cell : cells) {
        if (!matrix.task_index(cell.task)) {
            matrix.tasks_.push_back(cell.task);
        }
        if (!matrix.cap_index(cell.cap)) {
            matrix.caps_.push_back(cell.cap);
        }
    }
    matrix.cells_.assign(matrix.tasks_.size() * matrix.caps_.size(), TaskProfile{});
    matrix.present_.assign(matrix.cells_.size(), 0);
    for (TaskProfile& cell : cells) {
        std::size_t t = *matrix.task_index(cell.task);
        std::size_t c = *matrix.cap_index(cell.cap);
        std::size_t slot = t * matrix.caps_.size() + c;
        if (matrix.present_[slot]) {
            throw DomainError("duplicate cell (" + cell.task + ", " +
                              format_int(cell.cap.watts) + " W)");
        }
        matrix.cells_[slot] = std::move(cell);
        matrix.present_[slot] = 1;
    }
    if (baseline) {
        matrix.baseline_cap_ = *baseline;
    } else if (!matrix.caps_.empty()) {
        matrix.baseline_cap_ = *std::max_element(matrix.caps_.begin(), matrix.caps_.end());
    }
    return matrix;
}

std::optional<std::size_t> ProfileMatrix::task_index(std::string_view task) const {
    for (std::size_t i = 0; i < tasks_.size(); ++i) {
        if (tasks_[i] == task) {
            return i;
        }
    }
    return std::nullopt;
}

std::optional<std::size_t> ProfileMatrix::cap_index(CapSetting cap) const {
    for (std::size_t i = 0; i < caps_.size(); ++i) {
        if (caps_[i] == cap) {
            return i;
        }
    }
    return std::nullopt;
}

bool ProfileMatrix::has_cell(std::size_t task_idx, std::size_t cap_idx) const {
    return present_[task_idx * caps_.size() + cap_idx] != 0;
}

const TaskProfile& ProfileMatrix::cell(std::size_t task_idx, std::size_t cap_idx) const {
    std::size_t slot = task_idx * caps_.size() + cap_idx;
    if (!present_[slot]) {
        throw DomainError("missing cell (" + tasks_[task_idx] + ", " +
                          format_int(caps_[cap_idx].watts) + " W)");
    }
    return cells_[slot];
}

const TaskProfile* ProfileMatrix::find_cell(std::string_view task, CapSetting cap) const {
    auto t = task_index(task);
    auto c = cap_index(cap);
    if (!t || !c || !has_cell(*t, *c)) {
        return nullptr;
    }
    return &cells_[*t * caps_.size() + *c];
}

ProfileMatrix ProfileMatrix::with_baseline(CapSetting cap) const {
    if (!cap_index(cap)) {
        throw DomainError("baseline cap " + format_int(cap.watts) +
                          " W is not one of the matrix caps");
    }
    ProfileMatrix copy = *this;
    copy.baseline_cap_ = cap;
    return copy;
}

std::size_t ValidationReport::error_count() const {
    std::size_t n = 0;
    for (const Violation& v : violations) {
        if (v.severity == Violation::Severity::Error) {
            ++n;
        }
    }
    return n;
}

std::size_t ValidationReport::warning_count() const {
    return violations.size() - error_count();
}

namespace {

bool is_zero_filled(const TaskProfile& cell) {
    return cell.total_runtime_s == 0.0 && cell.total_energy_j == 0.0 && cell.call_count == 0 &&
           cell.avg_power_w == 0.0;
}

}  // namespace

ValidationReport validate_matrix(const ProfileMatrix& matrix) {
    ValidationReport report;
    auto add = [&](Violation::Severity severity, std::string task, CapSetting cap,
                   std::string message) {
        report.violations.push_back(
            {severity, std::move(task), cap, std::move(message)});
    };

    if (!matrix.cap_index(matrix.baseline_cap())) {
        add(Violation::Severity::Error, {}, matrix.baseline_cap(),
            "baseline cap " + format_int(matrix.baseline_cap().watts) +
                " W is not in the matrix cap list");
    }
    for (CapSetting cap : matrix.caps()) {
        if (cap.watts <= 0) {
            add(Violation::Severity::Error, {}, cap,
                "cap must be a positive wattage, got " + format_int(cap.watts));
        }
    }

    for (std::size_t t = 0; t < matrix.task_count(); ++t) {
        const std::string& task = matrix.tasks()[t];
        for (std::size_t c = 0; c < matrix.cap_count(); ++c) {
            CapSetting cap = matrix.caps()[c];
            if (!matrix.has_cell(t, c)) {
                ++report.missing_or_empty_cells;
                add(Violation::Severity::Error, task, cap,
                    "missing cell (" + task + ", " + format_int(cap.watts) + " W)");
                continue;
            }
            const TaskProfile& cell = matrix.cell(t, c);
            if (cell.total_runtime_s < 0.0) {
                add(Violation::Severity::Error, task, cap,
                    "negative total_runtime " + format_double(cell.total_runtime_s) + " s");
            }
            if (cell.total_energy_j < 0.0) {
                add(Violation::Severity::Error, task, cap,
                    "negative total_energy " + format_double(cell.total_energy_j) + " J");
            }
            if (cell.call_count < 0) {
                add(Violation::Severity::Error, task, cap,
                    "negative call_count " + format_int(cell.call_count));
            }
            if (is_zero_filled(cell)) {
                ++report.missing_or_empty_cells;
                add(Violation::Severity::Warning, task, cap,
                    "empty cell (task absent at this cap)");
                continue;
            }
            if (cell.total_runtime_s > 0.0) {
                double true_ratio = cell.total_energy_j / cell.total_runtime_s;
                if (cell.avg_power_w <= 0.0) {
                    if (cell.total_energy_j > 0.0) {
                        add(Violation::Severity::Error, task, cap,
                            "avg power inconsistent: stored " + format_double(cell.avg_power_w) +
                                " W, true ratio " + format_double(true_ratio) + " W");
                    }
                } else if (std::abs(cell.avg_power_w - true_ratio) / cell.avg_power_w >
                           kAvgPowerTolerance) {
                    add(Violation::Severity::Error, task, cap,
                        "avg power inconsistent: stored " + format_double(cell.avg_power_w) +
                            " W, true ratio " + format_double(true_ratio) + " W");
                }
            } else if (cell.total_energy_j > 0.0) {
                add(Violation::Severity::Warning, task, cap,
                    "cell has energy but zero runtime");
            }
        }
    }
    return report;
}

}  // namespace capadvisor
