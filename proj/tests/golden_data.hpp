#pragma once

#include <cstdint>

// Frozen golden data: GH200/LSMS kernel measurements at the 1,000 W default
// cap, and the per-task cap selections with their published percent changes.
// Percent values follow the reduction/increase sign convention (energy
// positive = reduced, runtime positive = increased).
namespace golden {

struct BaselineRow {
    const char* task;
    double total_time_s;
    std::int64_t calls;
    double total_energy_j;
    double avg_power_w;
};

inline constexpr BaselineRow kBaselineRows[] = {
    {"sm90_gemm_ts64x64x32", 77.89, 21632, 35361.83, 454.02},
    {"buildKKRMatrix", 34.90, 128, 12867.73, 368.74},
    {"sm90_gemm_ts32x32x32", 8.03, 94208, 4076.98, 507.51},
    {"getrf_pivot(1)", 4.07, 16384, 2694.54, 662.05},
    {"getrf_pivot(2)", 4.07, 30720, 2670.36, 656.11},
    {"trsm_left_kernel", 3.57, 150272, 2328.26, 651.57},
    {"getrf_pivot(3)", 1.82, 8192, 1146.70, 630.06},
    {"gpu compute idle", 8.83, 601345, 2425.49, 274.80},
};

inline constexpr int kBaselineCapW = 1000;

struct SelectionRow {
    const char* task;
    int sed_cap_w;
    int ed_cap_w;
    double sed_energy_reduction_pct;
    double ed_energy_reduction_pct;
    double sed_runtime_increase_pct;
    double ed_runtime_increase_pct;
};

inline constexpr SelectionRow kSelectionRows[] = {
    {"sm90_gemm_ts64x64x32", 900, 600, 0.85, 3.42, 0.00, 10.3},
    {"buildKKRMatrix", 300, 300, 22.92, 22.92, 11.30, 11.30},
    {"sm90_gemm_ts32x32x32", 400, 400, 31.40, 31.40, 28.42, 28.42},
    {"getrf_pivot(1)", 500, 400, 20.61, 28.50, 19.16, 37.67},
    {"getrf_pivot(2)", 600, 400, 10.05, 24.48, 7.37, 38.41},
    {"trsm_left_kernel", 600, 400, 9.02, 25.53, 7.74, 36.85},
    {"getrf_pivot(3)", 600, 400, 9.10, 24.15, 6.59, 38.46},
    {"gpu compute idle", 200, 300, 46.58, 39.69, 9.25, 1.17},
};

// Column sums of kSelectionRows.
inline constexpr double kSedEnergyReductionSum = 150.53;
inline constexpr double kSedRuntimeIncreaseSum = 89.83;
inline constexpr double kEdEnergyReductionSum = 200.09;
inline constexpr double kEdRuntimeIncreaseSum = 202.58;

}  // namespace golden
