#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "capadvisor/ingest.hpp"
#include "capadvisor/metrics.hpp"
#include "capadvisor/sim.hpp"
#include "test_support.hpp"

using namespace capadvisor;

namespace {

ChipSpec test_chip() {
    ChipSpec chip;
    chip.gpu_idle_power_w = 50.0;
    chip.cpu_power_w = 70.0;
    chip.cpu_burst_power_w = 120.0;
    chip.alpha = 2.5;
    chip.min_frequency_ratio = 0.1;
    return chip;
}

TaskSpec task(const std::string& name, double base_s, double intensity, double peak_w,
              int invocations = 1, std::int64_t gap_ns = 0) {
    return {name, base_s, intensity, peak_w, invocations, gap_ns};
}

}  // namespace

TEST_CASE("effective_frequency stays at full clock when the budget covers the peak") {
    ChipSpec chip = test_chip();
    CHECK(effective_frequency(1000.0, chip, task("gemm", 0.1, 1.0, 454.0)) == 1.0);
    // Boundary: budget exactly equal to the peak draw.
    CHECK(effective_frequency(524.0, chip, task("gemm", 0.1, 1.0, 454.0)) == 1.0);
}

TEST_CASE("effective_frequency inverts the power model on the capped branch") {
    ChipSpec chip = test_chip();
    TaskSpec t = task("k", 0.1, 1.0, 450.0);
    // Budget 250 W: f = ((250-50)/(450-50))^(1/2.5) = 0.5^0.4.
    double f = effective_frequency(320.0, chip, t);
    CHECK(f == doctest::Approx(std::pow(0.5, 0.4)).epsilon(1e-12));
    CHECK(model_power(f, chip, t) == doctest::Approx(250.0).epsilon(1e-12));
}

TEST_CASE("effective_frequency clamps to the frequency floor") {
    ChipSpec chip = test_chip();
    TaskSpec t = task("k", 0.1, 1.0, 450.0);
    // Budget barely above the CPU demand; inversion lands far below f_min.
    CHECK(effective_frequency(121.0, chip, t) == chip.min_frequency_ratio);

    // With the floor binding, the cap still limits the emitted power.
    OperatingPoint op = operating_point(121.0, chip, t);
    CHECK(op.frequency_ratio == chip.min_frequency_ratio);
    CHECK(op.gpu_power_w == doctest::Approx(51.0).epsilon(1e-12));
    CHECK(op.gpu_power_w < model_power(chip.min_frequency_ratio, chip, t));
}

TEST_CASE("an infeasible cap names the CPU demand") {
    ChipSpec chip = test_chip();
    CHECK_THROWS_WITH_AS(effective_frequency(60.0, chip, task("k", 0.1, 1.0, 450.0)),
                         doctest::Contains("70"), InfeasibleCapError);
    CHECK_THROWS_AS(effective_frequency(70.0, chip, task("k", 0.1, 1.0, 450.0)),
                    InfeasibleCapError);
}

TEST_CASE("model_power endpoints and linear special case") {
    ChipSpec chip = test_chip();
    TaskSpec t = task("k", 0.1, 1.0, 450.0);
    CHECK(model_power(1.0, chip, t) == 450.0);
    ChipSpec linear = chip;
    linear.alpha = 1.0;
    CHECK(model_power(0.3, linear, t) == doctest::Approx(50.0 + 400.0 * 0.3).epsilon(1e-15));
}

TEST_CASE("model_power is strictly increasing in frequency") {
    ChipSpec chip = test_chip();
    TaskSpec t = task("k", 0.1, 1.0, 450.0);
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> freq(0.05, 1.0);
    for (int i = 0; i < 200; ++i) {
        double f1 = freq(rng);
        double f2 = freq(rng);
        if (f1 == f2) {
            continue;
        }
        if (f1 > f2) {
            std::swap(f1, f2);
        }
        CHECK(model_power(f1, chip, t) < model_power(f2, chip, t));
    }
}

TEST_CASE("model_runtime scales the compute-bound share only") {
    CHECK(model_runtime(2.0, 1.0, 0.5) == 4.0);
    CHECK(model_runtime(2.0, 0.0, 0.25) == 2.0);
    CHECK(model_runtime(2.0, 0.5, 0.5) == 3.0);
    CHECK_THROWS_AS(model_runtime(2.0, 0.5, 0.0), DomainError);
}

TEST_CASE("model_runtime is non-increasing in f, strictly when compute-bound") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> freq(0.1, 1.0);
    for (int i = 0; i < 200; ++i) {
        double f1 = freq(rng);
        double f2 = freq(rng);
        if (f1 > f2) {
            std::swap(f1, f2);
        }
        CHECK(model_runtime(1.0, 0.7, f1) >= model_runtime(1.0, 0.7, f2));
        if (f1 < f2) {
            CHECK(model_runtime(1.0, 0.7, f1) > model_runtime(1.0, 0.7, f2));
            CHECK(model_runtime(1.0, 0.0, f1) == model_runtime(1.0, 0.0, f2));
        }
    }
}

TEST_CASE("round trip: frequency -> power -> frequency on the capped branch") {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> idle(0.0, 120.0);
    std::uniform_real_distribution<double> span(50.0, 600.0);
    std::uniform_real_distribution<double> alpha(1.0, 4.0);
    std::uniform_real_distribution<double> budget_frac(0.05, 0.95);
    for (int i = 0; i < 500; ++i) {
        ChipSpec chip = test_chip();
        chip.gpu_idle_power_w = idle(rng);
        chip.alpha = alpha(rng);
        chip.min_frequency_ratio = 1e-6;  // keep the floor out of the way
        TaskSpec t = task("k", 0.1, 1.0, chip.gpu_idle_power_w + span(rng));
        double budget = chip.gpu_idle_power_w +
                        budget_frac(rng) * (t.peak_power_w - chip.gpu_idle_power_w);
        double cap = budget + chip.cpu_power_w;
        double f = effective_frequency(cap, chip, t);
        CHECK(model_power(f, chip, t) == doctest::Approx(budget).epsilon(1e-9));
    }
}

TEST_CASE("with zero idle power, compute-bound energy rises with frequency") {
    ChipSpec chip = test_chip();
    chip.gpu_idle_power_w = 0.0;
    TaskSpec t = task("k", 1.0, 1.0, 400.0);
    double previous = -1.0;
    for (double f = 0.1; f <= 1.0; f += 0.05) {
        double energy = model_power(f, chip, t) * model_runtime(t.base_runtime_s, 1.0, f);
        CHECK(energy > previous);
        previous = energy;
    }

    // Hence the minimum-energy cap is the lowest feasible one.
    std::vector<CapSetting> caps;
    for (int cap = 200; cap <= 1000; cap += 100) {
        caps.push_back({cap});
    }
    ProfileMatrix oracle = oracle_profiles(std::vector<TaskSpec>{t}, chip, caps);
    double best_energy = 1e300;
    CapSetting best_cap;
    for (std::size_t c = 0; c < oracle.cap_count(); ++c) {
        const TaskProfile& cell = oracle.cell(0, c);
        if (cell.total_energy_j < best_energy) {
            best_energy = cell.total_energy_j;
            best_cap = cell.cap;
        }
    }
    CHECK(best_cap.watts == 200);
}

TEST_CASE("synthesized constant-power task integrates to power times runtime") {
    ChipSpec chip = test_chip();
    std::vector<TaskSpec> workload{task("k", 0.25, 1.0, 450.0, 3, 20000000)};
    RunRecord run = synthesize_run(workload, chip, {1000}, 5.0, {1, 0.0}, "r0");
    PowerStream gpu = run_gpu_stream(run);
    for (const TaskInterval& interval : run.intervals) {
        double energy = integrate_energy(gpu, interval);
        double seconds = static_cast<double>(interval.end_ns - interval.start_ns) * 1e-9;
        CHECK(energy == doctest::Approx(450.0 * seconds).epsilon(1e-8));
    }
}

TEST_CASE("a deeper cap slows a compute-bound task more") {
    ChipSpec chip = test_chip();
    std::vector<TaskSpec> workload{task("k", 0.1, 1.0, 800.0)};
    RunRecord deep = synthesize_run(workload, chip, {300}, 5.0, {1, 0.0}, "a");
    RunRecord shallow = synthesize_run(workload, chip, {600}, 5.0, {1, 0.0}, "b");
    std::int64_t deep_ns = deep.intervals[0].end_ns - deep.intervals[0].start_ns;
    std::int64_t shallow_ns = shallow.intervals[0].end_ns - shallow.intervals[0].start_ns;
    CHECK(deep_ns > shallow_ns);
}

TEST_CASE("identical seeds produce identical runs, different seeds differ") {
    ChipSpec chip = test_chip();
    std::vector<TaskSpec> workload{task("k", 0.05, 0.8, 450.0, 2, 10000000)};
    RunRecord a = synthesize_run(workload, chip, {400}, 5.0, {42, 0.05}, "r");
    RunRecord b = synthesize_run(workload, chip, {400}, 5.0, {42, 0.05}, "r");
    RunRecord c = synthesize_run(workload, chip, {400}, 5.0, {43, 0.05}, "r");

    REQUIRE(a.samples.superchip.size() == b.samples.superchip.size());
    bool all_equal = true;
    for (std::size_t i = 0; i < a.samples.superchip.size(); ++i) {
        all_equal = all_equal &&
                    a.samples.superchip[i].power_w == b.samples.superchip[i].power_w &&
                    a.samples.cpu[i].power_w == b.samples.cpu[i].power_w;
    }
    CHECK(all_equal);

    bool any_differs = false;
    for (std::size_t i = 0; i < a.samples.superchip.size(); ++i) {
        any_differs = any_differs ||
                      a.samples.superchip[i].power_w != c.samples.superchip[i].power_w;
    }
    CHECK(any_differs);
}

TEST_CASE("emitted CPU plus GPU power never exceeds the cap at sigma zero") {
    ChipSpec chip = test_chip();
    std::vector<TaskSpec> workload{
        task("heavy", 0.08, 1.0, 900.0, 2, 5000000),
        task("light", 0.05, 0.2, 300.0, 2, 0),
    };
    for (int cap = 200; cap <= 1000; cap += 200) {
        RunRecord run = synthesize_run(workload, chip, {cap}, 5.0, {9, 0.0}, "r");
        for (const PowerSample& sample : run.samples.superchip) {
            CHECK(sample.power_w <= cap * (1.0 + 1e-12));
        }
    }
}

TEST_CASE("sampled timestamps are strictly increasing and cover the span") {
    ChipSpec chip = test_chip();
    std::vector<TaskSpec> workload{task("k", 0.0123, 0.9, 450.0, 7, 3300000)};
    RunRecord run = synthesize_run(workload, chip, {500}, 5.0, {3, 0.0}, "r");
    REQUIRE(!run.samples.superchip.empty());
    CHECK(run.samples.superchip.front().timestamp_ns == 0);
    CHECK(run.samples.superchip.back().timestamp_ns == run.span_end_ns);
    for (std::size_t i = 1; i < run.samples.superchip.size(); ++i) {
        CHECK(run.samples.superchip[i].timestamp_ns >
              run.samples.superchip[i - 1].timestamp_ns);
    }
    // Round-robin: 7 invocations and 7 trailing gaps.
    CHECK(run.intervals.size() == 7);
    CHECK(run.span_end_ns == 7 * (std::llround(model_runtime(0.0123, 0.9,
                                                             effective_frequency(500, chip,
                                                                                 workload[0])) *
                                               1e9) +
                                  3300000));
}

TEST_CASE("oracle profiles agree with an ingested noise-free sweep") {
    ChipSpec chip = test_chip();
    std::vector<TaskSpec> workload{
        task("compute", 0.06, 0.95, 520.0, 3, 4000000),
        task("memory", 0.04, 0.1, 380.0, 3, 6000000),
    };
    std::vector<CapSetting> caps{{250}, {450}, {1000}};

    ExperimentManifest manifest;
    manifest.caps = caps;
    manifest.runs_per_cap = 1;
    manifest.sample_period_ms = 5.0;
    std::vector<RunRecord> runs;
    for (CapSetting cap : caps) {
        RunRecord run = synthesize_run(workload, chip, cap, 5.0, {0, 0.0},
                                       "cap" + std::to_string(cap.watts) + "_run0");
        append_idle_intervals(run);
        runs.push_back(std::move(run));
    }
    ProfileMatrix ingested = build_matrix(manifest, runs);
    ProfileMatrix oracle = oracle_profiles(workload, chip, caps);

    REQUIRE(ingested.task_count() == oracle.task_count());
    for (std::size_t t = 0; t < oracle.task_count(); ++t) {
        auto ti = ingested.task_index(oracle.tasks()[t]);
        REQUIRE(ti.has_value());
        for (std::size_t c = 0; c < oracle.cap_count(); ++c) {
            const TaskProfile& expected = oracle.cell(t, c);
            const TaskProfile& actual = ingested.cell(*ti, c);
            CHECK(actual.total_runtime_s ==
                  doctest::Approx(expected.total_runtime_s).epsilon(0.005));
            CHECK(actual.total_energy_j ==
                  doctest::Approx(expected.total_energy_j).epsilon(0.005));
            CHECK(actual.call_count == expected.call_count);
        }
    }
}

TEST_CASE("oracle selections put the compute-bound task at or above the memory-bound cap") {
    ChipSpec chip = test_chip();
    std::vector<TaskSpec> workload{
        task("membound", 0.05, 0.05, 420.0, 2),
        task("computebound", 0.05, 0.95, 470.0, 2),
    };
    std::vector<CapSetting> caps;
    for (int cap = 200; cap <= 1000; cap += 100) {
        caps.push_back({cap});
    }
    ProfileMatrix oracle = oracle_profiles(workload, chip, caps);
    auto series = compute_series(oracle);
    CapSetting memory_cap;
    CapSetting compute_cap;
    for (const MetricSeries& s : series) {
        if (s.task == "membound") {
            memory_cap = select_sed(s);
        } else if (s.task == "computebound") {
            compute_cap = select_sed(s);
        }
    }
    CHECK(compute_cap.watts >= memory_cap.watts);
}

TEST_CASE("a single-cap oracle is a one-column matrix at the modeled operating point") {
    ChipSpec chip = test_chip();
    TaskSpec t = task("k", 0.1, 0.8, 450.0, 5, 0);
    std::vector<CapSetting> caps{{320}};
    ProfileMatrix oracle = oracle_profiles(std::vector<TaskSpec>{t}, chip, caps);
    CHECK(oracle.cap_count() == 1);
    CHECK(oracle.task_count() == 1);
    CHECK(oracle.baseline_cap().watts == 320);
    double f = effective_frequency(320.0, chip, t);
    const TaskProfile& cell = oracle.cell(0, 0);
    CHECK(cell.total_runtime_s ==
          doctest::Approx(5.0 * model_runtime(0.1, 0.8, f)).epsilon(1e-12));
    CHECK(cell.total_energy_j ==
          doctest::Approx(5.0 * model_power(f, chip, t) * model_runtime(0.1, 0.8, f))
              .epsilon(1e-12));

    // A memory-bound task's runtime is cap-invariant in the oracle.
    TaskSpec mem = task("m", 0.1, 0.0, 450.0, 1, 0);
    std::vector<CapSetting> sweep{{200}, {500}, {1000}};
    ProfileMatrix mem_oracle = oracle_profiles(std::vector<TaskSpec>{mem}, chip, sweep);
    for (std::size_t c = 1; c < mem_oracle.cap_count(); ++c) {
        CHECK(mem_oracle.cell(0, c).total_runtime_s == mem_oracle.cell(0, 0).total_runtime_s);
    }
}

TEST_CASE("oracle emits the idle row only when the workload has gaps") {
    ChipSpec chip = test_chip();
    std::vector<CapSetting> caps{{400}, {1000}};
    ProfileMatrix with_gaps =
        oracle_profiles(std::vector<TaskSpec>{task("k", 0.05, 1.0, 450.0, 4, 1000000)}, chip,
                        caps);
    CHECK(with_gaps.task_index(kIdleTaskName).has_value());
    const TaskProfile* idle = with_gaps.find_cell(kIdleTaskName, {400});
    REQUIRE(idle != nullptr);
    CHECK(idle->total_runtime_s == doctest::Approx(0.004).epsilon(1e-12));
    CHECK(idle->total_energy_j == doctest::Approx(0.004 * 50.0).epsilon(1e-12));
    CHECK(idle->call_count == 4);

    ProfileMatrix no_gaps =
        oracle_profiles(std::vector<TaskSpec>{task("k", 0.05, 1.0, 450.0, 4, 0)}, chip, caps);
    CHECK(!no_gaps.task_index(kIdleTaskName).has_value());
}

TEST_CASE("workload JSON parses with defaults and validates fields") {
    std::istringstream good(R"({
      "chip": {"gpu_idle_power_w": 40, "cpu_power_w": 60},
      "tasks": [
        {"name": "a", "base_runtime_s": 0.1, "compute_intensity": 0.5, "peak_power_w": 300}
      ]
    })");
    WorkloadSpec spec = parse_workload(good);
    CHECK(spec.chip.alpha == 2.5);
    CHECK(spec.chip.min_frequency_ratio == 0.1);
    CHECK(spec.chip.cpu_burst_power_w == 60.0);
    REQUIRE(spec.tasks.size() == 1);
    CHECK(spec.tasks[0].invocations == 1);
    CHECK(spec.tasks[0].gap_ns == 0);

    std::istringstream bad_intensity(R"({
      "chip": {"gpu_idle_power_w": 40, "cpu_power_w": 60},
      "tasks": [{"name": "a", "base_runtime_s": 0.1, "compute_intensity": 1.5,
                 "peak_power_w": 300}]
    })");
    CHECK_THROWS_AS(parse_workload(bad_intensity), ParseError);

    std::istringstream peak_below_idle(R"({
      "chip": {"gpu_idle_power_w": 400, "cpu_power_w": 60},
      "tasks": [{"name": "a", "base_runtime_s": 0.1, "compute_intensity": 0.5,
                 "peak_power_w": 300}]
    })");
    CHECK_THROWS_AS(parse_workload(peak_below_idle), ParseError);

    std::istringstream reserved_name(R"({
      "chip": {"gpu_idle_power_w": 40, "cpu_power_w": 60},
      "tasks": [{"name": "gpu compute idle", "base_runtime_s": 0.1,
                 "compute_intensity": 0.5, "peak_power_w": 300}]
    })");
    CHECK_THROWS_AS(parse_workload(reserved_name), ParseError);

    std::istringstream no_tasks(R"({
      "chip": {"gpu_idle_power_w": 40, "cpu_power_w": 60}, "tasks": []
    })");
    CHECK_THROWS_AS(parse_workload(no_tasks), ParseError);
}

TEST_CASE("synthesize_sweep writes traces and a loadable manifest") {
    test_support::TempDir dir("sweep");
    WorkloadSpec workload;
    workload.chip = test_chip();
    workload.tasks = {task("a", 0.02, 1.0, 450.0, 2, 1000000),
                      task("b", 0.01, 0.3, 350.0, 2, 0)};
    std::vector<CapSetting> caps{{300}, {1000}};
    ExperimentManifest manifest = synthesize_sweep(workload, caps, 2, 11, 5.0, 0.0, dir.path());
    CHECK(manifest.traces.size() == 4);
    CHECK(std::filesystem::exists(dir.path() / "manifest.json"));
    CHECK(std::filesystem::exists(dir.path() / "cap300_run0_power.csv"));
    CHECK(std::filesystem::exists(dir.path() / "cap1000_run1_intervals.csv"));

    ExperimentManifest reloaded = load_manifest(dir.path() / "manifest.json");
    CHECK(reloaded.caps.size() == 2);
    std::vector<RunRecord> runs = load_experiment(reloaded);
    ProfileMatrix matrix = build_matrix(reloaded, runs);
    CHECK(validate_matrix(matrix).ok());
    CHECK(matrix.task_index("a").has_value());
    CHECK(matrix.task_index(kIdleTaskName).has_value());
}

TEST_CASE("synthesize_sweep rejects an infeasible cap before writing anything") {
    test_support::TempDir dir("infeasible");
    WorkloadSpec workload;
    workload.chip = test_chip();
    workload.tasks = {task("a", 0.02, 1.0, 450.0)};
    std::vector<CapSetting> caps{{60}};
    CHECK_THROWS_AS(synthesize_sweep(workload, caps, 1, 1, 5.0, 0.0, dir.path() / "out"),
                    InfeasibleCapError);
    CHECK(!std::filesystem::exists(dir.path() / "out" / "manifest.json"));
}
