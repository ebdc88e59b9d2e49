// capadvisor: turn per-power-cap GPU traces into per-task power-cap
// recommendations, or synthesize verifiable traces from a DVFS model.
//
// Exit codes: 0 success, 1 I/O or input error, 2 validation failure.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "capadvisor/core.hpp"
#include "capadvisor/ingest.hpp"
#include "capadvisor/metrics.hpp"
#include "capadvisor/report.hpp"
#include "capadvisor/sim.hpp"
#include "capadvisor/util.hpp"

namespace {

using namespace capadvisor;

std::vector<CapSetting> parse_caps_list(const std::string& text) {
    std::vector<CapSetting> caps;
    for (std::string_view field : split_csv(text)) {
        caps.push_back({static_cast<int>(parse_int(field, "cap"))});
        if (caps.back().watts <= 0) {
            throw ParseError("caps must be positive wattages, got '" + std::string(field) + "'");
        }
    }
    return caps;
}

void print_validation(const ValidationReport& report) {
    for (const Violation& violation : report.violations) {
        std::cerr << (violation.severity == Violation::Severity::Error ? "error: " : "warning: ")
                  << violation.message << '\n';
    }
    std::cout << "validation: " << report.error_count() << " error(s), "
              << report.warning_count() << " warning(s)\n";
}

int cmd_ingest(const std::string& manifest_path, const std::string& out_path) {
    ExperimentManifest manifest = load_manifest(manifest_path);
    std::vector<RunRecord> runs = load_experiment(manifest);
    ProfileMatrix matrix = build_matrix(manifest, runs);
    ValidationReport report = validate_matrix(matrix);
    save_matrix_csv(out_path, matrix);
    print_validation(report);
    std::cout << "wrote " << out_path << " (" << matrix.task_count() << " tasks x "
              << matrix.cap_count() << " caps, baseline " << matrix.baseline_cap().watts
              << " W)\n";
    return report.ok() ? 0 : 2;
}

int cmd_analyze(const std::string& matrix_path, const std::string& out_dir,
                const std::string& metric, int baseline_cap_w) {
    ReportOptions options;
    if (metric == "sed") {
        options.metric = MetricFilter::Sed;
    } else if (metric == "ed") {
        options.metric = MetricFilter::Ed;
    } else if (metric == "both") {
        options.metric = MetricFilter::Both;
    } else {
        throw ParseError("unknown metric '" + metric + "' (expected sed, ed or both)");
    }

    ProfileMatrix matrix = load_matrix_csv(matrix_path);
    if (baseline_cap_w > 0) {
        if (!matrix.cap_index({baseline_cap_w})) {
            throw ParseError("--baseline-cap " + format_int(baseline_cap_w) +
                             " is not a cap of the matrix");
        }
        options.baseline_cap = CapSetting{baseline_cap_w};
        matrix = matrix.with_baseline(*options.baseline_cap);
    }

    ValidationReport report = validate_matrix(matrix);
    print_validation(report);
    if (!report.ok() || !report.complete()) {
        std::cerr << "matrix failed validation; no report written\n";
        return 2;
    }

    ReportBundle bundle = build_report(matrix, options);
    write_report_files(bundle, options, out_dir);
    std::cout << render_comparison_text(bundle, options.metric);
    std::cout << "reports written to " << out_dir << '\n';
    return 0;
}

int cmd_simulate(const std::string& spec_path, const std::string& caps_text, int runs,
                 std::uint64_t seed, const std::string& out_dir, double sample_period_ms,
                 double noise_sigma) {
    WorkloadSpec workload = load_workload(spec_path);
    std::vector<CapSetting> caps = parse_caps_list(caps_text);
    ExperimentManifest manifest =
        synthesize_sweep(workload, caps, runs, seed, sample_period_ms, noise_sigma, out_dir);
    std::cout << "wrote " << manifest.traces.size() << " trace pairs and manifest.json to "
              << out_dir << '\n';
    return 0;
}

int cmd_oracle(const std::string& spec_path, const std::string& caps_text,
               const std::string& out_path) {
    WorkloadSpec workload = load_workload(spec_path);
    std::vector<CapSetting> caps = parse_caps_list(caps_text);
    ProfileMatrix matrix = oracle_profiles(workload.tasks, workload.chip, caps);
    save_matrix_csv(out_path, matrix);
    std::cout << "wrote " << out_path << " (" << matrix.task_count() << " tasks x "
              << matrix.cap_count() << " caps)\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"GPU power-cap advisor: trace ingestion, decision metrics and a DVFS "
                 "power-steering trace synthesizer.\n"
                 "CAPADVISOR_THREADS bounds internal parallelism (0 = auto)."};
    app.require_subcommand(1);

    std::string manifest_path;
    std::string matrix_out;
    auto* ingest = app.add_subcommand("ingest", "Build a profile matrix from trace files");
    ingest->add_option("--manifest", manifest_path, "experiment manifest (JSON)")->required();
    ingest->add_option("--out", matrix_out, "output matrix CSV path")->required();

    std::string matrix_path;
    std::string report_dir;
    std::string metric = "both";
    int baseline_cap_w = 0;
    auto* analyze = app.add_subcommand("analyze", "Compute metrics and recommendations");
    analyze->add_option("--matrix", matrix_path, "profile matrix CSV")->required();
    analyze->add_option("--out-dir", report_dir, "report output directory")->required();
    analyze->add_option("--metric", metric, "sed, ed or both (default both)");
    analyze->add_option("--baseline-cap", baseline_cap_w,
                        "baseline cap in watts (default: highest cap in the matrix)");

    std::string spec_path;
    std::string caps_text;
    int runs = 3;
    std::uint64_t seed = 0;
    std::string sim_dir;
    double sample_period_ms = 5.0;
    double noise_sigma = 0.0;
    auto* simulate = app.add_subcommand("simulate", "Synthesize a power-cap sweep of traces");
    simulate->add_option("--spec", spec_path, "workload spec (JSON)")->required();
    simulate->add_option("--caps", caps_text, "comma-separated cap list in watts")->required();
    simulate->add_option("--runs", runs, "runs per cap (default 3)");
    simulate->add_option("--seed", seed, "RNG seed (same seed, same bytes)")->required();
    simulate->add_option("--out-dir", sim_dir, "trace output directory")->required();
    simulate->add_option("--sample-period-ms", sample_period_ms,
                         "sampling period in ms (default 5)");
    simulate->add_option("--noise", noise_sigma,
                         "relative sigma of multiplicative sample noise (default 0)");

    std::string oracle_spec;
    std::string oracle_caps;
    std::string oracle_out;
    auto* oracle = app.add_subcommand("oracle", "Write the closed-form profile matrix");
    oracle->add_option("--spec", oracle_spec, "workload spec (JSON)")->required();
    oracle->add_option("--caps", oracle_caps, "comma-separated cap list in watts")->required();
    oracle->add_option("--out", oracle_out, "output matrix CSV path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (ingest->parsed()) {
            return cmd_ingest(manifest_path, matrix_out);
        }
        if (analyze->parsed()) {
            return cmd_analyze(matrix_path, report_dir, metric, baseline_cap_w);
        }
        if (simulate->parsed()) {
            return cmd_simulate(spec_path, caps_text, runs, seed, sim_dir, sample_period_ms,
                                noise_sigma);
        }
        if (oracle->parsed()) {
            return cmd_oracle(oracle_spec, oracle_caps, oracle_out);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
