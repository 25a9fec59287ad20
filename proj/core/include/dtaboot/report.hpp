// Machine-readable report assembly: JSON artifacts (with config echo and
// optional timestamp), CSV tables mirroring the standard summary layouts,
// and atomic file output. Every number shown in human-readable output is
// drawn from these same structures.
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "dtaboot/bootstrap.hpp"
#include "dtaboot/influence.hpp"
#include "dtaboot/reml.hpp"
#include "dtaboot/simulate.hpp"
#include "dtaboot/sroc.hpp"

namespace dtaboot {

struct GroupFitResult {
    std::string group; // empty when the whole file is one test
    BivariateFit fit;
    SummaryAccuracy accuracy;
    SrocCurve curve;
    AucResult auc;
};

struct GroupBootstrapResult {
    std::string group;
    BivariateFit fit;
    BootstrapRun run;
};

struct CompareReport {
    std::string group1;
    std::string group2;
    DaucTestResult dauc;
    WaldComparison wald; // Wald z/p for the summary logit means
};

struct InfluenceReport {
    std::string group;
    InfluenceTable table;
};

// Common run metadata echoed into every JSON artifact.
struct ReportMeta {
    std::string command;
    std::string input;
    std::uint64_t seed{0};
    int b{0};
    double level{0.95};
    std::string variant{"normal"};
    std::string correction{"affected"};
    double range_lo{0.0};
    double range_hi{1.0};
    int threads{1};
    bool timestamp{true}; // suppressible for byte-identical reruns
};

namespace report {

// --- single-object JSON (round-trippable) ---
std::string fit_to_json(const BivariateFit& fit);
BivariateFit fit_from_json(const std::string& json_text);

// Replicate statistics above `stats_cap` entries are elided from the JSON
// (the count and interval always stay).
std::string bootstrap_run_to_json(const BootstrapRun& run, std::size_t stats_cap = 100000);

// --- full command artifacts ---
std::string fit_report_json(const ReportMeta& meta, const std::vector<GroupFitResult>& groups);
std::string auc_ci_report_json(const ReportMeta& meta,
                               const std::vector<GroupBootstrapResult>& groups,
                               std::size_t stats_cap = 100000);
std::string compare_report_json(const ReportMeta& meta, const CompareReport& comparison,
                                std::size_t stats_cap = 100000);
std::string influence_report_json(const ReportMeta& meta, const InfluenceReport& influence);
std::string simulate_report_json(const ReportMeta& meta, const SimScenario& scenario,
                                 const CoverageResult& result);

// --- CSV tables ---
std::string fit_summary_csv(const std::vector<GroupFitResult>& groups);
std::string auc_ci_csv(const std::vector<GroupBootstrapResult>& groups);
std::string compare_csv(const CompareReport& comparison);
std::string influence_csv(const InfluenceTable& table);
std::string replicates_csv(const BootstrapRun& run);
std::string curve_csv(const SrocCurve& curve, int n_samples = 512);

// Write via a temporary file in the same directory, then rename.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

} // namespace report
} // namespace dtaboot
