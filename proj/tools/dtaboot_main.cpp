// dtaboot: bivariate random-effects meta-analysis of diagnostic test
// accuracy with parametric-bootstrap inference for the SROC AUC.
//
// Subcommands: fit, auc-ci, compare, influence, simulate, plot. JSON/CSV/SVG
// artifacts land in --out; stdout carries the human-readable summary (or the
// JSON artifact under --stdout), stderr carries diagnostics.
//
// Exit codes: 0 ok, 1 usage, 2 input/parse, 3 convergence, 4 bootstrap
// failure budget, 5 I/O.
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dtaboot/bootstrap.hpp"
#include "dtaboot/influence.hpp"
#include "dtaboot/parallel.hpp"
#include "dtaboot/reml.hpp"
#include "dtaboot/report.hpp"
#include "dtaboot/simulate.hpp"
#include "dtaboot/sroc.hpp"
#include "dtaboot/study_data.hpp"
#include "dtaboot/svg_report.hpp"

namespace {

using namespace dtaboot;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitParse = 2;
constexpr int kExitConvergence = 3;
constexpr int kExitBudget = 4;
constexpr int kExitIo = 5;

struct CommonOptions {
    std::string input;
    std::vector<std::string> groups;
    int b = 2000;
    std::uint64_t seed = 0;
    double level = 0.95;
    std::string variant = "normal";
    std::string correction = "affected";
    std::pair<double, double> range{0.0, 1.0};
    std::string out_dir = ".";
    std::vector<std::string> formats{"json", "csv"};
    int threads = 0; // 0: env var or hardware
    bool no_timestamp = false;
    bool to_stdout = false;
    bool dump_replicates = false;
};

int env_default_threads() {
    if (const char* env = std::getenv("DTABOOT_THREADS")) {
        const int v = std::atoi(env);
        if (v > 0) return v;
    }
    return 0;
}

int effective_threads(const CommonOptions& opt) {
    return resolve_thread_count(opt.threads > 0 ? opt.threads : env_default_threads());
}

bool wants(const CommonOptions& opt, const std::string& format) {
    for (const auto& f : opt.formats)
        if (f == format) return true;
    return false;
}

void add_common_flags(CLI::App* cmd, CommonOptions& opt, bool with_bootstrap) {
    cmd->add_option("--input", opt.input, "input CSV (study,TP,FP,FN,TN[,test])")->required();
    cmd->add_option("--group,--groups", opt.groups, "test group selection(s)")->delimiter(',');
    cmd->add_option("--level", opt.level, "confidence level")->check(CLI::Range(1e-6, 1.0 - 1e-6));
    cmd->add_option("--correction", opt.correction, "zero-cell policy: affected|all|none")
        ->check(CLI::IsMember({"affected", "all", "none"}));
    cmd->add_option("--out", opt.out_dir, "output directory");
    cmd->add_option("--format", opt.formats, "output formats: json,csv,svg")->delimiter(',');
    cmd->add_option("--range", opt.range, "AUC integration range lo,hi")->delimiter(',');
    cmd->add_option("--threads", opt.threads, "worker threads (default: DTABOOT_THREADS or hardware)");
    cmd->add_flag("--no-timestamp", opt.no_timestamp, "omit the timestamp field from JSON");
    cmd->add_flag("--stdout", opt.to_stdout, "print the JSON artifact to stdout");
    if (with_bootstrap) {
        cmd->add_option("--b", opt.b, "bootstrap replicates (>= 1000)");
        cmd->add_option("--seed", opt.seed, "RNG seed");
        cmd->add_option("--variant", opt.variant, "resampling variant: normal|binomial")
            ->check(CLI::IsMember({"normal", "binomial"}));
        cmd->add_flag("--dump-replicates", opt.dump_replicates, "write replicate statistics CSV");
    }
}

BootstrapConfig bootstrap_config(const CommonOptions& opt) {
    BootstrapConfig cfg;
    cfg.b = opt.b;
    cfg.seed = opt.seed;
    cfg.variant = resampling_variant_from_string(opt.variant);
    cfg.level = opt.level;
    cfg.threads = effective_threads(opt);
    cfg.fpr_lo = opt.range.first;
    cfg.fpr_hi = opt.range.second;
    cfg.validate();
    return cfg;
}

ReportMeta make_meta(const std::string& command, const CommonOptions& opt) {
    ReportMeta meta;
    meta.command = command;
    meta.input = opt.input;
    meta.seed = opt.seed;
    meta.b = opt.b;
    meta.level = opt.level;
    meta.variant = opt.variant;
    meta.correction = opt.correction;
    meta.range_lo = opt.range.first;
    meta.range_hi = opt.range.second;
    meta.threads = effective_threads(opt);
    meta.timestamp = !opt.no_timestamp;
    return meta;
}

// Selected (group name, dataset) pairs. Without an explicit selection every
// group in the file is used; untagged files form one unnamed group.
std::vector<std::pair<std::string, Dataset>> select_groups(const Dataset& all,
                                                           const std::vector<std::string>& requested) {
    std::vector<std::pair<std::string, Dataset>> out;
    if (!requested.empty()) {
        for (const auto& g : requested) {
            Dataset sub = filter_group(all, g);
            if (sub.studies.empty()) throw parse_error("no studies found for test group '" + g + "'");
            out.emplace_back(g, std::move(sub));
        }
        return out;
    }
    const auto names = group_names(all);
    if (names.size() <= 1) {
        out.emplace_back(names.empty() ? "" : names.front(), all);
        return out;
    }
    for (const auto& g : names) out.emplace_back(g, filter_group(all, g));
    return out;
}

void emit(const CommonOptions& opt, const std::filesystem::path& name, const std::string& content) {
    std::filesystem::create_directories(opt.out_dir);
    const auto path = std::filesystem::path(opt.out_dir) / name;
    report::write_file_atomic(path, content);
    std::cerr << "wrote " << path.string() << "\n";
}

void print_or_emit_json(const CommonOptions& opt, const std::string& artifact_name,
                        const std::string& json_text) {
    if (wants(opt, "json")) emit(opt, artifact_name, json_text);
    if (opt.to_stdout) std::cout << json_text << "\n";
}

// ---- subcommand bodies ----

int run_fit(const CommonOptions& opt) {
    const Dataset all = parse_dataset_file(opt.input);
    const auto policy = correction_policy_from_string(opt.correction);
    std::vector<GroupFitResult> results;
    std::vector<SvgSeries> series;
    for (const auto& [name, data] : select_groups(all, opt.groups)) {
        GroupFitResult g;
        g.group = name;
        g.fit = fit_reml(to_outcomes(data, policy));
        if (!g.fit.converged)
            throw convergence_error("fit did not converge for group '" + name + "'");
        g.accuracy = summary_accuracy(g.fit, opt.level);
        g.curve = hsroc_params(g.fit);
        g.auc = compute_auc(g.curve, opt.range.first, opt.range.second);
        if (wants(opt, "svg")) series.push_back(make_svg_series(name, data, g.fit, opt.level));
        results.push_back(std::move(g));
    }

    print_or_emit_json(opt, "fit.json", report::fit_report_json(make_meta("fit", opt), results));
    if (wants(opt, "csv")) emit(opt, "fit.csv", report::fit_summary_csv(results));
    if (wants(opt, "svg")) emit(opt, "sroc.svg", render_sroc_svg(series));

    if (!opt.to_stdout) {
        std::printf("%-8s %-22s %-22s %-8s %-8s %6s\n", "group", "sens (CI)", "fpr (CI)", "sd_a",
                    "sd_b", "auc");
        for (const auto& g : results) {
            std::printf("%-8s %.3f (%.3f, %.3f)   %.3f (%.3f, %.3f)   %.3f    %.3f    %.3f\n",
                        g.group.empty() ? "-" : g.group.c_str(), g.accuracy.sens.point,
                        g.accuracy.sens.lower, g.accuracy.sens.upper, g.accuracy.fpr.point,
                        g.accuracy.fpr.lower, g.accuracy.fpr.upper, g.fit.params.sigma_a,
                        g.fit.params.sigma_b, g.auc.value);
        }
    }
    return kExitOk;
}

int run_auc_ci(const CommonOptions& opt) {
    const Dataset all = parse_dataset_file(opt.input);
    const auto policy = correction_policy_from_string(opt.correction);
    const BootstrapConfig cfg = bootstrap_config(opt);
    std::vector<GroupBootstrapResult> results;
    for (const auto& [name, data] : select_groups(all, opt.groups)) {
        GroupBootstrapResult g;
        g.group = name;
        const OutcomeSet outcomes = to_outcomes(data, policy);
        g.fit = fit_reml(outcomes, cfg.fit_options);
        g.run = bootstrap_auc_ci(outcomes, cfg);
        if (opt.dump_replicates) {
            const std::string fname = name.empty() ? "replicates.csv" : "replicates_" + name + ".csv";
            emit(opt, fname, report::replicates_csv(g.run));
        }
        results.push_back(std::move(g));
    }

    print_or_emit_json(opt, "auc_ci.json",
                       report::auc_ci_report_json(make_meta("auc-ci", opt), results));
    if (wants(opt, "csv")) emit(opt, "auc_ci.csv", report::auc_ci_csv(results));

    if (!opt.to_stdout) {
        for (const auto& g : results)
            std::printf("%-8s AUC %.3f  %.0f%% CI (%.3f, %.3f)  B=%lld effective=%lld failures=%zu\n",
                        g.group.empty() ? "-" : g.group.c_str(), g.run.point, 100.0 * g.run.level,
                        g.run.interval.lo, g.run.interval.hi,
                        static_cast<long long>(g.run.requested_b),
                        static_cast<long long>(g.run.effective_b), g.run.failures.size());
    }
    return kExitOk;
}

int run_compare(const CommonOptions& opt, const std::string& input2) {
    const auto policy = correction_policy_from_string(opt.correction);
    const BootstrapConfig cfg = bootstrap_config(opt);

    std::vector<std::pair<std::string, Dataset>> arms;
    if (!input2.empty()) {
        const Dataset d1 = parse_dataset_file(opt.input);
        const Dataset d2 = parse_dataset_file(input2);
        std::vector<std::string> g1(opt.groups.begin(),
                                    opt.groups.begin() + (opt.groups.size() > 0 ? 1 : 0));
        std::vector<std::string> g2(opt.groups.begin() + (opt.groups.size() > 1 ? 1 : 0),
                                    opt.groups.size() > 1 ? opt.groups.begin() + 2 : opt.groups.begin());
        auto a1 = select_groups(d1, g1);
        auto a2 = select_groups(d2, g2);
        if (a1.size() != 1 || a2.size() != 1)
            throw parse_error("compare with two files needs one test group per file");
        arms.push_back(a1.front());
        arms.push_back(a2.front());
    } else {
        const Dataset all = parse_dataset_file(opt.input);
        if (opt.groups.size() != 2)
            throw parse_error("compare requires exactly two groups (--groups A,B)");
        arms = select_groups(all, opt.groups);
    }

    const OutcomeSet o1 = to_outcomes(arms[0].second, policy);
    const OutcomeSet o2 = to_outcomes(arms[1].second, policy);

    CompareReport cmp;
    cmp.group1 = arms[0].first;
    cmp.group2 = arms[1].first;
    cmp.dauc = bootstrap_compare_auc(o1, o2, cfg);
    cmp.wald = wald_compare_summary(fit_reml(o1, cfg.fit_options), fit_reml(o2, cfg.fit_options));

    print_or_emit_json(opt, "compare.json",
                       report::compare_report_json(make_meta("compare", opt), cmp));
    if (wants(opt, "csv")) emit(opt, "compare.csv", report::compare_csv(cmp));
    if (opt.dump_replicates) emit(opt, "replicates_dauc.csv", report::replicates_csv(cmp.dauc.run));

    if (!opt.to_stdout) {
        std::printf("%s vs %s: dAUC %.3f  %.0f%% CI (%.3f, %.3f)  p = %.3f\n", cmp.group1.c_str(),
                    cmp.group2.c_str(), cmp.dauc.dauc, 100.0 * cfg.level, cmp.dauc.interval.lo,
                    cmp.dauc.interval.hi, cmp.dauc.p_value);
        std::printf("Wald summary tests: mu_a z=%.3f p=%.3f, mu_b z=%.3f p=%.3f\n", cmp.wald.z_mu_a,
                    cmp.wald.p_mu_a, cmp.wald.z_mu_b, cmp.wald.p_mu_b);
    }
    return kExitOk;
}

int run_influence(const CommonOptions& opt) {
    const Dataset all = parse_dataset_file(opt.input);
    const auto policy = correction_policy_from_string(opt.correction);
    const BootstrapConfig cfg = bootstrap_config(opt);

    auto selected = select_groups(all, opt.groups);
    if (selected.size() != 1)
        throw parse_error("influence analyzes one test group at a time (use --group)");

    InfluenceReport rep;
    rep.group = selected.front().first;
    rep.table = leave_one_out_table(to_outcomes(selected.front().second, policy), cfg);

    print_or_emit_json(opt, "influence.json",
                       report::influence_report_json(make_meta("influence", opt), rep));
    if (wants(opt, "csv")) emit(opt, "influence.csv", report::influence_csv(rep.table));

    if (!opt.to_stdout) {
        std::printf("full-data AUC %.3f (B=%lld)\n", rep.table.auc_full,
                    static_cast<long long>(rep.table.effective_b));
        std::printf("%-12s %8s %8s %9s %9s  %s\n", "study", "AUC", "dAUC", "p2.5", "p97.5", "flag");
        for (const auto& row : rep.table.rows) {
            if (row.fit_ok)
                std::printf("%-12s %8.3f %8.3f %9.3f %9.3f  %s\n", row.label.c_str(), row.auc_loo,
                            row.delta_auc, row.lo, row.hi, row.influential ? "influential" : "");
            else
                std::printf("%-12s %8s %8s %9.3f %9.3f  %s\n", row.label.c_str(), "NA", "NA", row.lo,
                            row.hi, "no_fit");
        }
    }
    return kExitOk;
}

int run_simulate(const CommonOptions& opt, const std::string& scenario_path,
                 const std::string& ledger_path) {
    SimScenario scenario = parse_scenario_file(scenario_path);
    const int threads = effective_threads(opt);
    std::cerr << "running " << scenario.replications << " replications, B=" << scenario.bootstrap.b
              << ", threads=" << threads << "\n";
    const CoverageResult result = coverage_study(scenario, threads);

    CommonOptions meta_opt = opt;
    meta_opt.input = scenario_path;
    meta_opt.b = scenario.bootstrap.b;
    meta_opt.seed = scenario.seed;
    meta_opt.level = scenario.bootstrap.level;
    print_or_emit_json(meta_opt, "simulate.json",
                       report::simulate_report_json(make_meta("simulate", meta_opt), scenario, result));

    std::filesystem::create_directories(opt.out_dir);
    const auto ledger = ledger_path.empty()
                            ? std::filesystem::path(opt.out_dir) / "coverage_results.csv"
                            : std::filesystem::path(ledger_path);
    append_coverage_ledger(ledger, scenario, result);
    std::cerr << "appended " << ledger.string() << "\n";

    if (!opt.to_stdout)
        std::printf("true AUC %.4f  coverage %.3f (SE %.3f)  mean width %.4f  completed %d/%d\n",
                    result.true_auc, result.coverage, result.coverage_se, result.mean_width,
                    result.completed, result.replications);
    return kExitOk;
}

int run_plot(const CommonOptions& opt) {
    const Dataset all = parse_dataset_file(opt.input);
    const auto policy = correction_policy_from_string(opt.correction);
    std::vector<SvgSeries> series;
    for (const auto& [name, data] : select_groups(all, opt.groups)) {
        const BivariateFit fit = fit_reml(to_outcomes(data, policy));
        if (!fit.converged)
            throw convergence_error("fit did not converge for group '" + name + "'");
        series.push_back(make_svg_series(name, data, fit, opt.level));
        if (wants(opt, "csv")) {
            const std::string fname = name.empty() ? "curve.csv" : "curve_" + name + ".csv";
            emit(opt, fname, report::curve_csv(series.back().curve));
        }
    }
    SvgOptions svg_opt;
    svg_opt.title = all.name;
    const std::string svg = render_sroc_svg(series, svg_opt);
    emit(opt, "sroc.svg", svg);
    if (opt.to_stdout) std::cout << svg;
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"diagnostic test accuracy meta-analysis: bivariate REML, SROC AUC, "
                 "and parametric-bootstrap inference"};
    app.require_subcommand(1);

    CommonOptions opt;
    std::string input2, scenario_path, ledger_path;

    CLI::App* fit = app.add_subcommand("fit", "REML fit with summary accuracy and AUC");
    add_common_flags(fit, opt, false);

    CLI::App* aucci = app.add_subcommand("auc-ci", "parametric bootstrap CI for the SROC AUC");
    add_common_flags(aucci, opt, true);

    CLI::App* compare = app.add_subcommand("compare", "bootstrap test for the AUC difference");
    add_common_flags(compare, opt, true);
    compare->add_option("--input2", input2, "second input CSV (one arm per file)");

    CLI::App* influence = app.add_subcommand("influence", "leave-one-study-out influence table");
    add_common_flags(influence, opt, true);

    CLI::App* simulate = app.add_subcommand("simulate", "coverage study from a scenario file");
    simulate->add_option("--scenario,--input", scenario_path, "scenario key-value file")->required();
    simulate->add_option("--ledger", ledger_path, "results ledger CSV (appended)");
    simulate->add_option("--out", opt.out_dir, "output directory");
    simulate->add_option("--threads", opt.threads, "worker threads");
    simulate->add_flag("--no-timestamp", opt.no_timestamp, "omit the timestamp field from JSON");
    simulate->add_flag("--stdout", opt.to_stdout, "print the JSON artifact to stdout");

    CLI::App* plot = app.add_subcommand("plot", "SROC plot (SVG) with confidence regions");
    add_common_flags(plot, opt, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (app.got_subcommand(fit)) return run_fit(opt);
        if (app.got_subcommand(aucci)) return run_auc_ci(opt);
        if (app.got_subcommand(compare)) return run_compare(opt, input2);
        if (app.got_subcommand(influence)) return run_influence(opt);
        if (app.got_subcommand(simulate)) return run_simulate(opt, scenario_path, ledger_path);
        if (app.got_subcommand(plot)) return run_plot(opt);
    } catch (const budget_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitBudget;
    } catch (const convergence_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConvergence;
    } catch (const parse_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitParse;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitParse;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "unexpected error: " << e.what() << "\n";
        return kExitIo;
    }
    return kExitUsage;
}
