#include "dtaboot/report.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "dtaboot/stats.hpp"

namespace dtaboot::report {

using ordered_json = nlohmann::ordered_json;

namespace {

std::string iso_timestamp_utc() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

ordered_json params_json(const BivariateParams& p) {
    return ordered_json{{"mu_a", p.mu_a},
                        {"mu_b", p.mu_b},
                        {"sigma_a", p.sigma_a},
                        {"sigma_b", p.sigma_b},
                        {"rho", p.rho}};
}

ordered_json mat2_json(const Mat2& m) {
    return ordered_json::array({ordered_json::array({m.m00, m.m01}),
                                ordered_json::array({m.m10, m.m11})});
}

ordered_json fit_json(const BivariateFit& fit) {
    return ordered_json{
        {"params", params_json(fit.params)},
        {"cov_mu", mat2_json(fit.cov_mu)},
        {"reml_value", fit.reml_value},
        {"converged", fit.converged},
        {"iterations", fit.iterations},
        {"boundary",
         ordered_json{{"sigma_a", fit.boundary.sigma_a},
                      {"sigma_b", fit.boundary.sigma_b},
                      {"rho", fit.boundary.rho}}}};
}

ordered_json ci_json(const CiScalar& ci) {
    return ordered_json{{"point", ci.point}, {"lower", ci.lower}, {"upper", ci.upper}};
}

ordered_json curve_json(const SrocCurve& c) {
    return ordered_json{{"intercept", c.intercept}, {"slope", c.slope},   {"lambda", c.lambda},
                        {"beta", c.beta},           {"tau2_theta", c.tau2_theta},
                        {"tau2_alpha", c.tau2_alpha}};
}

ordered_json auc_json(const AucResult& a) {
    return ordered_json{{"value", a.value},
                        {"fpr_lo", a.fpr_lo},
                        {"fpr_hi", a.fpr_hi},
                        {"method", a.quadrature.method},
                        {"resolution", a.quadrature.resolution}};
}

ordered_json interval_json(const Interval& iv) {
    return ordered_json{{"lower", iv.lo}, {"upper", iv.hi}};
}

ordered_json run_json(const BootstrapRun& run, std::size_t stats_cap) {
    ordered_json failures = ordered_json::array();
    for (const auto& f : run.failures)
        failures.push_back(ordered_json{{"replicate", f.replicate_index}, {"reason", f.reason}});
    ordered_json j{{"requested_b", run.requested_b},
                   {"effective_b", run.effective_b},
                   {"seed", run.seed},
                   {"level", run.level},
                   {"point", run.point},
                   {"interval", interval_json(run.interval)},
                   {"failures", failures}};
    if (run.statistics.size() <= stats_cap) {
        j["statistics"] = run.statistics;
    } else {
        j["statistics_elided"] = true;
        j["statistics_count"] = run.statistics.size();
    }
    return j;
}

ordered_json meta_json(const ReportMeta& meta) {
    ordered_json j{{"command", meta.command}, {"input", meta.input},
                   {"seed", meta.seed},       {"b", meta.b},
                   {"level", meta.level},     {"variant", meta.variant},
                   {"correction", meta.correction}, {"range", ordered_json::array({meta.range_lo, meta.range_hi})},
                   {"threads", meta.threads}};
    if (meta.timestamp) j["timestamp"] = iso_timestamp_utc();
    return j;
}

ordered_json group_fit_json(const GroupFitResult& g) {
    return ordered_json{{"group", g.group},
                        {"fit", fit_json(g.fit)},
                        {"summary",
                         ordered_json{{"level", g.accuracy.level},
                                      {"sensitivity", ci_json(g.accuracy.sens)},
                                      {"fpr", ci_json(g.accuracy.fpr)}}},
                        {"sroc", curve_json(g.curve)},
                        {"auc", auc_json(g.auc)}};
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

} // namespace

std::string fit_to_json(const BivariateFit& fit) { return fit_json(fit).dump(2); }

BivariateFit fit_from_json(const std::string& json_text) {
    const auto j = ordered_json::parse(json_text);
    BivariateFit fit;
    const auto& p = j.at("params");
    fit.params.mu_a = p.at("mu_a").get<double>();
    fit.params.mu_b = p.at("mu_b").get<double>();
    fit.params.sigma_a = p.at("sigma_a").get<double>();
    fit.params.sigma_b = p.at("sigma_b").get<double>();
    fit.params.rho = p.at("rho").get<double>();
    const auto& c = j.at("cov_mu");
    fit.cov_mu = Mat2{c.at(0).at(0).get<double>(), c.at(0).at(1).get<double>(),
                      c.at(1).at(0).get<double>(), c.at(1).at(1).get<double>()};
    fit.reml_value = j.at("reml_value").get<double>();
    fit.converged = j.at("converged").get<bool>();
    fit.iterations = j.at("iterations").get<int>();
    const auto& b = j.at("boundary");
    fit.boundary.sigma_a = b.at("sigma_a").get<bool>();
    fit.boundary.sigma_b = b.at("sigma_b").get<bool>();
    fit.boundary.rho = b.at("rho").get<bool>();
    return fit;
}

std::string bootstrap_run_to_json(const BootstrapRun& run, std::size_t stats_cap) {
    return run_json(run, stats_cap).dump(2);
}

std::string fit_report_json(const ReportMeta& meta, const std::vector<GroupFitResult>& groups) {
    ordered_json arr = ordered_json::array();
    for (const auto& g : groups) arr.push_back(group_fit_json(g));
    return ordered_json{{"meta", meta_json(meta)}, {"fits", arr}}.dump(2);
}

std::string auc_ci_report_json(const ReportMeta& meta,
                               const std::vector<GroupBootstrapResult>& groups,
                               std::size_t stats_cap) {
    ordered_json arr = ordered_json::array();
    for (const auto& g : groups)
        arr.push_back(ordered_json{{"group", g.group},
                                   {"fit", fit_json(g.fit)},
                                   {"auc", ordered_json{{"point", g.run.point},
                                                        {"interval", interval_json(g.run.interval)}}},
                                   {"bootstrap", run_json(g.run, stats_cap)}});
    return ordered_json{{"meta", meta_json(meta)}, {"results", arr}}.dump(2);
}

std::string compare_report_json(const ReportMeta& meta, const CompareReport& cmp,
                                std::size_t stats_cap) {
    ordered_json j{
        {"meta", meta_json(meta)},
        {"group1", cmp.group1},
        {"group2", cmp.group2},
        {"dauc",
         ordered_json{{"point", cmp.dauc.dauc},
                      {"interval", interval_json(cmp.dauc.interval)},
                      {"p_value", cmp.dauc.p_value}}},
        {"wald_summary",
         ordered_json{{"z_mu_a", cmp.wald.z_mu_a},
                      {"p_mu_a", cmp.wald.p_mu_a},
                      {"z_mu_b", cmp.wald.z_mu_b},
                      {"p_mu_b", cmp.wald.p_mu_b}}},
        {"bootstrap", run_json(cmp.dauc.run, stats_cap)}};
    return j.dump(2);
}

std::string influence_report_json(const ReportMeta& meta, const InfluenceReport& infl) {
    ordered_json rows = ordered_json::array();
    for (const auto& row : infl.table.rows) {
        ordered_json r{{"study", row.label},   {"index", row.index},
                       {"auc_loo", row.auc_loo}, {"delta_auc", row.delta_auc},
                       {"p2.5", row.lo},         {"p97.5", row.hi},
                       {"influential", row.influential}, {"fit_ok", row.fit_ok}};
        if (!row.fit_ok) {
            r["auc_loo"] = nullptr;
            r["delta_auc"] = nullptr;
        }
        rows.push_back(std::move(r));
    }
    ordered_json flagged = ordered_json::array();
    for (const auto& f : flag_influential(infl.table.rows))
        flagged.push_back(ordered_json{
            {"study", f.label}, {"index", f.index}, {"delta_auc", f.delta_auc}, {"note", f.narrative}});
    return ordered_json{{"meta", meta_json(meta)},
                        {"group", infl.group},
                        {"auc_full", infl.table.auc_full},
                        {"effective_b", infl.table.effective_b},
                        {"rows", rows},
                        {"flagged", flagged}}
        .dump(2);
}

std::string simulate_report_json(const ReportMeta& meta, const SimScenario& sc,
                                 const CoverageResult& r) {
    ordered_json j{{"meta", meta_json(meta)},
                   {"scenario",
                    ordered_json{{"hash", scenario_hash(sc)},
                                 {"true_params", params_json(sc.true_params)},
                                 {"n_studies", sc.n_studies},
                                 {"n_pos", sc.n_pos},
                                 {"n_neg", sc.n_neg},
                                 {"replications", sc.replications},
                                 {"b", sc.bootstrap.b},
                                 {"seed", sc.seed}}},
                   {"true_auc", r.true_auc},
                   {"completed", r.completed},
                   {"fit_failures", r.fit_failures},
                   {"coverage", r.coverage},
                   {"coverage_se", r.coverage_se},
                   {"mean_width", r.mean_width},
                   {"bias",
                    ordered_json{{"mu_a", r.bias_mu_a},
                                 {"mu_b", r.bias_mu_b},
                                 {"sigma_a", r.bias_sigma_a},
                                 {"sigma_b", r.bias_sigma_b},
                                 {"rho", r.bias_rho}}}};
    return j.dump(2);
}

std::string fit_summary_csv(const std::vector<GroupFitResult>& groups) {
    std::ostringstream out;
    out << "group,sens,sens_lo,sens_hi,fpr,fpr_lo,fpr_hi,sigma_a,sigma_b,rho,auc,converged\n";
    for (const auto& g : groups) {
        out << g.group << ',' << fmt(g.accuracy.sens.point) << ',' << fmt(g.accuracy.sens.lower)
            << ',' << fmt(g.accuracy.sens.upper) << ',' << fmt(g.accuracy.fpr.point) << ','
            << fmt(g.accuracy.fpr.lower) << ',' << fmt(g.accuracy.fpr.upper) << ','
            << fmt(g.fit.params.sigma_a) << ',' << fmt(g.fit.params.sigma_b) << ','
            << fmt(g.fit.params.rho) << ',' << fmt(g.auc.value) << ','
            << (g.fit.converged ? "yes" : "no") << '\n';
    }
    return out.str();
}

std::string auc_ci_csv(const std::vector<GroupBootstrapResult>& groups) {
    std::ostringstream out;
    out << "group,auc,ci_lo,ci_hi,level,requested_b,effective_b,failures\n";
    for (const auto& g : groups) {
        out << g.group << ',' << fmt(g.run.point) << ',' << fmt(g.run.interval.lo) << ','
            << fmt(g.run.interval.hi) << ',' << g.run.level << ',' << g.run.requested_b << ','
            << g.run.effective_b << ',' << g.run.failures.size() << '\n';
    }
    return out.str();
}

std::string compare_csv(const CompareReport& cmp) {
    std::ostringstream out;
    out << "group1,group2,dauc,ci_lo,ci_hi,p_value\n";
    out << cmp.group1 << ',' << cmp.group2 << ',' << fmt(cmp.dauc.dauc) << ','
        << fmt(cmp.dauc.interval.lo) << ',' << fmt(cmp.dauc.interval.hi) << ','
        << fmt(cmp.dauc.p_value) << '\n';
    return out.str();
}

std::string influence_csv(const InfluenceTable& table) {
    std::ostringstream out;
    out << "study,AUC,dAUC,p2.5,p97.5,flag\n";
    for (const auto& row : table.rows) {
        out << row.label << ',';
        if (row.fit_ok)
            out << fmt(row.auc_loo) << ',' << fmt(row.delta_auc);
        else
            out << "NA,NA";
        out << ',' << fmt(row.lo) << ',' << fmt(row.hi) << ','
            << (row.fit_ok ? (row.influential ? "influential" : "ok") : "no_fit") << '\n';
    }
    return out.str();
}

std::string replicates_csv(const BootstrapRun& run) {
    std::ostringstream out;
    out << "replicate,statistic\n";
    for (std::size_t i = 0; i < run.statistics.size(); ++i) {
        char buf[48];
        std::snprintf(buf, sizeof(buf), "%zu,%.17g\n", i, run.statistics[i]);
        out << buf;
    }
    return out.str();
}

std::string curve_csv(const SrocCurve& curve, int n_samples) {
    if (n_samples < 2) throw std::invalid_argument("curve_csv: need at least 2 samples");
    std::ostringstream out;
    out << "fpr,sensitivity\n";
    // uniform on the logit scale so both corners are traced smoothly
    const double lo = logit(5e-4), hi = logit(1.0 - 5e-4);
    for (int i = 0; i < n_samples; ++i) {
        const double x = expit(lo + (hi - lo) * static_cast<double>(i) / (n_samples - 1));
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.8f,%.8f\n", x, sroc_sensitivity_at(curve, x));
        out << buf;
    }
    return out.str();
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw error("cannot write '" + tmp.string() + "'");
        out << content;
        if (!out) throw error("write failed for '" + tmp.string() + "'");
    }
    std::filesystem::rename(tmp, path);
}

} // namespace dtaboot::report
