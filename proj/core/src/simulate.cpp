#include "dtaboot/simulate.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <sstream>

#include "dtaboot/parallel.hpp"
#include "dtaboot/sroc.hpp"
#include "dtaboot/stats.hpp"

namespace dtaboot {

void SimScenario::validate() const {
    if (n_studies < 4) throw std::invalid_argument("scenario: n_studies must be >= 4");
    if (n_pos < 10 || n_neg < 10) throw std::invalid_argument("scenario: subject counts must be >= 10");
    if (replications < 100)
        throw std::invalid_argument("scenario: replications must be >= 100 for coverage estimates");
    if (!(true_params.sigma_a >= 0.0 && true_params.sigma_b >= 0.0))
        throw std::invalid_argument("scenario: heterogeneity SDs must be >= 0");
    if (std::abs(true_params.rho) > 1.0)
        throw std::invalid_argument("scenario: rho must be in [-1,1]");
    bootstrap.validate();
}

namespace {

std::string trim_kv(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

} // namespace

SimScenario parse_scenario(std::istream& in) {
    SimScenario sc;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string stripped = trim_kv(line);
        if (stripped.empty() || stripped[0] == '#') continue;
        const auto eq = stripped.find('=');
        if (eq == std::string::npos)
            throw parse_error("scenario line " + std::to_string(line_no) + ": expected key = value");
        const std::string key = trim_kv(stripped.substr(0, eq));
        const std::string value = trim_kv(stripped.substr(eq + 1));
        try {
            if (key == "mu_a") sc.true_params.mu_a = std::stod(value);
            else if (key == "mu_b") sc.true_params.mu_b = std::stod(value);
            else if (key == "sigma_a") sc.true_params.sigma_a = std::stod(value);
            else if (key == "sigma_b") sc.true_params.sigma_b = std::stod(value);
            else if (key == "rho") sc.true_params.rho = std::stod(value);
            else if (key == "n_studies") sc.n_studies = std::stoi(value);
            else if (key == "n_pos") sc.n_pos = std::stoi(value);
            else if (key == "n_pos_max") sc.n_pos_max = std::stoi(value);
            else if (key == "n_neg") sc.n_neg = std::stoi(value);
            else if (key == "n_neg_max") sc.n_neg_max = std::stoi(value);
            else if (key == "replications") sc.replications = std::stoi(value);
            else if (key == "b") sc.bootstrap.b = std::stoi(value);
            else if (key == "level") sc.bootstrap.level = std::stod(value);
            else if (key == "variant") sc.bootstrap.variant = resampling_variant_from_string(value);
            else if (key == "correction") sc.correction = correction_policy_from_string(value);
            else if (key == "seed") sc.seed = std::stoull(value);
            else if (key == "threads") sc.bootstrap.threads = std::stoi(value);
            else throw parse_error("scenario line " + std::to_string(line_no) + ": unknown key '" + key + "'");
        } catch (const std::invalid_argument&) {
            throw parse_error("scenario line " + std::to_string(line_no) + ": bad value for '" + key + "'");
        }
    }
    sc.validate();
    return sc;
}

SimScenario parse_scenario_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw parse_error("cannot open scenario file '" + path.string() + "'");
    return parse_scenario(in);
}

std::string scenario_hash(const SimScenario& sc) {
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%.10g|%.10g|%.10g|%.10g|%.10g|%d|%d|%d|%d|%d|%d|%d|%.6g|%s|%s|%llu",
                  sc.true_params.mu_a, sc.true_params.mu_b, sc.true_params.sigma_a,
                  sc.true_params.sigma_b, sc.true_params.rho, sc.n_studies, sc.n_pos, sc.n_pos_max,
                  sc.n_neg, sc.n_neg_max, sc.replications, sc.bootstrap.b, sc.bootstrap.level,
                  std::string(to_string(sc.bootstrap.variant)).c_str(),
                  std::string(to_string(sc.correction)).c_str(),
                  static_cast<unsigned long long>(sc.seed));
    // FNV-1a over the canonical settings string
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (const char* p = buf; *p; ++p) {
        h ^= static_cast<std::uint64_t>(static_cast<unsigned char>(*p));
        h *= 0x100000001B3ULL;
    }
    char out[17];
    std::snprintf(out, sizeof(out), "%016llx", static_cast<unsigned long long>(h));
    return std::string(out);
}

Dataset simulate_dataset(const SimScenario& scenario, std::uint64_t replication_index) {
    RngStream stream = RngStream::from_key(scenario.seed, replication_index, stream_tag::sim_data);
    const Mat2 root = sampling_root(scenario.true_params.sigma_matrix());
    const Vec2 mu = scenario.true_params.mu();

    Dataset data;
    data.name = "sim-" + std::to_string(replication_index);
    data.studies.reserve(static_cast<std::size_t>(scenario.n_studies));
    for (int i = 0; i < scenario.n_studies; ++i) {
        const long long n_pos =
            scenario.n_pos_max > scenario.n_pos
                ? scenario.n_pos + static_cast<long long>(stream.next_below(
                      static_cast<std::uint64_t>(scenario.n_pos_max - scenario.n_pos + 1)))
                : scenario.n_pos;
        const long long n_neg =
            scenario.n_neg_max > scenario.n_neg
                ? scenario.n_neg + static_cast<long long>(stream.next_below(
                      static_cast<std::uint64_t>(scenario.n_neg_max - scenario.n_neg + 1)))
                : scenario.n_neg;
        const Vec2 z{stream.next_normal(), stream.next_normal()};
        const Vec2 theta = mu + root * z;

        Study2x2 study;
        study.label = "s" + std::to_string(i + 1);
        study.tp = stream.next_binomial(n_pos, expit(theta.a));
        study.fn = n_pos - study.tp;
        study.fp = stream.next_binomial(n_neg, expit(theta.b));
        study.tn = n_neg - study.fp;
        data.studies.push_back(std::move(study));
    }
    return data;
}

CoverageResult coverage_study(const SimScenario& scenario, int threads) {
    scenario.validate();

    CoverageResult result;
    result.replications = scenario.replications;
    result.true_auc = compute_auc(hsroc_params(scenario.true_params), scenario.bootstrap.fpr_lo,
                                  scenario.bootstrap.fpr_hi, scenario.bootstrap.auc_resolution)
                          .value;

    struct PerReplication {
        bool ok{false};
        bool covered{false};
        double width{0.0};
        BivariateParams estimate;
    };
    std::vector<PerReplication> rows(static_cast<std::size_t>(scenario.replications));

    parallel_for_index(scenario.replications, threads, [&](std::int64_t r) {
        auto& row = rows[static_cast<std::size_t>(r)];
        try {
            const Dataset data = simulate_dataset(scenario, static_cast<std::uint64_t>(r));
            const OutcomeSet outcomes = to_outcomes(data, scenario.correction);

            BootstrapConfig config = scenario.bootstrap;
            config.threads = 1; // parallelism lives at the replication level
            RngStream seeder =
                RngStream::from_key(scenario.seed, static_cast<std::uint64_t>(r), stream_tag::sim_seed);
            config.seed = seeder.next_u64();

            const BootstrapRun run = bootstrap_auc_ci(outcomes, config);
            row.covered = run.interval.contains(result.true_auc);
            row.width = run.interval.width();
            const BivariateFit fit = fit_reml(outcomes, config.fit_options);
            row.estimate = fit.params;
            row.ok = true;
        } catch (const std::exception&) {
            row.ok = false;
        }
    });

    for (const auto& row : rows) {
        if (!row.ok) {
            ++result.fit_failures;
            continue;
        }
        ++result.completed;
        if (row.covered) ++result.covered;
        result.mean_width += row.width;
        result.bias_mu_a += row.estimate.mu_a - scenario.true_params.mu_a;
        result.bias_mu_b += row.estimate.mu_b - scenario.true_params.mu_b;
        result.bias_sigma_a += row.estimate.sigma_a - scenario.true_params.sigma_a;
        result.bias_sigma_b += row.estimate.sigma_b - scenario.true_params.sigma_b;
        result.bias_rho += row.estimate.rho - scenario.true_params.rho;
    }

    if (result.fit_failures * 10 > scenario.replications)
        throw convergence_error("coverage_study: " + std::to_string(result.fit_failures) + " of " +
                                std::to_string(scenario.replications) +
                                " replications failed to fit (over the 10% budget)");
    if (result.completed == 0) throw convergence_error("coverage_study: no completed replications");

    const double n = static_cast<double>(result.completed);
    result.coverage = static_cast<double>(result.covered) / n;
    result.coverage_se = std::sqrt(result.coverage * (1.0 - result.coverage) / n);
    result.mean_width /= n;
    result.bias_mu_a /= n;
    result.bias_mu_b /= n;
    result.bias_sigma_a /= n;
    result.bias_sigma_b /= n;
    result.bias_rho /= n;
    return result;
}

void append_coverage_ledger(const std::filesystem::path& path, const SimScenario& scenario,
                            const CoverageResult& result) {
    const bool fresh = !std::filesystem::exists(path) || std::filesystem::file_size(path) == 0;
    std::ofstream out(path, std::ios::app);
    if (!out) throw error("cannot open ledger '" + path.string() + "' for append");
    if (fresh)
        out << "scenario_hash,mu_a,mu_b,sigma_a,sigma_b,rho,n_studies,n_pos,n_neg,replications,b,"
               "seed,true_auc,completed,coverage,coverage_se,mean_width,bias_mu_a,bias_mu_b,"
               "bias_sigma_a,bias_sigma_b,bias_rho\n";
    char buf[512];
    std::snprintf(buf, sizeof(buf),
                  "%s,%.6g,%.6g,%.6g,%.6g,%.6g,%d,%d,%d,%d,%d,%llu,%.6f,%d,%.6f,%.6f,%.6f,%.6g,%.6g,%.6g,%.6g,%.6g\n",
                  scenario_hash(scenario).c_str(), scenario.true_params.mu_a,
                  scenario.true_params.mu_b, scenario.true_params.sigma_a,
                  scenario.true_params.sigma_b, scenario.true_params.rho, scenario.n_studies,
                  scenario.n_pos, scenario.n_neg, scenario.replications, scenario.bootstrap.b,
                  static_cast<unsigned long long>(scenario.seed), result.true_auc, result.completed,
                  result.coverage, result.coverage_se, result.mean_width, result.bias_mu_a,
                  result.bias_mu_b, result.bias_sigma_a, result.bias_sigma_b, result.bias_rho);
    out << buf;
}

} // namespace dtaboot
