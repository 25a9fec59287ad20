// Simulation harness: generate synthetic meta-analyses from known bivariate
// parameters, and measure empirical coverage of the bootstrap AUC interval
// together with REML parameter recovery.
#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>

#include "dtaboot/bootstrap.hpp"
#include "dtaboot/reml.hpp"
#include "dtaboot/study_data.hpp"

namespace dtaboot {

struct SimScenario {
    BivariateParams true_params{1.2, -1.0, 0.5, 0.5, -0.4};
    int n_studies{20};
    int n_pos{200};       // diseased subjects per study
    int n_pos_max{0};     // when > n_pos, sampled uniformly from [n_pos, n_pos_max]
    int n_neg{200};
    int n_neg_max{0};
    int replications{500};
    BootstrapConfig bootstrap{};   // bootstrap.seed is re-derived per replication
    std::uint64_t seed{20200620};
    CorrectionPolicy correction{CorrectionPolicy::AffectedStudies};

    void validate() const;
};

// Key-value scenario file: `key = value` lines, '#' comments. Keys: mu_a,
// mu_b, sigma_a, sigma_b, rho, n_studies, n_pos, n_pos_max, n_neg,
// n_neg_max, replications, b, level, variant, correction, seed, threads.
SimScenario parse_scenario(std::istream& in);
SimScenario parse_scenario_file(const std::filesystem::path& path);

// Stable hash of the scenario settings for the results ledger.
std::string scenario_hash(const SimScenario& scenario);

// theta_i ~ N(mu, Sigma), then binomial counts with p = expit(theta).
// Deterministic given (scenario.seed, replication_index).
Dataset simulate_dataset(const SimScenario& scenario, std::uint64_t replication_index);

struct CoverageResult {
    int replications{0};     // attempted
    int completed{0};        // replications with a usable interval
    int covered{0};
    int fit_failures{0};     // replications lost to fit / budget failures
    double true_auc{0.0};
    double coverage{0.0};    // covered / completed
    double coverage_se{0.0}; // binomial SE of the coverage estimate
    double mean_width{0.0};
    // mean(estimate - truth) over completed replications
    double bias_mu_a{0.0};
    double bias_mu_b{0.0};
    double bias_sigma_a{0.0};
    double bias_sigma_b{0.0};
    double bias_rho{0.0};
};

// For each replication: simulate, bootstrap the AUC interval, check whether
// the true-parameter AUC is covered. Aborts when more than 10% of
// replications fail to fit. Replications run in parallel; the bootstrap
// inside each replication runs single-threaded.
CoverageResult coverage_study(const SimScenario& scenario, int threads = 1);

// Append one ledger row (writing the header first when the file is new).
void append_coverage_ledger(const std::filesystem::path& path, const SimScenario& scenario,
                            const CoverageResult& result);

} // namespace dtaboot
