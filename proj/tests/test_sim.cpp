#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "dtaboot/simulate.hpp"
#include "dtaboot/sroc.hpp"
#include "dtaboot/stats.hpp"
#include "support/fixtures.hpp"

using namespace dtaboot;

TEST_CASE("simulate_dataset is deterministic given the seed") {
    SimScenario sc;
    sc.seed = 42;
    const Dataset a = simulate_dataset(sc, 3);
    const Dataset b = simulate_dataset(sc, 3);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a.studies[i].tp == b.studies[i].tp);
        CHECK(a.studies[i].fp == b.studies[i].fp);
    }
    const Dataset c = simulate_dataset(sc, 4);
    bool identical = true;
    for (std::size_t i = 0; i < a.size(); ++i)
        identical = identical && a.studies[i].tp == c.studies[i].tp;
    CHECK_FALSE(identical);
}

TEST_CASE("degenerate heterogeneity with huge arms pins the proportions") {
    SimScenario sc;
    sc.true_params = {0.0, 0.0, 0.0, 0.0, 0.0};
    sc.n_studies = 4;
    sc.n_pos = 1000000;
    sc.n_neg = 1000000;
    sc.seed = 7;
    const Dataset d = simulate_dataset(sc, 0);
    for (const auto& s : d.studies) {
        CHECK(std::abs(static_cast<double>(s.tp) / s.n_pos() - 0.5) < 0.005);
        CHECK(std::abs(static_cast<double>(s.fp) / s.n_neg() - 0.5) < 0.005);
    }
}

TEST_CASE("logit-scale moments match Sigma plus within-study noise") {
    SimScenario sc;
    sc.true_params = {1.2, -1.0, 0.5, 0.5, -0.4};
    sc.n_studies = 10000;
    sc.n_pos = 200;
    sc.n_neg = 200;
    sc.seed = 21;
    const OutcomeSet os = to_outcomes(simulate_dataset(sc, 0));
    const double n = static_cast<double>(os.size());
    double ma = 0, mb = 0, msa = 0, msb = 0;
    for (const auto& o : os.outcomes) {
        ma += o.y_a / n;
        mb += o.y_b / n;
        msa += o.s2_a / n;
        msb += o.s2_b / n;
    }
    double vaa = 0, vab = 0, vbb = 0;
    for (const auto& o : os.outcomes) {
        vaa += (o.y_a - ma) * (o.y_a - ma) / (n - 1);
        vab += (o.y_a - ma) * (o.y_b - mb) / (n - 1);
        vbb += (o.y_b - mb) * (o.y_b - mb) / (n - 1);
    }
    // expected marginal covariance: Sigma + average within-study noise
    CHECK(vaa == doctest::Approx(0.25 + msa).epsilon(0.05));
    CHECK(vbb == doctest::Approx(0.25 + msb).epsilon(0.05));
    CHECK(vab == doctest::Approx(-0.4 * 0.5 * 0.5).epsilon(0.08));
}

TEST_CASE("true AUC of a diagonal-curve scenario is 0.5") {
    const BivariateParams diag{0.3, 0.3, 0.5, 0.5, 0.1};
    CHECK(compute_auc(hsroc_params(diag)).value == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("plug-in AUC on an enormous simulated set approaches the true AUC") {
    SimScenario sc;
    sc.true_params = {1.2, -1.0, 0.5, 0.5, -0.4};
    sc.n_studies = 500;
    sc.n_pos = 10000;
    sc.n_neg = 10000;
    sc.seed = 33;
    const double truth = compute_auc(hsroc_params(sc.true_params)).value;
    const BivariateFit fit = fit_reml(to_outcomes(simulate_dataset(sc, 0)));
    REQUIRE(fit.converged);
    const double plug_in = compute_auc(hsroc_params(fit)).value;
    CHECK(std::abs(plug_in - truth) < 0.01);
}

TEST_CASE("scenario parsing, validation, and hashing") {
    std::istringstream in(
        "# test scenario\n"
        "mu_a = 0.9\n"
        "mu_b = -1.4\n"
        "sigma_a = 0.4\n"
        "sigma_b = 0.6\n"
        "rho = -0.2\n"
        "n_studies = 12\n"
        "n_pos = 80\n"
        "n_neg = 90\n"
        "replications = 150\n"
        "b = 1000\n"
        "seed = 77\n"
        "variant = binomial\n");
    const SimScenario sc = parse_scenario(in);
    CHECK(sc.true_params.mu_a == doctest::Approx(0.9));
    CHECK(sc.n_neg == 90);
    CHECK(sc.bootstrap.variant == ResamplingVariant::Binomial);
    CHECK(scenario_hash(sc) == scenario_hash(sc));

    SimScenario other = sc;
    other.seed = 78;
    CHECK(scenario_hash(other) != scenario_hash(sc));

    SUBCASE("bad key") {
        std::istringstream bad("nope = 3\n");
        CHECK_THROWS_AS(parse_scenario(bad), parse_error);
    }
    SUBCASE("constraints") {
        SimScenario s2 = sc;
        s2.replications = 50;
        CHECK_THROWS_AS(s2.validate(), std::invalid_argument);
        s2 = sc;
        s2.n_pos = 5;
        CHECK_THROWS_AS(s2.validate(), std::invalid_argument);
    }
}

TEST_CASE("coverage_study aborts when too many replications cannot be analyzed") {
    // sensitivity ~0.993 with correction policy `none`: nearly every simulated
    // dataset contains a zero cell and is rejected before fitting
    SimScenario sc;
    sc.true_params = {5.0, -1.0, 0.3, 0.3, 0.0};
    sc.n_studies = 10;
    sc.n_pos = 150;
    sc.n_neg = 150;
    sc.replications = 100;
    sc.bootstrap.b = 1000;
    sc.bootstrap.auc_resolution = 512;
    sc.correction = CorrectionPolicy::None;
    sc.seed = 3;
    CHECK_THROWS_WITH_AS(coverage_study(sc, 2), doctest::Contains("10%"), convergence_error);
}

TEST_CASE("coverage ledger appends a header once and one row per run") {
    const auto path = std::filesystem::temp_directory_path() / "dtaboot_ledger_test.csv";
    std::filesystem::remove(path);
    SimScenario sc;
    CoverageResult r;
    r.true_auc = 0.8;
    r.completed = 100;
    r.coverage = 0.94;
    append_coverage_ledger(path, sc, r);
    append_coverage_ledger(path, sc, r);
    std::ifstream in(path);
    std::string line;
    int lines = 0, headers = 0;
    while (std::getline(in, line)) {
        ++lines;
        if (line.rfind("scenario_hash,", 0) == 0) ++headers;
    }
    CHECK(lines == 3);
    CHECK(headers == 1);
    std::filesystem::remove(path);
}

TEST_CASE("small coverage run: interval width shrinks as studies double" * doctest::timeout(1200)) {
    SimScenario sc;
    sc.true_params = {1.2, -1.0, 0.5, 0.5, -0.4};
    sc.n_pos = 100;
    sc.n_neg = 100;
    sc.replications = 100;
    sc.bootstrap.b = 1000;
    sc.bootstrap.auc_resolution = 512;
    sc.seed = 5150;

    sc.n_studies = 8;
    const CoverageResult small = coverage_study(sc, 2);
    sc.n_studies = 16;
    const CoverageResult big = coverage_study(sc, 2);
    CHECK(big.mean_width < small.mean_width);
    // replication losses must stay inside the 10% abort budget
    CHECK(small.completed >= 90);
    CHECK(big.completed >= 90);
}

TEST_CASE("coverage is stable across seeds" * doctest::timeout(1500)) {
    SimScenario sc;
    sc.true_params = {1.2, -1.0, 0.5, 0.5, -0.4};
    sc.n_studies = 8;
    sc.n_pos = 100;
    sc.n_neg = 100;
    sc.replications = 100;
    sc.bootstrap.b = 1000;
    sc.bootstrap.auc_resolution = 512;

    std::vector<double> coverages;
    for (std::uint64_t seed : {101u, 202u, 303u, 404u, 505u}) {
        sc.seed = seed;
        coverages.push_back(coverage_study(sc, 2).coverage);
    }
    double mean = 0.0;
    for (const double c : coverages) mean += c / static_cast<double>(coverages.size());
    for (const double c : coverages) {
        const double se = std::sqrt(std::max(c * (1.0 - c), 1e-4) / 100.0);
        CHECK(std::abs(c - mean) <= 3.0 * se);
    }
}
