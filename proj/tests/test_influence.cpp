#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "dtaboot/influence.hpp"
#include "support/fixtures.hpp"

using namespace dtaboot;

namespace {

BootstrapConfig fast_config(std::uint64_t seed) {
    BootstrapConfig cfg;
    cfg.b = 1000;
    cfg.seed = seed;
    cfg.threads = 2;
    cfg.auc_resolution = 512;
    return cfg;
}

Dataset reversed(const Dataset& d) {
    Dataset out;
    out.name = d.name;
    out.studies.assign(d.studies.rbegin(), d.studies.rend());
    return out;
}

} // namespace

TEST_CASE("leave_one_out_table basic contract and sum rule") {
    const Dataset d = testsupport::synthetic_dataset(8, 111);
    const OutcomeSet data = to_outcomes(d);
    const InfluenceTable table = leave_one_out_table(data, fast_config(5));

    REQUIRE(table.rows.size() == 8);
    double mean_loo = 0.0, min_loo = 1.0, max_loo = 0.0;
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const auto& row = table.rows[i];
        CHECK(row.index == static_cast<int>(i) + 1);
        CHECK(row.label == d.studies[i].label);
        REQUIRE(row.fit_ok);
        CHECK(row.delta_auc == doctest::Approx(row.auc_loo - table.auc_full).epsilon(1e-12));
        CHECK(row.lo < row.hi);
        CHECK(row.influential == (row.delta_auc < row.lo || row.delta_auc > row.hi));
        mean_loo += row.auc_loo / static_cast<double>(table.rows.size());
        min_loo = std::min(min_loo, row.auc_loo);
        max_loo = std::max(max_loo, row.auc_loo);
    }
    // tabulation integrity: the mean of leave-one-out AUCs is inside their range
    CHECK(mean_loo >= min_loo);
    CHECK(mean_loo <= max_loo);
}

TEST_CASE("removing then re-adding a study reproduces the full-data AUC") {
    const OutcomeSet data = to_outcomes(testsupport::synthetic_dataset(9, 131));
    const BootstrapConfig cfg = fast_config(9);
    const double full = compute_auc(hsroc_params(fit_reml(data, cfg.fit_options)), 0, 1, 512).value;

    OutcomeSet readded = drop_study(data, 3);
    readded.source.studies.push_back(data.source.studies[3]);
    readded.outcomes.push_back(data.outcomes[3]);
    const double again =
        compute_auc(hsroc_params(fit_reml(readded, cfg.fit_options)), 0, 1, 512).value;
    CHECK(again == doctest::Approx(full).epsilon(1e-6));
}

TEST_CASE("copies of the same study have coinciding leave-one-out fits") {
    // 5 distinct studies duplicated 3x: removing any copy of study k leaves
    // permutations of the same set, so the deltas agree within optimizer noise
    Dataset base = testsupport::synthetic_dataset(5, 151);
    Dataset tripled;
    tripled.name = "tripled";
    for (int copy = 0; copy < 3; ++copy) {
        for (const auto& s : base.studies) {
            Study2x2 dup = s;
            dup.label = s.label + "_c" + std::to_string(copy);
            tripled.studies.push_back(dup);
        }
    }
    const OutcomeSet data = to_outcomes(tripled);
    const InfluenceTable table = leave_one_out_table(data, fast_config(77));
    REQUIRE(table.rows.size() == 15);
    for (std::size_t k = 0; k < 5; ++k) {
        const double d0 = table.rows[k].delta_auc;
        CHECK(table.rows[k + 5].delta_auc == doctest::Approx(d0).epsilon(5e-5));
        CHECK(table.rows[k + 10].delta_auc == doctest::Approx(d0).epsilon(5e-5));
    }
}

TEST_CASE("fully identical studies cannot be fitted (degenerate data)") {
    // the symmetry limit: removal changes nothing, but the model itself is
    // unidentified there and the fit reports it rather than a zero table
    Dataset d;
    for (int i = 0; i < 6; ++i) d.studies.push_back({"s" + std::to_string(i), 20, 5, 10, 40, ""});
    CHECK_THROWS_AS(leave_one_out_table(to_outcomes(d), fast_config(3)), convergence_error);
}

TEST_CASE("flag_influential annotates direction and skips clean rows") {
    std::vector<InfluenceRow> rows(3);
    rows[0] = {"up", 1, 0.8, 0.05, -0.02, 0.02, true, true};
    rows[1] = {"down", 2, 0.7, -0.06, -0.02, 0.02, true, true};
    rows[2] = {"mid", 3, 0.75, 0.001, -0.02, 0.02, false, true};
    const auto flagged = flag_influential(rows);
    REQUIRE(flagged.size() == 2);
    CHECK(flagged[0].label == "up");
    CHECK(flagged[0].narrative == "AUC increases when removed");
    CHECK(flagged[1].narrative == "AUC decreases when removed");

    SUBCASE("all-zero deltas flag nothing") {
        for (auto& r : rows) {
            r.delta_auc = 0.0;
            r.influential = false;
        }
        CHECK(flag_influential(rows).empty());
    }
}

TEST_CASE("sorted_by_magnitude orders by |delta|") {
    std::vector<InfluenceRow> rows(3);
    rows[0] = {"a", 1, 0.8, 0.01, -1, 1, false, true};
    rows[1] = {"b", 2, 0.7, -0.06, -1, 1, false, true};
    rows[2] = {"c", 3, 0.75, 0.03, -1, 1, false, true};
    const auto sorted = sorted_by_magnitude(rows);
    CHECK(sorted[0].label == "b");
    CHECK(sorted[1].label == "c");
    CHECK(sorted[2].label == "a");
}

TEST_CASE("flags are invariant to the ordering of studies in the input") {
    // one deliberately extreme study among a tight cluster
    Dataset d = testsupport::synthetic_dataset(9, 171, 1.1, -1.1, 0.35, -0.2, 150);
    Study2x2 outlier;
    outlier.label = "outlier";
    outlier.tp = 99; outlier.fn = 1;   // sensitivity 0.99
    outlier.fp = 55; outlier.tn = 45;  // FPR 0.55
    d.studies.push_back(outlier);

    const InfluenceTable fwd = leave_one_out_table(to_outcomes(d), fast_config(13));
    const InfluenceTable rev = leave_one_out_table(to_outcomes(reversed(d)), fast_config(13));

    std::set<std::string> flagged_fwd, flagged_rev;
    for (const auto& f : flag_influential(fwd.rows)) flagged_fwd.insert(f.label);
    for (const auto& f : flag_influential(rev.rows)) flagged_rev.insert(f.label);
    CHECK(flagged_fwd == flagged_rev);
    CHECK(fwd.auc_full == doctest::Approx(rev.auc_full).epsilon(1e-6));
    // the same leave-one-out AUCs, keyed by label
    for (const auto& row : fwd.rows) {
        const auto it = std::find_if(rev.rows.begin(), rev.rows.end(),
                                     [&](const InfluenceRow& r) { return r.label == row.label; });
        REQUIRE(it != rev.rows.end());
        CHECK(it->auc_loo == doctest::Approx(row.auc_loo).epsilon(1e-6));
    }
}

TEST_CASE("requires N >= 4") {
    const OutcomeSet tiny = to_outcomes(testsupport::synthetic_dataset(3, 181));
    CHECK_THROWS_AS(leave_one_out_table(tiny, fast_config(1)), parse_error);
}
