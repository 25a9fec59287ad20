#include "dtaboot/influence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dtaboot/parallel.hpp"

namespace dtaboot {

InfluenceTable leave_one_out_table(const OutcomeSet& data, const BootstrapConfig& config) {
    const InfluenceDistribution dist = bootstrap_influence_distribution(data, config);
    const std::size_t n = data.size();

    InfluenceTable table;
    table.auc_full = dist.auc_full;
    table.effective_b = dist.effective_b;
    table.failures = dist.failures;
    table.rows.resize(n);

    parallel_for_index(static_cast<std::int64_t>(n), config.threads, [&](std::int64_t i) {
        const auto idx = static_cast<std::size_t>(i);
        InfluenceRow row;
        row.label = data.source.studies[idx].label;
        row.index = static_cast<int>(idx) + 1;
        row.lo = dist.thresholds[idx].lo;
        row.hi = dist.thresholds[idx].hi;
        try {
            const BivariateFit loo_fit = fit_reml(drop_study(data, idx), config.fit_options);
            if (!loo_fit.converged) throw convergence_error("leave-one-out refit did not converge");
            row.auc_loo = compute_auc(hsroc_params(loo_fit), config.fpr_lo, config.fpr_hi,
                                      config.auc_resolution)
                              .value;
            row.delta_auc = row.auc_loo - table.auc_full;
            row.influential = row.delta_auc < row.lo || row.delta_auc > row.hi;
        } catch (const std::exception&) {
            row.fit_ok = false;
            row.auc_loo = std::numeric_limits<double>::quiet_NaN();
            row.delta_auc = std::numeric_limits<double>::quiet_NaN();
            row.influential = false;
        }
        table.rows[idx] = std::move(row);
    });
    return table;
}

std::vector<FlaggedStudy> flag_influential(const std::vector<InfluenceRow>& rows) {
    std::vector<FlaggedStudy> flagged;
    for (const auto& row : rows) {
        if (!row.fit_ok || !row.influential) continue;
        FlaggedStudy f;
        f.label = row.label;
        f.index = row.index;
        f.delta_auc = row.delta_auc;
        f.narrative = row.delta_auc > 0.0 ? "AUC increases when removed" : "AUC decreases when removed";
        flagged.push_back(std::move(f));
    }
    return flagged;
}

std::vector<InfluenceRow> sorted_by_magnitude(const std::vector<InfluenceRow>& rows) {
    std::vector<InfluenceRow> sorted = rows;
    std::stable_sort(sorted.begin(), sorted.end(), [](const InfluenceRow& a, const InfluenceRow& b) {
        const double ma = a.fit_ok ? std::abs(a.delta_auc) : -1.0;
        const double mb = b.fit_ok ? std::abs(b.delta_auc) : -1.0;
        return ma > mb;
    });
    return sorted;
}

} // namespace dtaboot
