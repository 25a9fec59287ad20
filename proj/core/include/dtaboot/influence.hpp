// Leave-one-study-out influence diagnostics: the AUC change when each study
// is removed, judged against per-study bootstrap percentile thresholds.
//
// Sign convention: delta(i) = AUC^(-i) - AUC_full (removal that lowers the
// AUC gives a negative delta).
#pragma once

#include <string>
#include <vector>

#include "dtaboot/bootstrap.hpp"
#include "dtaboot/study_data.hpp"

namespace dtaboot {

struct InfluenceRow {
    std::string label;
    int index{0};          // 1-based study position in the dataset
    double auc_loo{0.0};   // AUC with this study removed
    double delta_auc{0.0}; // auc_loo - auc_full
    double lo{0.0};        // bootstrap 2.5th-percentile threshold
    double hi{0.0};        // bootstrap 97.5th-percentile threshold
    bool influential{false};
    bool fit_ok{true};     // leave-one-out refit converged
};

struct InfluenceTable {
    double auc_full{0.0};
    std::vector<InfluenceRow> rows; // ordered by study index
    std::int64_t effective_b{0};
    std::vector<ReplicateFailure> failures;
};

struct FlaggedStudy {
    std::string label;
    int index{0};
    double delta_auc{0.0};
    std::string narrative; // direction of the AUC change on removal
};

// Full influence table: per-study leave-one-out refit + AUC, thresholds from
// the bootstrap distribution. Requires N >= 4 and a convergent full fit.
// A non-convergent leave-one-out refit marks the row, it is not fatal.
InfluenceTable leave_one_out_table(const OutcomeSet& data, const BootstrapConfig& config);

// Flagged rows with a direction annotation.
std::vector<FlaggedStudy> flag_influential(const std::vector<InfluenceRow>& rows);

// Copy of rows sorted by decreasing |delta_auc| (report option).
std::vector<InfluenceRow> sorted_by_magnitude(const std::vector<InfluenceRow>& rows);

} // namespace dtaboot
