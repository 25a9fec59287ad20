// Study-level 2x2 count data: CSV ingestion, validation, continuity
// correction, and the logit-scale outcome transform feeding the bivariate
// model.
//
// CSV format: header `study,TP,FP,FN,TN[,test]`, comma separated, UTF-8,
// lines starting with '#' ignored. Study order is preserved everywhere;
// influence output is indexed by position and label.
#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "dtaboot/errors.hpp"

namespace dtaboot {

enum class CorrectionPolicy {
    AffectedStudies, // add 0.5 to all four cells of studies containing a zero cell
    AllStudies,      // add 0.5 to all four cells of every study
    None             // reject datasets with zero cells
};

std::string_view to_string(CorrectionPolicy policy);
CorrectionPolicy correction_policy_from_string(std::string_view name);

struct Study2x2 {
    std::string label;
    long long tp{0};
    long long fp{0};
    long long fn{0};
    long long tn{0};
    std::string test_group; // optional diagnostic-method identifier

    long long n_pos() const { return tp + fn; } // diseased arm size
    long long n_neg() const { return fp + tn; } // non-diseased arm size
    bool has_zero_cell() const { return tp == 0 || fp == 0 || fn == 0 || tn == 0; }
};

struct Dataset {
    std::string name;
    std::vector<Study2x2> studies;

    std::size_t size() const { return studies.size(); }
};

// One study's logit-scale outcome pair with within-study variances.
// s2_a = 1/tp' + 1/fn', s2_b = 1/fp' + 1/tn' on corrected counts.
struct LogitOutcome {
    double y_a{0.0};  // logit sensitivity estimate
    double y_b{0.0};  // logit FPR estimate
    double s2_a{0.0}; // within-study variance of y_a
    double s2_b{0.0}; // within-study variance of y_b
};

struct OutcomeSet {
    Dataset source; // owned copy; studies stay aligned with `outcomes`
    std::vector<LogitOutcome> outcomes;
    CorrectionPolicy policy{CorrectionPolicy::AffectedStudies};

    std::size_t size() const { return outcomes.size(); }
};

// Parse the CSV format above. Throws parse_error with a line number for
// malformed rows, duplicate labels, negative or non-integer counts, empty
// arms, and empty input.
Dataset parse_dataset(std::istream& in, std::string name = "");
Dataset parse_dataset_file(const std::filesystem::path& path);

// Transform counts to logit outcomes under the given continuity-correction
// policy. Under CorrectionPolicy::None any zero cell is an error.
OutcomeSet to_outcomes(const Dataset& dataset,
                       CorrectionPolicy policy = CorrectionPolicy::AffectedStudies);

// Studies whose test_group equals `group` (dataset order preserved).
Dataset filter_group(const Dataset& dataset, std::string_view group);

// Distinct test_group values in first-appearance order ("" when untagged).
std::vector<std::string> group_names(const Dataset& dataset);

// Remove the study at `index` (for leave-one-out refits).
OutcomeSet drop_study(const OutcomeSet& outcomes, std::size_t index);

} // namespace dtaboot
