// Parametric bootstrap engine: AUC confidence intervals, the dAUC
// significance test between two diagnostic tests, and the sampling
// distribution of the leave-one-out influence statistic.
//
// Per replicate: resample study-level outcomes from the fitted model, refit
// REML, recompute the statistic. Replicates that fail to refit are logged,
// discarded, and replaced by fresh draws until the requested count succeeds
// or the failure budget is exceeded. Replicate b draws from an RNG stream
// keyed by (seed, b, tag) only, so output is identical across thread counts.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dtaboot/errors.hpp"
#include "dtaboot/reml.hpp"
#include "dtaboot/rng.hpp"
#include "dtaboot/sroc.hpp"
#include "dtaboot/study_data.hpp"

namespace dtaboot {

enum class ResamplingVariant {
    Normal,  // y* ~ N(theta*, S_i) with the original S_i
    Binomial // TP*,FP* ~ Bin(n, expit(theta*)), then the count transform
};

std::string_view to_string(ResamplingVariant variant);
ResamplingVariant resampling_variant_from_string(std::string_view name);

struct BootstrapConfig {
    int b{2000};                      // requested replicate count (>= 1000)
    std::uint64_t seed{0};
    ResamplingVariant variant{ResamplingVariant::Normal};
    double level{0.95};
    double max_failure_fraction{0.05};
    int threads{1};                   // 0 = hardware concurrency
    FitOptions fit_options{};
    double fpr_lo{0.0};               // AUC integration range
    double fpr_hi{1.0};
    int auc_resolution{kDefaultAucResolution};

    void validate() const;
};

struct ReplicateFailure {
    std::int64_t replicate_index{0};
    std::string reason;
};

struct Interval {
    double lo{0.0};
    double hi{0.0};
    bool contains(double x) const { return x >= lo && x <= hi; }
    double width() const { return hi - lo; }
};

struct BootstrapRun {
    std::vector<double> statistics;        // successful replicates, by attempt index
    std::int64_t requested_b{0};
    std::int64_t effective_b{0};
    std::vector<ReplicateFailure> failures;
    Interval interval;                     // percentile CI at config.level
    double point{0.0};                     // plug-in estimate from the original data
    double level{0.95};
    std::uint64_t seed{0};
};

struct DaucTestResult {
    double dauc{0.0};   // observed AUC_1 - AUC_2
    Interval interval;  // percentile CI of the bootstrap dAUC distribution
    double p_value{1.0};
    BootstrapRun run;   // replicate dAUC values and failure log
};

struct InfluenceDistribution {
    double auc_full{0.0};                           // plug-in full-data AUC
    std::vector<std::vector<double>> delta_by_study; // [study][replicate]
    std::vector<Interval> thresholds;                // per-study percentile bounds
    std::int64_t requested_b{0};
    std::int64_t effective_b{0};
    std::vector<ReplicateFailure> failures;
    std::uint64_t seed{0};
};

// One synthetic replicate of the whole study set from the fitted model.
// The binomial variant reapplies the set's continuity-correction policy to
// the synthetic counts and can therefore throw under policy `none`.
OutcomeSet resample_replicate(const BivariateFit& fit, const OutcomeSet& data,
                              ResamplingVariant variant, RngStream& stream);

// Algorithm: fit, resample B times, refit, recompute the AUC, percentile CI.
BootstrapRun bootstrap_auc_ci(const OutcomeSet& data, const BootstrapConfig& config);

// Two-test dAUC bootstrap with independent per-arm streams; two-sided
// percentile-inversion p-value.
DaucTestResult bootstrap_compare_auc(const OutcomeSet& data1, const OutcomeSet& data2,
                                     const BootstrapConfig& config);

// Sampling distribution of the per-study leave-one-out AUC change on
// synthetic full sets, with per-study percentile thresholds. Requires N >= 4.
InfluenceDistribution bootstrap_influence_distribution(const OutcomeSet& data,
                                                       const BootstrapConfig& config);

// Empirical percentile interval using linear interpolation of order
// statistics (h = (n-1)p + 1). Needs at least 2 samples.
Interval percentile_interval(std::vector<double> samples, double level);

// Two-sided percentile-inversion p-value with add-one correction:
//   p = min(1, 2 min[(1 + #{s<=0})/(B+1), (1 + #{s>=0})/(B+1)]).
// Requires at least 1000 samples.
double bootstrap_p_value(const std::vector<double>& samples);

} // namespace dtaboot
