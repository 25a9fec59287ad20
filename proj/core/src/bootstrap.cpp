#include "dtaboot/bootstrap.hpp"

#include <algorithm>
#include <cmath>

#include "dtaboot/parallel.hpp"
#include "dtaboot/stats.hpp"

namespace dtaboot {

std::string_view to_string(ResamplingVariant variant) {
    return variant == ResamplingVariant::Normal ? "normal" : "binomial";
}

ResamplingVariant resampling_variant_from_string(std::string_view name) {
    if (name == "normal") return ResamplingVariant::Normal;
    if (name == "binomial") return ResamplingVariant::Binomial;
    throw parse_error("unknown resampling variant '" + std::string(name) +
                      "' (expected normal or binomial)");
}

void BootstrapConfig::validate() const {
    if (b < 1000) throw std::invalid_argument("bootstrap: b must be >= 1000");
    if (!(level > 0.0 && level < 1.0))
        throw std::invalid_argument("bootstrap: level must be in (0,1)");
    if (!(max_failure_fraction >= 0.0 && max_failure_fraction < 1.0))
        throw std::invalid_argument("bootstrap: max_failure_fraction must be in [0,1)");
    if (threads < 0) throw std::invalid_argument("bootstrap: threads must be >= 0");
    if (!(fpr_lo >= 0.0 && fpr_lo < fpr_hi && fpr_hi <= 1.0))
        throw std::invalid_argument("bootstrap: AUC range must satisfy 0 <= lo < hi <= 1");
}

Interval percentile_interval(std::vector<double> samples, double level) {
    if (samples.size() < 2)
        throw std::invalid_argument("percentile_interval: need at least 2 samples");
    if (!(level > 0.0 && level < 1.0))
        throw std::invalid_argument("percentile_interval: level must be in (0,1)");
    std::sort(samples.begin(), samples.end());

    auto quantile = [&](double p) {
        const double h = (static_cast<double>(samples.size()) - 1.0) * p; // 0-based position
        const auto idx = static_cast<std::size_t>(std::floor(h));
        if (idx + 1 >= samples.size()) return samples.back();
        const double frac = h - std::floor(h);
        return samples[idx] + frac * (samples[idx + 1] - samples[idx]);
    };

    const double alpha = 1.0 - level;
    return Interval{quantile(alpha / 2.0), quantile(1.0 - alpha / 2.0)};
}

double bootstrap_p_value(const std::vector<double>& samples) {
    if (samples.size() < 1000)
        throw std::invalid_argument("bootstrap_p_value: need at least 1000 samples");
    std::int64_t le = 0, ge = 0;
    for (const double s : samples) {
        if (s <= 0.0) ++le;
        if (s >= 0.0) ++ge;
    }
    const double denom = static_cast<double>(samples.size()) + 1.0;
    const double one_sided = std::min((1.0 + static_cast<double>(le)) / denom,
                                      (1.0 + static_cast<double>(ge)) / denom);
    return std::min(1.0, 2.0 * one_sided);
}

OutcomeSet resample_replicate(const BivariateFit& fit, const OutcomeSet& data,
                              ResamplingVariant variant, RngStream& stream) {
    if (!fit.converged) throw convergence_error("resample_replicate: fit did not converge");

    const Mat2 root = sampling_root(fit.params.sigma_matrix());
    const Vec2 mu = fit.params.mu();

    if (variant == ResamplingVariant::Normal) {
        OutcomeSet synthetic = data; // keeps the original S_i and source counts
        for (std::size_t i = 0; i < data.size(); ++i) {
            const Vec2 z{stream.next_normal(), stream.next_normal()};
            const Vec2 theta = mu + root * z;
            auto& out = synthetic.outcomes[i];
            out.y_a = theta.a + std::sqrt(data.outcomes[i].s2_a) * stream.next_normal();
            out.y_b = theta.b + std::sqrt(data.outcomes[i].s2_b) * stream.next_normal();
        }
        return synthetic;
    }

    // binomial variant: synthetic counts through the same transform pipeline
    Dataset counts = data.source;
    for (std::size_t i = 0; i < counts.studies.size(); ++i) {
        const Vec2 z{stream.next_normal(), stream.next_normal()};
        const Vec2 theta = mu + root * z;
        auto& study = counts.studies[i];
        const long long n_pos = study.n_pos();
        const long long n_neg = study.n_neg();
        study.tp = stream.next_binomial(n_pos, expit(theta.a));
        study.fn = n_pos - study.tp;
        study.fp = stream.next_binomial(n_neg, expit(theta.b));
        study.tn = n_neg - study.fp;
    }
    return to_outcomes(counts, data.policy);
}

namespace {

struct AttemptOutcome {
    bool ok{false};
    std::vector<double> values; // statistic(s) for this replicate
    std::string reason;
};

// Deterministic redraw loop. Attempt indices are assigned in waves
// (0..B-1 first, then one fresh index per failure), so the set of attempted
// indices — and therefore every random draw — is independent of the thread
// count. Successful statistics are kept in attempt-index order.
template <typename AttemptFn>
void run_attempts(std::int64_t requested_b, double max_failure_fraction, int threads,
                  const AttemptFn& attempt, std::vector<std::vector<double>>& statistics,
                  std::vector<ReplicateFailure>& failures) {
    const auto max_failures =
        static_cast<std::int64_t>(std::floor(max_failure_fraction * static_cast<double>(requested_b)));

    std::int64_t next_index = 0;
    std::int64_t successes = 0;
    statistics.clear();
    failures.clear();

    std::vector<std::pair<std::int64_t, AttemptOutcome>> kept;
    while (successes < requested_b) {
        const std::int64_t wave = requested_b - successes;
        std::vector<AttemptOutcome> outcomes(static_cast<std::size_t>(wave));
        const std::int64_t base = next_index;
        parallel_for_index(wave, threads, [&](std::int64_t k) {
            outcomes[static_cast<std::size_t>(k)] = attempt(base + k);
        });
        next_index += wave;

        for (std::int64_t k = 0; k < wave; ++k) {
            auto& oc = outcomes[static_cast<std::size_t>(k)];
            if (oc.ok) {
                ++successes;
                kept.emplace_back(base + k, std::move(oc));
            } else {
                failures.push_back(ReplicateFailure{base + k, std::move(oc.reason)});
            }
        }
        if (static_cast<std::int64_t>(failures.size()) > max_failures) {
            std::string detail = failures.empty() ? "" : ("; first: " + failures.front().reason);
            throw budget_error("bootstrap failure budget exceeded: " +
                               std::to_string(failures.size()) + " failed replicates of " +
                               std::to_string(requested_b) + " requested" + detail);
        }
    }

    std::sort(kept.begin(), kept.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    statistics.reserve(kept.size());
    for (auto& [idx, oc] : kept) statistics.push_back(std::move(oc.values));
}

double replicate_auc(const OutcomeSet& synthetic, const BootstrapConfig& config) {
    const BivariateFit refit = fit_reml(synthetic, config.fit_options);
    if (!refit.converged) throw convergence_error("replicate refit did not converge");
    const SrocCurve curve = hsroc_params(refit);
    return compute_auc(curve, config.fpr_lo, config.fpr_hi, config.auc_resolution).value;
}

AttemptOutcome guarded_attempt(const std::function<std::vector<double>()>& body) {
    AttemptOutcome oc;
    try {
        oc.values = body();
        oc.ok = true;
    } catch (const std::exception& e) {
        oc.reason = e.what();
    }
    return oc;
}

double plugin_auc(const OutcomeSet& data, const BootstrapConfig& config, BivariateFit& fit_out) {
    fit_out = fit_reml(data, config.fit_options);
    if (!fit_out.converged)
        throw convergence_error("bootstrap: original fit did not converge");
    return compute_auc(hsroc_params(fit_out), config.fpr_lo, config.fpr_hi, config.auc_resolution)
        .value;
}

} // namespace

BootstrapRun bootstrap_auc_ci(const OutcomeSet& data, const BootstrapConfig& config) {
    config.validate();

    BivariateFit fit;
    const double point = plugin_auc(data, config, fit);

    std::vector<std::vector<double>> stats;
    std::vector<ReplicateFailure> failures;
    run_attempts(config.b, config.max_failure_fraction, config.threads,
                 [&](std::int64_t index) {
                     return guarded_attempt([&] {
                         RngStream stream =
                             RngStream::from_key(config.seed, static_cast<std::uint64_t>(index),
                                                 stream_tag::single);
                         const OutcomeSet synthetic =
                             resample_replicate(fit, data, config.variant, stream);
                         return std::vector<double>{replicate_auc(synthetic, config)};
                     });
                 },
                 stats, failures);

    BootstrapRun run;
    run.requested_b = config.b;
    run.effective_b = static_cast<std::int64_t>(stats.size());
    run.failures = std::move(failures);
    run.point = point;
    run.level = config.level;
    run.seed = config.seed;
    run.statistics.reserve(stats.size());
    for (const auto& v : stats) run.statistics.push_back(v[0]);
    run.interval = percentile_interval(run.statistics, config.level);
    return run;
}

DaucTestResult bootstrap_compare_auc(const OutcomeSet& data1, const OutcomeSet& data2,
                                     const BootstrapConfig& config) {
    config.validate();

    BivariateFit fit1, fit2;
    const double auc1 = plugin_auc(data1, config, fit1);
    const double auc2 = plugin_auc(data2, config, fit2);

    std::vector<std::vector<double>> stats;
    std::vector<ReplicateFailure> failures;
    run_attempts(config.b, config.max_failure_fraction, config.threads,
                 [&](std::int64_t index) {
                     return guarded_attempt([&] {
                         RngStream s1 = RngStream::from_key(
                             config.seed, static_cast<std::uint64_t>(index), stream_tag::arm1);
                         RngStream s2 = RngStream::from_key(
                             config.seed, static_cast<std::uint64_t>(index), stream_tag::arm2);
                         const double a1 =
                             replicate_auc(resample_replicate(fit1, data1, config.variant, s1), config);
                         const double a2 =
                             replicate_auc(resample_replicate(fit2, data2, config.variant, s2), config);
                         return std::vector<double>{a1 - a2};
                     });
                 },
                 stats, failures);

    DaucTestResult result;
    result.dauc = auc1 - auc2;
    result.run.requested_b = config.b;
    result.run.effective_b = static_cast<std::int64_t>(stats.size());
    result.run.failures = std::move(failures);
    result.run.point = result.dauc;
    result.run.level = config.level;
    result.run.seed = config.seed;
    result.run.statistics.reserve(stats.size());
    for (const auto& v : stats) result.run.statistics.push_back(v[0]);
    result.interval = percentile_interval(result.run.statistics, config.level);
    result.run.interval = result.interval;
    result.p_value = bootstrap_p_value(result.run.statistics);
    return result;
}

InfluenceDistribution bootstrap_influence_distribution(const OutcomeSet& data,
                                                       const BootstrapConfig& config) {
    config.validate();
    const std::size_t n = data.size();
    if (n < 4)
        throw parse_error("influence bootstrap requires at least 4 studies, got " +
                          std::to_string(n));

    BivariateFit fit;
    const double auc_full = plugin_auc(data, config, fit);

    std::vector<std::vector<double>> stats;
    std::vector<ReplicateFailure> failures;
    run_attempts(config.b, config.max_failure_fraction, config.threads,
                 [&](std::int64_t index) {
                     return guarded_attempt([&] {
                         RngStream stream =
                             RngStream::from_key(config.seed, static_cast<std::uint64_t>(index),
                                                 stream_tag::single);
                         const OutcomeSet synthetic =
                             resample_replicate(fit, data, config.variant, stream);
                         const double auc_b = replicate_auc(synthetic, config);
                         std::vector<double> deltas(n);
                         for (std::size_t i = 0; i < n; ++i) {
                             const double auc_loo =
                                 replicate_auc(drop_study(synthetic, i), config);
                             deltas[i] = auc_loo - auc_b;
                         }
                         return deltas;
                     });
                 },
                 stats, failures);

    InfluenceDistribution dist;
    dist.auc_full = auc_full;
    dist.requested_b = config.b;
    dist.effective_b = static_cast<std::int64_t>(stats.size());
    dist.failures = std::move(failures);
    dist.seed = config.seed;
    dist.delta_by_study.assign(n, {});
    for (auto& per_study : dist.delta_by_study) per_study.reserve(stats.size());
    for (const auto& deltas : stats)
        for (std::size_t i = 0; i < n; ++i) dist.delta_by_study[i].push_back(deltas[i]);
    dist.thresholds.reserve(n);
    for (const auto& per_study : dist.delta_by_study)
        dist.thresholds.push_back(percentile_interval(per_study, config.level));
    return dist;
}

} // namespace dtaboot
