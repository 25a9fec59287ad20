#include "dtaboot/reml.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "dtaboot/rng.hpp"
#include "dtaboot/stats.hpp"

namespace dtaboot {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct GlsAccumulator {
    Mat2 sum_w;      // sum of V_i^{-1}
    Vec2 sum_wy;     // sum of V_i^{-1} y_i
    double log_det_sum{0.0}; // sum of log|V_i|
    bool ok{true};
};

GlsAccumulator accumulate_weights(const Mat2& sigma, const OutcomeSet& data) {
    GlsAccumulator acc;
    for (const auto& o : data.outcomes) {
        const Mat2 v = sigma + Mat2::diagonal(o.s2_a, o.s2_b);
        const double det = v.det();
        if (!(det > 0.0) || !std::isfinite(det)) {
            acc.ok = false;
            return acc;
        }
        const double inv = 1.0 / det;
        const Mat2 w{v.m11 * inv, -v.m01 * inv, -v.m10 * inv, v.m00 * inv};
        acc.sum_w += w;
        acc.sum_wy += w * Vec2{o.y_a, o.y_b};
        acc.log_det_sum += std::log(det);
    }
    return acc;
}

// Objective evaluation shared by the public op and the optimizer inner loop.
// Returns nullopt on singular V_i, singular information matrix, or any
// non-finite intermediate.
std::optional<double> try_reml_value(const Mat2& sigma, const OutcomeSet& data,
                                     GlsResult* gls_out = nullptr) {
    const GlsAccumulator acc = accumulate_weights(sigma, data);
    if (!acc.ok) return std::nullopt;

    const double info_det = acc.sum_w.det();
    if (!(info_det > 0.0) || !std::isfinite(info_det)) return std::nullopt;
    const auto info_inv = acc.sum_w.inverse();
    if (!info_inv) return std::nullopt;
    const Vec2 mu = (*info_inv) * acc.sum_wy;
    if (!mu.finite()) return std::nullopt;

    double quad = 0.0;
    for (const auto& o : data.outcomes) {
        const Mat2 v = sigma + Mat2::diagonal(o.s2_a, o.s2_b);
        const double det = v.det();
        const double inv = 1.0 / det;
        const Vec2 r{o.y_a - mu.a, o.y_b - mu.b};
        quad += inv * (v.m11 * r.a * r.a - 2.0 * v.m01 * r.a * r.b + v.m00 * r.b * r.b);
    }
    const double value = -0.5 * (acc.log_det_sum + quad) - 0.5 * std::log(info_det);
    if (!std::isfinite(value)) return std::nullopt;

    if (gls_out) {
        gls_out->mu = mu;
        gls_out->cov_mu = *info_inv;
    }
    return value;
}

// x = (log sigma_a, log sigma_b, atanh rho)
Mat2 sigma_from_transformed(const std::array<double, 3>& x) {
    const double sa = std::exp(x[0]);
    const double sb = std::exp(x[1]);
    const double rho = std::tanh(x[2]);
    return Mat2::symmetric(sa * sa, rho * sa * sb, sb * sb);
}

std::array<double, 3> clip_to_box(std::array<double, 3> x, const FitOptions& opt) {
    x[0] = std::clamp(x[0], opt.log_sigma_min, opt.log_sigma_max);
    x[1] = std::clamp(x[1], opt.log_sigma_min, opt.log_sigma_max);
    x[2] = std::clamp(x[2], -opt.atanh_rho_limit, opt.atanh_rho_limit);
    return x;
}

struct SimplexResult {
    std::array<double, 3> x{};
    double value{kNegInf};
    bool converged{false};
    int iterations{0};
};

// Nelder-Mead maximization of the restricted log-likelihood over the clamp
// box (proposals are projected back into the box). Terminates when both the
// best-worst objective spread and the simplex diameter fall under tolerance.
SimplexResult nelder_mead(const OutcomeSet& data, const std::array<double, 3>& start,
                          const FitOptions& opt) {
    auto eval = [&](const std::array<double, 3>& x) -> double {
        const auto v = try_reml_value(sigma_from_transformed(x), data);
        return v ? *v : kNegInf;
    };

    constexpr std::size_t n = 3;
    std::array<std::array<double, 3>, n + 1> pts;
    std::array<double, n + 1> vals;
    pts[0] = clip_to_box(start, opt);
    for (std::size_t i = 0; i < n; ++i) {
        auto p = pts[0];
        const double step = 0.1 * std::abs(p[i]) + 0.15;
        p[i] += step;
        auto clipped = clip_to_box(p, opt);
        if (clipped[i] == pts[0][i]) { // at the upper edge: step inward instead
            p[i] = pts[0][i] - step;
            clipped = clip_to_box(p, opt);
        }
        pts[i + 1] = clipped;
    }
    for (std::size_t i = 0; i <= n; ++i) vals[i] = eval(pts[i]);

    auto order = [&] {
        for (std::size_t i = 0; i <= n; ++i)
            for (std::size_t j = i + 1; j <= n; ++j)
                if (vals[j] > vals[i]) {
                    std::swap(vals[i], vals[j]);
                    std::swap(pts[i], pts[j]);
                }
    };
    auto diameter = [&] {
        double d = 0.0;
        for (std::size_t i = 1; i <= n; ++i)
            for (std::size_t k = 0; k < n; ++k) d = std::max(d, std::abs(pts[i][k] - pts[0][k]));
        return d;
    };

    SimplexResult result;
    for (int iter = 0; iter < opt.max_iterations; ++iter) {
        order();
        ++result.iterations;
        if (std::isfinite(vals[0]) && std::isfinite(vals[n]) &&
            vals[0] - vals[n] < opt.objective_tol && diameter() < opt.simplex_tol) {
            result.converged = true;
            break;
        }

        std::array<double, 3> centroid{};
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t k = 0; k < n; ++k) centroid[k] += pts[i][k] / static_cast<double>(n);

        auto blend = [&](double coef) {
            std::array<double, 3> p;
            for (std::size_t k = 0; k < n; ++k) p[k] = centroid[k] + coef * (centroid[k] - pts[n][k]);
            return clip_to_box(p, opt);
        };

        const auto reflected = blend(1.0);
        const double f_reflected = eval(reflected);
        if (f_reflected > vals[0]) {
            const auto expanded = blend(2.0);
            const double f_expanded = eval(expanded);
            if (f_expanded > f_reflected) {
                pts[n] = expanded; vals[n] = f_expanded;
            } else {
                pts[n] = reflected; vals[n] = f_reflected;
            }
            continue;
        }
        if (f_reflected > vals[n - 1]) {
            pts[n] = reflected; vals[n] = f_reflected;
            continue;
        }
        const auto contracted = blend(f_reflected > vals[n] ? 0.5 : -0.5);
        const double f_contracted = eval(contracted);
        if (f_contracted > std::max(f_reflected, vals[n])) {
            pts[n] = contracted; vals[n] = f_contracted;
            continue;
        }
        // shrink toward the best vertex
        for (std::size_t i = 1; i <= n; ++i) {
            for (std::size_t k = 0; k < n; ++k) pts[i][k] = pts[0][k] + 0.5 * (pts[i][k] - pts[0][k]);
            pts[i] = clip_to_box(pts[i], opt);
            vals[i] = eval(pts[i]);
        }
    }
    order();
    result.x = pts[0];
    result.value = vals[0];
    return result;
}

// Moment-based starting point: sample covariance of y minus the average
// within-study covariance, variance floor applied.
std::array<double, 3> moment_start(const OutcomeSet& data, const FitOptions& opt) {
    const double n = static_cast<double>(data.size());
    double mean_a = 0.0, mean_b = 0.0, mean_s2a = 0.0, mean_s2b = 0.0;
    for (const auto& o : data.outcomes) {
        mean_a += o.y_a / n;
        mean_b += o.y_b / n;
        mean_s2a += o.s2_a / n;
        mean_s2b += o.s2_b / n;
    }
    double var_a = 0.0, var_b = 0.0, cov_ab = 0.0;
    for (const auto& o : data.outcomes) {
        var_a += (o.y_a - mean_a) * (o.y_a - mean_a) / (n - 1.0);
        var_b += (o.y_b - mean_b) * (o.y_b - mean_b) / (n - 1.0);
        cov_ab += (o.y_a - mean_a) * (o.y_b - mean_b) / (n - 1.0);
    }
    const double s2a = std::max(var_a - mean_s2a, opt.start_variance_floor);
    const double s2b = std::max(var_b - mean_s2b, opt.start_variance_floor);
    const double rho = std::clamp(cov_ab / std::sqrt(s2a * s2b), -0.95, 0.95);
    return clip_to_box({0.5 * std::log(s2a), 0.5 * std::log(s2b), std::atanh(rho)}, opt);
}

} // namespace

GlsResult gls_mean(const Mat2& sigma, const OutcomeSet& data) {
    if (data.size() < 1) throw std::invalid_argument("gls_mean: empty outcome set");
    const GlsAccumulator acc = accumulate_weights(sigma, data);
    if (!acc.ok) throw error("gls_mean: singular within-study covariance V_i");
    const auto info_inv = acc.sum_w.inverse();
    if (!info_inv || !info_inv->finite())
        throw error("gls_mean: singular total information matrix");
    return GlsResult{(*info_inv) * acc.sum_wy, *info_inv};
}

double restricted_log_likelihood(double sigma_a, double sigma_b, double rho,
                                 const OutcomeSet& data) {
    if (data.size() < 2)
        throw std::invalid_argument("restricted_log_likelihood: need at least 2 studies");
    if (sigma_a < 0.0 || sigma_b < 0.0 || std::abs(rho) > 1.0)
        throw std::invalid_argument("restricted_log_likelihood: invalid variance components");
    const Mat2 sigma = Mat2::symmetric(sigma_a * sigma_a, rho * sigma_a * sigma_b, sigma_b * sigma_b);
    const auto value = try_reml_value(sigma, data);
    if (!value) throw error("restricted_log_likelihood: singular V_i or non-finite value");
    return *value;
}

BivariateFit fit_reml(const OutcomeSet& data, const FitOptions& options) {
    if (data.size() < 3)
        throw parse_error("minimum study count not met: need at least 3 studies, got " +
                          std::to_string(data.size()));

    // degenerate data guard: identical outcomes leave the mean model without
    // any residual information
    {
        double spread = 0.0;
        for (std::size_t i = 1; i < data.size(); ++i) {
            spread = std::max(spread, std::abs(data.outcomes[i].y_a - data.outcomes[0].y_a));
            spread = std::max(spread, std::abs(data.outcomes[i].y_b - data.outcomes[0].y_b));
        }
        if (spread < 1e-13)
            throw convergence_error("degenerate data: all logit outcomes identical");
    }

    const auto start = moment_start(data, options);
    RngStream jitter = RngStream::from_key(options.jitter_seed, 0, stream_tag::fit_jitter);

    SimplexResult best;
    bool any_converged = false;
    int total_iterations = 0;
    for (int r = 0; r < std::max(1, options.restarts); ++r) {
        std::array<double, 3> x0 = start;
        if (r > 0) {
            for (auto& c : x0) c += jitter.next_uniform(-0.5, 0.5);
            x0 = clip_to_box(x0, options);
        }
        SimplexResult run = nelder_mead(data, x0, options);
        total_iterations += run.iterations;
        any_converged = any_converged || run.converged;
        if (run.value > best.value) best = run;
    }

    BivariateFit fit;
    fit.iterations = total_iterations;
    fit.converged = any_converged && std::isfinite(best.value);
    fit.reml_value = best.value;
    fit.params.sigma_a = std::exp(best.x[0]);
    fit.params.sigma_b = std::exp(best.x[1]);
    fit.params.rho = std::tanh(best.x[2]);

    const double edge = 1e-6;
    fit.boundary.sigma_a = best.x[0] <= options.log_sigma_min + edge || best.x[0] >= options.log_sigma_max - edge;
    fit.boundary.sigma_b = best.x[1] <= options.log_sigma_min + edge || best.x[1] >= options.log_sigma_max - edge;
    fit.boundary.rho = std::abs(best.x[2]) >= options.atanh_rho_limit - edge;

    if (fit.converged) {
        GlsResult gls;
        const auto value = try_reml_value(fit.params.sigma_matrix(), data, &gls);
        if (!value) {
            fit.converged = false;
        } else {
            fit.params.mu_a = gls.mu.a;
            fit.params.mu_b = gls.mu.b;
            fit.cov_mu = gls.cov_mu;
        }
    }
    return fit;
}

SummaryAccuracy summary_accuracy(const BivariateFit& fit, double level) {
    if (!fit.converged) throw convergence_error("summary_accuracy: fit did not converge");
    if (!(level > 0.0 && level < 1.0))
        throw std::invalid_argument("summary_accuracy: level must be in (0,1)");

    const double z = normal_quantile(0.5 + level / 2.0);
    const double se_a = std::sqrt(std::max(fit.cov_mu.m00, 0.0));
    const double se_b = std::sqrt(std::max(fit.cov_mu.m11, 0.0));

    SummaryAccuracy out;
    out.level = level;
    out.sens = CiScalar{expit(fit.params.mu_a), expit(fit.params.mu_a - z * se_a),
                        expit(fit.params.mu_a + z * se_a)};
    out.fpr = CiScalar{expit(fit.params.mu_b), expit(fit.params.mu_b - z * se_b),
                       expit(fit.params.mu_b + z * se_b)};
    return out;
}

std::vector<std::array<double, 2>> confidence_region(const BivariateFit& fit, double level,
                                                     int n_points) {
    if (!fit.converged) throw convergence_error("confidence_region: fit did not converge");
    if (n_points < 3) throw std::invalid_argument("confidence_region: need at least 3 points");
    const auto chol = fit.cov_mu.cholesky();
    if (!chol) throw error("confidence_region: cov_mu is not positive definite");

    const double radius = std::sqrt(chi2_quantile_2df(level));
    std::vector<std::array<double, 2>> polyline;
    polyline.reserve(static_cast<std::size_t>(n_points) + 1);
    for (int k = 0; k < n_points; ++k) {
        const double angle = 2.0 * M_PI * static_cast<double>(k) / static_cast<double>(n_points);
        const Vec2 unit{std::cos(angle), std::sin(angle)};
        const Vec2 offset = (*chol) * unit * radius;
        polyline.push_back({expit(fit.params.mu_b + offset.b), expit(fit.params.mu_a + offset.a)});
    }
    polyline.push_back(polyline.front());
    return polyline;
}

WaldComparison wald_compare_summary(const BivariateFit& fit1, const BivariateFit& fit2) {
    if (!fit1.converged || !fit2.converged)
        throw convergence_error("wald_compare_summary: both fits must converge");
    WaldComparison out;
    const double se_a = std::sqrt(fit1.cov_mu.m00 + fit2.cov_mu.m00);
    const double se_b = std::sqrt(fit1.cov_mu.m11 + fit2.cov_mu.m11);
    out.z_mu_a = (fit1.params.mu_a - fit2.params.mu_a) / se_a;
    out.z_mu_b = (fit1.params.mu_b - fit2.params.mu_b) / se_b;
    out.p_mu_a = normal_two_sided_p(out.z_mu_a);
    out.p_mu_b = normal_two_sided_p(out.z_mu_b);
    return out;
}

} // namespace dtaboot
