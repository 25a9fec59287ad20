// Bivariate normal-normal random-effects model fitted by restricted
// maximum likelihood.
//
// Model: y_i ~ N(theta_i, S_i), theta_i ~ N(mu, Sigma), S_i diagonal
// (conditional independence of the two arms given the random effects).
// The REML objective profiles mu out by GLS:
//
//   l_R(Sigma) = -1/2 sum_i [ log|V_i| + r_i' V_i^{-1} r_i ]
//                -1/2 log| sum_i V_i^{-1} |,
//   V_i = Sigma + S_i,  r_i = y_i - mu_hat(Sigma).
//
// Optimization runs over (log sigma_a, log sigma_b, atanh rho) inside a
// clamp box by derivative-free simplex search with jittered restarts.
#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "dtaboot/errors.hpp"
#include "dtaboot/mat2.hpp"
#include "dtaboot/study_data.hpp"

namespace dtaboot {

struct BivariateParams {
    double mu_a{0.0};    // summary logit sensitivity
    double mu_b{0.0};    // summary logit FPR
    double sigma_a{0.0}; // between-study SD of logit sensitivity
    double sigma_b{0.0}; // between-study SD of logit FPR
    double rho{0.0};     // between-study correlation

    Mat2 sigma_matrix() const {
        const double cov = rho * sigma_a * sigma_b;
        return Mat2::symmetric(sigma_a * sigma_a, cov, sigma_b * sigma_b);
    }
    Vec2 mu() const { return {mu_a, mu_b}; }
};

struct BoundaryFlags {
    bool sigma_a{false}; // log sigma_a pinned at a clamp edge
    bool sigma_b{false};
    bool rho{false};     // |atanh rho| pinned at the clamp edge

    bool any() const { return sigma_a || sigma_b || rho; }
};

struct BivariateFit {
    BivariateParams params;
    Mat2 cov_mu;               // covariance of (mu_a_hat, mu_b_hat)
    double reml_value{0.0};    // maximized restricted log-likelihood
    bool converged{false};
    int iterations{0};         // simplex iterations summed over restarts
    BoundaryFlags boundary;
};

struct CiScalar {
    double point{0.0};
    double lower{0.0};
    double upper{0.0};
};

struct SummaryAccuracy {
    CiScalar sens;
    CiScalar fpr;
    double level{0.95};
};

struct FitOptions {
    double log_sigma_min{-12.0};
    double log_sigma_max{5.0};
    double atanh_rho_limit{12.0};
    int restarts{5};            // simplex runs, first from moment starts, rest jittered
    int max_iterations{600};    // per restart
    double objective_tol{1e-10};
    double simplex_tol{1e-8};   // simplex diameter
    double start_variance_floor{1e-4};
    std::uint64_t jitter_seed{0x5EEDFED5u}; // fixed: fits are deterministic given data
};

struct GlsResult {
    Vec2 mu;
    Mat2 cov_mu;
};

// GLS mean and its covariance at fixed Sigma:
//   mu_hat = (sum V_i^{-1})^{-1} sum V_i^{-1} y_i,  cov = (sum V_i^{-1})^{-1}.
GlsResult gls_mean(const Mat2& sigma, const OutcomeSet& data);

// Restricted log-likelihood at the given variance components (N >= 2).
double restricted_log_likelihood(double sigma_a, double sigma_b, double rho, const OutcomeSet& data);

// REML fit; requires N >= 3. Returns converged=false (with diagnostics)
// when no restart meets the tolerances. Throws on degenerate data.
BivariateFit fit_reml(const OutcomeSet& data, const FitOptions& options = {});

// Probability-scale summary sensitivity and FPR with Wald intervals mapped
// through expit. Requires a converged fit.
SummaryAccuracy summary_accuracy(const BivariateFit& fit, double level = 0.95);

// Confidence ellipse for (mu_a, mu_b) sampled on the logit scale and mapped
// to (FPR, sensitivity) coordinates; closed polyline (last point == first).
std::vector<std::array<double, 2>> confidence_region(const BivariateFit& fit, double level = 0.95,
                                                     int n_points = 256);

struct WaldComparison {
    double z_mu_a{0.0};
    double p_mu_a{1.0};
    double z_mu_b{0.0};
    double p_mu_b{1.0};
};

// Wald z-tests for differences in summary logit sensitivity / FPR between
// two independently fitted tests. Dataset disjointness is the caller's
// responsibility.
WaldComparison wald_compare_summary(const BivariateFit& fit1, const BivariateFit& fit2);

} // namespace dtaboot
