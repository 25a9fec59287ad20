// SROC curve derived from a bivariate fit via the hierarchical-model
// correspondence, and its AUC by composite Simpson quadrature.
//
// The curve through the summary point with shape set by the variance ratio:
//   logit(Se)(x) = intercept + slope * logit(x),
//   slope = sigma_a / sigma_b = exp(-beta),  intercept = lambda * exp(-beta/2).
#pragma once

#include <string>

#include "dtaboot/errors.hpp"
#include "dtaboot/reml.hpp"

namespace dtaboot {

struct SrocCurve {
    double intercept{0.0};  // lambda * exp(-beta/2), logit scale
    double slope{1.0};      // exp(-beta) = sigma_a / sigma_b, > 0
    double lambda{0.0};     // hierarchical accuracy parameter
    double beta{0.0};       // shape, log(sigma_b / sigma_a)
    double tau2_theta{0.0}; // threshold variance component
    double tau2_alpha{0.0}; // accuracy variance component
};

struct QuadratureRecord {
    std::string method{"simpson"};
    int resolution{0}; // number of uniform intervals actually used (even)
};

struct AucResult {
    double value{0.0};
    double fpr_lo{0.0};
    double fpr_hi{1.0};
    QuadratureRecord quadrature;
};

inline constexpr int kDefaultAucResolution = 10000;

// Map bivariate moments to the hierarchical SROC parameters. Requires both
// heterogeneity SDs strictly above the optimizer floor.
SrocCurve hsroc_params(const BivariateParams& params);
SrocCurve hsroc_params(const BivariateFit& fit);

// Curve height expit(intercept + slope * logit(fpr)); fpr strictly in (0,1).
double sroc_sensitivity_at(const SrocCurve& curve, double fpr);

// Composite Simpson over [lo, hi] within [0,1] on a uniform grid. Odd
// resolutions are rounded up to even; the record stores the grid used. The
// integrand is extended by its one-sided limits (0 at fpr=0, 1 at fpr=1).
AucResult compute_auc(const SrocCurve& curve, double lo = 0.0, double hi = 1.0,
                      int resolution = kDefaultAucResolution);

} // namespace dtaboot
