#include "dtaboot/sroc.hpp"

#include <algorithm>
#include <cmath>

#include "dtaboot/stats.hpp"

namespace dtaboot {

namespace {
// exp(-12) is the lower clamp of the fit parameterization; an SD there means
// the heterogeneity axis collapsed and the curve shape is unidentified
const double kSigmaFloor = std::exp(-12.0) * (1.0 + 1e-9);
} // namespace

SrocCurve hsroc_params(const BivariateParams& p) {
    if (!(p.sigma_a > kSigmaFloor) || !(p.sigma_b > kSigmaFloor))
        throw error("SROC undefined: zero heterogeneity axis");

    SrocCurve curve;
    curve.beta = std::log(p.sigma_b / p.sigma_a);
    const double scale = std::sqrt(p.sigma_b / p.sigma_a); // exp(beta/2)
    curve.lambda = scale * p.mu_a - p.mu_b / scale;
    curve.slope = p.sigma_a / p.sigma_b;
    curve.intercept = curve.lambda / scale; // == mu_a - slope * mu_b
    const double cross = p.rho * p.sigma_a * p.sigma_b;
    const double prod = p.sigma_a * p.sigma_b;
    curve.tau2_theta = 0.5 * (prod + cross);
    curve.tau2_alpha = 2.0 * (prod - cross);
    return curve;
}

SrocCurve hsroc_params(const BivariateFit& fit) {
    if (!fit.converged) throw convergence_error("hsroc_params: fit did not converge");
    return hsroc_params(fit.params);
}

double sroc_sensitivity_at(const SrocCurve& curve, double fpr) {
    if (!(fpr > 0.0 && fpr < 1.0))
        throw std::invalid_argument("sroc_sensitivity_at: fpr must be strictly inside (0,1)");
    return expit(curve.intercept + curve.slope * logit(fpr));
}

AucResult compute_auc(const SrocCurve& curve, double lo, double hi, int resolution) {
    if (!(lo >= 0.0 && lo < hi && hi <= 1.0))
        throw std::invalid_argument("compute_auc: range must satisfy 0 <= lo < hi <= 1");
    if (resolution < 8) throw std::invalid_argument("compute_auc: resolution must be >= 8");
    // `resolution` is the grid density over the unit FPR axis; subranges use
    // proportionally fewer intervals so their panels align with the full-range
    // grid and partial AUCs add up exactly
    int n = static_cast<int>(std::lround(resolution * (hi - lo)));
    if (n % 2 != 0) ++n;
    n = std::max(n, 8);

    auto value_at = [&](double x) -> double {
        if (x <= 0.0) return 0.0; // one-sided limit as fpr -> 0+
        if (x >= 1.0) return 1.0; // one-sided limit as fpr -> 1-
        return sroc_sensitivity_at(curve, x);
    };

    const double h = (hi - lo) / n;
    double odd = 0.0, even = 0.0;
    for (int k = 1; k < n; ++k) {
        const double fx = value_at(lo + h * k);
        if (k % 2 == 1)
            odd += fx;
        else
            even += fx;
    }
    const double integral = h / 3.0 * (value_at(lo) + value_at(hi) + 4.0 * odd + 2.0 * even);

    AucResult result;
    result.value = std::clamp(integral, 0.0, 1.0);
    result.fpr_lo = lo;
    result.fpr_hi = hi;
    result.quadrature = QuadratureRecord{"simpson", n};
    return result;
}

} // namespace dtaboot
