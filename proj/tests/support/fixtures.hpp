// Shared test fixtures: synthetic datasets, the external-data gate for the
// bundled meta-analysis files, and a dense-oracle REML evaluation.
#pragma once

#include <cstdlib>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "dtaboot/reml.hpp"
#include "dtaboot/rng.hpp"
#include "dtaboot/simulate.hpp"
#include "dtaboot/study_data.hpp"
#include "support/dense.hpp"

namespace testsupport {

inline std::filesystem::path data_dir() {
#ifdef DTABOOT_DATA_DIR
    return std::filesystem::path(DTABOOT_DATA_DIR);
#else
    return std::filesystem::path("data");
#endif
}

// nullopt when the bundled file is absent (tests gated on it are skipped)
inline std::optional<dtaboot::Dataset> maybe_dataset(const std::string& filename) {
    const auto path = data_dir() / filename;
    if (!std::filesystem::exists(path)) return std::nullopt;
    return dtaboot::parse_dataset_file(path);
}

// Small deterministic synthetic meta-analysis (moderate heterogeneity).
inline dtaboot::Dataset synthetic_dataset(int n_studies = 12, std::uint64_t seed = 7,
                                          double mu_a = 1.2, double mu_b = -1.0,
                                          double sigma = 0.5, double rho = -0.4,
                                          int subjects = 120) {
    dtaboot::SimScenario sc;
    sc.true_params = {mu_a, mu_b, sigma, sigma, rho};
    sc.n_studies = n_studies;
    sc.n_pos = subjects;
    sc.n_neg = subjects;
    sc.seed = seed;
    // replications/bootstrap fields are irrelevant for dataset generation
    return dtaboot::simulate_dataset(sc, 0);
}

// REML value through the stacked error-contrast route: y (2N), X = [I2;...],
// V = blockdiag(Sigma + S_i); generic dense LU throughout.
inline double dense_reml_value(const dtaboot::Mat2& sigma, const dtaboot::OutcomeSet& data) {
    const std::size_t n = data.size();
    const std::size_t dim = 2 * n;

    DenseMatrix v(dim, dim);
    std::vector<double> y(dim);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& o = data.outcomes[i];
        v.at(2 * i, 2 * i) = sigma.m00 + o.s2_a;
        v.at(2 * i, 2 * i + 1) = sigma.m01;
        v.at(2 * i + 1, 2 * i) = sigma.m10;
        v.at(2 * i + 1, 2 * i + 1) = sigma.m11 + o.s2_b;
        y[2 * i] = o.y_a;
        y[2 * i + 1] = o.y_b;
    }
    DenseMatrix x(dim, 2);
    for (std::size_t i = 0; i < n; ++i) {
        x.at(2 * i, 0) = 1.0;
        x.at(2 * i + 1, 1) = 1.0;
    }

    const LuDecomposition v_lu(v);
    const double log_det_v = v_lu.log_abs_det();

    // Vinv*X column by column, then M = X' Vinv X (2x2), mu = M^{-1} X' Vinv y
    DenseMatrix vinv_x(dim, 2);
    for (std::size_t c = 0; c < 2; ++c) {
        std::vector<double> col(dim);
        for (std::size_t r = 0; r < dim; ++r) col[r] = x.at(r, c);
        const auto solved = v_lu.solve(col);
        for (std::size_t r = 0; r < dim; ++r) vinv_x.at(r, c) = solved[r];
    }
    DenseMatrix m(2, 2);
    for (std::size_t a = 0; a < 2; ++a)
        for (std::size_t b = 0; b < 2; ++b) {
            double sum = 0.0;
            for (std::size_t r = 0; r < dim; ++r) sum += x.at(r, a) * vinv_x.at(r, b);
            m.at(a, b) = sum;
        }
    const auto vinv_y = v_lu.solve(y);
    std::vector<double> xt_vinv_y(2, 0.0);
    for (std::size_t r = 0; r < dim; ++r) {
        xt_vinv_y[0] += x.at(r, 0) * vinv_y[r];
        xt_vinv_y[1] += x.at(r, 1) * vinv_y[r];
    }
    const LuDecomposition m_lu(m);
    const auto mu = m_lu.solve(xt_vinv_y);

    std::vector<double> resid(dim);
    for (std::size_t i = 0; i < n; ++i) {
        resid[2 * i] = y[2 * i] - mu[0];
        resid[2 * i + 1] = y[2 * i + 1] - mu[1];
    }
    const auto vinv_r = v_lu.solve(resid);
    double quad = 0.0;
    for (std::size_t r = 0; r < dim; ++r) quad += resid[r] * vinv_r[r];

    return -0.5 * (log_det_v + quad) - 0.5 * m_lu.log_abs_det();
}

} // namespace testsupport
