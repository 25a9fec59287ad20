// Standalone SVG 1.1 plots of ROC space: per-study points sized by sample
// size, the SROC curve, the summary point, and the confidence region, with
// one overlay per diagnostic test.
#pragma once

#include <string>
#include <vector>

#include "dtaboot/reml.hpp"
#include "dtaboot/sroc.hpp"
#include "dtaboot/study_data.hpp"

namespace dtaboot {

struct SvgOptions {
    int width{640};
    int height{640};
    int margin_left{72};
    int margin_right{28};
    int margin_top{44};
    int margin_bottom{64};
    int curve_samples{512};
    int region_points{256};
    std::string title;
};

// One overlay. Built from a converged fit and its dataset via make_svg_series.
struct SvgSeries {
    std::string name;
    std::vector<std::array<double, 3>> points; // (fpr, sens, total n) per study
    SrocCurve curve;
    double summary_fpr{0.0};
    double summary_sens{0.0};
    std::vector<std::array<double, 2>> region; // closed polyline in (fpr, sens)
};

SvgSeries make_svg_series(const std::string& name, const Dataset& data, const BivariateFit& fit,
                          double level = 0.95, int region_points = 256);

std::string render_sroc_svg(const std::vector<SvgSeries>& series, const SvgOptions& options = {});

} // namespace dtaboot
