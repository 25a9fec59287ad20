#include "dtaboot/svg_report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "dtaboot/stats.hpp"

namespace dtaboot {

namespace {

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"};

std::string xml_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (const char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            case '\'': out += "&apos;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

} // namespace

SvgSeries make_svg_series(const std::string& name, const Dataset& data, const BivariateFit& fit,
                          double level, int region_points) {
    if (!fit.converged) throw convergence_error("make_svg_series: fit did not converge");
    SvgSeries series;
    series.name = name;
    for (const auto& study : data.studies) {
        const double sens = static_cast<double>(study.tp) / static_cast<double>(study.n_pos());
        const double fpr = static_cast<double>(study.fp) / static_cast<double>(study.n_neg());
        series.points.push_back({fpr, sens, static_cast<double>(study.n_pos() + study.n_neg())});
    }
    series.curve = hsroc_params(fit);
    series.summary_fpr = expit(fit.params.mu_b);
    series.summary_sens = expit(fit.params.mu_a);
    series.region = confidence_region(fit, level, region_points);
    return series;
}

std::string render_sroc_svg(const std::vector<SvgSeries>& series, const SvgOptions& opt) {
    const double plot_w = opt.width - opt.margin_left - opt.margin_right;
    const double plot_h = opt.height - opt.margin_top - opt.margin_bottom;
    auto px = [&](double fpr) { return opt.margin_left + fpr * plot_w; };
    auto py = [&](double sens) { return opt.margin_top + (1.0 - sens) * plot_h; };

    double max_n = 1.0;
    for (const auto& s : series)
        for (const auto& p : s.points) max_n = std::max(max_n, p[2]);

    std::ostringstream svg;
    svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << opt.width
        << "\" height=\"" << opt.height << "\" viewBox=\"0 0 " << opt.width << " " << opt.height
        << "\">\n";
    svg << "<rect x=\"0\" y=\"0\" width=\"" << opt.width << "\" height=\"" << opt.height
        << "\" fill=\"white\"/>\n";

    if (!opt.title.empty())
        svg << "<text x=\"" << num(opt.margin_left + plot_w / 2) << "\" y=\"26\" font-family=\"sans-serif\""
            << " font-size=\"16\" text-anchor=\"middle\">" << xml_escape(opt.title) << "</text>\n";

    // frame, gridlines, ticks
    svg << "<rect x=\"" << num(px(0)) << "\" y=\"" << num(py(1)) << "\" width=\"" << num(plot_w)
        << "\" height=\"" << num(plot_h) << "\" fill=\"none\" stroke=\"#333333\" stroke-width=\"1\"/>\n";
    for (int t = 0; t <= 5; ++t) {
        const double v = t / 5.0;
        if (t > 0 && t < 5) {
            svg << "<line x1=\"" << num(px(v)) << "\" y1=\"" << num(py(0)) << "\" x2=\"" << num(px(v))
                << "\" y2=\"" << num(py(1)) << "\" stroke=\"#dddddd\" stroke-width=\"0.6\"/>\n";
            svg << "<line x1=\"" << num(px(0)) << "\" y1=\"" << num(py(v)) << "\" x2=\"" << num(px(1))
                << "\" y2=\"" << num(py(v)) << "\" stroke=\"#dddddd\" stroke-width=\"0.6\"/>\n";
        }
        char label[16];
        std::snprintf(label, sizeof(label), "%.1f", v);
        svg << "<text x=\"" << num(px(v)) << "\" y=\"" << num(py(0) + 18)
            << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">" << label
            << "</text>\n";
        svg << "<text x=\"" << num(px(0) - 8) << "\" y=\"" << num(py(v) + 4)
            << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">" << label
            << "</text>\n";
    }
    svg << "<text x=\"" << num(opt.margin_left + plot_w / 2) << "\" y=\"" << num(opt.height - 16)
        << "\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\">False positive rate</text>\n";
    svg << "<text x=\"18\" y=\"" << num(opt.margin_top + plot_h / 2)
        << "\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
        << num(opt.margin_top + plot_h / 2) << ")\">Sensitivity</text>\n";

    for (std::size_t si = 0; si < series.size(); ++si) {
        const auto& s = series[si];
        const char* color = kPalette[si % (sizeof(kPalette) / sizeof(kPalette[0]))];

        // study points, area scaled by total sample size
        for (const auto& p : s.points) {
            const double radius = 2.0 + 9.0 * std::sqrt(p[2] / max_n);
            svg << "<circle cx=\"" << num(px(p[0])) << "\" cy=\"" << num(py(p[1])) << "\" r=\""
                << num(radius) << "\" fill=\"" << color << "\" fill-opacity=\"0.30\" stroke=\""
                << color << "\" stroke-width=\"0.8\"/>\n";
        }

        // confidence region (dashed)
        svg << "<polyline fill=\"none\" stroke=\"" << color
            << "\" stroke-width=\"1.2\" stroke-dasharray=\"5,3\" points=\"";
        for (const auto& v : s.region) svg << num(px(v[0])) << ',' << num(py(v[1])) << ' ';
        svg << "\"/>\n";

        // SROC curve sampled uniformly on the logit scale
        svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
        const double lo = logit(5e-4), hi = logit(1.0 - 5e-4);
        for (int i = 0; i < opt.curve_samples; ++i) {
            const double x = expit(lo + (hi - lo) * static_cast<double>(i) / (opt.curve_samples - 1));
            svg << num(px(x)) << ',' << num(py(sroc_sensitivity_at(s.curve, x))) << ' ';
        }
        svg << "\"/>\n";

        // summary point
        svg << "<circle cx=\"" << num(px(s.summary_fpr)) << "\" cy=\"" << num(py(s.summary_sens))
            << "\" r=\"5\" fill=\"" << color << "\" stroke=\"white\" stroke-width=\"1.4\"/>\n";

        // legend entry
        const double ly = opt.margin_top + 16.0 + 18.0 * static_cast<double>(si);
        svg << "<line x1=\"" << num(px(0) + 10) << "\" y1=\"" << num(ly) << "\" x2=\""
            << num(px(0) + 34) << "\" y2=\"" << num(ly) << "\" stroke=\"" << color
            << "\" stroke-width=\"2\"/>\n";
        svg << "<text x=\"" << num(px(0) + 40) << "\" y=\"" << num(ly + 4)
            << "\" font-family=\"sans-serif\" font-size=\"12\">"
            << xml_escape(s.name.empty() ? ("series " + std::to_string(si + 1)) : s.name)
            << "</text>\n";
    }

    svg << "</svg>\n";
    return svg.str();
}

} // namespace dtaboot
