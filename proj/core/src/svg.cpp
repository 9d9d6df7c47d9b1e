#include "ssnet/harness.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>

namespace ssnet {
namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 420.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 150.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 55.0;

constexpr const char* kColors[] = {"#000000", "#d62728", "#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e"};

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

}  // namespace

std::string render_svg(const std::string& title, std::span<const MethodCurve> curves, double marker_c) {
    double x_max = 0.0, y_max = 0.0;
    for (const auto& c : curves) {
        for (const auto& p : c.points) {
            if (std::isfinite(p.mean_md)) x_max = std::max(x_max, p.mean_md);
            if (std::isfinite(p.mean_pe)) y_max = std::max(y_max, p.mean_pe);
        }
    }
    x_max = x_max > 0.0 ? x_max * 1.05 : 1.0;
    y_max = y_max > 0.0 ? y_max * 1.05 : 1.0;
    const double pw = kWidth - kLeft - kRight;
    const double ph = kHeight - kTop - kBottom;
    auto sx = [&](double x) { return kLeft + pw * x / x_max; };
    auto sy = [&](double y) { return kTop + ph * (1.0 - y / y_max); };

    std::string svg = fmt::format(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" viewBox=\"0 0 {0} {1}\" "
        "font-family=\"sans-serif\" font-size=\"12\">\n",
        kWidth, kHeight);
    svg += fmt::format("<rect x=\"0\" y=\"0\" width=\"{}\" height=\"{}\" fill=\"white\"/>\n", kWidth, kHeight);
    svg += fmt::format("<text x=\"{}\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">{}</text>\n",
                       kLeft + pw / 2.0, escape(title));
    svg += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#444\"/>\n",
                       kLeft, kTop, pw, ph);
    for (int i = 0; i <= 5; ++i) {
        const double xv = x_max * i / 5.0;
        const double yv = y_max * i / 5.0;
        svg += fmt::format("<line x1=\"{0:.2f}\" y1=\"{1:.2f}\" x2=\"{0:.2f}\" y2=\"{2:.2f}\" stroke=\"#444\"/>\n",
                           sx(xv), kTop + ph, kTop + ph + 5.0);
        svg += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"middle\">{:.3g}</text>\n", sx(xv),
                           kTop + ph + 18.0, xv);
        svg += fmt::format("<line x1=\"{0:.2f}\" y1=\"{1:.2f}\" x2=\"{2:.2f}\" y2=\"{1:.2f}\" stroke=\"#444\"/>\n",
                           kLeft - 5.0, sy(yv), kLeft);
        svg += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"end\">{:.3g}</text>\n", kLeft - 8.0,
                           sy(yv) + 4.0, yv);
    }
    svg += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"middle\">mean model dimension (MD)</text>\n",
                       kLeft + pw / 2.0, kHeight - 12.0);
    svg += fmt::format(
        "<text x=\"18\" y=\"{0:.2f}\" text-anchor=\"middle\" transform=\"rotate(-90 18 {0:.2f})\">"
        "mean prediction error (PE)</text>\n",
        kTop + ph / 2.0);

    for (std::size_t m = 0; m < curves.size(); ++m) {
        const char* color = kColors[m % std::size(kColors)];
        const auto& curve = curves[m];
        std::string pts;
        for (const auto& p : curve.points) {
            if (!std::isfinite(p.mean_md) || !std::isfinite(p.mean_pe)) continue;
            pts += fmt::format("{}{:.2f},{:.2f}", pts.empty() ? "" : " ", sx(p.mean_md), sy(p.mean_pe));
        }
        svg += fmt::format("<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\" points=\"{}\"/>\n", color, pts);
        for (const auto& p : curve.points) {
            if (std::abs(p.c_k - marker_c) <= 1e-12 && std::isfinite(p.mean_md)) {
                svg += fmt::format(
                    "<line x1=\"{0:.2f}\" y1=\"{1:.2f}\" x2=\"{0:.2f}\" y2=\"{2:.2f}\" stroke=\"{3}\" "
                    "stroke-dasharray=\"4 3\"/>\n",
                    sx(p.mean_md), kTop, kTop + ph, color);
            }
        }
        const double ly = kTop + 16.0 + 18.0 * static_cast<double>(m);
        svg += fmt::format("<line x1=\"{0:.2f}\" y1=\"{1:.2f}\" x2=\"{2:.2f}\" y2=\"{1:.2f}\" stroke=\"{3}\" "
                           "stroke-width=\"2\"/>\n",
                           kWidth - kRight + 12.0, ly, kWidth - kRight + 36.0, color);
        svg += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\">{}</text>\n", kWidth - kRight + 42.0, ly + 4.0,
                           escape(curve.method));
    }
    svg += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" font-size=\"10\">dashed: c = {}</text>\n",
                       kWidth - kRight + 12.0, kTop + 16.0 + 18.0 * static_cast<double>(curves.size()), marker_c);
    svg += "</svg>\n";
    return svg;
}

}  // namespace ssnet
