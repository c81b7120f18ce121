#include "otguide/svg.hpp"

#include "otguide/errors.hpp"
#include "otguide/loss.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <utility>

namespace otguide {

namespace {

constexpr int kMargin = 48;

std::string fixed(double v, int digits = 3) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
    return buf;
}

std::string escape_xml(std::string_view text) {
    std::string out;
    for (const char c : text) {
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

struct Range {
    double lo;
    double hi;

    double span() const { return hi - lo; }
};

Range padded(double lo, double hi) {
    double span = hi - lo;
    if (!(span > 1e-12)) span = std::max(std::abs(hi), 1.0) * 0.1;
    const double mid = 0.5 * (lo + hi);
    return {mid - 0.55 * span, mid + 0.55 * span};
}

double auto_scale(const TangentReport& report) {
    const double phi_span =
        std::max(report.phi.maxCoeff() - report.phi.minCoeff(), 1e-3);
    double longest = 0.0;
    for (Eigen::Index i = 0; i < report.pushforward.rows(); ++i) {
        longest = std::max(longest, report.pushforward.row(i).norm());
    }
    return longest > 0.0 ? 0.15 * phi_span / longest : 1.0;
}

std::string panel(const TangentReport& report, Eigen::Index a, Eigen::Index b, double scale,
                  const std::vector<std::string>& labels, int size, int offset_x) {
    const Eigen::Index n = report.phi.rows();
    double xlo = report.phi.col(a).minCoeff();
    double xhi = report.phi.col(a).maxCoeff();
    double ylo = report.phi.col(b).minCoeff();
    double yhi = report.phi.col(b).maxCoeff();
    for (Eigen::Index i = 0; i < n; ++i) {
        const double tx = report.phi(i, a) - scale * report.pushforward(i, a);
        const double ty = report.phi(i, b) - scale * report.pushforward(i, b);
        xlo = std::min(xlo, tx);
        xhi = std::max(xhi, tx);
        ylo = std::min(ylo, ty);
        yhi = std::max(yhi, ty);
    }
    const Range xr = padded(xlo, xhi);
    const Range yr = padded(ylo, yhi);
    const double plot = size - 2.0 * kMargin;
    const auto sx = [&](double v) { return offset_x + kMargin + (v - xr.lo) / xr.span() * plot; };
    const auto sy = [&](double v) { return kMargin + (yr.hi - v) / yr.span() * plot; };

    std::string out;
    out += "  <g class=\"panel\" data-x=\"" + std::to_string(a) + "\" data-y=\"" +
           std::to_string(b) + "\">\n";
    const std::string left = fixed(offset_x + kMargin, 1);
    const std::string right = fixed(offset_x + size - kMargin, 1);
    const std::string top = fixed(kMargin, 1);
    const std::string bottom = fixed(size - kMargin, 1);
    out += "    <rect x=\"" + left + "\" y=\"" + top + "\" width=\"" + fixed(plot, 1) +
           "\" height=\"" + fixed(plot, 1) + "\" fill=\"none\" stroke=\"#888\"/>\n";
    // Tick labels at the range ends.
    out += "    <text x=\"" + left + "\" y=\"" + fixed(size - kMargin + 14, 1) +
           "\" font-size=\"10\">" + fixed(xr.lo) + "</text>\n";
    out += "    <text x=\"" + right + "\" y=\"" + fixed(size - kMargin + 14, 1) +
           "\" font-size=\"10\" text-anchor=\"end\">" + fixed(xr.hi) + "</text>\n";
    out += "    <text x=\"" + fixed(offset_x + kMargin - 4, 1) + "\" y=\"" + bottom +
           "\" font-size=\"10\" text-anchor=\"end\">" + fixed(yr.lo) + "</text>\n";
    out += "    <text x=\"" + fixed(offset_x + kMargin - 4, 1) + "\" y=\"" + fixed(kMargin + 10, 1) +
           "\" font-size=\"10\" text-anchor=\"end\">" + fixed(yr.hi) + "</text>\n";
    // Axis titles: the distance to each prompt.
    out += "    <text x=\"" + fixed(offset_x + size / 2.0, 1) + "\" y=\"" +
           fixed(size - kMargin + 32, 1) + "\" font-size=\"12\" text-anchor=\"middle\">D(u, " +
           escape_xml(labels[static_cast<std::size_t>(a)]) + ")</text>\n";
    const std::string ymid = fixed(size / 2.0, 1);
    const std::string ylabel_x = fixed(offset_x + 14, 1);
    out += "    <text x=\"" + ylabel_x + "\" y=\"" + ymid + "\" font-size=\"12\" " +
           "text-anchor=\"middle\" transform=\"rotate(-90 " + ylabel_x + " " + ymid + ")\">D(u, " +
           escape_xml(labels[static_cast<std::size_t>(b)]) + ")</text>\n";

    for (Eigen::Index i = 0; i < n; ++i) {
        const double px = sx(report.phi(i, a));
        const double py = sy(report.phi(i, b));
        const double qx = sx(report.phi(i, a) - scale * report.pushforward(i, a));
        const double qy = sy(report.phi(i, b) - scale * report.pushforward(i, b));
        out += "    <line x1=\"" + fixed(px, 2) + "\" y1=\"" + fixed(py, 2) + "\" x2=\"" +
               fixed(qx, 2) + "\" y2=\"" + fixed(qy, 2) +
               "\" stroke=\"#d62728\" stroke-width=\"1\" marker-end=\"url(#head)\"/>\n";
        out += "    <circle cx=\"" + fixed(px, 2) + "\" cy=\"" + fixed(py, 2) +
               "\" r=\"3\" fill=\"#1f77b4\"/>\n";
    }
    out += "  </g>\n";
    return out;
}

}  // namespace

std::string render_tangent_svg(const TangentReport& report,
                               const std::vector<std::string>& prompt_labels,
                               const QuiverOptions& options) {
    const Eigen::Index m = report.phi.cols();
    if (m < 2) {
        throw ArgumentError("the cost-plane plot needs at least two prompts (got " +
                            std::to_string(m) + ")");
    }
    if (static_cast<Eigen::Index>(prompt_labels.size()) != m) {
        throw ShapeError("prompt label count does not match the tangent report");
    }
    const double scale = options.arrow_scale > 0.0 ? options.arrow_scale : auto_scale(report);

    std::vector<std::pair<Eigen::Index, Eigen::Index>> pairs;
    for (Eigen::Index a = 0; a < m; ++a) {
        for (Eigen::Index b = a + 1; b < m; ++b) pairs.emplace_back(a, b);
    }
    const int size = options.panel_size;
    const int width = size * static_cast<int>(pairs.size());

    std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" +
           std::to_string(width) + "\" height=\"" + std::to_string(size) + "\" viewBox=\"0 0 " +
           std::to_string(width) + " " + std::to_string(size) + "\">\n";
    out += "  <title>Pushed-forward patch gradients on the cost plane</title>\n";
    out += "  <metadata>mode=" + std::string(to_string(report.mode)) +
           " metric=" + std::string(to_string(report.metric)) +
           " epsilon=" + fixed(report.epsilon, 6) + " objective=" + report.objective +
           " arrow_scale=" + fixed(scale, 6) + " arrows=-w</metadata>\n";
    out += "  <defs><marker id=\"head\" markerWidth=\"6\" markerHeight=\"6\" refX=\"5\" "
           "refY=\"3\" orient=\"auto\"><path d=\"M0,0 L6,3 L0,6 z\" fill=\"#d62728\"/>"
           "</marker></defs>\n";
    out += "  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    for (std::size_t k = 0; k < pairs.size(); ++k) {
        out += panel(report, pairs[k].first, pairs[k].second, scale, prompt_labels, size,
                     static_cast<int>(k) * size);
    }
    out += "</svg>\n";
    return out;
}

}  // namespace otguide
