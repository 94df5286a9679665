#pragma once

#include <cmath>
#include <ostream>
#include <string>
#include <vector>

#include "equiclass/model.hpp"

namespace equiclass {

/**
 * Scatter plot of a 1-input/1-output table under a classification: input on
 * the x axis, output on the y axis, one glyph per object with per-category
 * shapes (squares, circles, diamonds, cycling). Every data marker carries
 * class="glyph".
 */
inline void write_scatter_svg(std::ostream& out, const CharacteristicTable& table,
                              const Classification& classification, const std::string& title) {
    constexpr double width = 640.0, height = 480.0;
    constexpr double left = 60.0, right = 20.0, top = 40.0, bottom = 50.0;
    const double plot_w = width - left - right;
    const double plot_h = height - top - bottom;

    const double x_min = table.inputs.row(0).minCoeff();
    const double x_max = table.inputs.row(0).maxCoeff();
    const double y_min = table.outputs.row(0).minCoeff();
    const double y_max = table.outputs.row(0).maxCoeff();
    const double x_pad = std::max(1e-9, 0.05 * (x_max - x_min));
    const double y_pad = std::max(1e-9, 0.05 * (y_max - y_min));

    const auto sx = [&](double x) {
        return left + plot_w * (x - (x_min - x_pad)) / ((x_max + x_pad) - (x_min - x_pad));
    };
    const auto sy = [&](double y) {
        return top + plot_h * (1.0 - (y - (y_min - y_pad)) / ((y_max + y_pad) - (y_min - y_pad)));
    };

    static const char* colors[] = {"#2ca02c", "#1f77b4", "#d62728", "#9467bd", "#ff7f0e", "#8c564b"};
    static const char* shapes[] = {"square", "circle", "diamond"};

    char buf[256];
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
        << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
    out << "  <rect width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";
    out << "  <text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
        << "font-size=\"16\">" << title << "</text>\n";

    // Axes with end-point labels.
    std::snprintf(buf, sizeof buf,
                  "  <line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"black\"/>\n",
                  left, top + plot_h, left + plot_w, top + plot_h);
    out << buf;
    std::snprintf(buf, sizeof buf,
                  "  <line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"black\"/>\n",
                  left, top, left, top + plot_h);
    out << buf;
    std::snprintf(buf, sizeof buf,
                  "  <text x=\"%.2f\" y=\"%.2f\" text-anchor=\"middle\" font-family=\"sans-serif\" "
                  "font-size=\"11\">%.4g</text>\n",
                  left, top + plot_h + 18.0, x_min);
    out << buf;
    std::snprintf(buf, sizeof buf,
                  "  <text x=\"%.2f\" y=\"%.2f\" text-anchor=\"middle\" font-family=\"sans-serif\" "
                  "font-size=\"11\">%.4g</text>\n",
                  left + plot_w, top + plot_h + 18.0, x_max);
    out << buf;
    std::snprintf(buf, sizeof buf,
                  "  <text x=\"%.2f\" y=\"%.2f\" text-anchor=\"end\" font-family=\"sans-serif\" "
                  "font-size=\"11\">%.4g</text>\n",
                  left - 6.0, top + plot_h, y_min);
    out << buf;
    std::snprintf(buf, sizeof buf,
                  "  <text x=\"%.2f\" y=\"%.2f\" text-anchor=\"end\" font-family=\"sans-serif\" "
                  "font-size=\"11\">%.4g</text>\n",
                  left - 6.0, top + 10.0, y_max);
    out << buf;
    std::snprintf(buf, sizeof buf,
                  "  <text x=\"%.2f\" y=\"%.2f\" text-anchor=\"middle\" font-family=\"sans-serif\" "
                  "font-size=\"12\">input</text>\n",
                  left + plot_w / 2, height - 12.0);
    out << buf;
    std::snprintf(buf, sizeof buf,
                  "  <text x=\"16\" y=\"%.2f\" text-anchor=\"middle\" font-family=\"sans-serif\" "
                  "font-size=\"12\" transform=\"rotate(-90 16 %.2f)\">output</text>\n",
                  top + plot_h / 2, top + plot_h / 2);
    out << buf;

    constexpr double r = 5.0;
    for (std::size_t s = 0; s < classification.categories.size(); ++s) {
        const char* color = colors[s % 6];
        const char* shape = shapes[s % 3];
        for (int t : classification.categories[s]) {
            const double cx = sx(table.inputs(0, t));
            const double cy = sy(table.outputs(0, t));
            if (std::string(shape) == "square") {
                std::snprintf(buf, sizeof buf,
                              "  <rect class=\"glyph\" x=\"%.2f\" y=\"%.2f\" width=\"%.2f\" "
                              "height=\"%.2f\" fill=\"%s\"><title>%s</title></rect>\n",
                              cx - r, cy - r, 2 * r, 2 * r, color,
                              table.object_ids[static_cast<std::size_t>(t)].c_str());
            } else if (std::string(shape) == "circle") {
                std::snprintf(buf, sizeof buf,
                              "  <circle class=\"glyph\" cx=\"%.2f\" cy=\"%.2f\" r=\"%.2f\" "
                              "fill=\"%s\"><title>%s</title></circle>\n",
                              cx, cy, r, color, table.object_ids[static_cast<std::size_t>(t)].c_str());
            } else {
                std::snprintf(buf, sizeof buf,
                              "  <polygon class=\"glyph\" points=\"%.2f,%.2f %.2f,%.2f %.2f,%.2f "
                              "%.2f,%.2f\" fill=\"%s\"><title>%s</title></polygon>\n",
                              cx, cy - r, cx + r, cy, cx, cy + r, cx - r, cy, color,
                              table.object_ids[static_cast<std::size_t>(t)].c_str());
            }
            out << buf;
        }
    }
    out << "</svg>\n";
}

}  // namespace equiclass
