#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "harris/flow.hpp"
#include "harris/format.hpp"

namespace harris {

// Trajectory plot: space on the horizontal axis, time on the vertical axis
// growing downwards from t = 0. Every cluster draws once; a label stops
// drawing at the step where it merges into a lower-labeled cluster, ending
// at the merge point.
inline std::string trajectories_svg(const FlowPathRecord& rec, int width = 800,
                                    int height = 600) {
    constexpr size_t kMaxPointsPerPath = 2048;
    constexpr const char* kPalette[] = {"#4878d0", "#ee854a", "#6acc64", "#d65f5f",
                                        "#956cb4", "#8c613c", "#dc7ec0", "#797979"};
    const size_t nt = rec.times.size();
    const size_t nl = rec.initial.size();
    const size_t stride = std::max<size_t>(1, (nt + kMaxPointsPerPath - 1) / kMaxPointsPerPath);

    double xmin = rec.initial.front(), xmax = rec.initial.back();
    for (const auto& row : rec.values)
        for (double v : row) {
            xmin = std::min(xmin, v);
            xmax = std::max(xmax, v);
        }
    const double xpad = 0.05 * std::max(1e-12, xmax - xmin);
    xmin -= xpad;
    xmax += xpad;
    const double tmax = rec.times.back() > 0 ? rec.times.back() : 1.0;
    const double margin = 40.0;
    auto sx = [&](double x) {
        return margin + (x - xmin) / (xmax - xmin) * (width - 2 * margin);
    };
    auto sy = [&](double t) { return margin + t / tmax * (height - 2 * margin); };

    std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
                      std::to_string(width) + "\" height=\"" + std::to_string(height) +
                      "\" viewBox=\"0 0 " + std::to_string(width) + " " +
                      std::to_string(height) + "\">\n";
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg += "<text x=\"" + format_double(margin) + "\" y=\"20\" font-size=\"12\" "
           "font-family=\"sans-serif\">time runs down; space runs right</text>\n";

    for (size_t k = 0; k < nl; ++k) {
        std::string pts;
        size_t count = 0;
        for (size_t i = 0; i < nt; ++i) {
            const bool owner = rec.cluster_ids[i][k] == int(k);
            const bool sampled = (i % stride == 0) || i + 1 == nt || !owner;
            if (sampled) {
                pts += format_double(sx(rec.values[i][k])) + "," +
                       format_double(sy(rec.times[i])) + " ";
                ++count;
            }
            if (!owner) break;  // merged into a lower label at this step
        }
        if (count < 2) continue;
        svg += "<polyline fill=\"none\" stroke=\"";
        svg += kPalette[k % 8];
        svg += "\" stroke-width=\"1\" points=\"" + pts + "\"/>\n";
    }
    svg += "</svg>\n";
    return svg;
}

}  // namespace harris
