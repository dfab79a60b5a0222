#pragma once

#include <algorithm>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "tddr/common.hpp"

namespace tddr {

struct GrayWindow {
    double lo = 0, hi = 1;
};

struct DumpInfo {
    GrayWindow window;
    bool degenerate_window = false;  // auto-window collapsed; mid-gray output
};

// 8-bit binary portable graymap. Auto window spans the 1st..99th percentile
// of the values (nearest rank); rounding is round-half-up, so the window
// midpoint maps to 128.
inline DumpInfo dump_grayscale(const std::vector<double>& values, int width, int height,
                               const std::string& path,
                               std::optional<GrayWindow> window = std::nullopt) {
    if (static_cast<size_t>(width) * height != values.size())
        throw shape_error("dump_grayscale: dimensions do not match data");
    for (double v : values)
        if (!std::isfinite(v)) throw numeric_error("dump_grayscale: non-finite pixel value");

    DumpInfo info;
    if (window) {
        info.window = *window;
    } else {
        std::vector<double> sorted = values;
        std::sort(sorted.begin(), sorted.end());
        auto rank = [&](double p) {
            const size_t i = static_cast<size_t>(llround(p * double(sorted.size() - 1)));
            return sorted[std::min(i, sorted.size() - 1)];
        };
        info.window.lo = rank(0.01);
        info.window.hi = rank(0.99);
    }
    if (!(info.window.hi > info.window.lo)) info.degenerate_window = true;

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw io_error("dump_grayscale: cannot open '" + path + "'");
    out << "P5\n" << width << " " << height << "\n255\n";
    std::vector<unsigned char> row(static_cast<size_t>(width));
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            unsigned char px;
            if (info.degenerate_window) {
                px = 128;
            } else {
                double t = (values[static_cast<size_t>(y) * width + x] - info.window.lo) /
                           (info.window.hi - info.window.lo);
                t = std::clamp(t, 0.0, 1.0);
                px = static_cast<unsigned char>(std::floor(t * 255.0 + 0.5));
            }
            row[static_cast<size_t>(x)] = px;
        }
        out.write(reinterpret_cast<const char*>(row.data()), row.size());
    }
    if (!out) throw io_error("dump_grayscale: write failed for '" + path + "'");
    return info;
}

}  // namespace tddr
