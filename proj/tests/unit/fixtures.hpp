#pragma once

#include <cmath>
#include <limits>

#include "hairsalon/grid.hpp"
#include "hairsalon/random.hpp"
#include "hairsalon/sketch.hpp"

namespace fixtures {

inline hs::Stroke stroke(int id, hs::Polyline pts, float width = 3.f, hs::Rgb color = {0.8f, 0.6f, 0.3f},
                         hs::StrokeKind kind = hs::StrokeKind::hair) {
    hs::Stroke s;
    s.id = id;
    s.points = std::move(pts);
    s.width = width;
    s.color = color;
    s.kind = kind;
    return s;
}

inline hs::Matte disc(hs::Canvas canvas, double cx, double cy, double r) {
    hs::Matte m(canvas.height, canvas.width, 1, 0.f);
    for (int y = 0; y < canvas.height; ++y)
        for (int x = 0; x < canvas.width; ++x)
            if (std::hypot(x - cx, y - cy) <= r) m.at(x, y) = 1.f;
    return m;
}

inline hs::Matte ellipse(hs::Canvas canvas, double cx, double cy, double rx, double ry) {
    hs::Matte m(canvas.height, canvas.width, 1, 0.f);
    for (int y = 0; y < canvas.height; ++y)
        for (int x = 0; x < canvas.width; ++x) {
            const double u = (x - cx) / rx, v = (y - cy) / ry;
            if (u * u + v * v <= 1.0) m.at(x, y) = 1.f;
        }
    return m;
}

inline double segment_distance(double px, double py, hs::Point a, hs::Point b) {
    const double vx = b.x - a.x, vy = b.y - a.y;
    const double len2 = vx * vx + vy * vy;
    double t = len2 > 0 ? ((px - a.x) * vx + (py - a.y) * vy) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return std::hypot(px - (a.x + t * vx), py - (a.y + t * vy));
}

// Brute-force distance from a pixel center to a polyline.
inline double polyline_distance(double px, double py, const hs::Polyline& line) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < line.size(); ++i) best = std::min(best, segment_distance(px, py, line[i], line[i + 1]));
    return best;
}

// Brute-force distance from every pixel to the nearest set pixel of `mask`.
inline hs::Grid<float> brute_distance(const hs::BinaryMask& mask) {
    hs::Grid<float> d(mask.height(), mask.width(), 1, std::numeric_limits<float>::infinity());
    std::vector<std::pair<int, int>> pts;
    for (int y = 0; y < mask.height(); ++y)
        for (int x = 0; x < mask.width(); ++x)
            if (mask.at(x, y)) pts.emplace_back(x, y);
    for (int y = 0; y < mask.height(); ++y)
        for (int x = 0; x < mask.width(); ++x) {
            double best = std::numeric_limits<double>::infinity();
            for (auto [px, py] : pts) best = std::min(best, std::hypot(double(x - px), double(y - py)));
            d.at(x, y) = static_cast<float>(best);
        }
    return d;
}

}  // namespace fixtures
