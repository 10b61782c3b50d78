#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "hairsalon/grid.hpp"

namespace hs {

enum class StrokeKind { hair, non_hair };

struct Stroke {
    int id = 0;
    Polyline points;
    float width = 3.f;
    Rgb color{};
    StrokeKind kind = StrokeKind::hair;
    // Set on strokes produced by auto-completion until the user accepts them.
    bool generated = false;
};

struct Sketch {
    static constexpr int kVersion = 1;

    std::vector<Stroke> strokes;
    Canvas canvas{};

    std::size_t hair_count() const;
};

enum class RecolorMode { random_pixel, mean };

// Throws hs::Error("invalid_sketch") when a stroke has < 2 points, width <= 0,
// or ids repeat.
void validate(const Sketch& sketch);

Sketch clamped(Sketch sketch);
Sketch hair_only(const Sketch& sketch);
int next_stroke_id(const Sketch& sketch);

// Pixel indices (y * width + x) covered by the stroke: centers within width/2 of the
// clamped polyline. Sorted ascending.
std::vector<std::int32_t> stroke_footprint(const Stroke& stroke, Canvas canvas);
BinaryMask footprint_mask(const Sketch& sketch, StrokeKind kind);

SketchMapMono rasterize_mono(const Sketch& sketch);
RgbImage rasterize_color(const Sketch& sketch);

Sketch recolor_strokes_from_image(const Sketch& sketch, const RgbImage& image, RecolorMode mode,
                                  std::uint64_t seed = 0);

nlohmann::json to_json(const Sketch& sketch);
Sketch sketch_from_json(const nlohmann::json& doc);

std::string to_string(StrokeKind kind);

}  // namespace hs
