#pragma once

#include <optional>
#include <vector>

#include "hairsalon/grid.hpp"
#include "hairsalon/sketch.hpp"

namespace hs::diffusion {

inline constexpr int kDilationSize = 15;
inline constexpr int kSpurLength = 5;

// mask AND NOT dilate(hair footprint, 15x15 square). Requires at least one hair stroke.
BinaryMask build_subtracted_map(const Sketch& sketch, const BinaryMask& mask);

// Medial-axis strokes (width 2, hair, generated) per connected component of the map.
// The skeleton is taken of the component shrunk by one pixel so that a width-2 stroke
// stays inside the map.
std::vector<Stroke> extract_medial_strokes(const BinaryMask& map, int min_length_px = 20);

enum class ColorPolicy { nearest_user_stroke, fixed };

struct CompletionOptions {
    ColorPolicy policy = ColorPolicy::nearest_user_stroke;
    Rgb fixed_color{1.f, 0.4f, 0.7f};
    int min_length_px = 20;
    // Diffusion repeats on the remaining uncovered region until nothing new is added.
    int max_rounds = 16;
};

Sketch autocomplete_unbraided(const Sketch& sketch, const Matte& matte, const CompletionOptions& options = {});

}  // namespace hs::diffusion
