#pragma once

#include <cstdint>
#include <vector>

#include "hairsalon/grid.hpp"
#include "hairsalon/sketch.hpp"

namespace hs {

BinaryMask matte_to_mask(const Matte& matte, float threshold = 0.5f);

// One-pixel-wide band of exterior pixels whose distance to the thresholded hair region
// crosses `level`: d(p) >= level - 0.5 with a 4-neighbor below level - 0.5.
BinaryMask offset_band(const BinaryMask& hair, double level);

// Requires 3 <= offset_px <= 8.
BinaryMask extract_offset_contour(const Matte& matte, int offset_px);

struct NonHairSynthesis {
    int offset_min = 3;
    int offset_max = 8;
    int width_min = 3;
    int width_max = 15;
    // Every emitted stroke pixel lies within [min_clearance, outer_limit + width / 2] px
    // of the 0.5-mask.
    double min_clearance = 2.0;
    double outer_limit = 9.0;
    double retain_min = 0.1;
    double retain_max = 0.3;
};

std::vector<Stroke> generate_nonhair_strokes(const Matte& matte, std::uint64_t seed,
                                             const NonHairSynthesis& cfg = {});

enum class SadScale { per_thousand, raw };

double sad(const Matte& a, const Matte& b, SadScale scale = SadScale::per_thousand);
double iou(const Matte& a, const Matte& b, float threshold = 0.5f);

}  // namespace hs
