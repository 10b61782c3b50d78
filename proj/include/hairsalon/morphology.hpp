#pragma once

#include <cstdint>
#include <vector>

#include "hairsalon/grid.hpp"

namespace hs::morph {

using PixelChain = std::vector<std::int32_t>;  // linear indices y * width + x

// Exact Euclidean distance from every pixel center to the nearest pixel with
// features != 0. Pixels on a feature get 0; +inf when there are no features.
Grid<float> distance_to(const BinaryMask& features);

BinaryMask invert(const BinaryMask& mask);
BinaryMask dilate_square(const BinaryMask& mask, int size);
BinaryMask erode_square(const BinaryMask& mask, int size);

// 8-connected labeling; background label is -1, components numbered from 0 in
// row-major order of their first pixel.
struct Components {
    Grid<std::int32_t> labels;
    int count = 0;
};
Components label_components(const BinaryMask& mask);

// Zhang-Suen thinning to a one-pixel-wide skeleton.
BinaryMask thin(const BinaryMask& mask);

// Decompose a thin pixel set into chains between end/junction pixels using
// m-adjacency. Closed loops come back with the first pixel repeated at the end.
std::vector<PixelChain> trace_chains(const BinaryMask& thin_mask);

// Remove branches ending in a free endpoint whose length (pixels) is below min_length.
BinaryMask prune_spurs(const BinaryMask& thin_mask, int min_length);

Polyline to_polyline(const PixelChain& chain, int width);
double polyline_length(const Polyline& line);
Polyline simplify(const Polyline& line, double tolerance);

}  // namespace hs::morph
