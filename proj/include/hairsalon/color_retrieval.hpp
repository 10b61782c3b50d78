#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "hairsalon/grid.hpp"

namespace hs {
struct SamplePair;
}

namespace hs::color {

struct Lab {
    double l = 0.0;
    double a = 0.0;
    double b = 0.0;
};

// sRGB (D65, 2 degree observer) <-> CIELab.
Lab rgb_to_lab(Rgb rgb);
Rgb lab_to_rgb(Lab lab);
double delta_e(Lab p, Lab q);

struct Entry {
    Rgb rgb;
    Lab lab;
};

class ColorDatabase {
public:
    ColorDatabase() = default;
    explicit ColorDatabase(const std::vector<Rgb>& colors);

    void add(Rgb rgb);
    std::size_t size() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }
    const std::vector<Entry>& entries() const { return entries_; }

    // JSON lines, one {"rgb":[r,g,b],"lab":[L,a,b]} object per entry.
    void save(const std::filesystem::path& path) const;
    static ColorDatabase load(const std::filesystem::path& path);

private:
    std::vector<Entry> entries_;
};

// One entry per hair stroke: mean image color over the stroke footprint.
ColorDatabase build_database(const std::vector<SamplePair>& dataset);

struct Neighbor {
    std::size_t index = 0;
    double distance = 0.0;
    Rgb rgb;
};

// min(k, |db|) nearest entries by CIELab distance, ascending; ties by lower index.
std::vector<Neighbor> nearest_colors(const ColorDatabase& db, Rgb query, int k = 20);

Rgb snap_color(const ColorDatabase& db, Rgb query, std::uint64_t seed, int k = 20);

}  // namespace hs::color
