#include "hairsalon/matte_ops.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hairsalon/errors.hpp"
#include "hairsalon/morphology.hpp"
#include "hairsalon/random.hpp"

namespace hs {

BinaryMask matte_to_mask(const Matte& matte, float threshold) {
    BinaryMask m(matte.height(), matte.width(), 1, 0);
    for (std::size_t i = 0; i < matte.size(); ++i) m.raw()[i] = matte.raw()[i] >= threshold ? 1 : 0;
    return m;
}

namespace {

BinaryMask band_from_distance(const Grid<float>& dist, double level) {
    const float cut = static_cast<float>(level - 0.5);
    BinaryMask band(dist.height(), dist.width(), 1, 0);
    constexpr int off[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
    for (int y = 0; y < dist.height(); ++y)
        for (int x = 0; x < dist.width(); ++x) {
            const float d = dist.at(x, y);
            if (!(d >= cut) || !std::isfinite(d)) continue;
            for (const auto& o : off) {
                const int nx = x + o[0];
                const int ny = y + o[1];
                if (dist.contains(nx, ny) && dist.at(nx, ny) < cut) {
                    band.at(x, y) = 1;
                    break;
                }
            }
        }
    return band;
}

}  // namespace

BinaryMask offset_band(const BinaryMask& hair, double level) {
    return band_from_distance(morph::distance_to(hair), level);
}

BinaryMask extract_offset_contour(const Matte& matte, int offset_px) {
    if (offset_px < 3 || offset_px > 8) throw Error("invalid_argument", "offset_px must lie in [3, 8]");
    return offset_band(matte_to_mask(matte), offset_px);
}

namespace {

// Move a band point outward along the distance gradient so it sits at `level`.
Point project_to_level(const Grid<float>& dist, Point p, double level) {
    const int x = static_cast<int>(p.x);
    const int y = static_cast<int>(p.y);
    auto sample = [&](int sx, int sy) {
        sx = std::clamp(sx, 0, dist.width() - 1);
        sy = std::clamp(sy, 0, dist.height() - 1);
        return static_cast<double>(dist.at(sx, sy));
    };
    const double gx = 0.5 * (sample(x + 1, y) - sample(x - 1, y));
    const double gy = 0.5 * (sample(x, y + 1) - sample(x, y - 1));
    const double norm = std::hypot(gx, gy);
    if (norm < 1e-6) return p;
    const double step = level - dist.at(x, y);
    return {p.x + gx / norm * step, p.y + gy / norm * step};
}

struct FootprintRange {
    double lo = 0.0;
    double hi = 0.0;
    bool empty = true;
};

FootprintRange footprint_range(const Stroke& s, const Grid<float>& dist) {
    FootprintRange r{1e30, -1e30, true};
    for (auto i : stroke_footprint(s, dist.canvas())) {
        const double d = dist.raw()[static_cast<std::size_t>(i)];
        r.lo = std::min(r.lo, d);
        r.hi = std::max(r.hi, d);
        r.empty = false;
    }
    return r;
}

}  // namespace

std::vector<Stroke> generate_nonhair_strokes(const Matte& matte, std::uint64_t seed, const NonHairSynthesis& cfg) {
    const BinaryMask hair = matte_to_mask(matte);
    if (count_nonzero(hair) == 0) return {};
    const Grid<float> dist = morph::distance_to(hair);

    Rng rng(seed);
    const int offset = uniform_int(rng, cfg.offset_min, cfg.offset_max);
    const double retain = uniform(rng, cfg.retain_min, cfg.retain_max);

    const BinaryMask band = morph::thin(band_from_distance(dist, offset));
    const int side = std::min(matte.width(), matte.height());
    const double arc_min = std::max(5.0, 0.05 * side);
    const double arc_max = std::max(arc_min + 1.0, 0.15 * side);

    std::vector<Polyline> arcs;
    double total = 0.0;
    for (const auto& chain : morph::trace_chains(band)) {
        const Polyline line = morph::to_polyline(chain, band.width());
        if (line.size() < 2) continue;
        std::size_t start = 0;
        while (start + 1 < line.size()) {
            const double target = uniform(rng, arc_min, arc_max);
            double len = 0.0;
            std::size_t end = start;
            while (end + 1 < line.size() && len < target) {
                len += std::hypot(line[end + 1].x - line[end].x, line[end + 1].y - line[end].y);
                ++end;
            }
            arcs.emplace_back(line.begin() + static_cast<std::ptrdiff_t>(start), line.begin() + static_cast<std::ptrdiff_t>(end) + 1);
            total += len;
            start = end;
        }
    }
    if (arcs.empty()) return {};

    std::vector<std::size_t> order(arcs.size());
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);

    // A symmetric stroke spans ~width in distance, while the band it may occupy is
    // [min_clearance, outer_limit + width/2]; wider strokes than this cannot fit.
    const int width_fit = static_cast<int>(std::floor(2.0 * (cfg.outer_limit - cfg.min_clearance - 1.0)));

    std::vector<Stroke> strokes;
    double kept = 0.0;
    for (auto ai : order) {
        if (kept >= retain * total && !strokes.empty()) break;
        const Polyline& arc = arcs[ai];
        const double arc_len = morph::polyline_length(arc);
        int width = std::min(uniform_int(rng, cfg.width_min, cfg.width_max), width_fit);
        for (; width >= cfg.width_min; --width) {
            const double level = std::max<double>(offset, cfg.min_clearance + 0.5 + 0.5 * width);
            Polyline pts;
            pts.reserve(arc.size());
            for (const auto& p : arc) pts.push_back(project_to_level(dist, p, level));
            Stroke s;
            s.id = static_cast<int>(strokes.size());
            s.points = morph::simplify(pts, 0.35);
            s.width = static_cast<float>(width);
            s.kind = StrokeKind::non_hair;
            if (s.points.size() < 2) break;
            const auto r = footprint_range(s, dist);
            if (r.empty) break;
            if (r.lo >= cfg.min_clearance && r.hi <= cfg.outer_limit + 0.5 * width) {
                strokes.push_back(std::move(s));
                kept += arc_len;
                break;
            }
        }
    }
    return strokes;
}

namespace {

void require_same(const Matte& a, const Matte& b) {
    if (!a.same_shape(b)) throw Error("shape_mismatch", "mattes have incompatible dimensions");
}

}  // namespace

double sad(const Matte& a, const Matte& b, SadScale scale) {
    require_same(a, b);
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += std::abs(static_cast<double>(a.raw()[i]) - b.raw()[i]);
    return scale == SadScale::per_thousand ? acc / 1000.0 : acc;
}

double iou(const Matte& a, const Matte& b, float threshold) {
    require_same(a, b);
    std::size_t inter = 0;
    std::size_t uni = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const bool ma = a.raw()[i] >= threshold;
        const bool mb = b.raw()[i] >= threshold;
        inter += ma && mb;
        uni += ma || mb;
    }
    return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

}  // namespace hs
