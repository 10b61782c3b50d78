#include "hairsalon/stroke_diffusion.hpp"

#include <cmath>
#include <limits>

#include "hairsalon/errors.hpp"
#include "hairsalon/matte_ops.hpp"
#include "hairsalon/morphology.hpp"

namespace hs::diffusion {

BinaryMask build_subtracted_map(const Sketch& sketch, const BinaryMask& mask) {
    if (sketch.hair_count() == 0) throw Error("no_hair_strokes", "at least one hair stroke is required");
    if (mask.height() != sketch.canvas.height || mask.width() != sketch.canvas.width)
        throw Error("shape_mismatch", "mask does not match the sketch canvas");
    const BinaryMask covered = morph::dilate_square(footprint_mask(sketch, StrokeKind::hair), kDilationSize);
    BinaryMask out(mask.height(), mask.width(), 1, 0);
    for (std::size_t i = 0; i < out.size(); ++i) out.raw()[i] = mask.raw()[i] && !covered.raw()[i] ? 1 : 0;
    return out;
}

namespace {

bool footprint_inside(const Stroke& s, const BinaryMask& region) {
    for (auto i : stroke_footprint(s, region.canvas()))
        if (!region.raw()[static_cast<std::size_t>(i)]) return false;
    return true;
}

double point_segment_distance(Point p, Point a, Point b) {
    const Point ab = b - a;
    const double len2 = dot(ab, ab);
    const double t = len2 > 0 ? std::clamp(dot(p - a, ab) / len2, 0.0, 1.0) : 0.0;
    const Point d = p - (a + ab * t);
    return std::sqrt(dot(d, d));
}

double point_polyline_distance(Point p, const Polyline& line) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < line.size(); ++i) best = std::min(best, point_segment_distance(p, line[i], line[i + 1]));
    return best;
}

}  // namespace

std::vector<Stroke> extract_medial_strokes(const BinaryMask& map, int min_length_px) {
    const BinaryMask interior = morph::erode_square(map, 3);
    const auto comps = morph::label_components(interior);
    std::vector<Stroke> strokes;
    for (int c = 0; c < comps.count; ++c) {
        BinaryMask comp(map.height(), map.width(), 1, 0);
        for (std::size_t i = 0; i < comp.size(); ++i) comp.raw()[i] = comps.labels.raw()[i] == c ? 1 : 0;
        const BinaryMask skeleton = morph::prune_spurs(morph::thin(comp), kSpurLength);
        for (const auto& chain : morph::trace_chains(skeleton)) {
            const Polyline line = morph::to_polyline(chain, map.width());
            if (line.size() < 2 || morph::polyline_length(line) < min_length_px) continue;
            Stroke s;
            s.points = morph::simplify(line, 0.5);
            s.width = 2.f;
            s.kind = StrokeKind::hair;
            s.generated = true;
            if (!footprint_inside(s, map)) s.points = line;
            if (!footprint_inside(s, map)) continue;
            s.id = static_cast<int>(strokes.size());
            strokes.push_back(std::move(s));
        }
    }
    return strokes;
}

Sketch autocomplete_unbraided(const Sketch& sketch, const Matte& matte, const CompletionOptions& options) {
    if (sketch.hair_count() == 0) throw Error("no_hair_strokes", "at least one hair stroke is required");
    const BinaryMask mask = matte_to_mask(matte);
    std::vector<const Stroke*> user;
    for (const auto& s : sketch.strokes)
        if (s.kind == StrokeKind::hair) user.push_back(&s);

    Sketch out = sketch;
    std::vector<Stroke> added;
    for (int round = 0; round < options.max_rounds; ++round) {
        const BinaryMask map = build_subtracted_map(out, mask);
        auto fresh = extract_medial_strokes(map, options.min_length_px);
        if (fresh.empty()) break;
        for (auto& s : fresh) {
            s.id = next_stroke_id(out);
            if (options.policy == ColorPolicy::fixed) {
                s.color = options.fixed_color;
            } else {
                double best = std::numeric_limits<double>::infinity();
                for (const Stroke* u : user) {
                    const double d = std::min(point_polyline_distance(s.points.front(), u->points),
                                              point_polyline_distance(s.points.back(), u->points));
                    if (d < best) {
                        best = d;
                        s.color = u->color;
                    }
                }
            }
            out.strokes.push_back(s);
        }
    }
    return out;
}

}  // namespace hs::diffusion
