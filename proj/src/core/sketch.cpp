#include "hairsalon/sketch.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "hairsalon/errors.hpp"
#include "hairsalon/random.hpp"

namespace hs {

std::size_t Sketch::hair_count() const {
    return static_cast<std::size_t>(std::count_if(strokes.begin(), strokes.end(),
                                                  [](const Stroke& s) { return s.kind == StrokeKind::hair; }));
}

std::string to_string(StrokeKind kind) { return kind == StrokeKind::hair ? "hair" : "non_hair"; }

void validate(const Sketch& sketch) {
    if (sketch.canvas.height <= 0 || sketch.canvas.width <= 0) throw Error("invalid_sketch", "canvas must be positive");
    std::set<int> ids;
    for (const auto& s : sketch.strokes) {
        if (s.points.size() < 2) throw Error("invalid_sketch", "stroke " + std::to_string(s.id) + " has fewer than 2 points");
        if (!(s.width > 0.f)) throw Error("invalid_sketch", "stroke " + std::to_string(s.id) + " has non-positive width");
        if (!ids.insert(s.id).second) throw Error("invalid_sketch", "duplicate stroke id " + std::to_string(s.id));
    }
}

Sketch clamped(Sketch sketch) {
    const double xmax = sketch.canvas.width - 1;
    const double ymax = sketch.canvas.height - 1;
    for (auto& s : sketch.strokes)
        for (auto& p : s.points) {
            p.x = std::clamp(p.x, 0.0, xmax);
            p.y = std::clamp(p.y, 0.0, ymax);
        }
    return sketch;
}

Sketch hair_only(const Sketch& sketch) {
    Sketch out{{}, sketch.canvas};
    for (const auto& s : sketch.strokes)
        if (s.kind == StrokeKind::hair) out.strokes.push_back(s);
    return out;
}

int next_stroke_id(const Sketch& sketch) {
    int id = 0;
    for (const auto& s : sketch.strokes) id = std::max(id, s.id + 1);
    return id;
}

namespace {

double segment_distance_sq(Point p, Point a, Point b) {
    const Point ab = b - a;
    const double len2 = dot(ab, ab);
    double t = len2 > 0.0 ? dot(p - a, ab) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    const Point d = p - (a + ab * t);
    return dot(d, d);
}

// Union of capsules of radius width/2: the dense limit of stamping discs along the polyline.
template <typename Fn>
void for_each_covered(const Stroke& stroke, Canvas canvas, Fn&& fn) {
    const double r = stroke.width * 0.5;
    const double r2 = r * r + 1e-9;
    const double xmax = canvas.width - 1;
    const double ymax = canvas.height - 1;
    Polyline pts = stroke.points;
    for (auto& p : pts) {
        p.x = std::clamp(p.x, 0.0, xmax);
        p.y = std::clamp(p.y, 0.0, ymax);
    }
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        const Point a = pts[i];
        const Point b = pts[i + 1];
        const int x0 = std::max(0, static_cast<int>(std::floor(std::min(a.x, b.x) - r)));
        const int x1 = std::min(canvas.width - 1, static_cast<int>(std::ceil(std::max(a.x, b.x) + r)));
        const int y0 = std::max(0, static_cast<int>(std::floor(std::min(a.y, b.y) - r)));
        const int y1 = std::min(canvas.height - 1, static_cast<int>(std::ceil(std::max(a.y, b.y) + r)));
        for (int y = y0; y <= y1; ++y)
            for (int x = x0; x <= x1; ++x)
                if (segment_distance_sq({double(x), double(y)}, a, b) <= r2) fn(x, y);
    }
}

}  // namespace

std::vector<std::int32_t> stroke_footprint(const Stroke& stroke, Canvas canvas) {
    std::vector<std::int32_t> idx;
    for_each_covered(stroke, canvas, [&](int x, int y) { idx.push_back(y * canvas.width + x); });
    std::sort(idx.begin(), idx.end());
    idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
    return idx;
}

BinaryMask footprint_mask(const Sketch& sketch, StrokeKind kind) {
    BinaryMask m(sketch.canvas.height, sketch.canvas.width, 1, 0);
    for (const auto& s : sketch.strokes)
        if (s.kind == kind) for_each_covered(s, sketch.canvas, [&](int x, int y) { m.at(x, y) = 1; });
    return m;
}

SketchMapMono rasterize_mono(const Sketch& sketch) {
    SketchMapMono map(sketch.canvas.height, sketch.canvas.width, 1, 0);
    for (const auto& s : sketch.strokes)
        if (s.kind == StrokeKind::hair)
            for_each_covered(s, sketch.canvas, [&](int x, int y) { map.at(x, y) = 1; });
    for (const auto& s : sketch.strokes)
        if (s.kind == StrokeKind::non_hair)
            for_each_covered(s, sketch.canvas, [&](int x, int y) { map.at(x, y) = -1; });
    return map;
}

RgbImage rasterize_color(const Sketch& sketch) {
    RgbImage map(sketch.canvas.height, sketch.canvas.width, 3, 0.f);
    for (const auto& s : sketch.strokes)
        if (s.kind == StrokeKind::hair)
            for_each_covered(s, sketch.canvas, [&](int x, int y) { set_rgb(map, x, y, s.color); });
    return map;
}

Sketch recolor_strokes_from_image(const Sketch& sketch, const RgbImage& image, RecolorMode mode,
                                  std::uint64_t seed) {
    if (image.height() != sketch.canvas.height || image.width() != sketch.canvas.width || image.channels() != 3)
        throw Error("shape_mismatch", "image dimensions do not match the sketch canvas");
    Sketch out = sketch;
    Rng rng(seed);
    for (auto& s : out.strokes) {
        if (s.kind != StrokeKind::hair) continue;
        const auto fp = stroke_footprint(s, sketch.canvas);
        if (fp.empty()) continue;
        if (mode == RecolorMode::random_pixel) {
            const auto pick = fp[std::uniform_int_distribution<std::size_t>(0, fp.size() - 1)(rng)];
            s.color = pixel_rgb(image, pick % image.width(), pick / image.width());
        } else {
            double acc[3] = {0, 0, 0};
            for (auto i : fp)
                for (int c = 0; c < 3; ++c) acc[c] += image.at(i % image.width(), i / image.width(), c);
            const double n = static_cast<double>(fp.size());
            s.color = {static_cast<float>(acc[0] / n), static_cast<float>(acc[1] / n), static_cast<float>(acc[2] / n)};
        }
    }
    return out;
}

nlohmann::json to_json(const Sketch& sketch) {
    nlohmann::json strokes = nlohmann::json::array();
    for (const auto& s : sketch.strokes) {
        nlohmann::json pts = nlohmann::json::array();
        for (const auto& p : s.points) pts.push_back({p.x, p.y});
        nlohmann::json js = {{"id", s.id},
                             {"kind", to_string(s.kind)},
                             {"width", s.width},
                             {"color", {s.color.r, s.color.g, s.color.b}},
                             {"points", std::move(pts)}};
        if (s.generated) js["generated"] = true;
        strokes.push_back(std::move(js));
    }
    return {{"version", Sketch::kVersion},
            {"canvas", {sketch.canvas.height, sketch.canvas.width}},
            {"strokes", std::move(strokes)}};
}

Sketch sketch_from_json(const nlohmann::json& doc) {
    try {
        if (!doc.is_object()) throw Error("invalid_sketch", "sketch document must be an object");
        const int version = doc.value("version", 0);
        if (version != Sketch::kVersion) throw Error("invalid_sketch", "unsupported sketch version " + std::to_string(version));
        Sketch sk;
        if (doc.contains("canvas")) {
            const auto& c = doc.at("canvas");
            sk.canvas = {c.at(0).get<int>(), c.at(1).get<int>()};
        }
        for (const auto& js : doc.at("strokes")) {
            Stroke s;
            s.id = js.at("id").get<int>();
            const auto kind = js.value("kind", std::string("hair"));
            if (kind == "hair") s.kind = StrokeKind::hair;
            else if (kind == "non_hair") s.kind = StrokeKind::non_hair;
            else throw Error("invalid_sketch", "unknown stroke kind '" + kind + "'");
            s.width = js.at("width").get<float>();
            if (js.contains("color")) {
                const auto& c = js.at("color");
                s.color = {c.at(0).get<float>(), c.at(1).get<float>(), c.at(2).get<float>()};
            }
            for (const auto& p : js.at("points")) s.points.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
            s.generated = js.value("generated", false);
            sk.strokes.push_back(std::move(s));
        }
        validate(sk);
        return clamped(std::move(sk));
    } catch (const nlohmann::json::exception& e) {
        throw Error("invalid_sketch", std::string("malformed sketch json: ") + e.what());
    }
}

}  // namespace hs
