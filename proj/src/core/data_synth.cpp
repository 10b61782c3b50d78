#include "hairsalon/data_synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <thread>

#include <json.hpp>

#include "hairsalon/braid.hpp"
#include "hairsalon/errors.hpp"
#include "hairsalon/image_io.hpp"
#include "hairsalon/matte_ops.hpp"
#include "hairsalon/morphology.hpp"

namespace hs {

Style style_from_string(const std::string& name) {
    if (name == "straight") return Style::straight;
    if (name == "wavy") return Style::wavy;
    if (name == "braided") return Style::braided;
    throw Error("invalid_argument", "unknown style '" + name + "'");
}

std::string to_string(Style style) {
    switch (style) {
        case Style::straight: return "straight";
        case Style::wavy: return "wavy";
        case Style::braided: return "braided";
    }
    return "straight";
}

namespace {

constexpr double kPi = std::numbers::pi;

Rgb jitter(Rng& rng, Rgb c, double amount) {
    auto j = [&](float v) { return static_cast<float>(std::clamp(v + uniform(rng, -amount, amount), 0.02, 0.98)); };
    return {j(c.r), j(c.g), j(c.b)};
}

Rgb hair_family(Rng& rng) {
    static const Rgb families[] = {{0.25f, 0.16f, 0.10f}, {0.09f, 0.08f, 0.08f}, {0.76f, 0.60f, 0.36f},
                                   {0.50f, 0.22f, 0.11f}, {0.55f, 0.40f, 0.26f}, {0.62f, 0.58f, 0.55f}};
    return families[uniform_int(rng, 0, 5)];
}

Rgb background_color(Rng& rng) {
    const double r = uniform(rng, 0.55, 0.95);
    const double g = r * uniform(rng, 0.75, 0.95);
    const double b = g * uniform(rng, 0.7, 0.95);
    return {static_cast<float>(r), static_cast<float>(g), static_cast<float>(b)};
}

double smoothstep(double e0, double e1, double x) {
    const double t = std::clamp((x - e0) / (e1 - e0), 0.0, 1.0);
    return t * t * (3.0 - 2.0 * t);
}

// Zero-mean noise smoothed by two 3x3 box passes.
Grid<float> filtered_noise(Rng& rng, int h, int w) {
    std::normal_distribution<float> n01(0.f, 1.f);
    Grid<float> g(h, w, 1);
    for (auto& v : g.raw()) v = n01(rng);
    for (int pass = 0; pass < 2; ++pass) {
        Grid<float> out(h, w, 1);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                float acc = 0.f;
                int cnt = 0;
                for (int dy = -1; dy <= 1; ++dy)
                    for (int dx = -1; dx <= 1; ++dx)
                        if (g.contains(x + dx, y + dy)) {
                            acc += g.at(x + dx, y + dy);
                            ++cnt;
                        }
                out.at(x, y) = acc / static_cast<float>(cnt);
            }
        g = std::move(out);
    }
    return g;
}

struct GuideStroke {
    Polyline points;
    double tube = 10.0;  // half-width of the hair wisp around the stroke
    Rgb color;
};

Polyline guide_path(Rng& rng, Style style, Point start, double length, double angle, double bend, double scale) {
    const double step = std::max(2.0, 4.0 * scale);
    const int n = std::max(8, static_cast<int>(length / step));
    const double amp = style == Style::wavy ? uniform(rng, 6.0, 14.0) * scale : 0.0;
    const double lambda = uniform(rng, 50.0, 110.0) * scale;
    const double phase = uniform(rng, 0.0, 2.0 * kPi);
    Polyline pts;
    Point p = start;
    double s = 0.0;
    for (int i = 0; i <= n; ++i) {
        const double u = static_cast<double>(i) / n;
        const double a = angle + bend * u;
        const Point dir{std::sin(a), std::cos(a)};
        const Point lateral{dir.y, -dir.x};
        const double off = amp * std::sin(2.0 * kPi * s / lambda + phase);
        pts.push_back(p + lateral * off);
        p = p + dir * (length / n);
        s += length / n;
    }
    return pts;
}

struct Field {
    Matte alpha;
    Grid<std::int32_t> owner;  // stroke nearest to each pixel
    Grid<float> across;        // unsigned distance to the owner's center-line
};

double segment_distance(Point p, Point a, Point b) {
    const Point ab = b - a;
    const double len2 = dot(ab, ab);
    const double t = len2 > 0 ? std::clamp(dot(p - a, ab) / len2, 0.0, 1.0) : 0.0;
    const Point d = p - (a + ab * t);
    return std::sqrt(dot(d, d));
}

Field tube_field(const std::vector<GuideStroke>& guides, Canvas canvas, double feather) {
    const float inf = std::numeric_limits<float>::infinity();
    Grid<float> signed_d(canvas.height, canvas.width, 1, inf);
    Field f{Matte(canvas.height, canvas.width, 1, 0.f), Grid<std::int32_t>(canvas.height, canvas.width, 1, -1),
            Grid<float>(canvas.height, canvas.width, 1, inf)};
    for (std::size_t k = 0; k < guides.size(); ++k) {
        const auto& g = guides[k];
        const double reach = g.tube + feather;
        double x0 = 1e9, x1 = -1e9, y0 = 1e9, y1 = -1e9;
        for (const auto& p : g.points) {
            x0 = std::min(x0, p.x), x1 = std::max(x1, p.x), y0 = std::min(y0, p.y), y1 = std::max(y1, p.y);
        }
        const int ix0 = std::max(0, static_cast<int>(x0 - reach)), ix1 = std::min(canvas.width - 1, static_cast<int>(x1 + reach) + 1);
        const int iy0 = std::max(0, static_cast<int>(y0 - reach)), iy1 = std::min(canvas.height - 1, static_cast<int>(y1 + reach) + 1);
        for (int y = iy0; y <= iy1; ++y)
            for (int x = ix0; x <= ix1; ++x) {
                double best = std::numeric_limits<double>::infinity();
                for (std::size_t i = 0; i + 1 < g.points.size(); ++i)
                    best = std::min(best, segment_distance({double(x), double(y)}, g.points[i], g.points[i + 1]));
                const float sd = static_cast<float>(best - g.tube);
                if (sd < signed_d.at(x, y)) signed_d.at(x, y) = sd;
                if (best < f.across.at(x, y)) {
                    f.across.at(x, y) = static_cast<float>(best);
                    f.owner.at(x, y) = static_cast<std::int32_t>(k);
                }
            }
    }
    for (std::size_t i = 0; i < f.alpha.size(); ++i)
        f.alpha.raw()[i] = static_cast<float>(std::clamp(0.5 - signed_d.raw()[i] / feather, 0.0, 1.0));
    return f;
}

void composite(SamplePair& pair, const RgbImage& fg) {
    for (int y = 0; y < pair.image.height(); ++y)
        for (int x = 0; x < pair.image.width(); ++x) {
            const float a = pair.matte.at(x, y);
            for (int c = 0; c < 3; ++c)
                pair.image.at(x, y, c) = std::clamp(a * fg.at(x, y, c) + (1.f - a) * pair.background.at(x, y, c), 0.f, 1.f);
        }
}

void paint_footprints(RgbImage& fg, const Sketch& sketch) {
    for (const auto& s : sketch.strokes)
        for (auto i : stroke_footprint(s, sketch.canvas)) set_rgb(fg, i % fg.width(), i / fg.width(), s.color);
}

SamplePair synth_unbraided(Style style, Canvas canvas, Rng& rng) {
    const double scale = std::min(canvas.width, canvas.height) / 512.0;
    SamplePair pair;
    pair.background = RgbImage(canvas.height, canvas.width, 3);
    const Rgb bg = background_color(rng);
    for (int y = 0; y < canvas.height; ++y)
        for (int x = 0; x < canvas.width; ++x) set_rgb(pair.background, x, y, bg);

    const Rgb family = hair_family(rng);
    const int n = uniform_int(rng, 5, 20);
    const double cx = canvas.width * (0.5 + uniform(rng, -0.08, 0.08));
    const double top = canvas.height * uniform(rng, 0.12, 0.25);
    const double length = canvas.height * uniform(rng, 0.4, 0.65);
    const double spread = canvas.width * uniform(rng, 0.25, 0.45);
    const double feather = std::max(1.5, uniform(rng, 4.0, 10.0) * scale);
    const float stroke_width = static_cast<float>(std::max(2.0, 3.0 * scale));
    const double min_tube = stroke_width / 2.0 + feather / 2.0 + 1.0;
    const double deg = kPi / 180.0;

    std::vector<GuideStroke> guides;
    for (int i = 0; i < n; ++i) {
        const double x0 = cx - spread / 2 + spread * (i + 0.5 + uniform(rng, -0.3, 0.3)) / n;
        const double y0 = top + uniform(rng, 0.0, 0.1) * length;
        const double len = length * uniform(rng, 0.6, 1.0);
        const double angle = uniform(rng, -8.0, 8.0) * deg + (x0 - cx) / spread * 10.0 * deg;
        const double bend = uniform(rng, -10.0, 10.0) * deg;
        GuideStroke g;
        g.points = guide_path(rng, style, {x0, y0}, len, angle, bend, scale);
        g.tube = std::max(min_tube, uniform(rng, 10.0, 22.0) * scale);
        g.color = jitter(rng, family, 0.05);
        guides.push_back(std::move(g));
    }

    const Field field = tube_field(guides, canvas, feather);
    pair.matte = field.alpha;

    const Grid<float> noise = filtered_noise(rng, canvas.height, canvas.width);
    const double period = std::max(4.0, 9.0 * scale);
    RgbImage fg(canvas.height, canvas.width, 3, 0.f);
    for (int y = 0; y < canvas.height; ++y)
        for (int x = 0; x < canvas.width; ++x) {
            const int k = field.owner.at(x, y);
            if (k < 0) continue;
            const double u = field.across.at(x, y);
            // Highlight bands run parallel to the stroke; texture fades out on the footprint.
            const double ramp = smoothstep(stroke_width / 2.0 + 0.5, stroke_width / 2.0 + 2.5, u);
            const double shade = 1.0 + ramp * (0.22 * std::sin(2.0 * kPi * u / period) + 0.08 * noise.at(x, y));
            const Rgb c = guides[static_cast<std::size_t>(k)].color;
            set_rgb(fg, x, y, {static_cast<float>(std::clamp(c.r * shade, 0.0, 1.0)),
                               static_cast<float>(std::clamp(c.g * shade, 0.0, 1.0)),
                               static_cast<float>(std::clamp(c.b * shade, 0.0, 1.0))});
        }

    pair.sketch.canvas = canvas;
    for (std::size_t k = 0; k < guides.size(); ++k) {
        Stroke s;
        s.id = static_cast<int>(k);
        s.points = guides[k].points;
        s.width = stroke_width;
        s.color = guides[k].color;
        pair.sketch.strokes.push_back(std::move(s));
    }
    pair.sketch = clamped(std::move(pair.sketch));
    paint_footprints(fg, pair.sketch);
    pair.image = RgbImage(canvas.height, canvas.width, 3);
    composite(pair, fg);
    return pair;
}

SamplePair synth_braided(Canvas canvas, Rng& rng) {
    const double scale = std::min(canvas.width, canvas.height) / 512.0;
    SamplePair pair;
    pair.background = RgbImage(canvas.height, canvas.width, 3);
    const Rgb bg = background_color(rng);
    for (int y = 0; y < canvas.height; ++y)
        for (int x = 0; x < canvas.width; ++x) set_rgb(pair.background, x, y, bg);

    const Rgb family = hair_family(rng);
    static const braid::Kind kinds[] = {braid::Kind::fishtail, braid::Kind::rope, braid::Kind::three_strand,
                                        braid::Kind::four_strand, braid::Kind::five_strand};
    const braid::Kind kind = kinds[uniform_int(rng, 0, 4)];
    const double y0 = canvas.height * uniform(rng, 0.1, 0.25);
    const double y1 = y0 + canvas.height * uniform(rng, 0.45, 0.65);
    const double cx = canvas.width * (0.5 + uniform(rng, -0.1, 0.1));
    const double a = std::max(4.0, canvas.width * uniform(rng, 0.06, 0.11));
    const double bend = canvas.width * uniform(rng, -0.06, 0.06);
    const double taper = uniform(rng, 0.7, 1.0);
    braid::BoundaryPair bp;
    for (int i = 0; i <= 16; ++i) {
        const double u = i / 16.0;
        const double y = y0 + (y1 - y0) * u;
        const double x = cx + bend * std::sin(kPi * u);
        const double half = a * (1.0 - (1.0 - taper) * u);
        bp.b0.push_back({x - half, y});
        bp.b1.push_back({x + half, y});
    }
    const double w = uniform(rng, 0.8, 2.2) * (uniform(rng, 0.0, 1.0) < 0.5 ? -1.0 : 1.0);
    std::vector<Rgb> palette;
    for (int k = 0; k < braid::strand_count(kind); ++k) palette.push_back(jitter(rng, family, 0.08));

    const braid::BraidSpec spec = braid::fit_braid_params(bp, kind, w);
    double length = 0.0;
    for (std::size_t i = 1; i < spec.center_x.size(); ++i)
        length += std::hypot(spec.center_x[i] - spec.center_x[i - 1], spec.center_y[i] - spec.center_y[i - 1]);
    const auto geom = braid::expand_tubes(braid::eval_centerlines(spec, std::clamp(static_cast<int>(4.0 * length), 256, 4096)));
    const auto render = braid::render_braid_sketch(geom, palette, canvas);

    BinaryMask region(canvas.height, canvas.width, 1, 0);
    for (std::size_t i = 0; i < region.size(); ++i) region.raw()[i] = render.strand_id.raw()[i] >= 0 ? 1 : 0;
    const Grid<float> outside = morph::distance_to(region);
    const Grid<float> inside = morph::distance_to(morph::invert(region));
    const double feather = std::max(1.5, uniform(rng, 4.0, 10.0) * scale);
    pair.matte = Matte(canvas.height, canvas.width, 1, 0.f);
    for (std::size_t i = 0; i < pair.matte.size(); ++i) {
        // Hair extends 1.5 px past the tube silhouette so edge strokes stay well inside.
        const double sd = (region.raw()[i] ? -static_cast<double>(inside.raw()[i]) + 0.5 : outside.raw()[i] - 0.5) - 1.5;
        pair.matte.raw()[i] = static_cast<float>(std::clamp(0.5 - sd / feather, 0.0, 1.0));
    }

    Rgb mean{};
    for (const auto& c : palette) mean = {mean.r + c.r, mean.g + c.g, mean.b + c.b};
    const float inv = 1.f / static_cast<float>(palette.size());
    mean = {mean.r * inv, mean.g * inv, mean.b * inv};

    const Grid<float> noise = filtered_noise(rng, canvas.height, canvas.width);
    RgbImage fg(canvas.height, canvas.width, 3, 0.f);
    const double r = std::max(1.0, geom.tube_radius);
    for (int y = 0; y < canvas.height; ++y)
        for (int x = 0; x < canvas.width; ++x) {
            const int id = render.strand_id.at(x, y);
            const Rgb c = id >= 0 ? palette[static_cast<std::size_t>(id)] : mean;
            const double rim = id >= 0 ? std::min(1.0, inside.at(x, y) / (0.5 * r)) : 0.0;
            const double shade = 0.7 + 0.3 * rim + 0.06 * noise.at(x, y);
            set_rgb(fg, x, y, {static_cast<float>(std::clamp(c.r * shade, 0.0, 1.0)),
                               static_cast<float>(std::clamp(c.g * shade, 0.0, 1.0)),
                               static_cast<float>(std::clamp(c.b * shade, 0.0, 1.0))});
        }

    pair.sketch = Sketch{braid::braid_edges_to_strokes(render), canvas};
    paint_footprints(fg, pair.sketch);
    pair.image = RgbImage(canvas.height, canvas.width, 3);
    composite(pair, fg);
    return pair;
}

}  // namespace

SamplePair synth_sample(Style style, Canvas canvas, std::uint64_t seed) {
    Rng rng(seed);
    SamplePair pair = style == Style::braided ? synth_braided(canvas, rng) : synth_unbraided(style, canvas, rng);
    // Ground-truth stroke colors are footprint means of the final image.
    pair.sketch = recolor_strokes_from_image(pair.sketch, pair.image, RecolorMode::mean);
    pair.meta = {style, seed};
    return pair;
}

namespace {

float bilinear(const Grid<float>& g, double x, double y, int c) {
    const int x0 = static_cast<int>(std::floor(x));
    const int y0 = static_cast<int>(std::floor(y));
    const double fx = x - x0;
    const double fy = y - y0;
    auto at = [&](int px, int py) -> double { return g.contains(px, py) ? g.at(px, py, c) : 0.0; };
    const double v = (1 - fx) * (1 - fy) * at(x0, y0) + fx * (1 - fy) * at(x0 + 1, y0) + (1 - fx) * fy * at(x0, y0 + 1) +
                     fx * fy * at(x0 + 1, y0 + 1);
    return static_cast<float>(v);
}

}  // namespace

SamplePair augment(const SamplePair& pair, const AugmentParams& params) {
    if (std::abs(params.rotate_deg) > 15.0) throw Error("invalid_argument", "rotation must lie within [-15, 15] degrees");
    if (params.is_identity()) return pair;
    const int h = pair.matte.height();
    const int w = pair.matte.width();
    const auto flip = [&](Point p) { return params.hflip ? Point{(w - 1) - p.x, p.y} : p; };

    double mass = 0.0, mx = 0.0, my = 0.0;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const double a = pair.matte.at(x, y);
            mass += a, mx += a * x, my += a * y;
        }
    const Point center = flip(mass > 0 ? Point{mx / mass, my / mass} : Point{(w - 1) / 2.0, (h - 1) / 2.0});
    const double th = params.rotate_deg * std::numbers::pi / 180.0;
    const double cs = std::cos(th), sn = std::sin(th);
    const Point shift{params.dx, params.dy};
    const auto forward = [&](Point p) {
        const Point q = flip(p) - center;
        return Point{cs * q.x - sn * q.y, sn * q.x + cs * q.y} + center + shift;
    };
    const auto inverse = [&](Point q) {
        const Point r = q - shift - center;
        return flip(Point{cs * r.x + sn * r.y, -sn * r.x + cs * r.y} + center);
    };

    // Premultiplied foreground so matte and color move together.
    RgbImage premul(h, w, 3);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int c = 0; c < 3; ++c)
                premul.at(x, y, c) = pair.image.at(x, y, c) - (1.f - pair.matte.at(x, y)) * pair.background.at(x, y, c);

    SamplePair out = pair;
    double new_mass = 0.0;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const Point src = inverse({double(x), double(y)});
            const float a = std::clamp(bilinear(pair.matte, src.x, src.y, 0), 0.f, 1.f);
            out.matte.at(x, y) = a;
            new_mass += a;
            for (int c = 0; c < 3; ++c)
                out.image.at(x, y, c) =
                    std::clamp(bilinear(premul, src.x, src.y, c) + (1.f - a) * pair.background.at(x, y, c), 0.f, 1.f);
        }
    if (mass > 0 && new_mass < 0.5 * mass) throw Error("augment_offcanvas", "transform moves over half of the matte off-canvas");
    for (auto& s : out.sketch.strokes)
        for (auto& p : s.points) p = forward(p);
    out.sketch = clamped(std::move(out.sketch));
    return out;
}

AugmentParams sample_augment(Rng& rng, Canvas canvas) {
    const double t = 32.0 * std::min(canvas.width, canvas.height) / 512.0;
    AugmentParams p;
    p.dx = uniform(rng, -t, t);
    p.dy = uniform(rng, -t, t);
    p.rotate_deg = uniform(rng, -15.0, 15.0);
    p.hflip = uniform(rng, 0.0, 1.0) < 0.5;
    return p;
}

RgbImage noise_fill_background(const RgbImage& background, const Matte& matte, std::uint64_t seed) {
    const Grid<float> dist = morph::distance_to(matte_to_mask(matte));
    RgbImage out = background;
    Rng rng(seed);
    std::normal_distribution<float> n01(0.f, 1.f);
    for (int y = 0; y < out.height(); ++y)
        for (int x = 0; x < out.width(); ++x)
            if (dist.at(x, y) <= 3.f)
                for (int c = 0; c < 3; ++c) out.at(x, y, c) = n01(rng);
    return out;
}

TrainingBatch make_training_batch(const std::vector<SamplePair>& pairs, std::uint64_t seed, const BatchOptions& options) {
    TrainingBatch batch;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        SamplePair pair = pairs[i];
        if (options.augment) {
            Rng rng(derive_seed(seed, i, 0));
            try {
                pair = augment(pair, sample_augment(rng, pair.sketch.canvas));
            } catch (const Error&) {
                // keep the untransformed pair
            }
        }
        Sketch hair = recolor_strokes_from_image(hair_only(pair.sketch), pair.image, RecolorMode::random_pixel,
                                                 derive_seed(seed, i, 2));
        Sketch mono = hair;
        if (options.nonhair) {
            int id = next_stroke_id(mono);
            for (auto s : generate_nonhair_strokes(pair.matte, derive_seed(seed, i, 1))) {
                s.id = id++;
                mono.strokes.push_back(std::move(s));
            }
        }
        const SketchMapMono sm = rasterize_mono(mono);
        Grid<float> smf(sm.height(), sm.width(), 1);
        for (std::size_t k = 0; k < sm.size(); ++k) smf.raw()[k] = sm.raw()[k];
        batch.sketch_mono.push_back(std::move(smf));
        batch.sketch_color.push_back(rasterize_color(hair));
        batch.matte.push_back(pair.matte);
        batch.image.push_back(pair.image);
        batch.background.push_back(pair.background);
        batch.styles.push_back(pair.meta.style);
    }
    return batch;
}

std::string sample_dir_name(std::size_t index) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "sample_%06zu", index);
    return buf;
}

void save_sample(const std::filesystem::path& dir, const SamplePair& pair) {
    std::filesystem::create_directories(dir);
    io::write_text(dir / "sketch.json", to_json(pair.sketch).dump(1) + "\n");
    io::write_png(dir / "matte.png", pair.matte);
    io::write_png(dir / "image.png", pair.image);
    io::write_png(dir / "background.png", pair.background);
    const nlohmann::json meta = {{"style", to_string(pair.meta.style)},
                                 {"seed", pair.meta.seed},
                                 {"canvas", {pair.sketch.canvas.height, pair.sketch.canvas.width}}};
    io::write_text(dir / "meta.json", meta.dump(1) + "\n");
}

SamplePair load_sample(const std::filesystem::path& dir) {
    SamplePair pair;
    pair.sketch = sketch_from_json(nlohmann::json::parse(io::read_text(dir / "sketch.json")));
    pair.matte = io::to_single_channel(io::read_png(dir / "matte.png"));
    pair.image = io::read_png(dir / "image.png");
    pair.background = io::read_png(dir / "background.png");
    if (std::filesystem::exists(dir / "meta.json")) {
        const auto meta = nlohmann::json::parse(io::read_text(dir / "meta.json"));
        pair.meta.style = style_from_string(meta.value("style", std::string("straight")));
        pair.meta.seed = meta.value("seed", std::uint64_t{0});
    }
    if (pair.image.channels() != 3 || pair.background.channels() != 3 || !(pair.matte.canvas() == pair.sketch.canvas))
        throw Error("invalid_sample", "sample files in " + dir.string() + " have inconsistent shapes");
    return pair;
}

std::vector<SamplePair> load_dataset(const std::filesystem::path& root) {
    std::vector<std::filesystem::path> dirs;
    for (const auto& e : std::filesystem::directory_iterator(root))
        if (e.is_directory() && e.path().filename().string().rfind("sample_", 0) == 0) dirs.push_back(e.path());
    std::sort(dirs.begin(), dirs.end());
    std::vector<SamplePair> out;
    for (const auto& d : dirs) out.push_back(load_sample(d));
    return out;
}

void generate_dataset(const std::filesystem::path& root, std::size_t count, std::uint64_t seed, Canvas canvas,
                      const std::vector<Style>& styles, int workers) {
    if (styles.empty()) throw Error("invalid_argument", "at least one style is required");
    std::filesystem::create_directories(root);
    const int n_workers = std::max(1, workers);
    auto job = [&](int worker) {
        for (std::size_t i = static_cast<std::size_t>(worker); i < count; i += static_cast<std::size_t>(n_workers)) {
            const Style style = styles[i % styles.size()];
            save_sample(root / sample_dir_name(i), synth_sample(style, canvas, derive_seed(seed, i)));
        }
    };
    if (n_workers == 1) {
        job(0);
        return;
    }
    std::vector<std::thread> pool;
    for (int k = 0; k < n_workers; ++k) pool.emplace_back(job, k);
    for (auto& t : pool) t.join();
}

}  // namespace hs
