#include "hairsalon/braid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "hairsalon/errors.hpp"
#include "hairsalon/morphology.hpp"

namespace hs::braid {

Kind kind_from_string(const std::string& name) {
    if (name == "fishtail") return Kind::fishtail;
    if (name == "rope") return Kind::rope;
    if (name == "three_strand") return Kind::three_strand;
    if (name == "four_strand") return Kind::four_strand;
    if (name == "five_strand") return Kind::five_strand;
    throw Error("invalid_argument", "unknown braid kind '" + name + "'");
}

std::string to_string(Kind kind) {
    switch (kind) {
        case Kind::fishtail: return "fishtail";
        case Kind::rope: return "rope";
        case Kind::three_strand: return "three_strand";
        case Kind::four_strand: return "four_strand";
        case Kind::five_strand: return "five_strand";
    }
    return "three_strand";
}

int strand_count(Kind kind) {
    switch (kind) {
        case Kind::fishtail:
        case Kind::rope: return 2;
        case Kind::three_strand: return 3;
        case Kind::four_strand: return 4;
        case Kind::five_strand: return 5;
    }
    return 3;
}

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

Polyline resample(const Polyline& line, int n) {
    std::vector<double> cum(line.size(), 0.0);
    for (std::size_t i = 1; i < line.size(); ++i)
        cum[i] = cum[i - 1] + std::hypot(line[i].x - line[i - 1].x, line[i].y - line[i - 1].y);
    const double total = cum.back();
    if (total <= 0.0) throw Error("degenerate_braid", "boundary stroke has zero length");
    Polyline out(static_cast<std::size_t>(n));
    std::size_t seg = 0;
    for (int i = 0; i < n; ++i) {
        const double s = total * i / (n - 1);
        while (seg + 2 < line.size() && cum[seg + 1] < s) ++seg;
        const double len = cum[seg + 1] - cum[seg];
        const double u = len > 0 ? std::clamp((s - cum[seg]) / len, 0.0, 1.0) : 0.0;
        out[static_cast<std::size_t>(i)] = line[seg] + (line[seg + 1] - line[seg]) * u;
    }
    return out;
}

double cross(Point a, Point b) { return a.x * b.y - a.y * b.x; }

bool segments_cross(Point p1, Point p2, Point q1, Point q2) {
    const double d1 = cross(q2 - q1, p1 - q1);
    const double d2 = cross(q2 - q1, p2 - q1);
    const double d3 = cross(p2 - p1, q1 - p1);
    const double d4 = cross(p2 - p1, q2 - p1);
    return ((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0)) && d1 != 0 && d2 != 0 && d3 != 0 && d4 != 0;
}

double dist(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

// Depth profile of a strand as a function of its knot phase.
double depth_profile(Kind kind, double theta) {
    switch (kind) {
        case Kind::three_strand:
        case Kind::five_strand: return std::sin(2.0 * theta);
        // sin(2θ) alone makes strands half a turn apart collide where their lateral
        // offsets meet; the cos term separates them.
        case Kind::four_strand: return std::sin(2.0 * theta) + 0.5 * std::cos(theta);
        case Kind::rope:
        case Kind::fishtail: return std::cos(theta);
    }
    return 0.0;
}

struct Sampled {
    double a, cx, cy;
    Point n;
};

Sampled sample_spec(const BraidSpec& spec, double t) {
    const int last = static_cast<int>(spec.half_width.size()) - 1;
    const double f = spec.t_max > 0 ? std::clamp(t / spec.t_max, 0.0, 1.0) * last : 0.0;
    const int i0 = std::min(static_cast<int>(std::floor(f)), last);
    const int i1 = std::min(i0 + 1, last);
    const double u = f - i0;
    auto lerp = [&](const std::vector<double>& v) { return v[i0] + (v[i1] - v[i0]) * u; };
    Point n = spec.normal[i0] + (spec.normal[i1] - spec.normal[i0]) * u;
    const double len = std::hypot(n.x, n.y);
    if (len > 0) n = n * (1.0 / len);
    return {lerp(spec.half_width), lerp(spec.center_x), lerp(spec.center_y), n};
}

}  // namespace

BraidSpec fit_braid_params(const BoundaryPair& boundaries, Kind kind, double w) {
    if (boundaries.b0.size() < 2 || boundaries.b1.size() < 2)
        throw Error("invalid_argument", "each boundary needs at least two points");
    if (w == 0.0 || !std::isfinite(w)) throw Error("invalid_argument", "w must be finite and nonzero");
    const int n = BraidSpec::kSamples;
    Polyline b0 = resample(boundaries.b0, n);
    Polyline b1 = resample(boundaries.b1, n);

    // Run both boundaries the same way, then canonically top-to-bottom, so the fitted BraidSpec is
    // independent of drawing direction and of which boundary is called b0.
    if (dist(b0.front(), b1.front()) + dist(b0.back(), b1.back()) >
        dist(b0.front(), b1.back()) + dist(b0.back(), b1.front()))
        std::reverse(b1.begin(), b1.end());
    const Point start = (b0.front() + b1.front()) * 0.5;
    const Point end = (b0.back() + b1.back()) * 0.5;
    if (start.y > end.y || (start.y == end.y && start.x > end.x)) {
        std::reverse(b0.begin(), b0.end());
        std::reverse(b1.begin(), b1.end());
    }

    for (int i = 0; i + 1 < n; ++i)
        for (int j = 0; j + 1 < n; ++j)
            if (segments_cross(b0[i], b0[i + 1], b1[j], b1[j + 1]))
                throw Error("degenerate_braid", "boundary strokes intersect");

    BraidSpec spec;
    spec.kind = kind;
    spec.w = w;
    spec.n_strands = strand_count(kind);
    for (int k = 0; k < spec.n_strands; ++k) spec.phases.push_back(kTwoPi * k / spec.n_strands);
    spec.half_width.resize(n);
    spec.center_x.resize(n);
    spec.center_y.resize(n);
    spec.normal.resize(n);
    double mean_y = 0.0;
    double mean_a = 0.0;
    for (int i = 0; i < n; ++i) {
        spec.center_x[i] = 0.5 * (b0[i].x + b1[i].x);
        spec.center_y[i] = 0.5 * (b0[i].y + b1[i].y);
        spec.half_width[i] = 0.5 * dist(b0[i], b1[i]);
        if (spec.half_width[i] < 2.0) throw Error("degenerate_braid", "braid half-width below 2 px");
        mean_y += spec.center_y[i];
        mean_a += spec.half_width[i];
    }
    mean_y /= n;
    mean_a /= n;
    double length = 0.0;
    for (int i = 0; i < n; ++i) {
        const int lo = std::max(0, i - 1);
        const int hi = std::min(n - 1, i + 1);
        Point tan{spec.center_x[hi] - spec.center_x[lo], spec.center_y[hi] - spec.center_y[lo]};
        const double len = std::hypot(tan.x, tan.y);
        if (len <= 0) throw Error("degenerate_braid", "braid axis has zero length");
        tan = tan * (1.0 / len);
        spec.normal[i] = {tan.y, -tan.x};
        if (i > 0) length += std::hypot(spec.center_x[i] - spec.center_x[i - 1], spec.center_y[i] - spec.center_y[i - 1]);
    }
    spec.t_max = std::abs(mean_y);
    if (spec.t_max <= 0.0) throw Error("degenerate_braid", "empty parameter range");
    spec.phase_rate = length / (mean_a * spec.t_max);
    spec.depth_amplitude = 0.6 * mean_a;
    return spec;
}

Point3 point_at_phase(const BraidSpec& spec, double t, double theta) {
    const Sampled s = sample_spec(spec, t);
    double a = s.a;
    if (spec.kind == Kind::fishtail) a *= 0.5 + 0.5 * std::abs(std::cos(spec.w * spec.phase_rate * t));
    const double offset = a * std::sin(theta);
    // Negative w is the mirror image of |w|: lateral offset flips, depth does not.
    const double depth_phase = spec.w < 0 ? -theta : theta;
    return {s.cx + s.n.x * offset, s.cy + s.n.y * offset, spec.depth_amplitude * depth_profile(spec.kind, depth_phase)};
}

Point3 strand_point(const BraidSpec& spec, int strand, double t) {
    return point_at_phase(spec, t, spec.w * spec.phase_rate * t + spec.phases.at(static_cast<std::size_t>(strand)));
}

BraidGeometry eval_centerlines(const BraidSpec& spec, int samples_per_strand) {
    if (samples_per_strand < 64) throw Error("invalid_argument", "samples_per_strand must be >= 64");
    BraidGeometry geom;
    geom.centerlines.resize(static_cast<std::size_t>(spec.n_strands));
    for (int k = 0; k < spec.n_strands; ++k) {
        auto& line = geom.centerlines[static_cast<std::size_t>(k)];
        line.reserve(static_cast<std::size_t>(samples_per_strand));
        for (int j = 0; j < samples_per_strand; ++j)
            line.push_back(strand_point(spec, k, spec.t_max * j / (samples_per_strand - 1)));
    }
    return geom;
}

double min_interstrand_distance(const BraidGeometry& geom) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < geom.centerlines.size(); ++i)
        for (std::size_t j = i + 1; j < geom.centerlines.size(); ++j)
            for (const auto& p : geom.centerlines[i])
                for (const auto& q : geom.centerlines[j]) {
                    const double dx = p.x - q.x, dy = p.y - q.y, dz = p.z - q.z;
                    best = std::min(best, dx * dx + dy * dy + dz * dz);
                }
    return std::sqrt(best);
}

BraidGeometry expand_tubes(BraidGeometry geom) {
    if (geom.centerlines.size() < 2) throw Error("invalid_argument", "tube expansion needs at least two strands");
    const double gap = min_interstrand_distance(geom);
    if (!(gap > 1e-6)) throw Error("degenerate_braid", "strand center-lines coincide");
    auto penetration_free = [&](double r) { return gap >= 2.0 * r; };
    double lo = 0.0;
    double hi = 1.0;
    while (penetration_free(hi)) hi *= 2.0;
    for (int it = 0; it < 8 || hi - lo > 0.25; ++it) {
        const double mid = 0.5 * (lo + hi);
        (penetration_free(mid) ? lo : hi) = mid;
    }
    geom.tube_radius = lo;
    return geom;
}

int count_projected_crossings(const BraidGeometry& geom) {
    const auto& lines = geom.centerlines;
    if (lines.size() < 2) return 0;
    const std::size_t n = lines.front().size();
    std::vector<Point> axis(n);
    for (std::size_t s = 0; s < n; ++s) {
        Point c{};
        for (const auto& l : lines) c = c + Point{l[s].x, l[s].y};
        axis[s] = c * (1.0 / static_cast<double>(lines.size()));
    }
    int count = 0;
    for (std::size_t i = 0; i < lines.size(); ++i)
        for (std::size_t j = i + 1; j < lines.size(); ++j) {
            int last = 0;
            for (std::size_t s = 0; s < n; ++s) {
                const std::size_t lo = s > 0 ? s - 1 : s;
                const std::size_t hi = s + 1 < n ? s + 1 : s;
                const Point tan = axis[hi] - axis[lo];
                const Point normal{tan.y, -tan.x};
                const double d = dot(Point{lines[i][s].x - lines[j][s].x, lines[i][s].y - lines[j][s].y}, normal);
                const int sign = d > 0 ? 1 : (d < 0 ? -1 : 0);
                if (sign != 0) {
                    if (last != 0 && sign != last) ++count;
                    last = sign;
                }
            }
        }
    return count;
}

std::vector<Disc> splat_discs(const BraidGeometry& geom) {
    std::vector<Disc> discs;
    for (std::size_t k = 0; k < geom.centerlines.size(); ++k) {
        const auto& line = geom.centerlines[k];
        for (std::size_t s = 0; s + 1 < line.size(); ++s) {
            const Point3& p = line[s];
            const Point3& q = line[s + 1];
            const int m = std::max(1, static_cast<int>(std::ceil(std::hypot(q.x - p.x, q.y - p.y) / 0.5)));
            for (int i = 0; i < m; ++i) {
                const double u = static_cast<double>(i) / m;
                discs.push_back({p.x + (q.x - p.x) * u, p.y + (q.y - p.y) * u, p.z + (q.z - p.z) * u, static_cast<int>(k)});
            }
        }
        if (!line.empty()) discs.push_back({line.back().x, line.back().y, line.back().z, static_cast<int>(k)});
    }
    return discs;
}

BinaryMask end_zone(const BraidGeometry& geom, Canvas canvas) {
    BinaryMask zone(canvas.height, canvas.width, 1, 0);
    const auto& lines = geom.centerlines;
    if (lines.empty() || lines.front().size() < 2) return zone;
    const std::size_t n = lines.front().size();
    auto axis = [&](std::size_t s) {
        Point c{};
        for (const auto& l : lines) c = c + Point{l[s].x, l[s].y};
        return c * (1.0 / static_cast<double>(lines.size()));
    };
    const std::size_t k = std::min<std::size_t>(4, n - 1);
    const Point a0 = axis(0);
    const Point d0 = axis(k) - a0;
    const Point a1 = axis(n - 1);
    const Point d1 = a1 - axis(n - 1 - k);
    for (int y = 0; y < canvas.height; ++y)
        for (int x = 0; x < canvas.width; ++x) {
            const Point p{double(x), double(y)};
            if (dot(p - a0, d0) < 0 || dot(p - a1, d1) > 0) zone.at(x, y) = 1;
        }
    return zone;
}

BraidRender render_braid_sketch(const BraidGeometry& geom, const std::vector<Rgb>& palette, Canvas canvas) {
    if (palette.size() != geom.centerlines.size())
        throw Error("invalid_argument", "palette size must equal the strand count");
    const float neg_inf = -std::numeric_limits<float>::infinity();
    BraidRender out{RgbImage(canvas.height, canvas.width, 3, 0.f), Grid<std::int32_t>(canvas.height, canvas.width, 1, -1),
                    Grid<float>(canvas.height, canvas.width, 1, neg_inf), Grid<std::int32_t>(canvas.height, canvas.width, 1, -1)};
    const BinaryMask zone = end_zone(geom, canvas);
    const double r = geom.tube_radius;
    const double r2 = r * r;
    for (const auto& d : splat_discs(geom)) {
        const int x0 = std::max(0, static_cast<int>(std::floor(d.x - r)));
        const int x1 = std::min(canvas.width - 1, static_cast<int>(std::ceil(d.x + r)));
        const int y0 = std::max(0, static_cast<int>(std::floor(d.y - r)));
        const int y1 = std::min(canvas.height - 1, static_cast<int>(std::ceil(d.y + r)));
        const float z = static_cast<float>(d.z);
        for (int y = y0; y <= y1; ++y)
            for (int x = x0; x <= x1; ++x) {
                if ((x - d.x) * (x - d.x) + (y - d.y) * (y - d.y) > r2 || zone.at(x, y)) continue;
                if (z > out.depth.at(x, y)) {
                    out.depth.at(x, y) = z;
                    out.strand_id.at(x, y) = d.strand;
                }
            }
    }
    constexpr int off[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
    for (int y = 0; y < canvas.height; ++y)
        for (int x = 0; x < canvas.width; ++x) {
            const int id = out.strand_id.at(x, y);
            if (id < 0) continue;
            bool edge = false;
            for (const auto& o : off) {
                const int nx = x + o[0];
                const int ny = y + o[1];
                if (!out.strand_id.contains(nx, ny)) continue;
                const int nid = out.strand_id.at(nx, ny);
                if (nid < 0 ? !zone.at(nx, ny) : (nid != id && out.depth.at(x, y) > out.depth.at(nx, ny))) {
                    edge = true;
                    break;
                }
            }
            if (!edge) continue;
            out.edge_strand.at(x, y) = id;
            set_rgb(out.edges, x, y, palette[static_cast<std::size_t>(id)]);
        }
    return out;
}

std::vector<Stroke> braid_edges_to_strokes(const BraidRender& render) {
    const int h = render.edge_strand.height();
    const int w = render.edge_strand.width();
    int max_id = -1;
    for (auto v : render.edge_strand.raw()) max_id = std::max(max_id, v);
    std::vector<Stroke> strokes;
    for (int k = 0; k <= max_id; ++k) {
        BinaryMask mask(h, w, 1, 0);
        for (std::size_t i = 0; i < mask.size(); ++i) mask.raw()[i] = render.edge_strand.raw()[i] == k ? 1 : 0;
        for (const auto& chain : morph::trace_chains(morph::thin(mask))) {
            if (chain.size() < 2) continue;
            Stroke s;
            s.id = static_cast<int>(strokes.size());
            s.points = morph::simplify(morph::to_polyline(chain, w), 0.5);
            s.width = 2.f;
            s.kind = StrokeKind::hair;
            s.color = pixel_rgb(render.edges, chain.front() % w, chain.front() / w);
            strokes.push_back(std::move(s));
        }
    }
    return strokes;
}

Sketch complete_braid(const BoundaryPair& boundaries, Kind kind, double w, const std::vector<Rgb>& palette,
                      Canvas canvas) {
    const BraidSpec spec = fit_braid_params(boundaries, kind, w);
    if (palette.size() != static_cast<std::size_t>(spec.n_strands))
        throw Error("invalid_argument", "palette size must equal the strand count");
    double length = 0.0;
    for (std::size_t i = 1; i < spec.center_x.size(); ++i)
        length += std::hypot(spec.center_x[i] - spec.center_x[i - 1], spec.center_y[i] - spec.center_y[i - 1]);
    const int samples = std::clamp(static_cast<int>(4.0 * length), 256, 4096);
    const BraidGeometry geom = expand_tubes(eval_centerlines(spec, samples));
    const BraidRender render = render_braid_sketch(geom, palette, canvas);
    Sketch sk{braid_edges_to_strokes(render), canvas};
    for (auto& s : sk.strokes) s.generated = true;
    return sk;
}

}  // namespace hs::braid
