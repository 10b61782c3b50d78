#include "hairsalon/color_retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <queue>

#include <json.hpp>

#include "hairsalon/data_synth.hpp"
#include "hairsalon/errors.hpp"
#include "hairsalon/random.hpp"

namespace hs::color {
namespace {

// Linear sRGB -> XYZ (D65). The white point is the image of (1, 1, 1) so white maps
// to a* = b* = 0 exactly.
constexpr double kM[3][3] = {{0.4124564, 0.3575761, 0.1804375},
                             {0.2126729, 0.7151522, 0.0721750},
                             {0.0193339, 0.1191920, 0.9503041}};
constexpr double kMinv[3][3] = {{3.2404542, -1.5371385, -0.4985314},
                                {-0.9692660, 1.8760108, 0.0415560},
                                {0.0556434, -0.2040259, 1.0572252}};
constexpr double kWhite[3] = {kM[0][0] + kM[0][1] + kM[0][2], kM[1][0] + kM[1][1] + kM[1][2],
                              kM[2][0] + kM[2][1] + kM[2][2]};
constexpr double kEpsilon = 216.0 / 24389.0;
constexpr double kKappa = 24389.0 / 27.0;

double to_linear(double c) { return c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4); }
double to_gamma(double c) { return c <= 0.0031308 ? 12.92 * c : 1.055 * std::pow(c, 1.0 / 2.4) - 0.055; }
double f_lab(double t) { return t > kEpsilon ? std::cbrt(t) : (kKappa * t + 16.0) / 116.0; }
double f_lab_inv(double f) {
    const double f3 = f * f * f;
    return f3 > kEpsilon ? f3 : (116.0 * f - 16.0) / kKappa;
}

}  // namespace

Lab rgb_to_lab(Rgb rgb) {
    const double lin[3] = {to_linear(rgb.r), to_linear(rgb.g), to_linear(rgb.b)};
    double f[3];
    for (int i = 0; i < 3; ++i) f[i] = f_lab((kM[i][0] * lin[0] + kM[i][1] * lin[1] + kM[i][2] * lin[2]) / kWhite[i]);
    return {116.0 * f[1] - 16.0, 500.0 * (f[0] - f[1]), 200.0 * (f[1] - f[2])};
}

Rgb lab_to_rgb(Lab lab) {
    const double fy = (lab.l + 16.0) / 116.0;
    const double fx = fy + lab.a / 500.0;
    const double fz = fy - lab.b / 200.0;
    const double xyz[3] = {f_lab_inv(fx) * kWhite[0], f_lab_inv(fy) * kWhite[1], f_lab_inv(fz) * kWhite[2]};
    double rgb[3];
    for (int i = 0; i < 3; ++i)
        rgb[i] = to_gamma(kMinv[i][0] * xyz[0] + kMinv[i][1] * xyz[1] + kMinv[i][2] * xyz[2]);
    return {static_cast<float>(rgb[0]), static_cast<float>(rgb[1]), static_cast<float>(rgb[2])};
}

double delta_e(Lab p, Lab q) { return std::sqrt((p.l - q.l) * (p.l - q.l) + (p.a - q.a) * (p.a - q.a) + (p.b - q.b) * (p.b - q.b)); }

ColorDatabase::ColorDatabase(const std::vector<Rgb>& colors) {
    for (const auto& c : colors) add(c);
}

void ColorDatabase::add(Rgb rgb) { entries_.push_back({rgb, rgb_to_lab(rgb)}); }

void ColorDatabase::save(const std::filesystem::path& path) const {
    std::ofstream f(path);
    if (!f) throw Error("io_error", "cannot write " + path.string());
    for (const auto& e : entries_)
        f << nlohmann::json{{"rgb", {e.rgb.r, e.rgb.g, e.rgb.b}}, {"lab", {e.lab.l, e.lab.a, e.lab.b}}}.dump() << '\n';
}

ColorDatabase ColorDatabase::load(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw Error("io_error", "cannot read " + path.string());
    ColorDatabase db;
    std::string line;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        const auto js = nlohmann::json::parse(line);
        const auto& c = js.at("rgb");
        const Rgb rgb{c.at(0).get<float>(), c.at(1).get<float>(), c.at(2).get<float>()};
        Lab lab = rgb_to_lab(rgb);
        if (js.contains("lab")) {
            const auto& l = js.at("lab");
            lab = {l.at(0).get<double>(), l.at(1).get<double>(), l.at(2).get<double>()};
        }
        db.entries_.push_back({rgb, lab});
    }
    return db;
}

ColorDatabase build_database(const std::vector<SamplePair>& dataset) {
    ColorDatabase db;
    for (const auto& pair : dataset) {
        const Sketch colored = recolor_strokes_from_image(pair.sketch, pair.image, RecolorMode::mean);
        for (const auto& s : colored.strokes)
            if (s.kind == StrokeKind::hair && !stroke_footprint(s, colored.canvas).empty()) db.add(s.color);
    }
    return db;
}

std::vector<Neighbor> nearest_colors(const ColorDatabase& db, Rgb query, int k) {
    if (db.empty()) throw Error("empty_database", "color database is empty");
    if (k < 1) throw Error("invalid_argument", "k must be >= 1");
    const Lab q = rgb_to_lab(query);
    // Max-heap on (distance, index) keeps the k best seen so far.
    using Item = std::pair<double, std::size_t>;
    std::priority_queue<Item> heap;
    const auto& entries = db.entries();
    const std::size_t limit = std::min<std::size_t>(static_cast<std::size_t>(k), entries.size());
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const Item item{delta_e(q, entries[i].lab), i};
        if (heap.size() < limit) {
            heap.push(item);
        } else if (item < heap.top()) {
            heap.pop();
            heap.push(item);
        }
    }
    std::vector<Neighbor> out(heap.size());
    for (std::size_t i = out.size(); i-- > 0;) {
        const auto [d, idx] = heap.top();
        heap.pop();
        out[i] = {idx, d, entries[idx].rgb};
    }
    return out;
}

Rgb snap_color(const ColorDatabase& db, Rgb query, std::uint64_t seed, int k) {
    const auto top = nearest_colors(db, query, k);
    Rng rng(seed);
    return top[std::uniform_int_distribution<std::size_t>(0, top.size() - 1)(rng)].rgb;
}

}  // namespace hs::color
