#include <doctest.h>

#include <filesystem>
#include <set>

#include "fixtures.hpp"
#include "hairsalon/color_retrieval.hpp"
#include "hairsalon/data_synth.hpp"

using namespace hs;
using namespace hs::color;

namespace {

std::vector<Neighbor> brute_knn(const ColorDatabase& db, Rgb q, int k) {
    const Lab lq = rgb_to_lab(q);
    std::vector<Neighbor> all;
    for (std::size_t i = 0; i < db.size(); ++i) {
        const Lab& l = db.entries()[i].lab;
        all.push_back({i, std::sqrt((l.l - lq.l) * (l.l - lq.l) + (l.a - lq.a) * (l.a - lq.a) + (l.b - lq.b) * (l.b - lq.b)),
                       db.entries()[i].rgb});
    }
    std::sort(all.begin(), all.end(), [](const Neighbor& a, const Neighbor& b) {
        return a.distance != b.distance ? a.distance < b.distance : a.index < b.index;
    });
    all.resize(std::min<std::size_t>(all.size(), static_cast<std::size_t>(k)));
    return all;
}

Rgb random_rgb(Rng& rng) {
    return {static_cast<float>(uniform(rng, 0, 1)), static_cast<float>(uniform(rng, 0, 1)), static_cast<float>(uniform(rng, 0, 1))};
}

}  // namespace

TEST_CASE("lab reference values") {
    const Lab w = rgb_to_lab({1, 1, 1});
    CHECK(std::abs(w.l - 100) <= 0.01);
    CHECK(std::abs(w.a) <= 0.01);
    CHECK(std::abs(w.b) <= 0.01);
    const Lab k = rgb_to_lab({0, 0, 0});
    CHECK(std::abs(k.l) <= 0.01);
    CHECK(std::abs(k.a) <= 0.01);
    CHECK(std::abs(k.b) <= 0.01);
    const Lab r = rgb_to_lab({1, 0, 0});
    CHECK(std::abs(r.l - 53.2406) <= 0.1);
    CHECK(std::abs(r.a - 80.0923) <= 0.1);
    CHECK(std::abs(r.b - 67.2028) <= 0.1);
}

TEST_CASE("lab round trip on a grid") {
    double worst = 0;
    for (int i = 0; i < 10; ++i)
        for (int j = 0; j < 10; ++j)
            for (int k = 0; k < 10; ++k) {
                const Rgb c{i / 9.f, j / 9.f, k / 9.f};
                worst = std::max(worst, delta_e(rgb_to_lab(c), rgb_to_lab(lab_to_rgb(rgb_to_lab(c)))));
            }
    CHECK(worst <= 0.05);
}

TEST_CASE("knn equals exhaustive sort") {
    Rng rng(21);
    for (int trial = 0; trial < 3; ++trial) {
        std::vector<Rgb> colors;
        for (int i = 0; i < 1000; ++i) colors.push_back(random_rgb(rng));
        for (int i = 0; i < 50; ++i) colors.push_back(colors[static_cast<std::size_t>(uniform_int(rng, 0, 999))]);
        const ColorDatabase db(colors);
        for (int q = 0; q < 100; ++q) {
            const Rgb query = q % 4 == 0 ? colors[static_cast<std::size_t>(uniform_int(rng, 0, 1049))] : random_rgb(rng);
            const auto fast = nearest_colors(db, query, 20);
            const auto slow = brute_knn(db, query, 20);
            REQUIRE(fast.size() == slow.size());
            for (std::size_t i = 0; i < fast.size(); ++i) {
                REQUIRE(fast[i].index == slow[i].index);
                REQUIRE(fast[i].distance == slow[i].distance);
            }
        }
    }
}

TEST_CASE("knn edge cases") {
    const ColorDatabase db(std::vector<Rgb>{{0.1f, 0.2f, 0.3f}, {0.5f, 0.5f, 0.5f}, {0.1f, 0.2f, 0.3f}});
    const auto exact = nearest_colors(db, {0.5f, 0.5f, 0.5f}, 1);
    REQUIRE(exact.size() == 1);
    CHECK(exact[0].index == 1);
    CHECK(exact[0].distance == 0.0);
    const auto all = nearest_colors(db, {0.1f, 0.2f, 0.3f}, 50);
    REQUIRE(all.size() == 3);
    CHECK(all[0].index == 0);
    CHECK(all[1].index == 2);
}

TEST_CASE("snap color") {
    const ColorDatabase one(std::vector<Rgb>{{0.3f, 0.2f, 0.1f}});
    for (std::uint64_t s = 0; s < 5; ++s) CHECK(snap_color(one, {0.9f, 0.9f, 0.9f}, s) == Rgb{0.3f, 0.2f, 0.1f});
    Rng rng(22);
    std::vector<Rgb> colors;
    for (int i = 0; i < 1000; ++i) colors.push_back(random_rgb(rng));
    const ColorDatabase db(colors);
    const Rgb q{0.4f, 0.3f, 0.2f};
    const auto top = nearest_colors(db, q, 20);
    std::set<std::size_t> seen;
    for (std::uint64_t s = 0; s < 20; ++s) {
        const Rgb c = snap_color(db, q, s);
        const auto it = std::find_if(top.begin(), top.end(), [&](const Neighbor& n) { return n.rgb == c; });
        REQUIRE(it != top.end());
        CHECK(delta_e(rgb_to_lab(c), rgb_to_lab(q)) <= top.back().distance + 1e-12);
        seen.insert(it->index);
    }
    CHECK(seen.size() >= 2);
}

TEST_CASE("database build and persistence") {
    SamplePair pair;
    pair.sketch.canvas = {32, 32};
    pair.sketch.strokes.push_back(fixtures::stroke(0, {{5, 5}, {5, 25}}));
    pair.sketch.strokes.push_back(fixtures::stroke(1, {{15, 5}, {15, 25}}));
    pair.sketch.strokes.push_back(fixtures::stroke(2, {{25, 5}, {25, 25}}, 3.f, {}, StrokeKind::non_hair));
    pair.image = RgbImage(32, 32, 3, 0.25f);
    pair.matte = Matte(32, 32, 1, 1.f);
    pair.background = RgbImage(32, 32, 3, 0.f);
    const auto db = build_database({pair, pair, pair});
    CHECK(db.size() == 6);
    for (const auto& e : db.entries()) CHECK(e.rgb == Rgb{0.25f, 0.25f, 0.25f});

    const auto sample = synth_sample(Style::wavy, {96, 96}, 5);
    const auto db2 = build_database({sample});
    const auto ref = recolor_strokes_from_image(sample.sketch, sample.image, RecolorMode::mean);
    REQUIRE(db2.size() == ref.hair_count());
    for (std::size_t i = 0; i < db2.size(); ++i) CHECK(db2.entries()[i].rgb == ref.strokes[i].color);

    const auto path = std::filesystem::temp_directory_path() / "hs_colordb_test.jsonl";
    db2.save(path);
    const auto back = ColorDatabase::load(path);
    REQUIRE(back.size() == db2.size());
    for (std::size_t i = 0; i < back.size(); ++i) {
        CHECK(back.entries()[i].rgb == db2.entries()[i].rgb);
        CHECK(back.entries()[i].lab.l == doctest::Approx(db2.entries()[i].lab.l));
    }
    std::filesystem::remove(path);
}
