#include <doctest.h>

#include "fixtures.hpp"
#include "hairsalon/errors.hpp"
#include "hairsalon/matte_ops.hpp"
#include "hairsalon/morphology.hpp"
#include "hairsalon/stroke_diffusion.hpp"

using namespace hs;
using namespace hs::diffusion;
using fixtures::stroke;

TEST_CASE("dense strokes leave an empty map") {
    Sketch s;
    s.canvas = {64, 64};
    for (int k = 0; k < 6; ++k) s.strokes.push_back(stroke(k, {{5.0 + 10 * k, 5}, {5.0 + 10 * k, 58}}));
    const auto mask = matte_to_mask(fixtures::disc(s.canvas, 32, 32, 25));
    CHECK(count_nonzero(build_subtracted_map(s, mask)) == 0);
    const Sketch out = autocomplete_unbraided(s, fixtures::disc(s.canvas, 32, 32, 25));
    CHECK(to_json(out) == to_json(s));
}

TEST_CASE("subtracted map keeps Chebyshev distance from strokes") {
    Sketch s;
    s.canvas = {200, 200};
    s.strokes.push_back(stroke(0, {{100, 60}, {100, 140}}));
    const auto mask = matte_to_mask(fixtures::disc(s.canvas, 100, 100, 90));
    const auto map = build_subtracted_map(s, mask);
    const auto fp = stroke_footprint(s.strokes[0], s.canvas);
    for (int y = 0; y < 200; ++y)
        for (int x = 0; x < 200; ++x) {
            if (!map.at(x, y)) continue;
            REQUIRE(mask.at(x, y));
            int cheb = 1 << 30;
            for (auto i : fp) cheb = std::min(cheb, std::max(std::abs(x - i % 200), std::abs(y - i / 200)));
            REQUIRE(cheb >= 8);
        }
}

TEST_CASE("single dot stroke area accounting") {
    Sketch s;
    s.canvas = {100, 100};
    s.strokes.push_back(stroke(0, {{50, 50}, {50, 50}}, 1.f));
    const auto mask = matte_to_mask(fixtures::disc(s.canvas, 50, 50, 40));
    const auto map = build_subtracted_map(s, mask);
    std::size_t inside = 0;
    for (int y = 43; y <= 57; ++y)
        for (int x = 43; x <= 57; ++x) inside += mask.at(x, y);
    CHECK(count_nonzero(map) == count_nonzero(mask) - inside);
}

TEST_CASE("missing hair strokes are rejected") {
    Sketch s;
    s.canvas = {32, 32};
    s.strokes.push_back(stroke(0, {{1, 1}, {9, 9}}, 3.f, {}, StrokeKind::non_hair));
    CHECK_THROWS_AS(build_subtracted_map(s, BinaryMask(32, 32, 1, 1)), Error);
    CHECK_THROWS_AS(autocomplete_unbraided(s, Matte(32, 32, 1, 1.f)), Error);
}

TEST_CASE("medial strokes") {
    SUBCASE("empty map") { CHECK(extract_medial_strokes(BinaryMask(40, 40, 1, 0)).empty()); }
    SUBCASE("rectangle follows its long center line") {
        BinaryMask m(60, 260, 1, 0);
        for (int y = 25; y < 35; ++y)
            for (int x = 30; x < 230; ++x) m.at(x, y) = 1;
        const auto strokes = extract_medial_strokes(m);
        REQUIRE(strokes.size() == 1);
        const double cy = 29.5;
        for (const auto& p : strokes[0].points) CHECK(std::abs(p.y - cy) <= 1.0);
        CHECK(strokes[0].width == 2.f);
        CHECK(strokes[0].generated);
        double span = strokes[0].points.back().x - strokes[0].points.front().x;
        CHECK(std::abs(span) > 150);
    }
    SUBCASE("small disc yields nothing") {
        const auto m = matte_to_mask(fixtures::disc({80, 80}, 40, 40, 15));
        CHECK(extract_medial_strokes(m).empty());
    }
}

TEST_CASE("autocomplete colors and containment") {
    const Canvas c{256, 256};
    const Matte matte = fixtures::ellipse(c, 128, 128, 90, 110);
    Sketch s;
    s.canvas = c;
    const Rgb pink{1.f, 0.5f, 0.75f};
    s.strokes.push_back(stroke(0, {{128, 40}, {120, 200}}, 3.f, pink));
    const Sketch out = autocomplete_unbraided(s, matte);
    REQUIRE(out.strokes.size() > 1);
    const auto mask = matte_to_mask(matte);
    const auto map = build_subtracted_map(s, mask);
    for (std::size_t k = 1; k < out.strokes.size(); ++k) {
        const auto& g = out.strokes[k];
        CHECK(g.generated);
        CHECK(g.color == pink);
        for (auto i : stroke_footprint(g, c)) REQUIRE(map.raw()[static_cast<std::size_t>(i)]);
    }
    CHECK_NOTHROW(validate(out));

    CompletionOptions fixed;
    fixed.policy = ColorPolicy::fixed;
    fixed.fixed_color = {0.f, 1.f, 0.f};
    const Sketch f = autocomplete_unbraided(s, matte, fixed);
    for (std::size_t k = 1; k < f.strokes.size(); ++k) CHECK(f.strokes[k].color == Rgb{0.f, 1.f, 0.f});
}

TEST_CASE("nearest user stroke decides the color") {
    const Canvas c{200, 300};
    Matte matte(200, 300, 1, 0.f);
    for (int y = 20; y < 180; ++y)
        for (int x = 20; x < 280; ++x) matte.at(x, y) = 1.f;
    Sketch s;
    s.canvas = c;
    s.strokes.push_back(stroke(0, {{40, 30}, {40, 170}}, 3.f, {1, 0, 0}));
    s.strokes.push_back(stroke(1, {{260, 30}, {260, 170}}, 3.f, {0, 0, 1}));
    const Sketch out = autocomplete_unbraided(s, matte);
    REQUIRE(out.strokes.size() > 2);
    for (std::size_t k = 2; k < out.strokes.size(); ++k) {
        const auto& g = out.strokes[k];
        const double mid = (g.points.front().x + g.points.back().x) / 2;
        if (mid < 100) CHECK(g.color == Rgb{1, 0, 0});
        if (mid > 200) CHECK(g.color == Rgb{0, 0, 1});
    }
}

TEST_CASE("autocomplete is idempotent and deterministic") {
    Rng rng(17);
    for (int trial = 0; trial < 4; ++trial) {
        const Canvas c{192, 192};
        const Matte matte = fixtures::ellipse(c, 96 + uniform(rng, -10, 10), 96, uniform(rng, 40, 80), uniform(rng, 50, 85));
        Sketch s;
        s.canvas = c;
        s.strokes.push_back(stroke(0, {{96, 30}, {96 + uniform(rng, -20, 20), 160}}, 3.f));
        const Sketch once = autocomplete_unbraided(s, matte);
        const Sketch twice = autocomplete_unbraided(once, matte);
        const double area = static_cast<double>(count_nonzero(matte_to_mask(matte)));
        std::size_t added_px = 0;
        for (std::size_t k = once.strokes.size(); k < twice.strokes.size(); ++k)
            added_px += stroke_footprint(twice.strokes[k], c).size();
        CHECK(static_cast<double>(added_px) <= 0.02 * area);
        CHECK(to_json(autocomplete_unbraided(s, matte)) == to_json(once));
    }
}
