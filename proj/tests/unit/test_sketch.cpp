#include <doctest.h>

#include "fixtures.hpp"
#include "hairsalon/errors.hpp"
#include "hairsalon/sketch.hpp"

using namespace hs;
using fixtures::stroke;

TEST_CASE("empty sketch rasterizes to zeros") {
    Sketch s;
    const auto m = rasterize_mono(s);
    CHECK(m.height() == 512);
    CHECK(m.width() == 512);
    CHECK(m.channels() == 1);
    CHECK(std::all_of(m.raw().begin(), m.raw().end(), [](std::int8_t v) { return v == 0; }));
}

TEST_CASE("mono footprint matches brute-force segment distance") {
    Sketch s;
    s.strokes.push_back(stroke(0, {{10, 10}, {10, 100}}, 3.f));
    const auto m = rasterize_mono(s);
    std::size_t expected = 0, got = 0, mismatched = 0;
    for (int y = 0; y < 512; ++y)
        for (int x = 0; x < 512; ++x) {
            const bool in = fixtures::segment_distance(x, y, {10, 10}, {10, 100}) <= 1.5;
            expected += in;
            got += m.at(x, y) == 1;
            mismatched += in != (m.at(x, y) == 1);
        }
    CHECK(expected == got);
    CHECK(mismatched == 0);
}

TEST_CASE("curved stroke footprint matches polyline distance oracle") {
    Rng rng(3);
    for (int trial = 0; trial < 5; ++trial) {
        Polyline pts;
        for (int i = 0; i < 6; ++i) pts.push_back({uniform(rng, 5, 95), uniform(rng, 5, 95)});
        const float w = static_cast<float>(uniform(rng, 1.5, 9.0));
        Sketch s;
        s.canvas = {100, 100};
        s.strokes.push_back(stroke(0, pts, w));
        const auto m = rasterize_mono(s);
        for (int y = 0; y < 100; ++y)
            for (int x = 0; x < 100; ++x) {
                const double d = fixtures::polyline_distance(x, y, pts);
                if (std::abs(d - w / 2.0) < 1e-9) continue;
                REQUIRE((m.at(x, y) == 1) == (d <= w / 2.0));
            }
    }
}

TEST_CASE("non-hair overrides hair") {
    Sketch s;
    s.strokes.push_back(stroke(0, {{10, 50}, {90, 50}}));
    s.strokes.push_back(stroke(1, {{50, 10}, {50, 90}}, 3.f, {}, StrokeKind::non_hair));
    const auto m = rasterize_mono(s);
    CHECK(m.at(50, 50) == -1);
    CHECK(m.at(20, 50) == 1);
    CHECK(m.at(50, 20) == -1);
}

TEST_CASE("color map") {
    SUBCASE("non-hair only gives background") {
        Sketch s;
        s.strokes.push_back(stroke(0, {{50, 10}, {50, 90}}, 5.f, {1, 1, 1}, StrokeKind::non_hair));
        const auto c = rasterize_color(s);
        CHECK(std::all_of(c.raw().begin(), c.raw().end(), [](float v) { return v == 0.f; }));
    }
    SUBCASE("constant fill and later-on-top") {
        Sketch s;
        s.strokes.push_back(stroke(0, {{10, 50}, {90, 50}}, 3.f, {0.8f, 0.6f, 0.3f}));
        s.strokes.push_back(stroke(1, {{50, 10}, {50, 90}}, 3.f, {0.1f, 0.2f, 0.9f}));
        const auto c = rasterize_color(s);
        const auto mono = rasterize_mono(s);
        CHECK(pixel_rgb(c, 20, 50) == Rgb{0.8f, 0.6f, 0.3f});
        CHECK(pixel_rgb(c, 50, 50) == Rgb{0.1f, 0.2f, 0.9f});
        for (int y = 0; y < 512; ++y)
            for (int x = 0; x < 512; ++x)
                if (mono.at(x, y) != 1) REQUIRE(pixel_rgb(c, x, y) == Rgb{});
    }
}

TEST_CASE("rasterization is repeatable") {
    Sketch s;
    s.strokes.push_back(stroke(0, {{10.3, 20.7}, {200.1, 300.9}, {400, 100}}, 7.f));
    s.strokes.push_back(stroke(1, {{100, 10}, {100, 500}}, 4.f, {}, StrokeKind::non_hair));
    CHECK(rasterize_mono(s) == rasterize_mono(s));
    CHECK(rasterize_color(s) == rasterize_color(s));
}

TEST_CASE("recolor from image") {
    Sketch s;
    s.canvas = {64, 64};
    s.strokes.push_back(stroke(0, {{40, 5}, {40, 60}}, 3.f));
    s.strokes.push_back(stroke(1, {{5, 5}, {60, 60}}, 3.f, {0.2f, 0.2f, 0.2f}, StrokeKind::non_hair));

    SUBCASE("constant image") {
        RgbImage img(64, 64, 3, 0.5f);
        for (auto mode : {RecolorMode::mean, RecolorMode::random_pixel}) {
            const auto out = recolor_strokes_from_image(s, img, mode, 9);
            CHECK(out.strokes[0].color == Rgb{0.5f, 0.5f, 0.5f});
            CHECK(out.strokes[1].color == s.strokes[1].color);
        }
    }
    SUBCASE("half black half white") {
        RgbImage img(64, 64, 3, 0.f);
        for (int y = 0; y < 64; ++y)
            for (int x = 32; x < 64; ++x) set_rgb(img, x, y, {1, 1, 1});
        const auto out = recolor_strokes_from_image(s, img, RecolorMode::mean);
        CHECK(out.strokes[0].color == Rgb{1, 1, 1});
    }
    SUBCASE("mean matches oracle accumulation") {
        Rng rng(11);
        RgbImage img(64, 64, 3);
        for (auto& v : img.raw()) v = static_cast<float>(uniform(rng, 0, 1));
        const auto out = recolor_strokes_from_image(s, img, RecolorMode::mean);
        double acc[3] = {0, 0, 0};
        int n = 0;
        for (int y = 0; y < 64; ++y)
            for (int x = 0; x < 64; ++x)
                if (fixtures::segment_distance(x, y, {40, 5}, {40, 60}) <= 1.5) {
                    for (int c = 0; c < 3; ++c) acc[c] += img.at(x, y, c);
                    ++n;
                }
        CHECK(out.strokes[0].color.r == doctest::Approx(acc[0] / n).epsilon(1e-5));
        CHECK(out.strokes[0].color.g == doctest::Approx(acc[1] / n).epsilon(1e-5));
        CHECK(out.strokes[0].color.b == doctest::Approx(acc[2] / n).epsilon(1e-5));
    }
    SUBCASE("mean invariant to footprint-preserving resampling") {
        Rng rng(12);
        RgbImage img(64, 64, 3);
        for (auto& v : img.raw()) v = static_cast<float>(uniform(rng, 0, 1));
        Sketch dense = s;
        dense.strokes[0].points = {{40, 5}, {40, 20}, {40, 33.5}, {40, 60}};
        CHECK(recolor_strokes_from_image(s, img, RecolorMode::mean).strokes[0].color ==
              recolor_strokes_from_image(dense, img, RecolorMode::mean).strokes[0].color);
    }
    SUBCASE("random pixel picks a footprint color") {
        Rng rng(13);
        RgbImage img(64, 64, 3);
        for (auto& v : img.raw()) v = static_cast<float>(uniform(rng, 0, 1));
        const auto fp = stroke_footprint(s.strokes[0], s.canvas);
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            const Rgb c = recolor_strokes_from_image(s, img, RecolorMode::random_pixel, seed).strokes[0].color;
            const bool found = std::any_of(fp.begin(), fp.end(), [&](std::int32_t i) {
                return pixel_rgb(img, i % 64, i / 64) == c;
            });
            CHECK(found);
        }
    }
}

TEST_CASE("validation rejects malformed sketches") {
    Sketch s;
    s.strokes.push_back(stroke(0, {{1, 1}}));
    CHECK_THROWS_AS(validate(s), Error);
    s.strokes[0].points.push_back({2, 2});
    CHECK_NOTHROW(validate(s));
    s.strokes.push_back(stroke(0, {{1, 1}, {3, 3}}));
    CHECK_THROWS_AS(validate(s), Error);
    s.strokes[1].id = 1;
    s.strokes[1].width = 0.f;
    CHECK_THROWS_AS(validate(s), Error);
}

TEST_CASE("json round trip") {
    Sketch s;
    s.canvas = {128, 96};
    s.strokes.push_back(stroke(3, {{1.25, 2.5}, {50, 60}}, 4.f, {0.1f, 0.2f, 0.3f}));
    s.strokes.push_back(stroke(7, {{5, 5}, {90, 120}}, 6.f, {}, StrokeKind::non_hair));
    s.strokes[1].generated = true;
    const auto doc = to_json(s);
    CHECK(doc["version"] == Sketch::kVersion);
    const Sketch back = sketch_from_json(nlohmann::json::parse(doc.dump()));
    CHECK(to_json(back) == doc);
    CHECK(back.canvas == s.canvas);
    CHECK(back.strokes[1].generated);
    CHECK(back.strokes[1].kind == StrokeKind::non_hair);
}

TEST_CASE("json points are clamped to the canvas") {
    const auto doc = nlohmann::json::parse(
        R"({"version":1,"canvas":[32,32],"strokes":[{"id":0,"kind":"hair","width":2,"color":[1,0,0],"points":[[-5,3],[40,50]]}]})");
    const Sketch s = sketch_from_json(doc);
    CHECK(s.strokes[0].points[0].x == 0.0);
    CHECK(s.strokes[0].points[1].x == 31.0);
    CHECK(s.strokes[0].points[1].y == 31.0);
}

TEST_CASE("malformed json is rejected") {
    CHECK_THROWS_AS(sketch_from_json(nlohmann::json::parse(R"({"version":1,"canvas":[32,32]})")), Error);
    CHECK_THROWS_AS(sketch_from_json(nlohmann::json::parse(R"({"version":99,"canvas":[32,32],"strokes":[]})")), Error);
}
