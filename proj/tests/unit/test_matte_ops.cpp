#include <doctest.h>

#include <set>

#include "fixtures.hpp"
#include "hairsalon/errors.hpp"
#include "hairsalon/matte_ops.hpp"
#include "hairsalon/morphology.hpp"

using namespace hs;

TEST_CASE("matte thresholding") {
    Matte m(4, 4, 1, 0.f);
    CHECK(count_nonzero(matte_to_mask(m)) == 0);
    m.at(1, 1) = 0.5f;
    CHECK(matte_to_mask(m).at(1, 1) == 1);
    Rng rng(4);
    for (auto& v : m.raw()) v = static_cast<float>(uniform(rng, 0, 1));
    const auto mask = matte_to_mask(m, 0.3f);
    for (std::size_t i = 0; i < m.size(); ++i) CHECK(mask.raw()[i] == (m.raw()[i] >= 0.3f));
}

TEST_CASE("offset contour of a disc") {
    const Canvas c{160, 160};
    const Matte m = fixtures::disc(c, 80, 80, 50);
    const auto contour = extract_offset_contour(m, 5);
    const auto oracle = fixtures::brute_distance(matte_to_mask(m));
    std::size_t n = 0;
    for (int y = 0; y < 160; ++y)
        for (int x = 0; x < 160; ++x)
            if (contour.at(x, y)) {
                ++n;
                CHECK(std::abs(oracle.at(x, y) - 5.0) <= 0.8);
            }
    CHECK(n > 300);
}

TEST_CASE("offset contour degenerate cases") {
    CHECK(count_nonzero(extract_offset_contour(Matte(40, 40, 1, 1.f), 4)) == 0);
    CHECK(count_nonzero(extract_offset_contour(Matte(40, 40, 1, 0.f), 4)) == 0);
    CHECK_THROWS_AS(extract_offset_contour(Matte(40, 40, 1, 0.f), 2), Error);
    CHECK_THROWS_AS(extract_offset_contour(Matte(40, 40, 1, 0.f), 9), Error);
}

TEST_CASE("non-hair strokes stay in the exterior band") {
    const Canvas c{256, 256};
    const Matte m = fixtures::ellipse(c, 128, 120, 70, 90);
    const auto dist = morph::distance_to(matte_to_mask(m));
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto strokes = generate_nonhair_strokes(m, seed);
        REQUIRE(!strokes.empty());
        for (const auto& s : strokes) {
            CHECK(s.kind == StrokeKind::non_hair);
            CHECK(s.width >= 3.f);
            CHECK(s.width <= 15.f);
            for (auto i : stroke_footprint(s, c)) {
                const float d = dist.raw()[static_cast<std::size_t>(i)];
                REQUIRE(d >= 2.f);
                REQUIRE(d <= 9.f + s.width / 2.f);
            }
        }
    }
}

TEST_CASE("non-hair synthesis edge cases") {
    CHECK(generate_nonhair_strokes(Matte(64, 64, 1, 0.f), 1).empty());
    const Matte m = fixtures::disc({200, 200}, 100, 100, 60);
    const auto a = generate_nonhair_strokes(m, 1);
    const auto b = generate_nonhair_strokes(m, 2);
    const auto a2 = generate_nonhair_strokes(m, 1);
    auto key = [](const std::vector<Stroke>& v) {
        std::vector<double> k;
        for (const auto& s : v)
            for (const auto& p : s.points) k.push_back(p.x * 1000 + p.y);
        return k;
    };
    CHECK(key(a) == key(a2));
    CHECK(key(a) != key(b));
}

TEST_CASE("sad") {
    Matte z(512, 512, 1, 0.f), o(512, 512, 1, 1.f);
    CHECK(sad(z, z) == 0.0);
    CHECK(sad(z, o) == doctest::Approx(262.144).epsilon(1e-12));
    CHECK(sad(z, o, SadScale::raw) == 262144.0);
    Rng rng(5);
    Matte a(31, 17, 1), b(31, 17, 1);
    for (auto& v : a.raw()) v = static_cast<float>(uniform(rng, 0, 1));
    for (auto& v : b.raw()) v = static_cast<float>(uniform(rng, 0, 1));
    double acc = 0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += std::abs(double(a.raw()[i]) - b.raw()[i]);
    CHECK(sad(a, b) == doctest::Approx(acc / 1000).epsilon(1e-9));
    CHECK(sad(a, b) == sad(b, a));
    CHECK_THROWS_AS(sad(a, z), Error);
}

TEST_CASE("iou") {
    Matte a(10, 10, 1, 0.f), b(10, 10, 1, 0.f);
    CHECK(iou(a, b) == 1.0);
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 4; ++x) a.at(x, y) = 1.f;
    CHECK(iou(a, a) == 1.0);
    for (int y = 6; y < 10; ++y)
        for (int x = 6; x < 10; ++x) b.at(x, y) = 1.f;
    CHECK(iou(a, b) == 0.0);
    Matte r1(10, 10, 1, 0.f), r2(10, 10, 1, 0.f);
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 4; ++x) r1.at(x, y) = 1.f, r2.at(x + 2, y) = 1.f;
    CHECK(iou(r1, r2) == 1.0 / 3.0);
    CHECK_THROWS_AS(iou(r1, Matte(3, 3, 1)), Error);
}
