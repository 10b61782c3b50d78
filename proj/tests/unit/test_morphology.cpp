#include <doctest.h>

#include "fixtures.hpp"
#include "hairsalon/morphology.hpp"

using namespace hs;

namespace {

BinaryMask random_mask(Rng& rng, int h, int w, double density) {
    BinaryMask m(h, w, 1, 0);
    for (auto& v : m.raw()) v = uniform(rng, 0, 1) < density;
    return m;
}

}  // namespace

TEST_CASE("distance transform matches brute force") {
    Rng rng(1);
    for (double density : {0.002, 0.02, 0.3}) {
        const auto m = random_mask(rng, 37, 53, density);
        const auto fast = morph::distance_to(m);
        const auto slow = fixtures::brute_distance(m);
        for (std::size_t i = 0; i < fast.size(); ++i) REQUIRE(fast.raw()[i] == doctest::Approx(slow.raw()[i]).epsilon(1e-5));
    }
}

TEST_CASE("distance transform without features is infinite") {
    const auto d = morph::distance_to(BinaryMask(8, 8, 1, 0));
    CHECK(std::isinf(d.at(3, 3)));
}

TEST_CASE("square dilation and erosion match Chebyshev oracle") {
    Rng rng(2);
    const auto m = random_mask(rng, 30, 40, 0.01);
    const auto dil = morph::dilate_square(m, 15);
    for (int y = 0; y < 30; ++y)
        for (int x = 0; x < 40; ++x) {
            bool hit = false;
            for (int dy = -7; dy <= 7 && !hit; ++dy)
                for (int dx = -7; dx <= 7 && !hit; ++dx) hit = m.contains(x + dx, y + dy) && m.at(x + dx, y + dy);
            REQUIRE(dil.at(x, y) == hit);
        }
    const auto full = random_mask(rng, 30, 40, 0.9);
    const auto ero = morph::erode_square(full, 3);
    for (int y = 0; y < 30; ++y)
        for (int x = 0; x < 40; ++x) {
            bool all = true;
            for (int dy = -1; dy <= 1; ++dy)
                for (int dx = -1; dx <= 1; ++dx) all = all && full.contains(x + dx, y + dy) && full.at(x + dx, y + dy);
            REQUIRE(ero.at(x, y) == all);
        }
}

TEST_CASE("component labeling is 8-connected") {
    BinaryMask m(5, 5, 1, 0);
    m.at(0, 0) = m.at(1, 1) = m.at(2, 2) = 1;
    m.at(4, 0) = 1;
    const auto c = morph::label_components(m);
    CHECK(c.count == 2);
    CHECK(c.labels.at(0, 0) == c.labels.at(2, 2));
    CHECK(c.labels.at(4, 0) != c.labels.at(0, 0));
    CHECK(c.labels.at(3, 3) == -1);
}

TEST_CASE("thinning a bar yields a one-pixel center line") {
    BinaryMask m(20, 60, 1, 0);
    for (int y = 6; y <= 12; ++y)
        for (int x = 5; x <= 54; ++x) m.at(x, y) = 1;
    const auto t = morph::thin(m);
    const auto chains = morph::trace_chains(t);
    REQUIRE(chains.size() == 1);
    for (auto i : chains[0]) CHECK(std::abs(i / 60 - 9) <= 1);
    CHECK(chains[0].size() >= 40);
}

TEST_CASE("tracing a closed loop repeats its first pixel") {
    BinaryMask m(12, 12, 1, 0);
    for (int k = 2; k <= 8; ++k) m.at(k, 2) = m.at(k, 8) = m.at(2, k) = m.at(8, k) = 1;
    const auto chains = morph::trace_chains(m);
    REQUIRE(chains.size() == 1);
    CHECK(chains[0].front() == chains[0].back());
    CHECK(chains[0].size() == 25);
}

TEST_CASE("spur pruning removes short branches only") {
    BinaryMask m(30, 60, 1, 0);
    for (int x = 5; x < 55; ++x) m.at(x, 15) = 1;
    for (int y = 12; y < 15; ++y) m.at(30, y) = 1;  // 3 px spur
    const auto p = morph::prune_spurs(m, 5);
    CHECK(p.at(30, 13) == 0);
    CHECK(p.at(30, 15) == 1);
    CHECK(p.at(5, 15) == 1);
    CHECK(p.at(54, 15) == 1);
}

TEST_CASE("douglas-peucker keeps corners") {
    Polyline line;
    for (int i = 0; i <= 20; ++i) line.push_back({double(i), 0});
    for (int i = 1; i <= 20; ++i) line.push_back({20, double(i)});
    const auto s = morph::simplify(line, 0.5);
    REQUIRE(s.size() == 3);
    CHECK(s[1].x == 20);
    CHECK(s[1].y == 0);
    CHECK(morph::polyline_length(s) == doctest::Approx(40));
}
