#include <doctest.h>

#include "hairsalon/errors.hpp"
#include "hairsalon/image_io.hpp"
#include "hairsalon/random.hpp"

using namespace hs;

TEST_CASE("png round trip within one level") {
    Rng rng(1);
    for (int ch : {1, 3}) {
        Grid<float> img(17, 23, ch);
        for (auto& v : img.raw()) v = static_cast<float>(uniform(rng, 0, 1));
        const auto back = io::decode_png(io::encode_png(img));
        REQUIRE(back.same_shape(img));
        for (std::size_t i = 0; i < img.size(); ++i) REQUIRE(std::abs(back.raw()[i] - img.raw()[i]) <= 0.5f / 255.f + 1e-6f);
        CHECK(io::encode_png(back) == io::encode_png(img));
    }
}

TEST_CASE("base64 round trip") {
    for (std::size_t n : {0, 1, 2, 3, 4, 100}) {
        std::vector<std::uint8_t> bytes(n);
        for (std::size_t i = 0; i < n; ++i) bytes[i] = static_cast<std::uint8_t>(i * 37 + 11);
        CHECK(io::base64_decode(io::base64_encode(bytes)) == bytes);
    }
    CHECK(io::base64_encode({'M', 'a', 'n'}) == "TWFu");
}

TEST_CASE("invalid png is rejected") {
    CHECK_THROWS_AS(io::decode_png({1, 2, 3, 4}), Error);
}
