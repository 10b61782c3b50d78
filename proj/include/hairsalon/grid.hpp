#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace hs {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

inline Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
inline Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
inline Point operator*(Point a, double s) { return {a.x * s, a.y * s}; }
inline double dot(Point a, Point b) { return a.x * b.x + a.y * b.y; }

using Polyline = std::vector<Point>;

struct Rgb {
    float r = 0.f;
    float g = 0.f;
    float b = 0.f;
    friend bool operator==(const Rgb&, const Rgb&) = default;
};

struct Canvas {
    int height = 512;
    int width = 512;
    friend bool operator==(const Canvas&, const Canvas&) = default;
};

// Row-major H x W x C raster. Pixel (x, y) has its center at integer coordinates.
template <typename T>
class Grid {
public:
    Grid() = default;
    Grid(int height, int width, int channels = 1, T fill = T{})
        : h_(height), w_(width), c_(channels),
          data_(static_cast<std::size_t>(height) * width * channels, fill) {
        if (height < 0 || width < 0 || channels < 1) throw std::invalid_argument("bad grid shape");
    }

    int height() const { return h_; }
    int width() const { return w_; }
    int channels() const { return c_; }
    Canvas canvas() const { return {h_, w_}; }
    std::size_t size() const { return data_.size(); }
    std::size_t pixels() const { return static_cast<std::size_t>(h_) * w_; }
    bool empty() const { return data_.empty(); }

    bool contains(int x, int y) const { return x >= 0 && y >= 0 && x < w_ && y < h_; }
    bool same_shape(const Grid& o) const { return h_ == o.h_ && w_ == o.w_ && c_ == o.c_; }

    T& at(int x, int y, int ch = 0) { return data_[index(x, y, ch)]; }
    const T& at(int x, int y, int ch = 0) const { return data_[index(x, y, ch)]; }

    std::span<T> values() { return data_; }
    std::span<const T> values() const { return data_; }
    std::vector<T>& raw() { return data_; }
    const std::vector<T>& raw() const { return data_; }

    void fill(T v) { std::fill(data_.begin(), data_.end(), v); }

    friend bool operator==(const Grid& a, const Grid& b) {
        return a.same_shape(b) && a.data_ == b.data_;
    }

private:
    std::size_t index(int x, int y, int ch) const {
        return (static_cast<std::size_t>(y) * w_ + x) * c_ + ch;
    }

    int h_ = 0;
    int w_ = 0;
    int c_ = 1;
    std::vector<T> data_;
};

// Alpha values in [0, 1], one channel.
using Matte = Grid<float>;
// Exactly {0, 1}, one channel.
using BinaryMask = Grid<std::uint8_t>;
// {-1, 0, +1}: non-hair, background, hair.
using SketchMapMono = Grid<std::int8_t>;
// Three channels in [0, 1]; used for color sketch maps, hair images and backgrounds.
using RgbImage = Grid<float>;

inline Rgb pixel_rgb(const RgbImage& img, int x, int y) {
    return {img.at(x, y, 0), img.at(x, y, 1), img.at(x, y, 2)};
}

inline void set_rgb(RgbImage& img, int x, int y, Rgb c) {
    img.at(x, y, 0) = c.r;
    img.at(x, y, 1) = c.g;
    img.at(x, y, 2) = c.b;
}

inline std::size_t count_nonzero(const BinaryMask& m) {
    return static_cast<std::size_t>(std::count_if(m.raw().begin(), m.raw().end(),
                                                  [](std::uint8_t v) { return v != 0; }));
}

}  // namespace hs
