#include "hairsalon/image_io.hpp"

#include <png.h>

#include <array>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "hairsalon/errors.hpp"

namespace hs::io {
namespace {

struct WriteBuffer {
    std::vector<std::uint8_t>* out;
};

void png_write_cb(png_structp png, png_bytep data, png_size_t len) {
    auto* buf = static_cast<WriteBuffer*>(png_get_io_ptr(png));
    buf->out->insert(buf->out->end(), data, data + len);
}

void png_flush_cb(png_structp) {}

struct ReadBuffer {
    const std::vector<std::uint8_t>* in;
    std::size_t pos = 0;
};

void png_read_cb(png_structp png, png_bytep data, png_size_t len) {
    auto* buf = static_cast<ReadBuffer*>(png_get_io_ptr(png));
    if (buf->pos + len > buf->in->size()) png_error(png, "truncated png");
    std::memcpy(data, buf->in->data() + buf->pos, len);
    buf->pos += len;
}

[[noreturn]] void png_error_cb(png_structp, png_const_charp msg) { throw Error("io_error", std::string("png: ") + msg); }
void png_warning_cb(png_structp, png_const_charp) {}

std::uint8_t quantize(float v) {
    const float c = std::clamp(v, 0.f, 1.f);
    return static_cast<std::uint8_t>(std::lround(c * 255.f));
}

}  // namespace

std::vector<std::uint8_t> encode_png(const Grid<float>& img) {
    if (img.channels() != 1 && img.channels() != 3)
        throw Error("invalid_argument", "png encode supports 1 or 3 channels");
    std::vector<std::uint8_t> out;
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, png_error_cb, png_warning_cb);
    png_infop info = png_create_info_struct(png);
    WriteBuffer buf{&out};
    try {
        png_set_write_fn(png, &buf, png_write_cb, png_flush_cb);
        const int color = img.channels() == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB;
        png_set_IHDR(png, info, img.width(), img.height(), 8, color, PNG_INTERLACE_NONE,
                     PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
        png_write_info(png, info);
        std::vector<std::uint8_t> row(static_cast<std::size_t>(img.width()) * img.channels());
        for (int y = 0; y < img.height(); ++y) {
            for (int x = 0; x < img.width(); ++x)
                for (int c = 0; c < img.channels(); ++c)
                    row[static_cast<std::size_t>(x) * img.channels() + c] = quantize(img.at(x, y, c));
            png_write_row(png, row.data());
        }
        png_write_end(png, nullptr);
    } catch (...) {
        png_destroy_write_struct(&png, &info);
        throw;
    }
    png_destroy_write_struct(&png, &info);
    return out;
}

Grid<float> decode_png(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0) throw Error("io_error", "png: bad signature");
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, png_error_cb, png_warning_cb);
    png_infop info = png_create_info_struct(png);
    ReadBuffer buf{&bytes};
    Grid<float> img;
    try {
        png_set_read_fn(png, &buf, png_read_cb);
        png_read_info(png, info);
        const auto width = static_cast<int>(png_get_image_width(png, info));
        const auto height = static_cast<int>(png_get_image_height(png, info));
        const int color = png_get_color_type(png, info);
        const int depth = png_get_bit_depth(png, info);
        if (depth == 16) png_set_strip_16(png);
        if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
        if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
        if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
        png_read_update_info(png, info);
        const int channels = png_get_channels(png, info);
        if (channels != 1 && channels != 3) throw Error("io_error", "png: unsupported channel layout");
        img = Grid<float>(height, width, channels);
        std::vector<std::uint8_t> row(png_get_rowbytes(png, info));
        for (int y = 0; y < height; ++y) {
            png_read_row(png, row.data(), nullptr);
            for (int x = 0; x < width; ++x)
                for (int c = 0; c < channels; ++c)
                    img.at(x, y, c) = static_cast<float>(row[static_cast<std::size_t>(x) * channels + c]) / 255.f;
        }
    } catch (...) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw;
    }
    png_destroy_read_struct(&png, &info, nullptr);
    return img;
}

void write_png(const std::filesystem::path& path, const Grid<float>& img) {
    const auto bytes = encode_png(img);
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("io_error", "cannot open " + path.string() + " for writing");
    f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

Grid<float> read_png(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error("io_error", "cannot open " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    return decode_png(bytes);
}

Matte to_single_channel(const Grid<float>& img) {
    if (img.channels() == 1) return img;
    Matte m(img.height(), img.width(), 1);
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x) m.at(x, y) = img.at(x, y, 0);
    return m;
}

namespace {
constexpr std::string_view kAlphabet = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
}

std::string base64_encode(const std::vector<std::uint8_t>& bytes) {
    std::string out;
    out.reserve((bytes.size() + 2) / 3 * 4);
    std::size_t i = 0;
    for (; i + 2 < bytes.size(); i += 3) {
        const std::uint32_t v = (bytes[i] << 16) | (bytes[i + 1] << 8) | bytes[i + 2];
        out += kAlphabet[(v >> 18) & 63];
        out += kAlphabet[(v >> 12) & 63];
        out += kAlphabet[(v >> 6) & 63];
        out += kAlphabet[v & 63];
    }
    if (const std::size_t rest = bytes.size() - i; rest > 0) {
        std::uint32_t v = bytes[i] << 16;
        if (rest == 2) v |= bytes[i + 1] << 8;
        out += kAlphabet[(v >> 18) & 63];
        out += kAlphabet[(v >> 12) & 63];
        out += rest == 2 ? kAlphabet[(v >> 6) & 63] : '=';
        out += '=';
    }
    return out;
}

std::vector<std::uint8_t> base64_decode(std::string_view text) {
    std::array<int, 256> lut{};
    lut.fill(-1);
    for (std::size_t i = 0; i < kAlphabet.size(); ++i) lut[static_cast<unsigned char>(kAlphabet[i])] = static_cast<int>(i);
    std::vector<std::uint8_t> out;
    std::uint32_t acc = 0;
    int bits = 0;
    for (char ch : text) {
        if (ch == '=') break;
        if (ch == '\n' || ch == '\r' || ch == ' ') continue;
        const int v = lut[static_cast<unsigned char>(ch)];
        if (v < 0) throw Error("invalid_argument", "invalid base64 character");
        acc = (acc << 6) | static_cast<std::uint32_t>(v);
        bits += 6;
        if (bits >= 8) {
            bits -= 8;
            out.push_back(static_cast<std::uint8_t>((acc >> bits) & 0xff));
        }
    }
    return out;
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw Error("io_error", "cannot open " + path.string());
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

void write_text(const std::filesystem::path& path, std::string_view text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("io_error", "cannot open " + path.string() + " for writing");
    f << text;
}

}  // namespace hs::io
