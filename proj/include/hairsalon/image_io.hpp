#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "hairsalon/grid.hpp"

namespace hs::io {

// 8-bit PNG codecs. Floats are quantized with round(v * 255) after clamping to [0, 1].
std::vector<std::uint8_t> encode_png(const Grid<float>& img);
Grid<float> decode_png(const std::vector<std::uint8_t>& bytes);

void write_png(const std::filesystem::path& path, const Grid<float>& img);
Grid<float> read_png(const std::filesystem::path& path);

Matte to_single_channel(const Grid<float>& img);

std::string base64_encode(const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> base64_decode(std::string_view text);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, std::string_view text);

}  // namespace hs::io
