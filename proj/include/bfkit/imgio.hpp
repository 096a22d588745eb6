#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include "bfkit/grid.hpp"

namespace bfkit {

enum class ImageFormat { pgm8, pgm16, bf32 };

ImageFormat parse_image_format(std::string_view name);
std::string_view format_name(ImageFormat format);

// Decodes a PGM (P5) or BF32 byte stream. Intensities are returned as stored:
// no rescaling by maxval.
Image2D decode_image(std::span<const std::byte> bytes);
std::vector<std::byte> encode_image(const Grid<double>& img, ImageFormat format);

Image2D read_image(const std::filesystem::path& path);
void write_image(const std::filesystem::path& path, const Grid<double>& img, ImageFormat format);

// Masks travel as pgm8: any nonzero sample is foreground; written as 0/255.
Mask read_mask(const std::filesystem::path& path);
void write_mask(const std::filesystem::path& path, const Mask& mask);

// Divides the whole image by its maximum over mask pixels.
Image2D normalize(const Image2D& img, const Mask& mask);
double foreground_max(const Image2D& img, const Mask& mask);

}  // namespace bfkit
