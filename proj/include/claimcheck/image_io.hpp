#pragma once

#include "claimcheck/image.hpp"

#include <filesystem>

namespace claimcheck {

/// Decodes a PNG or JPEG file to 8-bit RGB. Grayscale sources are expanded
/// to three identical channels and the EXIF orientation tag is applied.
RgbImage read_image(const std::filesystem::path& path);

void write_png(const RgbImage& image, const std::filesystem::path& path);
void write_jpeg(const RgbImage& image, const std::filesystem::path& path, int quality = 95);

}  // namespace claimcheck
