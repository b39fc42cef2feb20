#pragma once

#include "claimcheck/analysis.hpp"
#include "claimcheck/image.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace claimcheck {

struct Rgb8 {
  std::uint8_t r = 0, g = 0, b = 0;
  friend bool operator==(const Rgb8&, const Rgb8&) = default;
};

/// Parses "#RRGGBB".
Rgb8 parse_hex_color(const std::string& hex);
std::string to_hex(const Rgb8& c);

inline constexpr Rgb8 kBlue{0x20, 0x40, 0xC0};
inline constexpr Rgb8 kGreen{0x30, 0xA0, 0x30};
inline constexpr Rgb8 kRed{0xC0, 0x30, 0x30};
inline constexpr Rgb8 kYellow{0xC0, 0xB0, 0x30};

struct HeatmapStyle {
  Rgb8 low = kBlue;    // similarity 0
  Rgb8 high = kGreen;  // similarity 1
  int cell = 8;        // pixels per matrix cell
  /// Label strip colors by tag index; the first two tags are green and red.
  std::vector<Rgb8> tag_colors{kGreen, kRed, kBlue, kYellow, {0x80, 0x30, 0xA0}, {0x30, 0xA0, 0xA0},
                               {0xA0, 0x60, 0x20}, {0x60, 0x60, 0x60}};
  Rgb8 corner{0xFF, 0xFF, 0xFF};
};

/// Linear blue-to-green ramp over [0, 1]; inputs outside are clamped.
Rgb8 ramp_color(double similarity, const HeatmapStyle& style);

struct HeatmapInfo {
  int clamped_cells = 0;  // cells whose similarity fell outside [0, 1]
};

/// (n + 1) x (n + 1) cells: a label strip on the top row and left column,
/// the matrix below-right of it in the matrix's current order.
RgbImage render_heatmap_image(const AffinityMatrix& matrix, const HeatmapStyle& style = {},
                              HeatmapInfo* info = nullptr);
HeatmapInfo render_heatmap(const AffinityMatrix& matrix, const std::filesystem::path& path,
                           const HeatmapStyle& style = {});

struct DistributionStyle {
  int width = 640;
  int height = 400;
  Rgb8 case_genuine = kGreen;
  Rgb8 case_impostor = kRed;
  Rgb8 calibration_genuine = kBlue;
  Rgb8 calibration_impostor = kYellow;
  int fill_alpha = 80;  // out of 256
};

struct DistributionInfo {
  int curves = 0;
};

/// Filled step histograms (density per bin) of the case sides and, when
/// given, the calibration sides. Empty sides are skipped.
RgbImage render_distributions_image(const ScoreDistributions& case_scores,
                                    const std::optional<ScoreDistributions>& calibration,
                                    const DistributionStyle& style = {}, DistributionInfo* info = nullptr);
DistributionInfo render_distributions(const ScoreDistributions& case_scores,
                                      const std::optional<ScoreDistributions>& calibration,
                                      const std::filesystem::path& path, const DistributionStyle& style = {});

/// Text rendering with the built-in 6x11 bitmap font.
void draw_text(RgbImage& image, int x, int y, const std::string& text, Rgb8 color);

}  // namespace claimcheck
