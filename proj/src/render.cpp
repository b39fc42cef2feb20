#include "claimcheck/render.hpp"

#include "claimcheck/errors.hpp"
#include "claimcheck/image_io.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>

namespace claimcheck {

namespace {

#include "font_data.inc"

std::uint8_t lerp8(std::uint8_t a, std::uint8_t b, double t) {
  return static_cast<std::uint8_t>(std::lround(a + (static_cast<double>(b) - a) * t));
}

void put(RgbImage& img, int x, int y, Rgb8 c) {
  if (x < 0 || y < 0 || x >= img.cols() || y >= img.rows()) return;
  img.channels[0](y, x) = c.r;
  img.channels[1](y, x) = c.g;
  img.channels[2](y, x) = c.b;
}

void blend(RgbImage& img, int x, int y, Rgb8 c, int alpha) {
  if (x < 0 || y < 0 || x >= img.cols() || y >= img.rows()) return;
  auto mix = [alpha](std::uint8_t dst, std::uint8_t src) {
    return static_cast<std::uint8_t>((alpha * src + (256 - alpha) * dst) >> 8);
  };
  img.channels[0](y, x) = mix(img.channels[0](y, x), c.r);
  img.channels[1](y, x) = mix(img.channels[1](y, x), c.g);
  img.channels[2](y, x) = mix(img.channels[2](y, x), c.b);
}

void fill_rect(RgbImage& img, int x0, int y0, int x1, int y1, Rgb8 c) {
  for (int y = y0; y < y1; ++y)
    for (int x = x0; x < x1; ++x) put(img, x, y, c);
}

void hline(RgbImage& img, int x0, int x1, int y, Rgb8 c) {
  if (x0 > x1) std::swap(x0, x1);
  for (int x = x0; x <= x1; ++x) put(img, x, y, c);
}

void vline(RgbImage& img, int x, int y0, int y1, Rgb8 c) {
  if (y0 > y1) std::swap(y0, y1);
  for (int y = y0; y <= y1; ++y) put(img, x, y, c);
}

// Fixed formatting keeps tick labels identical across platforms.
std::string tick_label(double v) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%.1f", v);
  std::string s(buf);
  if (s == "-0.0") s = "0.0";
  return s;
}

}  // namespace

Rgb8 parse_hex_color(const std::string& hex) {
  unsigned r = 0, g = 0, b = 0;
  if (hex.size() != 7 || hex[0] != '#' || std::sscanf(hex.c_str() + 1, "%02x%02x%02x", &r, &g, &b) != 3)
    throw ConfigError("color must look like #RRGGBB, got '" + hex + "'");
  return {static_cast<std::uint8_t>(r), static_cast<std::uint8_t>(g), static_cast<std::uint8_t>(b)};
}

std::string to_hex(const Rgb8& c) {
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02X%02X%02X", c.r, c.g, c.b);
  return buf;
}

Rgb8 ramp_color(double similarity, const HeatmapStyle& style) {
  const double t = std::clamp(similarity, 0.0, 1.0);
  return {lerp8(style.low.r, style.high.r, t), lerp8(style.low.g, style.high.g, t),
          lerp8(style.low.b, style.high.b, t)};
}

void draw_text(RgbImage& image, int x, int y, const std::string& text, Rgb8 color) {
  for (std::size_t k = 0; k < text.size(); ++k) {
    const int ch = static_cast<unsigned char>(text[k]);
    if (ch < 32 || ch > 126) continue;
    const auto& glyph = kGlyphs[ch - 32];
    for (int row = 0; row < kGlyphHeight; ++row)
      for (int col = 0; col < kGlyphWidth; ++col)
        if (glyph[row] & (1u << (kGlyphWidth - 1 - col)))
          put(image, x + static_cast<int>(k) * kGlyphWidth + col, y + row, color);
  }
}

RgbImage render_heatmap_image(const AffinityMatrix& matrix, const HeatmapStyle& style, HeatmapInfo* info) {
  const auto n = static_cast<int>(matrix.size());
  if (n < 2) throw TooFewSamplesError("heatmap needs at least a 2x2 matrix");
  if (style.cell <= 0) throw ConfigError("heatmap cell size must be positive");
  const int c = style.cell;
  RgbImage img((n + 1) * c, (n + 1) * c);
  fill_rect(img, 0, 0, c, c, style.corner);

  auto tag_color = [&](const std::string& label) {
    const auto it = std::find(matrix.tags.begin(), matrix.tags.end(), label);
    const auto idx = static_cast<std::size_t>(it - matrix.tags.begin());
    return style.tag_colors.empty() ? style.corner : style.tag_colors[idx % style.tag_colors.size()];
  };
  for (int i = 0; i < n; ++i) {
    const Rgb8 tc = tag_color(matrix.labels[static_cast<std::size_t>(i)]);
    fill_rect(img, (i + 1) * c, 0, (i + 2) * c, c, tc);
    fill_rect(img, 0, (i + 1) * c, c, (i + 2) * c, tc);
  }

  int clamped = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double v = matrix.values(i, j);
      if (v < 0.0 || v > 1.0) ++clamped;
      fill_rect(img, (j + 1) * c, (i + 1) * c, (j + 2) * c, (i + 2) * c, ramp_color(v, style));
    }
  if (info != nullptr) info->clamped_cells = clamped;
  return img;
}

HeatmapInfo render_heatmap(const AffinityMatrix& matrix, const std::filesystem::path& path,
                           const HeatmapStyle& style) {
  HeatmapInfo info;
  write_png(render_heatmap_image(matrix, style, &info), path);
  return info;
}

RgbImage render_distributions_image(const ScoreDistributions& case_scores,
                                    const std::optional<ScoreDistributions>& calibration,
                                    const DistributionStyle& style, DistributionInfo* info) {
  struct Curve {
    const ScoreSummary* summary;
    Rgb8 color;
    const char* legend;
  };
  std::vector<Curve> curves;
  if (calibration) {
    curves.push_back({&calibration->impostor_summary, style.calibration_impostor, "impostor (reference)"});
    curves.push_back({&calibration->genuine_summary, style.calibration_genuine, "genuine (reference)"});
  }
  curves.push_back({&case_scores.impostor_summary, style.case_impostor, "impostor (case)"});
  curves.push_back({&case_scores.genuine_summary, style.case_genuine, "genuine (case)"});
  std::erase_if(curves, [](const Curve& c) { return c.summary->count == 0; });
  if (case_scores.genuine_summary.count == 0 && case_scores.impostor_summary.count == 0)
    throw EmptySampleError("no case scores to plot");

  const HistogramSpec& spec = case_scores.histogram;
  RgbImage img = RgbImage::filled(style.height, style.width, 0xFF, 0xFF, 0xFF);
  const int left = 56, right = style.width - 16, top = 16, bottom = style.height - 44;
  const Rgb8 black{0, 0, 0};
  const Rgb8 grid{0xDD, 0xDD, 0xDD};

  double peak = 0.0;
  for (const auto& c : curves) peak = std::max(peak, c.summary->mass.maxCoeff() / spec.bin_width());
  peak = peak > 0.0 ? peak * 1.05 : 1.0;

  auto x_of = [&](double s) {
    return left + static_cast<int>(std::lround((s - spec.lo) / (spec.hi - spec.lo) * (right - left)));
  };
  auto y_of = [&](double density) {
    return bottom - static_cast<int>(std::lround(density / peak * (bottom - top)));
  };

  for (double t : {-1.0, -0.5, 0.0, 0.5, 1.0}) {
    if (t < spec.lo || t > spec.hi) continue;
    vline(img, x_of(t), top, bottom, grid);
  }

  for (const auto& c : curves) {
    const ScoreSummary& s = *c.summary;
    int prev_y = bottom;
    for (int k = 0; k < spec.bins; ++k) {
      const int x0 = x_of(spec.bin_lo(k));
      const int x1 = x_of(spec.bin_lo(k + 1));
      const int y = y_of(s.mass(k) / spec.bin_width());
      for (int yy = y; yy < bottom; ++yy)
        for (int xx = x0; xx < x1; ++xx) blend(img, xx, yy, c.color, style.fill_alpha);
      vline(img, x0, prev_y, y, c.color);
      hline(img, x0, x1, y, c.color);
      prev_y = y;
    }
    vline(img, x_of(spec.hi), prev_y, bottom, c.color);
  }

  hline(img, left, right, bottom, black);
  vline(img, left, top, bottom, black);
  for (double t : {-1.0, -0.5, 0.0, 0.5, 1.0}) {
    if (t < spec.lo || t > spec.hi) continue;
    const int x = x_of(t);
    vline(img, x, bottom, bottom + 4, black);
    const std::string label = tick_label(t);
    draw_text(img, x - static_cast<int>(label.size()) * 3, bottom + 6, label, black);
  }
  draw_text(img, (left + right) / 2 - 30, bottom + 22, "similarity", black);
  draw_text(img, 4, top, "density", black);

  int ly = top + 4;
  for (auto it = curves.rbegin(); it != curves.rend(); ++it) {
    fill_rect(img, right - 150, ly + 2, right - 142, ly + 10, it->color);
    draw_text(img, right - 138, ly, it->legend, black);
    ly += 14;
  }
  if (info != nullptr) info->curves = static_cast<int>(curves.size());
  return img;
}

DistributionInfo render_distributions(const ScoreDistributions& case_scores,
                                      const std::optional<ScoreDistributions>& calibration,
                                      const std::filesystem::path& path, const DistributionStyle& style) {
  DistributionInfo info;
  write_png(render_distributions_image(case_scores, calibration, style, &info), path);
  return info;
}

}  // namespace claimcheck
