#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstdint>

namespace claimcheck {

/// Row-major single-channel plane; row index is y, column index is x.
template <typename Scalar>
using Plane = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using Plane8 = Plane<std::uint8_t>;
using LumaPlane = Plane<double>;

/// 8-bit RGB raster stored as three planes (R, G, B).
///
/// Pixel (row i, column j) has its center at image coordinate (x = j, y = i).
/// Landmarks and transforms throughout the toolkit use that convention.
struct RgbImage {
  std::array<Plane8, 3> channels;

  RgbImage() = default;
  RgbImage(Eigen::Index rows, Eigen::Index cols) {
    for (auto& c : channels) c.setZero(rows, cols);
  }

  static RgbImage filled(Eigen::Index rows, Eigen::Index cols, std::uint8_t r, std::uint8_t g,
                         std::uint8_t b) {
    RgbImage img(rows, cols);
    img.channels[0].setConstant(r);
    img.channels[1].setConstant(g);
    img.channels[2].setConstant(b);
    return img;
  }

  static RgbImage gray(const Plane8& plane) {
    RgbImage img;
    img.channels = {plane, plane, plane};
    return img;
  }

  Eigen::Index rows() const { return channels[0].rows(); }
  Eigen::Index cols() const { return channels[0].cols(); }

  friend bool operator==(const RgbImage& a, const RgbImage& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
    for (int c = 0; c < 3; ++c)
      if ((a.channels[c] != b.channels[c]).any()) return false;
    return true;
  }
};

inline constexpr double kLumaR = 0.299;
inline constexpr double kLumaG = 0.587;
inline constexpr double kLumaB = 0.114;

/// BT.601 luma in [0,1].
inline double luma_of(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  return (kLumaR * r + kLumaG * g + kLumaB * b) / 255.0;
}

LumaPlane luma(const RgbImage& image);

/// Bilinear sample at (x, y) with edge-replicate addressing.
double sample_bilinear(const Plane8& plane, double x, double y);

/// Bilinear resize with pixel-center alignment.
RgbImage resize_bilinear(const RgbImage& image, Eigen::Index rows, Eigen::Index cols);

/// Normalized 1-D gaussian taps for radius ceil(3 sigma).
Eigen::ArrayXd gaussian_kernel(double sigma);

/// Separable gaussian blur, edge-replicate padding.
template <typename Scalar>
Plane<Scalar> gaussian_blur(const Plane<Scalar>& in, double sigma) {
  const Eigen::ArrayXd taps = gaussian_kernel(sigma);
  const Eigen::Index radius = taps.size() / 2;
  const Eigen::Index rows = in.rows();
  const Eigen::Index cols = in.cols();
  auto clampi = [](Eigen::Index v, Eigen::Index hi) {
    return v < 0 ? Eigen::Index{0} : (v > hi ? hi : v);
  };
  Plane<double> tmp(rows, cols);
  for (Eigen::Index y = 0; y < rows; ++y)
    for (Eigen::Index x = 0; x < cols; ++x) {
      double acc = 0.0;
      for (Eigen::Index k = -radius; k <= radius; ++k)
        acc += taps(k + radius) * static_cast<double>(in(y, clampi(x + k, cols - 1)));
      tmp(y, x) = acc;
    }
  Plane<Scalar> out(rows, cols);
  for (Eigen::Index y = 0; y < rows; ++y)
    for (Eigen::Index x = 0; x < cols; ++x) {
      double acc = 0.0;
      for (Eigen::Index k = -radius; k <= radius; ++k)
        acc += taps(k + radius) * tmp(clampi(y + k, rows - 1), x);
      out(y, x) = static_cast<Scalar>(acc);
    }
  return out;
}

/// Blurs each channel and rounds back to 8 bits.
RgbImage gaussian_blur(const RgbImage& image, double sigma);

}  // namespace claimcheck
