#include "claimcheck/image.hpp"

#include <algorithm>
#include <cmath>

namespace claimcheck {

LumaPlane luma(const RgbImage& image) {
  LumaPlane out(image.rows(), image.cols());
  for (Eigen::Index y = 0; y < image.rows(); ++y)
    for (Eigen::Index x = 0; x < image.cols(); ++x)
      out(y, x) = luma_of(image.channels[0](y, x), image.channels[1](y, x), image.channels[2](y, x));
  return out;
}

double sample_bilinear(const Plane8& plane, double x, double y) {
  const double max_x = static_cast<double>(plane.cols() - 1);
  const double max_y = static_cast<double>(plane.rows() - 1);
  x = std::clamp(x, 0.0, max_x);
  y = std::clamp(y, 0.0, max_y);
  const auto x0 = static_cast<Eigen::Index>(std::floor(x));
  const auto y0 = static_cast<Eigen::Index>(std::floor(y));
  const Eigen::Index x1 = std::min<Eigen::Index>(x0 + 1, plane.cols() - 1);
  const Eigen::Index y1 = std::min<Eigen::Index>(y0 + 1, plane.rows() - 1);
  const double fx = x - static_cast<double>(x0);
  const double fy = y - static_cast<double>(y0);
  const double top = (1.0 - fx) * plane(y0, x0) + fx * plane(y0, x1);
  const double bottom = (1.0 - fx) * plane(y1, x0) + fx * plane(y1, x1);
  return (1.0 - fy) * top + fy * bottom;
}

namespace {

std::uint8_t to_u8(double v) {
  return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
}

}  // namespace

RgbImage resize_bilinear(const RgbImage& image, Eigen::Index rows, Eigen::Index cols) {
  RgbImage out(rows, cols);
  const double sx = static_cast<double>(image.cols()) / static_cast<double>(cols);
  const double sy = static_cast<double>(image.rows()) / static_cast<double>(rows);
  for (Eigen::Index y = 0; y < rows; ++y)
    for (Eigen::Index x = 0; x < cols; ++x) {
      const double src_x = (static_cast<double>(x) + 0.5) * sx - 0.5;
      const double src_y = (static_cast<double>(y) + 0.5) * sy - 0.5;
      for (int c = 0; c < 3; ++c)
        out.channels[c](y, x) = to_u8(sample_bilinear(image.channels[c], src_x, src_y));
    }
  return out;
}

Eigen::ArrayXd gaussian_kernel(double sigma) {
  const auto radius = static_cast<Eigen::Index>(std::ceil(3.0 * sigma));
  Eigen::ArrayXd taps(2 * radius + 1);
  for (Eigen::Index k = -radius; k <= radius; ++k) {
    const double d = static_cast<double>(k);
    taps(k + radius) = std::exp(-(d * d) / (2.0 * sigma * sigma));
  }
  return taps / taps.sum();
}

RgbImage gaussian_blur(const RgbImage& image, double sigma) {
  RgbImage out;
  for (int c = 0; c < 3; ++c) {
    const LumaPlane blurred = gaussian_blur<double>(image.channels[c].cast<double>(), sigma);
    out.channels[c] = blurred.unaryExpr([](double v) { return to_u8(v); });
  }
  return out;
}

}  // namespace claimcheck
