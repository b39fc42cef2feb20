#include "claimcheck/image_io.hpp"

#include "claimcheck/errors.hpp"

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include <vector>

namespace claimcheck {

namespace {

RgbImage from_bgr(const cv::Mat& bgr) {
  RgbImage out(bgr.rows, bgr.cols);
  for (int y = 0; y < bgr.rows; ++y) {
    const auto* row = bgr.ptr<cv::Vec3b>(y);
    for (int x = 0; x < bgr.cols; ++x) {
      out.channels[0](y, x) = row[x][2];
      out.channels[1](y, x) = row[x][1];
      out.channels[2](y, x) = row[x][0];
    }
  }
  return out;
}

cv::Mat to_bgr(const RgbImage& image) {
  cv::Mat bgr(static_cast<int>(image.rows()), static_cast<int>(image.cols()), CV_8UC3);
  for (int y = 0; y < bgr.rows; ++y) {
    auto* row = bgr.ptr<cv::Vec3b>(y);
    for (int x = 0; x < bgr.cols; ++x)
      row[x] = cv::Vec3b(image.channels[2](y, x), image.channels[1](y, x), image.channels[0](y, x));
  }
  return bgr;
}

void write_encoded(const RgbImage& image, const std::filesystem::path& path, const char* ext,
                   const std::vector<int>& params) {
  std::vector<uchar> bytes;
  if (!cv::imencode(ext, to_bgr(image), bytes, params))
    throw IOError("failed to encode " + path.string());
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (f == nullptr) throw IOError("cannot open " + path.string() + " for writing");
  const bool ok = std::fwrite(bytes.data(), 1, bytes.size(), f) == bytes.size();
  if (std::fclose(f) != 0 || !ok) throw IOError("failed writing " + path.string());
}

}  // namespace

RgbImage read_image(const std::filesystem::path& path) {
  if (!std::filesystem::is_regular_file(path)) throw DecodeError("no such file: " + path.string());
  cv::Mat bgr;
  try {
    bgr = cv::imread(path.string(), cv::IMREAD_COLOR);
  } catch (const cv::Exception& e) {
    throw DecodeError(path.string() + ": " + e.what());
  }
  if (bgr.empty() || bgr.type() != CV_8UC3)
    throw DecodeError("unsupported or corrupt image: " + path.string());
  return from_bgr(bgr);
}

void write_png(const RgbImage& image, const std::filesystem::path& path) {
  write_encoded(image, path, ".png", {cv::IMWRITE_PNG_COMPRESSION, 6});
}

void write_jpeg(const RgbImage& image, const std::filesystem::path& path, int quality) {
  write_encoded(image, path, ".jpg", {cv::IMWRITE_JPEG_QUALITY, quality});
}

}  // namespace claimcheck
