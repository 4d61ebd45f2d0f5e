#pragma once

#include <map>
#include <mutex>
#include <string>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include "oscar/error.hpp"
#include "oscar/sampling.hpp"

namespace oscar {

inline Raster load_grayscale(const std::string& path) {
  cv::Mat img = cv::imread(path, cv::IMREAD_GRAYSCALE);
  if (img.empty()) throw Error(ErrorCode::Io, "cannot decode image " + path);
  Raster r{img.cols, img.rows, {}};
  r.pixels.reserve(static_cast<std::size_t>(img.cols) * img.rows);
  for (int y = 0; y < img.rows; ++y)
    for (int x = 0; x < img.cols; ++x) r.pixels.push_back(img.at<unsigned char>(y, x));
  return r;
}

// Pixel values are clamped to [0, 255] and rounded.
inline void save_grayscale(const std::string& path, const Raster& r) {
  cv::Mat img(r.height, r.width, CV_8UC1);
  for (int y = 0; y < r.height; ++y)
    for (int x = 0; x < r.width; ++x) {
      float v = std::clamp(r.at(x, y), 0.0f, 255.0f);
      img.at<unsigned char>(y, x) = static_cast<unsigned char>(v + 0.5f);
    }
  if (!cv::imwrite(path, img)) throw Error(ErrorCode::Io, "cannot write image " + path);
}

/// Sharpness of frame images on disk, decoded once per path. Thread-safe.
class ImageSharpness {
 public:
  double operator()(const FrameRef& frame) {
    {
      std::lock_guard lock(mutex_);
      if (auto it = cache_.find(frame.path); it != cache_.end()) return it->second;
    }
    const double s = sharpness_score(load_grayscale(frame.path));
    std::lock_guard lock(mutex_);
    cache_.emplace(frame.path, s);
    return s;
  }

 private:
  std::mutex mutex_;
  std::map<std::string, double> cache_;
};

}  // namespace oscar
