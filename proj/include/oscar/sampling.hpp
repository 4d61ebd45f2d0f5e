#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "oscar/error.hpp"
#include "oscar/random.hpp"

namespace oscar {

struct FrameRef {
  std::string session_id;
  std::int64_t index = 0;
  double t = 0.0;  // seconds
  std::string path;

  friend bool operator==(const FrameRef&, const FrameRef&) = default;
};

/// Half-open time window [start, end).
struct SegmentWindow {
  double start = 0.0;
  double end = 0.0;

  bool contains(double t) const noexcept { return t >= start && t < end; }
  double width() const noexcept { return end - start; }

  friend bool operator==(const SegmentWindow&, const SegmentWindow&) = default;
};

struct StepClip {
  int step = 0;
  double start = 0.0;
  double end = 0.0;

  friend bool operator==(const StepClip&, const StepClip&) = default;
};

/// Splits a clip into n contiguous equal windows covering [start, end).
inline std::vector<SegmentWindow> segment_step(const StepClip& clip, int n) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "segment count must be positive");
  if (!(clip.start < clip.end))
    throw Error(ErrorCode::InvalidArgument, "clip for step " + std::to_string(clip.step) + " is empty");
  std::vector<SegmentWindow> out;
  out.reserve(static_cast<std::size_t>(n));
  const double width = (clip.end - clip.start) / n;
  for (int i = 0; i < n; ++i) {
    const double s = i == 0 ? clip.start : out.back().end;
    const double e = i + 1 == n ? clip.end : clip.start + width * (i + 1);
    out.push_back({s, e});
  }
  return out;
}

/// Uniform choice among the frames whose timestamp lies in the window.
inline const FrameRef& sample_frame(const SegmentWindow& window, std::span<const FrameRef> frames,
                                    Rng& rng) {
  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < frames.size(); ++i)
    if (window.contains(frames[i].t)) candidates.push_back(i);
  if (candidates.empty())
    throw Error(ErrorCode::EmptyWindow, "no frame in [" + std::to_string(window.start) + ", " +
                                            std::to_string(window.end) + ")");
  return frames[candidates[rng.index(candidates.size())]];
}

/// Row-major grayscale image.
struct Raster {
  int width = 0;
  int height = 0;
  std::vector<float> pixels;

  float at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
};

/// Variance of the 4-neighbour Laplacian over the interior pixels.
inline double sharpness_score(const Raster& image) {
  if (image.width < 3 || image.height < 3)
    throw Error(ErrorCode::DegenerateImage,
                std::to_string(image.width) + "x" + std::to_string(image.height) + " raster");
  if (image.pixels.size() != static_cast<std::size_t>(image.width) * image.height)
    throw Error(ErrorCode::DegenerateImage, "pixel buffer does not match dimensions");
  double sum = 0.0, sum_sq = 0.0;
  std::size_t count = 0;
  for (int y = 1; y + 1 < image.height; ++y) {
    for (int x = 1; x + 1 < image.width; ++x) {
      const double lap = double(image.at(x - 1, y)) + image.at(x + 1, y) + image.at(x, y - 1) +
                         image.at(x, y + 1) - 4.0 * image.at(x, y);
      sum += lap;
      sum_sq += lap * lap;
      ++count;
    }
  }
  const double mean = sum / static_cast<double>(count);
  return std::max(0.0, sum_sq / static_cast<double>(count) - mean * mean);
}

using SharpnessFn = std::function<double(const FrameRef&)>;

/// Replaces a sampled frame with the sharpest frame whose index is within
/// radius of it. Ties go to the lowest index. Adjacency is by frame index and
/// may cross segment boundaries.
inline const FrameRef& select_sharpest_adjacent(const FrameRef& selected,
                                                std::span<const FrameRef> frames, int radius,
                                                const SharpnessFn& sharpness) {
  if (radius < 0) throw Error(ErrorCode::InvalidArgument, "blur radius must be >= 0");
  const FrameRef* self = nullptr;
  for (const auto& f : frames)
    if (f.index == selected.index) self = &f;
  if (self == nullptr)
    throw Error(ErrorCode::InvalidArgument,
                "selected frame " + std::to_string(selected.index) + " not in frame list");
  if (radius == 0) return *self;

  const FrameRef* best = nullptr;
  double best_score = 0.0;
  for (const auto& f : frames) {
    if (f.index < selected.index - radius || f.index > selected.index + radius) continue;
    const double s = sharpness(f);
    if (best == nullptr || s > best_score || (s == best_score && f.index < best->index)) {
      best = &f;
      best_score = s;
    }
  }
  return *best;
}

/// Frames and ground-truth step clips for one recorded session.
struct SessionManifest {
  std::string session_id;
  std::vector<FrameRef> frames;
  std::vector<StepClip> annotations;

  friend bool operator==(const SessionManifest&, const SessionManifest&) = default;
};

inline void check_manifest(const SessionManifest& m) {
  if (m.session_id.empty()) throw Error(ErrorCode::InvalidArgument, "manifest without session_id");
  for (std::size_t i = 0; i < m.frames.size(); ++i) {
    const auto& f = m.frames[i];
    if (f.index < 0 || f.t < 0.0)
      throw Error(ErrorCode::InvalidArgument, "negative frame index or timestamp");
    if (i > 0 && (f.index <= m.frames[i - 1].index || f.t < m.frames[i - 1].t))
      throw Error(ErrorCode::InvalidArgument,
                  "frames must have increasing index and non-decreasing timestamps (frame " +
                      std::to_string(f.index) + ")");
  }
  for (const auto& c : m.annotations)
    if (!(c.start < c.end) || c.step < 1)
      throw Error(ErrorCode::InvalidArgument, "bad annotation for step " + std::to_string(c.step));
}

inline void to_json(nlohmann::json& j, const StepClip& c) {
  j = nlohmann::json{{"step", c.step}, {"start", c.start}, {"end", c.end}};
}

inline void from_json(const nlohmann::json& j, StepClip& c) {
  j.at("step").get_to(c.step);
  j.at("start").get_to(c.start);
  j.at("end").get_to(c.end);
}

inline void to_json(nlohmann::json& j, const SessionManifest& m) {
  auto frames = nlohmann::json::array();
  for (const auto& f : m.frames) frames.push_back({{"index", f.index}, {"t", f.t}, {"path", f.path}});
  j = nlohmann::json{{"session_id", m.session_id}, {"frames", frames}, {"annotations", m.annotations}};
}

inline void from_json(const nlohmann::json& j, SessionManifest& m) {
  j.at("session_id").get_to(m.session_id);
  m.frames.clear();
  for (const auto& f : j.at("frames"))
    m.frames.push_back({m.session_id, f.at("index").get<std::int64_t>(), f.at("t").get<double>(),
                        f.at("path").get<std::string>()});
  j.at("annotations").get_to(m.annotations);
}

}  // namespace oscar
