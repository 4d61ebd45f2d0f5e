#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <set>
#include <thread>
#include <tuple>
#include <vector>

#include "oscar/alignment.hpp"
#include "oscar/random.hpp"
#include "oscar/recipe.hpp"
#include "oscar/sampling.hpp"
#include "oscar/tracker.hpp"

namespace oscar {

struct AnnotatedSession {
  SessionManifest manifest;
  Recipe recipe;
  StepStatusMap statuses;

  const std::string& id() const noexcept { return manifest.session_id; }

  friend bool operator==(const AnnotatedSession&, const AnnotatedSession&) = default;
};

inline void check_session(const AnnotatedSession& s) {
  check_manifest(s.manifest);
  check_recipe(s.recipe, ErrorCode::InvalidArgument);
  check_status_map(s.statuses, s.recipe, ErrorCode::InvalidArgument);
  std::set<int> seen;
  for (const auto& c : s.manifest.annotations) {
    if (!s.recipe.has_step(c.step))
      throw Error(ErrorCode::UnknownStep, s.id() + ": annotation for step " + std::to_string(c.step) +
                                              " of a " + std::to_string(s.recipe.size()) +
                                              "-step recipe");
    if (!seen.insert(c.step).second)
      throw Error(ErrorCode::InvalidArgument, s.id() + ": step " + std::to_string(c.step) +
                                                  " annotated twice");
  }
}

struct EvalConfig {
  std::uint64_t seed = 0;
  int trials = 3;
  int segments = 5;
  int blur_radius = 2;
  AlignConfig align;
  int debounce = 1;
  bool sample_sd = false;
  int jobs = 1;
};

struct TrialResult {
  std::string video_id;
  int step = 0;
  int trial = 0;
  Mode mode = Mode::Baseline;
  int predicted = 0;
  bool correct = false;

  friend bool operator==(const TrialResult&, const TrialResult&) = default;
};

struct ModeSummary {
  double mean = 0.0;
  double sd = 0.0;
  friend bool operator==(const ModeSummary&, const ModeSummary&) = default;
};

struct StepAccuracy {
  int step = 0;
  std::map<Mode, double> accuracy;
  friend bool operator==(const StepAccuracy&, const StepAccuracy&) = default;
};

struct VideoAccuracy {
  std::string video_id;
  std::map<Mode, double> accuracy;
  std::vector<StepAccuracy> steps;
  friend bool operator==(const VideoAccuracy&, const VideoAccuracy&) = default;
};

struct AccuracyReport {
  std::string model;
  std::uint64_t seed = 0;
  bool sample_sd = false;
  std::vector<Mode> modes;
  std::vector<VideoAccuracy> videos;
  std::map<Mode, ModeSummary> summary;
  std::optional<double> delta;  // oscar mean - baseline mean
  std::vector<TrialResult> trials;

  friend bool operator==(const AccuracyReport&, const AccuracyReport&) = default;
};

/// Frames for one (step, trial) cell: one random frame per equal segment of
/// the step clip, each swapped for the sharpest frame within blur_radius.
inline std::vector<FrameRef> sample_step_frames(const AnnotatedSession& session, const StepClip& clip,
                                                int trial, const EvalConfig& config,
                                                const SharpnessFn& sharpness) {
  Rng rng = trial_stream(config.seed, session.id(), clip.step, trial);
  std::vector<FrameRef> picked;
  const auto& frames = session.manifest.frames;
  for (const auto& window : segment_step(clip, config.segments)) {
    const FrameRef& f = sample_frame(window, frames, rng);
    picked.push_back(config.blur_radius > 0
                         ? select_sharpest_adjacent(f, frames, config.blur_radius, sharpness)
                         : f);
  }
  return picked;
}

/// Per-session memo of frame scores; scoring is deterministic so a frame
/// drawn by several trials or modes is scored once.
class FrameScoreCache {
 public:
  FrameScoreCache(const AnnotatedSession& session, EmbeddingProvider& provider, AlignConfig config)
      : session_(session), provider_(provider), config_(config) {}

  const FrameScores& get(const FrameRef& frame) {
    auto it = cache_.find(frame.index);
    if (it != cache_.end()) return it->second;
    return cache_.emplace(frame.index, score_frame(frame, session_.recipe, session_.statuses, provider_, config_))
        .first->second;
  }

 private:
  const AnnotatedSession& session_;
  EmbeddingProvider& provider_;
  AlignConfig config_;
  std::map<std::int64_t, FrameScores> cache_;
};

/// Runs one (step, trial) cell against a caller-owned tracker state, which is
/// advanced by the prediction.
inline TrialResult run_step_trial(const AnnotatedSession& session, const StepClip& clip, int trial,
                                  Mode mode, FrameScoreCache& scores, const EvalConfig& config,
                                  const SharpnessFn& sharpness, SessionState& state) {
  try {
    const auto frames = sample_step_frames(session, clip, trial, config, sharpness);
    std::vector<FrameScores> batch;
    std::vector<std::string> paths;
    for (const auto& f : frames) {
      batch.push_back(scores.get(f));
      paths.push_back(f.path);
    }
    const auto avg = average_over_frames(batch, mode);
    const auto& entry = observe(state, avg, mode, std::move(paths));
    return TrialResult{session.id(), clip.step, trial, mode, entry.predicted_step,
                       entry.predicted_step == clip.step};
  } catch (const Error& e) {
    throw Error(e.code(), session.id() + " step " + std::to_string(clip.step) + " trial " +
                              std::to_string(trial) + ": " + e.detail());
  }
}

/// Single cell on a fresh tracker.
inline TrialResult run_step_trial(const AnnotatedSession& session, int step, int trial, Mode mode,
                                  EmbeddingProvider& provider, const EvalConfig& config,
                                  const SharpnessFn& sharpness) {
  auto it = std::find_if(session.manifest.annotations.begin(), session.manifest.annotations.end(),
                         [step](const StepClip& c) { return c.step == step; });
  if (it == session.manifest.annotations.end())
    throw Error(ErrorCode::UnknownStep, session.id() + ": step " + std::to_string(step) + " not annotated");
  FrameScoreCache cache(session, provider, config.align);
  SessionState state(session.recipe, config.debounce);
  return run_step_trial(session, *it, trial, mode, cache, config, sharpness, state);
}

/// 100 for a correct trial, 0 otherwise, averaged over the trials of one step.
inline double step_accuracy(std::span<const TrialResult> trials, int expected = 3) {
  if (static_cast<int>(trials.size()) != expected)
    throw Error(ErrorCode::WrongArity, "expected " + std::to_string(expected) + " trials, got " +
                                           std::to_string(trials.size()));
  std::set<int> numbers;
  for (const auto& t : trials) {
    if (t.video_id != trials.front().video_id || t.step != trials.front().step ||
        t.mode != trials.front().mode)
      throw Error(ErrorCode::WrongArity, "trials mix different (video, step, mode) cells");
    numbers.insert(t.trial);
  }
  if (static_cast<int>(numbers.size()) != expected || *numbers.begin() != 1 ||
      *numbers.rbegin() != expected)
    throw Error(ErrorCode::WrongArity, "trial numbers must be 1.." + std::to_string(expected));
  double sum = 0.0;
  for (const auto& t : trials) sum += t.correct ? 100.0 : 0.0;
  return sum / static_cast<double>(expected);
}

inline ModeSummary mean_sd(std::span<const double> values, bool sample) {
  ModeSummary s;
  if (values.empty()) return s;
  for (double v : values) s.mean += v;
  s.mean /= static_cast<double>(values.size());
  if (values.size() < 2) return s;
  double ss = 0.0;
  for (double v : values) ss += (v - s.mean) * (v - s.mean);
  s.sd = std::sqrt(ss / static_cast<double>(sample ? values.size() - 1 : values.size()));
  return s;
}

/// Per-step, per-video and corpus accuracy from raw trial results. Input
/// order does not matter.
inline AccuracyReport aggregate(std::vector<TrialResult> results, int trials = 3, bool sample_sd = false) {
  if (results.empty()) throw Error(ErrorCode::EmptyCorpus, "no trial results");
  std::sort(results.begin(), results.end(), [](const TrialResult& a, const TrialResult& b) {
    return std::tie(a.video_id, a.step, a.mode, a.trial) < std::tie(b.video_id, b.step, b.mode, b.trial);
  });

  AccuracyReport report;
  report.sample_sd = sample_sd;
  std::set<Mode> modes;
  for (const auto& r : results) modes.insert(r.mode);
  report.modes.assign(modes.begin(), modes.end());

  std::map<Mode, std::vector<double>> per_video;
  for (std::size_t i = 0; i < results.size();) {
    VideoAccuracy video{results[i].video_id, {}, {}};
    std::map<Mode, std::pair<double, int>> sums;
    while (i < results.size() && results[i].video_id == video.video_id) {
      StepAccuracy step{results[i].step, {}};
      while (i < results.size() && results[i].video_id == video.video_id &&
             results[i].step == step.step) {
        std::size_t j = i;
        while (j < results.size() && results[j].video_id == video.video_id &&
               results[j].step == step.step && results[j].mode == results[i].mode)
          ++j;
        const double acc = step_accuracy(std::span(results).subspan(i, j - i), trials);
        step.accuracy[results[i].mode] = acc;
        sums[results[i].mode].first += acc;
        sums[results[i].mode].second += 1;
        i = j;
      }
      video.steps.push_back(std::move(step));
    }
    for (const auto& [mode, sum] : sums) {
      video.accuracy[mode] = sum.first / sum.second;
      per_video[mode].push_back(video.accuracy[mode]);
    }
    report.videos.push_back(std::move(video));
  }
  for (const auto& [mode, values] : per_video) report.summary[mode] = mean_sd(values, sample_sd);
  if (report.summary.contains(Mode::Baseline) && report.summary.contains(Mode::Oscar))
    report.delta = report.summary[Mode::Oscar].mean - report.summary[Mode::Baseline].mean;
  report.trials = std::move(results);
  return report;
}

struct SessionOutcome {
  std::vector<TrialResult> trials;
  std::vector<HistoryLog> logs;  // one per (mode, trial)
};

/// All trials of one session. Each (mode, trial) gets a fresh tracker and
/// walks the annotated steps in order; both modes see the same frames.
inline SessionOutcome run_session(const AnnotatedSession& session, EmbeddingProvider& provider,
                                  const EvalConfig& config, std::span<const Mode> modes,
                                  const SharpnessFn& sharpness) {
  check_session(session);
  SessionOutcome out;
  FrameScoreCache cache(session, provider, config.align);
  for (Mode mode : modes) {
    for (int trial = 1; trial <= config.trials; ++trial) {
      SessionState state(session.recipe, config.debounce);
      for (const auto& clip : session.manifest.annotations)
        out.trials.push_back(run_step_trial(session, clip, trial, mode, cache, config, sharpness, state));
      out.logs.push_back(make_log(session.id(), mode, state, trial));
    }
  }
  return out;
}

struct CorpusOutcome {
  AccuracyReport report;
  std::vector<HistoryLog> logs;
};

/// Evaluates every session, `config.jobs` sessions at a time. Results are
/// gathered by session position, so scheduling never changes the output.
inline CorpusOutcome run_corpus(std::span<const AnnotatedSession> sessions, EmbeddingProvider& provider,
                                const EvalConfig& config, std::span<const Mode> modes,
                                const SharpnessFn& sharpness) {
  if (sessions.empty()) throw Error(ErrorCode::EmptyCorpus, "corpus has no sessions");
  if (config.trials < 1 || config.segments < 1 || config.blur_radius < 0 || config.debounce < 1)
    throw Error(ErrorCode::InvalidArgument, "invalid evaluation config");
  std::vector<SessionOutcome> outcomes(sessions.size());
  std::vector<std::exception_ptr> errors(sessions.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < sessions.size(); i = next++) {
      try {
        outcomes[i] = run_session(sessions[i], provider, config, modes, sharpness);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int jobs = std::max(1, std::min<int>(config.jobs, static_cast<int>(sessions.size())));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  CorpusOutcome out;
  std::vector<TrialResult> all;
  for (auto& o : outcomes) {
    all.insert(all.end(), o.trials.begin(), o.trials.end());
    for (auto& l : o.logs) out.logs.push_back(std::move(l));
  }
  out.report = aggregate(std::move(all), config.trials, config.sample_sd);
  out.report.model = provider.model_id();
  out.report.seed = config.seed;
  return out;
}

}  // namespace oscar
