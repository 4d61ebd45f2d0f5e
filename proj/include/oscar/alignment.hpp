#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "oscar/error.hpp"
#include "oscar/recipe.hpp"
#include "oscar/sampling.hpp"

namespace oscar {

enum class Mode { Baseline, Oscar };

inline std::string_view to_string(Mode m) { return m == Mode::Baseline ? "baseline" : "oscar"; }

inline Mode parse_mode(std::string_view s) {
  if (s == "baseline") return Mode::Baseline;
  if (s == "oscar") return Mode::Oscar;
  throw Error(ErrorCode::InvalidArgument, "unknown mode '" + std::string(s) + "'");
}

struct EmbeddingVector {
  std::vector<float> values;
  std::string model_id;

  std::size_t dim() const noexcept { return values.size(); }
  friend bool operator==(const EmbeddingVector&, const EmbeddingVector&) = default;
};

/// Source of text and image embeddings. Implementations must be deterministic
/// for fixed inputs and model id, preserve batch order, and be safe to call
/// from several threads.
class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;

  virtual std::size_t dimension() const = 0;
  virtual std::string model_id() const = 0;
  virtual std::vector<EmbeddingVector> embed_text(std::span<const std::string> texts) = 0;
  virtual EmbeddingVector embed_image(const FrameRef& frame) = 0;

  /// Optional direct scoring of a frame against query texts. When it returns
  /// a value, cosine over embeddings is bypassed for that frame.
  virtual std::optional<std::vector<double>> score(const FrameRef& frame,
                                                   std::span<const std::string> queries) {
    (void)frame;
    (void)queries;
    return std::nullopt;
  }
};

inline double similarity(const EmbeddingVector& a, const EmbeddingVector& b) {
  if (a.dim() != b.dim())
    throw Error(ErrorCode::DimensionMismatch,
                std::to_string(a.dim()) + " vs " + std::to_string(b.dim()));
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) {
    dot += double(a.values[i]) * b.values[i];
    na += double(a.values[i]) * a.values[i];
    nb += double(b.values[i]) * b.values[i];
  }
  if (na == 0.0 || nb == 0.0) throw Error(ErrorCode::ZeroVector, "cosine of a zero vector");
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

/// w * step + (1 - w) * status, elementwise.
inline std::vector<double> fuse(std::span<const double> step_scores,
                                std::span<const double> status_scores, double w = 0.5) {
  if (step_scores.size() != status_scores.size())
    throw Error(ErrorCode::LengthMismatch, std::to_string(step_scores.size()) + " vs " +
                                               std::to_string(status_scores.size()));
  if (!(w >= 0.0 && w <= 1.0)) throw Error(ErrorCode::InvalidArgument, "fusion weight outside [0,1]");
  std::vector<double> out(step_scores.size());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = w * step_scores[i] + (1.0 - w) * status_scores[i];
  return out;
}

/// Index of the largest element, lowest index on ties. Empty input -> 0.
inline std::size_t argmax(std::span<const double> v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] > v[best]) best = i;
  return best;
}

enum class StatusAggregation { Max, Mean };

struct AlignConfig {
  double fusion_weight = 0.5;
  StatusAggregation aggregation = StatusAggregation::Max;
};

struct FrameScores {
  FrameRef frame;
  std::vector<double> step_scores;
  std::vector<double> status_scores;
  std::vector<double> fused_scores;

  friend bool operator==(const FrameScores&, const FrameScores&) = default;
};

namespace detail {

struct QueryPlan {
  std::vector<std::string> queries;             // step texts first, then unique phrases
  std::vector<std::vector<std::size_t>> status; // per step: indices into queries
};

inline QueryPlan plan_queries(const Recipe& recipe, const StepStatusMap& statuses) {
  QueryPlan plan;
  plan.queries = recipe.steps;
  plan.status.resize(recipe.steps.size());
  const std::size_t n = recipe.steps.size();
  for (int i = 1; i <= recipe.size(); ++i) {
    for (const auto& st : statuses.at(i)) {
      const std::string phrase = st.phrase();
      std::size_t q = n;
      while (q < plan.queries.size() && plan.queries[q] != phrase) ++q;
      if (q == plan.queries.size()) plan.queries.push_back(phrase);
      plan.status[static_cast<std::size_t>(i - 1)].push_back(q);
    }
  }
  return plan;
}

}  // namespace detail

/// Scores one frame against every step text and every step's status phrases.
/// Steps without statuses reuse their step-text score as status score.
inline FrameScores score_frame(const FrameRef& frame, const Recipe& recipe,
                               const StepStatusMap& statuses, EmbeddingProvider& provider,
                               const AlignConfig& config = {}) {
  if (recipe.size() < 1) throw Error(ErrorCode::InvalidArgument, "recipe has no steps");
  const auto plan = detail::plan_queries(recipe, statuses);
  const std::string where = "frame " + frame.session_id + "#" + std::to_string(frame.index);

  std::vector<double> raw;
  try {
    if (auto direct = provider.score(frame, plan.queries)) {
      raw = std::move(*direct);
    } else {
      const EmbeddingVector image = provider.embed_image(frame);
      const auto texts = provider.embed_text(plan.queries);
      if (texts.size() != plan.queries.size())
        throw Error(ErrorCode::ProviderUnavailable, "provider returned wrong batch size");
      raw.reserve(texts.size());
      for (const auto& t : texts) raw.push_back(similarity(image, t));
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::DimensionMismatch || e.code() == ErrorCode::ZeroVector) throw;
    throw Error(ErrorCode::ProviderUnavailable,
                where + ": " + (e.code() == ErrorCode::ProviderUnavailable ? e.detail() : std::string(e.what())));
  } catch (const std::exception& e) {
    throw Error(ErrorCode::ProviderUnavailable, where + ": " + e.what());
  }
  if (raw.size() != plan.queries.size())
    throw Error(ErrorCode::ProviderUnavailable, where + ": score hook returned wrong length");
  for (double v : raw)
    if (!std::isfinite(v)) throw Error(ErrorCode::ProviderUnavailable, where + ": non-finite score");

  FrameScores out;
  out.frame = frame;
  const std::size_t n = recipe.steps.size();
  out.step_scores.assign(raw.begin(), raw.begin() + static_cast<std::ptrdiff_t>(n));
  out.status_scores.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& idx = plan.status[i];
    if (idx.empty()) {
      out.status_scores[i] = out.step_scores[i];
      continue;
    }
    double acc = config.aggregation == StatusAggregation::Max ? raw[idx.front()] : 0.0;
    for (std::size_t q : idx) {
      if (config.aggregation == StatusAggregation::Max)
        acc = std::max(acc, raw[q]);
      else
        acc += raw[q];
    }
    if (config.aggregation == StatusAggregation::Mean) acc /= static_cast<double>(idx.size());
    out.status_scores[i] = acc;
  }
  out.fused_scores = fuse(out.step_scores, out.status_scores, config.fusion_weight);
  return out;
}

/// Elementwise mean of fused scores (oscar) or step scores (baseline).
inline std::vector<double> average_over_frames(std::span<const FrameScores> batch, Mode mode) {
  if (batch.empty()) throw Error(ErrorCode::EmptyBatch, "no frames to average");
  auto pick = [mode](const FrameScores& f) -> const std::vector<double>& {
    return mode == Mode::Oscar ? f.fused_scores : f.step_scores;
  };
  std::vector<double> mean(pick(batch.front()).size(), 0.0);
  for (const auto& f : batch) {
    const auto& v = pick(f);
    if (v.size() != mean.size()) throw Error(ErrorCode::LengthMismatch, "frames disagree on N");
    for (std::size_t i = 0; i < v.size(); ++i) mean[i] += v[i];
  }
  for (auto& m : mean) m /= static_cast<double>(batch.size());
  return mean;
}

}  // namespace oscar
