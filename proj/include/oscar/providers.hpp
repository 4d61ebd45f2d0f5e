#pragma once

#include <atomic>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "oscar/alignment.hpp"
#include "oscar/digest.hpp"
#include "oscar/random.hpp"

namespace oscar {

inline std::string frame_key(const FrameRef& f) { return f.session_id + "#" + std::to_string(f.index); }

/// Hash-seeded unit vectors. Carries no semantics; used to exercise the
/// pipeline without model weights.
class MockProvider final : public EmbeddingProvider {
 public:
  explicit MockProvider(std::size_t dim = 64) : dim_(dim) {}

  std::size_t dimension() const override { return dim_; }
  std::string model_id() const override { return "mock-" + std::to_string(dim_); }

  std::vector<EmbeddingVector> embed_text(std::span<const std::string> texts) override {
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (const auto& t : texts) out.push_back(unit_vector("text\x1f" + t));
    return out;
  }

  // Keyed by image content when the file exists, so results do not depend on
  // where a corpus is stored; otherwise by session and frame index.
  EmbeddingVector embed_image(const FrameRef& frame) override {
    auto bytes = frame.path.empty() ? std::nullopt : read_file_bytes(frame.path);
    return unit_vector("image\x1f" + (bytes ? sha256_hex(*bytes) : frame_key(frame)));
  }

 private:
  EmbeddingVector unit_vector(const std::string& content) const {
    Rng rng(fnv1a(model_id() + "\x1f" + content));
    EmbeddingVector v{std::vector<float>(dim_), model_id()};
    double norm = 0.0;
    for (auto& x : v.values) {
      x = static_cast<float>(rng.normal(0.0, 1.0));
      norm += double(x) * x;
    }
    norm = std::sqrt(norm);
    for (auto& x : v.values) x = static_cast<float>(x / norm);
    return v;
  }

  std::size_t dim_;
};

/// Score table provider for synthetic sessions: frame -> query text -> score.
/// Answers only through the scoring hook.
class OracleProvider final : public EmbeddingProvider {
 public:
  using QueryScores = std::map<std::string, double>;

  std::size_t dimension() const override { return 0; }
  std::string model_id() const override { return "oracle"; }

  std::vector<EmbeddingVector> embed_text(std::span<const std::string>) override {
    throw Error(ErrorCode::ProviderUnavailable, "oracle provider only scores frames");
  }
  EmbeddingVector embed_image(const FrameRef&) override {
    throw Error(ErrorCode::ProviderUnavailable, "oracle provider only scores frames");
  }

  std::optional<std::vector<double>> score(const FrameRef& frame,
                                           std::span<const std::string> queries) override {
    auto it = table_.find(frame_key(frame));
    if (it == table_.end())
      throw Error(ErrorCode::ProviderUnavailable, "no oracle scores for " + frame_key(frame));
    std::vector<double> out;
    out.reserve(queries.size());
    for (const auto& q : queries) {
      auto s = it->second.find(q);
      if (s == it->second.end())
        throw Error(ErrorCode::ProviderUnavailable,
                    "no oracle score for '" + q + "' at " + frame_key(frame));
      out.push_back(s->second);
    }
    return out;
  }

  void set(const FrameRef& frame, const std::string& query, double score) {
    table_[frame_key(frame)][query] = score;
  }

  // Merges another table in (used to pool per-session tables for a corpus).
  void merge(const OracleProvider& other) {
    for (const auto& [k, v] : other.table_) table_[k] = v;
  }

  const std::map<std::string, QueryScores>& table() const noexcept { return table_; }
  std::map<std::string, QueryScores>& table() noexcept { return table_; }

 private:
  std::map<std::string, QueryScores> table_;
};

/// Decorator that memoizes embeddings by (model id, content hash), optionally
/// persisted as a JSON-lines file. Concurrent reads share a lock; identical
/// keys may be written twice, which is harmless because values are
/// deterministic.
class CachedProvider final : public EmbeddingProvider {
 public:
  explicit CachedProvider(EmbeddingProvider& inner, std::string file = {})
      : inner_(inner), file_(std::move(file)) {
    if (!file_.empty()) load();
  }

  std::size_t dimension() const override { return inner_.dimension(); }
  std::string model_id() const override { return inner_.model_id(); }

  std::vector<EmbeddingVector> embed_text(std::span<const std::string> texts) override {
    std::vector<EmbeddingVector> out(texts.size());
    std::vector<std::string> missing;
    std::vector<std::size_t> slots;
    for (std::size_t i = 0; i < texts.size(); ++i) {
      if (auto hit = lookup(key("text", texts[i])))
        out[i] = std::move(*hit);
      else {
        missing.push_back(texts[i]);
        slots.push_back(i);
      }
    }
    if (!missing.empty()) {
      auto fresh = inner_.embed_text(missing);
      if (fresh.size() != missing.size())
        throw Error(ErrorCode::ProviderUnavailable, "provider returned wrong batch size");
      for (std::size_t j = 0; j < fresh.size(); ++j) {
        store(key("text", missing[j]), fresh[j]);
        out[slots[j]] = std::move(fresh[j]);
      }
    }
    return out;
  }

  EmbeddingVector embed_image(const FrameRef& frame) override {
    auto bytes = read_file_bytes(frame.path);
    const std::string k = key("image", bytes ? *bytes : frame_key(frame));
    if (auto hit = lookup(k)) return *hit;
    auto v = inner_.embed_image(frame);
    store(k, v);
    return v;
  }

  std::optional<std::vector<double>> score(const FrameRef& frame,
                                           std::span<const std::string> queries) override {
    return inner_.score(frame, queries);
  }

  std::size_t hits() const noexcept { return hits_; }
  std::size_t size() const {
    std::shared_lock lock(mutex_);
    return entries_.size();
  }

 private:
  std::string key(std::string_view kind, std::string_view content) const {
    return inner_.model_id() + ":" + std::string(kind) + ":" +
           sha256_hex(content);
  }

  std::optional<EmbeddingVector> lookup(const std::string& k) {
    std::shared_lock lock(mutex_);
    auto it = entries_.find(k);
    if (it == entries_.end()) return std::nullopt;
    ++hits_;
    return it->second;
  }

  void store(const std::string& k, const EmbeddingVector& v) {
    std::unique_lock lock(mutex_);
    if (!entries_.emplace(k, v).second) return;
    if (file_.empty()) return;
    std::ofstream out(file_, std::ios::app);
    out << nlohmann::json{{"key", k}, {"model", v.model_id}, {"values", v.values}}.dump() << '\n';
  }

  void load() {
    std::ifstream in(file_);
    for (std::string line; std::getline(in, line);) {
      if (line.empty()) continue;
      auto j = nlohmann::json::parse(line, nullptr, false);
      // A torn trailing line from an interrupted run is skipped.
      if (j.is_discarded() || !j.contains("key")) continue;
      entries_[j["key"].get<std::string>()] =
          EmbeddingVector{j["values"].get<std::vector<float>>(), j["model"].get<std::string>()};
    }
  }

  EmbeddingProvider& inner_;
  std::string file_;
  mutable std::shared_mutex mutex_;
  std::unordered_map<std::string, EmbeddingVector> entries_;
  std::atomic<std::size_t> hits_{0};
};

}  // namespace oscar
