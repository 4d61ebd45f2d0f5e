#pragma once

#include <optional>
#include <set>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "oscar/alignment.hpp"
#include "oscar/error.hpp"
#include "oscar/recipe.hpp"

namespace oscar {

struct PredictionLogEntry {
  int id = 0;
  std::vector<std::string> frames;
  std::vector<double> scores;
  int predicted_step = 0;
  std::string predicted_text;
  std::vector<int> completed;
  std::vector<int> missing;
  std::vector<int> remaining;
  Mode mode = Mode::Oscar;

  friend bool operator==(const PredictionLogEntry&, const PredictionLogEntry&) = default;
};

struct ProgressSnapshot {
  std::optional<int> current;
  std::set<int> completed;
  std::set<int> remaining;
  std::set<int> missing;

  friend bool operator==(const ProgressSnapshot&, const ProgressSnapshot&) = default;
};

/// Completion bookkeeping shared by the live state and by predict(), which
/// needs the post-update sets without copying the history.
struct Progress {
  int steps = 0;
  std::optional<int> current;
  std::set<int> completed;
  // A step is marked completed after `debounce` consecutive identical predictions.
  int debounce = 1;
  int streak_step = 0;
  int streak = 0;

  void apply(int predicted) {
    if (predicted == streak_step) {
      ++streak;
    } else {
      streak_step = predicted;
      streak = 1;
    }
    if (streak < debounce) return;
    completed.insert(predicted);
    // A gap fill below the frontier does not move it.
    if (!current || predicted >= *current) current = predicted;
  }

  ProgressSnapshot snapshot() const {
    ProgressSnapshot s;
    s.current = current;
    s.completed = completed;
    for (int i = 1; i <= steps; ++i) {
      if (completed.contains(i)) continue;
      if (!current || i > *current)
        s.remaining.insert(i);
      else if (i < *current)
        s.missing.insert(i);
    }
    return s;
  }

  friend bool operator==(const Progress&, const Progress&) = default;
};

/// One session's tracker: a single-writer state machine whose history only
/// grows. Copies are independent values.
class SessionState {
 public:
  explicit SessionState(Recipe recipe, int debounce = 1) : recipe_(std::move(recipe)) {
    check_recipe(recipe_, ErrorCode::InvalidArgument);
    if (debounce < 1) throw Error(ErrorCode::InvalidArgument, "debounce must be >= 1");
    progress_.steps = recipe_.size();
    progress_.debounce = debounce;
  }

  int steps() const noexcept { return progress_.steps; }
  const Recipe& recipe() const noexcept { return recipe_; }
  const Progress& progress() const noexcept { return progress_; }
  std::optional<int> current() const noexcept { return progress_.current; }
  const std::set<int>& completed() const noexcept { return progress_.completed; }
  const std::vector<PredictionLogEntry>& history() const noexcept { return history_; }
  int debounce() const noexcept { return progress_.debounce; }

  friend SessionState update_state(SessionState state, const PredictionLogEntry& entry);

  friend bool operator==(const SessionState&, const SessionState&) = default;

 private:
  Recipe recipe_;
  Progress progress_;
  std::vector<PredictionLogEntry> history_;
};

/// Every step except already-completed steps strictly before the current
/// one. The current step stays admissible.
inline std::set<int> admissible_steps(const SessionState& state) {
  std::set<int> out;
  const auto cur = state.current();
  for (int i = 1; i <= state.steps(); ++i) {
    if (cur && i < *cur && state.completed().contains(i)) continue;
    out.insert(i);
  }
  return out;
}

inline ProgressSnapshot progress_snapshot(const SessionState& state) { return state.progress().snapshot(); }

/// Picks a step for one averaged score vector. Oscar mode restricts the
/// argmax to admissible steps; baseline mode takes the plain argmax. Ties go
/// to the lowest index. The returned entry records progress after the pick.
inline PredictionLogEntry predict(std::span<const double> scores, const SessionState& state, Mode mode,
                                  std::vector<std::string> frames = {}) {
  if (static_cast<int>(scores.size()) != state.steps())
    throw Error(ErrorCode::LengthMismatch, "score vector has " + std::to_string(scores.size()) +
                                               " entries for " + std::to_string(state.steps()) +
                                               " steps");
  for (double s : scores)
    if (!std::isfinite(s)) throw Error(ErrorCode::InvalidArgument, "non-finite score");

  int predicted = 0;
  if (mode == Mode::Baseline) {
    predicted = static_cast<int>(argmax(scores)) + 1;
  } else {
    for (int i : admissible_steps(state))
      if (predicted == 0 || scores[static_cast<std::size_t>(i - 1)] >
                                scores[static_cast<std::size_t>(predicted - 1)])
        predicted = i;
  }

  Progress next = state.progress();
  next.apply(predicted);
  const auto snap = next.snapshot();

  PredictionLogEntry e;
  e.id = static_cast<int>(state.history().size()) + 1;
  e.frames = std::move(frames);
  e.scores.assign(scores.begin(), scores.end());
  e.predicted_step = predicted;
  e.predicted_text = state.recipe().step(predicted);
  e.completed.assign(snap.completed.begin(), snap.completed.end());
  e.missing.assign(snap.missing.begin(), snap.missing.end());
  e.remaining.assign(snap.remaining.begin(), snap.remaining.end());
  e.mode = mode;
  return e;
}

inline SessionState update_state(SessionState state, const PredictionLogEntry& entry) {
  if (!state.recipe_.has_step(entry.predicted_step))
    throw Error(ErrorCode::UnknownStep, "predicted step " + std::to_string(entry.predicted_step));
  state.progress_.apply(entry.predicted_step);
  state.history_.push_back(entry);
  return state;
}

/// predict + update_state on a live session.
inline const PredictionLogEntry& observe(SessionState& state, std::span<const double> scores, Mode mode,
                                         std::vector<std::string> frames = {}) {
  auto entry = predict(scores, state, mode, std::move(frames));
  state = update_state(std::move(state), entry);
  return state.history().back();
}

/// Rebuilds a state from its log entries, checking that each entry's
/// recorded progress matches what the tracker derives.
inline SessionState replay(const Recipe& recipe, std::span<const PredictionLogEntry> entries,
                           int debounce = 1) {
  SessionState state(recipe, debounce);
  for (const auto& e : entries) {
    state = update_state(std::move(state), e);
    const auto snap = progress_snapshot(state);
    auto same = [](const std::set<int>& a, const std::vector<int>& b) {
      return std::equal(a.begin(), a.end(), b.begin(), b.end());
    };
    if (!same(snap.completed, e.completed) || !same(snap.missing, e.missing) ||
        !same(snap.remaining, e.remaining))
      throw Error(ErrorCode::MalformedDocument,
                  "log entry " + std::to_string(e.id) + " progress disagrees with replay");
  }
  return state;
}

/// On-disk form of one session's prediction history.
struct HistoryLog {
  std::string session_id;
  Mode mode = Mode::Oscar;
  Recipe recipe;
  std::vector<PredictionLogEntry> entries;
  int debounce = 1;
  std::optional<int> trial;

  friend bool operator==(const HistoryLog&, const HistoryLog&) = default;
};

inline HistoryLog make_log(std::string session_id, Mode mode, const SessionState& state,
                           std::optional<int> trial = std::nullopt) {
  return HistoryLog{std::move(session_id), mode, state.recipe(), state.history(), state.debounce(), trial};
}

inline SessionState replay(const HistoryLog& log) { return replay(log.recipe, log.entries, log.debounce); }

// ---------------------------------------------------------------------------
// Structured queries

struct Query {
  enum class Kind { Current, Completed, Remaining, Missing, IsDone };
  Kind kind = Kind::Current;
  int step = 0;
};

using QueryAnswer = std::variant<std::optional<int>, std::vector<int>, bool>;

inline Query parse_query(std::string_view q) {
  if (q == "current") return {Query::Kind::Current, 0};
  if (q == "completed") return {Query::Kind::Completed, 0};
  if (q == "remaining") return {Query::Kind::Remaining, 0};
  if (q == "missing") return {Query::Kind::Missing, 0};
  if (q.starts_with("is_done:")) {
    const std::string num(q.substr(8));
    std::size_t used = 0;
    int step = 0;
    try {
      step = std::stoi(num, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == num.size() && used > 0) return {Query::Kind::IsDone, step};
  }
  throw Error(ErrorCode::InvalidArgument,
              "unknown query '" + std::string(q) +
                  "' (expected current|completed|remaining|missing|is_done:<step>)");
}

inline QueryAnswer query(const SessionState& state, const Query& q) {
  const auto snap = progress_snapshot(state);
  auto list = [](const std::set<int>& s) { return std::vector<int>(s.begin(), s.end()); };
  switch (q.kind) {
    case Query::Kind::Current: return snap.current;
    case Query::Kind::Completed: return list(snap.completed);
    case Query::Kind::Remaining: return list(snap.remaining);
    case Query::Kind::Missing: return list(snap.missing);
    case Query::Kind::IsDone:
      if (q.step < 1 || q.step > state.steps())
        throw Error(ErrorCode::UnknownStep, "step " + std::to_string(q.step) + " of " +
                                                std::to_string(state.steps()));
      return snap.completed.contains(q.step);
  }
  return false;
}

inline std::string render(const QueryAnswer& a) {
  struct Visitor {
    std::string operator()(const std::optional<int>& v) const { return v ? std::to_string(*v) : "none"; }
    std::string operator()(const std::vector<int>& v) const {
      std::string out = "[";
      for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + std::to_string(v[i]);
      return out + "]";
    }
    std::string operator()(bool b) const { return b ? "true" : "false"; }
  };
  return std::visit(Visitor{}, a);
}

inline nlohmann::json answer_json(const QueryAnswer& a) {
  struct Visitor {
    nlohmann::json operator()(const std::optional<int>& v) const { return v ? nlohmann::json(*v) : nlohmann::json(); }
    nlohmann::json operator()(const std::vector<int>& v) const { return v; }
    nlohmann::json operator()(bool b) const { return b; }
  };
  return std::visit(Visitor{}, a);
}

}  // namespace oscar
