#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <cmath>
#include <cstdio>
#include <memory>
#include <numeric>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "oscar/eval.hpp"
#include "oscar/providers.hpp"
#include "oscar/random.hpp"
#include "oscar/recipe.hpp"
#include "oscar/sampling.hpp"

namespace oscar {

/// Score-level confounders for synthetic sessions.
struct NoiseConfig {
  // Probability that a frame's step-text scores lose the truth and become a
  // flat band of high scores (wide view with every ingredient in shot).
  double clutter = 0.0;
  // Number of steps whose text and statuses duplicate an earlier step.
  int repeat_steps = 0;
  // Probability that a status of the previous step stays as salient as the
  // current one (pre-prepared ingredient still in view).
  double linger = 0.0;
  // Strength of the true status match, 0 = indistinguishable, 1 = clean.
  double signal = 1.0;
  // Standard deviation of gaussian noise added to every score.
  double jitter = 0.0;

  auto key() const { return std::tie(clutter, repeat_steps, linger, signal, jitter); }
  friend bool operator==(const NoiseConfig&, const NoiseConfig&) = default;
  friend bool operator<(const NoiseConfig& a, const NoiseConfig& b) { return a.key() < b.key(); }
};

inline void check_noise(const NoiseConfig& n) {
  auto prob = [](double p) { return p >= 0.0 && p <= 1.0; };
  if (!prob(n.clutter) || !prob(n.linger) || !prob(n.signal))
    throw Error(ErrorCode::InvalidArgument, "noise probabilities and signal must lie in [0,1]");
  if (!(n.jitter >= 0.0)) throw Error(ErrorCode::InvalidArgument, "jitter must be >= 0");
  if (n.repeat_steps < 0) throw Error(ErrorCode::InvalidArgument, "repeat_steps must be >= 0");
}

namespace sim {

// Score bands. Clean step text: truth at kTextTruth, others in kTextOther.
// Cluttered frames: every step text in kTextClutter. Status: the visible
// truth phrase at kStatusFloor + kStatusGain * signal, others in kStatusOther.
inline constexpr double kTextTruth = 0.70;
inline constexpr double kTextOther[2] = {0.20, 0.50};
inline constexpr double kTextClutter[2] = {0.55, 0.80};
inline constexpr double kStatusFloor = 0.25;
inline constexpr double kStatusGain = 0.50;
inline constexpr double kStatusOther[2] = {0.10, 0.35};
inline constexpr int kImageSize = 8;

inline const std::vector<std::string>& verbs() {
  static const std::vector<std::string> v{
      "chop",  "dice",   "slice", "peel",   "mince",  "grate", "whisk",  "mash",  "rinse", "wash",
      "boil",  "fry",    "roast", "toast",  "melt",   "stir",  "season", "drain", "crush", "blend",
      "knead", "squeeze", "trim", "marinate", "steam", "grill", "bake",  "shred", "toss",  "sear"};
  return v;
}

inline const std::vector<std::string>& ingredients() {
  static const std::vector<std::string> v{
      "carrots",  "onions",   "potatoes", "tomatoes", "garlic",  "eggs",     "mushrooms",
      "peppers",  "zucchini", "cabbage",  "spinach",  "cheese",  "butter",   "chicken",
      "beef",     "tofu",     "rice",     "noodles",  "beans",   "lemons",   "apples",
      "cucumber", "celery",   "ginger",   "shrimp",   "bread",   "avocados", "broccoli",
      "corn",     "salmon",   "lettuce",  "leeks"};
  return v;
}

inline std::string capitalize(std::string s) {
  if (!s.empty()) s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
  return s;
}

}  // namespace sim

struct SyntheticSession {
  AnnotatedSession session;
  std::vector<int> truth;            // ground-truth step per frame, by position
  std::vector<Raster> images;        // per frame, by position
  std::vector<double> sharpness;     // sharpness_score(images[i])
  OracleProvider oracle;
};

/// Builds one synthetic session: a recipe of n_steps distinct steps (minus
/// configured repeats), one clip of frames_per_step one-second frames per
/// step, and an oracle score table realizing the noise. Every random
/// component draws from its own substream so that changing one noise knob
/// leaves the other draws untouched.
inline SyntheticSession generate_session(int n_steps, int frames_per_step, const NoiseConfig& noise,
                                         const Rng& rng, std::string session_id) {
  if (n_steps < 1) throw Error(ErrorCode::InvalidArgument, "n_steps must be >= 1");
  if (frames_per_step < 5) throw Error(ErrorCode::InvalidArgument, "frames_per_step must be >= 5");
  check_noise(noise);

  SyntheticSession out;
  auto& recipe = out.session.recipe;
  recipe.title = "Synthetic recipe " + session_id;

  // Recipe: each original step uses (verb, ingredient) pairs never used by
  // another step, so no two distinct steps share a status phrase.
  Rng recipe_rng = rng.derive("recipe");
  std::vector<std::size_t> ing_order(sim::ingredients().size());
  std::iota(ing_order.begin(), ing_order.end(), 0);
  std::shuffle(ing_order.begin(), ing_order.end(), recipe_rng.engine());
  std::set<std::pair<std::string, std::string>> used;
  std::set<std::string> used_ingredients;

  // Duplicate positions: dup - orig >= 2 so the frontier has moved past orig.
  std::map<int, int> duplicate_of;
  {
    Rng rep = rng.derive("repeats");
    std::vector<int> candidates;
    for (int s = 3; s <= n_steps; ++s) candidates.push_back(s);
    std::shuffle(candidates.begin(), candidates.end(), rep.engine());
    for (int s : candidates) {
      if (static_cast<int>(duplicate_of.size()) >= noise.repeat_steps) break;
      // Each origin is duplicated once, and a duplicate is never an origin.
      auto is_origin = [&](int o) {
        return std::any_of(duplicate_of.begin(), duplicate_of.end(), [o](const auto& d) { return d.second == o; });
      };
      if (is_origin(s)) continue;
      std::vector<int> origins;
      for (int o = 1; o <= s - 2; ++o)
        if (!duplicate_of.contains(o) && !is_origin(o)) origins.push_back(o);
      if (origins.empty()) continue;
      duplicate_of[s] = origins[rep.index(origins.size())];
    }
    if (static_cast<int>(duplicate_of.size()) < noise.repeat_steps)
      throw Error(ErrorCode::InvalidArgument, "cannot place " + std::to_string(noise.repeat_steps) +
                                                  " repeated steps in " + std::to_string(n_steps) +
                                                  " steps");
  }

  std::size_t next_ing = 0;
  for (int s = 1; s <= n_steps; ++s) {
    if (auto d = duplicate_of.find(s); d != duplicate_of.end()) {
      recipe.steps.push_back(recipe.steps[static_cast<std::size_t>(d->second - 1)]);
      continue;
    }
    const int clauses = 1 + static_cast<int>(recipe_rng.index(2));
    std::string text;
    for (int c = 0; c < clauses; ++c) {
      const std::string& ing = sim::ingredients()[ing_order[next_ing++ % ing_order.size()]];
      std::string verb;
      do {
        verb = sim::verbs()[recipe_rng.index(sim::verbs().size())];
      } while (used.contains({verb, ing}));
      used.insert({verb, ing});
      if (used_ingredients.insert(ing).second) recipe.ingredients.push_back({ing, std::nullopt});
      text += c == 0 ? sim::capitalize(verb) + " the " + ing : " and " + verb + " the " + ing;
    }
    recipe.steps.push_back(text + ".");
  }
  std::sort(recipe.ingredients.begin(), recipe.ingredients.end(),
            [](const Ingredient& a, const Ingredient& b) { return a.name < b.name; });
  out.session.statuses = extract_object_statuses(recipe);

  // Manifest: frame i at t = i seconds; step s covers [(s-1)F, sF).
  auto& manifest = out.session.manifest;
  manifest.session_id = std::move(session_id);
  const int total = n_steps * frames_per_step;
  for (int i = 0; i < total; ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "frames/%06d.pgm", i);
    manifest.frames.push_back({manifest.session_id, i, static_cast<double>(i), name});
    out.truth.push_back(i / frames_per_step + 1);
  }
  for (int s = 1; s <= n_steps; ++s)
    manifest.annotations.push_back(
        {s, static_cast<double>((s - 1) * frames_per_step), static_cast<double>(s * frames_per_step)});

  // Unique queries per step.
  std::vector<std::string> texts = recipe.steps;
  std::vector<std::vector<std::string>> phrases(static_cast<std::size_t>(n_steps));
  for (int s = 1; s <= n_steps; ++s)
    for (const auto& st : out.session.statuses.at(s)) phrases[static_cast<std::size_t>(s - 1)].push_back(st.phrase());

  Rng clutter_rng = rng.derive("clutter");
  Rng linger_rng = rng.derive("linger");
  Rng text_rng = rng.derive("text");
  Rng status_rng = rng.derive("status");
  Rng jitter_rng = rng.derive("jitter");
  Rng image_rng = rng.derive("image");
  const double truth_status = sim::kStatusFloor + sim::kStatusGain * noise.signal;

  for (int i = 0; i < total; ++i) {
    const FrameRef& frame = manifest.frames[static_cast<std::size_t>(i)];
    const int g = out.truth[static_cast<std::size_t>(i)];
    const std::string& truth_text = texts[static_cast<std::size_t>(g - 1)];

    const bool cluttered = clutter_rng.uniform() < noise.clutter;
    const bool lingering = linger_rng.uniform() < noise.linger && g > 1;
    const double linger_factor = linger_rng.uniform(0.85, 1.05);

    std::map<std::string, double> scores;
    for (const auto& t : texts) {
      const double clean = text_rng.uniform(sim::kTextOther[0], sim::kTextOther[1]);
      const double flat = text_rng.uniform(sim::kTextClutter[0], sim::kTextClutter[1]);
      if (scores.contains(t)) continue;
      scores[t] = cluttered ? flat : (t == truth_text ? sim::kTextTruth : clean);
    }
    const auto& own = phrases[static_cast<std::size_t>(g - 1)];
    const std::size_t visible = own.empty() ? 0 : status_rng.index(own.size());
    std::map<std::string, double> status_scores;
    for (std::size_t s = 0; s < phrases.size(); ++s)
      for (const auto& p : phrases[s]) {
        const double other = status_rng.uniform(sim::kStatusOther[0], sim::kStatusOther[1]);
        if (!status_scores.contains(p)) status_scores[p] = other;
      }
    if (lingering) {
      const auto& prev = phrases[static_cast<std::size_t>(g - 2)];
      if (!prev.empty()) status_scores[prev[static_cast<std::size_t>(i) % prev.size()]] = truth_status * linger_factor;
    }
    if (!own.empty()) status_scores[own[visible]] = truth_status;
    for (const auto& [p, v] : status_scores) scores[p] = v;

    for (auto& [q, v] : scores) {
      v += jitter_rng.normal(0.0, noise.jitter);
      out.oracle.set(frame, q, v);
    }

    Raster img{sim::kImageSize, sim::kImageSize, {}};
    const double amplitude = image_rng.uniform(4.0, 120.0);
    for (int p = 0; p < sim::kImageSize * sim::kImageSize; ++p)
      img.pixels.push_back(static_cast<float>(std::lround(128.0 + amplitude * image_rng.uniform(-1.0, 1.0))));
    out.sharpness.push_back(sharpness_score(img));
    out.images.push_back(std::move(img));
  }
  return out;
}

struct SimConfig {
  int sessions = 100;
  int steps = 8;
  int frames_per_step = 25;
  NoiseConfig noise{0.7, 0, 0.0, 0.9, 0.05};
  std::uint64_t seed = 0;
};

struct SyntheticCorpus {
  std::vector<SyntheticSession> sessions;
  OracleProvider oracle;  // union of the per-session tables

  std::vector<AnnotatedSession> annotated() const {
    std::vector<AnnotatedSession> out;
    for (const auto& s : sessions) out.push_back(s.session);
    return out;
  }

  /// Sharpness lookup by (session, frame index); shares ownership of the table.
  SharpnessFn sharpness() const {
    auto table = std::make_shared<std::map<std::string, double>>();
    for (const auto& s : sessions)
      for (std::size_t i = 0; i < s.sharpness.size(); ++i)
        (*table)[frame_key(s.session.manifest.frames[i])] = s.sharpness[i];
    return [table](const FrameRef& f) {
      auto it = table->find(frame_key(f));
      if (it == table->end()) throw Error(ErrorCode::Io, "no image for " + frame_key(f));
      return it->second;
    };
  }
};

inline std::string sim_session_id(int i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "sim-%04d", i);
  return buf;
}

inline SyntheticCorpus generate_corpus(const SimConfig& config) {
  if (config.sessions < 1) throw Error(ErrorCode::InvalidArgument, "sessions must be >= 1");
  SyntheticCorpus corpus;
  const Rng root = Rng(config.seed).derive("sessions");
  for (int i = 0; i < config.sessions; ++i) {
    corpus.sessions.push_back(generate_session(config.steps, config.frames_per_step, config.noise,
                                               root.derive(static_cast<std::uint64_t>(i)),
                                               sim_session_id(i)));
    corpus.oracle.merge(corpus.sessions.back().oracle);
  }
  return corpus;
}

struct SweepRow {
  NoiseConfig noise;
  double baseline = 0.0;
  double oscar = 0.0;
  double delta = 0.0;

  friend bool operator==(const SweepRow&, const SweepRow&) = default;
};

/// Baseline and oscar corpus accuracy for each noise configuration. The
/// corpus for every row is drawn from the same seed.
inline std::vector<SweepRow> sweep(std::vector<NoiseConfig> grid, const SimConfig& base,
                                   EvalConfig eval = {}) {
  if (grid.empty()) throw Error(ErrorCode::InvalidArgument, "empty noise grid");
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  static constexpr Mode kModes[] = {Mode::Baseline, Mode::Oscar};
  std::vector<SweepRow> rows;
  for (const auto& noise : grid) {
    SimConfig cfg = base;
    cfg.noise = noise;
    const auto corpus = generate_corpus(cfg);
    OracleProvider oracle = corpus.oracle;
    const auto sessions = corpus.annotated();
    const auto outcome = run_corpus(sessions, oracle, eval, kModes, corpus.sharpness());
    const auto& s = outcome.report.summary;
    rows.push_back({noise, s.at(Mode::Baseline).mean, s.at(Mode::Oscar).mean, *outcome.report.delta});
  }
  return rows;
}

}  // namespace oscar
