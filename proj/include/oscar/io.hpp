#pragma once

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "oscar/alignment.hpp"
#include "oscar/error.hpp"
#include "oscar/eval.hpp"
#include "oscar/providers.hpp"
#include "oscar/recipe.hpp"
#include "oscar/sampling.hpp"
#include "oscar/sim.hpp"
#include "oscar/tracker.hpp"

namespace oscar {

using nlohmann::json;

/// Version stamped into every document as "v". Any field change bumps it.
inline constexpr std::string_view kSchemaVersion = "1.0";

/// Every on-disk document kind.
namespace schema {
inline constexpr std::string_view kRecipe = "recipe";
inline constexpr std::string_view kStatusMap = "status_map";
inline constexpr std::string_view kManifest = "manifest";
inline constexpr std::string_view kHistoryLog = "history_log";
inline constexpr std::string_view kReport = "report";
inline constexpr std::string_view kFrameScores = "frame_scores";
inline constexpr std::string_view kOracleTable = "oracle_table";
inline constexpr std::string_view kSweep = "sweep";
inline constexpr std::string_view kQueryAnswer = "query_answer";

inline const std::vector<std::string_view>& all() {
  static const std::vector<std::string_view> names{kRecipe, kStatusMap, kManifest,
                                                   kHistoryLog, kReport, kFrameScores,
                                                   kOracleTable, kSweep, kQueryAnswer};
  return names;
}
}  // namespace schema

struct Violation {
  std::string path;  // JSON path, e.g. "$.entries[2].predicted_step"
  std::string message;

  friend bool operator==(const Violation&, const Violation&) = default;
};

inline std::string describe(const std::vector<Violation>& vs) {
  std::string out;
  for (const auto& v : vs) out += (out.empty() ? "" : "; ") + v.path + ": " + v.message;
  return out;
}

namespace detail {

/// Collects every violation rather than stopping at the first.
class Checker {
 public:
  std::vector<Violation> violations;

  void fail(const std::string& path, std::string message) { violations.push_back({path, std::move(message)}); }

  const json* field(const json& obj, const std::string& path, const char* key, bool required = true) {
    if (!obj.is_object()) return nullptr;
    auto it = obj.find(key);
    if (it == obj.end() || (it->is_null() && !required)) {
      if (required) fail(path + "." + key, "missing");
      return nullptr;
    }
    return &*it;
  }

  bool object(const json& j, const std::string& path) {
    if (j.is_object()) return true;
    fail(path, "expected object");
    return false;
  }

  bool array(const json* j, const std::string& path) {
    if (j == nullptr) return false;
    if (j->is_array()) return true;
    fail(path, "expected array");
    return false;
  }

  std::optional<std::string> string(const json* j, const std::string& path, bool non_empty = false) {
    if (j == nullptr) return std::nullopt;
    if (!j->is_string()) {
      fail(path, "expected string");
      return std::nullopt;
    }
    auto s = j->get<std::string>();
    if (non_empty && text::trim(s).empty()) fail(path, "must be non-empty");
    return s;
  }

  std::optional<std::int64_t> integer(const json* j, const std::string& path, std::int64_t lo,
                                      std::int64_t hi = std::numeric_limits<std::int64_t>::max()) {
    if (j == nullptr) return std::nullopt;
    if (!j->is_number_integer()) {
      fail(path, "expected integer");
      return std::nullopt;
    }
    auto v = j->get<std::int64_t>();
    if (v < lo || v > hi) {
      fail(path, "must be in " + std::to_string(lo) + ".." +
                     (hi == std::numeric_limits<std::int64_t>::max() ? std::string("inf")
                                                                     : std::to_string(hi)));
    }
    return v;
  }

  std::optional<double> number(const json* j, const std::string& path) {
    if (j == nullptr) return std::nullopt;
    if (!j->is_number()) {
      fail(path, "expected number");
      return std::nullopt;
    }
    return j->get<double>();
  }

  void version(const json& doc) {
    const json* v = field(doc, "$", "v");
    if (v == nullptr) return;
    if (!v->is_string() || v->get<std::string>() != kSchemaVersion)
      fail("$.v", "unsupported version " + v->dump() + " (expected \"" + std::string(kSchemaVersion) + "\")");
  }

  // Returns the step count, or 0 when the recipe is unusable.
  int recipe(const json& r, const std::string& path) {
    if (!object(r, path)) return 0;
    if (const json* t = field(r, path, "title", false)) string(t, path + ".title");
    if (const json* ings = field(r, path, "ingredients", false); array(ings, path + ".ingredients")) {
      for (std::size_t i = 0; i < ings->size(); ++i) {
        const std::string p = path + ".ingredients[" + std::to_string(i) + "]";
        if (!object((*ings)[i], p)) continue;
        string(field((*ings)[i], p, "name"), p + ".name", true);
        if (const json* q = field((*ings)[i], p, "quantity", false)) string(q, p + ".quantity");
      }
    }
    const json* steps = field(r, path, "steps");
    if (!array(steps, path + ".steps")) return 0;
    if (steps->empty()) fail(path + ".steps", "must contain at least one step");
    for (std::size_t i = 0; i < steps->size(); ++i)
      string(&(*steps)[i], path + ".steps[" + std::to_string(i) + "]", true);
    return static_cast<int>(steps->size());
  }

  void step_list(const json* j, const std::string& path, int n) {
    if (!array(j, path)) return;
    for (std::size_t i = 0; i < j->size(); ++i) integer(&(*j)[i], path + "[" + std::to_string(i) + "]", 1, n);
  }

  void score_vector(const json* j, const std::string& path, int n) {
    if (!array(j, path)) return;
    if (n > 0 && static_cast<int>(j->size()) != n)
      fail(path, "length " + std::to_string(j->size()) + " != step count " + std::to_string(n));
    for (std::size_t i = 0; i < j->size(); ++i) number(&(*j)[i], path + "[" + std::to_string(i) + "]");
  }

  void mode(const json* j, const std::string& path) {
    auto s = string(j, path);
    if (s && *s != "baseline" && *s != "oscar") fail(path, "must be \"baseline\" or \"oscar\"");
  }
};

inline bool is_step_key(const std::string& k) {
  return !k.empty() && k.size() < 10 && std::all_of(k.begin(), k.end(), [](unsigned char c) {
           return std::isdigit(c) != 0;
         }) && k.front() != '0';
}

inline void check_recipe_doc(Checker& c, const json& doc) { c.recipe(doc, "$"); }

inline void check_status_map_doc(Checker& c, const json& doc) {
  for (const auto& [key, value] : doc.items()) {
    if (key == "v") continue;
    const std::string p = "$[\"" + key + "\"]";
    if (!is_step_key(key)) c.fail(p, "key must be a 1-based step index");
    if (!c.array(&value, p)) continue;
    for (std::size_t i = 0; i < value.size(); ++i) {
      const std::string q = p + "[" + std::to_string(i) + "]";
      if (!c.object(value[i], q)) continue;
      auto verb = c.string(c.field(value[i], q, "verb"), q + ".verb", true);
      if (verb && !is_gerund(*verb)) c.fail(q + ".verb", "must be a single gerund token");
      c.string(c.field(value[i], q, "noun"), q + ".noun", true);
    }
  }
}

inline void check_manifest_doc(Checker& c, const json& doc) {
  c.string(c.field(doc, "$", "session_id"), "$.session_id", true);
  if (const json* frames = c.field(doc, "$", "frames"); c.array(frames, "$.frames")) {
    std::optional<std::int64_t> prev_index;
    std::optional<double> prev_t;
    for (std::size_t i = 0; i < frames->size(); ++i) {
      const std::string p = "$.frames[" + std::to_string(i) + "]";
      const json& f = (*frames)[i];
      if (!c.object(f, p)) continue;
      auto idx = c.integer(c.field(f, p, "index"), p + ".index", 0);
      auto t = c.number(c.field(f, p, "t"), p + ".t");
      c.string(c.field(f, p, "path"), p + ".path");
      if (t && *t < 0) c.fail(p + ".t", "must be >= 0");
      if (idx && prev_index && *idx <= *prev_index) c.fail(p + ".index", "must increase");
      if (t && prev_t && *t < *prev_t) c.fail(p + ".t", "must not decrease");
      if (idx) prev_index = idx;
      if (t) prev_t = t;
    }
  }
  if (const json* anns = c.field(doc, "$", "annotations"); c.array(anns, "$.annotations")) {
    for (std::size_t i = 0; i < anns->size(); ++i) {
      const std::string p = "$.annotations[" + std::to_string(i) + "]";
      const json& a = (*anns)[i];
      if (!c.object(a, p)) continue;
      c.integer(c.field(a, p, "step"), p + ".step", 1);
      auto s = c.number(c.field(a, p, "start"), p + ".start");
      auto e = c.number(c.field(a, p, "end"), p + ".end");
      if (s && e && !(*s < *e)) c.fail(p, "start must be < end");
    }
  }
}

inline void check_history_log_doc(Checker& c, const json& doc) {
  c.string(c.field(doc, "$", "session_id"), "$.session_id", true);
  c.mode(c.field(doc, "$", "mode"), "$.mode");
  if (const json* d = c.field(doc, "$", "debounce", false)) c.integer(d, "$.debounce", 1);
  if (const json* t = c.field(doc, "$", "trial", false)) c.integer(t, "$.trial", 1);
  int n = 0;
  if (const json* r = c.field(doc, "$", "recipe")) n = c.recipe(*r, "$.recipe");
  const json* entries = c.field(doc, "$", "entries");
  if (!c.array(entries, "$.entries")) return;
  for (std::size_t i = 0; i < entries->size(); ++i) {
    const std::string p = "$.entries[" + std::to_string(i) + "]";
    const json& e = (*entries)[i];
    if (!c.object(e, p)) continue;
    c.integer(c.field(e, p, "id"), p + ".id", 0);
    if (const json* fr = c.field(e, p, "frames"); c.array(fr, p + ".frames"))
      for (std::size_t k = 0; k < fr->size(); ++k) c.string(&(*fr)[k], p + ".frames[" + std::to_string(k) + "]");
    c.score_vector(c.field(e, p, "scores"), p + ".scores", n);
    c.integer(c.field(e, p, "predicted_step"), p + ".predicted_step", 1, n > 0 ? n : std::numeric_limits<std::int64_t>::max());
    c.string(c.field(e, p, "predicted_text"), p + ".predicted_text");
    std::set<std::int64_t> seen;
    for (const char* key : {"completed", "missing", "remaining"}) {
      const json* list = c.field(e, p, key);
      c.step_list(list, p + "." + key, n > 0 ? n : std::numeric_limits<int>::max());
      if (list == nullptr || !list->is_array()) continue;
      for (const auto& x : *list)
        if (x.is_number_integer() && !seen.insert(x.get<std::int64_t>()).second)
          c.fail(p + "." + key, "step " + x.dump() + " appears in more than one progress set");
    }
  }
}

inline void check_report_doc(Checker& c, const json& doc) {
  c.string(c.field(doc, "$", "model"), "$.model", true);
  c.integer(c.field(doc, "$", "seed"), "$.seed", 0);
  if (auto sd = c.string(c.field(doc, "$", "sd"), "$.sd"); sd && *sd != "population" && *sd != "sample")
    c.fail("$.sd", "must be \"population\" or \"sample\"");
  if (const json* modes = c.field(doc, "$", "modes"); c.array(modes, "$.modes"))
    for (std::size_t i = 0; i < modes->size(); ++i) c.mode(&(*modes)[i], "$.modes[" + std::to_string(i) + "]");
  auto accuracy_map = [&](const json* j, const std::string& p) {
    if (j == nullptr || !c.object(*j, p)) return;
    for (const auto& [k, v] : j->items()) {
      if (k != "baseline" && k != "oscar") c.fail(p + "." + k, "unknown mode");
      auto x = c.number(&v, p + "." + k);
      if (x && (*x < 0.0 || *x > 100.0)) c.fail(p + "." + k, "accuracy outside [0,100]");
    }
  };
  if (const json* summary = c.field(doc, "$", "summary"); summary && c.object(*summary, "$.summary")) {
    for (const auto& [k, v] : summary->items()) {
      const std::string p = "$.summary." + k;
      if (k != "baseline" && k != "oscar") c.fail(p, "unknown mode");
      if (!c.object(v, p)) continue;
      c.number(c.field(v, p, "mean"), p + ".mean");
      c.number(c.field(v, p, "sd"), p + ".sd");
    }
  }
  if (const json* d = c.field(doc, "$", "delta", false)) c.number(d, "$.delta");
  if (const json* videos = c.field(doc, "$", "videos"); c.array(videos, "$.videos")) {
    for (std::size_t i = 0; i < videos->size(); ++i) {
      const std::string p = "$.videos[" + std::to_string(i) + "]";
      const json& v = (*videos)[i];
      if (!c.object(v, p)) continue;
      c.string(c.field(v, p, "video_id"), p + ".video_id", true);
      accuracy_map(c.field(v, p, "accuracy"), p + ".accuracy");
      if (const json* steps = c.field(v, p, "steps"); c.array(steps, p + ".steps"))
        for (std::size_t k = 0; k < steps->size(); ++k) {
          const std::string q = p + ".steps[" + std::to_string(k) + "]";
          if (!c.object((*steps)[k], q)) continue;
          c.integer(c.field((*steps)[k], q, "step"), q + ".step", 1);
          accuracy_map(c.field((*steps)[k], q, "accuracy"), q + ".accuracy");
        }
    }
  }
  if (const json* trials = c.field(doc, "$", "trials"); c.array(trials, "$.trials")) {
    for (std::size_t i = 0; i < trials->size(); ++i) {
      const std::string p = "$.trials[" + std::to_string(i) + "]";
      const json& t = (*trials)[i];
      if (!c.object(t, p)) continue;
      c.string(c.field(t, p, "video_id"), p + ".video_id", true);
      c.integer(c.field(t, p, "step"), p + ".step", 1);
      c.integer(c.field(t, p, "trial"), p + ".trial", 1);
      c.mode(c.field(t, p, "mode"), p + ".mode");
      c.integer(c.field(t, p, "predicted"), p + ".predicted", 1);
      if (const json* ok = c.field(t, p, "correct"); ok && !ok->is_boolean()) c.fail(p + ".correct", "expected boolean");
    }
  }
}

inline void check_frame_scores_doc(Checker& c, const json& doc) {
  int n = 0;
  if (const json* r = c.field(doc, "$", "recipe")) n = c.recipe(*r, "$.recipe");
  if (const json* w = c.field(doc, "$", "fusion_weight")) {
    auto x = c.number(w, "$.fusion_weight");
    if (x && (*x < 0.0 || *x > 1.0)) c.fail("$.fusion_weight", "must be in [0,1]");
  }
  const json* frames = c.field(doc, "$", "frames");
  if (!c.array(frames, "$.frames")) return;
  for (std::size_t i = 0; i < frames->size(); ++i) {
    const std::string p = "$.frames[" + std::to_string(i) + "]";
    const json& f = (*frames)[i];
    if (!c.object(f, p)) continue;
    c.string(c.field(f, p, "session_id"), p + ".session_id");
    c.integer(c.field(f, p, "index"), p + ".index", 0);
    c.number(c.field(f, p, "t"), p + ".t");
    c.string(c.field(f, p, "path"), p + ".path");
    for (const char* key : {"step_scores", "status_scores", "fused_scores"})
      c.score_vector(c.field(f, p, key), p + "." + key, n);
  }
}

inline void check_oracle_doc(Checker& c, const json& doc) {
  c.string(c.field(doc, "$", "session_id"), "$.session_id", true);
  const json* frames = c.field(doc, "$", "frames");
  if (frames == nullptr || !c.object(*frames, "$.frames")) return;
  for (const auto& [key, scores] : frames->items()) {
    const std::string p = "$.frames[\"" + key + "\"]";
    if (key.empty() || !std::all_of(key.begin(), key.end(), [](unsigned char ch) { return std::isdigit(ch) != 0; }))
      c.fail(p, "key must be a frame index");
    if (!c.object(scores, p)) continue;
    for (const auto& [q, v] : scores.items()) c.number(&v, p + "[\"" + q + "\"]");
  }
}

inline void check_sweep_doc(Checker& c, const json& doc) {
  const json* rows = c.field(doc, "$", "rows");
  if (!c.array(rows, "$.rows")) return;
  for (std::size_t i = 0; i < rows->size(); ++i) {
    const std::string p = "$.rows[" + std::to_string(i) + "]";
    const json& r = (*rows)[i];
    if (!c.object(r, p)) continue;
    if (const json* n = c.field(r, p, "noise"); n && c.object(*n, p + ".noise")) {
      for (const char* k : {"clutter", "linger", "signal", "jitter"}) c.number(c.field(*n, p + ".noise", k), p + ".noise." + k);
      c.integer(c.field(*n, p + ".noise", "repeat_steps"), p + ".noise.repeat_steps", 0);
    }
    for (const char* k : {"baseline", "oscar", "delta"}) c.number(c.field(r, p, k), p + "." + k);
  }
}

inline void check_query_doc(Checker& c, const json& doc) {
  c.string(c.field(doc, "$", "query"), "$.query", true);
  c.field(doc, "$", "answer");
}

}  // namespace detail

/// Checks a parsed document against a named schema, returning every
/// violation found (empty means valid).
inline std::vector<Violation> validate(const json& doc, std::string_view schema_name) {
  detail::Checker c;
  if (!doc.is_object()) {
    c.fail("$", "document must be a JSON object");
    return c.violations;
  }
  c.version(doc);
  if (schema_name == schema::kRecipe) detail::check_recipe_doc(c, doc);
  else if (schema_name == schema::kStatusMap) detail::check_status_map_doc(c, doc);
  else if (schema_name == schema::kManifest) detail::check_manifest_doc(c, doc);
  else if (schema_name == schema::kHistoryLog) detail::check_history_log_doc(c, doc);
  else if (schema_name == schema::kReport) detail::check_report_doc(c, doc);
  else if (schema_name == schema::kFrameScores) detail::check_frame_scores_doc(c, doc);
  else if (schema_name == schema::kOracleTable) detail::check_oracle_doc(c, doc);
  else if (schema_name == schema::kSweep) detail::check_sweep_doc(c, doc);
  else if (schema_name == schema::kQueryAnswer) detail::check_query_doc(c, doc);
  else throw Error(ErrorCode::InvalidArgument, "unknown schema '" + std::string(schema_name) + "'");
  return c.violations;
}

inline json parse_document(std::string_view text) {
  auto doc = json::parse(text, nullptr, false);
  if (doc.is_discarded()) throw Error(ErrorCode::MalformedDocument, "not valid JSON");
  return doc;
}

inline std::vector<Violation> validate(std::string_view text, std::string_view schema_name) {
  return validate(parse_document(text), schema_name);
}

inline void require_valid(const json& doc, std::string_view schema_name) {
  auto vs = validate(doc, schema_name);
  if (!vs.empty())
    throw Error(ErrorCode::SchemaViolation, std::string(schema_name) + ": " + describe(vs));
}

// ---------------------------------------------------------------------------
// Documents. to_document stamps the version; from_document validates first.

inline json with_version(json body) {
  json doc = json::object();
  doc["v"] = kSchemaVersion;
  for (auto& [k, v] : body.items()) doc[k] = std::move(v);
  return doc;
}

inline json to_document(const Recipe& r) { return with_version(json(r)); }
inline json to_document(const StepStatusMap& m) { return with_version(json(m)); }
inline json to_document(const SessionManifest& m) { return with_version(json(m)); }

inline json entry_json(const PredictionLogEntry& e) {
  return json{{"id", e.id},
              {"frames", e.frames},
              {"scores", e.scores},
              {"predicted_step", e.predicted_step},
              {"predicted_text", e.predicted_text},
              {"completed", e.completed},
              {"missing", e.missing},
              {"remaining", e.remaining}};
}

inline json to_document(const HistoryLog& log) {
  json entries = json::array();
  for (const auto& e : log.entries) entries.push_back(entry_json(e));
  json body{{"session_id", log.session_id},
            {"mode", to_string(log.mode)},
            {"recipe", log.recipe},
            {"debounce", log.debounce},
            {"entries", entries}};
  if (log.trial) body["trial"] = *log.trial;
  return with_version(std::move(body));
}

inline json to_document(const AccuracyReport& r) {
  auto accuracy = [](const std::map<Mode, double>& m) {
    json j = json::object();
    for (const auto& [mode, v] : m) j[std::string(to_string(mode))] = v;
    return j;
  };
  json modes = json::array();
  for (Mode m : r.modes) modes.push_back(to_string(m));
  json summary = json::object();
  for (const auto& [mode, s] : r.summary) summary[std::string(to_string(mode))] = {{"mean", s.mean}, {"sd", s.sd}};
  json videos = json::array();
  for (const auto& v : r.videos) {
    json steps = json::array();
    for (const auto& s : v.steps) steps.push_back({{"step", s.step}, {"accuracy", accuracy(s.accuracy)}});
    videos.push_back({{"video_id", v.video_id}, {"accuracy", accuracy(v.accuracy)}, {"steps", steps}});
  }
  json trials = json::array();
  for (const auto& t : r.trials)
    trials.push_back({{"video_id", t.video_id},
                      {"step", t.step},
                      {"trial", t.trial},
                      {"mode", to_string(t.mode)},
                      {"predicted", t.predicted},
                      {"correct", t.correct}});
  json body{{"model", r.model},   {"seed", r.seed},     {"sd", r.sample_sd ? "sample" : "population"},
            {"modes", modes},     {"summary", summary}, {"videos", videos},
            {"trials", trials}};
  if (r.delta) body["delta"] = *r.delta;
  return with_version(std::move(body));
}

inline json to_document(const Recipe& recipe, const std::vector<FrameScores>& frames, double fusion_weight) {
  json list = json::array();
  for (const auto& f : frames)
    list.push_back({{"session_id", f.frame.session_id},
                    {"index", f.frame.index},
                    {"t", f.frame.t},
                    {"path", f.frame.path},
                    {"step_scores", f.step_scores},
                    {"status_scores", f.status_scores},
                    {"fused_scores", f.fused_scores}});
  return with_version(json{{"recipe", recipe}, {"fusion_weight", fusion_weight}, {"frames", list}});
}

/// Oracle score table for one session; frames keyed by index.
inline json oracle_document(const std::string& session_id, const OracleProvider& oracle) {
  json frames = json::object();
  const std::string prefix = session_id + "#";
  for (const auto& [key, scores] : oracle.table())
    if (key.rfind(prefix, 0) == 0) frames[key.substr(prefix.size())] = scores;
  return with_version(json{{"session_id", session_id}, {"frames", frames}});
}

inline json to_document(const std::vector<SweepRow>& rows) {
  json list = json::array();
  for (const auto& r : rows)
    list.push_back({{"noise",
                     {{"clutter", r.noise.clutter},
                      {"repeat_steps", r.noise.repeat_steps},
                      {"linger", r.noise.linger},
                      {"signal", r.noise.signal},
                      {"jitter", r.noise.jitter}}},
                    {"baseline", r.baseline},
                    {"oscar", r.oscar},
                    {"delta", r.delta}});
  return with_version(json{{"rows", list}});
}

template <class T>
T from_document(const json& doc);

template <>
inline Recipe from_document<Recipe>(const json& doc) {
  require_valid(doc, schema::kRecipe);
  return doc.get<Recipe>();
}

template <>
inline StepStatusMap from_document<StepStatusMap>(const json& doc) {
  require_valid(doc, schema::kStatusMap);
  return doc.get<StepStatusMap>();
}

template <>
inline SessionManifest from_document<SessionManifest>(const json& doc) {
  require_valid(doc, schema::kManifest);
  return doc.get<SessionManifest>();
}

template <>
inline HistoryLog from_document<HistoryLog>(const json& doc) {
  require_valid(doc, schema::kHistoryLog);
  HistoryLog log;
  log.session_id = doc.at("session_id").get<std::string>();
  log.mode = parse_mode(doc.at("mode").get<std::string>());
  log.recipe = doc.at("recipe").get<Recipe>();
  log.debounce = doc.value("debounce", 1);
  if (doc.contains("trial")) log.trial = doc.at("trial").get<int>();
  for (const auto& e : doc.at("entries")) {
    PredictionLogEntry entry;
    entry.id = e.at("id").get<int>();
    entry.frames = e.at("frames").get<std::vector<std::string>>();
    entry.scores = e.at("scores").get<std::vector<double>>();
    entry.predicted_step = e.at("predicted_step").get<int>();
    entry.predicted_text = e.at("predicted_text").get<std::string>();
    entry.completed = e.at("completed").get<std::vector<int>>();
    entry.missing = e.at("missing").get<std::vector<int>>();
    entry.remaining = e.at("remaining").get<std::vector<int>>();
    entry.mode = log.mode;
    log.entries.push_back(std::move(entry));
  }
  return log;
}

template <>
inline AccuracyReport from_document<AccuracyReport>(const json& doc) {
  require_valid(doc, schema::kReport);
  auto accuracy = [](const json& j) {
    std::map<Mode, double> m;
    for (const auto& [k, v] : j.items()) m[parse_mode(k)] = v.get<double>();
    return m;
  };
  AccuracyReport r;
  r.model = doc.at("model").get<std::string>();
  r.seed = doc.at("seed").get<std::uint64_t>();
  r.sample_sd = doc.at("sd").get<std::string>() == "sample";
  for (const auto& m : doc.at("modes")) r.modes.push_back(parse_mode(m.get<std::string>()));
  for (const auto& [k, v] : doc.at("summary").items())
    r.summary[parse_mode(k)] = ModeSummary{v.at("mean").get<double>(), v.at("sd").get<double>()};
  if (doc.contains("delta")) r.delta = doc.at("delta").get<double>();
  for (const auto& v : doc.at("videos")) {
    VideoAccuracy va{v.at("video_id").get<std::string>(), accuracy(v.at("accuracy")), {}};
    for (const auto& s : v.at("steps")) va.steps.push_back({s.at("step").get<int>(), accuracy(s.at("accuracy"))});
    r.videos.push_back(std::move(va));
  }
  for (const auto& t : doc.at("trials"))
    r.trials.push_back({t.at("video_id").get<std::string>(), t.at("step").get<int>(), t.at("trial").get<int>(),
                        parse_mode(t.at("mode").get<std::string>()), t.at("predicted").get<int>(),
                        t.at("correct").get<bool>()});
  return r;
}

inline OracleProvider oracle_from_document(const json& doc) {
  require_valid(doc, schema::kOracleTable);
  OracleProvider oracle;
  const auto session = doc.at("session_id").get<std::string>();
  for (const auto& [key, scores] : doc.at("frames").items())
    for (const auto& [q, v] : scores.items())
      oracle.set(FrameRef{session, std::stoll(key), 0.0, {}}, q, v.get<double>());
  return oracle;
}

template <>
inline std::vector<SweepRow> from_document<std::vector<SweepRow>>(const json& doc) {
  require_valid(doc, schema::kSweep);
  std::vector<SweepRow> rows;
  for (const auto& r : doc.at("rows")) {
    const auto& n = r.at("noise");
    rows.push_back({NoiseConfig{n.at("clutter").get<double>(), n.at("repeat_steps").get<int>(),
                                n.at("linger").get<double>(), n.at("signal").get<double>(),
                                n.at("jitter").get<double>()},
                    r.at("baseline").get<double>(), r.at("oscar").get<double>(), r.at("delta").get<double>()});
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Files

/// Canonical serialization: two-space indent, trailing newline. Doubles use
/// the shortest representation that round-trips.
inline std::string dump(const json& doc) { return doc.dump(2) + "\n"; }

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline json read_json(const std::filesystem::path& path) {
  try {
    return parse_document(read_text(path));
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.detail());
  }
}

inline void write_text(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << content;
}

inline void write_json(const std::filesystem::path& path, const json& doc) { write_text(path, dump(doc)); }

}  // namespace oscar
