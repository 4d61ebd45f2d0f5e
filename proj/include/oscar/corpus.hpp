#pragma once

#include <algorithm>
#include <filesystem>
#include <string>
#include <vector>

#include "oscar/eval.hpp"
#include "oscar/image.hpp"
#include "oscar/io.hpp"
#include "oscar/providers.hpp"
#include "oscar/sim.hpp"

namespace oscar {

// A corpus directory holds one subdirectory per session:
//   <session>/manifest.json   required
//   <session>/recipe.json     required
//   <session>/statuses.json   optional, extracted from the recipe if absent
//   <session>/oracle.json     optional, score table for the oracle provider
//   <session>/frames/...      images referenced by the manifest
struct Corpus {
  std::vector<AnnotatedSession> sessions;
  OracleProvider oracle;  // empty unless some session ships oracle.json
  bool has_oracle = false;
};

inline AnnotatedSession load_session(const std::filesystem::path& dir, OracleProvider* oracle = nullptr,
                                     bool* found_oracle = nullptr) {
  AnnotatedSession s;
  s.manifest = from_document<SessionManifest>(read_json(dir / "manifest.json"));
  s.recipe = from_document<Recipe>(read_json(dir / "recipe.json"));
  if (std::filesystem::exists(dir / "statuses.json"))
    s.statuses = from_document<StepStatusMap>(read_json(dir / "statuses.json"));
  else
    s.statuses = extract_object_statuses(s.recipe);
  // Manifest paths are relative to the session directory.
  for (auto& f : s.manifest.frames) {
    f.session_id = s.manifest.session_id;
    if (std::filesystem::path(f.path).is_relative()) f.path = (dir / f.path).string();
  }
  if (oracle && std::filesystem::exists(dir / "oracle.json")) {
    auto table = oracle_from_document(read_json(dir / "oracle.json"));
    oracle->merge(table);
    if (found_oracle) *found_oracle = true;
  }
  try {
    check_session(s);
  } catch (const Error& e) {
    throw Error(e.code(), dir.string() + ": " + e.detail());
  }
  return s;
}

/// Loads every session subdirectory, ordered by directory name.
inline Corpus load_corpus(const std::filesystem::path& root) {
  if (!std::filesystem::is_directory(root)) throw Error(ErrorCode::Io, "not a directory: " + root.string());
  std::vector<std::filesystem::path> dirs;
  for (const auto& e : std::filesystem::directory_iterator(root))
    if (e.is_directory() && std::filesystem::exists(e.path() / "manifest.json")) dirs.push_back(e.path());
  std::sort(dirs.begin(), dirs.end());
  Corpus c;
  for (const auto& d : dirs) c.sessions.push_back(load_session(d, &c.oracle, &c.has_oracle));
  if (c.sessions.empty()) throw Error(ErrorCode::EmptyCorpus, root.string() + " has no session directories");
  return c;
}

/// Writes a synthetic corpus in the layout load_corpus reads, including PGM
/// frames and per-session oracle tables.
inline void write_corpus(const std::filesystem::path& root, const SyntheticCorpus& corpus) {
  for (const auto& s : corpus.sessions) {
    const auto dir = root / s.session.id();
    std::filesystem::create_directories(dir / "frames");
    write_json(dir / "manifest.json", to_document(s.session.manifest));
    write_json(dir / "recipe.json", to_document(s.session.recipe));
    write_json(dir / "statuses.json", to_document(s.session.statuses));
    write_json(dir / "oracle.json", oracle_document(s.session.id(), s.oracle));
    for (std::size_t i = 0; i < s.images.size(); ++i)
      save_grayscale((dir / s.session.manifest.frames[i].path).string(), s.images[i]);
  }
}

}  // namespace oscar
