#pragma once

#include <filesystem>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "oscar/corpus.hpp"
#include "oscar/image.hpp"
#include "oscar/io.hpp"
#include "oscar/providers.hpp"
#include "oscar/remote.hpp"
#include "oscar/report.hpp"
#include "oscar/sim.hpp"
#include "oscar/tracker.hpp"

namespace oscar::cli {

struct RunConfig {
  std::uint64_t seed = 0;
  std::string provider = "mock";
  std::string url;
  std::string model = "clip";
  std::string cache;
  int jobs = 1;
  bool json = false;
  double w = 0.5;
  int debounce = 1;
  int k = 2;
  std::string aggregation = "max";
};

inline void check_run_config(const RunConfig& c) {
  if (!(c.w >= 0.0 && c.w <= 1.0)) throw Error(ErrorCode::InvalidArgument, "--w must be in [0,1]");
  if (c.debounce < 1) throw Error(ErrorCode::InvalidArgument, "--debounce must be >= 1");
  if (c.k < 0) throw Error(ErrorCode::InvalidArgument, "--k must be >= 0");
  if (c.jobs < 1) throw Error(ErrorCode::InvalidArgument, "--jobs must be >= 1");
}

inline AlignConfig align_config(const RunConfig& c) {
  return AlignConfig{c.w, c.aggregation == "mean" ? StatusAggregation::Mean : StatusAggregation::Max};
}

/// Owns the selected provider and any decorator around it.
struct ProviderHandle {
  std::unique_ptr<EmbeddingProvider> inner;
  std::unique_ptr<CachedProvider> cached;
  EmbeddingProvider* get() const { return cached ? cached.get() : inner.get(); }
};

inline ProviderHandle make_provider(const RunConfig& c, const OracleProvider* oracle) {
  ProviderHandle h;
  if (c.provider == "mock") {
    h.inner = std::make_unique<MockProvider>();
  } else if (c.provider == "oracle") {
    if (oracle == nullptr || oracle->table().empty())
      throw Error(ErrorCode::InvalidArgument, "--provider oracle needs oracle.json score tables");
    h.inner = std::make_unique<OracleProvider>(*oracle);
  } else {
    if (c.url.empty())
      throw Error(ErrorCode::InvalidArgument,
                  std::string("--provider remote needs --url or ") + kProviderUrlEnv);
    h.inner = std::make_unique<RemoteProvider>(c.url, c.model);
  }
  if (!c.cache.empty() && c.provider != "oracle") h.cached = std::make_unique<CachedProvider>(*h.inner, c.cache);
  return h;
}

inline std::vector<Mode> parse_modes(const std::string& s) {
  if (s == "both") return {Mode::Baseline, Mode::Oscar};
  return {parse_mode(s)};
}

inline std::string read_input(const std::string& path) {
  if (path == "-") {
    std::ostringstream ss;
    ss << std::cin.rdbuf();
    return ss.str();
  }
  return read_text(path);
}

inline void emit(const json& doc, const std::string& out_path, std::ostream& out) {
  if (out_path.empty())
    out << dump(doc);
  else
    write_json(out_path, doc);
}

inline StepStatusMap statuses_for(const Recipe& recipe, const std::string& path) {
  return path.empty() ? extract_object_statuses(recipe) : from_document<StepStatusMap>(read_json(path));
}

/// Loads a manifest and resolves relative frame paths against its directory.
inline SessionManifest load_manifest(const std::string& path) {
  auto m = from_document<SessionManifest>(read_json(path));
  const auto base = std::filesystem::path(path).parent_path();
  for (auto& f : m.frames) {
    f.session_id = m.session_id;
    if (std::filesystem::path(f.path).is_relative()) f.path = (base / f.path).string();
  }
  return m;
}

inline OracleProvider oracle_beside(const std::string& manifest_path, const std::string& explicit_path) {
  std::filesystem::path p = explicit_path.empty()
                                ? std::filesystem::path(manifest_path).parent_path() / "oracle.json"
                                : std::filesystem::path(explicit_path);
  if (!std::filesystem::exists(p)) return {};
  return oracle_from_document(read_json(p));
}

/// Parses one "key=v1,v2" sweep axis.
inline std::pair<std::string, std::vector<double>> parse_axis(const std::string& spec) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos || eq == 0 || eq + 1 == spec.size())
    throw Error(ErrorCode::InvalidArgument, "sweep axis must look like clutter=0,0.5,1");
  std::vector<double> values;
  std::stringstream ss(spec.substr(eq + 1));
  for (std::string item; std::getline(ss, item, ',');) {
    try {
      std::size_t used = 0;
      values.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw Error(ErrorCode::InvalidArgument, "bad sweep value '" + item + "'");
    }
  }
  return {spec.substr(0, eq), values};
}

inline std::vector<NoiseConfig> expand_grid(const NoiseConfig& base, const std::vector<std::string>& axes) {
  std::vector<NoiseConfig> grid{base};
  for (const auto& spec : axes) {
    auto [key, values] = parse_axis(spec);
    std::vector<NoiseConfig> next;
    for (const auto& g : grid)
      for (double v : values) {
        NoiseConfig n = g;
        if (key == "clutter") n.clutter = v;
        else if (key == "linger") n.linger = v;
        else if (key == "signal") n.signal = v;
        else if (key == "jitter") n.jitter = v;
        else if (key == "repeat") n.repeat_steps = static_cast<int>(v);
        else throw Error(ErrorCode::InvalidArgument, "unknown sweep axis '" + key + "'");
        check_noise(n);
        next.push_back(n);
      }
    grid = std::move(next);
  }
  return grid;
}

inline std::string log_file_name(const HistoryLog& log) {
  return fmt::format("{}.{}.t{}.json", log.session_id, to_string(log.mode), log.trial.value_or(0));
}

/// Entry point shared by the executable and the tests. Returns the process
/// exit code: 0 success, 1 domain error, 2 usage error.
inline int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Track recipe progress from video frames by aligning steps and object statuses.", "oscar"};
  app.require_subcommand(1);
  RunConfig rc;
  app.set_config("--config", "", "TOML config file; flags override it");
  app.add_option("--seed", rc.seed, "Master seed for every random draw");
  app.add_option("--provider", rc.provider, "Embedding provider")
      ->check(CLI::IsMember({"mock", "oracle", "remote"}));
  app.add_option("--url", rc.url, "Embedding service base URL")->envname(kProviderUrlEnv);
  app.add_option("--model", rc.model, "Model id requested from the remote provider");
  app.add_option("--cache", rc.cache, "JSON-lines embedding cache file");
  app.add_option("--jobs", rc.jobs, "Sessions evaluated in parallel");
  app.add_flag("--json", rc.json, "Print JSON documents instead of text");

  auto add_align_flags = [&](CLI::App* sub) {
    sub->add_option("--w", rc.w, "Fusion weight on step-text scores");
    sub->add_option("--aggregation", rc.aggregation, "Per-step status aggregation")
        ->check(CLI::IsMember({"max", "mean"}));
  };

  // parse
  std::string parse_in, parse_out;
  auto* parse = app.add_subcommand("parse", "Normalize raw recipe text into a recipe document");
  parse->add_option("input", parse_in, "Recipe text file, or - for stdin")->required();
  parse->add_option("-o,--out", parse_out, "Output file (default stdout)");

  // extract-status
  std::string ex_in, ex_out;
  auto* extract = app.add_subcommand("extract-status", "Derive object statuses for each recipe step");
  extract->add_option("recipe", ex_in, "Recipe document")->required();
  extract->add_option("-o,--out", ex_out, "Output file (default stdout)");

  // align
  std::string al_recipe, al_statuses, al_manifest, al_oracle, al_out;
  auto* align = app.add_subcommand("align", "Score every manifest frame against steps and statuses");
  align->add_option("--recipe", al_recipe, "Recipe document")->required();
  align->add_option("--statuses", al_statuses, "Status map (default: extracted)");
  align->add_option("--manifest", al_manifest, "Session manifest")->required();
  align->add_option("--oracle", al_oracle, "Oracle score table (default: oracle.json beside the manifest)");
  align->add_option("-o,--out", al_out, "Output file (default stdout)");
  add_align_flags(align);

  // track
  std::string tr_recipe, tr_statuses, tr_manifest, tr_oracle, tr_log, tr_mode = "oscar";
  int tr_batch = 5;
  auto* track = app.add_subcommand("track", "Stream manifest frames in batches through the tracker");
  track->add_option("--recipe", tr_recipe, "Recipe document")->required();
  track->add_option("--statuses", tr_statuses, "Status map (default: extracted)");
  track->add_option("--manifest", tr_manifest, "Session manifest")->required();
  track->add_option("--oracle", tr_oracle, "Oracle score table (default: oracle.json beside the manifest)");
  track->add_option("--batch", tr_batch, "Frames per prediction")->check(CLI::PositiveNumber);
  track->add_option("--mode", tr_mode, "Prediction mode")->check(CLI::IsMember({"baseline", "oscar"}));
  track->add_option("--log", tr_log, "History log file, rewritten after every batch");
  track->add_option("--debounce", rc.debounce, "Identical predictions needed to complete a step");
  add_align_flags(track);

  // eval
  std::string ev_corpus, ev_mode = "both", ev_out, ev_logs, ev_sd = "population";
  int ev_trials = 3, ev_segments = 5;
  bool ev_csv = false;
  auto* eval = app.add_subcommand("eval", "Run the sampling protocol over an annotated corpus");
  eval->add_option("--corpus", ev_corpus, "Corpus directory")->required();
  eval->add_option("--mode", ev_mode, "Modes to evaluate")->check(CLI::IsMember({"baseline", "oscar", "both"}));
  eval->add_option("--k", rc.k, "Blur-adjacent search radius in frames");
  eval->add_option("--debounce", rc.debounce, "Identical predictions needed to complete a step");
  eval->add_option("--trials", ev_trials, "Repetitions per step")->check(CLI::PositiveNumber);
  eval->add_option("--segments", ev_segments, "Sampled segments per step")->check(CLI::PositiveNumber);
  eval->add_option("--sd", ev_sd, "Standard deviation over videos")->check(CLI::IsMember({"population", "sample"}));
  eval->add_option("--out", ev_out, "Write the JSON report here");
  eval->add_option("--log-dir", ev_logs, "Write one history log per (session, mode, trial)");
  eval->add_flag("--csv", ev_csv, "Print CSV instead of the text table");
  add_align_flags(eval);

  // simulate
  std::string sim_out;
  SimConfig sim;
  std::vector<std::string> sim_axes;
  auto* simulate = app.add_subcommand("simulate", "Generate a synthetic corpus or run a noise sweep");
  simulate->add_option("--out", sim_out, "Corpus directory, or sweep document with --sweep");
  simulate->add_option("--sessions", sim.sessions, "Sessions to generate")->check(CLI::PositiveNumber);
  simulate->add_option("--steps", sim.steps, "Recipe steps per session")->check(CLI::PositiveNumber);
  simulate->add_option("--frames-per-step", sim.frames_per_step, "Frames in each step clip")->check(CLI::Range(5, 100000));
  simulate->add_option("--clutter", sim.noise.clutter, "Probability a frame's step-text scores go flat")->check(CLI::Range(0.0, 1.0));
  simulate->add_option("--repeat", sim.noise.repeat_steps, "Steps that duplicate an earlier step")->check(CLI::NonNegativeNumber);
  simulate->add_option("--linger", sim.noise.linger, "Probability a previous status stays salient")->check(CLI::Range(0.0, 1.0));
  simulate->add_option("--signal", sim.noise.signal, "Strength of the true status match")->check(CLI::Range(0.0, 1.0));
  simulate->add_option("--jitter", sim.noise.jitter, "SD of gaussian noise on every score")->check(CLI::NonNegativeNumber);
  simulate->add_option("--sweep", sim_axes, "Sweep axis, e.g. clutter=0,0.5,1 (repeatable)");

  // query
  std::string q_log, q_text;
  auto* q = app.add_subcommand("query", "Answer a progress query from a history log");
  q->add_option("--log", q_log, "History log")->required();
  q->add_option("--q", q_text, "current|completed|remaining|missing|is_done:<step>")->required();

  std::vector<const char*> argv{"oscar"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    const CLI::App* target = &app;
    for (const auto* sub : app.get_subcommands()) target = sub;
    out << target->help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    const CLI::App* target = &app;
    for (const auto* sub : app.get_subcommands()) target = sub;
    err << "error: " << e.what() << "\n\n" << target->help();
    return 2;
  }

  try {
    check_run_config(rc);
    const AlignConfig acfg = align_config(rc);

    if (*parse) {
      emit(to_document(normalize_recipe(read_input(parse_in))), parse_out, out);
    } else if (*extract) {
      const auto recipe = from_document<Recipe>(read_json(ex_in));
      emit(to_document(extract_object_statuses(recipe)), ex_out, out);
    } else if (*align) {
      const auto recipe = from_document<Recipe>(read_json(al_recipe));
      const auto statuses = statuses_for(recipe, al_statuses);
      check_status_map(statuses, recipe, ErrorCode::InvalidArgument);
      const auto manifest = load_manifest(al_manifest);
      const auto oracle = oracle_beside(al_manifest, al_oracle);
      auto provider = make_provider(rc, &oracle);
      std::vector<FrameScores> scores;
      for (const auto& f : manifest.frames) scores.push_back(score_frame(f, recipe, statuses, *provider.get(), acfg));
      emit(to_document(recipe, scores, rc.w), al_out, out);
    } else if (*track) {
      const auto recipe = from_document<Recipe>(read_json(tr_recipe));
      const auto statuses = statuses_for(recipe, tr_statuses);
      check_status_map(statuses, recipe, ErrorCode::InvalidArgument);
      const auto manifest = load_manifest(tr_manifest);
      const auto oracle = oracle_beside(tr_manifest, tr_oracle);
      auto provider = make_provider(rc, &oracle);
      const Mode mode = parse_mode(tr_mode);
      SessionState state(recipe, rc.debounce);
      const auto& frames = manifest.frames;
      for (std::size_t i = 0; i < frames.size(); i += static_cast<std::size_t>(tr_batch)) {
        std::vector<FrameScores> batch;
        std::vector<std::string> paths;
        for (std::size_t j = i; j < std::min(frames.size(), i + static_cast<std::size_t>(tr_batch)); ++j) {
          batch.push_back(score_frame(frames[j], recipe, statuses, *provider.get(), acfg));
          paths.push_back(frames[j].path);
        }
        const auto& e = observe(state, average_over_frames(batch, mode), mode, std::move(paths));
        if (!rc.json) {
          const auto snap = progress_snapshot(state);
          out << fmt::format("#{} frames {}..{} -> step {} | current {} completed {} missing {}\n", e.id,
                             frames[i].index, frames[std::min(frames.size(), i + tr_batch) - 1].index,
                             e.predicted_step, render(QueryAnswer{snap.current}),
                             render(QueryAnswer{e.completed}), render(QueryAnswer{e.missing}));
        }
        if (!tr_log.empty()) write_json(tr_log, to_document(make_log(manifest.session_id, mode, state)));
      }
      if (rc.json) out << dump(to_document(make_log(manifest.session_id, mode, state)));
    } else if (*eval) {
      auto corpus = load_corpus(ev_corpus);
      auto provider = make_provider(rc, &corpus.oracle);
      EvalConfig cfg;
      cfg.seed = rc.seed;
      cfg.trials = ev_trials;
      cfg.segments = ev_segments;
      cfg.blur_radius = rc.k;
      cfg.align = acfg;
      cfg.debounce = rc.debounce;
      cfg.sample_sd = ev_sd == "sample";
      cfg.jobs = rc.jobs;
      const auto modes = parse_modes(ev_mode);
      ImageSharpness images;
      SharpnessFn sharpness = [&images](const FrameRef& f) { return images(f); };
      const auto outcome = run_corpus(corpus.sessions, *provider.get(), cfg, modes, sharpness);
      const json doc = to_document(outcome.report);
      if (!ev_out.empty()) write_json(ev_out, doc);
      if (!ev_logs.empty())
        for (const auto& log : outcome.logs)
          write_json(std::filesystem::path(ev_logs) / log_file_name(log), to_document(log));
      if (rc.json)
        out << dump(doc);
      else
        out << (ev_csv ? render_csv(outcome.report) : render_table(outcome.report));
    } else if (*simulate) {
      sim.seed = rc.seed;
      check_noise(sim.noise);
      if (!sim_axes.empty()) {
        EvalConfig cfg;
        cfg.seed = rc.seed;
        cfg.blur_radius = rc.k;
        cfg.jobs = rc.jobs;
        const auto rows = sweep(expand_grid(sim.noise, sim_axes), sim, cfg);
        if (!sim_out.empty()) write_json(sim_out, to_document(rows));
        if (rc.json)
          out << dump(to_document(rows));
        else
          out << render_sweep(rows);
      } else {
        if (sim_out.empty()) throw Error(ErrorCode::InvalidArgument, "simulate needs --out <dir>");
        write_corpus(sim_out, generate_corpus(sim));
        if (!rc.json) out << fmt::format("wrote {} sessions to {}\n", sim.sessions, sim_out);
      }
    } else if (*q) {
      const auto state = replay(from_document<HistoryLog>(read_json(q_log)));
      const auto answer = query(state, parse_query(q_text));
      if (rc.json)
        out << dump(with_version(json{{"query", q_text}, {"answer", answer_json(answer)}}));
      else
        out << render(answer) << "\n";
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace oscar::cli
