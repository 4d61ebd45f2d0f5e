#pragma once

#include <string>
#include <vector>

#include <fmt/format.h>

#include "oscar/eval.hpp"
#include "oscar/sim.hpp"

namespace oscar {

namespace detail {

inline std::string cell(const std::map<Mode, double>& m, Mode mode) {
  auto it = m.find(mode);
  return it == m.end() ? "-" : fmt::format("{:.1f}", it->second);
}

inline std::string cell(const std::map<Mode, ModeSummary>& m, Mode mode, bool sd) {
  auto it = m.find(mode);
  if (it == m.end()) return "-";
  return fmt::format("{:.1f}", sd ? it->second.sd : it->second.mean);
}

/// Left-aligned first column, right-aligned numeric columns.
inline std::string render_rows(const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width(rows.front().size(), 0);
  for (const auto& r : rows)
    for (std::size_t c = 0; c < r.size(); ++c) width[c] = std::max(width[c], r[c].size());
  std::string out;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::string line;
    for (std::size_t c = 0; c < rows[i].size(); ++c) {
      if (c) line += "  ";
      line += c == 0 ? fmt::format("{:<{}}", rows[i][c], width[c]) : fmt::format("{:>{}}", rows[i][c], width[c]);
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out += line + "\n";
    if (i == 0) {
      std::size_t total = 0;
      for (auto w : width) total += w;
      out += std::string(total + 2 * (width.size() - 1), '-') + "\n";
    }
  }
  return out;
}

inline std::string signed_cell(const std::optional<double>& d) {
  return d ? fmt::format("{:+.1f}", *d) : "-";
}

}  // namespace detail

/// Aligned text table: a summary row per model, then one row per video.
inline std::string render_table(const AccuracyReport& r) {
  std::vector<std::vector<std::string>> summary{{"Model", "Baseline Accuracy", "Baseline SD", "OSCAR Accuracy",
                                                 "OSCAR SD", "Delta Accuracy (OSCAR - Baseline)"}};
  summary.push_back({r.model, detail::cell(r.summary, Mode::Baseline, false),
                     detail::cell(r.summary, Mode::Baseline, true), detail::cell(r.summary, Mode::Oscar, false),
                     detail::cell(r.summary, Mode::Oscar, true), detail::signed_cell(r.delta)});

  std::vector<std::vector<std::string>> videos{{"Video", "Baseline", "OSCAR", "Delta"}};
  for (const auto& v : r.videos) {
    std::optional<double> d;
    if (v.accuracy.contains(Mode::Baseline) && v.accuracy.contains(Mode::Oscar))
      d = v.accuracy.at(Mode::Oscar) - v.accuracy.at(Mode::Baseline);
    videos.push_back({v.video_id, detail::cell(v.accuracy, Mode::Baseline), detail::cell(v.accuracy, Mode::Oscar),
                      detail::signed_cell(d)});
  }
  return detail::render_rows(summary) + "\n" + detail::render_rows(videos) +
         fmt::format("\nseed {}, {} SD over {} videos, accuracy in %\n", r.seed,
                     r.sample_sd ? "sample" : "population", r.videos.size());
}

/// One row per (video, step) plus per-video and corpus rows. Full precision.
inline std::string render_csv(const AccuracyReport& r) {
  auto num = [](const std::map<Mode, double>& m, Mode mode) {
    auto it = m.find(mode);
    return it == m.end() ? std::string() : fmt::format("{}", it->second);
  };
  std::string out = "model,video_id,step,baseline,oscar\n";
  for (const auto& v : r.videos) {
    for (const auto& s : v.steps)
      out += fmt::format("{},{},{},{},{}\n", r.model, v.video_id, s.step, num(s.accuracy, Mode::Baseline),
                         num(s.accuracy, Mode::Oscar));
    out += fmt::format("{},{},all,{},{}\n", r.model, v.video_id, num(v.accuracy, Mode::Baseline),
                       num(v.accuracy, Mode::Oscar));
  }
  auto mean = [&](Mode m) { return r.summary.contains(m) ? fmt::format("{}", r.summary.at(m).mean) : std::string(); };
  auto sd = [&](Mode m) { return r.summary.contains(m) ? fmt::format("{}", r.summary.at(m).sd) : std::string(); };
  out += fmt::format("{},mean,all,{},{}\n", r.model, mean(Mode::Baseline), mean(Mode::Oscar));
  out += fmt::format("{},sd,all,{},{}\n", r.model, sd(Mode::Baseline), sd(Mode::Oscar));
  return out;
}

inline std::string render_sweep(const std::vector<SweepRow>& rows) {
  std::vector<std::vector<std::string>> t{{"clutter", "repeat", "linger", "signal", "jitter", "baseline", "oscar", "delta"}};
  for (const auto& r : rows)
    t.push_back({fmt::format("{:g}", r.noise.clutter), std::to_string(r.noise.repeat_steps),
                 fmt::format("{:g}", r.noise.linger), fmt::format("{:g}", r.noise.signal),
                 fmt::format("{:g}", r.noise.jitter), fmt::format("{:.1f}", r.baseline),
                 fmt::format("{:.1f}", r.oscar), fmt::format("{:+.1f}", r.delta)});
  return detail::render_rows(t);
}

}  // namespace oscar
