#include <gtest/gtest.h>

#include <algorithm>
#include <map>

#include "oscar/eval.hpp"
#include "oscar/providers.hpp"

using namespace oscar;

namespace {

const SharpnessFn kFlat = [](const FrameRef&) { return 1.0; };

// n steps of f one-second frames each; step i says "Chop the <ingredient i>".
AnnotatedSession make_session(const std::string& id, int n, int f) {
  static const std::vector<std::string> ings{"carrots", "onions", "potatoes", "garlic", "eggs", "leeks"};
  AnnotatedSession s;
  s.recipe.title = id;
  for (int i = 1; i <= n; ++i) {
    const auto& ing = ings[static_cast<std::size_t>(i - 1) % ings.size()];
    s.recipe.ingredients.push_back({ing, std::nullopt});
    s.recipe.steps.push_back("Chop the " + ing + " " + std::to_string(i) + ".");
  }
  s.statuses = extract_object_statuses(s.recipe);
  s.manifest.session_id = id;
  for (int i = 0; i < n * f; ++i) s.manifest.frames.push_back({id, i, double(i), ""});
  for (int i = 1; i <= n; ++i) s.manifest.annotations.push_back({i, double((i - 1) * f), double(i * f)});
  return s;
}

// Step-text scores flat, status score peaked at the frame's true step.
OracleProvider status_only_oracle(const AnnotatedSession& s, int f) {
  OracleProvider o;
  for (const auto& frame : s.manifest.frames) {
    const int truth = static_cast<int>(frame.index) / f + 1;
    for (int i = 1; i <= s.recipe.size(); ++i) {
      o.set(frame, s.recipe.step(i), 0.5);
      for (const auto& st : s.statuses.at(i)) o.set(frame, st.phrase(), i == truth ? 0.9 : 0.1);
    }
  }
  return o;
}

// Both families peaked at the truth.
OracleProvider clean_oracle(const AnnotatedSession& s, int f) {
  OracleProvider o;
  for (const auto& frame : s.manifest.frames) {
    const int truth = static_cast<int>(frame.index) / f + 1;
    for (int i = 1; i <= s.recipe.size(); ++i) {
      o.set(frame, s.recipe.step(i), i == truth ? 0.8 : 0.2);
      for (const auto& st : s.statuses.at(i)) o.set(frame, st.phrase(), i == truth ? 0.9 : 0.1);
    }
  }
  return o;
}

TrialResult tr(std::string video, int step, int trial, bool correct, Mode mode = Mode::Oscar) {
  return {std::move(video), step, trial, mode, correct ? step : step + 1, correct};
}

}  // namespace

TEST(RunStepTrial, CleanOracleIsAlwaysCorrect) {
  const auto s = make_session("v", 4, 10);
  auto oracle = clean_oracle(s, 10);
  for (Mode m : {Mode::Baseline, Mode::Oscar})
    for (int step = 1; step <= 4; ++step)
      for (int trial = 1; trial <= 3; ++trial)
        EXPECT_TRUE(run_step_trial(s, step, trial, m, oracle, {}, kFlat).correct);
}

TEST(RunStepTrial, Deterministic) {
  const auto s = make_session("v", 3, 8);
  MockProvider a, b;
  for (int step = 1; step <= 3; ++step)
    EXPECT_EQ(run_step_trial(s, step, 2, Mode::Oscar, a, {}, kFlat),
              run_step_trial(s, step, 2, Mode::Oscar, b, {}, kFlat));
}

TEST(RunStepTrial, StatusEvidenceRescuesFlatStepText) {
  const auto s = make_session("v", 4, 10);
  auto oracle = status_only_oracle(s, 10);
  for (int step = 2; step <= 4; ++step) {
    EXPECT_FALSE(run_step_trial(s, step, 1, Mode::Baseline, oracle, {}, kFlat).correct);
    EXPECT_TRUE(run_step_trial(s, step, 1, Mode::Oscar, oracle, {}, kFlat).correct);
  }
}

TEST(RunStepTrial, ErrorsAreTaggedWithCell) {
  const auto s = make_session("vid", 2, 6);
  OracleProvider empty;
  try {
    run_step_trial(s, 2, 3, Mode::Oscar, empty, {}, kFlat);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ProviderUnavailable);
    const std::string msg = e.what();
    EXPECT_EQ(msg.rfind("ProviderUnavailable: vid step 2 trial 3: ", 0), 0u) << msg;
    EXPECT_EQ(msg.find("ProviderUnavailable", 1), std::string::npos) << msg;
  }
  EXPECT_THROW(run_step_trial(s, 5, 1, Mode::Oscar, empty, {}, kFlat), Error);
}

TEST(SampleStepFrames, OnePerSegmentWithinBlurReach) {
  const auto s = make_session("v", 2, 25);
  EvalConfig cfg;
  const SharpnessFn by_index = [](const FrameRef& f) { return double(f.index % 7); };
  const auto frames = sample_step_frames(s, s.manifest.annotations[1], 1, cfg, by_index);
  ASSERT_EQ(frames.size(), 5u);
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const double lo = 25 + 5.0 * i, hi = lo + 5.0;
    EXPECT_GE(frames[i].t, lo - cfg.blur_radius);
    EXPECT_LT(frames[i].t, hi + cfg.blur_radius);
  }
  EXPECT_EQ(frames, sample_step_frames(s, s.manifest.annotations[1], 1, cfg, by_index));
  EXPECT_NE(frames, sample_step_frames(s, s.manifest.annotations[1], 2, cfg, by_index));
}

TEST(StepAccuracy, Fractions) {
  std::vector<TrialResult> all{tr("v", 1, 1, true), tr("v", 1, 2, true), tr("v", 1, 3, true)};
  EXPECT_EQ(step_accuracy(all), 100.0);
  std::vector<TrialResult> none{tr("v", 1, 1, false), tr("v", 1, 2, false), tr("v", 1, 3, false)};
  EXPECT_EQ(step_accuracy(none), 0.0);
  std::vector<TrialResult> two{tr("v", 1, 1, true), tr("v", 1, 2, false), tr("v", 1, 3, true)};
  EXPECT_NEAR(step_accuracy(two), 200.0 / 3.0, 1e-9);
  EXPECT_NEAR(step_accuracy(two), 66.667, 5e-4);
}

TEST(StepAccuracy, WrongArity) {
  std::vector<TrialResult> two{tr("v", 1, 1, true), tr("v", 1, 2, true)};
  try {
    step_accuracy(two);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::WrongArity);
  }
  std::vector<TrialResult> dup{tr("v", 1, 1, true), tr("v", 1, 1, true), tr("v", 1, 3, true)};
  EXPECT_THROW(step_accuracy(dup), Error);
  std::vector<TrialResult> mixed{tr("v", 1, 1, true), tr("v", 2, 2, true), tr("v", 1, 3, true)};
  EXPECT_THROW(step_accuracy(mixed), Error);
}

TEST(Aggregate, SingleVideoPerfect) {
  std::vector<TrialResult> r;
  for (int step = 1; step <= 3; ++step)
    for (int t = 1; t <= 3; ++t) r.push_back(tr("v", step, t, true));
  const auto rep = aggregate(r);
  EXPECT_EQ(rep.summary.at(Mode::Oscar).mean, 100.0);
  EXPECT_EQ(rep.summary.at(Mode::Oscar).sd, 0.0);
  EXPECT_FALSE(rep.delta.has_value());
}

TEST(Aggregate, PopulationSdOverVideos) {
  // Video a: 5 steps, 2 fully correct -> 40. Video b: 5 steps, 3 correct -> 60.
  std::vector<TrialResult> r;
  for (int step = 1; step <= 5; ++step)
    for (int t = 1; t <= 3; ++t) {
      r.push_back(tr("a", step, t, step <= 2));
      r.push_back(tr("b", step, t, step <= 3));
    }
  const auto rep = aggregate(r);
  EXPECT_NEAR(rep.summary.at(Mode::Oscar).mean, 50.0, 1e-12);
  EXPECT_NEAR(rep.summary.at(Mode::Oscar).sd, 10.0, 1e-12);
  const auto sample = aggregate(r, 3, true);
  EXPECT_NEAR(sample.summary.at(Mode::Oscar).sd, std::sqrt(200.0), 1e-12);
}

TEST(Aggregate, DeltaIsExactDifferenceOfMeans) {
  std::vector<TrialResult> r;
  for (int step = 1; step <= 3; ++step)
    for (int t = 1; t <= 3; ++t) {
      r.push_back(tr("v", step, t, t != 2, Mode::Oscar));
      r.push_back(tr("v", step, t, step == 1, Mode::Baseline));
    }
  const auto rep = aggregate(r);
  EXPECT_EQ(*rep.delta, rep.summary.at(Mode::Oscar).mean - rep.summary.at(Mode::Baseline).mean);
  EXPECT_EQ(rep.modes, (std::vector<Mode>{Mode::Baseline, Mode::Oscar}));
}

TEST(Aggregate, PermutationInvariant) {
  Rng rng(21);
  std::vector<TrialResult> r;
  for (const char* v : {"x", "y", "z"})
    for (int step = 1; step <= 4; ++step)
      for (int t = 1; t <= 3; ++t)
        for (Mode m : {Mode::Baseline, Mode::Oscar}) r.push_back(tr(v, step, t, rng.bernoulli(0.5), m));
  const auto ref = aggregate(r);
  for (int k = 0; k < 20; ++k) {
    std::shuffle(r.begin(), r.end(), rng.engine());
    EXPECT_EQ(aggregate(r), ref);
  }
}

TEST(Aggregate, EmptyCorpus) {
  try {
    aggregate({});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyCorpus);
  }
}

TEST(RunCorpus, MatchesBruteForceRecomputation) {
  std::vector<AnnotatedSession> sessions{make_session("a", 4, 10), make_session("b", 3, 12),
                                         make_session("c", 4, 7)};
  MockProvider mock;
  const Mode modes[] = {Mode::Baseline, Mode::Oscar};
  const auto out = run_corpus(sessions, mock, {}, modes, kFlat);

  // Brute force from raw trials.
  std::map<std::tuple<std::string, Mode, int>, int> correct;
  for (const auto& t : out.report.trials) correct[{t.video_id, t.mode, t.step}] += t.correct;
  for (Mode m : modes) {
    std::vector<double> per_video;
    for (const auto& s : sessions) {
      double sum = 0;
      for (const auto& c : s.manifest.annotations) sum += 100.0 * correct[{s.id(), m, c.step}] / 3.0;
      per_video.push_back(sum / s.manifest.annotations.size());
    }
    double mean = 0;
    for (double v : per_video) mean += v / per_video.size();
    double var = 0;
    for (double v : per_video) var += (v - mean) * (v - mean) / per_video.size();
    EXPECT_NEAR(out.report.summary.at(m).mean, mean, 1e-9);
    EXPECT_NEAR(out.report.summary.at(m).sd, std::sqrt(var), 1e-9);
  }
  EXPECT_EQ(out.report.model, "mock-64");
  EXPECT_EQ(out.logs.size(), 3u * 2 * 3);
}

TEST(RunCorpus, ParallelEqualsSerial) {
  std::vector<AnnotatedSession> sessions;
  for (int i = 0; i < 6; ++i) sessions.push_back(make_session("s" + std::to_string(i), 3, 6));
  MockProvider mock;
  const Mode modes[] = {Mode::Baseline, Mode::Oscar};
  EvalConfig serial, parallel;
  parallel.jobs = 4;
  const auto a = run_corpus(sessions, mock, serial, modes, kFlat);
  const auto b = run_corpus(sessions, mock, parallel, modes, kFlat);
  EXPECT_EQ(a.report, b.report);
  EXPECT_EQ(a.logs, b.logs);
}

TEST(RunSession, OscarLogsReplay) {
  const auto s = make_session("v", 4, 10);
  MockProvider mock;
  const Mode modes[] = {Mode::Oscar};
  const auto out = run_session(s, mock, {}, modes, kFlat);
  ASSERT_EQ(out.logs.size(), 3u);
  for (const auto& log : out.logs) {
    EXPECT_EQ(log.entries.size(), 4u);
    EXPECT_NO_THROW(replay(log));
  }
}

TEST(CheckSession, RejectsUnknownAnnotatedStep) {
  auto s = make_session("v", 2, 5);
  s.manifest.annotations.push_back({3, 10.0, 12.0});
  try {
    check_session(s);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnknownStep);
  }
}
