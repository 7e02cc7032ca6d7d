#include <atomic>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include <unistd.h>

#include <gtest/gtest.h>

#include "emocal/error.hpp"
#include "emocal/sched/constraints.hpp"
#include "emocal/service/service.hpp"
#include "../support/random_ops.hpp"

using namespace emocal;
using namespace emocal::service;
namespace fs = std::filesystem;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::ParseError;
}

struct TempDir {
  fs::path path;
  TempDir() {
    static int counter = 0;
    path = fs::temp_directory_path() /
           ("emocal_svc_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

ServiceOptions test_options(fs::path dir = {}) {
  ServiceOptions o;
  o.data_dir = std::move(dir);
  o.clock = emocal::testing::counting_clock();
  return o;
}

EventSpec event(std::string name, int minutes, double load = 0.5) {
  EventSpec e;
  e.name = std::move(name);
  e.duration_min = minutes;
  e.cognitive_load = load;
  return e;
}

seqnet::RecurrentModel constant_model(Level level) {
  auto m = seqnet::RecurrentModel::zeros(seqnet::CellKind::gru, 4);
  auto& b = m.params["b_y"];
  b.data = level == Level::high ? std::vector<double>{-5.0, 5.0} : std::vector<double>{5.0, -5.0};
  return m;
}

ecg::EcgRecording short_recording() {
  std::vector<double> bpm(60, 72.0);
  return ecg::generate_synthetic_ecg(bpm, 256.0, 20.0, 3).recording;
}

}  // namespace

TEST(ServiceEvents, AddReturnsIdAndGrowsState) {
  Service svc(test_options());
  auto id = svc.add_event(event("review", 60));
  EXPECT_EQ(id, "evt-1");
  EXPECT_EQ(svc.state()->events.size(), 1u);
  EXPECT_EQ(svc.state()->events[0].id, id);
  EXPECT_EQ(svc.last_seq(), 1);
  EXPECT_EQ(svc.add_event(event("sync", 30)), "evt-2");
}

TEST(ServiceEvents, ZeroDurationIsRejectedWithoutLogging) {
  Service svc(test_options());
  EXPECT_EQ(code_of([&] { svc.add_event(event("bad", 0)); }), ErrorCode::ValidationFailed);
  EXPECT_TRUE(svc.state()->events.empty());
  EXPECT_EQ(svc.last_seq(), 0);
}

TEST(ServiceEvents, SecondRemoveIsNotFound) {
  Service svc(test_options());
  auto id = svc.add_event(event("a", 30));
  svc.remove_event(id);
  EXPECT_EQ(code_of([&] { svc.remove_event(id); }), ErrorCode::NotFound);
  EXPECT_EQ(svc.last_seq(), 2);
}

TEST(ServiceEvents, ExplicitIdsMustBeUnique) {
  Service svc(test_options());
  auto e = event("a", 30);
  e.id = "standup";
  EXPECT_EQ(svc.add_event(e), "standup");
  EXPECT_EQ(code_of([&] { svc.add_event(e); }), ErrorCode::ValidationFailed);
}

TEST(ServiceEvents, GeneratedIdsSkipTakenNames) {
  Service svc(test_options());
  auto e = event("a", 30);
  e.id = "evt-1";
  svc.add_event(e);
  EXPECT_EQ(svc.add_event(event("b", 30)), "evt-2");
  EXPECT_EQ(svc.add_event(event("c", 30)), "evt-3");
}

TEST(ServiceEmotion, DefaultsToNeutral) {
  Service svc(test_options());
  EXPECT_EQ(svc.state()->emotion, EmotionState::neutral());
}

TEST(ServiceEmotion, ManualStoredVerbatim) {
  Service svc(test_options());
  EmotionState e{0.9, 0.2, 0.8, 1.7e9, EmotionSource::manual};
  EXPECT_EQ(svc.set_emotion(e), e);
  EXPECT_EQ(svc.state()->emotion, e);
}

TEST(ServiceEmotion, ManualOutOfRangeRejected) {
  Service svc(test_options());
  EXPECT_EQ(code_of([&] { svc.set_emotion({1.5, 0.5, 0.5}); }), ErrorCode::ValidationFailed);
  EXPECT_EQ(svc.last_seq(), 0);
}

TEST(ServiceEmotion, RecordingWithoutModelsIsModelMissing) {
  Service svc(test_options());
  try {
    svc.set_emotion_from_recording(short_recording());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ModelMissing);
    EXPECT_EQ(e.details()["missing"].size(), 3u);
  }
  EXPECT_EQ(svc.last_seq(), 0);
}

TEST(ServiceEmotion, PartialModelsReportTheMissingDimensions) {
  ModelRegistry reg;
  reg.sequence[0] = constant_model(Level::high);
  Service svc(test_options(), reg);
  try {
    svc.set_emotion_from_recording(short_recording());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ModelMissing);
    EXPECT_EQ(e.details()["missing"], (nlohmann::json{"arousal", "dominance"}));
  }
}

TEST(ServiceEmotion, AllHighModelsGiveThreeQuarters) {
  ModelRegistry reg;
  for (auto& m : reg.sequence) m = constant_model(Level::high);
  Service svc(test_options(), reg);
  auto e = svc.set_emotion_from_recording(short_recording());
  EXPECT_EQ(e.valence, 0.75);
  EXPECT_EQ(e.arousal, 0.75);
  EXPECT_EQ(e.dominance, 0.75);
  EXPECT_EQ(e.source, EmotionSource::biometric);
  EXPECT_EQ(svc.state()->emotion, e);
}

TEST(ServiceEmotion, MixedModelsMapPerDimension) {
  ModelRegistry reg;
  reg.sequence = {constant_model(Level::low), constant_model(Level::high), constant_model(Level::low)};
  Service svc(test_options(), reg);
  auto e = svc.set_emotion_from_recording(short_recording());
  EXPECT_EQ(e.valence, 0.25);
  EXPECT_EQ(e.arousal, 0.75);
  EXPECT_EQ(e.dominance, 0.25);
}

TEST(ServiceEmotion, ActivityWithoutClassifierIsModelMissing) {
  Service svc(test_options());
  auto log = behavior::generate_activity_log({.sessions = 1, .events_per_session = 50});
  EXPECT_EQ(code_of([&] { svc.set_emotion_from_activity(log); }), ErrorCode::ModelMissing);
}

TEST(ServiceEmotion, ActivityMapsThroughClassTable) {
  auto log = behavior::generate_activity_log({.sessions = 6, .events_per_session = 200, .seed = 4});
  ModelRegistry reg;
  reg.activity = behavior::train_activity_classifier(log);
  for (std::size_t c = 0; c < behavior::kMoodCount; ++c)
    reg.class_vad[c] = {c / 11.0, 1.0 - c / 11.0, 0.5};
  const int mood = reg.activity->classify(log);
  Service svc(test_options(), reg);
  auto e = svc.set_emotion_from_activity(log);
  EXPECT_EQ(e.valence, reg.class_vad[mood].valence);
  EXPECT_EQ(e.arousal, reg.class_vad[mood].arousal);
  EXPECT_EQ(e.source, EmotionSource::behavioral);
}

TEST(ServiceEmotion, UnconfiguredClassTableIsNeutral) {
  auto log = behavior::generate_activity_log({.sessions = 4, .events_per_session = 200, .seed = 5});
  ModelRegistry reg;
  reg.activity = behavior::train_activity_classifier(log);
  Service svc(test_options(), reg);
  auto e = svc.set_emotion_from_activity(log);
  EXPECT_EQ(e.valence, 0.5);
  EXPECT_EQ(e.arousal, 0.5);
  EXPECT_EQ(e.dominance, 0.5);
}

TEST(ClassVadTable, ParsesIndexedEntries) {
  auto t = parse_class_vad(nlohmann::json::parse(R"({"3": {"valence": 0.1, "arousal": 0.9, "dominance": 0.2}})"));
  EXPECT_EQ(t[3], (VadTriple{0.1, 0.9, 0.2}));
  EXPECT_EQ(t[0], VadTriple{});
  EXPECT_EQ(code_of([] { parse_class_vad(nlohmann::json::parse(R"({"12": {"valence": 0, "arousal": 0, "dominance": 0}})")); }),
            ErrorCode::ValidationFailed);
  EXPECT_EQ(code_of([] { parse_class_vad(nlohmann::json::parse(R"({"x": {}})")); }), ErrorCode::ValidationFailed);
  EXPECT_EQ(code_of([] { parse_class_vad(nlohmann::json::parse(R"({"1": {"valence": 2, "arousal": 0, "dominance": 0}})")); }),
            ErrorCode::ValidationFailed);
}

TEST(ServiceSolve, NoEvents) {
  Service svc(test_options());
  EXPECT_EQ(code_of([&] { svc.solve(); }), ErrorCode::NoEvents);
  EXPECT_EQ(svc.last_seq(), 0);
}

TEST(ServiceSolve, TwoEventsWithoutViolations) {
  Service svc(test_options());
  svc.add_event(event("a", 60));
  svc.add_event(event("b", 30));
  auto s = svc.solve();
  EXPECT_EQ(s.placements.size(), 2u);
  auto st = svc.state();
  EXPECT_TRUE(sched::all_violations(s.placements, st->emotion, st->config.thresholds).empty());
  ASSERT_TRUE(st->schedule);
  EXPECT_EQ(*st->schedule, s);
  EXPECT_EQ(svc.log().back().kind, EntryKind::schedule_solved);
}

TEST(ServiceSolve, InfeasibleLeavesStateUnchanged) {
  Service svc(test_options());
  auto e = event("appraisal", 30);
  e.sensitive = true;
  svc.add_event(e);
  svc.set_emotion({0.1, 0.95, 0.5});
  const auto before = svc.state();
  const auto seq = svc.last_seq();
  try {
    svc.solve();
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.code(), ErrorCode::Infeasible);
    EXPECT_FALSE(err.details().empty());
  }
  EXPECT_EQ(svc.last_seq(), seq);
  EXPECT_EQ(*svc.state(), *before);
}

TEST(ServiceSolve, RepeatedSolveIsIdentical) {
  Service svc(test_options());
  svc.add_event(event("a", 60, 0.9));
  svc.add_event(event("b", 30, 0.1));
  svc.add_event(event("c", 90, 0.4));
  EXPECT_EQ(svc.solve(), svc.solve());
}

TEST(ServiceConfigChange, AppliesAndLogs) {
  Service svc(test_options());
  ServiceConfig c;
  c.horizon.day_end = ClockTime{12 * 60};
  c.thresholds.t_stress = 0.8;
  EXPECT_EQ(svc.set_config(c), c);
  EXPECT_EQ(svc.state()->config, c);
  c.thresholds.c_low = 0.9;
  EXPECT_EQ(code_of([&] { svc.set_config(c); }), ErrorCode::ValidationFailed);
  EXPECT_EQ(svc.last_seq(), 1);
}

TEST(ServiceConfigChange, NonDefaultInitialConfigIsLogged) {
  auto opts = test_options();
  opts.initial_config.thresholds.break_slots = 2;
  Service svc(opts);
  EXPECT_EQ(svc.last_seq(), 1);
  EXPECT_EQ(replay(svc.log()), *svc.state());
}

TEST(Replay, EmptyLogIsDefaultState) {
  EXPECT_EQ(replay({}), AppState{});
  std::istringstream in("");
  EXPECT_EQ(replay_stream(in), AppState{});
}

TEST(Replay, AddRemoveAddLeavesOneEvent) {
  Service svc(test_options());
  auto a = svc.add_event(event("a", 30));
  svc.remove_event(a);
  svc.add_event(event("b", 30));
  auto s = replay(svc.log());
  ASSERT_EQ(s.events.size(), 1u);
  EXPECT_EQ(s.events[0].name, "b");
  EXPECT_EQ(s, *svc.state());
}

TEST(Replay, TruncatedFinalLineIsCorruptAtItsSeq) {
  Service svc(test_options());
  svc.add_event(event("a", 30));
  svc.add_event(event("b", 30));
  svc.add_event(event("c", 30));
  std::string text;
  for (const auto& e : svc.log()) text += format_entry(e) + "\n";
  text.resize(text.size() - 20);
  std::istringstream in(text);
  try {
    replay_stream(in);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::CorruptLog);
    EXPECT_EQ(e.details()["seq"], 3);
  }
}

TEST(Replay, GapIsCorrupt) {
  Service svc(test_options());
  svc.add_event(event("a", 30));
  svc.add_event(event("b", 30));
  auto log = svc.log();
  log.erase(log.begin());
  try {
    replay(log);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::CorruptLog);
    EXPECT_EQ(e.details()["seq"], 1);
  }
}

TEST(Replay, InapplicableEntryIsCorrupt) {
  LogEntry bad{1, EntryKind::event_removed, {{"id", "ghost"}}, 0.0};
  std::vector<LogEntry> log{bad};
  EXPECT_EQ(code_of([&] { replay(log); }), ErrorCode::CorruptLog);
}

TEST(Replay, EntryTextRoundTrip) {
  LogEntry e{7, EntryKind::emotion_set, EmotionState{0.1, 0.2, 0.3, 1.7e9, EmotionSource::manual}, 1.7e9 + 0.5};
  EXPECT_EQ(parse_entry(format_entry(e)), e);
  EXPECT_EQ(code_of([] { parse_entry("{\"seq\": 1}"); }), ErrorCode::ParseError);
  EXPECT_EQ(code_of([] { parse_entry("not json"); }), ErrorCode::ParseError);
}

TEST(Replay, RandomSequencesMatchLiveState) {
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    auto r = emocal::testing::check_replay_sequence(seed, 40);
    ASSERT_FALSE(r.problem) << "seed " << seed << ": " << *r.problem;
    EXPECT_GT(r.successes, 0u);
  }
}

TEST(Persistence, RandomSequencesRecoverFromDisk) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    TempDir dir;
    auto r = emocal::testing::check_replay_sequence(seed, 40, dir.path);
    ASSERT_FALSE(r.problem) << "seed " << seed << ": " << *r.problem;
  }
}

TEST(Persistence, RestartRecoversState) {
  TempDir dir;
  AppState live;
  {
    Service svc(test_options(dir.path));
    svc.add_event(event("a", 60));
    auto b = svc.add_event(event("b", 30));
    svc.set_emotion({0.3, 0.6, 0.4, 1.7e9 + 0.123456, EmotionSource::manual});
    svc.solve();
    svc.remove_event(b);
    live = *svc.state();
  }
  Service again(test_options(dir.path));
  EXPECT_EQ(*again.state(), live);
  EXPECT_EQ(again.last_seq(), 5);
  EXPECT_EQ(again.add_event(event("c", 30)), "evt-3");
  EXPECT_EQ(recover_state(dir.path), *again.state());
}

TEST(Persistence, SnapshotsAreWrittenAndUsed) {
  TempDir dir;
  auto opts = test_options(dir.path);
  opts.snapshot_every = 3;
  AppState live;
  {
    Service svc(opts);
    for (int i = 0; i < 7; ++i) svc.add_event(event("e" + std::to_string(i), 30));
    live = *svc.state();
  }
  ASSERT_TRUE(fs::exists(dir.path / kSnapshotFile));
  std::ifstream in(dir.path / kSnapshotFile);
  auto snap = nlohmann::json::parse(in);
  EXPECT_EQ(snap["seq"], 6);
  EXPECT_EQ(recover_state(dir.path), live);
  std::ifstream log(dir.path / kLogFile);
  EXPECT_EQ(replay_stream(log), live);
}

TEST(Persistence, TruncatedLogFailsRecovery) {
  TempDir dir;
  {
    Service svc(test_options(dir.path));
    svc.add_event(event("a", 30));
    svc.add_event(event("b", 30));
  }
  auto path = dir.path / kLogFile;
  fs::resize_file(path, fs::file_size(path) - 10);
  try {
    Service svc(test_options(dir.path));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::CorruptLog);
    EXPECT_EQ(e.details()["seq"], 2);
  }
}

TEST(Concurrency, ConcurrentWritersAndReadersStayConsistent) {
  Service svc(test_options());
  std::atomic<bool> done{false};
  std::atomic<int> torn{0};
  std::thread reader([&] {
    while (!done) {
      auto s = svc.state();
      // Every event was added with a generated id, so the count tracks next_id.
      if (static_cast<long long>(s->events.size()) != s->next_id - 1) ++torn;
    }
  });
  std::vector<std::thread> writers;
  for (int t = 0; t < 4; ++t)
    writers.emplace_back([&, t] {
      for (int i = 0; i < 50; ++i) svc.add_event(event("w" + std::to_string(t), 30));
    });
  for (auto& w : writers) w.join();
  done = true;
  reader.join();
  EXPECT_EQ(torn, 0);
  EXPECT_EQ(svc.state()->events.size(), 200u);
  EXPECT_EQ(svc.last_seq(), 200);
  EXPECT_EQ(replay(svc.log()), *svc.state());
}

TEST(ConfigFile, ParsesKeysAndComments) {
  std::istringstream in(
      "# day\nday_start = 08:00\nday_end=12:30\nslot_minutes = 15\n\nalpha_temporal = 2\n"
      "alpha_cognitive=0.5\nalpha_emotional = 1.5\nt_stress = 0.8\nc_high = 0.6\nc_low = 0.2\nbreak_slots = 2\n");
  auto c = parse_config(in);
  EXPECT_EQ(c.horizon.day_start.minutes, 8 * 60);
  EXPECT_EQ(c.horizon.day_end.minutes, 12 * 60 + 30);
  EXPECT_EQ(c.horizon.slot_minutes, 15);
  EXPECT_EQ(c.weights.alpha_temporal, 2.0);
  EXPECT_EQ(c.weights.alpha_cognitive, 0.5);
  EXPECT_EQ(c.weights.alpha_emotional, 1.5);
  EXPECT_EQ(c.thresholds.t_stress, 0.8);
  EXPECT_EQ(c.thresholds.c_high, 0.6);
  EXPECT_EQ(c.thresholds.c_low, 0.2);
  EXPECT_EQ(c.thresholds.break_slots, 2);
}

TEST(ConfigFile, WriteThenParseRoundTrips) {
  ServiceConfig c;
  c.horizon.day_start = ClockTime{7 * 60 + 30};
  c.weights.alpha_emotional = 0.25;
  c.thresholds.break_slots = 3;
  std::stringstream io;
  write_config(io, c);
  EXPECT_EQ(parse_config(io), c);
}

TEST(ConfigFile, RejectsBadInput) {
  auto parse = [](const char* text) {
    std::istringstream in(text);
    return parse_config(in);
  };
  EXPECT_EQ(code_of([&] { parse("colour = blue\n"); }), ErrorCode::ValidationFailed);
  EXPECT_EQ(code_of([&] { parse("t_stress = high\n"); }), ErrorCode::ParseError);
  EXPECT_EQ(code_of([&] { parse("slot_minutes = 7.5\n"); }), ErrorCode::ParseError);
  EXPECT_EQ(code_of([&] { parse("just words\n"); }), ErrorCode::ParseError);
  EXPECT_EQ(code_of([&] { parse("day_start = 19:00\n"); }), ErrorCode::ValidationFailed);
  EXPECT_EQ(code_of([] { load_config("/nonexistent/emocal.conf"); }), ErrorCode::NotFound);
}
