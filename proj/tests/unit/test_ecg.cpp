#include <cmath>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "../support/peak_matching.hpp"
#include "emocal/ecg/pipeline.hpp"
#include "emocal/error.hpp"

namespace emocal::ecg {
namespace {

constexpr long kTwentyMs = 5;  // samples at 256 Hz

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an Error";
  return ErrorCode::ValidationFailed;
}

TEST(DetectRPeaks, FlatSignalHasNoPeaks) {
  EcgRecording rec;
  rec.samples.assign(2560, {0.0, 0.0});
  EXPECT_EQ(code_of([&] { detect_r_peaks(rec); }), ErrorCode::NoPeaksFound);
}

TEST(DetectRPeaks, SixtyBpmPeaksAtMultiplesOfSampleRate) {
  const std::vector<double> profile(10, 60.0);
  const auto syn = generate_synthetic_ecg(profile, 256.0, INFINITY);
  const auto peaks = detect_r_peaks(syn.recording);
  ASSERT_EQ(peaks.size(), 10u);
  for (std::size_t k = 0; k < peaks.size(); ++k) {
    EXPECT_LE(std::labs(static_cast<long>(peaks[k]) - static_cast<long>(256 * k)), 5);
  }
}

TEST(DetectRPeaks, TwoPulsesHalfSecondApart) {
  // Gaussian QRS complexes at samples 256 and 384 of a 3 s recording.
  EcgRecording rec;
  rec.samples.resize(768);
  for (std::size_t i = 0; i < rec.size(); ++i) {
    const double a = (static_cast<double>(i) - 256.0) / 2.56;
    const double b = (static_cast<double>(i) - 384.0) / 2.56;
    const double v = std::exp(-0.5 * a * a) + std::exp(-0.5 * b * b);
    rec.samples[i] = {v, v};
  }
  const auto peaks = detect_r_peaks(rec);
  ASSERT_EQ(peaks.size(), 2u);
  const double rr = static_cast<double>(peaks[1] - peaks[0]) / 256.0;
  EXPECT_NEAR(rr, 0.5, 0.020);
}

TEST(DetectRPeaks, BothChannelsAgreeOnCleanSignal) {
  std::vector<double> profile(20, 72.0);
  for (std::size_t i = 10; i < profile.size(); ++i) profile[i] = 95.0;
  const auto syn = generate_synthetic_ecg(profile, 256.0, INFINITY);
  const auto hr1 = peaks_to_hr(detect_r_peaks(syn.recording, 1), 256.0);
  const auto hr2 = peaks_to_hr(detect_r_peaks(syn.recording, 2), 256.0);
  EXPECT_EQ(hr1.bpm, hr2.bpm);
}

TEST(DetectRPeaks, PrecisionRecallAtTenDb) {
  for (double bpm : {50.0, 90.0, 150.0}) {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
      const std::vector<double> profile(30, bpm);
      const auto syn = generate_synthetic_ecg(profile, 256.0, 10.0, seed);
      const auto m = testing::match_peaks(syn.planted_peaks, detect_r_peaks(syn.recording), kTwentyMs);
      EXPECT_GE(m.precision(), 0.99) << bpm << " bpm seed " << seed;
      EXPECT_GE(m.recall(), 0.99) << bpm << " bpm seed " << seed;
    }
  }
}

TEST(DetectRPeaks, InvalidChannelAndShortRecording) {
  const auto syn = generate_synthetic_ecg(std::vector<double>(3, 60.0), 256.0, INFINITY);
  EXPECT_EQ(code_of([&] { detect_r_peaks(syn.recording, 3); }), ErrorCode::ValidationFailed);
  EcgRecording tiny;
  tiny.samples.assign(100, {0.0, 0.0});
  EXPECT_EQ(code_of([&] { detect_r_peaks(tiny); }), ErrorCode::ValidationFailed);
}

TEST(PeaksToHr, Examples) {
  EXPECT_EQ(peaks_to_hr(std::vector<std::size_t>{0, 256}, 256.0).bpm, (std::vector<double>{60.0}));
  EXPECT_EQ(peaks_to_hr(std::vector<std::size_t>{0, 128, 256}, 256.0).bpm, (std::vector<double>{120.0, 120.0}));
  // 192 samples = 0.75 s -> 60 / 0.75 = 80 bpm.
  EXPECT_EQ(peaks_to_hr(std::vector<std::size_t>{0, 256, 448}, 256.0).bpm, (std::vector<double>{60.0, 80.0}));
}

TEST(PeaksToHr, ErrorsAndArtifactRejection) {
  EXPECT_EQ(code_of([] { peaks_to_hr(std::vector<std::size_t>{5}, 256.0); }), ErrorCode::TooFewPeaks);
  // 40 samples (384 bpm) and 1000 samples (15.4 bpm) are implausible.
  const auto hr = peaks_to_hr(std::vector<std::size_t>{0, 40, 296, 1296}, 256.0);
  EXPECT_EQ(hr.bpm, (std::vector<double>{60.0}));
  EXPECT_EQ(hr.peak_indices.size(), 4u);
}

TEST(PeaksToHr, MatchesPlantedRrElementwise) {
  std::vector<double> profile;
  for (int s = 0; s < 40; ++s) profile.push_back(55.0 + 2.5 * s);
  const auto syn = generate_synthetic_ecg(profile, 256.0, INFINITY);
  const auto hr = peaks_to_hr(syn.planted_peaks, 256.0);
  ASSERT_EQ(hr.bpm.size(), syn.planted_peaks.size() - 1);
  for (std::size_t k = 0; k < hr.bpm.size(); ++k) {
    const double rr = static_cast<double>(syn.planted_peaks[k + 1] - syn.planted_peaks[k]) / 256.0;
    EXPECT_NEAR(hr.bpm[k], 60.0 / rr, 1e-9);
  }
}

TEST(Normalize, Examples) {
  EXPECT_EQ(normalize(std::vector<double>{0, 5, 10}), (std::vector<double>{0, 0.5, 1}));
  EXPECT_EQ(normalize(std::vector<double>{7, 7, 7}), (std::vector<double>{0, 0, 0}));
  EXPECT_EQ(normalize(std::vector<double>{60, 80, 100, 70}), (std::vector<double>{0, 0.5, 1, 0.25}));
  EXPECT_EQ(code_of([] { normalize(std::vector<double>{}); }), ErrorCode::EmptyInput);
}

TEST(Normalize, Idempotent) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(40.0, 180.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> x(1 + trial);
    for (auto& v : x) v = u(rng);
    const auto once = normalize(x);
    EXPECT_EQ(normalize(once), once);
  }
}

TEST(ZeroPad, Examples) {
  EXPECT_EQ(zero_pad({{1, 2}, {3}}), (std::vector<std::vector<double>>{{1, 2}, {3, 0}}));
  const std::vector<std::vector<double>> equal{{1, 2}, {3, 4}};
  EXPECT_EQ(zero_pad(equal), equal);
  const auto padded = zero_pad({{1, 2, 3}, {4, 5, 6, 7, 8}, {9, 10, 11, 12}});
  for (const auto& s : padded) EXPECT_EQ(s.size(), 5u);
  EXPECT_EQ(padded[0], (std::vector<double>{1, 2, 3, 0, 0}));
  EXPECT_EQ(padded[2], (std::vector<double>{9, 10, 11, 12, 0}));
}

TEST(ZeroPad, PreservesPrefixes) {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> len(0, 30);
  std::vector<std::vector<double>> set(12);
  for (auto& s : set) {
    s.resize(static_cast<std::size_t>(len(rng)));
    std::iota(s.begin(), s.end(), 1.0);
  }
  const auto padded = zero_pad(set);
  for (std::size_t i = 0; i < set.size(); ++i) {
    EXPECT_TRUE(std::equal(set[i].begin(), set[i].end(), padded[i].begin()));
  }
}

TEST(BinarizeRating, Threshold) {
  EXPECT_EQ(binarize_rating(5), Level::high);
  EXPECT_EQ(binarize_rating(4), Level::high);
  EXPECT_EQ(binarize_rating(3), Level::low);
  EXPECT_EQ(binarize_rating(1), Level::low);
  EXPECT_EQ(code_of([] { binarize_rating(0); }), ErrorCode::OutOfRange);
  EXPECT_EQ(code_of([] { binarize_rating(6); }), ErrorCode::OutOfRange);
}

TEST(MakeWindows, CountsAndContents) {
  EXPECT_EQ(make_windows(std::vector<double>{1, 2, 3, 4, 5}, Level::high, 2).size(), 3u);
  const auto ds = make_windows(std::vector<double>{0.1, 0.2, 0.3}, Level::low, 2);
  ASSERT_EQ(ds.size(), 1u);
  EXPECT_EQ(ds.windows[0], (std::vector<double>{0.1, 0.2}));
  EXPECT_EQ(ds.labels[0], Level::low);
  EXPECT_EQ(code_of([] { make_windows(std::vector<double>{1, 2}, Level::low, 2); }), ErrorCode::SeriesTooShort);
}

TEST(SyntheticEcg, ConstantSixtyBpm) {
  const auto syn = generate_synthetic_ecg(std::vector<double>(10, 60.0), 256.0, INFINITY);
  EXPECT_GE(syn.planted_peaks.size(), 10u);
  EXPECT_LE(syn.planted_peaks.size(), 11u);
  for (std::size_t k = 1; k < syn.planted_peaks.size(); ++k) {
    EXPECT_EQ(syn.planted_peaks[k] - syn.planted_peaks[k - 1], 256u);
  }
  EXPECT_EQ(syn.recording.size(), 2560u);
}

TEST(SyntheticEcg, NoiseDoesNotMovePlantedPeaks) {
  const std::vector<double> profile{70, 80, 90, 100, 110, 120};
  const auto clean = generate_synthetic_ecg(profile, 256.0, INFINITY);
  const auto noisy = generate_synthetic_ecg(profile, 256.0, 10.0, 42);
  EXPECT_EQ(clean.planted_peaks, noisy.planted_peaks);
  EXPECT_NE(clean.recording.samples, noisy.recording.samples);
}

TEST(SyntheticEcg, TwoRegimesRecovered) {
  std::vector<double> profile(30, 60.0);
  profile.resize(60, 120.0);
  const auto syn = generate_synthetic_ecg(profile, 256.0, 10.0, 9);
  const auto peaks = detect_r_peaks(syn.recording);
  const auto hr = peaks_to_hr(peaks, 256.0);
  double sum[2] = {0, 0};
  int count[2] = {0, 0};
  for (std::size_t k = 0; k + 1 < peaks.size(); ++k) {
    // Classify each interval by its end; the crossing interval belongs to the first half.
    const int half = peaks[k] >= 30 * 256 ? 1 : 0;
    sum[half] += hr.bpm[k];
    ++count[half];
  }
  EXPECT_NEAR(sum[0] / count[0], 60.0, 1.0);
  EXPECT_NEAR(sum[1] / count[1], 120.0, 1.0);
}

TEST(SyntheticEcg, RejectsImplausibleRates) {
  EXPECT_EQ(code_of([] { generate_synthetic_ecg(std::vector<double>{60, 230}, 256.0, INFINITY); }),
            ErrorCode::ValidationFailed);
}

TEST(RecordingFile, RoundTripThroughText) {
  SyntheticEcgOptions opts;
  opts.ratings = Ratings{4, 2, 5};
  const auto syn = generate_synthetic_ecg(std::vector<double>(3, 75.0), opts);
  std::stringstream ss;
  write_recording(ss, syn.recording);
  const auto back = read_recording(ss);
  EXPECT_EQ(back.sample_rate_hz, 256.0);
  ASSERT_TRUE(back.ratings.has_value());
  EXPECT_EQ(*back.ratings, (Ratings{4, 2, 5}));
  ASSERT_EQ(back.size(), syn.recording.size());
  for (std::size_t i = 0; i < back.size(); ++i) EXPECT_NEAR(back.samples[i][0], syn.recording.samples[i][0], 1e-9);

  std::stringstream bad("256\n1.0 2.0\nnot numbers\n");
  EXPECT_EQ(code_of([&] { read_recording(bad); }), ErrorCode::ParseError);
}

}  // namespace
}  // namespace emocal::ecg
