#include <cmath>
#include <functional>
#include <sstream>

#include <gtest/gtest.h>

#include "../support/gradcheck.hpp"
#include "emocal/error.hpp"
#include "emocal/seqnet/model.hpp"

namespace emocal::seqnet {
namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an Error";
  return ErrorCode::ValidationFailed;
}

double sig(double a) { return 1.0 / (1.0 + std::exp(-a)); }

TEST(LstmStep, ZeroParameters) {
  const auto m = RecurrentModel::zeros(CellKind::lstm, 3);
  const auto out = lstm_step(m, Vec{0.7}, Vec(3, 0.0), Vec(3, 0.0));
  EXPECT_EQ(out.h, Vec(3, 0.0));
  EXPECT_EQ(out.c, Vec(3, 0.0));

  const auto carried = lstm_step(m, Vec{0.7}, Vec(3, 0.0), Vec(3, 1.0));
  for (int j = 0; j < 3; ++j) {
    EXPECT_DOUBLE_EQ(carried.c[j], 0.5);
    EXPECT_DOUBLE_EQ(carried.h[j], 0.5 * std::tanh(0.5));
  }
}

TEST(LstmStep, MatchesHandUnrolledOracle) {
  const auto m = RecurrentModel::random(CellKind::lstm, 2, 42);
  const auto& P = m.params;
  const double x = 0.37, h0 = -0.2, h1 = 0.55, c0 = 0.1, c1 = -0.8;
  // Row j of a gate matrix acts on [h0, h1, x].
  auto pre = [&](const char* w, const char* b, int j) {
    return P[w].at(j, 0) * h0 + P[w].at(j, 1) * h1 + P[w].at(j, 2) * x + P[b].at(j, 0);
  };
  const double f0 = sig(pre("W_f", "b_f", 0)), f1 = sig(pre("W_f", "b_f", 1));
  const double i0 = sig(pre("W_i", "b_i", 0)), i1 = sig(pre("W_i", "b_i", 1));
  const double o0 = sig(pre("W_o", "b_o", 0)), o1 = sig(pre("W_o", "b_o", 1));
  const double g0 = std::tanh(pre("W_g", "b_g", 0)), g1 = std::tanh(pre("W_g", "b_g", 1));
  const double nc0 = f0 * c0 + i0 * g0, nc1 = f1 * c1 + i1 * g1;
  const double nh0 = o0 * std::tanh(nc0), nh1 = o1 * std::tanh(nc1);

  const auto out = lstm_step(m, Vec{x}, Vec{h0, h1}, Vec{c0, c1});
  EXPECT_NEAR(out.c[0], nc0, 1e-15);
  EXPECT_NEAR(out.c[1], nc1, 1e-15);
  EXPECT_NEAR(out.h[0], nh0, 1e-15);
  EXPECT_NEAR(out.h[1], nh1, 1e-15);
}

TEST(GruStep, ZeroParameters) {
  const auto m = RecurrentModel::zeros(CellKind::gru, 4);
  EXPECT_EQ(gru_step(m, Vec{0.3}, Vec(4, 0.0)), Vec(4, 0.0));
  for (double v : gru_step(m, Vec{0.3}, Vec(4, 1.0))) EXPECT_DOUBLE_EQ(v, 0.5);
}

TEST(GruStep, MatchesHandUnrolledOracle) {
  const auto m = RecurrentModel::random(CellKind::gru, 2, 42);
  const auto& P = m.params;
  const double x = -0.61, h0 = 0.25, h1 = -0.4;
  auto gate = [&](const char* w, const char* b, int j) {
    return sig(P[w].at(j, 0) * h0 + P[w].at(j, 1) * h1 + P[w].at(j, 2) * x + P[b].at(j, 0));
  };
  const double z0 = gate("W_z", "b_z", 0), z1 = gate("W_z", "b_z", 1);
  const double r0 = gate("W_r", "b_r", 0), r1 = gate("W_r", "b_r", 1);
  // Candidate rows act on [x, r0*h0, r1*h1].
  auto cand = [&](int j) {
    return std::tanh(P["W_n"].at(j, 0) * x + P["W_n"].at(j, 1) * r0 * h0 + P["W_n"].at(j, 2) * r1 * h1 +
                     P["b_n"].at(j, 0));
  };
  const double n0 = cand(0), n1 = cand(1);
  const auto h = gru_step(m, Vec{x}, Vec{h0, h1});
  EXPECT_NEAR(h[0], (1 - z0) * h0 + z0 * n0, 1e-15);
  EXPECT_NEAR(h[1], (1 - z1) * h1 + z1 * n1, 1e-15);
}

TEST(Steps, ShapeMismatch) {
  const auto lstm = RecurrentModel::zeros(CellKind::lstm, 2);
  const auto gru = RecurrentModel::zeros(CellKind::gru, 2);
  EXPECT_EQ(code_of([&] { lstm_step(lstm, Vec{1.0}, Vec(3, 0.0), Vec(2, 0.0)); }), ErrorCode::ShapeMismatch);
  EXPECT_EQ(code_of([&] { lstm_step(lstm, Vec{1.0}, Vec(2, 0.0), Vec(1, 0.0)); }), ErrorCode::ShapeMismatch);
  EXPECT_EQ(code_of([&] { lstm_step(gru, Vec{1.0}, Vec(2, 0.0), Vec(2, 0.0)); }), ErrorCode::ShapeMismatch);
  EXPECT_EQ(code_of([&] { gru_step(gru, Vec{1.0, 2.0}, Vec(2, 0.0)); }), ErrorCode::ShapeMismatch);
  EXPECT_EQ(code_of([&] { gru_step(lstm, Vec{1.0}, Vec(2, 0.0)); }), ErrorCode::ShapeMismatch);
}

TEST(Forward, ZeroParametersGiveEvenOdds) {
  for (CellKind kind : {CellKind::lstm, CellKind::gru}) {
    const auto m = RecurrentModel::zeros(kind, 5);
    const auto p = forward(m, Vec{0.1, 0.9, 0.4}, false);
    EXPECT_EQ(p[0], 0.5);
    EXPECT_EQ(p[1], 0.5);
  }
}

TEST(Forward, InferenceIsDeterministicAndNormalized) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (CellKind kind : {CellKind::lstm, CellKind::gru}) {
    auto m = RecurrentModel::random(kind, 8, 17);
    for (double& v : m.params["W_y"].data) v *= 40.0;  // push towards saturation
    for (int trial = 0; trial < 30; ++trial) {
      Vec w(12);
      for (double& v : w) v = u(rng);
      const auto a = forward(m, w, false);
      const auto b = forward(m, w, false);
      EXPECT_EQ(a, b);
      EXPECT_NEAR(a[0] + a[1], 1.0, 1e-12);
      EXPECT_GE(a[0], 0.0);
      EXPECT_LE(a[1], 1.0);
      const auto d = forward(m, w, true, &rng);
      EXPECT_NEAR(d[0] + d[1], 1.0, 1e-12);
    }
  }
}

TEST(Forward, WindowMustFitInputSize) {
  const auto m = RecurrentModel::zeros(CellKind::gru, 2, 2);
  EXPECT_EQ(code_of([&] { forward(m, Vec{1, 2, 3}, false); }), ErrorCode::ShapeMismatch);
  EXPECT_EQ(code_of([&] { forward(m, Vec{}, false); }), ErrorCode::ShapeMismatch);
}

TEST(Dropout, MaskValuesAndRate) {
  const auto m = RecurrentModel::zeros(CellKind::gru, 1000);
  std::mt19937_64 rng(1);
  const auto mask = sample_dropout_mask(m, rng);
  std::size_t dropped = 0;
  for (double v : mask) {
    EXPECT_TRUE(v == 0.0 || v == 2.0);
    dropped += v == 0.0 ? 1 : 0;
  }
  EXPECT_NEAR(static_cast<double>(dropped) / 1000.0, 0.5, 0.05);
}

TEST(CrossEntropy, Examples) {
  EXPECT_EQ(cross_entropy({1.0, 0.0}, Level::low), 0.0);
  EXPECT_NEAR(cross_entropy({0.5, 0.5}, Level::low), std::log(2.0), 1e-12);
  EXPECT_NEAR(cross_entropy({0.5, 0.5}, Level::high), 0.693147, 1e-6);
  EXPECT_NEAR(cross_entropy({0.9, 0.1}, Level::high), 2.302585, 1e-6);
  EXPECT_NEAR(cross_entropy({1.0, 0.0}, Level::high), -std::log(1e-12), 1e-9);
}

TEST(Accuracy, Examples) {
  using L = Level;
  const std::vector<L> a{L::high, L::low, L::high};
  EXPECT_EQ(accuracy(a, a), 1.0);
  EXPECT_NEAR(accuracy(a, std::vector<L>{L::high, L::high, L::high}), 2.0 / 3.0, 1e-12);
  EXPECT_EQ(accuracy(a, std::vector<L>{L::low, L::high, L::low}), 0.0);
  EXPECT_EQ(code_of([] { accuracy(std::vector<L>{}, std::vector<L>{}); }), ErrorCode::EmptyInput);
  EXPECT_EQ(code_of([&] { accuracy(a, std::vector<L>{L::low}); }), ErrorCode::ShapeMismatch);
}

TEST(Backward, MatchesFiniteDifferences) {
  for (CellKind kind : {CellKind::lstm, CellKind::gru}) {
    const auto m = RecurrentModel::random(kind, 3, 7);
    std::mt19937_64 rng(7);
    std::vector<Vec> windows;
    std::vector<Level> labels;
    testing::random_batch(rng, 4, 5, windows, labels);
    const auto plain = testing::check_gradients(m, windows, labels, nullptr);
    EXPECT_LT(plain.max_relative_error, 1e-4) << to_string(kind);
    EXPECT_EQ(plain.components, m.parameter_count());

    std::vector<Vec> masks;
    for (std::size_t k = 0; k < windows.size(); ++k) masks.push_back(sample_dropout_mask(m, rng));
    EXPECT_LT(testing::check_gradients(m, windows, labels, &masks).max_relative_error, 1e-4) << to_string(kind);
  }
}

TEST(Backward, LongerWindowsAndOtherSeeds) {
  for (CellKind kind : {CellKind::lstm, CellKind::gru}) {
    for (std::uint64_t seed : {11u, 12u}) {
      const auto m = RecurrentModel::random(kind, 3, seed);
      std::mt19937_64 rng(seed);
      std::vector<Vec> windows;
      std::vector<Level> labels;
      testing::random_batch(rng, 3, 16, windows, labels);
      EXPECT_LT(testing::check_gradients(m, windows, labels, nullptr).max_relative_error, 1e-4);
    }
  }
}

TEST(Backward, VanishesForConfidentCorrectModel) {
  auto m = RecurrentModel::zeros(CellKind::gru, 3);
  m.params["b_y"].data = {-30.0, 30.0};
  const std::vector<Vec> windows{{0.1, 0.2}, {0.8, 0.3}};
  const std::vector<Level> labels{Level::high, Level::high};
  EXPECT_LT(backward(m, windows, labels).max_abs(), 1e-6);
}

TEST(Backward, DuplicatedBatchHasSameMeanGradient) {
  const auto m = RecurrentModel::random(CellKind::lstm, 4, 5);
  std::mt19937_64 rng(5);
  std::vector<Vec> windows;
  std::vector<Level> labels;
  testing::random_batch(rng, 3, 6, windows, labels);
  const auto once = backward(m, windows, labels);
  auto w2 = windows;
  auto l2 = labels;
  w2.insert(w2.end(), windows.begin(), windows.end());
  l2.insert(l2.end(), labels.begin(), labels.end());
  const auto twice = backward(m, w2, l2);
  for (std::size_t t = 0; t < once.tensors.size(); ++t) {
    for (std::size_t q = 0; q < once.tensors[t].data.size(); ++q) {
      EXPECT_NEAR(once.tensors[t].data[q], twice.tensors[t].data[q], 1e-12);
    }
  }
}

TEST(Backward, RejectsEmptyAndMismatchedBatches) {
  const auto m = RecurrentModel::zeros(CellKind::gru, 2);
  EXPECT_EQ(code_of([&] { backward(m, {}, std::vector<Level>{}); }), ErrorCode::EmptyInput);
  EXPECT_EQ(code_of([&] { backward(m, {{0.1}}, std::vector<Level>{Level::low, Level::high}); }),
            ErrorCode::ShapeMismatch);
}

TEST(Model, GruHasFewerParametersThanLstm) {
  for (std::size_t h : {1u, 3u, 32u, 64u}) {
    EXPECT_LT(RecurrentModel::zeros(CellKind::gru, h).parameter_count(),
              RecurrentModel::zeros(CellKind::lstm, h).parameter_count());
  }
  // 4 gates of H x (H+1) plus biases, and a 2 x H head.
  EXPECT_EQ(RecurrentModel::zeros(CellKind::lstm, 3).parameter_count(), 4u * 3 * 4 + 4 * 3 + 6 + 2);
  EXPECT_EQ(RecurrentModel::zeros(CellKind::gru, 3).parameter_count(), 3u * 3 * 4 + 3 * 3 + 6 + 2);
}

TEST(Model, ValidateRejectsBadTensors) {
  auto m = RecurrentModel::zeros(CellKind::gru, 2);
  m.params["W_z"].data[0] = NAN;
  EXPECT_EQ(code_of([&] { m.validate(); }), ErrorCode::ValidationFailed);
  auto n = RecurrentModel::zeros(CellKind::lstm, 2);
  n.params.tensors.pop_back();
  EXPECT_EQ(code_of([&] { n.validate(); }), ErrorCode::ShapeMismatch);
  EXPECT_EQ(code_of([] { RecurrentModel::zeros(CellKind::gru, 2, 1, 1.0); }), ErrorCode::ValidationFailed);
}

TEST(Model, TextRoundTripIsExact) {
  const auto m = RecurrentModel::random(CellKind::lstm, 5, 99, 1, 0.3);
  std::stringstream ss;
  write_model(ss, m);
  EXPECT_EQ(read_model(ss), m);

  std::stringstream bad("seqnet 1\nkind gru\nhidden_size 2\ninput_size 1\ndropout_rate 0.5\ntensor W_z 2 3\n1 2\n");
  EXPECT_EQ(code_of([&] { read_model(bad); }), ErrorCode::ParseError);
  std::stringstream junk("hello");
  EXPECT_EQ(code_of([&] { read_model(junk); }), ErrorCode::ParseError);
}

TEST(Train, RecoversPlantedSignal) {
  PlantedOptions opts;
  opts.per_class = 100;
  opts.window = 16;
  const auto data = planted_dataset(opts);
  TrainConfig cfg;
  cfg.epochs = 30;
  cfg.hidden_size = 8;
  for (CellKind kind : {CellKind::lstm, CellKind::gru}) {
    const auto r = train(data, kind, cfg);
    ASSERT_EQ(r.curve.size(), 30u);
    EXPECT_GE(r.curve.back().test_accuracy, 0.95) << to_string(kind);
    EXPECT_EQ(r.train_size + r.test_size, data.size());
  }
}

TEST(Train, SameSeedSameCurve) {
  PlantedOptions opts;
  opts.per_class = 30;
  opts.window = 8;
  const auto data = planted_dataset(opts);
  TrainConfig cfg;
  cfg.epochs = 5;
  cfg.hidden_size = 4;
  const auto a = train(data, CellKind::gru, cfg);
  const auto b = train(data, CellKind::gru, cfg);
  EXPECT_EQ(a.curve, b.curve);
  EXPECT_EQ(a.model, b.model);
  cfg.seed = 2;
  EXPECT_NE(train(data, CellKind::gru, cfg).model, a.model);
}

TEST(Train, ZeroLearningRateFreezesModel) {
  PlantedOptions opts;
  opts.per_class = 20;
  opts.window = 6;
  const auto data = planted_dataset(opts);
  TrainConfig cfg;
  cfg.epochs = 4;
  cfg.hidden_size = 3;
  cfg.learning_rate = 0.0;
  const auto r = train(data, CellKind::lstm, cfg);
  std::mt19937_64 rng(cfg.seed);
  EXPECT_EQ(r.model, RecurrentModel::random(CellKind::lstm, 3, rng(), 1, cfg.dropout_rate));
  for (const auto& s : r.curve) {
    EXPECT_EQ(s.train_loss, r.curve.front().train_loss);
    EXPECT_EQ(s.test_loss, r.curve.front().test_loss);
  }
}

TEST(Train, RejectsSingleClassAndBadConfig) {
  ecg::WindowedDataset one;
  one.window_size = 2;
  one.windows = {{0.1, 0.2}, {0.3, 0.4}};
  one.labels = {Level::low, Level::low};
  EXPECT_EQ(code_of([&] { train(one, CellKind::gru); }), ErrorCode::SingleClassDataset);
  EXPECT_EQ(code_of([] { train({}, CellKind::gru); }), ErrorCode::EmptyInput);
  TrainConfig cfg;
  cfg.train_fraction = 1.0;
  EXPECT_EQ(code_of([&] { cfg.validate(); }), ErrorCode::ValidationFailed);
  cfg = {};
  cfg.learning_rate = -0.1;
  EXPECT_EQ(code_of([&] { cfg.validate(); }), ErrorCode::ValidationFailed);
}

}  // namespace
}  // namespace emocal::seqnet
