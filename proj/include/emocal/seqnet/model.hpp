#pragma once

// Recurrent binary classifiers (LSTM and GRU) over windows of scalar
// samples, with hand-written backpropagation through time.

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "emocal/domain.hpp"
#include "emocal/ecg/pipeline.hpp"

namespace emocal::seqnet {

enum class CellKind { lstm, gru };

std::string_view to_string(CellKind kind);
CellKind cell_kind_from_string(std::string_view text);

using Vec = std::vector<double>;

/// Row-major dense matrix; a bias vector is a matrix with one column.
struct Tensor {
  std::string name;
  std::size_t rows = 0;
  std::size_t cols = 0;
  Vec data;

  Tensor() = default;
  Tensor(std::string name, std::size_t rows, std::size_t cols)
      : name(std::move(name)), rows(rows), cols(cols), data(rows * cols, 0.0) {}

  double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

  bool operator==(const Tensor&) const = default;
};

/// Named tensors in a fixed order. Gradients use the same layout as the
/// parameters they belong to.
struct ParameterSet {
  std::vector<Tensor> tensors;

  Tensor& operator[](std::string_view name);
  const Tensor& operator[](std::string_view name) const;
  std::size_t size() const;  // total number of scalars
  double max_abs() const;

  bool operator==(const ParameterSet&) const = default;
};

// Tensor names. Gate matrices act on [h_prev, x]; the GRU candidate matrix
// acts on [x, r * h_prev]. The head maps the hidden state to two logits.
//   lstm: W_f W_i W_o W_g (H x (H+I)), b_f b_i b_o b_g (H)
//   gru:  W_z W_r (H x (H+I)), W_n (H x (I+H)), b_z b_r b_n (H)
//   both: W_y (2 x H), b_y (2)
struct RecurrentModel {
  CellKind kind = CellKind::gru;
  std::size_t hidden_size = 32;
  std::size_t input_size = 1;
  double dropout_rate = 0.5;
  ParameterSet params;

  /// Zero-initialized model of the requested shape.
  static RecurrentModel zeros(CellKind kind, std::size_t hidden_size, std::size_t input_size = 1,
                              double dropout_rate = 0.5);
  /// Weights uniform in +-1/sqrt(hidden_size).
  static RecurrentModel random(CellKind kind, std::size_t hidden_size, std::uint64_t seed,
                               std::size_t input_size = 1, double dropout_rate = 0.5);

  std::size_t parameter_count() const { return params.size(); }
  /// Throws ShapeMismatch on inconsistent tensors, ValidationFailed on
  /// non-finite values or a dropout rate outside [0,1).
  void validate() const;

  bool operator==(const RecurrentModel&) const = default;
};

struct LstmOutput {
  Vec h;
  Vec c;
};

/// One LSTM step. Throws ShapeMismatch on wrong sizes or a GRU model.
LstmOutput lstm_step(const RecurrentModel& m, std::span<const double> x, std::span<const double> h_prev,
                     std::span<const double> c_prev);

/// One GRU step. Throws ShapeMismatch on wrong sizes or an LSTM model.
Vec gru_step(const RecurrentModel& m, std::span<const double> x, std::span<const double> h_prev);

/// Inverted-dropout mask for the final hidden state: each entry is 0 with
/// probability dropout_rate, otherwise 1/(1-dropout_rate).
Vec sample_dropout_mask(const RecurrentModel& m, std::mt19937_64& rng);

/// Probability pair (p_low, p_high). The window holds W * input_size values,
/// consumed in time order from a zero initial state. With training set,
/// dropout is applied to the final hidden state using rng.
std::array<double, 2> forward(const RecurrentModel& m, std::span<const double> window, bool training,
                              std::mt19937_64* rng = nullptr);
/// Same, with an explicit mask (empty means no dropout).
std::array<double, 2> forward_with_mask(const RecurrentModel& m, std::span<const double> window,
                                        std::span<const double> mask);

Level predict(const RecurrentModel& m, std::span<const double> window);

inline constexpr double kProbabilityFloor = 1e-12;

/// -log p[y], with p[y] clamped below at 1e-12.
double cross_entropy(const std::array<double, 2>& p, Level y);

/// Fraction of positions where preds and labels agree. Throws EmptyInput on
/// empty input and ShapeMismatch on unequal lengths.
double accuracy(std::span<const Level> preds, std::span<const Level> labels);

/// Mean cross-entropy over a batch; masks[k] (when given) is the dropout
/// mask for sample k.
double mean_loss(const RecurrentModel& m, const std::vector<Vec>& windows, std::span<const Level> labels,
                 const std::vector<Vec>* masks = nullptr);

/// Exact gradient of mean_loss with respect to every parameter tensor.
ParameterSet backward(const RecurrentModel& m, const std::vector<Vec>& windows, std::span<const Level> labels,
                      const std::vector<Vec>* masks = nullptr);

struct TrainConfig {
  std::size_t hidden_size = 32;
  std::size_t epochs = 50;
  std::size_t batch_size = 16;
  double learning_rate = 0.05;
  double train_fraction = 0.8;
  double dropout_rate = 0.5;
  std::uint64_t seed = 1;

  /// learning_rate >= 0 (zero freezes the model), split in (0,1).
  void validate() const;
};

struct EpochStats {
  std::size_t epoch = 0;
  double train_loss = 0.0;  // inference mode, whole training split
  double test_loss = 0.0;
  double test_accuracy = 0.0;

  bool operator==(const EpochStats&) const = default;
};

struct TrainResult {
  RecurrentModel model;
  std::vector<EpochStats> curve;
  std::size_t train_size = 0;
  std::size_t test_size = 0;
};

/// Mini-batch gradient descent with a seeded shuffle and split. Throws
/// SingleClassDataset unless both labels occur, EmptyInput on an empty set.
TrainResult train(const ecg::WindowedDataset& data, CellKind kind, const TrainConfig& cfg = {});

struct PlantedOptions {
  std::size_t per_class = 200;
  std::size_t window = ecg::kDefaultWindow;
  double low_mean = 0.2;
  double high_mean = 0.8;
  double noise_sd = 0.1;
  std::uint64_t seed = 1;
};

/// Windows whose values are drawn around a class-dependent mean, for checking
/// that training can recover a planted signal.
ecg::WindowedDataset planted_dataset(const PlantedOptions& opts = {});

// Text format: a header of key/value lines, then one "tensor <name> <rows>
// <cols>" line per tensor followed by its values, 17 significant digits.
void write_model(std::ostream& out, const RecurrentModel& m);
RecurrentModel read_model(std::istream& in);
void save_model(const std::string& path, const RecurrentModel& m);
RecurrentModel load_model(const std::string& path);

}  // namespace emocal::seqnet
