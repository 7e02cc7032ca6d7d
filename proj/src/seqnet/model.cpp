#include "emocal/seqnet/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "emocal/error.hpp"

namespace emocal::seqnet {

namespace {

[[noreturn]] void shape_error(const std::string& what) { throw Error(ErrorCode::ShapeMismatch, what); }

double sigmoid(double a) { return 1.0 / (1.0 + std::exp(-a)); }

// out = W * in + b
void affine(const Tensor& w, const Tensor& b, std::span<const double> in, std::span<double> out) {
  for (std::size_t r = 0; r < w.rows; ++r) {
    const double* row = &w.data[r * w.cols];
    double acc = b.data[r];
    for (std::size_t c = 0; c < w.cols; ++c) acc += row[c] * in[c];
    out[r] = acc;
  }
}

// grad_w += outer(delta, in); grad_b += delta
void add_outer(Tensor& gw, Tensor& gb, std::span<const double> delta, std::span<const double> in) {
  for (std::size_t r = 0; r < gw.rows; ++r) {
    double* row = &gw.data[r * gw.cols];
    for (std::size_t c = 0; c < gw.cols; ++c) row[c] += delta[r] * in[c];
    gb.data[r] += delta[r];
  }
}

// out += W^T * delta
void transpose_mul_add(const Tensor& w, std::span<const double> delta, std::span<double> out) {
  for (std::size_t r = 0; r < w.rows; ++r) {
    const double* row = &w.data[r * w.cols];
    for (std::size_t c = 0; c < w.cols; ++c) out[c] += row[c] * delta[r];
  }
}

std::vector<Tensor> layout(CellKind kind, std::size_t h, std::size_t in) {
  std::vector<Tensor> t;
  if (kind == CellKind::lstm) {
    for (const char* g : {"f", "i", "o", "g"}) t.emplace_back(std::string("W_") + g, h, h + in);
    for (const char* g : {"f", "i", "o", "g"}) t.emplace_back(std::string("b_") + g, h, 1);
  } else {
    t.emplace_back("W_z", h, h + in);
    t.emplace_back("W_r", h, h + in);
    t.emplace_back("W_n", h, in + h);
    for (const char* g : {"z", "r", "n"}) t.emplace_back(std::string("b_") + g, h, 1);
  }
  t.emplace_back("W_y", 2, h);
  t.emplace_back("b_y", 2, 1);
  return t;
}

void check_step_shapes(const RecurrentModel& m, CellKind kind, std::size_t x, std::size_t h) {
  if (m.kind != kind) shape_error("model is " + std::string(to_string(m.kind)) + ", not " + std::string(to_string(kind)));
  if (x != m.input_size) shape_error("input has " + std::to_string(x) + " values, model expects " + std::to_string(m.input_size));
  if (h != m.hidden_size) shape_error("hidden state has " + std::to_string(h) + " values, model expects " + std::to_string(m.hidden_size));
}

// Per-step activations kept for the backward pass. For LSTM the four gate
// vectors are f, i, o, g; for GRU they are z, r, n (the fourth is unused).
struct Trace {
  std::vector<Vec> h;  // h[0] is the zero initial state
  std::vector<Vec> c;
  std::vector<std::array<Vec, 4>> gates;
  Vec dropped;
  std::array<double, 2> p{};
};

void lstm_cell(const RecurrentModel& m, std::span<const double> x, std::span<const double> h_prev,
               std::span<const double> c_prev, std::array<Vec, 4>& gates, Vec& c, Vec& h) {
  const std::size_t H = m.hidden_size;
  Vec z(h_prev.begin(), h_prev.end());
  z.insert(z.end(), x.begin(), x.end());
  static const char* const kW[] = {"W_f", "W_i", "W_o", "W_g"};
  static const char* const kB[] = {"b_f", "b_i", "b_o", "b_g"};
  for (int k = 0; k < 4; ++k) {
    gates[k].assign(H, 0.0);
    affine(m.params[kW[k]], m.params[kB[k]], z, gates[k]);
    for (double& v : gates[k]) v = k == 3 ? std::tanh(v) : sigmoid(v);
  }
  c.assign(H, 0.0);
  h.assign(H, 0.0);
  for (std::size_t j = 0; j < H; ++j) {
    c[j] = gates[0][j] * c_prev[j] + gates[1][j] * gates[3][j];
    h[j] = gates[2][j] * std::tanh(c[j]);
  }
}

void gru_cell(const RecurrentModel& m, std::span<const double> x, std::span<const double> h_prev,
              std::array<Vec, 4>& gates, Vec& h) {
  const std::size_t H = m.hidden_size;
  Vec z(h_prev.begin(), h_prev.end());
  z.insert(z.end(), x.begin(), x.end());
  gates[0].assign(H, 0.0);
  gates[1].assign(H, 0.0);
  affine(m.params["W_z"], m.params["b_z"], z, gates[0]);
  affine(m.params["W_r"], m.params["b_r"], z, gates[1]);
  for (std::size_t j = 0; j < H; ++j) {
    gates[0][j] = sigmoid(gates[0][j]);
    gates[1][j] = sigmoid(gates[1][j]);
  }
  Vec u(x.begin(), x.end());
  for (std::size_t j = 0; j < H; ++j) u.push_back(gates[1][j] * h_prev[j]);
  gates[2].assign(H, 0.0);
  affine(m.params["W_n"], m.params["b_n"], u, gates[2]);
  h.assign(H, 0.0);
  for (std::size_t j = 0; j < H; ++j) {
    gates[2][j] = std::tanh(gates[2][j]);
    h[j] = (1.0 - gates[0][j]) * h_prev[j] + gates[0][j] * gates[2][j];
  }
}

std::size_t steps_in(const RecurrentModel& m, std::span<const double> window) {
  if (window.empty() || window.size() % m.input_size != 0) {
    shape_error("window of " + std::to_string(window.size()) + " values does not fit input_size " +
                std::to_string(m.input_size));
  }
  return window.size() / m.input_size;
}

Trace run(const RecurrentModel& m, std::span<const double> window, std::span<const double> mask) {
  const std::size_t T = steps_in(m, window);
  const std::size_t H = m.hidden_size;
  if (!mask.empty() && mask.size() != H) shape_error("dropout mask size differs from hidden_size");
  Trace tr;
  tr.h.assign(T + 1, Vec(H, 0.0));
  tr.c.assign(T + 1, Vec(H, 0.0));
  tr.gates.resize(T);
  for (std::size_t t = 0; t < T; ++t) {
    const auto x = window.subspan(t * m.input_size, m.input_size);
    if (m.kind == CellKind::lstm) {
      lstm_cell(m, x, tr.h[t], tr.c[t], tr.gates[t], tr.c[t + 1], tr.h[t + 1]);
    } else {
      gru_cell(m, x, tr.h[t], tr.gates[t], tr.h[t + 1]);
    }
  }
  tr.dropped = tr.h[T];
  if (!mask.empty()) {
    for (std::size_t j = 0; j < H; ++j) tr.dropped[j] *= mask[j];
  }
  std::array<double, 2> logits{};
  affine(m.params["W_y"], m.params["b_y"], tr.dropped, logits);
  const double top = std::max(logits[0], logits[1]);
  const double e0 = std::exp(logits[0] - top);
  const double e1 = std::exp(logits[1] - top);
  tr.p = {e0 / (e0 + e1), e1 / (e0 + e1)};
  return tr;
}

void check_batch(const std::vector<Vec>& windows, std::span<const Level> labels, const std::vector<Vec>* masks) {
  if (windows.empty()) throw Error(ErrorCode::EmptyInput, "batch is empty");
  if (windows.size() != labels.size()) shape_error("batch and label counts differ");
  if (masks && masks->size() != windows.size()) shape_error("batch and mask counts differ");
}

std::span<const double> mask_for(const std::vector<Vec>* masks, std::size_t k) {
  return masks ? std::span<const double>((*masks)[k]) : std::span<const double>();
}

}  // namespace

std::string_view to_string(CellKind kind) { return kind == CellKind::lstm ? "lstm" : "gru"; }

CellKind cell_kind_from_string(std::string_view text) {
  if (text == "lstm") return CellKind::lstm;
  if (text == "gru") return CellKind::gru;
  throw Error(ErrorCode::ValidationFailed, "unknown cell kind '" + std::string(text) + "'");
}

Tensor& ParameterSet::operator[](std::string_view name) {
  for (auto& t : tensors) {
    if (t.name == name) return t;
  }
  shape_error("no tensor named '" + std::string(name) + "'");
}

const Tensor& ParameterSet::operator[](std::string_view name) const {
  for (const auto& t : tensors) {
    if (t.name == name) return t;
  }
  shape_error("no tensor named '" + std::string(name) + "'");
}

std::size_t ParameterSet::size() const {
  std::size_t n = 0;
  for (const auto& t : tensors) n += t.data.size();
  return n;
}

double ParameterSet::max_abs() const {
  double m = 0.0;
  for (const auto& t : tensors) {
    for (double v : t.data) m = std::max(m, std::abs(v));
  }
  return m;
}

RecurrentModel RecurrentModel::zeros(CellKind kind, std::size_t hidden_size, std::size_t input_size,
                                     double dropout_rate) {
  RecurrentModel m;
  m.kind = kind;
  m.hidden_size = hidden_size;
  m.input_size = input_size;
  m.dropout_rate = dropout_rate;
  m.params.tensors = layout(kind, hidden_size, input_size);
  m.validate();
  return m;
}

RecurrentModel RecurrentModel::random(CellKind kind, std::size_t hidden_size, std::uint64_t seed,
                                      std::size_t input_size, double dropout_rate) {
  RecurrentModel m = zeros(kind, hidden_size, input_size, dropout_rate);
  const double k = 1.0 / std::sqrt(static_cast<double>(hidden_size));
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-k, k);
  for (auto& t : m.params.tensors) {
    for (double& v : t.data) v = u(rng);
  }
  return m;
}

void RecurrentModel::validate() const {
  if (hidden_size == 0 || input_size == 0) shape_error("hidden_size and input_size must be positive");
  const auto expected = layout(kind, hidden_size, input_size);
  if (expected.size() != params.tensors.size()) shape_error("wrong number of parameter tensors");
  for (std::size_t k = 0; k < expected.size(); ++k) {
    const auto& t = params.tensors[k];
    if (t.name != expected[k].name || t.rows != expected[k].rows || t.cols != expected[k].cols ||
        t.data.size() != t.rows * t.cols) {
      shape_error("tensor '" + t.name + "' does not match the " + std::string(to_string(kind)) + " layout");
    }
    if (!std::all_of(t.data.begin(), t.data.end(), [](double v) { return std::isfinite(v); })) {
      throw Error(ErrorCode::ValidationFailed, "tensor '" + t.name + "' has non-finite values");
    }
  }
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) {
    throw Error(ErrorCode::ValidationFailed, "dropout_rate must lie in [0,1)");
  }
}

LstmOutput lstm_step(const RecurrentModel& m, std::span<const double> x, std::span<const double> h_prev,
                     std::span<const double> c_prev) {
  check_step_shapes(m, CellKind::lstm, x.size(), h_prev.size());
  if (c_prev.size() != m.hidden_size) shape_error("cell state size differs from hidden_size");
  std::array<Vec, 4> gates;
  LstmOutput out;
  lstm_cell(m, x, h_prev, c_prev, gates, out.c, out.h);
  return out;
}

Vec gru_step(const RecurrentModel& m, std::span<const double> x, std::span<const double> h_prev) {
  check_step_shapes(m, CellKind::gru, x.size(), h_prev.size());
  std::array<Vec, 4> gates;
  Vec h;
  gru_cell(m, x, h_prev, gates, h);
  return h;
}

Vec sample_dropout_mask(const RecurrentModel& m, std::mt19937_64& rng) {
  Vec mask(m.hidden_size, 1.0);
  if (m.dropout_rate <= 0.0) return mask;
  const double keep = 1.0 - m.dropout_rate;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (double& v : mask) v = u(rng) < m.dropout_rate ? 0.0 : 1.0 / keep;
  return mask;
}

std::array<double, 2> forward_with_mask(const RecurrentModel& m, std::span<const double> window,
                                        std::span<const double> mask) {
  return run(m, window, mask).p;
}

std::array<double, 2> forward(const RecurrentModel& m, std::span<const double> window, bool training,
                              std::mt19937_64* rng) {
  if (!training) return forward_with_mask(m, window, {});
  if (!rng) throw Error(ErrorCode::ValidationFailed, "training-mode forward needs a random generator");
  const Vec mask = sample_dropout_mask(m, *rng);
  return forward_with_mask(m, window, mask);
}

Level predict(const RecurrentModel& m, std::span<const double> window) {
  const auto p = forward(m, window, false);
  return p[1] > p[0] ? Level::high : Level::low;
}

double cross_entropy(const std::array<double, 2>& p, Level y) {
  const double py = p[y == Level::high ? 1 : 0];
  return -std::log(std::max(py, kProbabilityFloor));
}

double accuracy(std::span<const Level> preds, std::span<const Level> labels) {
  if (preds.empty()) throw Error(ErrorCode::EmptyInput, "no predictions to score");
  if (preds.size() != labels.size()) shape_error("prediction and label counts differ");
  std::size_t correct = 0;
  for (std::size_t k = 0; k < preds.size(); ++k) correct += preds[k] == labels[k] ? 1 : 0;
  return static_cast<double>(correct) / static_cast<double>(preds.size());
}

double mean_loss(const RecurrentModel& m, const std::vector<Vec>& windows, std::span<const Level> labels,
                 const std::vector<Vec>* masks) {
  check_batch(windows, labels, masks);
  double total = 0.0;
  for (std::size_t k = 0; k < windows.size(); ++k) {
    total += cross_entropy(run(m, windows[k], mask_for(masks, k)).p, labels[k]);
  }
  return total / static_cast<double>(windows.size());
}

ParameterSet backward(const RecurrentModel& m, const std::vector<Vec>& windows, std::span<const Level> labels,
                      const std::vector<Vec>* masks) {
  check_batch(windows, labels, masks);
  const std::size_t H = m.hidden_size;
  const std::size_t I = m.input_size;
  const double scale = 1.0 / static_cast<double>(windows.size());

  ParameterSet grad;
  grad.tensors = layout(m.kind, H, I);
  const bool lstm = m.kind == CellKind::lstm;
  static const char* const kLstmW[] = {"W_f", "W_i", "W_o", "W_g"};
  static const char* const kLstmB[] = {"b_f", "b_i", "b_o", "b_g"};

  for (std::size_t k = 0; k < windows.size(); ++k) {
    const auto mask = mask_for(masks, k);
    const Trace tr = run(m, windows[k], mask);
    const std::size_t T = tr.gates.size();

    std::array<double, 2> dlogits = tr.p;
    dlogits[labels[k] == Level::high ? 1 : 0] -= 1.0;
    // The clamp in cross_entropy is flat below the floor.
    if (tr.p[labels[k] == Level::high ? 1 : 0] < kProbabilityFloor) dlogits = {0.0, 0.0};
    for (double& d : dlogits) d *= scale;
    add_outer(grad["W_y"], grad["b_y"], dlogits, tr.dropped);

    Vec dh(H, 0.0);
    transpose_mul_add(m.params["W_y"], dlogits, dh);
    if (!mask.empty()) {
      for (std::size_t j = 0; j < H; ++j) dh[j] *= mask[j];
    }
    Vec dc(H, 0.0);

    for (std::size_t t = T; t-- > 0;) {
      const auto x = std::span<const double>(windows[k]).subspan(t * I, I);
      const Vec& h_prev = tr.h[t];
      const auto& g = tr.gates[t];
      Vec z(h_prev);
      z.insert(z.end(), x.begin(), x.end());
      Vec dz(H + I, 0.0);
      Vec dh_prev(H, 0.0);

      if (lstm) {
        const Vec& c = tr.c[t + 1];
        const Vec& c_prev = tr.c[t];
        std::array<Vec, 4> da;
        for (auto& v : da) v.assign(H, 0.0);
        for (std::size_t j = 0; j < H; ++j) {
          const double tc = std::tanh(c[j]);
          const double d_o = dh[j] * tc;
          const double dcj = dc[j] + dh[j] * g[2][j] * (1.0 - tc * tc);
          da[0][j] = dcj * c_prev[j] * g[0][j] * (1.0 - g[0][j]);
          da[1][j] = dcj * g[3][j] * g[1][j] * (1.0 - g[1][j]);
          da[2][j] = d_o * g[2][j] * (1.0 - g[2][j]);
          da[3][j] = dcj * g[1][j] * (1.0 - g[3][j] * g[3][j]);
          dc[j] = dcj * g[0][j];
        }
        for (int q = 0; q < 4; ++q) {
          add_outer(grad[kLstmW[q]], grad[kLstmB[q]], da[q], z);
          transpose_mul_add(m.params[kLstmW[q]], da[q], dz);
        }
        std::copy(dz.begin(), dz.begin() + static_cast<std::ptrdiff_t>(H), dh_prev.begin());
      } else {
        Vec u(x.begin(), x.end());
        for (std::size_t j = 0; j < H; ++j) u.push_back(g[1][j] * h_prev[j]);
        Vec dan(H), daz(H);
        for (std::size_t j = 0; j < H; ++j) {
          dan[j] = dh[j] * g[0][j] * (1.0 - g[2][j] * g[2][j]);
          daz[j] = dh[j] * (g[2][j] - h_prev[j]) * g[0][j] * (1.0 - g[0][j]);
          dh_prev[j] = dh[j] * (1.0 - g[0][j]);
        }
        add_outer(grad["W_n"], grad["b_n"], dan, u);
        Vec du(I + H, 0.0);
        transpose_mul_add(m.params["W_n"], dan, du);
        Vec dar(H);
        for (std::size_t j = 0; j < H; ++j) {
          const double drh = du[I + j];
          dar[j] = drh * h_prev[j] * g[1][j] * (1.0 - g[1][j]);
          dh_prev[j] += drh * g[1][j];
        }
        add_outer(grad["W_z"], grad["b_z"], daz, z);
        add_outer(grad["W_r"], grad["b_r"], dar, z);
        transpose_mul_add(m.params["W_z"], daz, dz);
        transpose_mul_add(m.params["W_r"], dar, dz);
        for (std::size_t j = 0; j < H; ++j) dh_prev[j] += dz[j];
      }
      dh = std::move(dh_prev);
    }
  }
  return grad;
}

void TrainConfig::validate() const {
  if (hidden_size == 0) throw Error(ErrorCode::ValidationFailed, "hidden_size must be positive");
  if (epochs == 0 || batch_size == 0) throw Error(ErrorCode::ValidationFailed, "epochs and batch_size must be positive");
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw Error(ErrorCode::ValidationFailed, "learning_rate must be finite and non-negative");
  }
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw Error(ErrorCode::ValidationFailed, "train_fraction must lie in (0,1)");
  }
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) {
    throw Error(ErrorCode::ValidationFailed, "dropout_rate must lie in [0,1)");
  }
}

TrainResult train(const ecg::WindowedDataset& data, CellKind kind, const TrainConfig& cfg) {
  cfg.validate();
  const std::size_t n = data.size();
  if (n == 0) throw Error(ErrorCode::EmptyInput, "training set is empty");
  if (data.labels.size() != n) shape_error("window and label counts differ");
  const auto highs = static_cast<std::size_t>(std::count(data.labels.begin(), data.labels.end(), Level::high));
  if (highs == 0 || highs == n) {
    throw Error(ErrorCode::SingleClassDataset, "training needs both low and high windows",
                {{"high", highs}, {"low", n - highs}});
  }
  for (const auto& w : data.windows) {
    if (w.size() != data.windows.front().size()) shape_error("windows differ in length");
  }

  std::mt19937_64 rng(cfg.seed);
  TrainResult result;
  result.model = RecurrentModel::random(kind, cfg.hidden_size, rng(), 1, cfg.dropout_rate);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  const auto n_train = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::llround(cfg.train_fraction * static_cast<double>(n))), 1, n - 1);

  const auto gather = [&](std::size_t from, std::size_t to, std::vector<Vec>& w, std::vector<Level>& l) {
    for (std::size_t k = from; k < to; ++k) {
      w.push_back(data.windows[order[k]]);
      l.push_back(data.labels[order[k]]);
    }
  };
  std::vector<Vec> train_w, test_w;
  std::vector<Level> train_l, test_l;
  gather(0, n_train, train_w, train_l);
  gather(n_train, n, test_w, test_l);
  result.train_size = train_w.size();
  result.test_size = test_w.size();

  RecurrentModel& model = result.model;
  std::vector<std::size_t> idx(train_w.size());
  std::iota(idx.begin(), idx.end(), 0);
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::shuffle(idx.begin(), idx.end(), rng);
    for (std::size_t start = 0; start < idx.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(idx.size(), start + cfg.batch_size);
      std::vector<Vec> bw, masks;
      std::vector<Level> bl;
      for (std::size_t k = start; k < end; ++k) {
        bw.push_back(train_w[idx[k]]);
        bl.push_back(train_l[idx[k]]);
        masks.push_back(sample_dropout_mask(model, rng));
      }
      const ParameterSet g = backward(model, bw, bl, &masks);
      for (std::size_t t = 0; t < model.params.tensors.size(); ++t) {
        auto& p = model.params.tensors[t].data;
        const auto& d = g.tensors[t].data;
        for (std::size_t q = 0; q < p.size(); ++q) p[q] -= cfg.learning_rate * d[q];
      }
    }
    EpochStats s;
    s.epoch = epoch;
    s.train_loss = mean_loss(model, train_w, train_l);
    s.test_loss = mean_loss(model, test_w, test_l);
    std::vector<Level> preds;
    for (const auto& w : test_w) preds.push_back(predict(model, w));
    s.test_accuracy = accuracy(preds, test_l);
    result.curve.push_back(s);
  }
  return result;
}

ecg::WindowedDataset planted_dataset(const PlantedOptions& opts) {
  if (opts.per_class == 0 || opts.window == 0) throw Error(ErrorCode::ValidationFailed, "empty planted dataset");
  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> noise(0.0, opts.noise_sd);
  ecg::WindowedDataset ds;
  ds.window_size = opts.window;
  for (std::size_t k = 0; k < opts.per_class; ++k) {
    for (Level label : {Level::low, Level::high}) {
      const double mean = label == Level::high ? opts.high_mean : opts.low_mean;
      Vec w(opts.window);
      for (double& v : w) v = std::clamp(mean + noise(rng), 0.0, 1.0);
      ds.windows.push_back(std::move(w));
      ds.labels.push_back(label);
    }
  }
  return ds;
}

void write_model(std::ostream& out, const RecurrentModel& m) {
  char buf[32];
  out << "seqnet 1\n";
  out << "kind " << to_string(m.kind) << "\n";
  out << "hidden_size " << m.hidden_size << "\n";
  out << "input_size " << m.input_size << "\n";
  std::snprintf(buf, sizeof buf, "%.17g", m.dropout_rate);
  out << "dropout_rate " << buf << "\n";
  for (const auto& t : m.params.tensors) {
    out << "tensor " << t.name << " " << t.rows << " " << t.cols << "\n";
    for (std::size_t r = 0; r < t.rows; ++r) {
      for (std::size_t c = 0; c < t.cols; ++c) {
        std::snprintf(buf, sizeof buf, "%.17g", t.at(r, c));
        out << (c ? " " : "") << buf;
      }
      out << "\n";
    }
  }
}

RecurrentModel read_model(std::istream& in) {
  const auto fail = [](const std::string& what) -> RecurrentModel {
    throw Error(ErrorCode::ParseError, "model document: " + what);
  };
  std::string key;
  int version = 0;
  if (!(in >> key >> version) || key != "seqnet" || version != 1) return fail("missing 'seqnet 1' header");
  RecurrentModel m;
  std::string kind;
  if (!(in >> key >> kind) || key != "kind") return fail("expected kind");
  m.kind = cell_kind_from_string(kind);
  if (!(in >> key >> m.hidden_size) || key != "hidden_size") return fail("expected hidden_size");
  if (!(in >> key >> m.input_size) || key != "input_size") return fail("expected input_size");
  if (!(in >> key >> m.dropout_rate) || key != "dropout_rate") return fail("expected dropout_rate");
  while (in >> key) {
    if (key != "tensor") return fail("unexpected token '" + key + "'");
    Tensor t;
    if (!(in >> t.name >> t.rows >> t.cols)) return fail("bad tensor header");
    t.data.resize(t.rows * t.cols);
    for (double& v : t.data) {
      if (!(in >> v)) return fail("tensor '" + t.name + "' is truncated");
    }
    m.params.tensors.push_back(std::move(t));
  }
  m.validate();
  return m;
}

void save_model(const std::string& path, const RecurrentModel& m) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::ValidationFailed, "cannot write '" + path + "'");
  write_model(out, m);
}

RecurrentModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ModelMissing, "cannot read model '" + path + "'");
  return read_model(in);
}

}  // namespace emocal::seqnet
