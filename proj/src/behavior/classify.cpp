#include "emocal/behavior/classify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>

#include "emocal/error.hpp"

namespace emocal::behavior {

namespace {

void require_rows(const LabeledTable& t) {
  if (t.size() == 0) throw Error(ErrorCode::EmptyTable, "table has no rows");
  t.validate();
}

void require_two_classes(const LabeledTable& t) {
  require_rows(t);
  const auto counts = t.class_counts();
  const auto present = std::count_if(counts.begin(), counts.end(), [](std::size_t c) { return c > 0; });
  if (present < 2) {
    throw Error(ErrorCode::SingleClassDataset, "training needs at least two classes",
                {{"classes_present", present}});
  }
}

int argmax_lowest(std::span<const std::size_t> counts) {
  return static_cast<int>(std::max_element(counts.begin(), counts.end()) - counts.begin());
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d += (a[i] - b[i]) * (a[i] - b[i]);
  return d;
}

// Builds a CART tree over row indices of a table.
class TreeBuilder {
 public:
  TreeBuilder(const LabeledTable& t, const TreeConfig& cfg, std::uint64_t seed) : t_(t), cfg_(cfg), rng_(seed) {
    model_.n_classes = t.n_classes;
    model_.n_features = t.width();
  }

  TreeModel build() {
    std::vector<std::size_t> all(t_.size());
    std::iota(all.begin(), all.end(), 0);
    grow(all, 0);
    return std::move(model_);
  }

 private:
  struct Split {
    double impurity = std::numeric_limits<double>::infinity();
    int feature = -1;
    double threshold = 0.0;
  };

  std::vector<std::size_t> candidate_features() {
    const std::size_t f = t_.width();
    std::vector<std::size_t> all(f);
    std::iota(all.begin(), all.end(), 0);
    if (cfg_.max_features == 0 || cfg_.max_features >= f) return all;
    std::shuffle(all.begin(), all.end(), rng_);
    all.resize(cfg_.max_features);
    std::sort(all.begin(), all.end());
    return all;
  }

  Split best_split(std::vector<std::size_t>& idx, const std::vector<std::size_t>& counts) {
    const std::size_t n = idx.size();
    std::size_t total_sq = 0;
    for (std::size_t c : counts) total_sq += c * c;
    Split best;
    for (std::size_t f : candidate_features()) {
      std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return t_.rows[a][f] < t_.rows[b][f]; });
      std::vector<std::size_t> left(counts.size(), 0);
      std::size_t left_sq = 0;
      std::size_t right_sq = total_sq;
      std::vector<std::size_t> right = counts;
      for (std::size_t i = 0; i + 1 < n; ++i) {
        const auto c = static_cast<std::size_t>(t_.labels[idx[i]]);
        left_sq += 2 * left[c] + 1;
        ++left[c];
        right_sq -= 2 * right[c] - 1;
        --right[c];
        const double v = t_.rows[idx[i]][f];
        const double next = t_.rows[idx[i + 1]][f];
        if (v == next) continue;
        const std::size_t nl = i + 1;
        const std::size_t nr = n - nl;
        if (nl < cfg_.min_leaf || nr < cfg_.min_leaf) continue;
        // n times the weighted Gini impurity of the two children.
        const double imp = static_cast<double>(nl) - static_cast<double>(left_sq) / static_cast<double>(nl) +
                           static_cast<double>(nr) - static_cast<double>(right_sq) / static_cast<double>(nr);
        if (best.feature < 0 || imp < best.impurity - 1e-12 * std::max(1.0, best.impurity)) {
          best = {imp, static_cast<int>(f), v + (next - v) / 2.0};
        }
      }
    }
    return best;
  }

  int grow(std::vector<std::size_t>& idx, std::size_t depth) {
    TreeNode node;
    node.depth = depth;
    node.class_counts.assign(t_.n_classes, 0);
    for (std::size_t i : idx) ++node.class_counts[static_cast<std::size_t>(t_.labels[i])];
    const int id = static_cast<int>(model_.nodes.size());
    model_.nodes.push_back(node);

    const bool pure = std::count_if(node.class_counts.begin(), node.class_counts.end(),
                                    [](std::size_t c) { return c > 0; }) <= 1;
    if (pure || depth >= cfg_.max_depth || idx.size() < 2 * std::max<std::size_t>(cfg_.min_leaf, 1)) return id;
    const Split s = best_split(idx, node.class_counts);
    if (s.feature < 0) return id;

    std::vector<std::size_t> left, right;
    for (std::size_t i : idx) {
      (t_.rows[i][static_cast<std::size_t>(s.feature)] <= s.threshold ? left : right).push_back(i);
    }
    const int l = grow(left, depth + 1);
    const int r = grow(right, depth + 1);
    auto& placed = model_.nodes[static_cast<std::size_t>(id)];
    placed.feature = s.feature;
    placed.threshold = s.threshold;
    placed.left = l;
    placed.right = r;
    return id;
  }

  const LabeledTable& t_;
  TreeConfig cfg_;
  std::mt19937_64 rng_;
  TreeModel model_;
};

std::vector<std::size_t> shuffled_indices(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(idx.begin(), idx.end(), rng);
  return idx;
}

// SMOTE on the classes that have at least two rows; singleton classes are
// carried over unchanged.
LabeledTable oversample_eligible(const LabeledTable& train, std::size_t target, std::size_t k, std::uint64_t seed) {
  const auto counts = train.class_counts();
  std::vector<std::size_t> eligible, singletons;
  for (std::size_t i = 0; i < train.size(); ++i) {
    (counts[static_cast<std::size_t>(train.labels[i])] >= 2 ? eligible : singletons).push_back(i);
  }
  if (eligible.empty()) return train;
  LabeledTable out = smote(train.subset(eligible), target, k, seed).table;
  for (std::size_t i : singletons) out.push(train.rows[i], train.labels[i]);
  return out;
}

}  // namespace

// ---- SMOTE ----

SmoteResult smote(const LabeledTable& table, std::size_t target_per_class, std::size_t k, std::uint64_t seed) {
  require_rows(table);
  if (k == 0) throw Error(ErrorCode::ValidationFailed, "SMOTE needs k >= 1");
  if (target_per_class == 0) throw Error(ErrorCode::ValidationFailed, "SMOTE target must be positive");

  std::vector<std::vector<std::size_t>> members(table.n_classes);
  for (std::size_t i = 0; i < table.size(); ++i) members[static_cast<std::size_t>(table.labels[i])].push_back(i);
  for (std::size_t c = 0; c < members.size(); ++c) {
    if (members[c].size() == 1 && target_per_class > 1) {
      throw Error(ErrorCode::ClassTooSmall, "class " + std::to_string(c) + " has a single row",
                  {{"class", c}, {"count", 1}});
    }
  }

  SmoteResult out;
  out.table = table;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t c = 0; c < members.size(); ++c) {
    const auto& m = members[c];
    if (m.empty() || m.size() >= target_per_class) continue;
    const std::size_t kk = std::min(k, m.size() - 1);
    std::map<std::size_t, std::vector<std::size_t>> neighbors;  // by position in m
    std::uniform_int_distribution<std::size_t> pick_base(0, m.size() - 1);
    std::uniform_int_distribution<std::size_t> pick_nb(0, kk - 1);
    for (std::size_t added = m.size(); added < target_per_class; ++added) {
      const std::size_t b = pick_base(rng);
      auto it = neighbors.find(b);
      if (it == neighbors.end()) {
        std::vector<std::pair<double, std::size_t>> d;
        d.reserve(m.size() - 1);
        for (std::size_t j = 0; j < m.size(); ++j) {
          if (j != b) d.emplace_back(squared_distance(table.rows[m[b]], table.rows[m[j]]), m[j]);
        }
        std::partial_sort(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(kk), d.end());
        std::vector<std::size_t> nn;
        for (std::size_t j = 0; j < kk; ++j) nn.push_back(d[j].second);
        it = neighbors.emplace(b, std::move(nn)).first;
      }
      const std::size_t base = m[b];
      const std::size_t nb = it->second[pick_nb(rng)];
      const double u = unit(rng);
      std::vector<double> row(table.width());
      for (std::size_t f = 0; f < row.size(); ++f) {
        row[f] = table.rows[base][f] + u * (table.rows[nb][f] - table.rows[base][f]);
      }
      out.table.push(std::move(row), static_cast<int>(c));
      out.origins.push_back({base, nb, u});
    }
  }
  return out;
}

std::size_t default_smote_target(ActivityKind kind) {
  return kind == ActivityKind::MouseMovement || kind == ActivityKind::KeyReleased ? 5000 : 500;
}

// ---- trees ----

double gini(std::span<const std::size_t> counts) {
  const double n = static_cast<double>(std::accumulate(counts.begin(), counts.end(), std::size_t{0}));
  if (n == 0.0) return 0.0;
  double sq = 0.0;
  for (std::size_t c : counts) sq += (static_cast<double>(c) / n) * (static_cast<double>(c) / n);
  return 1.0 - sq;
}

int TreeModel::predict(std::span<const double> row) const {
  if (nodes.empty()) throw Error(ErrorCode::ModelMissing, "tree has no nodes");
  if (row.size() != n_features) throw Error(ErrorCode::ShapeMismatch, "row width differs from the tree's features");
  std::size_t i = 0;
  while (!nodes[i].is_leaf()) {
    i = static_cast<std::size_t>(row[static_cast<std::size_t>(nodes[i].feature)] <= nodes[i].threshold ? nodes[i].left
                                                                                                         : nodes[i].right);
  }
  return argmax_lowest(nodes[i].class_counts);
}

std::size_t TreeModel::depth() const {
  std::size_t d = 0;
  for (const auto& n : nodes) d = std::max(d, n.depth);
  return d;
}

TreeModel train_tree(const LabeledTable& table, const TreeConfig& cfg, std::uint64_t seed) {
  require_two_classes(table);
  return TreeBuilder(table, cfg, seed).build();
}

int ForestModel::predict(std::span<const double> row) const {
  if (trees.empty()) throw Error(ErrorCode::ModelMissing, "forest has no trees");
  std::vector<std::size_t> votes(n_classes, 0);
  for (const auto& t : trees) ++votes[static_cast<std::size_t>(t.predict(row))];
  return argmax_lowest(votes);
}

ForestModel train_forest(const LabeledTable& table, const ForestConfig& cfg, std::uint64_t seed) {
  require_two_classes(table);
  if (cfg.n_trees == 0) throw Error(ErrorCode::ValidationFailed, "forest needs at least one tree");
  ForestModel forest;
  forest.n_classes = table.n_classes;
  forest.max_features = cfg.max_features != 0
                            ? std::min(cfg.max_features, table.width())
                            : std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(std::sqrt(double(table.width())))));
  const TreeConfig tree_cfg{cfg.max_depth, cfg.min_leaf, forest.max_features};
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> draw(0, table.size() - 1);
  for (std::size_t t = 0; t < cfg.n_trees; ++t) {
    const std::uint64_t tree_seed = rng();
    if (!cfg.bootstrap) {
      forest.trees.push_back(TreeBuilder(table, tree_cfg, tree_seed).build());
      continue;
    }
    std::vector<std::size_t> sample(table.size());
    for (auto& i : sample) i = draw(rng);
    // A bootstrap sample may miss classes; a one-class tree is still a valid voter.
    forest.trees.push_back(TreeBuilder(table.subset(sample), tree_cfg, tree_seed).build());
  }
  return forest;
}

// ---- logistic regression ----

std::vector<double> LinearModel::probabilities(std::span<const double> row) const {
  if (row.size() != mean.size()) throw Error(ErrorCode::ShapeMismatch, "row width differs from the model's features");
  std::vector<double> logits(weights.size());
  for (std::size_t c = 0; c < weights.size(); ++c) {
    double z = weights[c][0];
    for (std::size_t f = 0; f < row.size(); ++f) z += weights[c][f + 1] * (row[f] - mean[f]) / scale[f];
    logits[c] = z;
  }
  const double top = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (double& z : logits) sum += (z = std::exp(z - top));
  for (double& z : logits) z /= sum;
  return logits;
}

int LinearModel::predict(std::span<const double> row) const {
  const auto p = probabilities(row);
  return static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin());
}

LinearModel train_linear(const LabeledTable& table, const LinearConfig& cfg, std::uint64_t /*seed*/) {
  require_two_classes(table);
  if (!(cfg.learning_rate >= 0.0)) throw Error(ErrorCode::ValidationFailed, "learning_rate must be >= 0");
  const std::size_t n = table.size();
  const std::size_t F = table.width();
  const std::size_t K = table.n_classes;
  LinearModel m;
  m.mean.assign(F, 0.0);
  m.scale.assign(F, 1.0);
  for (const auto& r : table.rows) {
    for (std::size_t f = 0; f < F; ++f) m.mean[f] += r[f] / static_cast<double>(n);
  }
  for (std::size_t f = 0; f < F; ++f) {
    double var = 0.0;
    for (const auto& r : table.rows) var += (r[f] - m.mean[f]) * (r[f] - m.mean[f]);
    const double sd = std::sqrt(var / static_cast<double>(n));
    m.scale[f] = sd > 1e-12 ? sd : 1.0;
  }
  m.weights.assign(K, std::vector<double>(F + 1, 0.0));
  if (cfg.learning_rate == 0.0) return m;

  std::vector<std::vector<double>> x(n, std::vector<double>(F + 1, 1.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t f = 0; f < F; ++f) x[i][f + 1] = (table.rows[i][f] - m.mean[f]) / m.scale[f];
  }
  std::vector<std::vector<double>> grad(K, std::vector<double>(F + 1));
  std::vector<double> p(K);
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (auto& g : grad) std::fill(g.begin(), g.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      double top = -std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < K; ++c) {
        p[c] = std::inner_product(m.weights[c].begin(), m.weights[c].end(), x[i].begin(), 0.0);
        top = std::max(top, p[c]);
      }
      double sum = 0.0;
      for (double& v : p) sum += (v = std::exp(v - top));
      for (std::size_t c = 0; c < K; ++c) {
        const double d = p[c] / sum - (table.labels[i] == static_cast<int>(c) ? 1.0 : 0.0);
        for (std::size_t f = 0; f <= F; ++f) grad[c][f] += d * x[i][f];
      }
    }
    const double step = cfg.learning_rate / static_cast<double>(n);
    for (std::size_t c = 0; c < K; ++c) {
      for (std::size_t f = 0; f <= F; ++f) m.weights[c][f] -= step * grad[c][f];
    }
  }
  return m;
}

// ---- naive Bayes ----

int BayesModel::predict(std::span<const double> row) const {
  int best = 0;
  double best_score = -std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < log_prior.size(); ++c) {
    if (!std::isfinite(log_prior[c])) continue;
    if (row.size() != mean[c].size()) throw Error(ErrorCode::ShapeMismatch, "row width differs from the model's features");
    double s = log_prior[c];
    for (std::size_t f = 0; f < row.size(); ++f) {
      const double v = variance[c][f];
      const double d = row[f] - mean[c][f];
      s -= 0.5 * std::log(2.0 * std::numbers::pi * v) + d * d / (2.0 * v);
    }
    if (s > best_score) {
      best_score = s;
      best = static_cast<int>(c);
    }
  }
  return best;
}

BayesModel train_bayes(const LabeledTable& table) {
  require_two_classes(table);
  const std::size_t F = table.width();
  const std::size_t K = table.n_classes;
  const auto counts = table.class_counts();
  BayesModel m;
  m.log_prior.assign(K, -std::numeric_limits<double>::infinity());
  m.mean.assign(K, std::vector<double>(F, 0.0));
  m.variance.assign(K, std::vector<double>(F, kVarianceFloor));
  for (std::size_t i = 0; i < table.size(); ++i) {
    const auto c = static_cast<std::size_t>(table.labels[i]);
    for (std::size_t f = 0; f < F; ++f) m.mean[c][f] += table.rows[i][f] / static_cast<double>(counts[c]);
  }
  std::vector<std::vector<double>> ss(K, std::vector<double>(F, 0.0));
  for (std::size_t i = 0; i < table.size(); ++i) {
    const auto c = static_cast<std::size_t>(table.labels[i]);
    for (std::size_t f = 0; f < F; ++f) ss[c][f] += (table.rows[i][f] - m.mean[c][f]) * (table.rows[i][f] - m.mean[c][f]);
  }
  for (std::size_t c = 0; c < K; ++c) {
    if (counts[c] == 0) continue;
    m.log_prior[c] = std::log(static_cast<double>(counts[c]) / static_cast<double>(table.size()));
    for (std::size_t f = 0; f < F; ++f) {
      m.variance[c][f] = std::max(ss[c][f] / static_cast<double>(counts[c]), kVarianceFloor);
    }
  }
  return m;
}

// ---- evaluation ----

std::string_view to_string(Method m) {
  switch (m) {
    case Method::decision_tree: return "decision_tree";
    case Method::random_forest: return "random_forest";
    case Method::logistic_regression: return "logistic_regression";
    case Method::naive_bayes: return "naive_bayes";
  }
  return "decision_tree";
}

Method method_from_string(std::string_view text) {
  if (text == "tree" || text == "decision_tree") return Method::decision_tree;
  if (text == "forest" || text == "random_forest") return Method::random_forest;
  if (text == "logistic" || text == "logistic_regression") return Method::logistic_regression;
  if (text == "bayes" || text == "naive_bayes") return Method::naive_bayes;
  throw Error(ErrorCode::ValidationFailed, "unknown method '" + std::string(text) + "'");
}

Predictor fit(Method method, const LabeledTable& train, const MethodConfig& cfg, std::uint64_t seed) {
  switch (method) {
    case Method::decision_tree: {
      auto m = std::make_shared<TreeModel>(train_tree(train, cfg.tree, seed));
      return [m](std::span<const double> r) { return m->predict(r); };
    }
    case Method::random_forest: {
      auto m = std::make_shared<ForestModel>(train_forest(train, cfg.forest, seed));
      return [m](std::span<const double> r) { return m->predict(r); };
    }
    case Method::logistic_regression: {
      auto m = std::make_shared<LinearModel>(train_linear(train, cfg.linear, seed));
      return [m](std::span<const double> r) { return m->predict(r); };
    }
    case Method::naive_bayes: {
      auto m = std::make_shared<BayesModel>(train_bayes(train));
      return [m](std::span<const double> r) { return m->predict(r); };
    }
  }
  throw Error(ErrorCode::ValidationFailed, "unknown method");
}

AccuracyReport score(const Predictor& predictor, const LabeledTable& test) {
  require_rows(test);
  AccuracyReport r;
  r.per_class.assign(test.n_classes, {});
  std::size_t correct = 0;
  for (std::size_t i = 0; i < test.size(); ++i) {
    auto& cls = r.per_class[static_cast<std::size_t>(test.labels[i])];
    ++cls.total;
    if (predictor(test.rows[i]) == test.labels[i]) {
      ++cls.correct;
      ++correct;
    }
  }
  r.overall = static_cast<double>(correct) / static_cast<double>(test.size());
  r.test_size = test.size();
  return r;
}

AccuracyReport evaluate(Method method, const LabeledTable& table, const EvalOptions& opts, const MethodConfig& cfg) {
  require_rows(table);
  if (table.size() < 2) throw Error(ErrorCode::EmptyTable, "need at least two rows to split");
  if (!(opts.train_fraction > 0.0 && opts.train_fraction < 1.0)) {
    throw Error(ErrorCode::ValidationFailed, "train_fraction must lie in (0,1)");
  }
  const auto idx = shuffled_indices(table.size(), opts.seed);
  const auto n_train = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::llround(opts.train_fraction * static_cast<double>(table.size()))), 1,
      table.size() - 1);
  LabeledTable train = table.subset({idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_train)});
  const LabeledTable test = table.subset({idx.begin() + static_cast<std::ptrdiff_t>(n_train), idx.end()});
  if (opts.smote_target) train = oversample_eligible(train, *opts.smote_target, opts.smote_k, opts.seed);
  AccuracyReport r = score(fit(method, train, cfg, opts.seed), test);
  r.train_size = train.size();
  return r;
}

AccuracyGrid evaluate_grid(const Partition& p, std::span<const Method> methods, const GridOptions& opts) {
  AccuracyGrid grid;
  grid.methods.assign(methods.begin(), methods.end());
  grid.cells.assign(methods.size(), {});
  for (std::size_t k = 0; k < kActivityKinds; ++k) {
    const ActivityKind kind = kAllKinds[k];
    const LabeledTable& t = p[kind];
    grid.rows_per_kind[k] = t.size();
    EvalOptions eo;
    eo.train_fraction = opts.train_fraction;
    eo.seed = opts.seed;
    if (opts.oversample) {
      eo.smote_target = std::max<std::size_t>(
          1, static_cast<std::size_t>(std::llround(opts.target_scale * double(default_smote_target(kind)))));
    }
    for (std::size_t m = 0; m < methods.size(); ++m) {
      try {
        grid.cells[m][k] = evaluate(methods[m], t, eo, opts.methods).overall;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::EmptyTable && e.code() != ErrorCode::SingleClassDataset) throw;
      }
    }
  }
  return grid;
}

std::string format_grid(const AccuracyGrid& grid) {
  std::ostringstream out;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%-20s", "method");
  out << buf;
  for (ActivityKind k : kAllKinds) {
    std::snprintf(buf, sizeof buf, " %16s", std::string(to_string(k)).c_str());
    out << buf;
  }
  out << "\n";
  for (std::size_t m = 0; m < grid.methods.size(); ++m) {
    std::snprintf(buf, sizeof buf, "%-20s", std::string(to_string(grid.methods[m])).c_str());
    out << buf;
    for (const auto& cell : grid.cells[m]) {
      if (cell) {
        std::snprintf(buf, sizeof buf, " %15.2f%%", 100.0 * *cell);
      } else {
        std::snprintf(buf, sizeof buf, " %16s", "n/a");
      }
      out << buf;
    }
    out << "\n";
  }
  std::snprintf(buf, sizeof buf, "%-20s", "rows");
  out << buf;
  for (std::size_t n : grid.rows_per_kind) {
    std::snprintf(buf, sizeof buf, " %16zu", n);
    out << buf;
  }
  out << "\n";
  return out.str();
}

nlohmann::json grid_to_json(const AccuracyGrid& grid) {
  nlohmann::json j = nlohmann::json::object();
  for (std::size_t m = 0; m < grid.methods.size(); ++m) {
    nlohmann::json row = nlohmann::json::object();
    for (std::size_t k = 0; k < kActivityKinds; ++k) {
      const auto& cell = grid.cells[m][k];
      row[std::string(to_string(kAllKinds[k]))] = cell ? nlohmann::json(*cell) : nlohmann::json(nullptr);
    }
    j[std::string(to_string(grid.methods[m]))] = row;
  }
  return j;
}

// ---- persisted classifier ----

int ActivityClassifier::classify(const std::vector<ActivityEvent>& events) const {
  std::vector<std::size_t> votes(kMoodCount, 0);
  std::size_t used = 0;
  for (const auto& e : events) {
    const auto& tree = trees[static_cast<std::size_t>(e.kind)];
    if (!tree) continue;
    ++votes[static_cast<std::size_t>(tree->predict(encode(e, keys)))];
    ++used;
  }
  if (used == 0) throw Error(ErrorCode::ModelMissing, "no activity model covers the submitted event kinds");
  return argmax_lowest(votes);
}

ActivityClassifier train_activity_classifier(const std::vector<ActivityEvent>& events, const TreeConfig& cfg) {
  Partition p = partition(events);
  ActivityClassifier c;
  c.keys = p.keys;
  for (std::size_t k = 0; k < kActivityKinds; ++k) {
    try {
      c.trees[k] = train_tree(p.tables[k], cfg);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::EmptyTable && e.code() != ErrorCode::SingleClassDataset) throw;
    }
  }
  return c;
}

void to_json(nlohmann::json& j, const TreeModel& t) {
  nlohmann::json nodes = nlohmann::json::array();
  for (const auto& n : t.nodes) {
    nodes.push_back({n.feature, n.threshold, n.left, n.right, n.class_counts, n.depth});
  }
  j = {{"n_classes", t.n_classes}, {"n_features", t.n_features}, {"nodes", nodes}};
}

void from_json(const nlohmann::json& j, TreeModel& t) {
  try {
    t = TreeModel{};
    t.n_classes = j.at("n_classes").get<std::size_t>();
    t.n_features = j.at("n_features").get<std::size_t>();
    for (const auto& n : j.at("nodes")) {
      TreeNode node;
      node.feature = n.at(0).get<int>();
      node.threshold = n.at(1).get<double>();
      node.left = n.at(2).get<int>();
      node.right = n.at(3).get<int>();
      node.class_counts = n.at(4).get<std::vector<std::size_t>>();
      node.depth = n.at(5).get<std::size_t>();
      t.nodes.push_back(std::move(node));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("tree document: ") + e.what());
  }
  const auto n = static_cast<int>(t.nodes.size());
  for (const auto& node : t.nodes) {
    if (!node.is_leaf() && (node.left <= 0 || node.left >= n || node.right <= 0 || node.right >= n ||
                            static_cast<std::size_t>(node.feature) >= t.n_features)) {
      throw Error(ErrorCode::ParseError, "tree document: bad node reference");
    }
  }
}

void to_json(nlohmann::json& j, const ActivityClassifier& c) {
  nlohmann::json trees = nlohmann::json::object();
  for (std::size_t k = 0; k < kActivityKinds; ++k) {
    if (c.trees[k]) trees[std::string(to_string(kAllKinds[k]))] = *c.trees[k];
  }
  j = {{"keys", c.keys}, {"trees", trees}};
}

void from_json(const nlohmann::json& j, ActivityClassifier& c) {
  c = ActivityClassifier{};
  try {
    c.keys = j.at("keys").get<KeyTable>();
    for (const auto& [name, tree] : j.at("trees").items()) {
      const auto kind = activity_kind_from_string(name);
      c.trees[static_cast<std::size_t>(kind)] = tree.get<TreeModel>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("activity classifier document: ") + e.what());
  }
}

}  // namespace emocal::behavior
