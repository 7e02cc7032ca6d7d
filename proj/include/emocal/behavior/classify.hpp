#pragma once

// Oversampling, classical classifiers and accuracy reports over the
// per-activity feature tables.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "emocal/behavior/activity.hpp"

namespace emocal::behavior {

// ---- SMOTE ----

/// Where a synthetic row came from: row = base + u * (neighbor - base),
/// with base and neighbor indices into the input table.
struct SyntheticOrigin {
  std::size_t base = 0;
  std::size_t neighbor = 0;
  double u = 0.0;
};

struct SmoteResult {
  LabeledTable table;  // the input rows first, verbatim, then synthetic rows
  std::vector<SyntheticOrigin> origins;  // one per synthetic row
};

inline constexpr std::size_t kSmoteNeighbors = 5;

/// Tops up every class below target_per_class with interpolated rows between
/// a random member and one of its k nearest same-class neighbors (Euclidean).
/// Classes at or above the target are untouched. Throws EmptyTable on an
/// empty table and ClassTooSmall when a class needing top-up has one row.
SmoteResult smote(const LabeledTable& table, std::size_t target_per_class, std::size_t k = kSmoteNeighbors,
                  std::uint64_t seed = 1);

/// Sub-dataset targets: 5000 rows per class for MouseMovement and
/// KeyReleased, 500 for the others.
std::size_t default_smote_target(ActivityKind kind);

// ---- decision tree ----

/// Weighted impurity 1 - sum p_c^2 of a class histogram.
double gini(std::span<const std::size_t> counts);

struct TreeConfig {
  std::size_t max_depth = 8;
  std::size_t min_leaf = 5;
  // Features considered at each split; 0 means all.
  std::size_t max_features = 0;
};

struct TreeNode {
  int feature = -1;  // -1 for a leaf
  double threshold = 0.0;  // go left when value <= threshold
  int left = -1;
  int right = -1;
  std::vector<std::size_t> class_counts;
  std::size_t depth = 0;

  bool is_leaf() const { return feature < 0; }
  bool operator==(const TreeNode&) const = default;
};

struct TreeModel {
  std::vector<TreeNode> nodes;  // nodes[0] is the root
  std::size_t n_classes = 0;
  std::size_t n_features = 0;

  int predict(std::span<const double> row) const;
  std::size_t depth() const;
  bool operator==(const TreeModel&) const = default;
};

/// CART with Gini impurity. Splits at midpoints between consecutive distinct
/// values; equal impurity prefers the lower feature index, then the lower
/// threshold. Throws SingleClassDataset with fewer than two classes present.
TreeModel train_tree(const LabeledTable& table, const TreeConfig& cfg = {}, std::uint64_t seed = 1);

// ---- random forest ----

struct ForestConfig {
  std::size_t n_trees = 25;
  std::size_t max_depth = 8;
  std::size_t min_leaf = 5;
  bool bootstrap = true;
  // Features per split; 0 means sqrt(n_features) rounded to nearest.
  std::size_t max_features = 0;
};

struct ForestModel {
  std::vector<TreeModel> trees;
  std::size_t n_classes = 0;
  std::size_t max_features = 0;

  /// Majority vote; ties go to the lowest class index.
  int predict(std::span<const double> row) const;
  bool operator==(const ForestModel&) const = default;
};

ForestModel train_forest(const LabeledTable& table, const ForestConfig& cfg = {}, std::uint64_t seed = 1);

// ---- logistic regression ----

struct LinearConfig {
  std::size_t epochs = 300;
  double learning_rate = 0.5;
};

/// Multinomial logistic regression on standardized features.
struct LinearModel {
  std::vector<std::vector<double>> weights;  // per class: bias, then one weight per feature
  std::vector<double> mean;
  std::vector<double> scale;

  std::vector<double> probabilities(std::span<const double> row) const;
  int predict(std::span<const double> row) const;
};

/// Full-batch gradient descent on mean softmax cross-entropy.
LinearModel train_linear(const LabeledTable& table, const LinearConfig& cfg = {}, std::uint64_t seed = 1);

// ---- Gaussian naive Bayes ----

inline constexpr double kVarianceFloor = 1e-9;

struct BayesModel {
  std::vector<double> log_prior;  // -inf for classes absent from training
  std::vector<std::vector<double>> mean;
  std::vector<std::vector<double>> variance;

  int predict(std::span<const double> row) const;
};

BayesModel train_bayes(const LabeledTable& table);

// ---- evaluation ----

enum class Method { decision_tree, random_forest, logistic_regression, naive_bayes };

inline constexpr std::array<Method, 4> kAllMethods = {Method::decision_tree, Method::random_forest,
                                                      Method::logistic_regression, Method::naive_bayes};

std::string_view to_string(Method m);
/// Accepts the full names and the short forms tree, forest, logistic, bayes.
Method method_from_string(std::string_view text);

struct MethodConfig {
  TreeConfig tree;
  ForestConfig forest;
  LinearConfig linear;
};

using Predictor = std::function<int(std::span<const double>)>;

Predictor fit(Method method, const LabeledTable& train, const MethodConfig& cfg = {}, std::uint64_t seed = 1);

struct ClassScore {
  std::size_t correct = 0;
  std::size_t total = 0;

  bool operator==(const ClassScore&) const = default;
};

struct AccuracyReport {
  double overall = 0.0;
  std::vector<ClassScore> per_class;
  std::size_t train_size = 0;
  std::size_t test_size = 0;

  bool operator==(const AccuracyReport&) const = default;
};

/// Accuracy of a predictor over every row of a table. Throws EmptyTable.
AccuracyReport score(const Predictor& predictor, const LabeledTable& test);

struct EvalOptions {
  double train_fraction = 0.8;
  std::uint64_t seed = 1;
  // When set, SMOTE tops up the training split to this many rows per class.
  std::optional<std::size_t> smote_target;
  std::size_t smote_k = kSmoteNeighbors;
};

/// Seeded shuffle, split, optional oversampling of the training part, fit,
/// and score on the held-out part.
AccuracyReport evaluate(Method method, const LabeledTable& table, const EvalOptions& opts = {},
                        const MethodConfig& cfg = {});

struct GridOptions {
  double train_fraction = 0.8;
  std::uint64_t seed = 1;
  bool oversample = true;
  // Scales the default per-kind SMOTE targets, for quicker runs.
  double target_scale = 1.0;
  MethodConfig methods;
};

/// Accuracy of each method on each sub-dataset. A cell is empty when the
/// table is too small or single-class.
struct AccuracyGrid {
  std::vector<Method> methods;
  std::array<std::size_t, kActivityKinds> rows_per_kind{};
  std::vector<std::array<std::optional<double>, kActivityKinds>> cells;
};

AccuracyGrid evaluate_grid(const Partition& p, std::span<const Method> methods, const GridOptions& opts = {});

/// Fixed-width text table: one row per method, one column per sub-dataset,
/// accuracies in percent.
std::string format_grid(const AccuracyGrid& grid);
nlohmann::json grid_to_json(const AccuracyGrid& grid);

// ---- persisted activity classifier ----

/// One decision tree per sub-dataset plus the key table used to encode rows.
struct ActivityClassifier {
  KeyTable keys;
  std::array<std::optional<TreeModel>, kActivityKinds> trees;

  /// Most frequent predicted mood over the events whose kind has a model;
  /// ties go to the lowest mood index. Throws ModelMissing when no event
  /// can be classified.
  int classify(const std::vector<ActivityEvent>& events) const;
};

ActivityClassifier train_activity_classifier(const std::vector<ActivityEvent>& events, const TreeConfig& cfg = {});

void to_json(nlohmann::json& j, const TreeModel& t);
void from_json(const nlohmann::json& j, TreeModel& t);
void to_json(nlohmann::json& j, const ActivityClassifier& c);
void from_json(const nlohmann::json& j, ActivityClassifier& c);

}  // namespace emocal::behavior
