#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sgcl/common.hpp"
#include "sgcl/encoder.hpp"
#include "sgcl/graph.hpp"

namespace sgcl {

enum class TaskKind { graph, node };

struct Instance {
  std::size_t graph = 0;
  /// Set for node tasks: the instance is the ego network around this node.
  std::optional<NodeId> center;
};

struct Dataset {
  std::vector<Graph> graphs;
  std::vector<Instance> instances;
  std::vector<int> labels;
  TaskKind task = TaskKind::graph;

  std::size_t num_classes() const;
  void validate() const;

  /// One instance per graph.
  static Dataset graph_classification(std::vector<Graph> graphs, std::vector<int> labels);
  /// One instance per labelled node of a single graph.
  static Dataset node_classification(Graph graph, std::span<const NodeId> nodes, std::vector<int> labels);
};

struct ExtractOptions {
  std::size_t ego_radius = 2;
};

/// Frozen-encoder representations, one row per instance, no augmentation.
Matrix extract_representations(const GinParams& params, const Dataset& dataset, const ExtractOptions& options = {});

struct LogRegOptions {
  double l2 = 1e-3;
  double grad_tolerance = 1e-6;
  std::size_t max_iterations = 5000;
};

struct LogRegModel {
  Matrix weights;  // features x classes
  Vector bias;     // classes
  std::size_t iterations = 0;
  double objective = 0.0;
};

// Multinomial logistic regression by full-batch gradient descent from zero on
// mean cross-entropy + (l2 / 2) ||W||^2 (bias unregularized).
LogRegModel logreg_fit(const Matrix& x, std::span<const int> y, const LogRegOptions& options = {});
std::vector<int> logreg_predict(const LogRegModel& model, const Matrix& x);
double logreg_objective(const LogRegModel& model, const Matrix& x, std::span<const int> y, double l2);
std::vector<int> logreg_fit_predict(const Matrix& x_train, std::span<const int> y_train, const Matrix& x_test,
                                    const LogRegOptions& options = {});

enum class Metric { accuracy, macro_f1 };

std::string to_string(Metric metric);

/// Both metrics on a 0-100 scale.
double accuracy_score(std::span<const int> truth, std::span<const int> predicted);
double macro_f1_score(std::span<const int> truth, std::span<const int> predicted);

/// Fold index per instance. Each class is ordered by row content, shuffled
/// with the seed, and dealt round-robin, so the assignment does not depend on
/// instance order.
std::vector<std::size_t> stratified_folds(const Matrix& x, std::span<const int> y, std::size_t k, Seed seed);

struct KFoldResult {
  double mean = 0.0;
  double std = 0.0;  // population standard deviation across folds
  std::vector<double> folds;
};

KFoldResult kfold_score(const Matrix& x, std::span<const int> y, std::size_t k, Metric metric, Seed seed,
                        const LogRegOptions& options = {});

/// For each (a, b) pair, b counts as retrieved if it is among the ten best rows
/// of `reprs_b` by inner product with row a of `reprs_a`, after restricting the
/// candidates to the k best (ties broken by lower row index).
double hits_at_k(const Matrix& reprs_a, const Matrix& reprs_b,
                 std::span<const std::pair<std::size_t, std::size_t>> pairs, std::size_t k);

}  // namespace sgcl
