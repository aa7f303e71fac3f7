#include "sgcl/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sgcl/augment.hpp"

namespace sgcl {

std::size_t Dataset::num_classes() const {
  if (labels.empty()) return 0;
  return static_cast<std::size_t>(*std::max_element(labels.begin(), labels.end())) + 1;
}

void Dataset::validate() const {
  if (instances.size() != labels.size()) throw InvalidArgument("Dataset: one label per instance required");
  for (std::size_t i = 0; i < instances.size(); ++i) {
    const auto& inst = instances[i];
    if (labels[i] < 0) throw InvalidArgument("Dataset: labels must be non-negative");
    if (inst.graph >= graphs.size()) throw InvalidArgument("Dataset: instance refers to a missing graph");
    if (task == TaskKind::node) {
      if (!inst.center) throw InvalidArgument("Dataset: node tasks need a center per instance");
      if (*inst.center >= graphs[inst.graph].num_nodes()) throw InvalidArgument("Dataset: center out of range");
    }
  }
}

Dataset Dataset::graph_classification(std::vector<Graph> graphs, std::vector<int> labels) {
  Dataset out;
  out.task = TaskKind::graph;
  out.instances.resize(graphs.size());
  for (std::size_t i = 0; i < graphs.size(); ++i) out.instances[i].graph = i;
  out.graphs = std::move(graphs);
  out.labels = std::move(labels);
  out.validate();
  return out;
}

Dataset Dataset::node_classification(Graph graph, std::span<const NodeId> nodes, std::vector<int> labels) {
  Dataset out;
  out.task = TaskKind::node;
  out.graphs.push_back(std::move(graph));
  for (NodeId v : nodes) out.instances.push_back({0, v});
  out.labels = std::move(labels);
  out.validate();
  return out;
}

Matrix extract_representations(const GinParams& params, const Dataset& dataset, const ExtractOptions& options) {
  dataset.validate();
  const auto& dims = params.dims();
  const auto n = static_cast<std::ptrdiff_t>(dataset.instances.size());
  Matrix out(n, static_cast<Eigen::Index>(dims.hidden));
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto& inst = dataset.instances[static_cast<std::size_t>(i)];
    const Graph& g = dataset.graphs[inst.graph];
    Subgraph sub;
    if (dataset.task == TaskKind::node) {
      sub = ego_network(g, *inst.center, options.ego_radius);
    } else {
      sub.graph = g;
      sub.node_map.resize(g.num_nodes());
      std::iota(sub.node_map.begin(), sub.node_map.end(), 0);
    }
    const View view = make_view(std::move(sub), dims.pos_dim);
    out.row(i) = gin_forward(params, view).transpose();
  }
  return out;
}

namespace {

std::size_t class_count(std::span<const int> y) {
  if (y.empty()) throw InvalidArgument("logreg: empty training set");
  int hi = 0;
  for (int label : y) {
    if (label < 0) throw InvalidArgument("logreg: labels must be non-negative");
    hi = std::max(hi, label);
  }
  return static_cast<std::size_t>(hi) + 1;
}

Matrix softmax_rows(const Matrix& logits) {
  Matrix p = logits;
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    const double shift = p.row(i).maxCoeff();
    p.row(i) = (p.row(i).array() - shift).exp().matrix();
    p.row(i) /= p.row(i).sum();
  }
  return p;
}

Matrix one_hot(std::span<const int> y, std::size_t classes) {
  Matrix out = Matrix::Zero(static_cast<Eigen::Index>(y.size()), static_cast<Eigen::Index>(classes));
  for (std::size_t i = 0; i < y.size(); ++i) out(static_cast<Eigen::Index>(i), y[i]) = 1.0;
  return out;
}

Matrix logits_of(const LogRegModel& model, const Matrix& x) {
  Matrix logits = x * model.weights;
  logits.rowwise() += model.bias.transpose();
  return logits;
}

}  // namespace

double logreg_objective(const LogRegModel& model, const Matrix& x, std::span<const int> y, double l2) {
  const Matrix logits = logits_of(model, x);
  double loss = 0.0;
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const double shift = logits.row(i).maxCoeff();
    const double lse = shift + std::log((logits.row(i).array() - shift).exp().sum());
    loss += lse - logits(i, y[static_cast<std::size_t>(i)]);
  }
  return loss / static_cast<double>(logits.rows()) + 0.5 * l2 * model.weights.squaredNorm();
}

LogRegModel logreg_fit(const Matrix& x, std::span<const int> y, const LogRegOptions& options) {
  if (static_cast<std::size_t>(x.rows()) != y.size()) throw InvalidArgument("logreg: one label per row required");
  if (options.l2 < 0.0) throw InvalidArgument("logreg: l2 must be non-negative");
  const std::size_t classes = class_count(y);
  if (std::all_of(y.begin(), y.end(), [&](int label) { return label == y.front(); })) {
    throw InvalidArgument("logreg: training set has a single class");
  }
  const auto n = static_cast<double>(x.rows());
  const auto c = static_cast<Eigen::Index>(classes);

  Matrix augmented(x.rows(), x.cols() + 1);
  augmented << x, Matrix::Ones(x.rows(), 1);
  const Matrix gram = augmented.transpose() * augmented;
  const double lambda_max = Eigen::SelfAdjointEigenSolver<Matrix>(gram, Eigen::EigenvaluesOnly).eigenvalues().maxCoeff();
  const double step = 1.0 / (0.5 * lambda_max / n + options.l2);

  LogRegModel model{Matrix::Zero(x.cols(), c), Vector::Zero(c), 0, 0.0};
  const Matrix targets = one_hot(y, classes);
  for (std::size_t iter = 0; iter < options.max_iterations; ++iter) {
    const Matrix residual = softmax_rows(logits_of(model, x)) - targets;
    const Matrix grad_w = x.transpose() * residual / n + options.l2 * model.weights;
    const Vector grad_b = residual.colwise().sum().transpose() / n;
    const double grad_norm = std::sqrt(grad_w.squaredNorm() + grad_b.squaredNorm());
    if (grad_norm < options.grad_tolerance) break;
    model.weights -= step * grad_w;
    model.bias -= step * grad_b;
    model.iterations = iter + 1;
  }
  model.objective = logreg_objective(model, x, y, options.l2);
  return model;
}

std::vector<int> logreg_predict(const LogRegModel& model, const Matrix& x) {
  if (x.cols() != model.weights.rows()) throw InvalidArgument("logreg_predict: feature width mismatch");
  const Matrix logits = logits_of(model, x);
  std::vector<int> out(static_cast<std::size_t>(x.rows()));
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    Eigen::Index best = 0;
    for (Eigen::Index j = 1; j < logits.cols(); ++j) {
      if (logits(i, j) > logits(i, best)) best = j;
    }
    out[static_cast<std::size_t>(i)] = static_cast<int>(best);
  }
  return out;
}

std::vector<int> logreg_fit_predict(const Matrix& x_train, std::span<const int> y_train, const Matrix& x_test,
                                    const LogRegOptions& options) {
  if (x_train.cols() != x_test.cols()) throw InvalidArgument("logreg: train and test widths differ");
  return logreg_predict(logreg_fit(x_train, y_train, options), x_test);
}

std::string to_string(Metric metric) { return metric == Metric::accuracy ? "accuracy" : "macro_f1"; }

double accuracy_score(std::span<const int> truth, std::span<const int> predicted) {
  if (truth.size() != predicted.size()) throw InvalidArgument("accuracy_score: length mismatch");
  if (truth.empty()) return 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) hits += truth[i] == predicted[i];
  return 100.0 * static_cast<double>(hits) / static_cast<double>(truth.size());
}

double macro_f1_score(std::span<const int> truth, std::span<const int> predicted) {
  if (truth.size() != predicted.size()) throw InvalidArgument("macro_f1_score: length mismatch");
  if (truth.empty()) return 0.0;
  int hi = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) hi = std::max({hi, truth[i], predicted[i]});
  std::vector<std::size_t> tp(hi + 1), fp(hi + 1), fn(hi + 1), present(hi + 1);
  for (std::size_t i = 0; i < truth.size(); ++i) {
    present[truth[i]] = present[predicted[i]] = 1;
    if (truth[i] == predicted[i]) {
      ++tp[truth[i]];
    } else {
      ++fp[predicted[i]];
      ++fn[truth[i]];
    }
  }
  double sum = 0.0;
  std::size_t count = 0;
  for (int c = 0; c <= hi; ++c) {
    if (!present[c]) continue;
    ++count;
    const double denom = static_cast<double>(2 * tp[c] + fp[c] + fn[c]);
    sum += denom > 0.0 ? 2.0 * static_cast<double>(tp[c]) / denom : 0.0;
  }
  return 100.0 * sum / static_cast<double>(count);
}

namespace {

// Instances ordered by class, then by row content, then shuffled within each
// class; the position in this list is the canonical rank.
std::vector<std::size_t> canonical_order(const Matrix& x, std::span<const int> y, Seed seed,
                                         std::vector<std::size_t>* class_starts) {
  const std::size_t n = y.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  auto row_less = [&](std::size_t a, std::size_t b) {
    if (y[a] != y[b]) return y[a] < y[b];
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      const double va = x(static_cast<Eigen::Index>(a), j);
      const double vb = x(static_cast<Eigen::Index>(b), j);
      if (va != vb) return va < vb;
    }
    return false;
  };
  std::stable_sort(order.begin(), order.end(), row_less);
  class_starts->clear();
  for (std::size_t i = 0; i < n; ++i) {
    if (i == 0 || y[order[i]] != y[order[i - 1]]) class_starts->push_back(i);
  }
  class_starts->push_back(n);
  for (std::size_t c = 0; c + 1 < class_starts->size(); ++c) {
    const std::size_t lo = (*class_starts)[c];
    const std::size_t hi = (*class_starts)[c + 1];
    Rng rng(mix_seed(seed, static_cast<std::uint64_t>(y[order[lo]])));
    for (std::size_t i = hi - 1; i > lo; --i) std::swap(order[i], order[uniform_int(rng, lo, i)]);
  }
  return order;
}

}  // namespace

std::vector<std::size_t> stratified_folds(const Matrix& x, std::span<const int> y, std::size_t k, Seed seed) {
  if (static_cast<std::size_t>(x.rows()) != y.size()) throw InvalidArgument("stratified_folds: one label per row");
  if (k < 2) throw InvalidArgument("stratified_folds: k must be >= 2");
  std::vector<std::size_t> starts;
  const auto order = canonical_order(x, y, seed, &starts);
  std::vector<std::size_t> fold(y.size());
  for (std::size_t c = 0; c + 1 < starts.size(); ++c) {
    if (starts[c + 1] - starts[c] < k) throw InvalidArgument("stratified_folds: a class has fewer members than folds");
    for (std::size_t i = starts[c]; i < starts[c + 1]; ++i) fold[order[i]] = i % k;
  }
  return fold;
}

KFoldResult kfold_score(const Matrix& x, std::span<const int> y, std::size_t k, Metric metric, Seed seed,
                        const LogRegOptions& options) {
  const auto fold = stratified_folds(x, y, k, seed);
  std::vector<std::size_t> starts;
  const auto order = canonical_order(x, y, seed, &starts);

  KFoldResult result;
  result.folds.assign(k, 0.0);
  const auto folds = static_cast<std::ptrdiff_t>(k);
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t f = 0; f < folds; ++f) {
    std::vector<std::size_t> train, test;
    for (std::size_t idx : order) (fold[idx] == static_cast<std::size_t>(f) ? test : train).push_back(idx);
    Matrix x_train(static_cast<Eigen::Index>(train.size()), x.cols());
    Matrix x_test(static_cast<Eigen::Index>(test.size()), x.cols());
    std::vector<int> y_train, y_test;
    for (std::size_t i = 0; i < train.size(); ++i) {
      x_train.row(static_cast<Eigen::Index>(i)) = x.row(static_cast<Eigen::Index>(train[i]));
      y_train.push_back(y[train[i]]);
    }
    for (std::size_t i = 0; i < test.size(); ++i) {
      x_test.row(static_cast<Eigen::Index>(i)) = x.row(static_cast<Eigen::Index>(test[i]));
      y_test.push_back(y[test[i]]);
    }
    const auto predicted = logreg_fit_predict(x_train, y_train, x_test, options);
    result.folds[static_cast<std::size_t>(f)] =
        metric == Metric::accuracy ? accuracy_score(y_test, predicted) : macro_f1_score(y_test, predicted);
  }
  result.mean = std::accumulate(result.folds.begin(), result.folds.end(), 0.0) / static_cast<double>(k);
  double var = 0.0;
  for (double v : result.folds) var += (v - result.mean) * (v - result.mean);
  result.std = std::sqrt(var / static_cast<double>(k));
  return result;
}

double hits_at_k(const Matrix& reprs_a, const Matrix& reprs_b,
                 std::span<const std::pair<std::size_t, std::size_t>> pairs, std::size_t k) {
  if (reprs_a.cols() != reprs_b.cols()) throw InvalidArgument("hits_at_k: representation widths differ");
  if (pairs.empty()) return 0.0;
  constexpr std::size_t kTop = 10;
  const std::size_t budget = std::min(k, kTop);
  std::size_t hits = 0;
  for (const auto& [a, b] : pairs) {
    if (a >= static_cast<std::size_t>(reprs_a.rows()) || b >= static_cast<std::size_t>(reprs_b.rows())) {
      throw InvalidArgument("hits_at_k: pair index out of range");
    }
    const Vector scores = reprs_b * reprs_a.row(static_cast<Eigen::Index>(a)).transpose();
    const double target = scores(static_cast<Eigen::Index>(b));
    std::size_t rank = 0;
    for (Eigen::Index j = 0; j < scores.size(); ++j) {
      const bool ahead = scores(j) > target || (scores(j) == target && static_cast<std::size_t>(j) < b);
      rank += ahead;
    }
    hits += rank < budget;
  }
  return static_cast<double>(hits) / static_cast<double>(pairs.size());
}

}  // namespace sgcl
