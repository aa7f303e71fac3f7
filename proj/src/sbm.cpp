#include "sgcl/sbm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "sgcl/global_embed.hpp"
#include "sgcl/spectral.hpp"

namespace sgcl {

SbmSpec SbmSpec::make(std::size_t nodes_per_block, double p, double q, double z, bool self_loops) {
  if (nodes_per_block == 0) throw InvalidArgument("SbmSpec: nodes_per_block must be >= 1");
  if (!(0.0 < z && z < q && q < p && p <= 1.0)) throw InvalidArgument("SbmSpec: requires 0 < z < q < p <= 1");
  if (!(p * q > z * z)) throw InvalidArgument("SbmSpec: requires pq > z^2");
  return {nodes_per_block, p, q, z, self_loops};
}

namespace {

BlockModel as_model(const SbmSpec& spec) {
  return {spec.nodes_per_block, spec.p, spec.q, spec.z, spec.self_loops};
}

double block_probability(const BlockModel& m, std::size_t u, std::size_t v) {
  const bool bu = u >= m.nodes_per_block;
  const bool bv = v >= m.nodes_per_block;
  if (bu != bv) return m.z;
  return bu ? m.q : m.p;
}

}  // namespace

SbmSample sample_block_model(const BlockModel& model, Seed seed) {
  auto is_prob = [](double x) { return x >= 0.0 && x <= 1.0; };
  if (!is_prob(model.p) || !is_prob(model.q) || !is_prob(model.z)) {
    throw InvalidArgument("sample_block_model: probabilities must lie in [0, 1]");
  }
  const std::size_t n = 2 * model.nodes_per_block;
  Rng rng(seed);
  std::vector<EdgePair> pairs;
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t v = model.self_loops ? u : u + 1; v < n; ++v) {
      if (uniform01(rng) < block_probability(model, u, v)) {
        pairs.emplace_back(static_cast<NodeId>(u), static_cast<NodeId>(v));
      }
    }
  }
  SbmSample out{Graph::from_edge_pairs(pairs, n, model.self_loops), std::vector<int>(n, 0)};
  std::fill(out.labels.begin() + static_cast<std::ptrdiff_t>(model.nodes_per_block), out.labels.end(), 1);
  return out;
}

SbmSample sample_sbm(const SbmSpec& spec, Seed seed) { return sample_block_model(as_model(spec), seed); }

Matrix sbm_expectation(const BlockModel& model) {
  const auto n = static_cast<Eigen::Index>(2 * model.nodes_per_block);
  Matrix out(n, n);
  for (Eigen::Index u = 0; u < n; ++u)
    for (Eigen::Index v = 0; v < n; ++v) {
      out(u, v) = block_probability(model, static_cast<std::size_t>(u), static_cast<std::size_t>(v));
    }
  if (!model.self_loops) out.diagonal().setZero();
  return out;
}

Matrix sbm_expectation(const SbmSpec& spec) { return sbm_expectation(as_model(spec)); }

BlockSpectrum block_eigenpairs(double p, double q, double z) {
  if (z == 0.0) throw InvalidArgument("block_eigenpairs: z = 0 leaves the roots undefined");
  const double disc = std::sqrt((p - q) * (p - q) + 4.0 * z * z);
  BlockSpectrum out;
  out.c_plus = ((q - p) + disc) / (2.0 * z);
  out.c_minus = ((q - p) - disc) / (2.0 * z);
  out.mu1 = p + z * out.c_plus;
  out.mu2 = p + z * out.c_minus;
  if (out.mu1 < out.mu2) {
    std::swap(out.c_plus, out.c_minus);
    std::swap(out.mu1, out.mu2);
  }
  return out;
}

TransformedParams line_transformed_params(double p, double q, double z) {
  if (!(p > 0.0 && q > 0.0 && z > 0.0)) throw InvalidArgument("line_transformed_params: requires p, q, z > 0");
  const double volume = std::log(p + q + 2.0 * z);
  TransformedParams out;
  out.p = std::log(p) - 2.0 * std::log(p + z) + volume;
  out.q = std::log(q) - 2.0 * std::log(q + z) + volume;
  out.z = std::log(z) - std::log(p + z) - std::log(q + z) + volume;
  if (p > q && q > z && p * q > z * z) {
    if (!(out.p > 0.0 && out.z < 0.0 && out.p < out.q)) {
      throw std::logic_error("line_transformed_params: expected p' > 0, z' < 0, p' < q'");
    }
  }
  return out;
}

double operator_norm(const Matrix& symmetric, double tolerance, std::size_t max_iterations) {
  const Eigen::Index n = symmetric.rows();
  if (n == 0) return 0.0;
  Rng rng(0xD4u);
  Vector x(n);
  for (Eigen::Index i = 0; i < n; ++i) x(i) = standard_normal(rng);
  x.normalize();
  double estimate = 0.0;
  for (std::size_t iter = 0; iter < max_iterations; ++iter) {
    Vector y = symmetric * x;
    const double next = y.norm();
    if (next == 0.0) return 0.0;
    x = y / next;
    if (std::abs(next - estimate) <= tolerance * next) return next;
    estimate = next;
  }
  return estimate;
}

DavisKahanReport davis_kahan_check(const Matrix& truth, const Matrix& observed, std::size_t index) {
  if (truth.rows() != truth.cols() || truth.rows() != observed.rows() || observed.rows() != observed.cols()) {
    throw InvalidArgument("davis_kahan_check: matrices must be square and the same size");
  }
  const Eigen::Index n = truth.rows();
  if (index == 0 || static_cast<Eigen::Index>(index) > n) throw InvalidArgument("davis_kahan_check: index out of range");
  Eigen::SelfAdjointEigenSolver<Matrix> a(truth);
  Eigen::SelfAdjointEigenSolver<Matrix> b(observed);
  // Eigen sorts ascending; index i (1-based, descending) is column n - i.
  const Eigen::Index col = n - static_cast<Eigen::Index>(index);
  Vector va = a.eigenvectors().col(col);
  Vector vb = b.eigenvectors().col(col);

  DavisKahanReport out;
  const double dot = va.dot(vb);
  out.theta = std::atan2((vb - dot * va).norm(), std::abs(dot));
  out.sin_theta = std::sin(out.theta);
  out.sin_2theta = std::sin(2.0 * out.theta);
  out.perturbation_norm = operator_norm(observed - truth);
  const double mu = a.eigenvalues()(col);
  double gap = std::numeric_limits<double>::infinity();
  for (Eigen::Index j = 0; j < n; ++j) {
    if (j != col) gap = std::min(gap, std::abs(mu - a.eigenvalues()(j)));
  }
  out.eigengap = gap;
  const double scale = std::max(1.0, a.eigenvalues().cwiseAbs().maxCoeff());
  out.gap_defined = std::isfinite(gap) && gap > 1e-12 * scale;
  if (out.gap_defined) {
    out.classical_bound = 2.0 * out.perturbation_norm / gap;
    out.printed_bound = 2.0 * out.perturbation_norm / (static_cast<double>(n) * gap);
    constexpr double slack = 1e-12;
    out.classical_satisfied = out.sin_2theta <= out.classical_bound + slack;
    out.printed_satisfied = out.sin_2theta <= out.printed_bound + slack;
  }
  return out;
}

int majority_label(std::span<const NodeId> members, std::span<const int> labels) {
  std::size_t zeros = 0;
  std::size_t ones = 0;
  for (NodeId v : members) (labels[v] == 0 ? zeros : ones) += 1;
  if (zeros == ones) return -1;
  return zeros > ones ? 0 : 1;
}

FidelityReport crop_fidelity_experiment(const SbmSpec& spec, const FidelityOptions& options, Seed seed) {
  SbmSample sample;
  bool connected = false;
  for (std::size_t attempt = 0; attempt <= options.max_resamples && !connected; ++attempt) {
    sample = sample_sbm(spec, mix_seed(seed, attempt));
    connected = count_components(sample.graph) == 1;
  }
  if (!connected) throw NumericalError("crop_fidelity_experiment: no connected sample within the retry budget");

  const std::size_t n = sample.graph.num_nodes();
  Matrix coords(static_cast<Eigen::Index>(n), 2);
  if (options.basis == FidelityBasis::normalized_laplacian) {
    const auto eigs = smallest_k_eigs(laplacian(sample.graph, LaplacianKind::normalized), 3);
    coords = eigs.eigenvectors.middleCols(1, 2);
  } else {
    Matrix adjacency = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (NodeId u = 0; u < n; ++u)
      for (NodeId v : sample.graph.neighbors(u)) adjacency(u, v) = 1.0;
    Eigen::SelfAdjointEigenSolver<Matrix> solver(adjacency);
    const auto last = static_cast<Eigen::Index>(n) - 1;
    coords.col(0) = solver.eigenvectors().col(last - 1);
    coords.col(1) = solver.eigenvectors().col(last - 2);
    canonicalize_signs(coords);
  }

  FidelityReport report;
  if (options.epsilon) {
    report.epsilon = *options.epsilon;
  } else {
    Eigen::RowVector2d centroid[2] = {Eigen::RowVector2d::Zero(), Eigen::RowVector2d::Zero()};
    double counts[2] = {0.0, 0.0};
    for (std::size_t v = 0; v < n; ++v) {
      centroid[sample.labels[v]] += coords.row(static_cast<Eigen::Index>(v));
      counts[sample.labels[v]] += 1.0;
    }
    report.epsilon = 0.5 * (centroid[0] / counts[0] - centroid[1] / counts[1]).norm();
  }

  std::vector<NodeId> nodes(n);
  std::iota(nodes.begin(), nodes.end(), 0);
  Rng rng(mix_seed(seed, 0xC3u));
  const std::size_t centers = std::min(options.num_centers, n);
  for (std::size_t i = 0; i < centers; ++i) std::swap(nodes[i], nodes[uniform_int(rng, i, n - 1)]);

  double total_size = 0.0;
  for (std::size_t i = 0; i < centers; ++i) {
    const NodeId v = nodes[i];
    std::vector<NodeId> ball;
    for (NodeId u = 0; u < n; ++u) {
      if ((coords.row(u) - coords.row(v)).norm() <= report.epsilon) ball.push_back(u);
    }
    total_size += static_cast<double>(ball.size());
    const int crop = majority_label(ball, sample.labels);
    const auto ego = ego_network(sample.graph, v, 1);
    const int ego_label = majority_label(ego.node_map, sample.labels);
    if (crop == sample.labels[v]) ++report.crop_matches;
    if (crop == -1) ++report.crop_ties;
    if (ego_label == sample.labels[v]) ++report.ego_matches;
    if (ego_label == -1) ++report.ego_ties;
  }
  report.centers = centers;
  report.mean_crop_size = centers ? total_size / static_cast<double>(centers) : 0.0;
  return report;
}

QuintileReport quintile_report_from_values(std::span<const double> lambda2, std::span<const double> scores) {
  if (lambda2.size() != scores.size()) throw InvalidArgument("quintile_report: one score per graph required");
  if (lambda2.size() < 5) throw InvalidArgument("quintile_report: at least five graphs required");
  QuintileReport out;
  out.lambda2.assign(lambda2.begin(), lambda2.end());
  out.order.resize(lambda2.size());
  std::iota(out.order.begin(), out.order.end(), 0);
  std::stable_sort(out.order.begin(), out.order.end(),
                   [&](std::size_t a, std::size_t b) { return lambda2[a] < lambda2[b]; });
  const std::size_t n = lambda2.size();
  out.members.resize(5);
  out.means.resize(5);
  for (std::size_t q = 0; q < 5; ++q) {
    const std::size_t lo = q * n / 5;
    const std::size_t hi = (q + 1) * n / 5;
    double sum = 0.0;
    for (std::size_t r = lo; r < hi; ++r) {
      out.members[q].push_back(out.order[r]);
      sum += scores[out.order[r]];
    }
    out.means[q] = sum / static_cast<double>(hi - lo);
  }
  return out;
}

QuintileReport quintile_report(std::span<const Graph> graphs, std::span<const double> scores) {
  std::vector<double> values(graphs.size());
  const auto n = static_cast<std::ptrdiff_t>(graphs.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < n; ++i) values[static_cast<std::size_t>(i)] = lambda2(graphs[static_cast<std::size_t>(i)]);
  return quintile_report_from_values(values, scores);
}

}  // namespace sgcl
