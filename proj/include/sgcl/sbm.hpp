#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "sgcl/common.hpp"
#include "sgcl/graph.hpp"

namespace sgcl {

// Two-block stochastic block model: nodes [0, N) form block 0, [N, 2N) block 1.
// Edge probability p inside block 0, q inside block 1, z across blocks.
struct SbmSpec {
  std::size_t nodes_per_block = 0;
  double p = 0.0;
  double q = 0.0;
  double z = 0.0;
  bool self_loops = true;

  /// Validates 0 < z < q < p <= 1 and pq > z^2.
  static SbmSpec make(std::size_t nodes_per_block, double p, double q, double z, bool self_loops = true);
};

/// Same generator without the ordering constraints (probabilities in [0, 1]);
/// used for structural corpora such as p = q.
struct BlockModel {
  std::size_t nodes_per_block = 0;
  double p = 0.0;
  double q = 0.0;
  double z = 0.0;
  bool self_loops = true;
};

struct SbmSample {
  Graph graph;
  std::vector<int> labels;
};

SbmSample sample_sbm(const SbmSpec& spec, Seed seed);
SbmSample sample_block_model(const BlockModel& model, Seed seed);

/// Exact 2N x 2N expectation E[A] (diagonal included when self-loops are on).
Matrix sbm_expectation(const BlockModel& model);
Matrix sbm_expectation(const SbmSpec& spec);

/// Roots c of z c^2 + (p - q) c - z = 0 and eigenvalues mu = p + z c of [[p, z], [z, q]].
struct BlockSpectrum {
  double c_plus = 0.0;
  double c_minus = 0.0;
  double mu1 = 0.0;
  double mu2 = 0.0;
};
BlockSpectrum block_eigenpairs(double p, double q, double z);

struct TransformedParams {
  double p = 0.0;
  double q = 0.0;
  double z = 0.0;
};

/// Entry-wise log of vol * D^{-1} W D^{-1} for W = [[p, z], [z, q]]. Throws
/// std::logic_error if the sign pattern p' > 0, z' < 0, p' < q' fails.
TransformedParams line_transformed_params(double p, double q, double z);

/// Largest |eigenvalue| of a symmetric matrix by power iteration.
double operator_norm(const Matrix& symmetric, double tolerance = 1e-6, std::size_t max_iterations = 10000);

struct DavisKahanReport {
  double theta = 0.0;         // angle in [0, pi/2]
  double sin_theta = 0.0;
  double sin_2theta = 0.0;
  double perturbation_norm = 0.0;
  double eigengap = 0.0;      // min_{j != i} |mu_i - mu_j| of the true matrix
  bool gap_defined = true;
  double classical_bound = 0.0;  // sin 2theta <= 2 ||H|| / gap
  double printed_bound = 0.0;    // sin 2theta <= 2 ||H|| / (n * gap)
  bool classical_satisfied = false;
  bool printed_satisfied = false;
};

/// Compares the `index`-th (1-based, descending eigenvalue order) eigenvectors
/// of `truth` and `observed`.
DavisKahanReport davis_kahan_check(const Matrix& truth, const Matrix& observed, std::size_t index);

enum class FidelityBasis { normalized_laplacian, adjacency };

struct FidelityOptions {
  /// Radius of the crop ball; unset uses half the distance between the two
  /// label centroids in eigenvector-coordinate space.
  std::optional<double> epsilon;
  std::size_t num_centers = 50;
  FidelityBasis basis = FidelityBasis::normalized_laplacian;
  std::size_t max_resamples = 10;
};

struct FidelityReport {
  double epsilon = 0.0;
  std::size_t centers = 0;
  std::size_t crop_matches = 0;
  std::size_t crop_ties = 0;
  std::size_t ego_matches = 0;
  std::size_t ego_ties = 0;
  double mean_crop_size = 0.0;
  double crop_fraction() const { return centers ? static_cast<double>(crop_matches) / centers : 0.0; }
  double ego_fraction() const { return centers ? static_cast<double>(ego_matches) / centers : 0.0; }
};

/// Majority label of `members` (-1 on a tie).
int majority_label(std::span<const NodeId> members, std::span<const int> labels);

// Samples a connected SBM graph, embeds each node by its second and third
// eigenvector entries, and for random centers v compares label(v) with the
// majority label of the crop ball {v' : |lambda(v') - lambda(v)| <= eps} and
// of the 1-ego network.
FidelityReport crop_fidelity_experiment(const SbmSpec& spec, const FidelityOptions& options, Seed seed);

/// Graphs ranked by normalized-Laplacian lambda_2 (stable), split into five
/// rank quintiles, and the mean score of each quintile.
struct QuintileReport {
  std::vector<double> lambda2;
  std::vector<std::size_t> order;                 // graph indices by ascending lambda_2
  std::vector<std::vector<std::size_t>> members;  // per quintile
  std::vector<double> means;
};
QuintileReport quintile_report(std::span<const Graph> graphs, std::span<const double> scores);
QuintileReport quintile_report_from_values(std::span<const double> lambda2, std::span<const double> scores);

}  // namespace sgcl
