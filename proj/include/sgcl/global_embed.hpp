#pragma once

#include <cstddef>
#include <span>

#include "sgcl/common.hpp"
#include "sgcl/graph.hpp"

namespace sgcl {

/// Whole-graph node embedding; one unit-norm (or zero) row per node.
struct GlobalEmbedding {
  Matrix matrix;
  std::size_t window = 1;
  std::size_t dim = 0;
};

struct NetMfOptions {
  std::size_t window = 1;
  double log_floor = 1e-8;
  /// Multiply by the total edge weight before the log. Off by default; the
  /// SBM two-block reduction turns it on to recover the transformed parameters.
  bool volume_scaling = false;
  /// Largest node count accepted by the dense construction.
  std::size_t dense_cap = 4096;
};

// Builds log(max(D^{-1/2} (sum_{j=1..r} P^j) D^{-1/2}, floor)) with
// P = D^{-1/2} W D^{-1/2} = I - L, which equals sum_j (D^{-1} W)^j D^{-1}.
// `weights` is a symmetric non-negative (possibly weighted) adjacency matrix.
// Rows with zero degree contribute zeros before the floor is applied.
Matrix netmf_matrix_dense(const Matrix& weights, const NetMfOptions& options = {});
Matrix netmf_matrix(const Graph& g, const NetMfOptions& options = {});

/// Rows U_d |Lambda_d|^{1/2} from the `dim` eigenpairs of largest |eigenvalue|,
/// each row scaled to unit length (zero rows stay zero).
GlobalEmbedding factorize_global(const Matrix& m, std::size_t dim, std::size_t window = 1);

/// Un-normalized factor U_d |Lambda_d|^{1/2} and the signed eigenvalues used.
struct SpectralFactor {
  Matrix factor;
  Vector eigenvalues;
};
SpectralFactor spectral_factor(const Matrix& m, std::size_t dim);

GlobalEmbedding compute_global_embedding(const Graph& g, std::size_t dim, const NetMfOptions& options = {});

/// Sum of the rows of `embedding` listed in `node_map`.
Vector view_summary(const GlobalEmbedding& embedding, std::span<const NodeId> node_map);

}  // namespace sgcl
