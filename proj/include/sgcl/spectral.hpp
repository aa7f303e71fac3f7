#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Sparse>

#include "sgcl/common.hpp"
#include "sgcl/graph.hpp"

namespace sgcl {

enum class LaplacianKind { normalized, unnormalized };

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Eigenpairs of a Laplacian, eigenvalues ascending. Column j of `eigenvectors`
/// pairs with eigenvalues[j]; every column is sign-canonicalized.
struct SpectralEmbedding {
  Vector eigenvalues;
  Matrix eigenvectors;
  LaplacianKind kind = LaplacianKind::normalized;
};

/// Normalized: I - D^{-1/2} A D^{-1/2}; an isolated node keeps a unit diagonal
/// and zero off-diagonals. Unnormalized: D - A.
SparseMatrix laplacian(const Graph& g, LaplacianKind kind);
Matrix laplacian_dense(const Graph& g, LaplacianKind kind);

struct EigenSolverOptions {
  /// Graphs up to this size use the dense symmetric solver.
  std::size_t dense_cap = 4096;
  double tolerance = 1e-8;
  /// 0 means 10 * N.
  std::size_t max_iterations = 0;
};

/// k smallest eigenpairs of the symmetric matrix `L`. Dense solve up to
/// `dense_cap`, shift-invert block subspace iteration above it.
/// Throws NumericalError when the iterative path does not reach the tolerance.
SpectralEmbedding smallest_k_eigs(const SparseMatrix& L, std::size_t k,
                                  LaplacianKind kind = LaplacianKind::normalized,
                                  const EigenSolverOptions& options = {});

/// Flips each column so its largest-magnitude entry is positive. Entries within
/// a relative 1e-9 of the maximum count as ties; the lowest row index wins.
void canonicalize_signs(Matrix& vectors);

/// Full ascending eigendecomposition of a (small) graph Laplacian.
SpectralEmbedding full_spectrum(const Graph& g, LaplacianKind kind);

/// First `dim` normalized-Laplacian eigenvector columns (ascending eigenvalue),
/// zero-padded when the graph has fewer than `dim` nodes.
Matrix positional_embedding(const Graph& g, std::size_t dim);

/// Positional features together with the eigenvalue of each non-padded column.
struct PositionalSpectrum {
  Matrix features;
  std::vector<double> eigenvalues;
};
PositionalSpectrum positional_spectrum(const Graph& g, std::size_t dim,
                                       LaplacianKind kind = LaplacianKind::normalized);

/// Closed-form k-th eigenpair of the unnormalized Laplacian of P_n:
/// eigenvalue 2 - 2cos(pi k / n), eigenvector cos(pi k (u + 1/2) / n) (unit norm).
std::pair<double, Vector> path_closed_form(std::size_t n, std::size_t k);

/// Sorted multiset {a_i + b_j}.
std::vector<double> product_spectrum(std::span<const double> a, std::span<const double> b);

/// Second-smallest normalized-Laplacian eigenvalue (0 for graphs with < 2 nodes).
double lambda2(const Graph& g);

/// max ||L v - lambda v||_2 over the returned pairs.
double max_residual(const SparseMatrix& L, const SpectralEmbedding& eigs);

}  // namespace sgcl
