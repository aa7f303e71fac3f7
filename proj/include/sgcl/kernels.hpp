#pragma once

// Data-parallel inner loops. Each kernel has a serial reference version and
// an OpenMP version that must agree with it exactly (both accumulate every
// output row in the same order); tests compare the two and bench/ times them.

#include <vector>

#include <Eigen/Dense>

#include "sgcl/common.hpp"
#include "sgcl/graph.hpp"

namespace sgcl {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

namespace kernels {

/// out = (1 + eps) * h + A h, with A the 0/1 adjacency of `g`.
void aggregate_serial(const Graph& g, const RowMatrix& h, double eps, RowMatrix& out);
void aggregate_parallel(const Graph& g, const RowMatrix& h, double eps, RowMatrix& out);

/// logits(i, j) = <q_i, k_j> / tau over the rows of q and k.
Matrix similarity_logits_serial(const Matrix& q, const Matrix& k, double tau);
Matrix similarity_logits_parallel(const Matrix& q, const Matrix& k, double tau);

/// Sum of a list of equally sized vectors, added in index order.
void reduce_sum_serial(const std::vector<std::vector<double>>& parts, std::vector<double>& out);
/// Parallel over coordinates; per-coordinate addition order matches the serial version.
void reduce_sum_parallel(const std::vector<std::vector<double>>& parts, std::vector<double>& out);

/// Worker count used by the parallel kernels and batch loops.
int worker_count();
void set_worker_count(int workers);

}  // namespace kernels
}  // namespace sgcl
