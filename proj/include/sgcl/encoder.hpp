#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "sgcl/augment.hpp"
#include "sgcl/common.hpp"
#include "sgcl/kernels.hpp"

namespace sgcl {

struct EncoderDims {
  std::size_t pos_dim = 64;
  std::size_t degree_buckets = 16;
  std::size_t hidden = 64;
  std::size_t layers = 5;
  double epsilon = 0.0;

  std::size_t input_dim() const { return pos_dim + degree_buckets; }
  friend bool operator==(const EncoderDims&, const EncoderDims&) = default;
};

// GIN parameters stored in one flat buffer so the optimizer, the momentum
// encoder and checkpoints can treat them as a single vector. Layout:
// input projection (W_in: input x hidden, b_in), then per layer the two MLP
// linear maps (W1, b1, W2, b2), all hidden x hidden. Matrices are column-major.
class GinParams {
 public:
  using ConstMap = Eigen::Map<const Matrix>;
  using MutMap = Eigen::Map<Matrix>;
  using ConstVecMap = Eigen::Map<const Vector>;

  GinParams() = default;
  explicit GinParams(const EncoderDims& dims);

  /// Glorot-uniform weights, zero biases; identical for identical seeds.
  static GinParams init(const EncoderDims& dims, Seed seed);
  static std::size_t parameter_count(const EncoderDims& dims);

  const EncoderDims& dims() const { return dims_; }
  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }
  std::size_t size() const { return values_.size(); }

  ConstMap input_weight() const;
  ConstVecMap input_bias() const;
  ConstMap weight1(std::size_t layer) const;
  ConstVecMap bias1(std::size_t layer) const;
  ConstMap weight2(std::size_t layer) const;
  ConstVecMap bias2(std::size_t layer) const;

  /// Offsets of each tensor inside the flat buffer (same layout for gradients).
  struct Offsets {
    std::size_t input_weight, input_bias;
    std::vector<std::size_t> w1, b1, w2, b2;
  };
  const Offsets& offsets() const { return offsets_; }

  friend bool operator==(const GinParams& a, const GinParams& b) {
    return a.dims_ == b.dims_ && a.values_ == b.values_;
  }

 private:
  EncoderDims dims_;
  Offsets offsets_{};
  // Aligned so vectorized products see the same memory layout on every run.
  std::vector<double, Eigen::aligned_allocator<double>> values_;
};

/// Positional columns (truncated or zero-padded to pos_dim) followed by a
/// one-hot degree bucket min(degree, buckets - 1).
RowMatrix node_features(const View& view, std::size_t pos_dim = 64, std::size_t degree_buckets = 16);

struct ForwardOptions {
  /// Train-time dropout on the MLP hidden activations; 0 disables it.
  double dropout = 0.0;
  Seed seed = 0;
};

/// Intermediate activations retained for the backward pass.
struct ForwardCache {
  RowMatrix input;
  struct Layer {
    RowMatrix agg, z1, a1, mask, z2, out;
  };
  std::vector<Layer> layers;
  Vector readout;  // un-normalized sum over nodes
  Vector repr;     // L2-normalized readout
};

// Five rounds of h <- MLP((1 + eps) h + sum of neighbor h), MLP = Linear,
// ReLU, Linear, with a ReLU between rounds (none after the last), a sum
// readout, and L2 normalization of the graph representation.
Vector gin_forward(const GinParams& params, const View& view, const ForwardOptions& options = {},
                   ForwardCache* cache = nullptr);
Vector gin_forward(const GinParams& params, const Graph& graph, const RowMatrix& features,
                   const ForwardOptions& options = {}, ForwardCache* cache = nullptr);

/// Accumulates d(loss)/d(params) into `grad` given d(loss)/d(repr).
void gin_backward(const GinParams& params, const Graph& graph, const ForwardCache& cache,
                  const Vector& grad_repr, std::span<double> grad);

}  // namespace sgcl
