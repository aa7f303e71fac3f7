#include "sgcl/encoder.hpp"

#include <algorithm>
#include <cmath>

namespace sgcl {

namespace {

std::size_t square(std::size_t x) { return x * x; }

}  // namespace

std::size_t GinParams::parameter_count(const EncoderDims& dims) {
  return dims.input_dim() * dims.hidden + dims.hidden + dims.layers * 2 * (square(dims.hidden) + dims.hidden);
}

GinParams::GinParams(const EncoderDims& dims) : dims_(dims) {
  if (dims.pos_dim + dims.degree_buckets == 0 || dims.hidden == 0 || dims.layers == 0) {
    throw InvalidArgument("GinParams: dimensions must be >= 1");
  }
  std::size_t at = 0;
  offsets_.input_weight = at;
  at += dims.input_dim() * dims.hidden;
  offsets_.input_bias = at;
  at += dims.hidden;
  for (std::size_t l = 0; l < dims.layers; ++l) {
    offsets_.w1.push_back(at);
    at += square(dims.hidden);
    offsets_.b1.push_back(at);
    at += dims.hidden;
    offsets_.w2.push_back(at);
    at += square(dims.hidden);
    offsets_.b2.push_back(at);
    at += dims.hidden;
  }
  values_.assign(at, 0.0);
}

GinParams GinParams::init(const EncoderDims& dims, Seed seed) {
  GinParams params(dims);
  Rng rng(seed);
  auto fill = [&](std::size_t offset, std::size_t fan_in, std::size_t fan_out) {
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    for (std::size_t i = 0; i < fan_in * fan_out; ++i) {
      params.values_[offset + i] = (2.0 * uniform01(rng) - 1.0) * limit;
    }
  };
  fill(params.offsets_.input_weight, dims.input_dim(), dims.hidden);
  for (std::size_t l = 0; l < dims.layers; ++l) {
    fill(params.offsets_.w1[l], dims.hidden, dims.hidden);
    fill(params.offsets_.w2[l], dims.hidden, dims.hidden);
  }
  return params;
}

GinParams::ConstMap GinParams::input_weight() const {
  return {values_.data() + offsets_.input_weight, static_cast<Eigen::Index>(dims_.input_dim()),
          static_cast<Eigen::Index>(dims_.hidden)};
}
GinParams::ConstVecMap GinParams::input_bias() const {
  return {values_.data() + offsets_.input_bias, static_cast<Eigen::Index>(dims_.hidden)};
}
GinParams::ConstMap GinParams::weight1(std::size_t l) const {
  const auto h = static_cast<Eigen::Index>(dims_.hidden);
  return {values_.data() + offsets_.w1.at(l), h, h};
}
GinParams::ConstVecMap GinParams::bias1(std::size_t l) const {
  return {values_.data() + offsets_.b1.at(l), static_cast<Eigen::Index>(dims_.hidden)};
}
GinParams::ConstMap GinParams::weight2(std::size_t l) const {
  const auto h = static_cast<Eigen::Index>(dims_.hidden);
  return {values_.data() + offsets_.w2.at(l), h, h};
}
GinParams::ConstVecMap GinParams::bias2(std::size_t l) const {
  return {values_.data() + offsets_.b2.at(l), static_cast<Eigen::Index>(dims_.hidden)};
}

RowMatrix node_features(const View& view, std::size_t pos_dim, std::size_t degree_buckets) {
  const auto n = static_cast<Eigen::Index>(view.graph.num_nodes());
  if (view.features.rows() != n) throw InvalidArgument("node_features: feature rows do not match node count");
  RowMatrix x = RowMatrix::Zero(n, static_cast<Eigen::Index>(pos_dim + degree_buckets));
  const Eigen::Index copied = std::min<Eigen::Index>(view.features.cols(), static_cast<Eigen::Index>(pos_dim));
  x.leftCols(copied) = view.features.leftCols(copied);
  if (degree_buckets > 0) {
    for (Eigen::Index u = 0; u < n; ++u) {
      const std::size_t bucket = std::min(view.graph.degree(static_cast<NodeId>(u)), degree_buckets - 1);
      x(u, static_cast<Eigen::Index>(pos_dim + bucket)) = 1.0;
    }
  }
  return x;
}

Vector gin_forward(const GinParams& params, const View& view, const ForwardOptions& options, ForwardCache* cache) {
  const auto& dims = params.dims();
  return gin_forward(params, view.graph, node_features(view, dims.pos_dim, dims.degree_buckets), options, cache);
}

Vector gin_forward(const GinParams& params, const Graph& graph, const RowMatrix& features,
                   const ForwardOptions& options, ForwardCache* cache) {
  const auto& dims = params.dims();
  if (static_cast<std::size_t>(features.cols()) != dims.input_dim()) {
    throw InvalidArgument("gin_forward: feature width does not match the input projection");
  }
  if (static_cast<std::size_t>(features.rows()) != graph.num_nodes()) {
    throw InvalidArgument("gin_forward: feature rows do not match node count");
  }
  ForwardCache local;
  ForwardCache& c = cache ? *cache : local;
  c.layers.assign(dims.layers, {});
  c.input = features;

  RowMatrix h = features * params.input_weight();
  h.rowwise() += params.input_bias().transpose();

  Rng dropout_rng(options.seed);
  const double keep = 1.0 - options.dropout;
  for (std::size_t l = 0; l < dims.layers; ++l) {
    auto& layer = c.layers[l];
    kernels::aggregate_serial(graph, h, dims.epsilon, layer.agg);
    layer.z1 = layer.agg * params.weight1(l);
    layer.z1.rowwise() += params.bias1(l).transpose();
    layer.a1 = layer.z1.cwiseMax(0.0);
    if (options.dropout > 0.0) {
      layer.mask.resize(layer.a1.rows(), layer.a1.cols());
      for (Eigen::Index i = 0; i < layer.mask.size(); ++i) {
        layer.mask.data()[i] = uniform01(dropout_rng) < keep ? 1.0 / keep : 0.0;
      }
      layer.a1 = layer.a1.cwiseProduct(layer.mask);
    } else {
      layer.mask.resize(0, 0);
    }
    layer.z2 = layer.a1 * params.weight2(l);
    layer.z2.rowwise() += params.bias2(l).transpose();
    layer.out = (l + 1 < dims.layers) ? RowMatrix(layer.z2.cwiseMax(0.0)) : layer.z2;
    h = layer.out;
  }

  c.readout = h.colwise().sum().transpose();
  const double norm = c.readout.norm();
  c.repr = norm > 0.0 ? Vector(c.readout / norm) : Vector::Zero(c.readout.size());
  return c.repr;
}

void gin_backward(const GinParams& params, const Graph& graph, const ForwardCache& cache, const Vector& grad_repr,
                  std::span<double> grad) {
  const auto& dims = params.dims();
  const auto& off = params.offsets();
  if (grad.size() != params.size()) throw InvalidArgument("gin_backward: gradient buffer size mismatch");
  const auto h = static_cast<Eigen::Index>(dims.hidden);
  auto grad_map = [&](std::size_t offset, Eigen::Index rows, Eigen::Index cols) {
    return Eigen::Map<Matrix>(grad.data() + offset, rows, cols);
  };
  auto grad_vec = [&](std::size_t offset) { return Eigen::Map<Vector>(grad.data() + offset, h); };

  const double norm = cache.readout.norm();
  if (norm == 0.0) return;
  const Vector grad_sum = (grad_repr - cache.repr * cache.repr.dot(grad_repr)) / norm;
  const auto n = static_cast<Eigen::Index>(graph.num_nodes());
  RowMatrix dh = grad_sum.transpose().replicate(n, 1);

  RowMatrix dagg;
  for (std::size_t step = dims.layers; step-- > 0;) {
    const auto& layer = cache.layers[step];
    RowMatrix dz2 = dh;
    if (step + 1 < dims.layers) dz2 = dz2.cwiseProduct((layer.z2.array() > 0.0).cast<double>().matrix());
    grad_map(off.w2[step], h, h) += Matrix(layer.a1.transpose() * dz2);
    grad_vec(off.b2[step]) += Vector(dz2.colwise().sum().transpose());
    RowMatrix da1 = dz2 * params.weight2(step).transpose();
    if (layer.mask.size() > 0) da1 = da1.cwiseProduct(layer.mask);
    const RowMatrix dz1 = da1.cwiseProduct((layer.z1.array() > 0.0).cast<double>().matrix());
    grad_map(off.w1[step], h, h) += Matrix(layer.agg.transpose() * dz1);
    grad_vec(off.b1[step]) += Vector(dz1.colwise().sum().transpose());
    dagg = dz1 * params.weight1(step).transpose();
    // The aggregation operator (1 + eps) I + A is symmetric.
    kernels::aggregate_serial(graph, dagg, dims.epsilon, dh);
  }
  grad_map(off.input_weight, static_cast<Eigen::Index>(dims.input_dim()), h) += Matrix(cache.input.transpose() * dh);
  grad_vec(off.input_bias) += Vector(dh.colwise().sum().transpose());
}

}  // namespace sgcl
