#include "sgcl/contrastive.hpp"

#include <algorithm>
#include <cmath>

#include "sgcl/kernels.hpp"

namespace sgcl {

TrainConfig TrainConfig::full_e2e() { return {}; }

TrainConfig TrainConfig::full_moco() {
  TrainConfig cfg;
  cfg.scheme = TrainScheme::moco;
  cfg.batch_size = 32;
  cfg.queue_size = 16384;
  return cfg;
}

TrainConfig TrainConfig::desk_e2e() {
  TrainConfig cfg;
  cfg.steps = 1000;
  cfg.batch_size = 32;
  cfg.queue_size = 255;
  return cfg;
}

TrainConfig TrainConfig::desk_moco() {
  TrainConfig cfg = desk_e2e();
  cfg.scheme = TrainScheme::moco;
  return cfg;
}

void TrainConfig::validate() const {
  if (!(temperature > 0.0)) throw InvalidArgument("temperature must be positive");
  if (!(momentum >= 0.0 && momentum <= 1.0)) throw InvalidArgument("momentum must lie in [0, 1]");
  if (queue_size == 0) throw InvalidArgument("queue_size must be >= 1");
  if (batch_size == 0) throw InvalidArgument("batch_size must be >= 1");
  if (scheme == TrainScheme::e2e && batch_size < 2) throw InvalidArgument("E2E needs batch_size >= 2 for negatives");
  if (!(lr > 0.0)) throw InvalidArgument("lr must be positive");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw InvalidArgument("dropout must lie in [0, 1)");
  if (warmup_fraction < 0.0 || decay_fraction < 0.0 || warmup_fraction + decay_fraction > 1.0) {
    throw InvalidArgument("warmup and decay fractions must be non-negative and sum to at most 1");
  }
}

std::string to_string(TrainScheme scheme) { return scheme == TrainScheme::e2e ? "e2e" : "moco"; }

NceResult info_nce(const Vector& query, const Vector& positive, const Matrix& negatives, double tau,
                   NceObjective objective) {
  if (negatives.rows() < 1) throw InvalidArgument("info_nce: at least one negative is required");
  if (query.size() != positive.size() || negatives.cols() != query.size()) {
    throw InvalidArgument("info_nce: representation dimensions differ");
  }
  if (!(tau > 0.0)) throw InvalidArgument("info_nce: temperature must be positive");
  if (!query.allFinite() || !positive.allFinite() || !negatives.allFinite()) {
    throw NumericalError("info_nce: non-finite representation");
  }
  const double s_pos = query.dot(positive) / tau;
  const Vector s_neg = negatives * query / tau;

  NceResult out;
  double d_pos = 0.0;
  Vector d_neg(s_neg.size());
  if (objective == NceObjective::standard) {
    const double peak = std::max(s_pos, s_neg.maxCoeff());
    const double e_pos = std::exp(s_pos - peak);
    const Vector e_neg = (s_neg.array() - peak).exp().matrix();
    const double total = e_pos + e_neg.sum();
    out.loss = -(s_pos - peak) + std::log(total);
    d_pos = e_pos / total - 1.0;
    d_neg = e_neg / total;
  } else {
    const double denom = s_pos + s_neg.sum();
    if (!(denom > 0.0)) throw NumericalError("info_nce: as-printed denominator is not positive");
    out.loss = -s_pos + std::log(denom);
    d_pos = -1.0 + 1.0 / denom;
    d_neg.setConstant(1.0 / denom);
  }
  if (!std::isfinite(out.loss)) throw NumericalError("info_nce: non-finite loss");
  out.grad_query = (d_pos * positive + negatives.transpose() * d_neg) / tau;
  out.grad_positive = d_pos * query / tau;
  out.grad_negatives = d_neg * query.transpose() / tau;
  return out;
}

double info_nce_loss(const Vector& query, const Vector& positive, const Matrix& negatives, double tau,
                     NceObjective objective) {
  return info_nce(query, positive, negatives, tau, objective).loss;
}

namespace {

struct Encoded {
  std::vector<ForwardCache> caches;
  Matrix reprs;  // one row per view
};

// Encodes views[i] for every i; dropout seeds derive from (seed, i).
Encoded encode_views(const GinParams& params, const std::vector<const View*>& views, double dropout, Seed seed,
                     bool keep_cache) {
  Encoded out;
  const auto n = static_cast<std::ptrdiff_t>(views.size());
  out.caches.resize(keep_cache ? views.size() : 0);
  out.reprs.resize(n, static_cast<Eigen::Index>(params.dims().hidden));
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    ForwardOptions options{dropout, mix_seed(seed, idx)};
    ForwardCache* cache = keep_cache ? &out.caches[idx] : nullptr;
    out.reprs.row(i) = gin_forward(params, *views[idx], options, cache).transpose();
  }
  return out;
}

// Backpropagates each view's representation gradient and sums in view order.
std::vector<double> backprop_views(const GinParams& params, const std::vector<const View*>& views,
                                   const Encoded& encoded, const Matrix& grad_reprs) {
  const auto n = static_cast<std::ptrdiff_t>(views.size());
  std::vector<std::vector<double>> parts(views.size(), std::vector<double>(params.size(), 0.0));
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    gin_backward(params, views[idx]->graph, encoded.caches[idx], grad_reprs.row(i).transpose(), parts[idx]);
  }
  std::vector<double> total(params.size(), 0.0);
  kernels::reduce_sum_parallel(parts, total);
  return total;
}

}  // namespace

BatchLoss e2e_loss_gradients(const GinParams& params, std::span<const ViewPair> batch, const LossOptions& options) {
  const std::size_t b = batch.size();
  if (b < 2) throw InvalidArgument("e2e_loss_gradients: batch needs at least two pairs");
  std::vector<const View*> views;
  views.reserve(2 * b);
  for (const auto& pair : batch) views.push_back(&pair.first);
  for (const auto& pair : batch) views.push_back(&pair.second);
  const Encoded encoded = encode_views(params, views, options.dropout, options.seed, true);
  const auto bb = static_cast<Eigen::Index>(b);
  const Matrix queries = encoded.reprs.topRows(bb);
  const Matrix keys = encoded.reprs.bottomRows(bb);

  Matrix grad = Matrix::Zero(encoded.reprs.rows(), encoded.reprs.cols());
  const std::size_t cap = std::min(options.dictionary_cap, b - 1);
  BatchLoss out;
  for (std::size_t i = 0; i < b; ++i) {
    std::vector<Eigen::Index> negative_ids;
    for (std::size_t j = 0; j < b && negative_ids.size() < cap; ++j) {
      if (j != i) negative_ids.push_back(static_cast<Eigen::Index>(j));
    }
    Matrix negatives(static_cast<Eigen::Index>(negative_ids.size()), keys.cols());
    for (std::size_t r = 0; r < negative_ids.size(); ++r) negatives.row(static_cast<Eigen::Index>(r)) = keys.row(negative_ids[r]);
    const auto ii = static_cast<Eigen::Index>(i);
    const NceResult term = info_nce(queries.row(ii).transpose(), keys.row(ii).transpose(), negatives,
                                    options.temperature, options.objective);
    out.loss += term.loss;
    grad.row(ii) += term.grad_query.transpose();
    grad.row(bb + ii) += term.grad_positive.transpose();
    for (std::size_t r = 0; r < negative_ids.size(); ++r) {
      grad.row(bb + negative_ids[r]) += term.grad_negatives.row(static_cast<Eigen::Index>(r));
    }
  }
  const double scale = 1.0 / static_cast<double>(b);
  out.loss *= scale;
  grad *= scale;
  out.grad = backprop_views(params, views, encoded, grad);
  out.keys = keys;
  return out;
}

BatchLoss moco_loss_gradients(const GinParams& params, const GinParams& key_params, std::span<const ViewPair> batch,
                              const Matrix& queue, const LossOptions& options) {
  const std::size_t b = batch.size();
  if (b == 0) throw InvalidArgument("moco_loss_gradients: empty batch");
  std::vector<const View*> query_views;
  std::vector<const View*> key_views;
  for (const auto& pair : batch) {
    query_views.push_back(&pair.first);
    key_views.push_back(&pair.second);
  }
  const Encoded queries = encode_views(params, query_views, options.dropout, options.seed, true);
  const Encoded keys = encode_views(key_params, key_views, 0.0, 0, false);

  BatchLoss out;
  Matrix grad = Matrix::Zero(queries.reprs.rows(), queries.reprs.cols());
  for (std::size_t i = 0; i < b; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    const NceResult term = info_nce(queries.reprs.row(ii).transpose(), keys.reprs.row(ii).transpose(), queue,
                                    options.temperature, options.objective);
    out.loss += term.loss;
    grad.row(ii) = term.grad_query.transpose();
  }
  const double scale = 1.0 / static_cast<double>(b);
  out.loss *= scale;
  grad *= scale;
  out.grad = backprop_views(params, query_views, queries, grad);
  out.keys = keys.reprs;
  return out;
}

double learning_rate(std::size_t step, std::size_t total_steps, const TrainConfig& cfg) {
  const double total = static_cast<double>(total_steps);
  const auto warmup = static_cast<std::size_t>(std::ceil(cfg.warmup_fraction * total));
  const auto decay = static_cast<std::size_t>(std::ceil(cfg.decay_fraction * total));
  double factor = 1.0;
  if (warmup > 0 && step < warmup) {
    factor = static_cast<double>(step + 1) / static_cast<double>(warmup);
  } else if (decay > 0 && step + decay >= total_steps) {
    factor = static_cast<double>(total_steps - step) / static_cast<double>(decay);
  }
  return cfg.lr * std::clamp(factor, 0.0, 1.0);
}

void adam_step(std::span<double> params, std::span<const double> grads, std::size_t step, std::size_t total_steps,
               const TrainConfig& cfg, AdamState& state) {
  if (params.size() != grads.size()) throw InvalidArgument("adam_step: shape mismatch");
  if (state.m.size() != params.size()) {
    state.m.assign(params.size(), 0.0);
    state.v.assign(params.size(), 0.0);
  }
  const double lr = learning_rate(step, total_steps, cfg);
  const double t = static_cast<double>(step + 1);
  const double c1 = 1.0 - std::pow(cfg.beta1, t);
  const double c2 = 1.0 - std::pow(cfg.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    state.m[i] = cfg.beta1 * state.m[i] + (1.0 - cfg.beta1) * grads[i];
    state.v[i] = cfg.beta2 * state.v[i] + (1.0 - cfg.beta2) * grads[i] * grads[i];
    const double m_hat = state.m[i] / c1;
    const double v_hat = state.v[i] / c2;
    params[i] -= lr * m_hat / (std::sqrt(v_hat) + cfg.adam_eps);
  }
}

MoCoQueue::MoCoQueue(std::size_t capacity, std::size_t dim)
    : rows_(Matrix::Zero(static_cast<Eigen::Index>(capacity), static_cast<Eigen::Index>(dim))) {
  if (capacity == 0) throw InvalidArgument("MoCoQueue: capacity must be >= 1");
}

void MoCoQueue::enqueue(const Vector& key) {
  if (key.size() != rows_.cols()) throw InvalidArgument("MoCoQueue: key dimension mismatch");
  rows_.row(static_cast<Eigen::Index>(cursor_)) = key.transpose();
  cursor_ = (cursor_ + 1) % capacity();
  size_ = std::min(size_ + 1, capacity());
}

Matrix MoCoQueue::contents() const {
  Matrix out(static_cast<Eigen::Index>(size_), rows_.cols());
  const std::size_t oldest = size_ < capacity() ? 0 : cursor_;
  for (std::size_t i = 0; i < size_; ++i) {
    out.row(static_cast<Eigen::Index>(i)) = rows_.row(static_cast<Eigen::Index>((oldest + i) % capacity()));
  }
  return out;
}

void MoCoQueue::fill_random(Seed seed) {
  Rng rng(seed);
  for (std::size_t i = 0; i < capacity(); ++i) {
    Vector key(rows_.cols());
    for (Eigen::Index j = 0; j < key.size(); ++j) key(j) = standard_normal(rng);
    key.normalize();
    enqueue(key);
  }
}

void momentum_update(GinParams& key_params, const GinParams& params, double momentum) {
  if (key_params.size() != params.size()) throw InvalidArgument("momentum_update: shape mismatch");
  auto dst = key_params.values();
  const auto src = params.values();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = momentum * dst[i] + (1.0 - momentum) * src[i];
}

TrainerState init_trainer(const TrainConfig& cfg, Seed seed) {
  cfg.validate();
  TrainerState state;
  state.params = GinParams::init(cfg.encoder, mix_seed(seed, 0));
  if (cfg.scheme == TrainScheme::moco) {
    MoCoState moco{state.params, MoCoQueue(cfg.queue_size, cfg.encoder.hidden)};
    moco.queue.fill_random(mix_seed(seed, 1));
    state.moco = std::move(moco);
  }
  return state;
}

Corpus build_corpus(std::vector<Graph> graphs, const AugmentationConfig& aug) {
  if (graphs.empty()) throw InvalidArgument("build_corpus: empty corpus");
  Corpus corpus;
  corpus.graphs = std::move(graphs);
  const bool needs_global = aug.p_align > 0.0 || (aug.filter_mode != FilterMode::off && aug.p_filter > 0.0);
  if (needs_global) {
    corpus.globals.resize(corpus.graphs.size());
    const auto n = static_cast<std::ptrdiff_t>(corpus.graphs.size());
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      const auto idx = static_cast<std::size_t>(i);
      corpus.globals[idx] = compute_global_embedding(corpus.graphs[idx], aug.embed_dim);
    }
  }
  return corpus;
}

std::vector<ViewPair> generate_batch(const Corpus& corpus, std::span<const BatchItem> items,
                                     const AugmentationConfig& aug, Seed seed) {
  std::vector<ViewPair> pairs(items.size());
  const auto n = static_cast<std::ptrdiff_t>(items.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    const auto& item = items[idx];
    const GlobalEmbedding* global = corpus.globals.empty() ? nullptr : &corpus.globals[item.graph];
    pairs[idx] = generate_view_pair(corpus.graphs[item.graph], item.center, aug, global, mix_seed(seed, idx));
  }
  return pairs;
}

StepRecord train_step_on_pairs(TrainerState& state, std::span<const ViewPair> pairs, const TrainConfig& cfg,
                               Seed seed) {
  LossOptions options{cfg.temperature, cfg.queue_size, cfg.dropout, seed, cfg.objective};
  BatchLoss result;
  if (cfg.scheme == TrainScheme::e2e) {
    result = e2e_loss_gradients(state.params, pairs, options);
  } else {
    if (!state.moco) throw InvalidArgument("train_step: MoCo scheme without MoCo state");
    result = moco_loss_gradients(state.params, state.moco->key_params, pairs, state.moco->queue.contents(), options);
  }
  StepRecord record{state.step, result.loss, learning_rate(state.step, cfg.steps, cfg), cfg.scheme};
  adam_step(state.params.values(), result.grad, state.step, cfg.steps, cfg, state.adam);
  if (cfg.scheme == TrainScheme::moco) {
    for (Eigen::Index i = 0; i < result.keys.rows(); ++i) state.moco->queue.enqueue(result.keys.row(i).transpose());
    momentum_update(state.moco->key_params, state.params, cfg.momentum);
  }
  ++state.step;
  return record;
}

StepRecord train_step(TrainerState& state, const Corpus& corpus, std::span<const BatchItem> items,
                      const TrainConfig& cfg, const AugmentationConfig& aug, Seed seed) {
  const auto pairs = generate_batch(corpus, items, aug, mix_seed(seed, 0));
  return train_step_on_pairs(state, pairs, cfg, mix_seed(seed, 1));
}

PretrainResult pretrain(const Corpus& corpus, const TrainConfig& cfg, const AugmentationConfig& aug, Seed seed,
                        const StepCallback& on_step) {
  cfg.validate();
  aug.validate();
  if (corpus.graphs.empty()) throw InvalidArgument("pretrain: empty corpus");
  TrainerState state = init_trainer(cfg, seed);
  Rng sampler(mix_seed(seed, 2));
  PretrainResult result;
  result.records.reserve(cfg.steps);
  std::vector<BatchItem> items(cfg.batch_size);
  for (std::size_t step = 0; step < cfg.steps; ++step) {
    for (auto& item : items) {
      item.graph = uniform_int(sampler, 0, corpus.graphs.size() - 1);
      const std::size_t n = corpus.graphs[item.graph].num_nodes();
      if (n == 0) throw InvalidArgument("pretrain: corpus graph without nodes");
      item.center = static_cast<NodeId>(uniform_int(sampler, 0, n - 1));
    }
    const auto record = train_step(state, corpus, items, cfg, aug, mix_seed(seed, 1000 + step));
    result.records.push_back(record);
    if (on_step) on_step(record);
  }
  result.params = std::move(state.params);
  return result;
}

}  // namespace sgcl
