#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sgcl/augment.hpp"
#include "sgcl/encoder.hpp"
#include "sgcl/global_embed.hpp"

namespace sgcl {

enum class TrainScheme { e2e, moco };

/// `standard` is InfoNCE with exp on every logit; `as_printed` keeps exp only
/// on the positive term in the numerator (kept for comparison runs).
enum class NceObjective { standard, as_printed };

struct TrainConfig {
  TrainScheme scheme = TrainScheme::e2e;
  std::size_t steps = 75000;
  double lr = 0.005;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  double warmup_fraction = 0.1;
  double decay_fraction = 0.1;
  std::size_t batch_size = 1024;
  double temperature = 0.07;
  /// Dictionary size K: negatives cap for E2E, queue length for MoCo.
  std::size_t queue_size = 1023;
  double momentum = 0.999;
  double dropout = 0.5;
  NceObjective objective = NceObjective::standard;
  EncoderDims encoder;

  static TrainConfig full_e2e();
  static TrainConfig full_moco();
  /// Desk-scale presets: batch 32, K = 255, 1000 steps.
  static TrainConfig desk_e2e();
  static TrainConfig desk_moco();

  void validate() const;
};

std::string to_string(TrainScheme scheme);

struct NceResult {
  double loss = 0.0;
  Vector grad_query;
  Vector grad_positive;
  Matrix grad_negatives;  // one row per negative
};

/// Loss and gradients for one query; `negatives` holds one representation per row.
NceResult info_nce(const Vector& query, const Vector& positive, const Matrix& negatives, double tau,
                   NceObjective objective = NceObjective::standard);
double info_nce_loss(const Vector& query, const Vector& positive, const Matrix& negatives, double tau,
                     NceObjective objective = NceObjective::standard);

using ViewPair = std::pair<View, View>;

struct BatchLoss {
  double loss = 0.0;
  std::vector<double> grad;
  /// Key representations (rows), returned for the MoCo queue.
  Matrix keys;
};

struct LossOptions {
  double temperature = 0.07;
  std::size_t dictionary_cap = 1023;
  double dropout = 0.0;
  Seed seed = 0;
  NceObjective objective = NceObjective::standard;
};

// Mean InfoNCE over the batch with both views encoded by `params`; the
// negatives of pair i are the keys of the other pairs (at most dictionary_cap,
// taken in batch order). Gradients flow through queries and keys.
BatchLoss e2e_loss_gradients(const GinParams& params, std::span<const ViewPair> batch, const LossOptions& options);

// Queries through `params`, keys through `key_params` without gradient,
// negatives from the rows of `queue`.
BatchLoss moco_loss_gradients(const GinParams& params, const GinParams& key_params, std::span<const ViewPair> batch,
                              const Matrix& queue, const LossOptions& options);

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
};

/// Linear warmup over the first warmup_fraction of steps ((step + 1) / warmup
/// steps) and linear decay over the last decay_fraction.
double learning_rate(std::size_t step, std::size_t total_steps, const TrainConfig& cfg);

/// Adam with bias correction at time step + 1 and the scheduled learning rate.
void adam_step(std::span<double> params, std::span<const double> grads, std::size_t step, std::size_t total_steps,
               const TrainConfig& cfg, AdamState& state);

// Fixed-capacity FIFO of unit-norm key representations.
class MoCoQueue {
 public:
  MoCoQueue() = default;
  MoCoQueue(std::size_t capacity, std::size_t dim);

  void enqueue(const Vector& key);
  /// Filled rows, oldest first.
  Matrix contents() const;
  std::size_t size() const { return size_; }
  std::size_t capacity() const { return static_cast<std::size_t>(rows_.rows()); }
  std::size_t cursor() const { return cursor_; }
  /// Fills the queue with random unit vectors.
  void fill_random(Seed seed);

 private:
  Matrix rows_;
  std::size_t size_ = 0;
  std::size_t cursor_ = 0;
};

struct MoCoState {
  GinParams key_params;
  MoCoQueue queue;
};

/// theta' <- m theta' + (1 - m) theta.
void momentum_update(GinParams& key_params, const GinParams& params, double momentum);

struct TrainerState {
  GinParams params;
  AdamState adam;
  std::optional<MoCoState> moco;
  std::size_t step = 0;
};

TrainerState init_trainer(const TrainConfig& cfg, Seed seed);

/// Pre-train graphs with their global embeddings (computed when alignment or
/// filtering can trigger).
struct Corpus {
  std::vector<Graph> graphs;
  std::vector<GlobalEmbedding> globals;
};
Corpus build_corpus(std::vector<Graph> graphs, const AugmentationConfig& aug);

struct BatchItem {
  std::size_t graph = 0;
  NodeId center = 0;
};

/// View pairs for every batch item; item i uses seed mix_seed(seed, i).
std::vector<ViewPair> generate_batch(const Corpus& corpus, std::span<const BatchItem> items,
                                     const AugmentationConfig& aug, Seed seed);

struct StepRecord {
  std::size_t step = 0;
  double loss = 0.0;
  double lr = 0.0;
  TrainScheme scheme = TrainScheme::e2e;
};

/// One optimizer step on the given batch; returns the batch loss.
StepRecord train_step(TrainerState& state, const Corpus& corpus, std::span<const BatchItem> items,
                      const TrainConfig& cfg, const AugmentationConfig& aug, Seed seed);

/// Same, on pre-built view pairs.
StepRecord train_step_on_pairs(TrainerState& state, std::span<const ViewPair> pairs, const TrainConfig& cfg,
                               Seed seed);

struct PretrainResult {
  GinParams params;
  std::vector<StepRecord> records;
};

using StepCallback = std::function<void(const StepRecord&)>;

/// Samples (graph, center) uniformly per batch element and runs cfg.steps steps.
PretrainResult pretrain(const Corpus& corpus, const TrainConfig& cfg, const AugmentationConfig& aug, Seed seed,
                        const StepCallback& on_step = {});

}  // namespace sgcl
