#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "sgcl/common.hpp"
#include "sgcl/global_embed.hpp"
#include "sgcl/graph.hpp"
#include "sgcl/spectral.hpp"

namespace sgcl {

// One element of a positive pair: a subgraph, its node features, and the
// parent ids of its nodes. `eigenvalues[j]` is the Laplacian eigenvalue that
// produced feature column j; columns past eigenvalues.size() are zero padding.
struct View {
  Graph graph;
  Matrix features;
  std::vector<NodeId> node_map;
  std::vector<double> eigenvalues;
};

/// Builds a view from a subgraph with freshly computed positional features.
View make_view(Subgraph sub, std::size_t dim);

/// Rank-based crop window; quantiles are (x_min, x_max, y_min, y_max).
struct CropSpec {
  std::array<double, 4> quantiles{0.0, 1.0, 0.0, 1.0};
  double probability = 0.0;
};

enum class FilterMode { similar, diverse, off };

struct AugmentationConfig {
  double p_filter = 0.5;
  double p_align = 0.5;
  double p_mask = 0.25;
  double p_reorder = 0.25;
  FilterMode filter_mode = FilterMode::similar;
  double filter_c = 0.3;
  std::size_t t_max = 5;
  std::vector<CropSpec> crop_specs = default_crop_specs();
  std::size_t r_max = 10;
  /// Upper bound of the masked column count; unset means ceil(embed_dim / 2).
  std::optional<std::size_t> mask_max;
  WalkParams walk;
  std::size_t ego_radius = 2;
  std::size_t embed_dim = 64;
  LaplacianKind laplacian_kind = LaplacianKind::normalized;

  static std::vector<CropSpec> default_crop_specs();
  /// Every stochastic step disabled: the pair is two raw random-walk views.
  static AugmentationConfig disabled();

  std::size_t resolved_mask_max() const { return mask_max.value_or((embed_dim + 1) / 2); }
  /// Throws InvalidArgument when probabilities or ranges are inconsistent.
  void validate() const;
};

/// Value at 1-based rank ceil(p * N) of the sorted entries; -inf for p = 0, +inf for p = 1.
double rank_threshold(std::vector<double> values, double p);

// Keeps nodes whose second and third Laplacian eigenvector entries fall inside
// the rank-derived windows, then recomputes positional features on the result.
// Returns the input unchanged for views with fewer than 3 nodes, disconnected
// views (no nonzero second eigenvalue), or crops that would remove every node.
View spectral_crop(const View& view, const CropSpec& spec, LaplacianKind kind = LaplacianKind::normalized);

/// Among the first k ascending eigenvalues, orders columns by descending
/// sum_{j=1..r} (1 - lambda)^j (stable). new column i = old column perm[i].
std::vector<std::size_t> reorder_permutation(std::span<const double> eigenvalues, std::size_t k, std::size_t r);

/// Applies `reorder_permutation` with the given r to the view's spectral columns.
View apply_reorder(const View& view, std::size_t r);

/// Zeroes the `count` spectral columns paired with the largest eigenvalues.
View mask_top_columns(const View& view, std::size_t count);

/// Draws z uniformly from [0, max_masked] and masks z columns.
View apply_mask(const View& view, std::size_t max_masked, Seed seed);

struct ProcrustesResult {
  Matrix aligned;
  Matrix rotation;
};

// Orthogonal Q minimizing ||X Q - N||_F: Q = A C^T where X^T N = A S C^T.
// If the widths differ only the leading min(width) columns are aligned; the
// remaining feature columns pass through unchanged.
ProcrustesResult procrustes_align(const Matrix& features, const Matrix& bridge);

/// Cosine of the two summaries against the 1 - c threshold. A zero vector accepts.
bool similarity_accept(const Vector& s1, const Vector& s2, double c, FilterMode mode);

/// Aligns the view's features to the global embedding rows of its nodes.
View align_to_bridge(const View& view, const GlobalEmbedding& global);

/// Two positive views of the ego network of `center`. `global` may be null
/// only when filtering and alignment can never trigger.
std::pair<View, View> generate_view_pair(const Graph& g, NodeId center, const AugmentationConfig& cfg,
                                         const GlobalEmbedding* global, Seed seed);

}  // namespace sgcl
