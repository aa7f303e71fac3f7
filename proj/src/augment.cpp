#include "sgcl/augment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace sgcl {

View make_view(Subgraph sub, std::size_t dim) {
  auto spectrum = positional_spectrum(sub.graph, dim, LaplacianKind::normalized);
  return {std::move(sub.graph), std::move(spectrum.features), std::move(sub.node_map),
          std::move(spectrum.eigenvalues)};
}

std::vector<CropSpec> AugmentationConfig::default_crop_specs() {
  return {{{0.2, 0.8, 0.2, 0.8}, 0.1},
          {{0.1, 0.9, 0.1, 0.9}, 0.1},
          {{0.0, 0.8, 0.0, 0.8}, 0.05},
          {{0.2, 1.0, 0.2, 1.0}, 0.05}};
}

AugmentationConfig AugmentationConfig::disabled() {
  AugmentationConfig cfg;
  cfg.p_filter = 0.0;
  cfg.p_align = 0.0;
  cfg.p_mask = 0.0;
  cfg.p_reorder = 0.0;
  cfg.filter_mode = FilterMode::off;
  cfg.crop_specs.clear();
  return cfg;
}

void AugmentationConfig::validate() const {
  auto is_prob = [](double p) { return p >= 0.0 && p <= 1.0; };
  if (!is_prob(p_filter) || !is_prob(p_align) || !is_prob(p_mask) || !is_prob(p_reorder)) {
    throw InvalidArgument("augmentation probabilities must lie in [0, 1]");
  }
  if (p_mask + p_reorder > 1.0 + 1e-12) throw InvalidArgument("p_mask + p_reorder must not exceed 1");
  if (!is_prob(filter_c)) throw InvalidArgument("filter_c must lie in [0, 1]");
  double total = 0.0;
  for (const auto& spec : crop_specs) {
    const auto& q = spec.quantiles;
    if (!std::all_of(q.begin(), q.end(), is_prob) || q[0] > q[1] || q[2] > q[3]) {
      throw InvalidArgument("crop quantiles must satisfy 0 <= min <= max <= 1");
    }
    if (!is_prob(spec.probability)) throw InvalidArgument("crop probability must lie in [0, 1]");
    total += spec.probability;
  }
  if (total > 1.0 + 1e-12) throw InvalidArgument("crop probabilities must sum to at most 1");
  if (t_max == 0) throw InvalidArgument("t_max must be >= 1");
  if (r_max == 0) throw InvalidArgument("r_max must be >= 1");
  if (embed_dim == 0) throw InvalidArgument("embed_dim must be >= 1");
  if (resolved_mask_max() > embed_dim) throw InvalidArgument("mask_max exceeds embed_dim");
  if (!is_prob(walk.return_prob)) throw InvalidArgument("walk return_prob must lie in [0, 1]");
  if (walk.max_nodes == 0) throw InvalidArgument("walk max_nodes must be >= 1");
}

double rank_threshold(std::vector<double> values, double p) {
  if (p <= 0.0) return -std::numeric_limits<double>::infinity();
  if (p >= 1.0) return std::numeric_limits<double>::infinity();
  std::sort(values.begin(), values.end());
  const auto n = static_cast<double>(values.size());
  auto rank = static_cast<std::size_t>(std::ceil(p * n - 1e-12));
  rank = std::clamp<std::size_t>(rank, 1, values.size());
  return values[rank - 1];
}

View spectral_crop(const View& view, const CropSpec& spec, LaplacianKind kind) {
  const std::size_t n = view.graph.num_nodes();
  if (n < 3) return view;
  const auto eigs = smallest_k_eigs(laplacian(view.graph, kind), 3, kind);
  if (eigs.eigenvalues(1) < 1e-8) return view;

  const Vector x = eigs.eigenvectors.col(1);
  const Vector y = eigs.eigenvectors.col(2);
  const std::vector<double> xs(x.data(), x.data() + x.size());
  const std::vector<double> ys(y.data(), y.data() + y.size());
  const auto& q = spec.quantiles;
  // Entries within round-off of a threshold count as ties and are kept.
  constexpr double kTie = 1e-10;
  const double x_lo = rank_threshold(xs, q[0]) - kTie;
  const double x_hi = rank_threshold(xs, q[1]) + kTie;
  const double y_lo = rank_threshold(ys, q[2]) - kTie;
  const double y_hi = rank_threshold(ys, q[3]) + kTie;

  std::vector<NodeId> keep;
  for (std::size_t v = 0; v < n; ++v) {
    if (xs[v] >= x_lo && xs[v] <= x_hi && ys[v] >= y_lo && ys[v] <= y_hi) keep.push_back(static_cast<NodeId>(v));
  }
  if (keep.empty() || keep.size() == n) return view;

  auto local = induced_subgraph(view.graph, keep);
  for (auto& id : local.node_map) id = view.node_map[id];
  return make_view(std::move(local), static_cast<std::size_t>(view.features.cols()));
}

std::vector<std::size_t> reorder_permutation(std::span<const double> eigenvalues, std::size_t k, std::size_t r) {
  if (r == 0) throw InvalidArgument("reorder_permutation: r must be >= 1");
  if (k > eigenvalues.size()) throw InvalidArgument("reorder_permutation: k exceeds eigenvalue count");
  // Ascending eigenvalues, so the first k columns have the largest (1 - lambda).
  std::vector<double> key(k);
  for (std::size_t i = 0; i < k; ++i) {
    const double x = 1.0 - eigenvalues[i];
    double term = 1.0;
    double sum = 0.0;
    for (std::size_t j = 1; j <= r; ++j) {
      term *= x;
      sum += term;
    }
    key[i] = sum;
  }
  std::vector<std::size_t> perm(k);
  std::iota(perm.begin(), perm.end(), 0);
  std::stable_sort(perm.begin(), perm.end(), [&](std::size_t a, std::size_t b) { return key[a] > key[b]; });
  return perm;
}

View apply_reorder(const View& view, std::size_t r) {
  const std::size_t k = view.eigenvalues.size();
  const auto perm = reorder_permutation(view.eigenvalues, k, r);
  View out = view;
  for (std::size_t i = 0; i < k; ++i) {
    out.features.col(static_cast<Eigen::Index>(i)) = view.features.col(static_cast<Eigen::Index>(perm[i]));
    out.eigenvalues[i] = view.eigenvalues[perm[i]];
  }
  return out;
}

View mask_top_columns(const View& view, std::size_t count) {
  View out = view;
  if (count >= static_cast<std::size_t>(view.features.cols())) {
    out.features.setZero();
    return out;
  }
  std::vector<std::size_t> order(view.eigenvalues.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return view.eigenvalues[a] > view.eigenvalues[b]; });
  for (std::size_t i = 0; i < std::min(count, order.size()); ++i) {
    out.features.col(static_cast<Eigen::Index>(order[i])).setZero();
  }
  return out;
}

View apply_mask(const View& view, std::size_t max_masked, Seed seed) {
  if (max_masked > static_cast<std::size_t>(view.features.cols())) {
    throw InvalidArgument("apply_mask: M exceeds feature column count");
  }
  if (max_masked == 0) return view;
  Rng rng(seed);
  return mask_top_columns(view, uniform_int(rng, 0, max_masked));
}

ProcrustesResult procrustes_align(const Matrix& features, const Matrix& bridge) {
  if (features.rows() != bridge.rows()) throw InvalidArgument("procrustes_align: row count mismatch");
  if (!features.allFinite() || !bridge.allFinite()) throw NumericalError("procrustes_align: non-finite input");
  const Eigen::Index width = std::min(features.cols(), bridge.cols());
  const Matrix cross = features.leftCols(width).transpose() * bridge.leftCols(width);
  Eigen::JacobiSVD<Matrix> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
  ProcrustesResult out;
  out.rotation = svd.matrixU() * svd.matrixV().transpose();
  out.aligned = features;
  out.aligned.leftCols(width) = features.leftCols(width) * out.rotation;
  return out;
}

bool similarity_accept(const Vector& s1, const Vector& s2, double c, FilterMode mode) {
  if (s1.size() != s2.size()) throw InvalidArgument("similarity_accept: length mismatch");
  if (mode == FilterMode::off) return true;
  const double n1 = s1.norm();
  const double n2 = s2.norm();
  if (n1 == 0.0 || n2 == 0.0) return true;
  const double cosine = s1.dot(s2) / (n1 * n2);
  return mode == FilterMode::similar ? cosine > 1.0 - c : cosine <= 1.0 - c;
}

View align_to_bridge(const View& view, const GlobalEmbedding& global) {
  Matrix bridge(static_cast<Eigen::Index>(view.node_map.size()), global.matrix.cols());
  for (std::size_t i = 0; i < view.node_map.size(); ++i) {
    if (view.node_map[i] >= global.matrix.rows()) throw InvalidArgument("align_to_bridge: node outside global embedding");
    bridge.row(static_cast<Eigen::Index>(i)) = global.matrix.row(view.node_map[i]);
  }
  View out = view;
  out.features = procrustes_align(view.features, bridge).aligned;
  return out;
}

namespace {

const CropSpec* pick_crop(const std::vector<CropSpec>& specs, double u) {
  double cumulative = 0.0;
  for (const auto& spec : specs) {
    cumulative += spec.probability;
    if (u < cumulative) return &spec;
  }
  return nullptr;
}

}  // namespace

std::pair<View, View> generate_view_pair(const Graph& g, NodeId center, const AugmentationConfig& cfg,
                                         const GlobalEmbedding* global, Seed seed) {
  if (center >= g.num_nodes()) throw InvalidArgument("generate_view_pair: center out of range");
  Rng rng(seed);
  const Subgraph ego = ego_network(g, center, cfg.ego_radius);
  const auto local_center = static_cast<NodeId>(
      std::lower_bound(ego.node_map.begin(), ego.node_map.end(), center) - ego.node_map.begin());

  auto walk = [&] {
    auto sub = random_walk_subgraph(ego.graph, local_center, cfg.walk, rng());
    for (auto& id : sub.node_map) id = ego.node_map[id];
    return sub;
  };

  Subgraph first = walk();
  Subgraph second = walk();
  if (cfg.filter_mode != FilterMode::off && uniform01(rng) < cfg.p_filter) {
    if (global == nullptr) throw InvalidArgument("generate_view_pair: filtering needs a global embedding");
    for (std::size_t attempt = 1; attempt < cfg.t_max; ++attempt) {
      if (similarity_accept(view_summary(*global, first.node_map), view_summary(*global, second.node_map),
                            cfg.filter_c, cfg.filter_mode)) {
        break;
      }
      first = walk();
      second = walk();
    }
  }

  View views[2] = {make_view(std::move(first), cfg.embed_dim), make_view(std::move(second), cfg.embed_dim)};
  for (auto& view : views) {
    if (const CropSpec* spec = pick_crop(cfg.crop_specs, uniform01(rng))) {
      view = spectral_crop(view, *spec, cfg.laplacian_kind);
    }
  }
  if (uniform01(rng) < cfg.p_align) {
    if (global == nullptr) throw InvalidArgument("generate_view_pair: alignment needs a global embedding");
    for (auto& view : views) view = align_to_bridge(view, *global);
  }
  const std::size_t mask_max = cfg.resolved_mask_max();
  for (auto& view : views) {
    const double u = uniform01(rng);
    const Seed sub_seed = rng();
    if (u < cfg.p_mask) {
      view = apply_mask(view, mask_max, sub_seed);
    } else if (u < cfg.p_mask + cfg.p_reorder) {
      Rng local(sub_seed);
      view = apply_reorder(view, uniform_int(local, 1, cfg.r_max));
    }
  }
  return {std::move(views[0]), std::move(views[1])};
}

}  // namespace sgcl
