#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sgcl/augment.hpp"
#include "sgcl/common.hpp"
#include "sgcl/contrastive.hpp"
#include "sgcl/encoder.hpp"
#include "sgcl/eval.hpp"
#include "sgcl/graph.hpp"

namespace sgcl {

/// Malformed input file; the message carries the source and line number.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct LoadedGraph {
  Graph graph;
  /// original_ids[i] is the file id of node i. Identity when the ids were
  /// already 0-based and contiguous.
  std::vector<std::uint64_t> original_ids;
  bool densified = false;
  /// Label per node (-1 when unlabelled); present when a label file was given.
  std::optional<std::vector<int>> labels;
};

// Edge list: one "u v" pair per line, whitespace separated; blank lines and
// lines starting with '#' are skipped. Ids that are not exactly {0..max} are
// densified in ascending order.
LoadedGraph parse_edge_list(std::istream& in, const std::string& source = "<stream>");
/// "node_id label" lines keyed by original ids.
std::vector<int> parse_labels(std::istream& in, const LoadedGraph& graph, const std::string& source = "<stream>");
LoadedGraph load_dataset(const std::filesystem::path& edge_path,
                         const std::optional<std::filesystem::path>& label_path = std::nullopt);
/// "dense_id original_id" per line.
void write_remap(std::ostream& out, const LoadedGraph& graph);
void write_edge_list(std::ostream& out, const Graph& graph);

/// One "edge_path [label]" per line; relative paths resolve against the list's directory.
struct GraphList {
  std::vector<Graph> graphs;
  std::vector<int> labels;  // empty when no line carries a label
};
GraphList load_graph_list(const std::filesystem::path& list_path);

// SGE1: "SGE1", rows (u32 LE), cols (u32 LE), row-major f32 LE values.
void write_embedding(std::ostream& out, const Matrix& m);
Matrix read_embedding(std::istream& in);
void save_embedding(const std::filesystem::path& path, const Matrix& m);
Matrix load_embedding(const std::filesystem::path& path);

// SGP1 checkpoint: "SGP1", pos_dim, degree_buckets, hidden, layers (u32 LE),
// epsilon (f64 LE), value count (u64 LE), values (f64 LE).
void write_checkpoint(std::ostream& out, const GinParams& params);
GinParams read_checkpoint(std::istream& in);
void save_checkpoint(const std::filesystem::path& path, const GinParams& params);
GinParams load_checkpoint(const std::filesystem::path& path);

// Flat "key = value" text with [augment], [train], [eval] and [run] sections.
// '#' starts a comment line.
class ConfigFile {
 public:
  static ConfigFile parse(std::istream& in, const std::string& source = "<stream>");
  static ConfigFile load(const std::filesystem::path& path);

  /// "section.key=value"; keys before any section header belong to "run".
  void set(const std::string& assignment);
  void set(const std::string& section, const std::string& key, const std::string& value);
  std::optional<std::string> get(const std::string& section, const std::string& key) const;
  const std::map<std::string, std::map<std::string, std::string>>& sections() const { return sections_; }

 private:
  std::map<std::string, std::map<std::string, std::string>> sections_;
};

struct EvalConfig {
  std::size_t folds = 10;
  Metric metric = Metric::accuracy;
  double l2 = 1e-3;
  std::size_t ego_radius = 2;
  std::size_t hits_k = 20;
};

struct RunConfig {
  AugmentationConfig augment;
  TrainConfig train;
  EvalConfig eval;
  std::optional<Seed> seed;
  std::filesystem::path output_dir = ".";
};

/// Applies every key of `file` on top of `base`; unknown keys and bad values throw FormatError.
RunConfig resolve_config(const ConfigFile& file, RunConfig base = {});

}  // namespace sgcl
