#include "sgcl/io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <functional>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_map>

namespace sgcl {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

bool skippable(const std::string& line) {
  const std::string t = trim(line);
  return t.empty() || t.front() == '#';
}

std::string where(const std::string& source, std::size_t line) {
  return source + ":" + std::to_string(line) + ": ";
}

template <typename T>
bool parse_number(const std::string& text, T& out) {
  const char* first = text.data();
  const char* last = first + text.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write " + path.string());
  return out;
}

void put_u32(std::ostream& out, std::uint32_t v) {
  const unsigned char bytes[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                                  static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  out.write(reinterpret_cast<const char*>(bytes), 4);
}

void put_u64(std::ostream& out, std::uint64_t v) {
  put_u32(out, static_cast<std::uint32_t>(v));
  put_u32(out, static_cast<std::uint32_t>(v >> 32));
}

void read_exact(std::istream& in, void* dst, std::size_t n, const char* what) {
  in.read(static_cast<char*>(dst), static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(in.gcount()) != n) throw FormatError(std::string(what) + ": truncated payload");
}

std::uint32_t get_u32(std::istream& in, const char* what) {
  unsigned char b[4];
  read_exact(in, b, 4, what);
  return static_cast<std::uint32_t>(b[0]) | static_cast<std::uint32_t>(b[1]) << 8 |
         static_cast<std::uint32_t>(b[2]) << 16 | static_cast<std::uint32_t>(b[3]) << 24;
}

std::uint64_t get_u64(std::istream& in, const char* what) {
  const std::uint64_t lo = get_u32(in, what);
  const std::uint64_t hi = get_u32(in, what);
  return lo | hi << 32;
}

void put_f64(std::ostream& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }
double get_f64(std::istream& in, const char* what) { return std::bit_cast<double>(get_u64(in, what)); }

void expect_magic(std::istream& in, const char* magic, const char* what) {
  char buf[4];
  in.read(buf, 4);
  if (in.gcount() != 4 || std::memcmp(buf, magic, 4) != 0) throw FormatError(std::string(what) + ": bad magic");
}

}  // namespace

LoadedGraph parse_edge_list(std::istream& in, const std::string& source) {
  std::vector<std::pair<std::uint64_t, std::uint64_t>> raw;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (skippable(line)) continue;
    std::istringstream fields(line);
    std::string a, b, extra;
    if (!(fields >> a >> b) || (fields >> extra)) {
      throw FormatError(where(source, line_no) + "expected two node ids");
    }
    std::uint64_t u = 0, v = 0;
    if (!parse_number(a, u) || !parse_number(b, v)) {
      throw FormatError(where(source, line_no) + "node ids must be non-negative integers");
    }
    raw.emplace_back(u, v);
  }

  std::vector<std::uint64_t> ids;
  for (const auto& [u, v] : raw) {
    ids.push_back(u);
    ids.push_back(v);
  }
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  if (ids.size() > std::numeric_limits<NodeId>::max()) throw FormatError(source + ": too many nodes");

  LoadedGraph out;
  out.original_ids = ids;
  out.densified = !ids.empty() && ids.back() + 1 != ids.size();
  std::unordered_map<std::uint64_t, NodeId> dense;
  for (std::size_t i = 0; i < ids.size(); ++i) dense.emplace(ids[i], static_cast<NodeId>(i));
  std::vector<EdgePair> pairs;
  bool loops = false;
  for (const auto& [u, v] : raw) {
    pairs.emplace_back(dense.at(u), dense.at(v));
    loops = loops || u == v;
  }
  out.graph = Graph::from_edge_pairs(pairs, ids.size(), loops);
  return out;
}

std::vector<int> parse_labels(std::istream& in, const LoadedGraph& graph, const std::string& source) {
  std::unordered_map<std::uint64_t, NodeId> dense;
  for (std::size_t i = 0; i < graph.original_ids.size(); ++i) dense.emplace(graph.original_ids[i], static_cast<NodeId>(i));
  std::vector<int> labels(graph.graph.num_nodes(), -1);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (skippable(line)) continue;
    std::istringstream fields(line);
    std::string a, b, extra;
    if (!(fields >> a >> b) || (fields >> extra)) throw FormatError(where(source, line_no) + "expected node_id label");
    std::uint64_t id = 0;
    int label = 0;
    if (!parse_number(a, id) || !parse_number(b, label) || label < 0) {
      throw FormatError(where(source, line_no) + "expected a node id and a non-negative integer label");
    }
    const auto it = dense.find(id);
    if (it == dense.end()) throw FormatError(where(source, line_no) + "label for unknown node " + a);
    labels[it->second] = label;
  }
  return labels;
}

LoadedGraph load_dataset(const std::filesystem::path& edge_path, const std::optional<std::filesystem::path>& label_path) {
  auto edges = open_input(edge_path);
  LoadedGraph out = parse_edge_list(edges, edge_path.string());
  if (label_path) {
    auto labels = open_input(*label_path);
    out.labels = parse_labels(labels, out, label_path->string());
  }
  return out;
}

void write_remap(std::ostream& out, const LoadedGraph& graph) {
  for (std::size_t i = 0; i < graph.original_ids.size(); ++i) out << i << ' ' << graph.original_ids[i] << '\n';
}

void write_edge_list(std::ostream& out, const Graph& graph) {
  for (const auto& [u, v] : graph.edge_list()) out << u << ' ' << v << '\n';
}

GraphList load_graph_list(const std::filesystem::path& list_path) {
  auto in = open_input(list_path);
  const auto base = list_path.parent_path();
  GraphList out;
  std::size_t labelled = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (skippable(line)) continue;
    std::istringstream fields(line);
    std::string path, label_text, extra;
    fields >> path;
    int label = -1;
    if (fields >> label_text) {
      if (!parse_number(label_text, label) || label < 0 || (fields >> extra)) {
        throw FormatError(where(list_path.string(), line_no) + "expected edge_path [label]");
      }
      ++labelled;
    }
    std::filesystem::path p(path);
    if (p.is_relative()) p = base / p;
    out.graphs.push_back(load_dataset(p).graph);
    out.labels.push_back(label);
  }
  if (labelled == 0) {
    out.labels.clear();
  } else if (labelled != out.graphs.size()) {
    throw FormatError(list_path.string() + ": either every graph or none carries a label");
  }
  return out;
}

void write_embedding(std::ostream& out, const Matrix& m) {
  if (!m.allFinite()) throw InvalidArgument("write_embedding: entries must be finite");
  if (m.rows() > std::numeric_limits<std::uint32_t>::max() || m.cols() > std::numeric_limits<std::uint32_t>::max()) {
    throw InvalidArgument("write_embedding: matrix too large");
  }
  out.write("SGE1", 4);
  put_u32(out, static_cast<std::uint32_t>(m.rows()));
  put_u32(out, static_cast<std::uint32_t>(m.cols()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(m(i, j))));
}

Matrix read_embedding(std::istream& in) {
  expect_magic(in, "SGE1", "SGE1");
  const std::uint32_t rows = get_u32(in, "SGE1");
  const std::uint32_t cols = get_u32(in, "SGE1");
  Matrix m(rows, cols);
  for (std::uint32_t i = 0; i < rows; ++i)
    for (std::uint32_t j = 0; j < cols; ++j) m(i, j) = std::bit_cast<float>(get_u32(in, "SGE1"));
  return m;
}

void save_embedding(const std::filesystem::path& path, const Matrix& m) {
  auto out = open_output(path);
  write_embedding(out, m);
}

Matrix load_embedding(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_embedding(in);
}

void write_checkpoint(std::ostream& out, const GinParams& params) {
  const auto& d = params.dims();
  out.write("SGP1", 4);
  put_u32(out, static_cast<std::uint32_t>(d.pos_dim));
  put_u32(out, static_cast<std::uint32_t>(d.degree_buckets));
  put_u32(out, static_cast<std::uint32_t>(d.hidden));
  put_u32(out, static_cast<std::uint32_t>(d.layers));
  put_f64(out, d.epsilon);
  put_u64(out, params.size());
  for (double v : params.values()) put_f64(out, v);
}

GinParams read_checkpoint(std::istream& in) {
  expect_magic(in, "SGP1", "SGP1");
  EncoderDims d;
  d.pos_dim = get_u32(in, "SGP1");
  d.degree_buckets = get_u32(in, "SGP1");
  d.hidden = get_u32(in, "SGP1");
  d.layers = get_u32(in, "SGP1");
  d.epsilon = get_f64(in, "SGP1");
  const std::uint64_t count = get_u64(in, "SGP1");
  GinParams params(d);
  if (count != params.size()) throw FormatError("SGP1: value count does not match the stored dimensions");
  for (double& v : params.values()) v = get_f64(in, "SGP1");
  return params;
}

void save_checkpoint(const std::filesystem::path& path, const GinParams& params) {
  auto out = open_output(path);
  write_checkpoint(out, params);
}

GinParams load_checkpoint(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_checkpoint(in);
}

ConfigFile ConfigFile::parse(std::istream& in, const std::string& source) {
  ConfigFile cfg;
  std::string section = "run";
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (skippable(line)) continue;
    const std::string t = trim(line);
    if (t.front() == '[') {
      if (t.back() != ']' || t.size() < 3) throw FormatError(where(source, line_no) + "malformed section header");
      section = trim(t.substr(1, t.size() - 2));
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw FormatError(where(source, line_no) + "expected key = value");
    const std::string key = trim(t.substr(0, eq));
    if (key.empty()) throw FormatError(where(source, line_no) + "empty key");
    cfg.set(section, key, trim(t.substr(eq + 1)));
  }
  return cfg;
}

ConfigFile ConfigFile::load(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse(in, path.string());
}

void ConfigFile::set(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw FormatError("override '" + assignment + "': expected section.key=value");
  const std::string lhs = trim(assignment.substr(0, eq));
  const auto dot = lhs.find('.');
  const std::string section = dot == std::string::npos ? "run" : lhs.substr(0, dot);
  const std::string key = dot == std::string::npos ? lhs : lhs.substr(dot + 1);
  if (key.empty()) throw FormatError("override '" + assignment + "': empty key");
  set(section, key, trim(assignment.substr(eq + 1)));
}

void ConfigFile::set(const std::string& section, const std::string& key, const std::string& value) {
  sections_[section][key] = value;
}

std::optional<std::string> ConfigFile::get(const std::string& section, const std::string& key) const {
  const auto s = sections_.find(section);
  if (s == sections_.end()) return std::nullopt;
  const auto k = s->second.find(key);
  if (k == s->second.end()) return std::nullopt;
  return k->second;
}

namespace {

using Setter = std::function<void(const std::string&)>;

std::string bad_value(const std::string& section, const std::string& key, const std::string& value) {
  return "config " + section + "." + key + ": invalid value '" + value + "'";
}

struct Binder {
  std::string section;
  std::map<std::string, Setter> setters;

  void real(const std::string& key, double& target) {
    setters[key] = [this, key, &target](const std::string& v) {
      if (!parse_number(v, target)) throw FormatError(bad_value(section, key, v));
    };
  }
  void count(const std::string& key, std::size_t& target) {
    setters[key] = [this, key, &target](const std::string& v) {
      if (!parse_number(v, target)) throw FormatError(bad_value(section, key, v));
    };
  }
  template <typename E>
  void choice(const std::string& key, E& target, std::map<std::string, E> options) {
    setters[key] = [this, key, &target, options](const std::string& v) {
      const auto it = options.find(v);
      if (it == options.end()) throw FormatError(bad_value(section, key, v));
      target = it->second;
    };
  }

  void apply(const std::map<std::string, std::string>& values) const {
    for (const auto& [key, value] : values) {
      const auto it = setters.find(key);
      if (it == setters.end()) throw FormatError("config: unknown key " + section + "." + key);
      it->second(value);
    }
  }
};

// "x0,x1,y0,y1@prob" entries separated by ';'.
std::vector<CropSpec> parse_crop_specs(const std::string& text) {
  std::vector<CropSpec> out;
  std::istringstream entries(text);
  std::string entry;
  while (std::getline(entries, entry, ';')) {
    entry = trim(entry);
    if (entry.empty()) continue;
    const auto at = entry.find('@');
    if (at == std::string::npos) throw FormatError("config augment.crop: expected x0,x1,y0,y1@prob");
    CropSpec spec;
    std::istringstream q(entry.substr(0, at));
    std::string part;
    std::size_t i = 0;
    while (std::getline(q, part, ',')) {
      if (i >= 4 || !parse_number(trim(part), spec.quantiles[i])) {
        throw FormatError("config augment.crop: bad quantile list '" + entry + "'");
      }
      ++i;
    }
    if (i != 4 || !parse_number(trim(entry.substr(at + 1)), spec.probability)) {
      throw FormatError("config augment.crop: bad entry '" + entry + "'");
    }
    out.push_back(spec);
  }
  return out;
}

}  // namespace

RunConfig resolve_config(const ConfigFile& file, RunConfig base) {
  for (const auto& [section, _] : file.sections()) {
    if (section != "augment" && section != "train" && section != "eval" && section != "run") {
      throw FormatError("config: unknown section [" + section + "]");
    }
  }

  auto train_values = file.sections().count("train") ? file.sections().at("train")
                                                      : std::map<std::string, std::string>{};
  if (const auto it = train_values.find("preset"); it != train_values.end()) {
    const std::map<std::string, TrainConfig (*)()> presets = {{"full_e2e", &TrainConfig::full_e2e},
                                                               {"full_moco", &TrainConfig::full_moco},
                                                               {"desk_e2e", &TrainConfig::desk_e2e},
                                                               {"desk_moco", &TrainConfig::desk_moco}};
    const auto p = presets.find(it->second);
    if (p == presets.end()) throw FormatError(bad_value("train", "preset", it->second));
    base.train = p->second();
    train_values.erase(it);
  }

  auto& a = base.augment;
  Binder aug{"augment", {}};
  aug.real("p_filter", a.p_filter);
  aug.real("p_align", a.p_align);
  aug.real("p_mask", a.p_mask);
  aug.real("p_reorder", a.p_reorder);
  aug.choice("filter_mode", a.filter_mode,
             {{"similar", FilterMode::similar}, {"diverse", FilterMode::diverse}, {"off", FilterMode::off}});
  aug.real("filter_c", a.filter_c);
  aug.count("t_max", a.t_max);
  aug.count("r_max", a.r_max);
  aug.setters["mask_max"] = [&a](const std::string& v) {
    std::size_t m = 0;
    if (!parse_number(v, m)) throw FormatError(bad_value("augment", "mask_max", v));
    a.mask_max = m;
  };
  aug.setters["crop"] = [&a](const std::string& v) { a.crop_specs = parse_crop_specs(v); };
  aug.count("walk_steps", a.walk.steps);
  aug.real("return_prob", a.walk.return_prob);
  aug.count("max_nodes", a.walk.max_nodes);
  aug.count("ego_radius", a.ego_radius);
  aug.count("embed_dim", a.embed_dim);
  aug.choice("laplacian", a.laplacian_kind,
             {{"normalized", LaplacianKind::normalized}, {"unnormalized", LaplacianKind::unnormalized}});

  auto& t = base.train;
  Binder train{"train", {}};
  train.choice("scheme", t.scheme, {{"e2e", TrainScheme::e2e}, {"moco", TrainScheme::moco}});
  train.count("steps", t.steps);
  train.real("lr", t.lr);
  train.real("beta1", t.beta1);
  train.real("beta2", t.beta2);
  train.real("adam_eps", t.adam_eps);
  train.real("warmup_fraction", t.warmup_fraction);
  train.real("decay_fraction", t.decay_fraction);
  train.count("batch_size", t.batch_size);
  train.real("temperature", t.temperature);
  train.count("queue_size", t.queue_size);
  train.real("momentum", t.momentum);
  train.real("dropout", t.dropout);
  train.choice("objective", t.objective,
               {{"standard", NceObjective::standard}, {"as_printed", NceObjective::as_printed}});
  train.count("pos_dim", t.encoder.pos_dim);
  train.count("degree_buckets", t.encoder.degree_buckets);
  train.count("hidden", t.encoder.hidden);
  train.count("layers", t.encoder.layers);
  train.real("epsilon", t.encoder.epsilon);

  auto& e = base.eval;
  Binder eval{"eval", {}};
  eval.count("folds", e.folds);
  eval.choice("metric", e.metric, {{"accuracy", Metric::accuracy}, {"macro_f1", Metric::macro_f1}});
  eval.real("l2", e.l2);
  eval.count("ego_radius", e.ego_radius);
  eval.count("hits_k", e.hits_k);

  Binder run{"run", {}};
  run.setters["seed"] = [&base](const std::string& v) {
    Seed s = 0;
    if (!parse_number(v, s)) throw FormatError(bad_value("run", "seed", v));
    base.seed = s;
  };
  run.setters["output_dir"] = [&base](const std::string& v) { base.output_dir = v; };

  if (file.sections().count("augment")) aug.apply(file.sections().at("augment"));
  train.apply(train_values);
  if (file.sections().count("eval")) eval.apply(file.sections().at("eval"));
  if (file.sections().count("run")) run.apply(file.sections().at("run"));

  try {
    base.augment.validate();
    base.train.validate();
  } catch (const InvalidArgument& err) {
    throw FormatError(std::string("config: ") + err.what());
  }
  return base;
}

}  // namespace sgcl
