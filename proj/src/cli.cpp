#include "sgcl/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>

#include "sgcl/augment.hpp"
#include "sgcl/contrastive.hpp"
#include "sgcl/eval.hpp"
#include "sgcl/global_embed.hpp"
#include "sgcl/io.hpp"
#include "sgcl/kernels.hpp"
#include "sgcl/sbm.hpp"
#include "sgcl/spectral.hpp"

namespace sgcl {

namespace {

using nlohmann::json;

namespace fs = std::filesystem;

struct CommonOptions {
  std::string config_path;
  std::vector<std::string> overrides;
  std::optional<Seed> seed;
  int workers = 0;
  std::string out_dir;
};

void add_common(CLI::App* cmd, CommonOptions& opts, bool stochastic) {
  cmd->add_option("--config", opts.config_path, "key = value config file")->check(CLI::ExistingFile);
  cmd->add_option("--set", opts.overrides, "override, e.g. train.steps=200 (repeatable)");
  if (stochastic) cmd->add_option("--seed", opts.seed, "RNG seed (required)")->required();
  cmd->add_option("--workers", opts.workers, "worker threads (default: all cores)")->check(CLI::NonNegativeNumber);
  cmd->add_option("--out", opts.out_dir, "output directory");
}

RunConfig load_run_config(const CommonOptions& opts) {
  ConfigFile file = opts.config_path.empty() ? ConfigFile{} : ConfigFile::load(opts.config_path);
  for (const auto& o : opts.overrides) file.set(o);
  RunConfig cfg = resolve_config(file);
  if (opts.seed) cfg.seed = opts.seed;
  if (!opts.out_dir.empty()) cfg.output_dir = opts.out_dir;
  if (opts.workers > 0) kernels::set_worker_count(opts.workers);
  return cfg;
}

void emit(std::ostream& out, const json& record) { out << record.dump() << '\n'; }

std::vector<int> read_int_lines(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  std::vector<int> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream fields(line);
    std::string token;
    if (!(fields >> token) || token.front() == '#') continue;
    std::size_t used = 0;
    int value = 0;
    try {
      value = std::stoi(token, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != token.size()) throw FormatError(path.string() + ":" + std::to_string(line_no) + ": expected an integer");
    out.push_back(value);
  }
  return out;
}

std::vector<double> read_real_lines(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  std::vector<double> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream fields(line);
    std::string token;
    if (!(fields >> token) || token.front() == '#') continue;
    std::size_t used = 0;
    double value = 0.0;
    try {
      value = std::stod(token, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != token.size()) throw FormatError(path.string() + ":" + std::to_string(line_no) + ": expected a number");
    out.push_back(value);
  }
  return out;
}

struct GraphInputs {
  std::string list;
  std::vector<std::string> files;
};

void add_graph_inputs(CLI::App* cmd, GraphInputs& in) {
  cmd->add_option("--graphs", in.list, "file listing one 'edge_path [label]' per line")->check(CLI::ExistingFile);
  cmd->add_option("--graph", in.files, "edge-list file (repeatable)")->check(CLI::ExistingFile);
}

GraphList collect_graphs(const GraphInputs& in) {
  GraphList out;
  if (!in.list.empty()) out = load_graph_list(in.list);
  for (const auto& f : in.files) out.graphs.push_back(load_dataset(f).graph);
  if (!in.files.empty() && !out.labels.empty()) out.labels.clear();
  if (out.graphs.empty()) throw InvalidArgument("no input graphs: pass --graphs or --graph");
  return out;
}

std::vector<NodeId> parse_centers(const std::string& text, std::size_t num_nodes) {
  std::vector<NodeId> out;
  std::istringstream in(text);
  std::string part;
  while (std::getline(in, part, ',')) {
    std::size_t used = 0;
    unsigned long v = 0;
    try {
      v = std::stoul(part, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != part.size() || v >= num_nodes) throw InvalidArgument("bad center '" + part + "'");
    out.push_back(static_cast<NodeId>(v));
  }
  return out;
}

int cmd_spectra(std::ostream& out, std::size_t closed_form_n, const std::string& graph_path, std::size_t k,
                const std::string& kind_name) {
  if (closed_form_n > 0) {
    const Graph g = path_graph(closed_form_n);
    const auto computed = full_spectrum(g, LaplacianKind::unnormalized);
    const auto L = laplacian(g, LaplacianKind::unnormalized);
    double eig_error = 0.0;
    double closed_residual = 0.0;
    for (std::size_t k = 0; k < closed_form_n; ++k) {
      const auto [value, vec] = path_closed_form(closed_form_n, k);
      eig_error = std::max(eig_error, std::abs(computed.eigenvalues(static_cast<Eigen::Index>(k)) - value));
      closed_residual = std::max(closed_residual, (L * vec - value * vec).norm());
    }
    emit(out, {{"command", "spectra"},
               {"check", "path_closed_form"},
               {"n", closed_form_n},
               {"max_eigenvalue_error", eig_error},
               {"max_residual", closed_residual},
               {"computed_residual", max_residual(L, computed)}});
  }
  if (!graph_path.empty()) {
    const auto loaded = load_dataset(graph_path);
    const LaplacianKind kind = kind_name == "unnormalized" ? LaplacianKind::unnormalized : LaplacianKind::normalized;
    const std::size_t count = std::min<std::size_t>(k, loaded.graph.num_nodes());
    const auto L = laplacian(loaded.graph, kind);
    const auto eigs = smallest_k_eigs(L, count, kind);
    std::vector<double> values(eigs.eigenvalues.data(), eigs.eigenvalues.data() + eigs.eigenvalues.size());
    emit(out, {{"command", "spectra"},
               {"graph", graph_path},
               {"kind", kind_name},
               {"nodes", loaded.graph.num_nodes()},
               {"edges", loaded.graph.num_edges()},
               {"components", count_components(loaded.graph)},
               {"eigenvalues", values},
               {"max_residual", max_residual(L, eigs)}});
  }
  return 0;
}

int cmd_augment(std::ostream& out, const CommonOptions& common, const std::string& graph_path,
                const std::string& centers_text) {
  const RunConfig cfg = load_run_config(common);
  const auto loaded = load_dataset(graph_path);
  const Graph& g = loaded.graph;
  const auto centers = parse_centers(centers_text, g.num_nodes());
  std::optional<GlobalEmbedding> global;
  if (cfg.augment.p_align > 0.0 || (cfg.augment.p_filter > 0.0 && cfg.augment.filter_mode != FilterMode::off)) {
    global = compute_global_embedding(g, cfg.augment.embed_dim);
  }
  fs::create_directories(cfg.output_dir);
  std::vector<ViewPair> pairs(centers.size());
  const auto count = static_cast<std::ptrdiff_t>(centers.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    const auto c = static_cast<std::size_t>(i);
    pairs[c] = generate_view_pair(g, centers[c], cfg.augment, global ? &*global : nullptr, mix_seed(*cfg.seed, c));
  }
  for (std::size_t i = 0; i < centers.size(); ++i) {
    const View* views[2] = {&pairs[i].first, &pairs[i].second};
    for (int side = 0; side < 2; ++side) {
      const std::string stem = "view_" + std::to_string(centers[i]) + (side == 0 ? "_a" : "_b");
      const fs::path base = fs::path(cfg.output_dir) / stem;
      std::ofstream edges(base.string() + ".edges");
      write_edge_list(edges, views[side]->graph);
      std::ofstream nodes(base.string() + ".nodes");
      for (NodeId v : views[side]->node_map) nodes << loaded.original_ids[v] << '\n';
      save_embedding(base.string() + ".sge", views[side]->features);
      emit(out, {{"command", "augment"},
                 {"center", loaded.original_ids[centers[i]]},
                 {"view", side == 0 ? "a" : "b"},
                 {"nodes", views[side]->graph.num_nodes()},
                 {"edges", views[side]->graph.num_edges()},
                 {"prefix", base.string()}});
    }
  }
  return 0;
}

int cmd_pretrain(std::ostream& out, const CommonOptions& common, const GraphInputs& inputs) {
  const RunConfig cfg = load_run_config(common);
  GraphList list = collect_graphs(inputs);
  const Corpus corpus = build_corpus(std::move(list.graphs), cfg.augment);
  fs::create_directories(cfg.output_dir);
  const fs::path metrics_path = fs::path(cfg.output_dir) / "metrics.jsonl";
  std::ofstream metrics(metrics_path);
  const auto log_every = std::max<std::size_t>(1, cfg.train.steps / 20);
  const auto result = pretrain(corpus, cfg.train, cfg.augment, *cfg.seed, [&](const StepRecord& r) {
    const json record = {{"command", "pretrain"}, {"step", r.step}, {"loss", r.loss}, {"lr", r.lr},
                         {"scheme", to_string(r.scheme)}};
    emit(metrics, record);
    if (r.step % log_every == 0 || r.step + 1 == cfg.train.steps) emit(out, record);
  });
  const fs::path checkpoint = fs::path(cfg.output_dir) / "checkpoint.sgp";
  save_checkpoint(checkpoint, result.params);
  emit(out, {{"command", "pretrain"},
             {"checkpoint", checkpoint.string()},
             {"metrics", metrics_path.string()},
             {"steps", result.records.size()},
             {"final_loss", result.records.empty() ? 0.0 : result.records.back().loss}});
  return 0;
}

int cmd_embed(std::ostream& out, const CommonOptions& common, const std::string& checkpoint_path,
              const GraphInputs& inputs, const std::string& node_graph, const std::string& node_labels,
              const std::string& output) {
  const RunConfig cfg = load_run_config(common);
  const GinParams params = load_checkpoint(checkpoint_path);
  Dataset dataset;
  if (!node_graph.empty()) {
    auto loaded = load_dataset(node_graph, node_labels.empty() ? std::nullopt : std::optional<fs::path>(node_labels));
    std::vector<NodeId> nodes;
    std::vector<int> labels;
    for (NodeId v = 0; v < loaded.graph.num_nodes(); ++v) {
      if (loaded.labels && (*loaded.labels)[v] < 0) continue;
      nodes.push_back(v);
      labels.push_back(loaded.labels ? (*loaded.labels)[v] : 0);
    }
    dataset = Dataset::node_classification(std::move(loaded.graph), nodes, std::move(labels));
    if (!loaded.labels) dataset.labels.clear();
  } else {
    GraphList list = collect_graphs(inputs);
    std::vector<int> labels = list.labels.empty() ? std::vector<int>(list.graphs.size(), 0) : list.labels;
    const bool labelled = !list.labels.empty();
    dataset = Dataset::graph_classification(std::move(list.graphs), std::move(labels));
    if (!labelled) dataset.labels.clear();
  }
  const bool has_labels = !dataset.labels.empty();
  if (!has_labels) dataset.labels.assign(dataset.instances.size(), 0);
  const Matrix reprs = extract_representations(params, dataset, {cfg.eval.ego_radius});
  fs::path target = output.empty() ? fs::path(cfg.output_dir) / "embedding.sge" : fs::path(output);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  save_embedding(target, reprs);
  json record = {{"command", "embed"}, {"rows", reprs.rows()}, {"cols", reprs.cols()}, {"output", target.string()}};
  if (has_labels) {
    const fs::path labels_path = target.string() + ".labels";
    std::ofstream labels(labels_path);
    for (int l : dataset.labels) labels << l << '\n';
    record["labels"] = labels_path.string();
  }
  emit(out, record);
  return 0;
}

int cmd_eval(std::ostream& out, const CommonOptions& common, const std::string& embedding,
             const std::string& labels_path, const std::string& embedding_b, const std::string& pairs_path) {
  const RunConfig cfg = load_run_config(common);
  const Matrix x = load_embedding(embedding);
  if (!labels_path.empty()) {
    const auto labels = read_int_lines(labels_path);
    if (labels.size() != static_cast<std::size_t>(x.rows())) {
      throw InvalidArgument("eval: label count does not match embedding rows");
    }
    const auto result = kfold_score(x, labels, cfg.eval.folds, cfg.eval.metric, *cfg.seed, {cfg.eval.l2});
    emit(out, {{"task", "classification"},
               {"metric", to_string(cfg.eval.metric)},
               {"mean", result.mean},
               {"std", result.std},
               {"folds", result.folds}});
  }
  if (!embedding_b.empty()) {
    const Matrix y = load_embedding(embedding_b);
    std::ifstream in(pairs_path);
    if (!in) throw FormatError("cannot open " + pairs_path);
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    std::size_t a = 0, b = 0;
    while (in >> a >> b) pairs.emplace_back(a, b);
    const double rate = hits_at_k(x, y, pairs, cfg.eval.hits_k);
    emit(out, {{"task", "similarity_search"},
               {"metric", "hits@10_top" + std::to_string(cfg.eval.hits_k)},
               {"mean", rate},
               {"std", 0.0},
               {"folds", json::array()}});
  }
  return 0;
}

int cmd_sbm_verify(std::ostream& out, const CommonOptions& common, double p, double q, double z, std::size_t n,
                   std::size_t centers) {
  const RunConfig cfg = load_run_config(common);
  const SbmSpec spec = SbmSpec::make(n, p, q, z);
  const auto block = block_eigenpairs(p, q, z);
  emit(out, {{"command", "sbm-verify"},
             {"check", "block_eigenpairs"},
             {"c_plus", block.c_plus},
             {"c_minus", block.c_minus},
             {"mu1", block.mu1},
             {"mu2", block.mu2}});
  const auto tp = line_transformed_params(p, q, z);
  emit(out, {{"command", "sbm-verify"},
             {"check", "transformed_params"},
             {"p_prime", tp.p},
             {"q_prime", tp.q},
             {"z_prime", tp.z},
             {"sign_pattern_ok", tp.p > 0.0 && tp.z < 0.0 && tp.p < tp.q}});
  FidelityOptions fo;
  fo.num_centers = centers;
  const auto fid = crop_fidelity_experiment(spec, fo, *cfg.seed);
  emit(out, {{"command", "sbm-verify"},
             {"check", "crop_fidelity"},
             {"epsilon", fid.epsilon},
             {"centers", fid.centers},
             {"crop_fraction", fid.crop_fraction()},
             {"ego_fraction", fid.ego_fraction()},
             {"crop_ties", fid.crop_ties},
             {"ego_ties", fid.ego_ties},
             {"mean_crop_size", fid.mean_crop_size}});
  const auto sample = sample_sbm(spec, mix_seed(*cfg.seed, 0xDCu));
  Matrix adjacency = Matrix::Zero(static_cast<Eigen::Index>(2 * n), static_cast<Eigen::Index>(2 * n));
  for (NodeId u = 0; u < sample.graph.num_nodes(); ++u)
    for (NodeId v : sample.graph.neighbors(u)) adjacency(u, v) = 1.0;
  const Matrix expectation = sbm_expectation(spec);
  for (std::size_t index : {1u, 2u}) {
    const auto dk = davis_kahan_check(expectation, adjacency, index);
    emit(out, {{"command", "sbm-verify"},
               {"check", "davis_kahan"},
               {"index", index},
               {"sin_2theta", dk.sin_2theta},
               {"perturbation_norm", dk.perturbation_norm},
               {"eigengap", dk.eigengap},
               {"classical_bound", dk.classical_bound},
               {"classical_satisfied", dk.classical_satisfied},
               {"printed_bound", dk.printed_bound},
               {"printed_satisfied", dk.printed_satisfied},
               {"norm_envelope", std::sqrt(18.0 * p * static_cast<double>(n))}});
  }
  return 0;
}

int cmd_quintiles(std::ostream& out, const CommonOptions& common, const GraphInputs& inputs,
                  const std::string& scores_path) {
  load_run_config(common);
  const GraphList list = collect_graphs(inputs);
  const auto scores = read_real_lines(scores_path);
  const auto report = quintile_report(list.graphs, scores);
  for (std::size_t q = 0; q < 5; ++q) {
    std::vector<double> l2;
    for (std::size_t idx : report.members[q]) l2.push_back(report.lambda2[idx]);
    emit(out, {{"command", "quintiles"},
               {"quintile", q + 1},
               {"graphs", report.members[q]},
               {"lambda2_min", l2.empty() ? 0.0 : *std::min_element(l2.begin(), l2.end())},
               {"lambda2_max", l2.empty() ? 0.0 : *std::max_element(l2.begin(), l2.end())},
               {"mean_score", report.means[q]}});
  }
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Spectral graph contrastive learning toolkit", "sgcl_cli"};
  app.require_subcommand(1);

  CommonOptions spectra_common, augment_common, pretrain_common, embed_common, eval_common, sbm_common,
      quintile_common;

  auto* spectra = app.add_subcommand("spectra", "Laplacian eigen diagnostics and closed-form checks");
  add_common(spectra, spectra_common, false);
  std::size_t closed_form_n = 0;
  std::string spectra_graph;
  std::size_t spectra_k = 8;
  std::string spectra_kind = "normalized";
  spectra->add_option("--path-closed-form", closed_form_n, "check P_n against the closed form")
      ->check(CLI::Range(std::size_t{2}, std::size_t{4096}));
  spectra->add_option("--graph", spectra_graph, "edge-list file")->check(CLI::ExistingFile);
  spectra->add_option("-k", spectra_k, "number of smallest eigenvalues");
  spectra->add_option("--kind", spectra_kind, "normalized or unnormalized")
      ->check(CLI::IsMember({"normalized", "unnormalized"}));

  auto* augment = app.add_subcommand("augment", "Preview augmented view pairs around given centers");
  add_common(augment, augment_common, true);
  std::string augment_graph, augment_centers;
  augment->add_option("--graph", augment_graph, "edge-list file")->required()->check(CLI::ExistingFile);
  augment->add_option("--centers", augment_centers, "comma-separated dense node ids")->required();

  auto* pre = app.add_subcommand("pretrain", "Contrastive pre-training; writes checkpoint.sgp and metrics.jsonl");
  add_common(pre, pretrain_common, true);
  GraphInputs pretrain_inputs;
  add_graph_inputs(pre, pretrain_inputs);

  auto* embed = app.add_subcommand("embed", "Frozen-encoder representations to an SGE1 file");
  add_common(embed, embed_common, false);
  std::string checkpoint, node_graph, node_labels, embed_output;
  GraphInputs embed_inputs;
  embed->add_option("--checkpoint", checkpoint, "SGP1 checkpoint")->required()->check(CLI::ExistingFile);
  add_graph_inputs(embed, embed_inputs);
  embed->add_option("--node-graph", node_graph, "embed the ego network of every node of this graph")
      ->check(CLI::ExistingFile);
  embed->add_option("--node-labels", node_labels, "'node_id label' file; restricts to labelled nodes")
      ->check(CLI::ExistingFile);
  embed->add_option("--output", embed_output, "SGE1 output path");

  auto* eval = app.add_subcommand("eval", "k-fold logistic regression and HITS@k on SGE1 representations");
  add_common(eval, eval_common, true);
  std::string eval_embedding, eval_labels, eval_embedding_b, eval_pairs;
  eval->add_option("--embedding", eval_embedding, "SGE1 file")->required()->check(CLI::ExistingFile);
  auto* labels_opt = eval->add_option("--labels", eval_labels, "one integer label per row")->check(CLI::ExistingFile);
  auto* b_opt = eval->add_option("--embedding-b", eval_embedding_b, "second SGE1 file for HITS@k")
                    ->check(CLI::ExistingFile);
  auto* pairs_opt = eval->add_option("--pairs", eval_pairs, "'row_a row_b' ground-truth pairs")
                        ->check(CLI::ExistingFile);
  b_opt->needs(pairs_opt);
  pairs_opt->needs(b_opt);

  auto* sbm = app.add_subcommand("sbm-verify", "SBM block theory, crop fidelity and Davis-Kahan checks");
  add_common(sbm, sbm_common, true);
  double p = 0.5, q = 0.3, z = 0.1;
  std::size_t n = 200, centers = 50;
  sbm->add_option("--p", p, "within-block probability of block 0");
  sbm->add_option("--q", q, "within-block probability of block 1");
  sbm->add_option("--z", z, "cross-block probability");
  sbm->add_option("--n", n, "nodes per block")->check(CLI::PositiveNumber);
  sbm->add_option("--centers", centers, "crop centers")->check(CLI::PositiveNumber);

  auto* quint = app.add_subcommand("quintiles", "Scores grouped by lambda_2 quintile");
  add_common(quint, quintile_common, false);
  GraphInputs quintile_inputs;
  std::string scores_path;
  add_graph_inputs(quint, quintile_inputs);
  quint->add_option("--scores", scores_path, "one score per graph")->required()->check(CLI::ExistingFile);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return e.get_exit_code() == 0 ? 2 : e.get_exit_code();
  }

  try {
    if (spectra->parsed()) {
      load_run_config(spectra_common);
      if (closed_form_n == 0 && spectra_graph.empty()) {
        err << "spectra: pass --path-closed-form N or --graph FILE\n";
        return 2;
      }
      return cmd_spectra(out, closed_form_n, spectra_graph, spectra_k, spectra_kind);
    }
    if (augment->parsed()) return cmd_augment(out, augment_common, augment_graph, augment_centers);
    if (pre->parsed()) return cmd_pretrain(out, pretrain_common, pretrain_inputs);
    if (embed->parsed()) {
      return cmd_embed(out, embed_common, checkpoint, embed_inputs, node_graph, node_labels, embed_output);
    }
    if (eval->parsed()) {
      if (labels_opt->count() == 0 && b_opt->count() == 0) {
        err << "eval: pass --labels and/or --embedding-b with --pairs\n";
        return 2;
      }
      return cmd_eval(out, eval_common, eval_embedding, eval_labels, eval_embedding_b, eval_pairs);
    }
    if (sbm->parsed()) return cmd_sbm_verify(out, sbm_common, p, q, z, n, centers);
    if (quint->parsed()) return cmd_quintiles(out, quintile_common, quintile_inputs, scores_path);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

int run_cli(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run_cli(args, std::cout, std::cerr);
}

}  // namespace sgcl
