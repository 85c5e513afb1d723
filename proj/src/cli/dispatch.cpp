// Copyright 2026 The DenoisedLP Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "dlp/cli/dispatch.hpp"

#include <deque>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "dlp/common/error.hpp"
#include "dlp/harness/config.hpp"
#include "dlp/harness/experiment.hpp"
#include "dlp/harness/gradcheck.hpp"
#include "dlp/harness/synthetic.hpp"
#include "dlp/kgstore/sampling.hpp"
#include "dlp/kgstore/smoothing.hpp"
#include "dlp/kgstore/tsv.hpp"

namespace dlp::cli {

namespace {

namespace fs = std::filesystem;
using harness::RunConfig;

/// Options shared by every command plus flag-to-config-key bindings.
struct Command {
  CLI::App* app = nullptr;
  std::string config_file;
  std::vector<std::string> sets;
  std::string out_dir = "dlp_out";
  std::size_t jobs = 1;
  std::deque<std::pair<std::string, std::string>> bound;  // config key, flag value
  std::vector<std::pair<CLI::Option*, std::size_t>> bindings;

  explicit Command(CLI::App* a) : app(a) {
    app->add_option("--config", config_file, "key = value configuration file");
    app->add_option("--set", sets, "override one configuration key (key=value)");
  }

  void bind(const std::string& flag, const std::string& key, const std::string& help) {
    bound.emplace_back(key, std::string());
    bindings.emplace_back(app->add_option(flag, bound.back().second, help), bound.size() - 1);
  }

  void output_options() { app->add_option("--out-dir", out_dir, "directory for checkpoints and reports"); }
  void jobs_option() { app->add_option("--jobs", jobs, "concurrent folds / sweep cells")->check(CLI::PositiveNumber); }

  /// Defaults, then the file, then flags.
  RunConfig resolve() const {
    RunConfig rc;
    if (!config_file.empty()) rc.merge_file(config_file);
    for (const auto& [opt, index] : bindings)
      if (opt->count() > 0) rc.set(bound[index].first, bound[index].second);
    for (const auto& s : sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + s + "'");
      rc.set(kg::trim(std::string_view(s).substr(0, eq)), kg::trim(std::string_view(s).substr(eq + 1)));
    }
    return rc;
  }
};

struct DataFlags {
  harness::DatasetPaths paths;

  void add(CLI::App* app, bool required) {
    auto* t = app->add_option("--triples", paths.triples, "triples.tsv");
    auto* l = app->add_option("--links", paths.links, "links.tsv");
    if (required) {
      t->required();
      l->required();
    }
    app->add_option("--types", paths.types, "types.tsv");
    app->add_option("--smoothing", paths.smoothing, "smoothing.tsv");
  }
};

void add_model_flags(Command& c) {
  c.bind("--seed", "seed", "random seed");
  c.bind("--task-mode", "task_mode", "binary | multi_class | multi_label");
  c.bind("--precision", "precision", "f32 | f64");
  c.bind("--epochs", "train.epochs", "training epochs");
  c.bind("--batch", "train.batch", "links per batch");
  c.bind("--lr", "train.lr", "learning rate");
  c.bind("--patience", "train.patience", "early-stopping patience");
  c.bind("--target-loss", "train.target_loss", "stop below this training cross-entropy");
  c.bind("--folds", "cv.folds", "cross-validation folds");
  c.bind("--max-folds", "cv.max_folds", "run only the first N folds");
  c.bind("--estimator", "estimator.kind", "attention | mlp | weighted_cosine | cosine");
  c.bind("--hidden", "hidden_dim", "hidden width");
  c.bind("--hops", "subgraph.hops", "local subgraph hops");
  c.bind("--max-nodes", "subgraph.max_nodes", "local subgraph node cap");
  c.bind("--metapaths", "metapath.file", "metapaths.tsv");
  c.bind("--table", "pretrain.table", "pretrained embedding checkpoint");
  c.bind("--dim", "pretrain.dim", "pretraining dimension");
  c.bind("--pretrain-epochs", "pretrain.epochs", "pretraining epochs");
  c.bind("--negatives-mode", "negatives.mode", "none | balanced_per_head | counterpart_per_positive");
}

void apply_variant(RunConfig& rc, const std::string& variant) {
  if (variant.empty()) return;
  const auto a = harness::parse_variant(variant);
  rc.set("ablate.srl", a.srl ? "true" : "false");
  rc.set("ablate.ssp", a.ssp ? "true" : "false");
  rc.set("ablate.mi", a.mi ? "true" : "false");
}

std::ofstream open_out(const fs::path& path) {
  fs::create_directories(path.parent_path().empty() ? fs::path(".") : path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

void write_config(const fs::path& path, const RunConfig& rc) {
  auto out = open_out(path);
  for (const auto& [k, v] : rc.effective()) out << k << " = " << v << '\n';
}

void print_summary(std::ostream& out, const harness::MetricsReport& r) {
  out << "variant " << r.variant << " folds " << r.folds.size() << " auc_roc " << r.auc_roc.mean << " +- "
      << r.auc_roc.std << " auc_pr " << r.auc_pr.mean << " micro_f1 " << r.micro_f1.mean << " micro_recall "
      << r.micro_recall.mean << '\n';
}

harness::Dataset synthetic_dataset(const RunConfig& rc) {
  harness::SyntheticConfig sc;
  sc.seed = rc.get_u64("seed");
  sc.mode = kg::parse_task_mode(rc.get("task_mode"));
  auto bench = harness::generate_synthetic(sc);
  return {std::move(bench.graph), std::move(bench.smoothing), std::move(bench.links)};
}

int run_pretrain(const Command& c, const std::string& triples, const std::string& types, const std::string& out_path,
                 std::ostream& out) {
  const auto rc = c.resolve();
  const auto cfg = harness::train_config(rc);
  const auto graph = kg::load_graph(triples, types);
  auto pc = cfg.pretrain;
  pc.seed = rc.get_u64("seed");
  const auto result = embed::pretrain(graph, pc);
  const fs::path path = out_path.empty() ? fs::path(c.out_dir) / "table.ckpt" : fs::path(out_path);
  ad::Checkpoint ck;
  result.table.store(ck);
  fs::create_directories(path.parent_path().empty() ? fs::path(".") : path.parent_path());
  ck.save(path.string());
  {
    auto curve = open_out(fs::path(c.out_dir) / "pretrain_loss.csv");
    curve << "epoch,loss\n";
    for (std::size_t e = 0; e < result.loss_history.size(); ++e) curve << e + 1 << ',' << result.loss_history[e] << '\n';
  }
  out << "entities " << graph.entity_count() << " relations " << graph.relation_count() << " triples "
      << graph.triple_count() << " final_loss "
      << (result.loss_history.empty() ? 0.0 : result.loss_history.back()) << " table " << path.string() << '\n';
  return kExitOk;
}

int run_train(const Command& c, const DataFlags& d, const std::string& variant, std::ostream& out) {
  auto rc = c.resolve();
  apply_variant(rc, variant);
  auto cfg = harness::train_config(rc);
  cfg.jobs = c.jobs;
  const auto data = harness::load_dataset(d.paths, rc);
  const fs::path dir(c.out_dir);
  fs::create_directories(dir);
  write_config(dir / "config.txt", rc);
  try {
    const auto outcome = harness::train(data, cfg);
    for (std::size_t f = 0; f < outcome.checkpoints.size(); ++f)
      outcome.checkpoints[f].save((dir / ("fold_" + std::to_string(f) + ".ckpt")).string());
    {
      auto jsonl = open_out(dir / "report.jsonl");
      harness::write_report_jsonl(jsonl, outcome.report);
    }
    {
      auto csv = open_out(dir / "summary.csv");
      harness::write_summary_csv(csv, outcome.report);
    }
    print_summary(out, outcome.report);
  } catch (const harness::TrainingAborted& e) {
    e.last_good().save((dir / "last_good.ckpt").string());
    throw;
  }
  return kExitOk;
}

int run_eval(const Command& c, const DataFlags& d, const std::string& checkpoint, std::ostream& out) {
  const auto rc = c.resolve();
  const auto cfg = harness::train_config(rc);
  const auto data = harness::load_dataset(d.paths, rc);
  const auto ck = ad::Checkpoint::load(checkpoint);
  const auto report = harness::evaluate(ck, data, cfg);
  const fs::path dir(c.out_dir);
  {
    auto jsonl = open_out(dir / "eval_report.jsonl");
    harness::write_report_jsonl(jsonl, report);
  }
  {
    auto csv = open_out(dir / "eval_summary.csv");
    harness::write_summary_csv(csv, report);
  }
  print_summary(out, report);
  return kExitOk;
}

int run_noise_eval(const Command& c, const DataFlags& d, std::ostream& out) {
  const auto rc = c.resolve();
  auto cfg = harness::train_config(rc);
  cfg.jobs = c.jobs;
  if (d.paths.triples.empty() != d.paths.links.empty())
    throw ConfigError("--triples and --links go together; omit both to use the planted benchmark");
  const auto data = d.paths.triples.empty() ? synthetic_dataset(rc) : harness::load_dataset(d.paths, rc);
  std::vector<std::uint64_t> seeds;
  for (const auto& s : rc.get_list("noise.seeds")) {
    RunConfig one;
    one.set("seed", s);
    seeds.push_back(one.get_u64("seed"));
  }
  const auto kind = harness::parse_noise_kind(rc.get("noise.kind"));
  const auto report = harness::noise_sweep(data, rc.get_doubles("noise.ratios"), kind, rc.get_list("noise.variants"),
                                           seeds, cfg);
  const fs::path dir(c.out_dir);
  fs::create_directories(dir);
  write_config(dir / "config.txt", rc);
  {
    auto jsonl = open_out(dir / "noise_report.jsonl");
    for (const auto& cell : report.cells) harness::write_report_jsonl(jsonl, cell);
  }
  {
    auto csv = open_out(dir / "noise_summary.csv");
    harness::write_summary_csv(csv, report);
  }
  harness::write_summary_csv(out, report);
  return kExitOk;
}

int run_extract(const Command& c, const DataFlags& d, const std::string& head, const std::string& tail,
                std::ostream& out) {
  const auto rc = c.resolve();
  const auto cfg = harness::train_config(rc);
  const auto graph = kg::load_graph(d.paths.triples, d.paths.types);
  kg::SmoothingMap map;
  map.unmapped = kg::UnmappedPolicy::keep;
  if (!d.paths.smoothing.empty()) map = kg::load_smoothing(d.paths.smoothing, kg::UnmappedPolicy::keep);
  const auto smoothed = kg::smooth_relations(graph, map);
  const auto u = graph.entities().at(head);
  const auto v = graph.entities().at(tail);
  const auto paths = cfg.metapath_file.empty()
                         ? sub::default_metapaths(smoothed, graph.type_name(u), graph.type_name(v), cfg.metapath_max_len)
                         : sub::load_metapaths(cfg.metapath_file);
  const auto local = sub::extract_local(graph, u, v, cfg.local, cfg.seed);
  const auto semantic = sub::extract_semantic(smoothed, u, v, paths);

  using nlohmann::json;
  json j;
  j["head"] = head;
  j["tail"] = tail;
  json lnodes = json::array(), ledges = json::array();
  for (auto e : local.nodes) lnodes.push_back(graph.entities().name(e));
  for (auto [a, b] : local.observed_edges) ledges.push_back({a, b});
  j["local"] = {{"nodes", lnodes}, {"edges", ledges}, {"candidate_pairs", local.candidate_pairs.size()}};
  json snodes = json::array(), stypes = json::array(), sedges = json::array();
  for (std::size_t i = 0; i < semantic.nodes.size(); ++i) {
    snodes.push_back(smoothed.entities().name(semantic.nodes[i]));
    stypes.push_back(smoothed.types().name(semantic.types[i]));
  }
  for (const auto& e : semantic.edges) sedges.push_back({e.head, smoothed.relations().name(e.relation), e.tail});
  j["semantic"] = {{"nodes", snodes}, {"types", stypes}, {"edges", sedges}};
  json mp = json::array();
  for (const auto& p : paths) mp.push_back(p.head_type + ":" + p.relation_string() + ":" + p.tail_type);
  j["metapaths"] = mp;
  out << j.dump(2) << '\n';
  return kExitOk;
}

int run_gradcheck(const harness::GradcheckOptions& options, std::ostream& out, std::ostream& err) {
  const auto result = harness::end_to_end_gradcheck(options);
  const auto& r = result.report;
  out << "max_rel_error " << r.max_rel_error << " worst_param " << r.worst_param << '[' << r.worst_index << "] analytic "
      << r.worst_analytic << " numeric " << r.worst_numeric << " checked " << r.checked << " entities "
      << result.entities << '\n';
  if (!(r.max_rel_error < 1e-4)) {
    err << "gradcheck: relative error " << r.max_rel_error << " exceeds 1e-4\n";
    return kExitRuntime;
  }
  return kExitOk;
}

int run_gen_synthetic(const harness::SyntheticConfig& sc, const std::string& mode, double noise_ratio,
                      const std::string& noise_kind, const std::string& dir, std::ostream& out) {
  auto config = sc;
  config.mode = kg::parse_task_mode(mode);
  auto bench = harness::generate_synthetic(config);
  if (noise_ratio > 0.0) {
    const auto seed = Rng::mix(config.seed ^ 0x6e6f697365ULL);
    bench.graph = harness::parse_noise_kind(noise_kind) == harness::NoiseKind::structural
                      ? kg::inject_structural_noise(bench.graph, noise_ratio, seed)
                      : kg::inject_semantic_noise(bench.graph, noise_ratio, seed);
  }
  harness::write_benchmark(bench, dir);
  out << "entities " << bench.graph.entity_count() << " triples " << bench.graph.triple_count() << " links "
      << bench.links.examples.size() << " dir " << dir << '\n';
  return kExitOk;
}

}  // namespace

int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"DenoisedLP: denoised subgraph link prediction over knowledge graphs", "dlp"};
  app.require_subcommand(1);

  auto* pre = app.add_subcommand("pretrain", "pretrain rotation embeddings");
  Command pre_c(pre);
  pre_c.output_options();
  std::string pre_triples, pre_types, pre_out;
  pre->add_option("--triples", pre_triples, "triples.tsv")->required();
  pre->add_option("--types", pre_types, "types.tsv");
  pre->add_option("--out", pre_out, "output checkpoint (default <out-dir>/table.ckpt)");
  pre_c.bind("--seed", "seed", "random seed");
  pre_c.bind("--precision", "precision", "f32 | f64");
  pre_c.bind("--dim", "pretrain.dim", "complex dimension");
  pre_c.bind("--epochs", "pretrain.epochs", "epochs");
  pre_c.bind("--lr", "pretrain.lr", "learning rate");
  pre_c.bind("--margin", "pretrain.margin", "ranking margin");
  pre_c.bind("--negatives", "pretrain.negatives", "negatives per triple");
  pre_c.bind("--batch", "pretrain.batch", "mini-batch size");

  auto* tr = app.add_subcommand("train", "cross-validated training");
  Command tr_c(tr);
  tr_c.output_options();
  tr_c.jobs_option();
  DataFlags tr_d;
  tr_d.add(tr, true);
  add_model_flags(tr_c);
  std::string tr_variant;
  tr->add_option("--variant", tr_variant, "full | wo_srl | wo_ssp | wo_mi");

  auto* ev = app.add_subcommand("eval", "evaluate a checkpoint");
  Command ev_c(ev);
  ev_c.output_options();
  DataFlags ev_d;
  ev_d.add(ev, true);
  add_model_flags(ev_c);
  std::string ev_ck;
  ev->add_option("--checkpoint", ev_ck, "model checkpoint")->required();

  auto* ne = app.add_subcommand("noise-eval", "noise-robustness sweep");
  Command ne_c(ne);
  ne_c.output_options();
  ne_c.jobs_option();
  DataFlags ne_d;
  ne_d.add(ne, false);
  add_model_flags(ne_c);
  ne_c.bind("--ratios", "noise.ratios", "comma-separated noise ratios");
  ne_c.bind("--kind", "noise.kind", "structural | semantic");
  ne_c.bind("--variants", "noise.variants", "comma-separated variants");
  ne_c.bind("--seeds", "noise.seeds", "comma-separated seeds");

  auto* ex = app.add_subcommand("extract", "print both subgraphs of one link as JSON");
  Command ex_c(ex);
  DataFlags ex_d;
  ex->add_option("--triples", ex_d.paths.triples, "triples.tsv")->required();
  ex->add_option("--types", ex_d.paths.types, "types.tsv");
  ex->add_option("--smoothing", ex_d.paths.smoothing, "smoothing.tsv");
  std::string ex_head, ex_tail;
  ex->add_option("--head", ex_head, "head entity")->required();
  ex->add_option("--tail", ex_tail, "tail entity")->required();
  ex_c.bind("--seed", "seed", "down-sampling seed");
  ex_c.bind("--hops", "subgraph.hops", "hops");
  ex_c.bind("--max-nodes", "subgraph.max_nodes", "node cap");
  ex_c.bind("--metapaths", "metapath.file", "metapaths.tsv");
  ex_c.bind("--metapath-len", "metapath.max_len", "longest default metapath");

  auto* gc = app.add_subcommand("gradcheck", "finite-difference check of the full loss");
  harness::GradcheckOptions gc_opts;
  std::string gc_estimator = "attention";
  gc->add_option("--seed", gc_opts.seed, "seed");
  gc->add_option("--estimator", gc_estimator, "attention | mlp | weighted_cosine | cosine");
  gc->add_option("--hidden", gc_opts.hidden, "hidden width")->check(CLI::PositiveNumber);
  gc->add_option("--dim", gc_opts.dim, "complex feature dimension")->check(CLI::PositiveNumber);
  gc->add_option("--epsilon", gc_opts.epsilon, "finite-difference step")->check(CLI::PositiveNumber);

  auto* gs = app.add_subcommand("gen-synthetic", "write the planted benchmark");
  harness::SyntheticConfig gs_cfg;
  std::string gs_dir = "synthetic", gs_mode = "binary", gs_noise_kind = "structural";
  double gs_noise = 0.0;
  gs->add_option("--out-dir", gs_dir, "output directory");
  gs->add_option("--seed", gs_cfg.seed, "seed");
  gs->add_option("--communities", gs_cfg.communities, "communities");
  gs->add_option("--drugs", gs_cfg.drugs, "drugs per community");
  gs->add_option("--genes", gs_cfg.genes, "genes per community");
  gs->add_option("--diseases", gs_cfg.diseases, "diseases per community");
  gs->add_option("--degree", gs_cfg.degree, "edge density multiplier");
  gs->add_option("--cross-fraction", gs_cfg.cross_fraction, "share of cross-community edges");
  gs->add_option("--links", gs_cfg.links, "task links");
  gs->add_option("--task-mode", gs_mode, "binary | multi_class");
  gs->add_option("--noise-ratio", gs_noise, "contaminate the written KG")->check(CLI::NonNegativeNumber);
  gs->add_option("--noise-kind", gs_noise_kind, "structural | semantic");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "dlp: " << e.what() << "\n";
    const auto* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
    err << sub->help();
    return kExitUsage;
  }

  try {
    if (pre->parsed()) return run_pretrain(pre_c, pre_triples, pre_types, pre_out, out);
    if (tr->parsed()) return run_train(tr_c, tr_d, tr_variant, out);
    if (ev->parsed()) return run_eval(ev_c, ev_d, ev_ck, out);
    if (ne->parsed()) return run_noise_eval(ne_c, ne_d, out);
    if (ex->parsed()) return run_extract(ex_c, ex_d, ex_head, ex_tail, out);
    if (gc->parsed()) {
      gc_opts.estimator = model::parse_estimator(gc_estimator);
      return run_gradcheck(gc_opts, out, err);
    }
    if (gs->parsed()) return run_gen_synthetic(gs_cfg, gs_mode, gs_noise, gs_noise_kind, gs_dir, out);
  } catch (const ConfigError& e) {
    err << "dlp: " << e.what() << '\n';
    return kExitUsage;
  } catch (const harness::TrainingAborted& e) {
    err << "dlp: training aborted: " << e.what() << "; last good checkpoint saved as last_good.ckpt\n";
    return kExitRuntime;
  } catch (const std::exception& e) {
    err << "dlp: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace dlp::cli
