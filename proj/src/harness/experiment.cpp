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

#include "dlp/harness/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <limits>
#include <set>

#include "json.hpp"

#include "dlp/common/error.hpp"
#include "dlp/common/rng.hpp"
#include "dlp/diffcore/adam.hpp"
#include "dlp/harness/parallel.hpp"
#include "dlp/kgstore/tsv.hpp"

namespace dlp::harness {

namespace {

using Clock = std::chrono::steady_clock;

enum class Stream : std::uint64_t { pretrain = 1, extract, split, fold, noise, negatives, batches };

std::uint64_t derive(std::uint64_t seed, Stream stream, std::uint64_t index = 0) {
  return Rng::mix(seed ^ Rng::mix(static_cast<std::uint64_t>(stream) * 0x100000000ULL + index));
}

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::size_t positive(const RunConfig& rc, std::string_view key) {
  const auto v = rc.get_size(key);
  if (v == 0) throw ConfigError(std::string(key) + " must be positive");
  return v;
}

double positive_real(const RunConfig& rc, std::string_view key) {
  const double v = rc.get_double(key);
  if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(std::string(key) + " must be a positive number");
  return v;
}

kg::UnmappedPolicy parse_unmapped(const std::string& name) {
  if (name == "keep") return kg::UnmappedPolicy::keep;
  if (name == "drop") return kg::UnmappedPolicy::drop;
  if (name == "strict") return kg::UnmappedPolicy::strict;
  throw ConfigError("smoothing.unmapped must be keep, drop or strict, not '" + name + "'");
}

/// Positions of split entries within the full example list.
std::vector<std::size_t> locate(const std::vector<kg::LinkExample>& all, const std::vector<kg::LinkExample>& part) {
  std::map<kg::LinkExample, std::vector<std::size_t>> slots;
  for (std::size_t i = all.size(); i-- > 0;) slots[all[i]].push_back(i);
  std::vector<std::size_t> out;
  out.reserve(part.size());
  for (const auto& ex : part) {
    auto it = slots.find(ex);
    if (it == slots.end() || it->second.empty()) throw PreconditionError("split example is not in the dataset");
    out.push_back(it->second.back());
    it->second.pop_back();
  }
  return out;
}

std::vector<model::LinkInput> inputs_for(const Workspace& ws, std::span<const std::size_t> idx) {
  std::vector<model::LinkInput> out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back({&ws.local[i], &ws.semantic[i]});
  return out;
}

template <typename T>
ad::Tensor<double> predict_all(model::DenoisedLP<T>& net, const Workspace& ws, std::span<const std::size_t> idx,
                               std::size_t batch) {
  const std::size_t classes = net.config().classes;
  ad::Tensor<double> out(idx.size(), classes);
  for (std::size_t start = 0; start < idx.size(); start += batch) {
    const auto chunk = idx.subspan(start, std::min(batch, idx.size() - start));
    const auto inputs = inputs_for(ws, chunk);
    const auto probs = net.predict_probs(inputs);
    for (std::size_t r = 0; r < chunk.size(); ++r)
      for (std::size_t c = 0; c < classes; ++c) out(start + r, c) = static_cast<double>(probs(r, c));
  }
  return out;
}

template <typename T>
double eval_cross_entropy(model::DenoisedLP<T>& net, const Workspace& ws, const std::vector<kg::LinkExample>& examples,
                          std::span<const std::size_t> idx, std::size_t batch) {
  if (idx.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t start = 0; start < idx.size(); start += batch) {
    const auto chunk = idx.subspan(start, std::min(batch, idx.size() - start));
    const auto inputs = inputs_for(ws, chunk);
    std::vector<std::vector<std::uint32_t>> labels;
    for (auto i : chunk) labels.push_back(examples[i].labels);
    ad::Tape<T> tape;
    const auto out = net.forward(tape, inputs, model::ForwardOptions<T>{});
    const auto parts = net.loss(out, labels);
    sum += static_cast<double>(parts.task.value()(0, 0)) * static_cast<double>(chunk.size());
  }
  return sum / static_cast<double>(idx.size());
}

std::vector<kg::LinkExample> pick(const std::vector<kg::LinkExample>& all, std::span<const std::size_t> idx) {
  std::vector<kg::LinkExample> out;
  for (auto i : idx) out.push_back(all[i]);
  return out;
}

/// Validation AUC, or nothing when the set is empty or single-class.
template <typename T>
std::optional<double> validation_auc(model::DenoisedLP<T>& net, const Workspace& ws, const kg::LinkSet& links,
                                     std::span<const std::size_t> idx, std::size_t batch) {
  if (idx.empty()) return std::nullopt;
  const auto probs = predict_all(net, ws, idx, batch);
  try {
    return score_predictions(probs, pick(links.examples, idx), links.mode, links.class_count()).auc_roc;
  } catch (const PreconditionError&) {
    return std::nullopt;
  }
}

template <typename T>
FoldResult run_fold(const Workspace& ws, const kg::LinkSet& links, const kg::DatasetSplit& split,
                    const TrainConfig& cfg) {
  const auto& examples = links.examples;
  const auto train_idx = locate(examples, split.train);
  const auto valid_idx = locate(examples, split.valid);
  const auto test_idx = locate(examples, split.test);

  model::ModelConfig mc = cfg.model;
  mc.mode = links.mode;
  mc.classes = links.class_count();
  const std::uint64_t fold_seed = derive(cfg.seed, Stream::fold, split.fold);
  model::DenoisedLP<T> net(mc, ws.table.entity.cast<T>(), ws.relation_features.cast<T>(), fold_seed);
  auto params = net.trainable();
  ad::Adam<T> opt(params, ad::AdamConfig{.lr = cfg.lr, .weight_decay = cfg.weight_decay});
  Rng rng(derive(cfg.seed, Stream::batches, split.fold));

  FoldResult result;
  auto& rep = result.report;
  rep.fold = split.fold;
  rep.train_size = train_idx.size();
  rep.valid_size = valid_idx.size();
  rep.test_size = test_idx.size();

  ad::Checkpoint best;
  net.store(best);
  ad::Checkpoint last_good = best;
  auto checked_auc = [&](std::size_t epoch) {
    try {
      return validation_auc(net, ws, links, valid_idx, cfg.batch_size);
    } catch (const NumericError& e) {
      throw TrainingAborted("fold " + std::to_string(split.fold) + " epoch " + std::to_string(epoch) +
                                ": validation failed: " + e.what(),
                            last_good);
    }
  };
  auto best_auc = checked_auc(0);
  std::size_t stale = 0;

  std::vector<std::size_t> order = train_idx;
  for (std::size_t epoch = 1; epoch <= cfg.epochs && !order.empty(); ++epoch) {
    rng.shuffle(std::span<std::size_t>(order));
    double total_sum = 0.0, task_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const auto chunk = std::span<const std::size_t>(order).subspan(start, std::min(cfg.batch_size, order.size() - start));
      const auto inputs = inputs_for(ws, chunk);
      std::vector<std::vector<std::uint32_t>> labels;
      for (auto i : chunk) labels.push_back(examples[i].labels);
      ad::Tape<T> tape;
      model::ForwardOptions<T> options;
      options.train = true;
      options.rng = &rng;
      const std::string where =
          "fold " + std::to_string(split.fold) + " epoch " + std::to_string(epoch) + " batch " + std::to_string(batches);
      std::optional<model::LossParts<T>> parts;
      try {
        parts = net.loss(net.forward(tape, inputs, options), labels);
      } catch (const DomainError& e) {
        throw TrainingAborted(where + ": " + e.what(), last_good);
      }
      const double total = static_cast<double>(parts->total.value()(0, 0));
      const double task = static_cast<double>(parts->task.value()(0, 0));
      if (!std::isfinite(total)) {
        std::string what = where + ": non-finite loss (task " + std::to_string(task);
        if (parts->mi) what += ", mi " + std::to_string(static_cast<double>(parts->mi->value()(0, 0)));
        throw TrainingAborted(what + ")", last_good);
      }
      opt.zero_grad();
      tape.backward(parts->total);
      opt.step();
      total_sum += total;
      task_sum += task;
      ++batches;
    }
    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = total_sum / static_cast<double>(batches);
    rec.task_loss = task_sum / static_cast<double>(batches);
    last_good = ad::Checkpoint{};
    net.store(last_good);
    rep.epochs_run = epoch;

    bool stop = false;
    if (!valid_idx.empty()) {
      rec.valid_auc = checked_auc(epoch);
      if (rec.valid_auc && (!best_auc || *rec.valid_auc > *best_auc)) {
        best_auc = rec.valid_auc;
        best = last_good;
        rep.best_epoch = epoch;
        stale = 0;
      } else if (cfg.patience > 0 && ++stale >= cfg.patience) {
        stop = true;
      }
    }
    if (cfg.target_loss > 0.0 && eval_cross_entropy(net, ws, examples, train_idx, cfg.batch_size) < cfg.target_loss)
      stop = true;
    rep.curve.push_back(rec);
    if (stop) break;
  }
  // Without a usable validation signal the final model is kept.
  if (!best_auc) {
    best = last_good;
    rep.best_epoch = rep.epochs_run;
  }

  auto selected = model::DenoisedLP<T>::restore(best);
  rep.train_cross_entropy = eval_cross_entropy(selected, ws, examples, train_idx, cfg.batch_size);
  const auto probs = predict_all(selected, ws, test_idx, cfg.batch_size);
  rep.test = score_predictions(probs, split.test, links.mode, links.class_count());
  result.checkpoint = std::move(best);
  return result;
}

void extract_all(Workspace& ws, const std::vector<kg::LinkExample>& examples, const TrainConfig& cfg) {
  ws.local.clear();
  ws.semantic.clear();
  ws.local.reserve(examples.size());
  ws.semantic.reserve(examples.size());
  const std::uint64_t seed = derive(cfg.seed, Stream::extract);
  for (const auto& ex : examples) {
    ws.local.push_back(sub::extract_local(ws.graph, ex.head, ex.tail, cfg.local, seed));
    ws.semantic.push_back(sub::extract_semantic(ws.smoothed, ex.head, ex.tail, ws.metapaths));
  }
}

std::vector<sub::Metapath> resolve_metapaths(const kg::KnowledgeGraph& smoothed, const kg::LinkSet& links,
                                             const TrainConfig& cfg) {
  if (!cfg.metapath_file.empty()) return sub::load_metapaths(cfg.metapath_file);
  return task_metapaths(smoothed, links.examples, cfg.metapath_max_len);
}

std::optional<embed::EmbeddingTable> preset_table(const TrainConfig& cfg, const kg::KnowledgeGraph& graph) {
  if (cfg.table_path.empty()) return std::nullopt;
  auto table = embed::EmbeddingTable::restore(ad::Checkpoint::load(cfg.table_path));
  if (table.entity_count() != graph.entity_count() || table.relation_count() != graph.relation_count())
    throw ShapeError("embedding table " + cfg.table_path + " does not match the graph vocabulary");
  return table;
}

FoldResult dispatch_fold(const Workspace& ws, const kg::LinkSet& links, const kg::DatasetSplit& split,
                         const TrainConfig& cfg) {
  return cfg.double_precision ? run_fold<double>(ws, links, split, cfg) : run_fold<float>(ws, links, split, cfg);
}

std::string number(double v) {
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return ec == std::errc() ? std::string(buf, end) : std::string("nan");
}

nlohmann::json metrics_json(const Metrics& m) {
  return {{"auc_roc", m.auc_roc}, {"auc_pr", m.auc_pr}, {"micro_f1", m.micro_f1}, {"micro_recall", m.micro_recall}};
}

}  // namespace

TrainConfig train_config(const RunConfig& rc) {
  TrainConfig c;
  c.seed = rc.get_u64("seed");
  const auto precision = rc.get("precision");
  if (precision != "f32" && precision != "f64") throw ConfigError("precision must be f32 or f64");
  c.double_precision = precision == "f64";

  auto& m = c.model;
  try {
    m.estimator = model::parse_estimator(rc.get("estimator.kind"));
    m.mode = kg::parse_task_mode(rc.get("task_mode"));
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  const auto act = rc.get("projection.activation");
  if (act != "relu" && act != "identity") throw ConfigError("projection.activation must be relu or identity");
  m.projection_activation = act == "relu" ? model::Activation::relu : model::Activation::identity;
  m.hidden = positive(rc, "hidden_dim");
  m.gcn_layers = positive(rc, "gcn.layers");
  m.rgnn_layers = positive(rc, "rgnn.layers");
  m.self_term = rc.get_bool("rgnn.self_term");
  m.temperature = positive_real(rc, "srl.temperature");
  m.tau = positive_real(rc, "mi.tau");
  m.lambda = rc.get_double("mi.lambda");
  if (!(m.lambda >= 0.0)) throw ConfigError("mi.lambda must be non-negative");
  m.ablate = {rc.get_bool("ablate.srl"), rc.get_bool("ablate.ssp"), rc.get_bool("ablate.mi")};
  m.fine_tune = rc.get_bool("fine_tune");

  const auto hops = positive(rc, "subgraph.hops");
  c.local.hops = static_cast<std::uint32_t>(hops);
  c.local.max_nodes = rc.get_size("subgraph.max_nodes");
  if (c.local.max_nodes < 2) throw ConfigError("subgraph.max_nodes must be at least 2");
  c.metapath_max_len = positive(rc, "metapath.max_len");
  c.metapath_file = rc.get("metapath.file");

  auto& p = c.pretrain;
  p.dim = positive(rc, "pretrain.dim");
  p.epochs = rc.get_size("pretrain.epochs");
  p.lr = positive_real(rc, "pretrain.lr");
  p.margin = rc.get_double("pretrain.margin");
  p.negatives = positive(rc, "pretrain.negatives");
  p.batch_size = positive(rc, "pretrain.batch");
  p.self_adversarial = rc.get_bool("pretrain.self_adversarial");
  p.double_precision = c.double_precision;
  c.table_path = rc.get("pretrain.table");

  c.epochs = rc.get_size("train.epochs");
  c.batch_size = positive(rc, "train.batch");
  c.lr = positive_real(rc, "train.lr");
  c.weight_decay = rc.get_double("train.weight_decay");
  if (!(c.weight_decay >= 0.0)) throw ConfigError("train.weight_decay must be non-negative");
  c.patience = rc.get_size("train.patience");
  c.target_loss = rc.get_double("train.target_loss");
  c.folds = rc.get_size("cv.folds");
  if (c.folds < 2) throw ConfigError("cv.folds must be at least 2");
  c.max_folds = rc.get_size("cv.max_folds");
  c.stratify = rc.get_bool("cv.stratify");
  c.echo = rc.effective();
  return c;
}

Dataset load_dataset(const DatasetPaths& paths, const RunConfig& rc) {
  Dataset d;
  d.graph = kg::load_graph(paths.triples, paths.types);
  const auto policy = parse_unmapped(rc.get("smoothing.unmapped"));
  if (paths.smoothing.empty()) {
    d.smoothing.unmapped = kg::UnmappedPolicy::keep;
  } else {
    d.smoothing = kg::load_smoothing(paths.smoothing, policy);
  }
  d.links = kg::load_links(paths.links, d.graph, kg::parse_task_mode(rc.get("task_mode")));
  const auto negatives = rc.get("negatives.mode");
  if (negatives != "none") {
    kg::NegativeMode mode;
    if (negatives == "balanced_per_head") {
      mode = kg::NegativeMode::balanced_per_head;
    } else if (negatives == "counterpart_per_positive") {
      mode = kg::NegativeMode::counterpart_per_positive;
    } else {
      throw ConfigError("negatives.mode must be none, balanced_per_head or counterpart_per_positive");
    }
    auto neg = kg::sample_negatives(d.links, d.graph, mode, derive(rc.get_u64("seed"), Stream::negatives));
    for (auto& ex : neg.examples) d.links.examples.push_back(std::move(ex));
  }
  return d;
}

std::vector<sub::Metapath> task_metapaths(const kg::KnowledgeGraph& smoothed,
                                          const std::vector<kg::LinkExample>& examples, std::size_t max_len) {
  std::set<std::pair<TypeId, TypeId>> pairs;
  for (const auto& ex : examples) pairs.emplace(smoothed.type_of(ex.head), smoothed.type_of(ex.tail));
  std::vector<sub::Metapath> out;
  for (const auto& [h, t] : pairs) {
    auto paths = sub::default_metapaths(smoothed, smoothed.types().name(h), smoothed.types().name(t), max_len);
    out.insert(out.end(), std::make_move_iterator(paths.begin()), std::make_move_iterator(paths.end()));
  }
  return out;
}

ad::Tensor<double> smoothed_relation_features(const embed::EmbeddingTable& table, const kg::KnowledgeGraph& raw,
                                              const kg::KnowledgeGraph& smoothed, const kg::SmoothingMap& map) {
  if (table.relation_count() != raw.relation_count())
    throw ShapeError("embedding table has " + std::to_string(table.relation_count()) + " relations, graph has " +
                     std::to_string(raw.relation_count()));
  const std::size_t width = 2 * table.dim();
  ad::Tensor<double> out(smoothed.relation_count(), width);
  std::vector<std::size_t> counts(smoothed.relation_count(), 0);
  for (std::size_t r = 0; r < raw.relation_count(); ++r) {
    const auto& name = raw.relations().name(RelationId(r));
    std::string target = name;
    if (auto it = map.classes.find(name); it != map.classes.end())
      target = kg::kSmoothedClassNames[static_cast<std::size_t>(it->second)];
    const auto id = smoothed.relations().find(target);
    if (!id) continue;
    const auto vec = table.relation_vector(RelationId(r));
    for (std::size_t c = 0; c < width; ++c) out(id->index(), c) += vec(0, c);
    ++counts[id->index()];
  }
  for (std::size_t s = 0; s < counts.size(); ++s)
    if (counts[s] > 1)
      for (std::size_t c = 0; c < width; ++c) out(s, c) /= static_cast<double>(counts[s]);
  return out;
}

Workspace prepare_workspace(kg::KnowledgeGraph graph, const kg::SmoothingMap& smoothing,
                            const std::vector<kg::LinkExample>& examples, std::vector<sub::Metapath> metapaths,
                            const TrainConfig& cfg, const embed::EmbeddingTable* table) {
  Workspace ws;
  ws.graph = std::move(graph);
  ws.smoothed = kg::smooth_relations(ws.graph, smoothing);
  if (table) {
    ws.table = *table;
  } else {
    auto pc = cfg.pretrain;
    pc.seed = derive(cfg.seed, Stream::pretrain);
    ws.table = embed::pretrain(ws.graph, pc).table;
  }
  ws.relation_features = smoothed_relation_features(ws.table, ws.graph, ws.smoothed, smoothing);
  ws.metapaths = std::move(metapaths);
  extract_all(ws, examples, cfg);
  return ws;
}

Metrics score_predictions(const ad::Tensor<double>& probs, const std::vector<kg::LinkExample>& examples,
                          kg::TaskMode mode, std::size_t classes) {
  if (probs.rows() != examples.size() || probs.cols() != classes)
    throw ShapeError("score_predictions: " + probs.shape_string() + " for " + std::to_string(examples.size()) +
                     " examples of " + std::to_string(classes) + " classes");
  for (double p : probs.values())
    if (!std::isfinite(p)) throw NumericError("score_predictions: non-finite probability");
  Metrics m;
  std::vector<double> scores;
  std::vector<std::uint8_t> labels;
  if (mode == kg::TaskMode::binary) {
    std::vector<std::uint32_t> pred, truth;
    for (std::size_t i = 0; i < examples.size(); ++i) {
      const double p = probs(i, 0);
      const std::uint32_t y = examples[i].labels.at(0);
      scores.push_back(p);
      labels.push_back(y == 1 ? 1 : 0);
      pred.push_back(p >= 0.5 ? 1 : 0);
      truth.push_back(y);
    }
    m.auc_roc = auc_roc(scores, labels);
    m.auc_pr = auc_pr(scores, labels);
    m.micro_f1 = micro_f1(pred, truth);
    m.micro_recall = micro_recall(pred, truth);
    return m;
  }
  MicroCounts counts;
  std::vector<std::uint32_t> pred, truth;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    const auto& y = examples[i].labels;
    std::size_t arg = 0;
    for (std::size_t c = 0; c < classes; ++c) {
      const double p = probs(i, c);
      const bool positive = std::find(y.begin(), y.end(), c) != y.end();
      scores.push_back(p);
      labels.push_back(positive ? 1 : 0);
      if (p > probs(i, arg)) arg = c;
      if (mode == kg::TaskMode::multi_label) {
        const bool predicted = p >= 0.5;
        counts.tp += predicted && positive;
        counts.fp += predicted && !positive;
        counts.fn += !predicted && positive;
      }
    }
    if (mode == kg::TaskMode::multi_class) {
      pred.push_back(static_cast<std::uint32_t>(arg));
      truth.push_back(y.at(0));
    }
  }
  if (mode == kg::TaskMode::multi_class) counts = single_label_counts(pred, truth);
  m.auc_roc = auc_roc(scores, labels);
  m.auc_pr = auc_pr(scores, labels);
  m.micro_f1 = micro_f1(counts);
  m.micro_recall = micro_recall(counts);
  return m;
}

FoldResult train_fold(const Workspace& ws, const kg::LinkSet& links, const kg::DatasetSplit& split,
                      const TrainConfig& config) {
  if (ws.local.size() != links.examples.size())
    throw PreconditionError("workspace was prepared for a different example list");
  return dispatch_fold(ws, links, split, config);
}

std::vector<kg::DatasetSplit> cv_splits(const kg::LinkSet& links, const TrainConfig& cfg) {
  auto splits = kg::kfold_split(links.examples, cfg.folds, derive(cfg.seed, Stream::split), cfg.stratify);
  if (cfg.max_folds > 0 && splits.size() > cfg.max_folds) splits.resize(cfg.max_folds);
  return splits;
}

void summarize_folds(MetricsReport& report) {
  std::vector<double> a, b, c, d;
  for (const auto& f : report.folds) {
    a.push_back(f.test.auc_roc);
    b.push_back(f.test.auc_pr);
    c.push_back(f.test.micro_f1);
    d.push_back(f.test.micro_recall);
  }
  report.auc_roc = summarize(a);
  report.auc_pr = summarize(b);
  report.micro_f1 = summarize(c);
  report.micro_recall = summarize(d);
}

TrainOutcome train(const Dataset& data, const TrainConfig& cfg) {
  const auto start = Clock::now();
  const auto smoothed = kg::smooth_relations(data.graph, data.smoothing);
  auto metapaths = resolve_metapaths(smoothed, data.links, cfg);
  const auto table = preset_table(cfg, data.graph);
  const auto ws = prepare_workspace(data.graph, data.smoothing, data.links.examples, std::move(metapaths), cfg,
                                    table ? &*table : nullptr);
  const auto splits = cv_splits(data.links, cfg);
  std::vector<FoldResult> results(splits.size());
  parallel_for(splits.size(), cfg.jobs, [&](std::size_t i) { results[i] = dispatch_fold(ws, data.links, splits[i], cfg); });

  TrainOutcome outcome;
  auto& rep = outcome.report;
  rep.variant = variant_name(cfg.model.ablate);
  rep.seed = cfg.seed;
  rep.config = cfg.echo;
  for (auto& r : results) {
    rep.folds.push_back(std::move(r.report));
    outcome.checkpoints.push_back(std::move(r.checkpoint));
  }
  summarize_folds(rep);
  rep.wall_seconds = seconds_since(start);
  return outcome;
}

MetricsReport evaluate(const ad::Checkpoint& checkpoint, const Dataset& data, const TrainConfig& cfg) {
  const auto start = Clock::now();
  const auto mc = model::load_config(checkpoint);
  if (mc.mode != data.links.mode || mc.classes != data.links.class_count())
    throw ShapeError("checkpoint was trained for a different task (mode or class count)");
  Workspace ws;
  ws.graph = data.graph;
  ws.smoothed = kg::smooth_relations(ws.graph, data.smoothing);
  ws.metapaths = resolve_metapaths(ws.smoothed, data.links, cfg);
  extract_all(ws, data.links.examples, cfg);

  auto run = [&]<typename T>(T) {
    auto net = model::DenoisedLP<T>::restore(checkpoint);
    if (checkpoint.get<T>("features.entity").rows() != ws.graph.entity_count())
      throw ShapeError("checkpoint features cover a different entity vocabulary");
    if (net.relation_count() != ws.smoothed.relation_count())
      throw ShapeError("checkpoint features cover a different relation vocabulary");
    std::vector<std::size_t> idx(data.links.examples.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    return predict_all(net, ws, idx, cfg.batch_size);
  };
  const auto probs = cfg.double_precision ? run(double{}) : run(float{});

  MetricsReport rep;
  rep.variant = variant_name(mc.ablate);
  rep.seed = cfg.seed;
  rep.config = cfg.echo;
  FoldReport fold;
  fold.test_size = data.links.examples.size();
  fold.test = score_predictions(probs, data.links.examples, data.links.mode, data.links.class_count());
  rep.folds.push_back(std::move(fold));
  summarize_folds(rep);
  rep.wall_seconds = seconds_since(start);
  return rep;
}

NoiseKind parse_noise_kind(std::string_view name) {
  if (name == "structural") return NoiseKind::structural;
  if (name == "semantic") return NoiseKind::semantic;
  throw ConfigError("noise kind must be structural or semantic, not '" + std::string(name) + "'");
}

std::string_view to_string(NoiseKind kind) { return kind == NoiseKind::structural ? "structural" : "semantic"; }

model::Ablation parse_variant(std::string_view name) {
  if (name == "full") return {};
  if (name == "wo_srl") return {.srl = true};
  if (name == "wo_ssp") return {.ssp = true};
  if (name == "wo_mi") return {.mi = true};
  throw ConfigError("unknown variant '" + std::string(name) + "' (full, wo_srl, wo_ssp, wo_mi)");
}

std::string variant_name(const model::Ablation& a) {
  std::string out;
  auto add = [&](bool on, const char* name) {
    if (!on) return;
    if (!out.empty()) out += '+';
    out += name;
  };
  add(a.srl, "wo_srl");
  add(a.ssp, "wo_ssp");
  add(a.mi, "wo_mi");
  return out.empty() ? "full" : out;
}

SweepReport noise_sweep(const Dataset& data, const std::vector<double>& ratios, NoiseKind kind,
                        const std::vector<std::string>& variants, const std::vector<std::uint64_t>& seeds,
                        const TrainConfig& cfg) {
  if (ratios.empty() || variants.empty() || seeds.empty())
    throw PreconditionError("noise_sweep needs at least one ratio, variant and seed");
  for (double r : ratios)
    if (!(r >= 0.0) || !std::isfinite(r)) throw PreconditionError("noise ratios must be finite and non-negative");
  const auto base = std::find(ratios.begin(), ratios.end(), 0.0);
  if (base == ratios.end()) throw PreconditionError("noise_sweep ratios must include 0 as the baseline");
  std::vector<model::Ablation> ablations;
  for (const auto& v : variants) ablations.push_back(parse_variant(v));

  const auto clean_smoothed = kg::smooth_relations(data.graph, data.smoothing);
  const auto metapaths = resolve_metapaths(clean_smoothed, data.links, cfg);
  const std::size_t R = ratios.size(), S = seeds.size(), V = variants.size();

  auto seed_config = [&](std::uint64_t seed, const model::Ablation* ablate) {
    TrainConfig c = cfg;
    c.seed = seed;
    c.echo["seed"] = std::to_string(seed);
    c.echo["noise.kind"] = std::string(to_string(kind));
    if (ablate) {
      c.model.ablate = *ablate;
      c.echo["ablate.srl"] = ablate->srl ? "true" : "false";
      c.echo["ablate.ssp"] = ablate->ssp ? "true" : "false";
      c.echo["ablate.mi"] = ablate->mi ? "true" : "false";
    }
    return c;
  };

  // One contaminated, pretrained workspace per (ratio, seed), shared by every
  // variant. The noise stream depends on the seed only, so higher ratios
  // extend the triples added at lower ones.
  std::vector<Workspace> spaces(R * S);
  std::vector<double> prep_seconds(R * S);
  parallel_for(R * S, cfg.jobs, [&](std::size_t k) {
    const auto t0 = Clock::now();
    const double ratio = ratios[k / S];
    const auto c = seed_config(seeds[k % S], nullptr);
    const auto noise_seed = derive(c.seed, Stream::noise);
    kg::KnowledgeGraph noisy = kind == NoiseKind::structural ? kg::inject_structural_noise(data.graph, ratio, noise_seed)
                                                             : kg::inject_semantic_noise(data.graph, ratio, noise_seed);
    spaces[k] = prepare_workspace(std::move(noisy), data.smoothing, data.links.examples, metapaths, c);
    prep_seconds[k] = seconds_since(t0);
  });

  std::vector<std::vector<kg::DatasetSplit>> splits;
  for (auto seed : seeds) splits.push_back(cv_splits(data.links, seed_config(seed, nullptr)));
  const std::size_t F = splits.front().size();

  struct Job {
    std::size_t v, r, s, f;
  };
  std::vector<Job> jobs;
  for (std::size_t v = 0; v < V; ++v)
    for (std::size_t r = 0; r < R; ++r)
      for (std::size_t s = 0; s < S; ++s)
        for (std::size_t f = 0; f < F; ++f) jobs.push_back({v, r, s, f});
  std::vector<FoldReport> folds(jobs.size());
  std::vector<double> fold_seconds(jobs.size());
  parallel_for(jobs.size(), cfg.jobs, [&](std::size_t j) {
    const auto t0 = Clock::now();
    const auto& job = jobs[j];
    const auto c = seed_config(seeds[job.s], &ablations[job.v]);
    folds[j] = dispatch_fold(spaces[job.r * S + job.s], data.links, splits[job.s][job.f], c).report;
    fold_seconds[j] = seconds_since(t0);
  });

  SweepReport out;
  std::size_t j = 0;
  for (std::size_t v = 0; v < V; ++v) {
    for (std::size_t r = 0; r < R; ++r) {
      for (std::size_t s = 0; s < S; ++s) {
        MetricsReport cell;
        cell.variant = variants[v];
        cell.noise_kind = std::string(to_string(kind));
        cell.ratio = ratios[r];
        cell.seed = seeds[s];
        cell.config = seed_config(seeds[s], &ablations[v]).echo;
        cell.wall_seconds = prep_seconds[r * S + s];
        for (std::size_t f = 0; f < F; ++f, ++j) {
          cell.folds.push_back(folds[j]);
          cell.wall_seconds += fold_seconds[j];
        }
        summarize_folds(cell);
        out.cells.push_back(std::move(cell));
      }
    }
  }
  for (std::size_t v = 0; v < V; ++v) {
    std::vector<Metrics> means(R);
    for (std::size_t r = 0; r < R; ++r) {
      std::vector<double> a, b, c, d;
      for (std::size_t s = 0; s < S; ++s)
        for (const auto& f : out.cells[(v * R + r) * S + s].folds) {
          a.push_back(f.test.auc_roc);
          b.push_back(f.test.auc_pr);
          c.push_back(f.test.micro_f1);
          d.push_back(f.test.micro_recall);
        }
      means[r] = {summarize(a).mean, summarize(b).mean, summarize(c).mean, summarize(d).mean};
    }
    const double auc0 = means[static_cast<std::size_t>(base - ratios.begin())].auc_roc;
    for (std::size_t r = 0; r < R; ++r) {
      SweepRow row;
      row.variant = variants[v];
      row.noise_kind = std::string(to_string(kind));
      row.ratio = ratios[r];
      row.mean = means[r];
      row.degradation = ratios[r] == 0.0 ? 0.0 : (auc0 - means[r].auc_roc) / auc0;
      out.rows.push_back(row);
    }
  }
  return out;
}

void write_report_jsonl(std::ostream& out, const MetricsReport& report) {
  const nlohmann::json config(report.config);
  for (const auto& f : report.folds) {
    nlohmann::json curve = nlohmann::json::array();
    for (const auto& e : f.curve) {
      nlohmann::json rec = {{"epoch", e.epoch}, {"train_loss", e.train_loss}, {"task_loss", e.task_loss}};
      rec["valid_auc"] = e.valid_auc ? nlohmann::json(*e.valid_auc) : nlohmann::json(nullptr);
      curve.push_back(std::move(rec));
    }
    nlohmann::json rec = {{"record", "fold"},
                          {"variant", report.variant},
                          {"noise_kind", report.noise_kind},
                          {"ratio", report.ratio},
                          {"seed", report.seed},
                          {"fold", f.fold},
                          {"train_size", f.train_size},
                          {"valid_size", f.valid_size},
                          {"test_size", f.test_size},
                          {"epochs_run", f.epochs_run},
                          {"best_epoch", f.best_epoch},
                          {"train_cross_entropy", f.train_cross_entropy},
                          {"test", metrics_json(f.test)},
                          {"curve", std::move(curve)},
                          {"config", config}};
    out << rec.dump() << '\n';
  }
  auto summary = [](const Summary& s) { return nlohmann::json{{"mean", s.mean}, {"std", s.std}}; };
  nlohmann::json rec = {{"record", "summary"},
                        {"variant", report.variant},
                        {"noise_kind", report.noise_kind},
                        {"ratio", report.ratio},
                        {"seed", report.seed},
                        {"folds", report.folds.size()},
                        {"auc_roc", summary(report.auc_roc)},
                        {"auc_pr", summary(report.auc_pr)},
                        {"micro_f1", summary(report.micro_f1)},
                        {"micro_recall", summary(report.micro_recall)},
                        {"wall_seconds", report.wall_seconds},
                        {"config", config}};
  out << rec.dump() << '\n';
}

void write_summary_csv(std::ostream& out, const MetricsReport& report) {
  out << kSummaryHeader << '\n';
  auto row = [&](const std::string& fold, double a, double b, double c, double d) {
    out << report.variant << ',' << report.noise_kind << ',' << number(report.ratio) << ',' << fold << ','
        << number(a) << ',' << number(b) << ',' << number(c) << ',' << number(d) << ",\n";
  };
  for (const auto& f : report.folds)
    row(std::to_string(f.fold), f.test.auc_roc, f.test.auc_pr, f.test.micro_f1, f.test.micro_recall);
  row("mean", report.auc_roc.mean, report.auc_pr.mean, report.micro_f1.mean, report.micro_recall.mean);
}

void write_summary_csv(std::ostream& out, const SweepReport& report) {
  out << kSummaryHeader << '\n';
  for (const auto& r : report.rows) {
    out << r.variant << ',' << r.noise_kind << ',' << number(r.ratio) << ",mean," << number(r.mean.auc_roc) << ','
        << number(r.mean.auc_pr) << ',' << number(r.mean.micro_f1) << ',' << number(r.mean.micro_recall) << ','
        << number(r.degradation) << '\n';
  }
}

}  // namespace dlp::harness
