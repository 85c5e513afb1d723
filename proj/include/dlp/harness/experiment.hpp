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

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "dlp/diffcore/checkpoint.hpp"
#include "dlp/harness/config.hpp"
#include "dlp/harness/metrics.hpp"
#include "dlp/kgstore/knowledge_graph.hpp"
#include "dlp/kgstore/links.hpp"
#include "dlp/kgstore/sampling.hpp"
#include "dlp/kgstore/smoothing.hpp"
#include "dlp/model/denoised_lp.hpp"
#include "dlp/pretrain/rotate.hpp"
#include "dlp/subgraph/local.hpp"
#include "dlp/subgraph/semantic.hpp"

namespace dlp::harness {

struct TrainConfig {
  std::uint64_t seed = 1;
  bool double_precision = false;
  model::ModelConfig model;
  sub::LocalConfig local;
  std::size_t metapath_max_len = sub::kDefaultMetapathLength;
  std::string metapath_file;
  embed::PretrainConfig pretrain;
  std::string table_path;
  std::size_t epochs = 100;
  std::size_t batch_size = 32;
  double lr = 1e-3;
  double weight_decay = 0.0;
  std::size_t patience = 20;  // 0 disables early stopping
  double target_loss = 0.0;   // 0 disables
  std::size_t folds = 10;
  std::size_t max_folds = 0;  // 0 runs every fold
  bool stratify = true;
  /// Worker threads for folds and sweep cells; results do not depend on it.
  std::size_t jobs = 1;
  /// Effective key/value configuration echoed into every report.
  std::map<std::string, std::string> echo;
};

/// Validates and converts a RunConfig. Throws ConfigError on bad values.
TrainConfig train_config(const RunConfig& config);

struct Dataset {
  kg::KnowledgeGraph graph;
  kg::SmoothingMap smoothing;
  kg::LinkSet links;
};

struct DatasetPaths {
  std::string triples;
  std::string types;      // optional
  std::string smoothing;  // optional; absent means every relation is kept
  std::string links;
};

/// Loads the TSV inputs. `negatives` of none keeps the links as given.
Dataset load_dataset(const DatasetPaths& paths, const RunConfig& config);

/// Metapaths for every (head type, tail type) pair among the examples.
std::vector<sub::Metapath> task_metapaths(const kg::KnowledgeGraph& smoothed,
                                          const std::vector<kg::LinkExample>& examples, std::size_t max_len);

/// Relation features over the smoothed vocabulary: each smoothed relation
/// takes the mean rotation vector of the raw relations mapped onto it
/// (zeros when none is).
ad::Tensor<double> smoothed_relation_features(const embed::EmbeddingTable& table, const kg::KnowledgeGraph& raw,
                                              const kg::KnowledgeGraph& smoothed, const kg::SmoothingMap& map);

/// Everything derived from one, possibly contaminated, knowledge graph.
struct Workspace {
  kg::KnowledgeGraph graph;
  kg::KnowledgeGraph smoothed;
  embed::EmbeddingTable table;
  ad::Tensor<double> relation_features;
  std::vector<sub::Metapath> metapaths;
  /// Subgraphs per example of the dataset, in example order.
  std::vector<sub::LocalSubgraph> local;
  std::vector<sub::SemanticSubgraph> semantic;
};

/// Smooths `graph`, pretrains (or takes `table`) and extracts both subgraphs
/// of every example.
Workspace prepare_workspace(kg::KnowledgeGraph graph, const kg::SmoothingMap& smoothing,
                            const std::vector<kg::LinkExample>& examples, std::vector<sub::Metapath> metapaths,
                            const TrainConfig& config, const embed::EmbeddingTable* table = nullptr);

struct Metrics {
  double auc_roc = 0.0;
  double auc_pr = 0.0;
  double micro_f1 = 0.0;
  double micro_recall = 0.0;
  friend bool operator==(const Metrics&, const Metrics&) = default;
};

/// Scores per task mode: binary uses the positive probability; multi-class
/// and multi-label flatten (link, class) into independent binary instances
/// for AUC. Micro counts use argmax for multi-class and a 0.5 threshold
/// otherwise. Throws PreconditionError when a class is missing for AUC.
Metrics score_predictions(const ad::Tensor<double>& probs, const std::vector<kg::LinkExample>& examples,
                          kg::TaskMode mode, std::size_t classes);

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;  // mean total loss over batches
  double task_loss = 0.0;   // mean task loss over batches
  std::optional<double> valid_auc;
  friend bool operator==(const EpochRecord&, const EpochRecord&) = default;
};

struct FoldReport {
  std::size_t fold = 0;
  std::size_t train_size = 0, valid_size = 0, test_size = 0;
  std::size_t epochs_run = 0;
  /// Epoch of the selected model; 0 is the initialization.
  std::size_t best_epoch = 0;
  /// Eval-mode cross-entropy of the selected model on its training links.
  double train_cross_entropy = 0.0;
  Metrics test;
  std::vector<EpochRecord> curve;
  friend bool operator==(const FoldReport&, const FoldReport&) = default;
};

struct MetricsReport {
  std::string variant;
  std::string noise_kind = "none";
  double ratio = 0.0;
  std::uint64_t seed = 0;
  std::vector<FoldReport> folds;
  Summary auc_roc, auc_pr, micro_f1, micro_recall;
  std::map<std::string, std::string> config;
  double wall_seconds = 0.0;
};

/// Raised on a non-finite loss; carries the last finite model.
class TrainingAborted : public NumericError {
 public:
  TrainingAborted(const std::string& what, ad::Checkpoint last_good)
      : NumericError(what), last_good_(std::move(last_good)) {}
  const ad::Checkpoint& last_good() const { return last_good_; }

 private:
  ad::Checkpoint last_good_;
};

struct FoldResult {
  FoldReport report;
  ad::Checkpoint checkpoint;  // selected model
};

/// Trains one fold on a prepared workspace. `examples` must be the example
/// list the workspace was prepared for; split entries are matched to it.
FoldResult train_fold(const Workspace& ws, const kg::LinkSet& links, const kg::DatasetSplit& split,
                      const TrainConfig& config);

struct TrainOutcome {
  MetricsReport report;
  std::vector<ad::Checkpoint> checkpoints;  // per fold
};

/// Seeded k-fold splits, truncated to max_folds when set.
std::vector<kg::DatasetSplit> cv_splits(const kg::LinkSet& links, const TrainConfig& config);

/// Pretrains, splits and cross-validates on the dataset.
TrainOutcome train(const Dataset& data, const TrainConfig& config);

/// Eval-mode metrics of a stored model on the given examples. Throws
/// ShapeError when the checkpoint does not fit the graph.
MetricsReport evaluate(const ad::Checkpoint& checkpoint, const Dataset& data, const TrainConfig& config);

/// Summary statistics over folds.
void summarize_folds(MetricsReport& report);

enum class NoiseKind { structural, semantic };
NoiseKind parse_noise_kind(std::string_view name);
std::string_view to_string(NoiseKind kind);

/// full, wo_srl, wo_ssp, wo_mi.
model::Ablation parse_variant(std::string_view name);
std::string variant_name(const model::Ablation& ablate);

struct SweepRow {
  std::string variant;
  std::string noise_kind;
  double ratio = 0.0;
  Metrics mean;  // over seeds and folds
  double degradation = 0.0;
  friend bool operator==(const SweepRow&, const SweepRow&) = default;
};

struct SweepReport {
  std::vector<SweepRow> rows;  // variant-major, ratios in the given order
  std::vector<MetricsReport> cells;
};

/// For each ratio and seed the KG is contaminated, re-smoothed and
/// re-pretrained; every variant is then cross-validated on the unchanged
/// examples. The ratio list must contain 0, the degradation baseline.
SweepReport noise_sweep(const Dataset& data, const std::vector<double>& ratios, NoiseKind kind,
                        const std::vector<std::string>& variants, const std::vector<std::uint64_t>& seeds,
                        const TrainConfig& config);

/// One JSON object per fold plus one aggregate record.
void write_report_jsonl(std::ostream& out, const MetricsReport& report);
/// Columns variant, noise_kind, ratio, fold, auc_roc, auc_pr, micro_f1,
/// micro_recall, degradation; one row per fold plus a "mean" row.
void write_summary_csv(std::ostream& out, const MetricsReport& report);
void write_summary_csv(std::ostream& out, const SweepReport& report);

inline constexpr const char* kSummaryHeader =
    "variant,noise_kind,ratio,fold,auc_roc,auc_pr,micro_f1,micro_recall,degradation";

}  // namespace dlp::harness
