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

#include "dlp/harness/gradcheck.hpp"

#include "dlp/common/error.hpp"
#include "dlp/common/rng.hpp"
#include "dlp/harness/experiment.hpp"
#include "dlp/harness/synthetic.hpp"

namespace dlp::harness {

GradcheckOutcome end_to_end_gradcheck(const GradcheckOptions& options) {
  SyntheticConfig sc;
  sc.drugs = 6;
  sc.genes = 10;
  sc.diseases = 4;
  sc.links = 20;
  sc.seed = options.seed;
  const auto bench = generate_synthetic(sc);

  TrainConfig cfg;
  cfg.seed = options.seed;
  cfg.local.max_nodes = 12;
  cfg.pretrain.dim = options.dim;
  cfg.pretrain.epochs = 20;
  cfg.pretrain.double_precision = true;
  const auto smoothed = kg::smooth_relations(bench.graph, bench.smoothing);
  auto metapaths = task_metapaths(smoothed, bench.links.examples, 2);
  const auto ws = prepare_workspace(bench.graph, bench.smoothing, bench.links.examples, std::move(metapaths), cfg);

  // First positive and first negative whose subgraphs carry some structure.
  std::vector<std::size_t> chosen;
  for (std::uint32_t want : {1u, 0u}) {
    for (std::size_t i = 0; i < bench.links.examples.size(); ++i) {
      if (bench.links.examples[i].labels.at(0) != want) continue;
      if (ws.local[i].nodes.size() < 3 || ws.local[i].observed_edges.empty()) continue;
      chosen.push_back(i);
      break;
    }
  }
  if (chosen.size() != 2) throw ExhaustedError("gradcheck: no suitable links on the planted graph");

  model::ModelConfig mc;
  mc.estimator = options.estimator;
  mc.hidden = options.hidden;
  mc.fine_tune = true;
  model::DenoisedLP<double> net(mc, ws.table.entity, ws.relation_features, options.seed);

  Rng rng(Rng::mix(options.seed));
  std::vector<ad::Tensor<double>> eps;
  std::vector<model::LinkInput> inputs;
  std::vector<std::vector<std::uint32_t>> labels;
  for (auto i : chosen) {
    ad::Tensor<double> e(ws.local[i].candidate_pairs.size(), 1);
    for (auto& v : e.values()) v = rng.uniform(0.05, 0.95);
    eps.push_back(std::move(e));
    inputs.push_back({&ws.local[i], &ws.semantic[i]});
    labels.push_back(bench.links.examples[i].labels);
  }

  auto params = net.trainable();
  for (auto* p : params)
    for (auto& v : p->value.values()) v += rng.uniform(-options.jitter, options.jitter);
  GradcheckOutcome out;
  out.entities = bench.graph.entity_count();
  out.triples = bench.graph.triple_count();
  for (auto* p : params) out.parameters += p->value.size();
  out.report = ad::grad_check(
      [&](ad::Tape<double>& tape) {
        model::ForwardOptions<double> fo;
        fo.train = true;
        fo.epsilon = eps;
        return net.loss(net.forward(tape, inputs, fo), labels).total;
      },
      params, options.epsilon);
  return out;
}

}  // namespace dlp::harness
