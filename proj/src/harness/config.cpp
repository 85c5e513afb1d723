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

#include "dlp/harness/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>

#include "dlp/common/error.hpp"
#include "dlp/kgstore/tsv.hpp"

namespace dlp::harness {

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = {
      {"seed", "1", "master random seed"},
      {"task_mode", "binary", "binary | multi_class | multi_label"},
      {"precision", "f32", "f32 | f64 training arithmetic"},
      {"subgraph.hops", "2", "k of the k-hop enclosing subgraph"},
      {"subgraph.max_nodes", "64", "cap on local subgraph nodes"},
      {"metapath.max_len", "3", "longest default metapath"},
      {"metapath.file", "", "metapaths.tsv overriding the defaults"},
      {"smoothing.unmapped", "keep", "keep | drop | strict for relations absent from the smoothing map"},
      {"negatives.mode", "none", "none | balanced_per_head | counterpart_per_positive"},
      {"pretrain.dim", "32", "complex embedding dimension"},
      {"pretrain.epochs", "100", "pretraining epochs"},
      {"pretrain.lr", "0.01", "pretraining learning rate"},
      {"pretrain.margin", "6", "margin of the ranking loss"},
      {"pretrain.negatives", "4", "negatives per positive triple"},
      {"pretrain.batch", "256", "pretraining mini-batch"},
      {"pretrain.self_adversarial", "false", "softmax-weighted negatives"},
      {"pretrain.table", "", "load embeddings from this checkpoint instead of pretraining"},
      {"train.epochs", "100", "maximum training epochs"},
      {"train.batch", "32", "links per mini-batch"},
      {"train.lr", "0.001", "learning rate"},
      {"train.weight_decay", "0", "L2 penalty folded into the update"},
      {"train.patience", "20", "evaluations without validation improvement before stopping"},
      {"train.target_loss", "0", "stop once the training cross-entropy falls below this (0 disables)"},
      {"cv.folds", "10", "cross-validation folds"},
      {"cv.max_folds", "0", "run only the first N folds (0 = all)"},
      {"cv.stratify", "true", "stratify folds by class"},
      {"estimator.kind", "attention", "attention | mlp | weighted_cosine | cosine"},
      {"projection.activation", "relu", "relu | identity inside the projection MLP"},
      {"srl.temperature", "1.0", "Concrete relaxation temperature t"},
      {"mi.tau", "0.5", "InfoNCE temperature"},
      {"mi.lambda", "0.1", "weight of the InfoNCE term"},
      {"gcn.layers", "2", "local encoder depth"},
      {"rgnn.layers", "2", "semantic encoder depth"},
      {"rgnn.self_term", "true", "add W_0 x_i to each R-GNN layer"},
      {"hidden_dim", "64", "hidden width d_h"},
      {"fine_tune", "false", "train the pretrained features too"},
      {"ablate.srl", "false", "use the observed local graph"},
      {"ablate.ssp", "false", "drop the semantic branch"},
      {"ablate.mi", "false", "drop the InfoNCE term"},
      {"noise.kind", "structural", "structural | semantic"},
      {"noise.ratios", "0,0.25,0.5,0.75", "noise proportions of |triples|"},
      {"noise.variants", "full,wo_srl,wo_ssp,wo_mi", "variants evaluated per ratio"},
      {"noise.seeds", "1", "comma-separated seeds averaged per cell"},
  };
  return keys;
}

bool is_config_key(std::string_view key) {
  const auto& keys = config_keys();
  return std::any_of(keys.begin(), keys.end(), [&](const ConfigKey& k) { return k.name == key; });
}

void RunConfig::set(std::string_view key, std::string_view value) {
  if (!is_config_key(key)) throw ConfigError("unknown configuration key '" + std::string(key) + "'");
  values_[std::string(key)] = std::string(value);
}

void RunConfig::merge_file(std::istream& in) {
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto body = kg::trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string_view::npos) throw ParseError(number, "expected key = value");
    const auto key = kg::trim(body.substr(0, eq));
    if (!is_config_key(key)) throw ParseError(number, "unknown configuration key '" + std::string(key) + "'");
    set(key, kg::trim(body.substr(eq + 1)));
  }
}

void RunConfig::merge_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config file " + path);
  merge_file(in);
}

std::string RunConfig::get(std::string_view key) const {
  if (auto it = values_.find(std::string(key)); it != values_.end()) return it->second;
  for (const auto& k : config_keys())
    if (k.name == key) return std::string(k.default_value);
  throw ConfigError("unknown configuration key '" + std::string(key) + "'");
}

namespace {

template <typename N>
N parse_number(std::string_view key, const std::string& text) {
  N value{};
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) throw ConfigError("bad value '" + text + "' for " + std::string(key));
  return value;
}

}  // namespace

std::int64_t RunConfig::get_int(std::string_view key) const { return parse_number<std::int64_t>(key, get(key)); }

std::size_t RunConfig::get_size(std::string_view key) const {
  const auto v = get_int(key);
  if (v < 0) throw ConfigError(std::string(key) + " must be non-negative");
  return static_cast<std::size_t>(v);
}

std::uint64_t RunConfig::get_u64(std::string_view key) const { return parse_number<std::uint64_t>(key, get(key)); }

double RunConfig::get_double(std::string_view key) const { return parse_number<double>(key, get(key)); }

bool RunConfig::get_bool(std::string_view key) const {
  const auto v = get(key);
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError("bad boolean '" + v + "' for " + std::string(key));
}

std::vector<std::string> RunConfig::get_list(std::string_view key) const {
  std::vector<std::string> out;
  const auto text = get(key);
  std::string_view rest = text;
  while (!rest.empty()) {
    const auto cut = rest.find(',');
    const auto item = kg::trim(rest.substr(0, cut));
    if (!item.empty()) out.emplace_back(item);
    if (cut == std::string_view::npos) break;
    rest.remove_prefix(cut + 1);
  }
  return out;
}

std::vector<double> RunConfig::get_doubles(std::string_view key) const {
  std::vector<double> out;
  for (const auto& item : get_list(key)) out.push_back(parse_number<double>(key, item));
  return out;
}

std::map<std::string, std::string> RunConfig::effective() const {
  std::map<std::string, std::string> out;
  for (const auto& k : config_keys()) out[std::string(k.name)] = get(k.name);
  return out;
}

}  // namespace dlp::harness
