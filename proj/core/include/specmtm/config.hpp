// Copyright 2026 The specmtm authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SPECMTM_CONFIG_HPP
#define SPECMTM_CONFIG_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "specmtm/data.hpp"

namespace specmtm::cli {

/// Full run configuration. Defaults replicate the published training setup
/// (hidden 128, 8 encoder layers, 2 decoder layers, mask ratio 0.75, K = 12,
/// batch 128, AdamW lr 1e-4 / decay 3e-4 / betas 0.9, 0.99, gamma 0.5).
struct RunConfig {
  struct Dataset {
    std::string format = "synthetic";  // "ts" | "tsv" | "synthetic"
    std::string train_path;
    std::string test_path;
    data::SyntheticSpec synthetic{
        3, {{3.0, 5.0}, {9.0, 11.0}, {17.0, 19.0}}, 1.0, 0.1, 600, 128, 2};
    double train_fraction = 0.75;  // synthetic split
    bool normalize = true;
  } dataset;

  struct Model {
    std::size_t hidden = 128;
    std::size_t encoder_layers = 8;
    std::size_t decoder_layers = 2;
    std::size_t heads = 4;
    std::size_t window = 8;
    std::size_t ffn_hidden = 0;  // 0 -> 4 * hidden
    std::string cim_activation = "relu";  // "relu" | "tanh"
    bool cbd_enabled = true;
  } model;

  struct Masking {
    double ratio = 0.75;
  } masking;

  struct Ser {
    std::size_t order = 12;
    bool per_channel = false;
  } ser;

  struct Loss {
    double gamma = 0.5;
    bool freq_dual = true;
  } loss;

  struct Optimizer {
    double lr = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.99;
    double weight_decay = 3e-4;
    double eps = 1e-8;
  } optimizer;

  struct Training {
    std::size_t batch_size = 128;
    std::size_t epochs = 20;
    std::size_t probe_epochs = 200;
    std::size_t finetune_epochs = 20;
    std::string precision = "f64";  // "f64" | "f32"
  } training;

  std::uint64_t seed = 42;
  std::string out_dir = "run";

  static RunConfig from_file(const std::string& path);
  static RunConfig from_json_text(const std::string& text,
                                  const std::string& origin = "<inline>");
  std::string to_json_text() const;
  /// Throws with an actionable message on the first invalid field.
  void validate() const;
  /// "key: default -> value" lines for every field differing from defaults.
  std::vector<std::string> overrides_from_defaults() const;
};

}  // namespace specmtm::cli

#endif  // SPECMTM_CONFIG_HPP
