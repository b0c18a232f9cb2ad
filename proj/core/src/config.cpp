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

#include "specmtm/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace specmtm::cli {

namespace {

using nlohmann::json;

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

json to_json(const RunConfig& c) {
  json j;
  j["dataset"] = {{"format", c.dataset.format},
                  {"train_path", c.dataset.train_path},
                  {"test_path", c.dataset.test_path},
                  {"train_fraction", c.dataset.train_fraction},
                  {"normalize", c.dataset.normalize},
                  {"synthetic",
                   {{"classes", c.dataset.synthetic.classes},
                    {"class_frequencies", c.dataset.synthetic.class_frequencies},
                    {"amplitude", c.dataset.synthetic.amplitude},
                    {"noise_sigma", c.dataset.synthetic.noise_sigma},
                    {"count", c.dataset.synthetic.count},
                    {"length", c.dataset.synthetic.length},
                    {"channels", c.dataset.synthetic.channels}}}};
  j["model"] = {{"hidden", c.model.hidden},
                {"encoder_layers", c.model.encoder_layers},
                {"decoder_layers", c.model.decoder_layers},
                {"heads", c.model.heads},
                {"window", c.model.window},
                {"ffn_hidden", c.model.ffn_hidden},
                {"cim_activation", c.model.cim_activation},
                {"cbd_enabled", c.model.cbd_enabled}};
  j["masking"] = {{"ratio", c.masking.ratio}};
  j["ser"] = {{"order", c.ser.order}, {"per_channel", c.ser.per_channel}};
  j["loss"] = {{"gamma", c.loss.gamma}, {"freq_dual", c.loss.freq_dual}};
  j["optimizer"] = {{"lr", c.optimizer.lr},
                    {"beta1", c.optimizer.beta1},
                    {"beta2", c.optimizer.beta2},
                    {"weight_decay", c.optimizer.weight_decay},
                    {"eps", c.optimizer.eps}};
  j["training"] = {{"batch_size", c.training.batch_size},
                   {"epochs", c.training.epochs},
                   {"probe_epochs", c.training.probe_epochs},
                   {"finetune_epochs", c.training.finetune_epochs},
                   {"precision", c.training.precision}};
  j["seed"] = c.seed;
  j["out_dir"] = c.out_dir;
  return j;
}

void flatten(const json& j, const std::string& prefix,
             std::vector<std::pair<std::string, std::string>>& out) {
  if (j.is_object()) {
    for (const auto& [key, value] : j.items()) {
      flatten(value, prefix.empty() ? key : prefix + "." + key, out);
    }
  } else {
    out.emplace_back(prefix, j.dump());
  }
}

}  // namespace

RunConfig RunConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_json_text(buf.str(), path);
}

RunConfig RunConfig::from_json_text(const std::string& text,
                                    const std::string& origin) {
  json j;
  try {
    j = json::parse(text);
  } catch (const std::exception& e) {
    throw std::runtime_error("config " + origin + ": " + e.what());
  }
  RunConfig c;
  if (j.contains("dataset")) {
    const json& d = j["dataset"];
    read(d, "format", c.dataset.format);
    read(d, "train_path", c.dataset.train_path);
    read(d, "test_path", c.dataset.test_path);
    read(d, "train_fraction", c.dataset.train_fraction);
    read(d, "normalize", c.dataset.normalize);
    if (d.contains("synthetic")) {
      const json& s = d["synthetic"];
      read(s, "classes", c.dataset.synthetic.classes);
      read(s, "class_frequencies", c.dataset.synthetic.class_frequencies);
      read(s, "amplitude", c.dataset.synthetic.amplitude);
      read(s, "noise_sigma", c.dataset.synthetic.noise_sigma);
      read(s, "count", c.dataset.synthetic.count);
      read(s, "length", c.dataset.synthetic.length);
      read(s, "channels", c.dataset.synthetic.channels);
    }
  }
  if (j.contains("model")) {
    const json& m = j["model"];
    read(m, "hidden", c.model.hidden);
    read(m, "encoder_layers", c.model.encoder_layers);
    read(m, "decoder_layers", c.model.decoder_layers);
    read(m, "heads", c.model.heads);
    read(m, "window", c.model.window);
    read(m, "ffn_hidden", c.model.ffn_hidden);
    read(m, "cim_activation", c.model.cim_activation);
    read(m, "cbd_enabled", c.model.cbd_enabled);
  }
  if (j.contains("masking")) read(j["masking"], "ratio", c.masking.ratio);
  if (j.contains("ser")) {
    read(j["ser"], "order", c.ser.order);
    read(j["ser"], "per_channel", c.ser.per_channel);
  }
  if (j.contains("loss")) {
    read(j["loss"], "gamma", c.loss.gamma);
    read(j["loss"], "freq_dual", c.loss.freq_dual);
  }
  if (j.contains("optimizer")) {
    const json& o = j["optimizer"];
    read(o, "lr", c.optimizer.lr);
    read(o, "beta1", c.optimizer.beta1);
    read(o, "beta2", c.optimizer.beta2);
    read(o, "weight_decay", c.optimizer.weight_decay);
    read(o, "eps", c.optimizer.eps);
  }
  if (j.contains("training")) {
    const json& t = j["training"];
    read(t, "batch_size", c.training.batch_size);
    read(t, "epochs", c.training.epochs);
    read(t, "probe_epochs", c.training.probe_epochs);
    read(t, "finetune_epochs", c.training.finetune_epochs);
    read(t, "precision", c.training.precision);
  }
  read(j, "seed", c.seed);
  read(j, "out_dir", c.out_dir);
  return c;
}

std::string RunConfig::to_json_text() const { return to_json(*this).dump(2); }

void RunConfig::validate() const {
  auto fail = [](const std::string& msg) {
    throw std::invalid_argument("config: " + msg);
  };
  if (dataset.format != "ts" && dataset.format != "tsv" &&
      dataset.format != "synthetic") {
    fail("dataset.format must be one of ts, tsv, synthetic (got '" +
         dataset.format + "')");
  }
  if (dataset.format != "synthetic") {
    if (dataset.train_path.empty()) {
      fail("dataset.train_path is required for format '" + dataset.format + "'");
    }
    if (dataset.test_path.empty()) {
      fail("dataset.test_path is required for format '" + dataset.format + "'");
    }
  } else {
    if (dataset.synthetic.classes == 0 ||
        dataset.synthetic.class_frequencies.size() != dataset.synthetic.classes) {
      fail("dataset.synthetic.class_frequencies must list one set per class");
    }
    if (dataset.train_fraction <= 0.0 || dataset.train_fraction >= 1.0) {
      fail("dataset.train_fraction must lie strictly between 0 and 1");
    }
  }
  if (model.hidden == 0) fail("model.hidden must be positive");
  if (model.heads == 0 || model.hidden % model.heads != 0) {
    fail("model.hidden (" + std::to_string(model.hidden) +
         ") must be divisible by model.heads (" + std::to_string(model.heads) +
         ")");
  }
  if (model.encoder_layers == 0) fail("model.encoder_layers must be >= 1");
  if (model.decoder_layers == 0) fail("model.decoder_layers must be >= 1");
  if (model.window == 0) fail("model.window must be >= 1");
  if (model.cim_activation != "relu" && model.cim_activation != "tanh") {
    fail("model.cim_activation must be 'relu' or 'tanh'");
  }
  if (masking.ratio < 0.0 || masking.ratio > 1.0) {
    fail("masking.ratio must lie in [0, 1]");
  }
  if (ser.order < 1) fail("ser.order must be >= 1");
  if (loss.gamma < 0.0) fail("loss.gamma must be >= 0");
  if (optimizer.lr <= 0.0) fail("optimizer.lr must be positive");
  if (optimizer.beta1 < 0.0 || optimizer.beta1 >= 1.0 ||
      optimizer.beta2 < 0.0 || optimizer.beta2 >= 1.0) {
    fail("optimizer betas must lie in [0, 1)");
  }
  if (training.batch_size == 0) fail("training.batch_size must be >= 1");
  if (training.epochs == 0) fail("training.epochs must be >= 1");
  if (training.precision != "f64" && training.precision != "f32") {
    fail("training.precision must be 'f64' or 'f32'");
  }
}

std::vector<std::string> RunConfig::overrides_from_defaults() const {
  std::vector<std::pair<std::string, std::string>> mine, defaults;
  flatten(to_json(*this), "", mine);
  flatten(to_json(RunConfig{}), "", defaults);
  std::vector<std::string> out;
  for (std::size_t i = 0; i < mine.size() && i < defaults.size(); ++i) {
    if (mine[i].second != defaults[i].second) {
      out.push_back(mine[i].first + ": " + defaults[i].second + " -> " +
                    mine[i].second);
    }
  }
  return out;
}

}  // namespace specmtm::cli
