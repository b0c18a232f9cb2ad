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

#ifndef SPECMTM_DATA_HPP
#define SPECMTM_DATA_HPP

#include <string>
#include <vector>

#include "specmtm/batch.hpp"

namespace specmtm::data {

struct DatasetMeta {
  std::string name;
  std::size_t examples = 0;
  std::size_t length = 0;
  std::size_t channels = 0;
  std::size_t classes = 0;
  std::string type_tag;
  std::vector<std::string> label_names;  // header order for .ts
};

struct Dataset {
  TimeSeriesBatch batch;
  DatasetMeta meta;
};

/// sktime-style .ts reader: '@'-prefixed header (problemName, univariate or
/// dimensions, classLabel with the label list), then @data; each line holds
/// one series per dimension joined by ':' with the class label last. Labels
/// map to 0-based indices in header order. Ragged or missing ('?') values
/// are rejected with the offending line number.
Dataset parse_ts(const std::string& path);
void write_ts(const std::string& path, const TimeSeriesBatch& batch,
              const DatasetMeta& meta);

/// UCR tab-separated reader: first column is an integer class label, the
/// rest is the univariate series. Labels are remapped to contiguous 0-based
/// indices in ascending order.
Dataset parse_tsv(const std::string& path);
void write_tsv(const std::string& path, const TimeSeriesBatch& batch,
               const std::vector<int>& raw_labels);

/// Synthetic classification corpus: each sample is the sum of sinusoids at
/// its class's frequency bins (random phase per sinusoid) plus Gaussian
/// noise. Frequencies at or above Nyquist (L/2) are rejected.
struct SyntheticSpec {
  std::size_t classes = 3;
  std::vector<std::vector<double>> class_frequencies;
  double amplitude = 1.0;
  double noise_sigma = 0.1;
  std::size_t count = 600;
  std::size_t length = 128;
  std::size_t channels = 2;
};
TimeSeriesBatch synth_generate(const SyntheticSpec& spec, std::uint64_t seed);

/// Per-channel z-score statistics from a training split. Channels with
/// near-zero deviation (< 1e-8) are centered only.
struct NormStats {
  std::vector<double> mean;
  std::vector<double> stddev;  // 1.0 where degenerate
};
NormStats compute_norm_stats(const TimeSeriesBatch& train);
TimeSeriesBatch normalize(const TimeSeriesBatch& batch, const NormStats& stats);

}  // namespace specmtm::data

#endif  // SPECMTM_DATA_HPP
