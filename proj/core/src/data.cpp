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

#include "specmtm/data.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "specmtm/rng.hpp"

namespace specmtm::data {

namespace {

[[noreturn]] void parse_error(const std::string& path, std::size_t line_no,
                              const std::string& message) {
  throw std::runtime_error(path + ":" + std::to_string(line_no) + ": " +
                           message);
}

std::string trimmed(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::string lowered(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

std::vector<std::string> split(const std::string& s, char delim) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(s);
  while (std::getline(is, item, delim)) out.push_back(item);
  return out;
}

double parse_value(const std::string& token, const std::string& path,
                   std::size_t line_no) {
  const std::string t = trimmed(token);
  if (t == "?") {
    parse_error(path, line_no, "missing value '?' is not supported");
  }
  try {
    std::size_t pos = 0;
    const double v = std::stod(t, &pos);
    if (pos != t.size()) throw std::invalid_argument(t);
    return v;
  } catch (const std::exception&) {
    parse_error(path, line_no, "cannot parse value '" + t + "'");
  }
}

}  // namespace

Dataset parse_ts(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");

  DatasetMeta meta;
  meta.name = path;
  bool has_class_labels = false;
  bool saw_data = false;
  std::size_t declared_dims = 0;
  std::map<std::string, int> label_index;

  std::string line;
  std::size_t line_no = 0;
  std::vector<std::vector<double>> flat_rows;  // per sample, dim-major values
  std::vector<int> labels;
  std::size_t length = 0, dims = 0;

  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trimmed(line);
    if (t.empty() || t[0] == '#') continue;
    if (!saw_data) {
      if (t[0] != '@') {
        parse_error(path, line_no, "expected '@' header line before @data");
      }
      std::istringstream is(t);
      std::string key;
      is >> key;
      key = lowered(key);
      if (key == "@problemname") {
        is >> meta.name;
      } else if (key == "@univariate") {
        std::string v;
        is >> v;
        if (lowered(v) == "true") declared_dims = 1;
      } else if (key == "@dimensions") {
        is >> declared_dims;
      } else if (key == "@classlabel") {
        std::string flag;
        is >> flag;
        has_class_labels = lowered(flag) == "true";
        std::string name;
        while (is >> name) {
          label_index.emplace(name, static_cast<int>(meta.label_names.size()));
          meta.label_names.push_back(name);
        }
      } else if (key == "@data") {
        saw_data = true;
      }
      // Other headers (@timestamps, @equallength, ...) carry no content we need.
      continue;
    }

    std::vector<std::string> fields = split(t, ':');
    if (has_class_labels) {
      if (fields.size() < 2) {
        parse_error(path, line_no, "expected ':'-separated dimensions and label");
      }
    } else if (fields.empty()) {
      parse_error(path, line_no, "empty data line");
    }
    const std::size_t sample_dims = fields.size() - (has_class_labels ? 1 : 0);
    if (dims == 0) {
      dims = sample_dims;
      if (declared_dims != 0 && declared_dims != dims) {
        parse_error(path, line_no,
                    "dimension count " + std::to_string(dims) +
                        " contradicts header " + std::to_string(declared_dims));
      }
    } else if (sample_dims != dims) {
      parse_error(path, line_no, "expected " + std::to_string(dims) +
                                     " dimensions, got " +
                                     std::to_string(sample_dims));
    }

    std::vector<double> row;
    for (std::size_t dim = 0; dim < dims; ++dim) {
      std::vector<std::string> tokens = split(fields[dim], ',');
      if (length == 0 && dim == 0) {
        length = tokens.size();
      }
      if (tokens.size() != length) {
        parse_error(path, line_no,
                    "ragged series: dimension " + std::to_string(dim) +
                        " has " + std::to_string(tokens.size()) +
                        " values, expected " + std::to_string(length));
      }
      for (const auto& tok : tokens) {
        row.push_back(parse_value(tok, path, line_no));
      }
    }
    if (has_class_labels) {
      const std::string label = trimmed(fields.back());
      auto it = label_index.find(label);
      if (it == label_index.end()) {
        parse_error(path, line_no, "unknown class label '" + label + "'");
      }
      labels.push_back(it->second);
    }
    flat_rows.push_back(std::move(row));
  }
  if (!saw_data) {
    throw std::runtime_error(path + ": missing @data section");
  }

  const std::size_t n = flat_rows.size();
  Dataset ds;
  ds.meta = meta;
  ds.meta.examples = n;
  ds.meta.length = length;
  ds.meta.channels = dims;
  ds.meta.classes = meta.label_names.size();
  if (ds.meta.type_tag.empty()) ds.meta.type_tag = "TS";

  // Rows hold dimension-major values; the tensor is time-major with one
  // column per dimension.
  Tensor values({n, length, dims});
  auto& v = values.mut();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t dim = 0; dim < dims; ++dim) {
      for (std::size_t t = 0; t < length; ++t) {
        v[(i * length + t) * dims + dim] = flat_rows[i][dim * length + t];
      }
    }
  }
  ds.batch.values = std::move(values);
  ds.batch.labels = std::move(labels);
  ds.batch.has_labels = has_class_labels;
  return ds;
}

void write_ts(const std::string& path, const TimeSeriesBatch& batch,
              const DatasetMeta& meta) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out.precision(17);
  out << "@problemName " << (meta.name.empty() ? "unnamed" : meta.name) << "\n";
  if (batch.channels() == 1) {
    out << "@univariate true\n";
  } else {
    out << "@dimensions " << batch.channels() << "\n";
  }
  out << "@equalLength true\n";
  out << "@classLabel " << (batch.has_labels ? "true" : "false");
  for (const auto& name : meta.label_names) out << " " << name;
  out << "\n@data\n";
  const std::size_t n = batch.count(), l = batch.length(), c = batch.channels();
  const auto& v = batch.values.data();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t dim = 0; dim < c; ++dim) {
      if (dim) out << ":";
      for (std::size_t t = 0; t < l; ++t) {
        if (t) out << ",";
        out << v[(i * l + t) * c + dim];
      }
    }
    if (batch.has_labels) {
      out << ":" << meta.label_names.at(static_cast<std::size_t>(batch.labels[i]));
    }
    out << "\n";
  }
}

Dataset parse_tsv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::vector<double>> rows;
  std::vector<long> raw_labels;
  std::size_t width = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trimmed(line);
    if (t.empty()) continue;
    std::vector<std::string> fields = split(t, '\t');
    if (fields.size() < 2) {
      parse_error(path, line_no, "expected a label and at least one value");
    }
    if (width == 0) {
      width = fields.size();
    } else if (fields.size() != width) {
      parse_error(path, line_no,
                  "inconsistent column count: " + std::to_string(fields.size()) +
                      " vs " + std::to_string(width));
    }
    try {
      raw_labels.push_back(std::stol(trimmed(fields[0])));
    } catch (const std::exception&) {
      parse_error(path, line_no, "cannot parse label '" + fields[0] + "'");
    }
    std::vector<double> row;
    row.reserve(width - 1);
    for (std::size_t j = 1; j < fields.size(); ++j) {
      row.push_back(parse_value(fields[j], path, line_no));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error(path + ": no data rows");

  std::vector<long> sorted_labels = raw_labels;
  std::sort(sorted_labels.begin(), sorted_labels.end());
  sorted_labels.erase(std::unique(sorted_labels.begin(), sorted_labels.end()),
                      sorted_labels.end());
  std::map<long, int> remap;
  for (std::size_t i = 0; i < sorted_labels.size(); ++i) {
    remap[sorted_labels[i]] = static_cast<int>(i);
  }

  const std::size_t n = rows.size();
  const std::size_t l = width - 1;
  Dataset ds;
  ds.meta.name = path;
  ds.meta.examples = n;
  ds.meta.length = l;
  ds.meta.channels = 1;
  ds.meta.classes = sorted_labels.size();
  ds.meta.type_tag = "TSV";
  for (long lab : sorted_labels) ds.meta.label_names.push_back(std::to_string(lab));
  Tensor values({n, l, 1});
  auto& v = values.mut();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t t = 0; t < l; ++t) v[i * l + t] = rows[i][t];
  }
  ds.batch.values = std::move(values);
  ds.batch.has_labels = true;
  ds.batch.labels.reserve(n);
  for (long lab : raw_labels) ds.batch.labels.push_back(remap[lab]);
  return ds;
}

void write_tsv(const std::string& path, const TimeSeriesBatch& batch,
               const std::vector<int>& raw_labels) {
  if (batch.channels() != 1) {
    throw std::invalid_argument("write_tsv: univariate batches only");
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out.precision(17);
  const std::size_t n = batch.count(), l = batch.length();
  const auto& v = batch.values.data();
  for (std::size_t i = 0; i < n; ++i) {
    out << raw_labels.at(i);
    for (std::size_t t = 0; t < l; ++t) out << "\t" << v[i * l + t];
    out << "\n";
  }
}

TimeSeriesBatch synth_generate(const SyntheticSpec& spec, std::uint64_t seed) {
  if (spec.class_frequencies.size() != spec.classes) {
    throw std::invalid_argument("synth_generate: need one frequency set per class");
  }
  const double nyquist = static_cast<double>(spec.length) / 2.0;
  for (const auto& freqs : spec.class_frequencies) {
    for (double f : freqs) {
      if (f >= nyquist) {
        throw std::invalid_argument("synth_generate: frequency " +
                                    std::to_string(f) + " >= Nyquist " +
                                    std::to_string(nyquist));
      }
    }
  }
  TimeSeriesBatch batch;
  batch.values = Tensor({spec.count, spec.length, spec.channels});
  batch.has_labels = true;
  batch.labels.resize(spec.count);
  if (spec.count == 0) return batch;

  Rng root(seed);
  auto& v = batch.values.mut();
  const double two_pi = 2.0 * std::numbers::pi;
  for (std::size_t i = 0; i < spec.count; ++i) {
    const std::size_t cls = i % spec.classes;
    batch.labels[i] = static_cast<int>(cls);
    Rng rng = root.split("sample", i);
    for (std::size_t c = 0; c < spec.channels; ++c) {
      for (double f : spec.class_frequencies[cls]) {
        const double phase = rng.uniform(0.0, two_pi);
        for (std::size_t t = 0; t < spec.length; ++t) {
          v[(i * spec.length + t) * spec.channels + c] +=
              spec.amplitude *
              std::sin(two_pi * f * static_cast<double>(t) /
                           static_cast<double>(spec.length) +
                       phase);
        }
      }
      if (spec.noise_sigma > 0.0) {
        for (std::size_t t = 0; t < spec.length; ++t) {
          v[(i * spec.length + t) * spec.channels + c] +=
              rng.normal(0.0, spec.noise_sigma);
        }
      }
    }
  }
  return batch;
}

NormStats compute_norm_stats(const TimeSeriesBatch& train) {
  const std::size_t n = train.count(), l = train.length(), c = train.channels();
  NormStats stats;
  stats.mean.assign(c, 0.0);
  stats.stddev.assign(c, 1.0);
  if (n * l == 0) return stats;
  const auto& v = train.values.data();
  const double count = static_cast<double>(n * l);
  for (std::size_t i = 0; i < n * l; ++i) {
    for (std::size_t ch = 0; ch < c; ++ch) stats.mean[ch] += v[i * c + ch];
  }
  for (std::size_t ch = 0; ch < c; ++ch) stats.mean[ch] /= count;
  std::vector<double> var(c, 0.0);
  for (std::size_t i = 0; i < n * l; ++i) {
    for (std::size_t ch = 0; ch < c; ++ch) {
      const double d = v[i * c + ch] - stats.mean[ch];
      var[ch] += d * d;
    }
  }
  for (std::size_t ch = 0; ch < c; ++ch) {
    const double sd = std::sqrt(var[ch] / count);
    stats.stddev[ch] = sd < 1e-8 ? 1.0 : sd;
  }
  return stats;
}

TimeSeriesBatch normalize(const TimeSeriesBatch& batch, const NormStats& stats) {
  TimeSeriesBatch out = batch;
  const std::size_t c = batch.channels();
  if (stats.mean.size() != c) {
    throw std::invalid_argument("normalize: stats computed for " +
                                std::to_string(stats.mean.size()) +
                                " channels, batch has " + std::to_string(c));
  }
  auto& v = out.values.mut();
  const std::size_t steps = batch.count() * batch.length();
  for (std::size_t i = 0; i < steps; ++i) {
    for (std::size_t ch = 0; ch < c; ++ch) {
      v[i * c + ch] = (v[i * c + ch] - stats.mean[ch]) / stats.stddev[ch];
    }
  }
  return out;
}

}  // namespace specmtm::data
