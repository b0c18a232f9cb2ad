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

#include "specmtm/params.hpp"

#include <cstdint>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace specmtm::engine {

ParamRef ParameterStore::create(const std::string& name, Tensor init,
                                bool trainable) {
  if (by_name_.count(name)) {
    throw std::invalid_argument("ParameterStore: duplicate name '" + name +
                                "'");
  }
  ParamRef ref{static_cast<int>(entries_.size())};
  entries_.push_back(Entry{name, std::move(init), trainable});
  by_name_.emplace(name, ref.index);
  return ref;
}

ParamRef ParameterStore::find(const std::string& name) const {
  auto it = by_name_.find(name);
  return it == by_name_.end() ? ParamRef{} : ParamRef{it->second};
}

void ParameterStore::set_trainable(ParamRef ref, bool trainable) {
  entries_.at(ref.index).trainable = trainable;
}

void ParameterStore::set_all_trainable(bool trainable) {
  for (auto& e : entries_) e.trainable = trainable;
}

void ParameterStore::set_trainable_by_prefix(const std::string& prefix,
                                             bool trainable) {
  for (auto& e : entries_) {
    if (e.name.rfind(prefix, 0) == 0) e.trainable = trainable;
  }
}

std::size_t ParameterStore::total_elements() const {
  std::size_t n = 0;
  for (const auto& e : entries_) n += e.value.size();
  return n;
}

Var Graph::use(ParamRef ref) {
  if (!ref.valid()) throw std::logic_error("Graph::use: invalid ParamRef");
  auto it = leaves_.find(ref.index);
  if (it != leaves_.end()) return it->second;
  const auto& e = store_->entry(ref);
  Var v = leaf(e.value, e.trainable);
  leaves_.emplace(ref.index, v);
  return v;
}

void Graph::harvest(std::vector<Tensor>& grads, double scale) const {
  if (grads.size() < store_->count()) grads.resize(store_->count());
  for (const auto& [index, var] : leaves_) {
    if (!var.requires_grad() || !var.node()->has_grad()) continue;
    Tensor g = scaled(var.node()->grad, scale);
    Tensor& slot = grads[static_cast<std::size_t>(index)];
    if (slot.size() == 0) {
      slot = std::move(g);
    } else {
      slot = specmtm::add(slot, g);
    }
  }
}

namespace {

void write_raw(std::ofstream& out, const Tensor& t, Precision dtype) {
  const auto& d = t.data();
  if (dtype == Precision::f64) {
    out.write(reinterpret_cast<const char*>(d.data()),
              static_cast<std::streamsize>(d.size() * sizeof(double)));
  } else {
    std::vector<float> f(d.begin(), d.end());
    out.write(reinterpret_cast<const char*>(f.data()),
              static_cast<std::streamsize>(f.size() * sizeof(float)));
  }
}

struct ManifestEntry {
  std::string name;
  std::vector<std::size_t> shape;
  std::string dtype;
  bool trainable = true;
  std::uint64_t offset = 0;
};

std::pair<std::vector<ManifestEntry>, std::streampos> read_manifest(
    std::ifstream& in, const std::string& path) {
  std::string magic;
  if (!std::getline(in, magic) || magic != kCheckpointMagic) {
    throw std::runtime_error("checkpoint '" + path +
                             "': bad or missing header (expected " +
                             std::string(kCheckpointMagic) + ")");
  }
  std::string len_line;
  if (!std::getline(in, len_line)) {
    throw std::runtime_error("checkpoint '" + path + "': truncated manifest");
  }
  const std::size_t manifest_len = std::stoull(len_line);
  std::string manifest(manifest_len, '\0');
  in.read(manifest.data(), static_cast<std::streamsize>(manifest_len));
  if (static_cast<std::size_t>(in.gcount()) != manifest_len) {
    throw std::runtime_error("checkpoint '" + path + "': truncated manifest");
  }
  nlohmann::json j = nlohmann::json::parse(manifest);
  std::vector<ManifestEntry> entries;
  for (const auto& item : j) {
    ManifestEntry e;
    e.name = item.at("name").get<std::string>();
    e.shape = item.at("shape").get<std::vector<std::size_t>>();
    e.dtype = item.at("dtype").get<std::string>();
    e.trainable = item.value("trainable", true);
    e.offset = item.at("offset").get<std::uint64_t>();
    entries.push_back(std::move(e));
  }
  return {std::move(entries), in.tellg()};
}

}  // namespace

void save_checkpoint(const ParameterStore& store, const std::string& path,
                     Precision dtype) {
  nlohmann::json manifest = nlohmann::json::array();
  const std::size_t elem_size =
      dtype == Precision::f64 ? sizeof(double) : sizeof(float);
  std::uint64_t offset = 0;
  for (std::size_t i = 0; i < store.count(); ++i) {
    const auto& e = store.entry(i);
    manifest.push_back({{"name", e.name},
                        {"shape", e.value.shape()},
                        {"dtype", dtype == Precision::f64 ? "f64" : "f32"},
                        {"trainable", e.trainable},
                        {"offset", offset}});
    offset += e.value.size() * elem_size;
  }
  const std::string manifest_str = manifest.dump();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << kCheckpointMagic << "\n" << manifest_str.size() << "\n";
  out << manifest_str;
  for (std::size_t i = 0; i < store.count(); ++i) {
    write_raw(out, store.entry(i).value, dtype);
  }
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

void load_checkpoint(ParameterStore& store, const std::string& path,
                     bool strict) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint '" + path + "'");
  auto [entries, blob_start] = read_manifest(in, path);
  for (const auto& me : entries) {
    ParamRef ref = store.find(me.name);
    if (!ref.valid()) {
      if (strict) {
        throw std::runtime_error("checkpoint '" + path +
                                 "': unknown parameter '" + me.name + "'");
      }
      continue;
    }
    auto& entry = store.entry(ref);
    if (entry.value.shape() != me.shape) {
      throw std::runtime_error("checkpoint '" + path + "': parameter '" +
                               me.name + "' shape mismatch");
    }
    const std::size_t n = entry.value.size();
    in.seekg(blob_start + static_cast<std::streamoff>(me.offset));
    auto& dst = entry.value.mut();
    if (me.dtype == "f64") {
      in.read(reinterpret_cast<char*>(dst.data()),
              static_cast<std::streamsize>(n * sizeof(double)));
    } else if (me.dtype == "f32") {
      std::vector<float> buf(n);
      in.read(reinterpret_cast<char*>(buf.data()),
              static_cast<std::streamsize>(n * sizeof(float)));
      for (std::size_t i = 0; i < n; ++i) dst[i] = buf[i];
    } else {
      throw std::runtime_error("checkpoint '" + path + "': unknown dtype '" +
                               me.dtype + "'");
    }
    if (!in) {
      throw std::runtime_error("checkpoint '" + path +
                               "': truncated data for '" + me.name + "'");
    }
  }
}

std::vector<std::string> checkpoint_names(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint '" + path + "'");
  auto [entries, blob_start] = read_manifest(in, path);
  (void)blob_start;
  std::vector<std::string> names;
  names.reserve(entries.size());
  for (const auto& e : entries) names.push_back(e.name);
  return names;
}

}  // namespace specmtm::engine
