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

#ifndef SPECMTM_PARAMS_HPP
#define SPECMTM_PARAMS_HPP

#include <string>
#include <unordered_map>
#include <vector>

#include "specmtm/autodiff.hpp"
#include "specmtm/tensor.hpp"

namespace specmtm::engine {

struct ParamRef {
  int index = -1;
  bool valid() const { return index >= 0; }
};

/// Named tensors in stable registration order. Names are unique, shapes are
/// immutable after creation. Values may be mutated between steps (optimizer,
/// checkpoint load) but never while sample graphs are alive.
class ParameterStore {
 public:
  struct Entry {
    std::string name;
    Tensor value;
    bool trainable = true;
  };

  ParamRef create(const std::string& name, Tensor init, bool trainable = true);

  std::size_t count() const { return entries_.size(); }
  Entry& entry(ParamRef ref) { return entries_.at(ref.index); }
  const Entry& entry(ParamRef ref) const { return entries_.at(ref.index); }
  Entry& entry(std::size_t i) { return entries_.at(i); }
  const Entry& entry(std::size_t i) const { return entries_.at(i); }
  ParamRef find(const std::string& name) const;

  void set_trainable(ParamRef ref, bool trainable);
  void set_all_trainable(bool trainable);
  /// Marks trainable every parameter whose name starts with `prefix`.
  void set_trainable_by_prefix(const std::string& prefix, bool trainable);

  std::size_t total_elements() const;

 private:
  std::vector<Entry> entries_;
  std::unordered_map<std::string, int> by_name_;
};

/// Per-sample binding of store parameters to graph leaves. Each forward pass
/// gets its own Graph so concurrent workers never share gradient buffers;
/// gradients are harvested afterwards in registration order.
class Graph {
 public:
  explicit Graph(const ParameterStore& store) : store_(&store) {}

  Var use(ParamRef ref);
  /// grads[i] accumulates the gradient of store parameter i scaled by
  /// `scale`; untouched parameters are skipped.
  void harvest(std::vector<Tensor>& grads, double scale) const;

 private:
  const ParameterStore* store_;
  std::unordered_map<int, Var> leaves_;
};

// --- checkpoint format ---
// Line 1: "SPECMTM-CKPT-1"; line 2: decimal byte count of the JSON manifest;
// then the manifest (array of {name, shape, dtype, trainable, offset}); then
// raw little-endian tensor bytes, offsets relative to the blob start.
inline constexpr const char* kCheckpointMagic = "SPECMTM-CKPT-1";

void save_checkpoint(const ParameterStore& store, const std::string& path,
                     Precision dtype = Precision::f64);
/// Loads by name into existing entries; shapes must match. Names present in
/// the file but absent from the store are ignored unless `strict`; store
/// entries missing from the file keep their values.
void load_checkpoint(ParameterStore& store, const std::string& path,
                     bool strict = false);
/// Names stored in a checkpoint file, in manifest order.
std::vector<std::string> checkpoint_names(const std::string& path);

}  // namespace specmtm::engine

#endif  // SPECMTM_PARAMS_HPP
