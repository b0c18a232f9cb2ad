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

#ifndef SPECMTM_DIAGNOSTICS_HPP
#define SPECMTM_DIAGNOSTICS_HPP

#include <string>
#include <utility>
#include <vector>

#include "specmtm/ser.hpp"
#include "specmtm/tensor.hpp"

namespace specmtm::diagnostics {

/// Count of singular values above rel_tol * sigma_max (thresholded SVD rank).
std::size_t interaction_rank(const Tensor& attn, double rel_tol = 1e-6);

/// Normalized one-sided band energies of a time-domain signal: squared
/// spectrum amplitudes over bins 0..floor(S/2) (DC included, channels
/// summed), partitioned into num_bands with the remainder in the last band.
struct EnergyHistogram {
  std::vector<double> band_energy;                    // sums to 1
  std::vector<std::pair<std::size_t, std::size_t>> band_bins;  // [lo, hi]
  bool zero_energy = false;  // uniform report of an all-zero signal
};
EnergyHistogram energy_histogram(const Tensor& series, std::size_t num_bands);

/// Samples of the learned response curve w -> sum_k Theta_k B_k^K(w) on a
/// uniform grid, with Theta gated from the given normalized profile.
std::vector<std::pair<double, double>> export_bernstein(
    const ser::GatingParams& gating, const std::vector<double>& a_norm_channel,
    std::size_t grid_size, std::size_t channel = 0);

struct DiagnosticsReport {
  std::vector<std::size_t> layer_ranks;
  double rank_rel_tol = 1e-6;
  EnergyHistogram raw_energy;
  EnergyHistogram reconstructed_t_energy;
  EnergyHistogram reconstructed_f_energy;
  std::vector<std::pair<double, double>> bernstein_curve;
  std::vector<double> imag_residue_norms;
};

/// Writes ranks.json, energy.csv (band_lo, band_hi, raw, reconstructed_T,
/// reconstructed_F) and bernstein.csv (w, pK) under `dir`.
void write_report(const DiagnosticsReport& report, const std::string& dir);

}  // namespace specmtm::diagnostics

#endif  // SPECMTM_DIAGNOSTICS_HPP
