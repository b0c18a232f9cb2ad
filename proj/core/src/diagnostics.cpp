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

#include "specmtm/diagnostics.hpp"

#include <Eigen/SVD>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "specmtm/bernstein.hpp"
#include "specmtm/spectral.hpp"

namespace specmtm::diagnostics {

std::size_t interaction_rank(const Tensor& attn, double rel_tol) {
  if (attn.rank() != 2 || attn.rows() != attn.cols()) {
    throw std::invalid_argument("interaction_rank: expected a square matrix, got " +
                                attn.shape_str());
  }
  require_finite(attn, "interaction_rank input");
  using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  Eigen::Map<const Mat> m(attn.data().data(),
                          static_cast<Eigen::Index>(attn.rows()),
                          static_cast<Eigen::Index>(attn.cols()));
  Eigen::JacobiSVD<Mat> svd(m);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) == 0.0) return 0;
  const double cutoff = rel_tol * sv(0);
  std::size_t rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > cutoff) ++rank;
  }
  return rank;
}

EnergyHistogram energy_histogram(const Tensor& series, std::size_t num_bands) {
  if (num_bands == 0) {
    throw std::invalid_argument("energy_histogram: need at least one band");
  }
  spectral::Spectrum spec = spectral::dft_forward(series);
  Tensor amp = spectral::amplitude(spec);
  const std::size_t one_sided = spec.bins() / 2 + 1;  // DC .. floor(S/2)
  if (num_bands > one_sided) num_bands = one_sided;

  std::vector<double> bin_energy(one_sided, 0.0);
  for (std::size_t s = 0; s < one_sided; ++s) {
    for (std::size_t c = 0; c < amp.cols(); ++c) {
      bin_energy[s] += amp(s, c) * amp(s, c);
    }
  }
  EnergyHistogram hist;
  const std::size_t per_band = one_sided / num_bands;
  for (std::size_t b = 0; b < num_bands; ++b) {
    const std::size_t lo = b * per_band;
    const std::size_t hi = (b + 1 == num_bands) ? one_sided - 1 : lo + per_band - 1;
    hist.band_bins.emplace_back(lo, hi);
    double e = 0.0;
    for (std::size_t s = lo; s <= hi; ++s) e += bin_energy[s];
    hist.band_energy.push_back(e);
  }
  double total = 0.0;
  for (double e : hist.band_energy) total += e;
  if (total <= 0.0) {
    hist.zero_energy = true;
    const double uniform = 1.0 / static_cast<double>(num_bands);
    for (double& e : hist.band_energy) e = uniform;
  } else {
    for (double& e : hist.band_energy) e /= total;
  }
  return hist;
}

std::vector<std::pair<double, double>> export_bernstein(
    const ser::GatingParams& gating, const std::vector<double>& a_norm_channel,
    std::size_t grid_size, std::size_t channel) {
  if (grid_size < 2) {
    throw std::invalid_argument("export_bernstein: grid needs >= 2 points");
  }
  std::vector<double> theta =
      ser::gate_coefficients(a_norm_channel, gating, channel);
  std::vector<double> basis(gating.coeff_count());
  std::vector<std::pair<double, double>> curve;
  curve.reserve(grid_size);
  for (std::size_t i = 0; i < grid_size; ++i) {
    const double w =
        static_cast<double>(i) / static_cast<double>(grid_size - 1);
    bernstein_basis_values(gating.order, w, basis.data());
    double p = 0.0;
    for (std::size_t k = 0; k < theta.size(); ++k) p += theta[k] * basis[k];
    curve.emplace_back(w, p);
  }
  return curve;
}

void write_report(const DiagnosticsReport& report, const std::string& dir) {
  std::filesystem::create_directories(dir);

  nlohmann::json ranks;
  ranks["layer_ranks"] = report.layer_ranks;
  ranks["rank_rel_tol"] = report.rank_rel_tol;
  ranks["imag_residue_norms"] = report.imag_residue_norms;
  {
    std::ofstream out(dir + "/ranks.json");
    if (!out) throw std::runtime_error("cannot write " + dir + "/ranks.json");
    out << ranks.dump(2) << "\n";
  }
  {
    std::ofstream out(dir + "/energy.csv");
    if (!out) throw std::runtime_error("cannot write " + dir + "/energy.csv");
    out.precision(17);
    out << "band_lo,band_hi,raw,reconstructed_T,reconstructed_F\n";
    const auto& raw = report.raw_energy;
    for (std::size_t b = 0; b < raw.band_energy.size(); ++b) {
      const double rt = b < report.reconstructed_t_energy.band_energy.size()
                            ? report.reconstructed_t_energy.band_energy[b]
                            : 0.0;
      const double rf = b < report.reconstructed_f_energy.band_energy.size()
                            ? report.reconstructed_f_energy.band_energy[b]
                            : 0.0;
      out << raw.band_bins[b].first << "," << raw.band_bins[b].second << ","
          << raw.band_energy[b] << "," << rt << "," << rf << "\n";
    }
  }
  {
    std::ofstream out(dir + "/bernstein.csv");
    if (!out) throw std::runtime_error("cannot write " + dir + "/bernstein.csv");
    out.precision(17);
    out << "w,pK\n";
    for (const auto& [w, p] : report.bernstein_curve) {
      out << w << "," << p << "\n";
    }
  }
}

}  // namespace specmtm::diagnostics
