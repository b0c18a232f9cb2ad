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

#include "specmtm/verify.hpp"

#include <cmath>
#include <iostream>
#include <ostream>

#include "specmtm/backbone.hpp"
#include "specmtm/bernstein.hpp"
#include "specmtm/cbd.hpp"
#include "specmtm/objectives.hpp"
#include "specmtm/optim.hpp"
#include "specmtm/spectral.hpp"

namespace specmtm::verify {

namespace {

using engine::Graph;
using engine::ParamRef;
using engine::ParameterStore;
using engine::Var;
using spectral::Spectrum;

Tensor random_tensor(std::vector<std::size_t> shape, Rng& rng, double scale = 1.0) {
  Tensor t(std::move(shape));
  for (double& x : t.mut()) x = rng.normal(0.0, scale);
  return t;
}

double max_abs(const Tensor& t) {
  double m = 0.0;
  for (double x : t.data()) m = std::max(m, std::fabs(x));
  return m;
}

double rel_diff(const Tensor& a, const Tensor& b) {
  const double scale = std::max({max_abs(a), max_abs(b), 1e-30});
  return max_abs(sub(a, b)) / scale;
}

CheckResult parseval_check() {
  Rng rng(11);
  double worst = 0.0;
  for (std::size_t t_len : {4u, 16u, 64u, 128u, 217u}) {
    for (int rep = 0; rep < 100; ++rep) {
      Tensor z = random_tensor({t_len, 3}, rng);
      Spectrum spec = spectral::dft_forward(z);
      const double time_energy = dot_all(z, z);
      const double freq_energy =
          (dot_all(spec.re, spec.re) + dot_all(spec.im, spec.im)) /
          static_cast<double>(t_len);
      worst = std::max(worst, std::fabs(time_energy - freq_energy) /
                                  std::max(time_energy, 1e-30));
    }
  }
  return {"parseval energy identity", worst, 1e-10, worst <= 1e-10};
}

CheckResult convolution_check() {
  Rng rng(12);
  double worst = 0.0;
  for (std::size_t t_len : {4u, 16u, 64u, 128u, 217u}) {
    for (int rep = 0; rep < 100; ++rep) {
      Tensor k = random_tensor({t_len, 2}, rng);
      Tensor z = random_tensor({t_len, 2}, rng);
      Spectrum conv_spec = spectral::dft_forward(spectral::circular_convolve(k, z));
      Spectrum fk = spectral::dft_forward(k);
      Spectrum fz = spectral::dft_forward(z);
      Tensor prod_re = sub(hadamard(fk.re, fz.re), hadamard(fk.im, fz.im));
      Tensor prod_im = add(hadamard(fk.re, fz.im), hadamard(fk.im, fz.re));
      worst = std::max(worst, rel_diff(conv_spec.re, prod_re));
      worst = std::max(worst, rel_diff(conv_spec.im, prod_im));
    }
  }
  return {"frequency-domain convolution theorem", worst, 1e-10, worst <= 1e-10};
}

CheckResult roundtrip_check() {
  Rng rng(13);
  double worst = 0.0;
  for (std::size_t t_len : {4u, 16u, 128u, 217u}) {
    Tensor z = random_tensor({t_len, 4}, rng);
    worst = std::max(worst,
                     rel_diff(spectral::dft_inverse(spectral::dft_forward(z)), z));
  }
  return {"inverse transform roundtrip", worst, 1e-10, worst <= 1e-10};
}

CheckResult linearity_check() {
  Rng rng(14);
  double worst = 0.0;
  for (int rep = 0; rep < 20; ++rep) {
    Tensor x = random_tensor({32, 3}, rng);
    Tensor y = random_tensor({32, 3}, rng);
    const double a = rng.normal(0.0, 2.0), b = rng.normal(0.0, 2.0);
    Spectrum lhs = spectral::dft_forward(add(scaled(x, a), scaled(y, b)));
    Spectrum fx = spectral::dft_forward(x);
    Spectrum fy = spectral::dft_forward(y);
    worst = std::max(worst, rel_diff(lhs.re, add(scaled(fx.re, a), scaled(fy.re, b))));
    worst = std::max(worst, rel_diff(lhs.im, add(scaled(fx.im, a), scaled(fy.im, b))));
  }
  return {"transform linearity", worst, 1e-10, worst <= 1e-10};
}

CheckResult hermitian_check() {
  Rng rng(15);
  double worst = 0.0;
  for (std::size_t t_len : {8u, 33u, 64u}) {
    Tensor z = random_tensor({t_len, 2}, rng);
    Spectrum spec = spectral::dft_forward(z);
    for (std::size_t s = 1; s < t_len; ++s) {
      for (std::size_t c = 0; c < 2; ++c) {
        worst = std::max(worst, std::fabs(spec.re(s, c) - spec.re(t_len - s, c)));
        worst = std::max(worst, std::fabs(spec.im(s, c) + spec.im(t_len - s, c)));
      }
    }
  }
  return {"hermitian symmetry of real input", worst, 1e-8, worst <= 1e-8};
}

CheckResult bernstein_partition_check() {
  double worst = 0.0;
  for (std::size_t order : {1u, 2u, 4u, 8u, 12u, 16u, 32u}) {
    std::vector<double> basis(order + 1);
    for (int i = 0; i < 1000; ++i) {
      const double w = static_cast<double>(i) / 999.0;
      bernstein_basis_values(order, w, basis.data());
      double sum = 0.0;
      for (double b : basis) sum += b;
      worst = std::max(worst, std::fabs(sum - 1.0));
    }
  }
  return {"bernstein partition of unity", worst, 1e-12, worst <= 1e-12};
}

CheckResult bernstein_linear_check() {
  double worst = 0.0;
  for (std::size_t order : {1u, 2u, 4u, 8u, 12u, 16u}) {
    std::vector<double> basis(order + 1);
    for (int i = 0; i < 1000; ++i) {
      const double w = static_cast<double>(i) / 999.0;
      bernstein_basis_values(order, w, basis.data());
      double sum = 0.0;
      for (std::size_t k = 0; k <= order; ++k) {
        sum += (static_cast<double>(k) / static_cast<double>(order)) * basis[k];
      }
      worst = std::max(worst, std::fabs(sum - w));
    }
  }
  return {"bernstein linear reproduction", worst, 1e-12, worst <= 1e-12};
}

CheckResult identity_init_check() {
  Rng rng(16);
  const std::size_t t_len = 8, d = 4;
  Tensor x = random_tensor({t_len, d}, rng);
  cbd::CbdStack stack;
  stack.blocks.push_back(cbd::CbdBlockParams::identity_init(d, t_len, 12));
  stack.blocks.push_back(cbd::CbdBlockParams::identity_init(d, t_len, 12));
  backbone::MaskPlan plan = backbone::make_mask(t_len, 0.0, 7);
  Spectrum out = cbd::cbd_decode(x, plan, stack, Tensor({1, d}),
                                 Tensor({t_len, d}));
  Spectrum expect = spectral::dft_forward(x);
  const double worst = std::max(max_abs(sub(out.re, expect.re)),
                                max_abs(sub(out.im, expect.im)));
  return {"identity-at-init decoder stack", worst, 1e-12, worst <= 1e-12};
}

CheckResult adjoint_check() {
  Rng rng(17);
  double worst = 0.0;
  for (std::size_t t_len : {8u, 21u, 64u}) {
    Tensor x_val = random_tensor({t_len, 3}, rng);
    Tensor y_re = random_tensor({t_len, 3}, rng);
    Tensor y_im = random_tensor({t_len, 3}, rng);
    // loss = Re<F(x), y> ; its gradient in x must be Re(F^H(y)).
    Var x = engine::leaf(x_val, true);
    spectral::SpectrumVar fx = spectral::dft_graph(x);
    Var loss = engine::add(engine::sum_all(engine::mul(fx.re, engine::constant(y_re))),
                           engine::sum_all(engine::mul(fx.im, engine::constant(y_im))));
    engine::backward(loss);
    auto plan = spectral::plan_for(t_len);
    Tensor expected = sub(matmul(plan->cos_mat, y_re), matmul(plan->sin_mat, y_im));
    worst = std::max(worst, rel_diff(x.grad(), expected));
  }
  return {"transform adjoint pairing", worst, 1e-10, worst <= 1e-10};
}

// --- gradient checks on a tiny model (d = 8, T = 8, U = 1) ---

constexpr std::size_t kTinyD = 8;
constexpr std::size_t kTinyT = 8;

std::vector<ParamRef> all_refs(const ParameterStore& store) {
  std::vector<ParamRef> refs;
  for (std::size_t i = 0; i < store.count(); ++i) {
    refs.push_back(ParamRef{static_cast<int>(i)});
  }
  return refs;
}

/// Random spectrum whose CIM pre-activations stay away from the split-ReLU
/// kink (resampled until every magnitude exceeds the margin).
Spectrum sampled_away_from_kinks(const cim::ComplexAffineParams& p, Rng& rng) {
  for (int attempt = 0; attempt < 200; ++attempt) {
    Spectrum spec;
    spec.re = random_tensor({kTinyT, kTinyD}, rng);
    spec.im = random_tensor({kTinyT, kTinyD}, rng);
    spec.origin_length = kTinyT;
    Spectrum pre = cim::complex_affine(spec, p);
    double min_mag = 1e300;
    for (double v : pre.re.data()) min_mag = std::min(min_mag, std::fabs(v));
    for (double v : pre.im.data()) min_mag = std::min(min_mag, std::fabs(v));
    if (min_mag >= 1e-3) return spec;
  }
  throw std::runtime_error("could not sample away from activation kinks");
}

CheckResult cim_grad_check() {
  Rng rng(21);
  ParameterStore store;
  cim::ComplexAffineParams init = cim::ComplexAffineParams::init(kTinyD, rng);
  // Shift the bias so pre-activations are not centered on the kink.
  for (double& b : init.b_re.mut()) b += rng.uniform(0.2, 0.5);
  cim::CimRefs refs = cim::CimRefs::create(store, "cim", init);
  Spectrum spec = sampled_away_from_kinks(init, rng);
  auto build = [&](Graph& g) {
    auto out = cim::cim_modulate(spectral::lift(spec), cim::bind(g, refs),
                                 cim::Activation::kSplitRelu);
    return engine::add(engine::sum_all(engine::square(out.re)),
                       engine::sum_all(engine::square(out.im)));
  };
  auto r = engine::fd_check(store, all_refs(store), build, {});
  return {"gradients: cim unit", r.max_rel_error, 1e-4, r.max_rel_error <= 1e-4};
}

CheckResult ser_grad_check() {
  Rng rng(22);
  ParameterStore store;
  ser::GatingParams init = ser::GatingParams::identity_init(6, kTinyT);
  for (double& x : init.w_c.mut()) x = rng.normal(0.0, 0.3);
  ser::SerRefs refs = ser::SerRefs::create(store, "ser", init);
  Spectrum spec;
  spec.re = random_tensor({kTinyT, kTinyD}, rng);
  spec.im = random_tensor({kTinyT, kTinyD}, rng);
  spec.origin_length = kTinyT;
  auto build = [&](Graph& g) {
    auto out = ser::ser_rebalance(spectral::lift(spec), ser::bind(g, refs));
    return engine::add(engine::sum_all(engine::square(out.re)),
                       engine::sum_all(engine::square(out.im)));
  };
  auto r = engine::fd_check(store, all_refs(store), build, {});
  return {"gradients: ser unit", r.max_rel_error, 1e-4, r.max_rel_error <= 1e-4};
}

CheckResult cbd_block_grad_check() {
  Rng rng(23);
  ParameterStore store;
  cbd::CbdBlockParams init =
      cbd::CbdBlockParams::init(kTinyD, kTinyT, 4, false, 16, rng);
  for (double& x : init.ffn_w2.mut()) x = rng.normal(0.0, 0.1);
  for (double& b : init.cim_params.b_re.mut()) b += 0.3;
  cbd::CbdBlockRefs refs = cbd::CbdBlockRefs::create(store, "block", init);
  Spectrum spec = sampled_away_from_kinks(init.cim_params, rng);
  auto build = [&](Graph& g) {
    auto out = cbd::cbd_block(spectral::lift(spec), cbd::bind(g, refs),
                              cim::Activation::kSplitRelu);
    return engine::add(engine::sum_all(engine::square(out.re)),
                       engine::sum_all(engine::square(out.im)));
  };
  auto r = engine::fd_check(store, all_refs(store), build, {});
  return {"gradients: cbd block", r.max_rel_error, 1e-4,
          r.max_rel_error <= 1e-4};
}

CheckResult encoder_grad_check() {
  Rng rng(24);
  ParameterStore store;
  backbone::EncoderParams init =
      backbone::EncoderParams::init(kTinyD, 2, 4, kTinyT, 1, 2, 16, rng);
  backbone::EncoderRefs refs = backbone::EncoderRefs::create(store, "enc", init);
  Tensor sample = random_tensor({kTinyT * 4, 2}, rng);
  auto build = [&](Graph& g) {
    backbone::EncoderVars ev = backbone::bind(g, refs);
    Var tokens = backbone::embed(engine::constant(sample), ev.embed);
    Var out = backbone::encode(tokens, ev, nullptr);
    return engine::sum_all(engine::square(out));
  };
  auto r = engine::fd_check(store, all_refs(store), build, {});
  return {"gradients: encoder", r.max_rel_error, 1e-4, r.max_rel_error <= 1e-4};
}

CheckResult temporal_decoder_grad_check() {
  Rng rng(25);
  ParameterStore store;
  backbone::TemporalDecoderParams init = backbone::TemporalDecoderParams::init(
      kTinyD, 2, 4, kTinyT, 1, 2, 16, rng);
  backbone::TemporalDecoderRefs refs =
      backbone::TemporalDecoderRefs::create(store, "td", init);
  ParamRef mask_tok = store.create("mask_token", random_tensor({1, kTinyD}, rng, 0.1));
  backbone::MaskPlan plan = backbone::make_mask(kTinyT, 0.5, 3);
  Tensor visible = random_tensor(
      {kTinyT - plan.masked_indices.size(), kTinyD}, rng);
  Tensor gt = random_tensor({kTinyT * 4, 2}, rng);
  auto build = [&](Graph& g) {
    Var out = backbone::temporal_decode(engine::constant(visible), plan,
                                        backbone::bind(g, refs),
                                        g.use(mask_tok), 2);
    return objectives::mse_temporal(out, gt, plan, 4);
  };
  auto r = engine::fd_check(store, all_refs(store), build, {});
  return {"gradients: temporal decoder", r.max_rel_error, 1e-4,
          r.max_rel_error <= 1e-4};
}

CheckResult loss_grad_check() {
  Rng rng(26);
  ParameterStore store;
  const std::size_t length = kTinyT * 4;
  ParamRef pred_t = store.create("pred_t", random_tensor({length, 2}, rng));
  ParamRef branch_re = store.create("branch_re", random_tensor({length, 2}, rng));
  ParamRef branch_im = store.create("branch_im", random_tensor({length, 2}, rng));
  Tensor gt = random_tensor({length, 2}, rng);
  backbone::MaskPlan plan = backbone::make_mask(kTinyT, 0.75, 5);
  std::vector<int> labels = {1};
  ParamRef logits = store.create("logits", random_tensor({1, 3}, rng));
  double worst = 0.0;
  {
    auto build = [&](Graph& g) {
      spectral::SpectrumVar branch{g.use(branch_re), g.use(branch_im), length};
      return objectives::pretrain_loss(g.use(pred_t), branch, gt, plan, 4,
                                       {0.5, true}, true);
    };
    worst = std::max(worst,
                     engine::fd_check(store, {pred_t, branch_re, branch_im},
                                      build, {})
                         .max_rel_error);
  }
  {
    auto build = [&](Graph& g) {
      return objectives::finetune_loss(g.use(logits), labels);
    };
    worst = std::max(
        worst, engine::fd_check(store, {logits}, build, {}).max_rel_error);
  }
  return {"gradients: loss terms", worst, 1e-4, worst <= 1e-4};
}

CheckResult mask_contract_check() {
  double worst = 0.0;
  const struct {
    std::size_t tokens;
    std::size_t expect;
  } cases[] = {{16, 12}, {50, 38}, {128, 96}};
  for (const auto& c : cases) {
    backbone::MaskPlan plan = backbone::make_mask(c.tokens, 0.75, 1);
    if (plan.masked_indices.size() != c.expect) {
      return {"mask contract", 1.0, 0.011, false};
    }
  }
  std::vector<std::size_t> hits(16, 0);
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) {
    backbone::MaskPlan plan =
        backbone::make_mask(16, 0.75, static_cast<std::uint64_t>(i));
    for (std::size_t idx : plan.masked_indices) ++hits[idx];
  }
  for (std::size_t h : hits) {
    worst = std::max(worst,
                     std::fabs(static_cast<double>(h) / draws - 0.75));
  }
  return {"mask contract", worst, 0.01, worst <= 0.01};
}

}  // namespace

std::vector<CheckResult> run_suite() {
  const engine::Precision saved = engine::compute_precision();
  engine::set_compute_precision(engine::Precision::f64);
  std::vector<CheckResult> results;
  results.push_back(parseval_check());
  results.push_back(convolution_check());
  results.push_back(roundtrip_check());
  results.push_back(linearity_check());
  results.push_back(hermitian_check());
  results.push_back(bernstein_partition_check());
  results.push_back(bernstein_linear_check());
  results.push_back(identity_init_check());
  results.push_back(adjoint_check());
  results.push_back(cim_grad_check());
  results.push_back(ser_grad_check());
  results.push_back(cbd_block_grad_check());
  results.push_back(encoder_grad_check());
  results.push_back(temporal_decoder_grad_check());
  results.push_back(loss_grad_check());
  results.push_back(mask_contract_check());
  engine::set_compute_precision(saved);
  return results;
}

bool report(const std::vector<CheckResult>& results, std::ostream& out) {
  bool all_pass = true;
  for (const auto& r : results) {
    out << (r.pass ? "[PASS] " : "[FAIL] ") << r.name << "  (measured "
        << r.measured << ", tolerance " << r.tolerance << ")\n";
    all_pass = all_pass && r.pass;
  }
  return all_pass;
}

}  // namespace specmtm::verify
