/*
 * Copyright 2026 the qcs authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Command-line front end: quantizer design and level tables as JSON,
// experiment campaigns as CSV + manifest, and a projection self-test.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qcs/compander.hpp"
#include "qcs/harness.hpp"
#include "qcs/plevels.hpp"
#include "qcs/rng.hpp"
#include "qcs/solver.hpp"
#include "qcs/version.hpp"
#include "qcs/wnorm.hpp"

namespace {

void emit(const std::string& text, const std::string& out) {
  if (out.empty() || out == "-") {
    std::cout << text;
    return;
  }
  std::ofstream f(out, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for writing: " + out);
  f << text;
}

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot read: " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::vector<qcs::Exponent> parse_p_list(const std::vector<std::string>& raw) {
  std::vector<qcs::Exponent> out;
  out.reserve(raw.size());
  for (const std::string& s : raw) out.push_back(qcs::Exponent::parse(s));
  return out;
}

// Holds the flag targets of one experiment subcommand; values only override
// the spec when the user actually passed the flag, so --config files and
// per-kind defaults keep their remaining fields.
struct ExperimentFlags {
  CLI::App* cmd = nullptr;
  qcs::ExperimentKind kind;
  std::string config_path;
  bool paper = false;
  int N = 0, K = 0, B = 0, trials = 0, threads = 0, direct_m = 0;
  std::uint64_t seed = 0;
  std::vector<double> ratios;
  std::vector<std::string> p_raw;
  std::vector<int> b_list;
  std::string radius_mode, out_dir;
  double sigma0 = 0.0, noise_sigma0 = 0.0, noise_delta0 = 0.0;
  int max_iters = 0;
  double rel_tol = 0.0;

  qcs::ExperimentSpec assemble() const {
    qcs::ExperimentSpec spec = config_path.empty()
                                   ? qcs::desk_defaults(kind)
                                   : qcs::spec_from_json(slurp(config_path));
    spec.kind = kind;  // the subcommand, not the config, picks the experiment
    if (paper) spec = qcs::paper_scale(spec);
    if (cmd->count("--N") != 0u) spec.N = N;
    if (cmd->count("--K") != 0u) spec.K = K;
    if (cmd->count("--B") != 0u) spec.B = B;
    if (cmd->count("--trials") != 0u) spec.trials = trials;
    if (cmd->count("--threads") != 0u) spec.threads = threads;
    if (cmd->count("--seed") != 0u) spec.master_seed = seed;
    if (cmd->count("--ratios") != 0u) spec.oversampling_list = ratios;
    if (cmd->count("--p-list") != 0u) spec.p_list = parse_p_list(p_raw);
    if (cmd->count("--b-list") != 0u) spec.b_list = b_list;
    if (cmd->count("--M") != 0u) spec.direct_m = direct_m;
    if (cmd->count("--radius-mode") != 0u) {
      spec.radius_mode = qcs::parse_radius_mode(radius_mode);
    }
    if (cmd->count("--out") != 0u) spec.output_path = out_dir;
    if (cmd->count("--sigma0") != 0u) spec.sigma0 = sigma0;
    if (cmd->count("--noise-sigma0") != 0u) spec.noise_sigma0 = noise_sigma0;
    if (cmd->count("--noise-delta0") != 0u) spec.noise_delta0 = noise_delta0;
    if (cmd->count("--max-iters") != 0u) spec.solver.max_iters = max_iters;
    if (cmd->count("--rel-tol") != 0u) spec.solver.rel_change_tol = rel_tol;
    return spec;
  }
};

ExperimentFlags* add_experiment_cmd(CLI::App& app, const std::string& name,
                                    const std::string& help,
                                    qcs::ExperimentKind kind) {
  auto* flags = new ExperimentFlags();  // lives for the whole program run
  flags->kind = kind;
  CLI::App* cmd = app.add_subcommand(name, help);
  flags->cmd = cmd;
  cmd->add_option("--config", flags->config_path,
                  "JSON spec or run manifest to start from");
  cmd->add_flag("--paper-scale", flags->paper,
                "use the full published grid (N=1024, K=16, all ratios)");
  cmd->add_option("--N", flags->N, "ambient dimension");
  cmd->add_option("--K", flags->K, "sparsity");
  cmd->add_option("--B", flags->B, "bits per measurement");
  cmd->add_option("--trials", flags->trials, "Monte-Carlo trials per cell");
  cmd->add_option("--threads", flags->threads, "worker threads over trials");
  cmd->add_option("--seed", flags->seed, "master seed");
  cmd->add_option("--ratios", flags->ratios, "M/K oversampling ratios")
      ->delimiter(',');
  cmd->add_option("--p-list", flags->p_raw, "fidelity exponents (>=2 or inf)")
      ->delimiter(',');
  cmd->add_option("--b-list", flags->b_list,
                  "bit depths (measurement-batch validation only)")
      ->delimiter(',');
  cmd->add_option("--M", flags->direct_m,
                  "measurements per batch (measurement-batch validation only)");
  cmd->add_option("--radius-mode", flags->radius_mode,
                  "fidelity radius: CLOSED_FORM or ORACLE");
  cmd->add_option("--out", flags->out_dir, "output directory for CSV/manifest");
  cmd->add_option("--sigma0", flags->sigma0, "source std for quantizer design");
  cmd->add_option("--noise-sigma0", flags->noise_sigma0,
                  "noise level (stabilization study)");
  cmd->add_option("--noise-delta0", flags->noise_delta0,
                  "noise level spread (stabilization study)");
  cmd->add_option("--max-iters", flags->max_iters, "solver iteration cap");
  cmd->add_option("--rel-tol", flags->rel_tol, "solver relative-change tol");
  cmd->callback([flags]() {
    const qcs::ExperimentSpec spec = flags->assemble();
    for (const std::string& path : qcs::run_experiment(spec)) {
      std::cout << path << "\n";
    }
  });
  return flags;
}

// Random-instance check of the lp-ball projection: feasibility of the
// output, first-order optimality (the residual v - out must be the outward
// normal mu * p * |out|^{p-1} sign(out)), and idempotence.
int run_project_test(int count, const std::vector<int>& m_list,
                     const std::vector<std::string>& p_raw,
                     std::uint64_t seed) {
  bool ok = true;
  for (const std::string& p_text : p_raw) {
    const qcs::Exponent p = qcs::Exponent::parse(p_text);
    for (int M : m_list) {
      qcs::Philox rng(seed, static_cast<std::uint64_t>(M) << 8 ^
                                static_cast<std::uint64_t>(
                                    p.is_inf() ? 99 : p.value()));
      double worst_norm = 0.0, worst_kkt = 0.0, worst_idem = 0.0;
      for (int c = 0; c < count; ++c) {
        Eigen::VectorXd v(M);
        for (int i = 0; i < M; ++i) v[i] = 3.0 * rng.next_gaussian();
        const double radius = 0.1 + 1.9 * rng.next_double();
        const Eigen::VectorXd out = qcs::project_lp_ball(v, p, radius);
        const Eigen::VectorXd ones = Eigen::VectorXd::Ones(M);
        const double vnorm = qcs::weighted_lp_norm(v, ones, p);
        if (vnorm <= radius) {
          worst_idem = std::max(worst_idem, (out - v).norm());
          continue;
        }
        const double onorm = qcs::weighted_lp_norm(out, ones, p);
        worst_norm = std::max(worst_norm, std::fabs(onorm - radius));
        if (!p.is_inf()) {
          // Normal direction per coordinate: (v - out) / (p |out|^{p-1})
          // must be one constant mu >= 0 wherever out is nonzero.
          double mu = 0.0;
          for (int i = 0; i < M; ++i) {
            const double g = p.value() *
                             qcs::ipow(std::fabs(out[i]), p.value() - 1) *
                             (out[i] < 0.0 ? -1.0 : 1.0);
            if (std::fabs(g) > 1e-12) {
              mu = (v[i] - out[i]) / g;
              break;
            }
          }
          for (int i = 0; i < M; ++i) {
            const double g = p.value() *
                             qcs::ipow(std::fabs(out[i]), p.value() - 1) *
                             (out[i] < 0.0 ? -1.0 : 1.0);
            worst_kkt = std::max(worst_kkt,
                                 std::fabs(v[i] - out[i] - mu * g));
          }
        }
        const Eigen::VectorXd again = qcs::project_lp_ball(out, p, radius);
        worst_idem = std::max(worst_idem, (again - out).norm());
      }
      const bool pass =
          worst_norm <= 1e-6 && worst_kkt <= 1e-8 && worst_idem <= 1e-12;
      ok = ok && pass;
      std::printf(
          "p=%-4s M=%-3d  |norm-r|=%.3e  kkt=%.3e  idem=%.3e  %s\n",
          p.str().c_str(), M, worst_norm, worst_kkt, worst_idem,
          pass ? "ok" : "FAIL");
    }
  }
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"quantized compressive sensing: quantizer design, level "
               "tables, and reconstruction experiments"};
  app.set_version_flag("--version", std::string(qcs::kVersion) + " (" +
                                        qcs::kGitDescribe + ")");
  app.require_subcommand(1);

  // ---- design ----
  int design_B = 4;
  double design_sigma0 = 1.0;
  std::string design_out = "-";
  CLI::App* design =
      app.add_subcommand("design", "design the companded quantizer (JSON)");
  design->add_option("--B", design_B, "bits per measurement")->required();
  design->add_option("--sigma0", design_sigma0, "source std");
  design->add_option("--out", design_out, "output file ('-' for stdout)");
  design->callback([&]() {
    const qcs::QuantizerModel q =
        qcs::design_quantizer(design_B, qcs::GaussianSource{design_sigma0});
    emit(qcs::quantizer_to_json(q) + "\n", design_out);
  });

  // ---- plevels ----
  int pl_B = 4;
  std::string pl_p = "2";
  double pl_sigma0 = 1.0;
  int pl_quad = qcs::kDefaultQuadraturePoints;
  std::string pl_out = "-";
  CLI::App* plv = app.add_subcommand(
      "plevels", "distortion-optimal reproduction levels (JSON)");
  plv->add_option("--B", pl_B, "bits per measurement")->required();
  plv->add_option("--p", pl_p, "fidelity exponent (>=2 or inf)")->required();
  plv->add_option("--sigma0", pl_sigma0, "source std");
  plv->add_option("--quad", pl_quad, "quadrature point count (odd)");
  plv->add_option("--out", pl_out, "output file ('-' for stdout)");
  plv->callback([&]() {
    const qcs::QuantizerModel q =
        qcs::design_quantizer(pl_B, qcs::GaussianSource{pl_sigma0});
    const qcs::PLevelTable table =
        qcs::plevel_table(qcs::Exponent::parse(pl_p), q, pl_quad);
    emit(qcs::plevel_table_to_json(table) + "\n", pl_out);
  });

  // ---- experiments ----
  add_experiment_cmd(app, "eps-validate",
                     "quantization-error norm vs the closed-form radius",
                     qcs::ExperimentKind::kEpsValidate);
  add_experiment_cmd(app, "qcs-sweep",
                     "reconstruction SNR over the (M/K, p) grid",
                     qcs::ExperimentKind::kQcsSweep);
  add_experiment_cmd(app, "ggd-stab",
                     "stabilized vs plain decoding under uneven noise",
                     qcs::ExperimentKind::kGgdStab);
  add_experiment_cmd(app, "qc-hist",
                     "consistency histogram of the reconstruction",
                     qcs::ExperimentKind::kQcHist);
  add_experiment_cmd(app, "uniform-compare",
                     "non-uniform vs uniform quantization at the same p",
                     qcs::ExperimentKind::kUniformCompare);

  // ---- project-test ----
  int pt_count = 200;
  std::vector<int> pt_m = {2, 5, 20};
  std::vector<std::string> pt_p = {"3", "4", "7"};
  std::uint64_t pt_seed = 42;
  int pt_rc = 0;
  CLI::App* pt = app.add_subcommand(
      "project-test", "self-test of the lp-ball projection on random inputs");
  pt->add_option("--count", pt_count, "instances per (p, M) cell");
  pt->add_option("--M", pt_m, "vector lengths")->delimiter(',');
  pt->add_option("--p-list", pt_p, "exponents (>=2 or inf)")->delimiter(',');
  pt->add_option("--seed", pt_seed, "master seed");
  pt->callback([&]() { pt_rc = run_project_test(pt_count, pt_m, pt_p, pt_seed); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return pt_rc;
}
