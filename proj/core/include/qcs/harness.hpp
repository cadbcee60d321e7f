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
#ifndef QCS_HARNESS_HPP_
#define QCS_HARNESS_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qcs/exponent.hpp"
#include "qcs/solver.hpp"

namespace qcs {

enum class ExperimentKind {
  kEpsValidate,     // quantization-error norm against the closed-form radius
  kGgdStab,         // heteroscedastic noise, stabilized vs plain decoder
  kQcsSweep,        // reconstruction SNR over the (M/K, p) grid
  kQcHist,          // consistency histogram of the reconstruction
  kUniformCompare,  // non-uniform vs uniform quantization at the same p
};

enum class RadiusMode {
  kClosedForm,  // fidelity radius from the distortion model
  kOracle,      // fidelity radius measured on the true signal
};

std::string to_string(ExperimentKind kind);
std::string to_string(RadiusMode mode);
ExperimentKind parse_experiment_kind(const std::string& text);
RadiusMode parse_radius_mode(const std::string& text);

// One experiment campaign. Desk-scale defaults; paper_scale() upgrades the
// grid to the full published setting.
struct ExperimentSpec {
  ExperimentKind kind = ExperimentKind::kQcsSweep;
  int N = 256;  // ambient dimension
  int K = 8;    // sparsity
  int B = 4;    // bits per measurement
  std::vector<double> oversampling_list = {10.0, 25.0, 40.0};  // M/K ratios
  std::vector<Exponent> p_list = {Exponent(2), Exponent(4), Exponent(10)};
  int trials = 10;
  std::uint64_t master_seed = 42;
  RadiusMode radius_mode = RadiusMode::kClosedForm;
  SolverConfig solver;
  std::string output_path = ".";

  // Grid parameters beyond the common fields.
  std::vector<int> b_list = {3, 4, 5};  // bit depths for kEpsValidate
  int direct_m = 1024;       // measurements per trial for kEpsValidate
  double sigma0 = 1.0;       // source std for quantizer design
  double noise_sigma0 = 0.1;  // kGgdStab noise level ...
  double noise_delta0 = 0.06;  // ... and its spread (delta0 < sigma0)
  int threads = 1;           // worker threads across trials
};

// Default desk-scale campaign for one experiment kind (the struct defaults
// plus the kind's own grid: measurement-batch validation runs its full
// (B, p) grid, the noise-stabilization and consistency-histogram studies
// their published ratios at 20 trials).
ExperimentSpec desk_defaults(ExperimentKind kind);

// Restores the full published grid on top of `spec`'s kind and seed.
ExperimentSpec paper_scale(ExperimentSpec spec);

// Outcome of a single reconstruction trial.
struct TrialRecord {
  int trial_index = 0;
  std::uint64_t seed = 0;
  int M = 0;
  Exponent p = Exponent(2);
  int B = 0;
  double snr_db = 0.0;
  int iterations = 0;
  double fidelity_residual = 0.0;
  double qc_rate = 0.0;  // fraction of measurements requantizing to their bin
  double wallclock_ms = 0.0;
  bool failed = false;  // solver diverged or produced a non-finite estimate
};

// ---- result tables ----

struct EpsValidationRow {
  int B = 0;
  Exponent p = Exponent(2);
  double ratio = 0.0;    // mean of ||q - z||_{p,w} / radius over trials
  double stderr_ = 0.0;  // standard error of that mean (0 for one trial)
};

struct SweepCell {
  double m_over_k = 0.0;
  int M = 0;
  Exponent p = Exponent(2);
  int B = 0;
  double mean_snr_db = 0.0;
  double stderr_snr_db = 0.0;
  int failures = 0;  // trials excluded from the aggregate
};

struct SweepResult {
  std::vector<TrialRecord> trials;
  std::vector<SweepCell> aggregate;
};

struct GgdStabRow {
  double m_over_k = 0.0;
  int M = 0;
  double mean_snr_stabilized_db = 0.0;
  double mean_snr_unstabilized_db = 0.0;
  double gain_db = 0.0;            // stabilized minus unstabilized
  double predicted_gain_db = 0.0;  // from the run's own oracle radii
};

// Offsets between the compressed reconstruction and its bin midpoints,
// pooled across trials: 40 cells of width 0.1 covering [-2, 2] so that the
// consistency edges +-1/2 fall exactly on cell boundaries; out-of-range
// offsets land in the edge cells.
inline constexpr int kQcHistogramCells = 40;
inline constexpr double kQcHistogramHalfRange = 2.0;

struct QcHistogram {
  double m_over_k = 0.0;
  int M = 0;
  Exponent p = Exponent(2);
  std::vector<long long> counts;    // kQcHistogramCells entries
  long long total = 0;              // equals M * trials
  double violation_fraction = 0.0;  // share of raw offsets outside [-1/2, 1/2]
};

struct UniformCompareRow {
  double m_over_k = 0.0;
  int M = 0;
  Exponent p = Exponent(2);
  double mean_snr_nonuniform_db = 0.0;
  double mean_snr_uniform_db = 0.0;
  double gain_db = 0.0;  // non-uniform minus uniform
  int failures = 0;
};

// ---- experiment drivers ----

// Reconstruction quality metric: 20 log10(||x|| / ||x - estimate||).
double snr_db(const Eigen::VectorXd& x, const Eigen::VectorXd& estimate);

// Draws Gaussian measurement batches, quantizes, and compares the weighted
// error norm against the closed-form radius, per (B, p) cell.
std::vector<EpsValidationRow> run_eps_validation(const ExperimentSpec& spec);

// Full pipeline per (M/K, p, trial): signal, sensing, quantization, decode,
// SNR. Trials whose solve diverges are recorded, excluded from the
// aggregate, and counted in SweepCell::failures.
SweepResult run_qcs_sweep(const ExperimentSpec& spec);

// Unquantized heteroscedastic-noise runs decoded twice: weights 1/sigma_i
// with the matching oracle radius, and unweighted with the plain one.
std::vector<GgdStabRow> run_ggd_stabilization(const ExperimentSpec& spec);

// Offsets of the estimate's measurements from their observed bin midpoints,
// in compressed-domain cell widths: entry i is G((sensing*estimate)_i)/alpha
// - (bins_i - 1/2). An offset within [-1/2, 1/2] means measurement i
// requantizes into its own bin.
Eigen::VectorXd qc_offsets(const Eigen::VectorXd& estimate,
                           const Eigen::MatrixXd& sensing,
                           const Eigen::VectorXi& bins,
                           const QuantizerModel& q);

// Pools qc_offsets of the reconstructions over trials, per (M/K, p) cell.
std::vector<QcHistogram> run_qc_histogram(const ExperimentSpec& spec);

// Same trials decoded from the companded quantizer (weighted) and from the
// measurement-range uniform quantizer (unweighted), gain in dB per cell.
std::vector<UniformCompareRow> run_uniform_compare(const ExperimentSpec& spec);

// ---- serialization ----

// CSV emission (RFC 4180: CRLF line endings, fixed header rows). Numeric
// fields print with "%.17g" so reruns are byte-identical; wallclock_ms is
// the only column exempt from that guarantee.
void write_eps_validation_csv(const std::vector<EpsValidationRow>& rows,
                              const std::string& path);
void write_trials_csv(const std::vector<TrialRecord>& rows,
                      const std::string& path);
void write_aggregate_csv(const std::vector<SweepCell>& rows,
                         const std::string& path);
void write_ggd_stab_csv(const std::vector<GgdStabRow>& rows,
                        const std::string& path);
void write_qc_histogram_csv(const std::vector<QcHistogram>& rows,
                            const std::string& path);
void write_uniform_compare_csv(const std::vector<UniformCompareRow>& rows,
                               const std::string& path);

// Spec <-> JSON. from_json accepts either a bare spec object or a full run
// manifest (an object with a "spec" member).
std::string spec_to_json(const ExperimentSpec& spec);
ExperimentSpec spec_from_json(const std::string& text);

// Manifest = {"spec": ..., "git_describe": ..., "master_seed": ...}.
void write_manifest(const ExperimentSpec& spec, const std::string& path);

// Runs the experiment selected by spec.kind and writes its CSV table(s) and
// manifest.json under spec.output_path. Returns the files written.
std::vector<std::string> run_experiment(const ExperimentSpec& spec);

}  // namespace qcs

#endif  // QCS_HARNESS_HPP_
