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
#include "qcs/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <stdexcept>
#include <thread>
#include <utility>

#include <nlohmann/json.hpp>

#include "qcs/compander.hpp"
#include "qcs/plevels.hpp"
#include "qcs/sensing.hpp"
#include "qcs/version.hpp"
#include "qcs/wnorm.hpp"

namespace qcs {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start)
      .count();
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Pairwise summation keeps aggregate values independent of how trials were
// scheduled across threads (slot order is deterministic; the reduction tree
// is too).
double pairwise_sum(const double* a, std::size_t n) {
  if (n <= 8) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i];
    return s;
  }
  const std::size_t h = n / 2;
  return pairwise_sum(a, h) + pairwise_sum(a + h, n - h);
}

struct MeanStderr {
  double mean = std::numeric_limits<double>::quiet_NaN();
  double stderr_ = 0.0;
};

MeanStderr mean_stderr(const std::vector<double>& v) {
  MeanStderr out;
  if (v.empty()) return out;
  const std::size_t n = v.size();
  out.mean = pairwise_sum(v.data(), n) / static_cast<double>(n);
  if (n > 1) {
    std::vector<double> sq(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double d = v[i] - out.mean;
      sq[i] = d * d;
    }
    const double var = pairwise_sum(sq.data(), n) / static_cast<double>(n - 1);
    out.stderr_ = std::sqrt(var / static_cast<double>(n));
  }
  return out;
}

// Per-trial seeds: one hop isolates the cell, a second hop spreads trial
// indices, so trials are independent substreams regardless of scheduling.
std::uint64_t cell_tag(ExperimentKind kind, int M) {
  std::uint64_t t = static_cast<std::uint64_t>(kind) + 1;
  t = t * 0x100000001b3ULL ^ static_cast<std::uint64_t>(M);
  return t;
}

std::uint64_t trial_seed(std::uint64_t master, std::uint64_t tag, int trial) {
  return splitmix64(splitmix64(master ^ splitmix64(tag)) +
                    static_cast<std::uint64_t>(trial));
}

// Runs jobs [0, njobs) on `threads` workers, each striding over job
// indices. Jobs write only their own result slots, so any schedule produces
// identical output. A job that throws marks itself through `on_error`.
template <typename Job>
void run_jobs(int njobs, int threads, const Job& job) {
  threads = std::max(1, std::min({threads, njobs, 64}));
  if (threads == 1) {
    for (int j = 0; j < njobs; ++j) job(j);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int w = 0; w < threads; ++w) {
    pool.emplace_back([=]() {
      for (int j = w; j < njobs; j += threads) job(j);
    });
  }
  for (std::thread& t : pool) t.join();
}

int exponent_key(const Exponent& p) { return p.is_inf() ? -1 : p.value(); }

// Distortion-optimal level tables for every exponent in the run; the p = 2
// decoder keeps the compander levels themselves (its weights are identically
// one and its radius already matches), so it carries no table.
std::map<int, PLevelTable> build_tables(const std::vector<Exponent>& p_list,
                                        const QuantizerModel& q) {
  std::map<int, PLevelTable> tables;
  for (const Exponent& p : p_list) {
    const int key = exponent_key(p);
    if (key == 2 || tables.count(key) != 0) continue;
    tables.emplace(key, plevel_table(p, q));
  }
  return tables;
}

struct DecodeResult {
  SolveReport report;
  double snr = std::numeric_limits<double>::quiet_NaN();
  double qc_rate = 0.0;
  bool failed = true;
};

// One reconstruction: assemble the weighted fidelity constraint for the
// exponent, solve, and score against the true signal.
DecodeResult decode_trial(const Eigen::VectorXd& x,
                          const Eigen::MatrixXd& sensing,
                          const Eigen::VectorXd& center,
                          const Eigen::VectorXd& weights, Exponent p,
                          double radius, const QuantizerModel& q,
                          const Eigen::VectorXi& bins,
                          const SolverConfig& solver) {
  DecodeResult out;
  WeightedConstraint constraint;
  constraint.p = p;
  constraint.weights = weights;
  constraint.radius = radius;
  constraint.center = center;
  out.report = gbpdn_solve(center, sensing, constraint, solver);
  out.snr = snr_db(x, out.report.estimate);
  const Eigen::VectorXd z_est = sensing * out.report.estimate;
  int agree = 0;
  for (Eigen::Index i = 0; i < z_est.size(); ++i) {
    if (quantize(z_est[i], q).bin == bins[i]) ++agree;
  }
  out.qc_rate = static_cast<double>(agree) / static_cast<double>(z_est.size());
  out.failed = out.report.status == "diverged" || !std::isfinite(out.snr);
  return out;
}

std::ofstream open_csv(const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  return f;
}

int ratio_to_m(double m_over_k, int K) {
  const int M = static_cast<int>(std::lround(m_over_k * K));
  if (M < 1) throw std::invalid_argument("oversampling ratio yields M < 1");
  return M;
}

void validate_common(const ExperimentSpec& spec) {
  if (spec.trials < 1) throw std::invalid_argument("trials must be >= 1");
  if (spec.p_list.empty()) throw std::invalid_argument("p_list is empty");
  if (spec.oversampling_list.empty() &&
      spec.kind != ExperimentKind::kEpsValidate) {
    throw std::invalid_argument("oversampling_list is empty");
  }
}

}  // namespace

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::kEpsValidate: return "EPS_VALIDATE";
    case ExperimentKind::kGgdStab: return "GGD_STAB";
    case ExperimentKind::kQcsSweep: return "QCS_SWEEP";
    case ExperimentKind::kQcHist: return "QC_HIST";
    case ExperimentKind::kUniformCompare: return "UNIFORM_COMPARE";
  }
  throw std::logic_error("unreachable experiment kind");
}

std::string to_string(RadiusMode mode) {
  return mode == RadiusMode::kClosedForm ? "CLOSED_FORM" : "ORACLE";
}

namespace {
std::string canonical_token(std::string text) {
  for (char& c : text) {
    c = c == '-' ? '_' : static_cast<char>(std::toupper(
                             static_cast<unsigned char>(c)));
  }
  return text;
}
}  // namespace

ExperimentKind parse_experiment_kind(const std::string& text) {
  const std::string t = canonical_token(text);
  if (t == "EPS_VALIDATE") return ExperimentKind::kEpsValidate;
  if (t == "GGD_STAB") return ExperimentKind::kGgdStab;
  if (t == "QCS_SWEEP") return ExperimentKind::kQcsSweep;
  if (t == "QC_HIST") return ExperimentKind::kQcHist;
  if (t == "UNIFORM_COMPARE") return ExperimentKind::kUniformCompare;
  throw std::invalid_argument("unknown experiment kind: " + text);
}

RadiusMode parse_radius_mode(const std::string& text) {
  const std::string t = canonical_token(text);
  if (t == "CLOSED_FORM" || t == "LEMMA3") return RadiusMode::kClosedForm;
  if (t == "ORACLE") return RadiusMode::kOracle;
  throw std::invalid_argument("unknown radius mode: " + text);
}

ExperimentSpec desk_defaults(ExperimentKind kind) {
  ExperimentSpec spec;
  spec.kind = kind;
  switch (kind) {
    case ExperimentKind::kEpsValidate: {
      spec.trials = 1000;
      spec.p_list.clear();
      for (int p = 2; p <= 15; ++p) spec.p_list.push_back(Exponent(p));
      break;
    }
    case ExperimentKind::kGgdStab: {
      spec.oversampling_list = {20, 50};
      spec.p_list = {Exponent(2)};
      spec.trials = 20;
      break;
    }
    case ExperimentKind::kQcHist: {
      spec.oversampling_list = {40};
      spec.p_list = {Exponent(2), Exponent(10)};
      spec.trials = 20;
      break;
    }
    case ExperimentKind::kQcsSweep:
    case ExperimentKind::kUniformCompare:
      break;  // the struct defaults are the desk grid
  }
  return spec;
}

ExperimentSpec paper_scale(ExperimentSpec spec) {
  spec.N = 1024;
  spec.K = 16;
  spec.trials = 50;
  switch (spec.kind) {
    case ExperimentKind::kEpsValidate: {
      spec.trials = 1000;
      spec.direct_m = 1024;
      spec.b_list = {3, 4, 5};
      spec.p_list.clear();
      for (int p = 2; p <= 15; ++p) spec.p_list.push_back(Exponent(p));
      break;
    }
    case ExperimentKind::kGgdStab: {
      spec.oversampling_list = {10, 15, 20, 25, 30, 35, 40, 45, 50};
      spec.p_list = {Exponent(2)};
      break;
    }
    case ExperimentKind::kQcsSweep:
    case ExperimentKind::kUniformCompare: {
      spec.oversampling_list = {10, 15, 20, 25, 30, 35, 40, 45};
      spec.p_list = {Exponent(2), Exponent(4), Exponent(6), Exponent(8),
                     Exponent(10)};
      break;
    }
    case ExperimentKind::kQcHist: {
      spec.oversampling_list = {40};
      spec.p_list = {Exponent(2), Exponent(10)};
      break;
    }
  }
  return spec;
}

double snr_db(const Eigen::VectorXd& x, const Eigen::VectorXd& estimate) {
  if (x.size() != estimate.size()) {
    throw std::invalid_argument("snr_db: size mismatch");
  }
  const double err = (x - estimate).norm();
  if (err == 0.0) return std::numeric_limits<double>::infinity();
  return 20.0 * std::log10(x.norm() / err);
}

std::vector<EpsValidationRow> run_eps_validation(const ExperimentSpec& spec) {
  validate_common(spec);
  if (spec.b_list.empty()) throw std::invalid_argument("b_list is empty");
  if (spec.direct_m < 1) throw std::invalid_argument("direct_m must be >= 1");
  const GaussianSource src{spec.sigma0};
  validate_source(src);

  struct BitDepth {
    QuantizerModel q;
    std::map<int, PLevelTable> tables;
  };
  std::vector<BitDepth> depths;
  depths.reserve(spec.b_list.size());
  for (int B : spec.b_list) {
    BitDepth d{design_quantizer(B, src), {}};
    d.tables = build_tables(spec.p_list, d.q);
    depths.push_back(std::move(d));
  }

  const int n_cells =
      static_cast<int>(spec.b_list.size() * spec.p_list.size());
  const int T = spec.trials;
  std::vector<std::vector<double>> ratios(n_cells, std::vector<double>(T));

  const std::uint64_t tag = cell_tag(spec.kind, spec.direct_m);
  run_jobs(T, spec.threads, [&](int t) {
    Philox rng(trial_seed(spec.master_seed, tag, t),
               static_cast<std::uint64_t>(StreamId::kMeasurementSource));
    Eigen::VectorXd z(spec.direct_m);
    for (int i = 0; i < spec.direct_m; ++i) {
      z[i] = spec.sigma0 * rng.next_gaussian();
    }
    for (std::size_t bi = 0; bi < depths.size(); ++bi) {
      const BitDepth& d = depths[bi];
      Eigen::VectorXi bins(spec.direct_m);
      Eigen::VectorXd levels(spec.direct_m);
      for (int i = 0; i < spec.direct_m; ++i) {
        const QuantizeResult r = quantize(z[i], d.q);
        bins[i] = r.bin;
        levels[i] = r.level;
      }
      for (std::size_t pi = 0; pi < spec.p_list.size(); ++pi) {
        const Exponent p = spec.p_list[pi];
        const auto it = d.tables.find(exponent_key(p));
        Eigen::VectorXd center = levels;
        if (it != d.tables.end()) {
          for (int i = 0; i < spec.direct_m; ++i) {
            center[i] = it->second.plevels[bins[i] - 1];
          }
        }
        const Eigen::VectorXd w = dpc_weights(center, p, src);
        const double radius =
            epsilon_p(spec.direct_m, spec.b_list[bi], p, src);
        ratios[bi * spec.p_list.size() + pi][t] =
            weighted_lp_norm(z - center, w, p) / radius;
      }
    }
  });

  std::vector<EpsValidationRow> rows;
  rows.reserve(n_cells);
  for (std::size_t bi = 0; bi < spec.b_list.size(); ++bi) {
    for (std::size_t pi = 0; pi < spec.p_list.size(); ++pi) {
      const MeanStderr ms = mean_stderr(ratios[bi * spec.p_list.size() + pi]);
      rows.push_back(
          {spec.b_list[bi], spec.p_list[pi], ms.mean, ms.stderr_});
    }
  }
  return rows;
}

SweepResult run_qcs_sweep(const ExperimentSpec& spec) {
  validate_common(spec);
  const GaussianSource src{spec.sigma0};
  const QuantizerModel q = design_quantizer(spec.B, src);
  const std::map<int, PLevelTable> tables = build_tables(spec.p_list, q);

  const int nr = static_cast<int>(spec.oversampling_list.size());
  const int np = static_cast<int>(spec.p_list.size());
  const int T = spec.trials;
  std::vector<TrialRecord> records(
      static_cast<std::size_t>(nr) * np * T);

  // One job per (ratio, trial): the signal, matrix, and quantized
  // measurements are shared by every exponent so decoder comparisons are
  // paired.
  run_jobs(nr * T, spec.threads, [&](int job) {
    const int ri = job / T;
    const int t = job % T;
    const int M = ratio_to_m(spec.oversampling_list[ri], spec.K);
    const std::uint64_t seed =
        trial_seed(spec.master_seed, cell_tag(spec.kind, M), t);
    try {
      SparseSignalSpec sig;
      sig.N = spec.N;
      sig.K = spec.K;
      sig.seed = seed;
      const Eigen::VectorXd x = sparse_signal(sig);
      const Eigen::MatrixXd Phi = gaussian_matrix(M, spec.N, seed);
      const Eigen::VectorXd z = Phi * x;
      const QcsMeasurement meas = qcs_measure(x, Phi, q, nullptr);
      for (int pi = 0; pi < np; ++pi) {
        const Exponent p = spec.p_list[pi];
        TrialRecord& rec =
            records[(static_cast<std::size_t>(ri) * np + pi) * T + t];
        rec.trial_index = t;
        rec.seed = seed;
        rec.M = M;
        rec.p = p;
        rec.B = spec.B;
        const auto start = Clock::now();
        const auto it = tables.find(exponent_key(p));
        Eigen::VectorXd center = meas.levels;
        if (it != tables.end()) {
          for (Eigen::Index i = 0; i < center.size(); ++i) {
            center[i] = it->second.plevels[meas.bins[i] - 1];
          }
        }
        const Eigen::VectorXd w = dpc_weights(center, p, src);
        const double radius = spec.radius_mode == RadiusMode::kClosedForm
                                  ? epsilon_p(M, spec.B, p, src)
                                  : weighted_lp_norm(z - center, w, p);
        const DecodeResult dec = decode_trial(x, Phi, center, w, p, radius, q,
                                              meas.bins, spec.solver);
        rec.snr_db = dec.snr;
        rec.iterations = dec.report.iterations;
        rec.fidelity_residual = dec.report.fidelity_residual;
        rec.qc_rate = dec.qc_rate;
        rec.failed = dec.failed;
        rec.wallclock_ms = elapsed_ms(start);
      }
    } catch (const std::exception&) {
      for (int pi = 0; pi < np; ++pi) {
        TrialRecord& rec =
            records[(static_cast<std::size_t>(ri) * np + pi) * T + t];
        rec.trial_index = t;
        rec.seed = seed;
        rec.M = M;
        rec.p = spec.p_list[pi];
        rec.B = spec.B;
        rec.snr_db = std::numeric_limits<double>::quiet_NaN();
        rec.failed = true;
      }
    }
  });

  SweepResult out;
  out.trials = std::move(records);
  for (int ri = 0; ri < nr; ++ri) {
    for (int pi = 0; pi < np; ++pi) {
      SweepCell cell;
      cell.m_over_k = spec.oversampling_list[ri];
      cell.M = ratio_to_m(cell.m_over_k, spec.K);
      cell.p = spec.p_list[pi];
      cell.B = spec.B;
      std::vector<double> snrs;
      snrs.reserve(T);
      for (int t = 0; t < T; ++t) {
        const TrialRecord& rec =
            out.trials[(static_cast<std::size_t>(ri) * np + pi) * T + t];
        if (rec.failed) {
          ++cell.failures;
        } else {
          snrs.push_back(rec.snr_db);
        }
      }
      const MeanStderr ms = mean_stderr(snrs);
      cell.mean_snr_db = ms.mean;
      cell.stderr_snr_db = ms.stderr_;
      out.aggregate.push_back(cell);
    }
  }
  return out;
}

std::vector<GgdStabRow> run_ggd_stabilization(const ExperimentSpec& spec) {
  validate_common(spec);
  if (!(spec.noise_sigma0 > 0.0) || spec.noise_delta0 < 0.0 ||
      spec.noise_delta0 >= spec.noise_sigma0) {
    throw std::invalid_argument(
        "ggd stabilization requires 0 <= delta0 < sigma0");
  }

  const int nr = static_cast<int>(spec.oversampling_list.size());
  const int T = spec.trials;
  struct PairResult {
    double snr_stab = 0.0;
    double snr_unstab = 0.0;
    double predicted = 0.0;
    bool failed = true;
  };
  std::vector<PairResult> results(static_cast<std::size_t>(nr) * T);

  run_jobs(nr * T, spec.threads, [&](int job) {
    const int ri = job / T;
    const int t = job % T;
    const int M = ratio_to_m(spec.oversampling_list[ri], spec.K);
    const std::uint64_t seed =
        trial_seed(spec.master_seed, cell_tag(spec.kind, M), t);
    PairResult& res = results[static_cast<std::size_t>(ri) * T + t];
    try {
      SparseSignalSpec sig;
      sig.N = spec.N;
      sig.K = spec.K;
      sig.seed = seed;
      const Eigen::VectorXd x = sparse_signal(sig);
      const Eigen::MatrixXd Phi = gaussian_matrix(M, spec.N, seed);

      // Heteroscedastic Gaussian noise: per-measurement std drawn uniformly
      // from [sigma0 - delta0, sigma0 + delta0]; GGD shape 2 with scale
      // sigma*sqrt(2) is exactly N(0, sigma^2).
      Philox lvl(seed,
                 static_cast<std::uint64_t>(StreamId::kMeasurementSource));
      Eigen::VectorXd sigma(M);
      for (int i = 0; i < M; ++i) {
        sigma[i] = spec.noise_sigma0 +
                   spec.noise_delta0 * (2.0 * lvl.next_double() - 1.0);
      }
      GGDNoiseSpec noise_spec;
      noise_spec.shape_p = 2.0;
      noise_spec.scales = sigma * std::sqrt(2.0);
      noise_spec.seed = seed;
      const Eigen::VectorXd noise = ggd_noise(noise_spec);
      const Eigen::VectorXd y = Phi * x + noise;

      const Eigen::VectorXd w = sigma.cwiseInverse();
      const double eps_stab = w.cwiseProduct(noise).norm();
      const double eps_unstab = noise.norm();
      res.predicted =
          20.0 * std::log10(eps_unstab * w.norm() /
                            (eps_stab * std::sqrt(static_cast<double>(M))));

      WeightedConstraint stab{Exponent(2), w, eps_stab, y};
      WeightedConstraint unstab{Exponent(2), Eigen::VectorXd::Ones(M),
                                eps_unstab, y};
      const SolveReport rep_stab = gbpdn_solve(y, Phi, stab, spec.solver);
      const SolveReport rep_unstab = gbpdn_solve(y, Phi, unstab, spec.solver);
      res.snr_stab = snr_db(x, rep_stab.estimate);
      res.snr_unstab = snr_db(x, rep_unstab.estimate);
      res.failed = rep_stab.status == "diverged" ||
                   rep_unstab.status == "diverged" ||
                   !std::isfinite(res.snr_stab) ||
                   !std::isfinite(res.snr_unstab);
    } catch (const std::exception&) {
      res.failed = true;
    }
  });

  std::vector<GgdStabRow> rows;
  rows.reserve(nr);
  for (int ri = 0; ri < nr; ++ri) {
    GgdStabRow row;
    row.m_over_k = spec.oversampling_list[ri];
    row.M = ratio_to_m(row.m_over_k, spec.K);
    std::vector<double> s, u, pr;
    for (int t = 0; t < T; ++t) {
      const PairResult& res = results[static_cast<std::size_t>(ri) * T + t];
      if (res.failed) continue;
      s.push_back(res.snr_stab);
      u.push_back(res.snr_unstab);
      pr.push_back(res.predicted);
    }
    row.mean_snr_stabilized_db = mean_stderr(s).mean;
    row.mean_snr_unstabilized_db = mean_stderr(u).mean;
    row.gain_db = row.mean_snr_stabilized_db - row.mean_snr_unstabilized_db;
    row.predicted_gain_db = mean_stderr(pr).mean;
    rows.push_back(row);
  }
  return rows;
}

Eigen::VectorXd qc_offsets(const Eigen::VectorXd& estimate,
                           const Eigen::MatrixXd& sensing,
                           const Eigen::VectorXi& bins,
                           const QuantizerModel& q) {
  if (estimate.size() != sensing.cols() || bins.size() != sensing.rows()) {
    throw std::invalid_argument("qc_offsets: shape mismatch");
  }
  const GaussianSource src = q.source();
  const Eigen::VectorXd z = sensing * estimate;
  Eigen::VectorXd r(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    r[i] = compress(z[i], src) / q.alpha - (static_cast<double>(bins[i]) - 0.5);
  }
  return r;
}

std::vector<QcHistogram> run_qc_histogram(const ExperimentSpec& spec) {
  validate_common(spec);
  const GaussianSource src{spec.sigma0};
  const QuantizerModel q = design_quantizer(spec.B, src);
  const std::map<int, PLevelTable> tables = build_tables(spec.p_list, q);

  const int nr = static_cast<int>(spec.oversampling_list.size());
  const int np = static_cast<int>(spec.p_list.size());
  const int T = spec.trials;
  const double cell_width = 2.0 * kQcHistogramHalfRange / kQcHistogramCells;

  struct TrialHist {
    std::vector<long long> counts;
    long long violations = 0;
    long long total = 0;
  };
  std::vector<TrialHist> parts(static_cast<std::size_t>(nr) * np * T);

  run_jobs(nr * T, spec.threads, [&](int job) {
    const int ri = job / T;
    const int t = job % T;
    const int M = ratio_to_m(spec.oversampling_list[ri], spec.K);
    const std::uint64_t seed =
        trial_seed(spec.master_seed, cell_tag(spec.kind, M), t);
    SparseSignalSpec sig;
    sig.N = spec.N;
    sig.K = spec.K;
    sig.seed = seed;
    const Eigen::VectorXd x = sparse_signal(sig);
    const Eigen::MatrixXd Phi = gaussian_matrix(M, spec.N, seed);
    const Eigen::VectorXd z = Phi * x;
    const QcsMeasurement meas = qcs_measure(x, Phi, q, nullptr);
    for (int pi = 0; pi < np; ++pi) {
      const Exponent p = spec.p_list[pi];
      const auto it = tables.find(exponent_key(p));
      Eigen::VectorXd center = meas.levels;
      if (it != tables.end()) {
        for (Eigen::Index i = 0; i < center.size(); ++i) {
          center[i] = it->second.plevels[meas.bins[i] - 1];
        }
      }
      const Eigen::VectorXd w = dpc_weights(center, p, src);
      const double radius = spec.radius_mode == RadiusMode::kClosedForm
                                ? epsilon_p(M, spec.B, p, src)
                                : weighted_lp_norm(z - center, w, p);
      const DecodeResult dec = decode_trial(x, Phi, center, w, p, radius, q,
                                            meas.bins, spec.solver);
      const Eigen::VectorXd offsets =
          qc_offsets(dec.report.estimate, Phi, meas.bins, q);
      TrialHist& h = parts[(static_cast<std::size_t>(ri) * np + pi) * T + t];
      h.counts.assign(kQcHistogramCells, 0);
      for (Eigen::Index i = 0; i < offsets.size(); ++i) {
        const double r = offsets[i];
        int cell = static_cast<int>(
            std::floor((r + kQcHistogramHalfRange) / cell_width));
        cell = std::max(0, std::min(kQcHistogramCells - 1, cell));
        ++h.counts[cell];
        if (std::fabs(r) > 0.5) ++h.violations;
      }
      h.total = offsets.size();
    }
  });

  std::vector<QcHistogram> out;
  out.reserve(static_cast<std::size_t>(nr) * np);
  for (int ri = 0; ri < nr; ++ri) {
    for (int pi = 0; pi < np; ++pi) {
      QcHistogram hist;
      hist.m_over_k = spec.oversampling_list[ri];
      hist.M = ratio_to_m(hist.m_over_k, spec.K);
      hist.p = spec.p_list[pi];
      hist.counts.assign(kQcHistogramCells, 0);
      long long violations = 0;
      for (int t = 0; t < T; ++t) {
        const TrialHist& h =
            parts[(static_cast<std::size_t>(ri) * np + pi) * T + t];
        for (int c = 0; c < kQcHistogramCells; ++c) {
          hist.counts[c] += h.counts[c];
        }
        violations += h.violations;
        hist.total += h.total;
      }
      hist.violation_fraction =
          hist.total > 0
              ? static_cast<double>(violations) / static_cast<double>(hist.total)
              : 0.0;
      out.push_back(std::move(hist));
    }
  }
  return out;
}

std::vector<UniformCompareRow> run_uniform_compare(const ExperimentSpec& spec) {
  validate_common(spec);
  const GaussianSource src{spec.sigma0};
  const QuantizerModel q = design_quantizer(spec.B, src);
  const std::map<int, PLevelTable> tables = build_tables(spec.p_list, q);

  const int nr = static_cast<int>(spec.oversampling_list.size());
  const int np = static_cast<int>(spec.p_list.size());
  const int T = spec.trials;
  struct PairResult {
    double snr_nonuniform = 0.0;
    double snr_uniform = 0.0;
    bool failed = true;
  };
  std::vector<PairResult> results(static_cast<std::size_t>(nr) * np * T);

  run_jobs(nr * T, spec.threads, [&](int job) {
    const int ri = job / T;
    const int t = job % T;
    const int M = ratio_to_m(spec.oversampling_list[ri], spec.K);
    const std::uint64_t seed =
        trial_seed(spec.master_seed, cell_tag(spec.kind, M), t);
    SparseSignalSpec sig;
    sig.N = spec.N;
    sig.K = spec.K;
    sig.seed = seed;
    const Eigen::VectorXd x = sparse_signal(sig);
    const Eigen::MatrixXd Phi = gaussian_matrix(M, spec.N, seed);
    const Eigen::VectorXd z = Phi * x;
    const QcsMeasurement meas = qcs_measure(x, Phi, q, nullptr);
    const Eigen::VectorXd y_uniform = uniform_quantize_baseline(z, spec.B);
    const double alpha_uniform =
        2.0 * z.lpNorm<Eigen::Infinity>() / std::ldexp(1.0, spec.B);
    for (int pi = 0; pi < np; ++pi) {
      const Exponent p = spec.p_list[pi];
      PairResult& res =
          results[(static_cast<std::size_t>(ri) * np + pi) * T + t];
      try {
        const auto it = tables.find(exponent_key(p));
        Eigen::VectorXd center = meas.levels;
        if (it != tables.end()) {
          for (Eigen::Index i = 0; i < center.size(); ++i) {
            center[i] = it->second.plevels[meas.bins[i] - 1];
          }
        }
        const Eigen::VectorXd w = dpc_weights(center, p, src);
        const double radius = spec.radius_mode == RadiusMode::kClosedForm
                                  ? epsilon_p(M, spec.B, p, src)
                                  : weighted_lp_norm(z - center, w, p);
        const DecodeResult non_uni = decode_trial(x, Phi, center, w, p, radius,
                                                  q, meas.bins, spec.solver);

        // Uniform-noise model radius: the quantization error is uniform on
        // [-alpha'/2, alpha'/2], so E|e|^p = (alpha'/2)^p/(p+1) and the
        // expected error norm is (alpha'/2)(M/(p+1))^{1/p}; the sup norm
        // tends to the half cell itself.
        const Eigen::VectorXd ones = Eigen::VectorXd::Ones(M);
        double radius_uniform;
        if (spec.radius_mode == RadiusMode::kOracle) {
          radius_uniform = weighted_lp_norm(z - y_uniform, ones, p);
        } else if (p.is_inf()) {
          radius_uniform = 0.5 * alpha_uniform;
        } else {
          radius_uniform =
              0.5 * alpha_uniform *
              std::pow(static_cast<double>(M) / (p.value() + 1),
                       1.0 / p.value());
        }
        WeightedConstraint uni{p, ones, radius_uniform, y_uniform};
        const SolveReport rep_uni =
            gbpdn_solve(y_uniform, Phi, uni, spec.solver);
        res.snr_nonuniform = non_uni.snr;
        res.snr_uniform = snr_db(x, rep_uni.estimate);
        res.failed = non_uni.failed || rep_uni.status == "diverged" ||
                     !std::isfinite(res.snr_uniform);
      } catch (const std::exception&) {
        res.failed = true;
      }
    }
  });

  std::vector<UniformCompareRow> rows;
  rows.reserve(static_cast<std::size_t>(nr) * np);
  for (int ri = 0; ri < nr; ++ri) {
    for (int pi = 0; pi < np; ++pi) {
      UniformCompareRow row;
      row.m_over_k = spec.oversampling_list[ri];
      row.M = ratio_to_m(row.m_over_k, spec.K);
      row.p = spec.p_list[pi];
      std::vector<double> a, b;
      for (int t = 0; t < T; ++t) {
        const PairResult& res =
            results[(static_cast<std::size_t>(ri) * np + pi) * T + t];
        if (res.failed) {
          ++row.failures;
          continue;
        }
        a.push_back(res.snr_nonuniform);
        b.push_back(res.snr_uniform);
      }
      row.mean_snr_nonuniform_db = mean_stderr(a).mean;
      row.mean_snr_uniform_db = mean_stderr(b).mean;
      row.gain_db = row.mean_snr_nonuniform_db - row.mean_snr_uniform_db;
      rows.push_back(row);
    }
  }
  return rows;
}

// ---- serialization ----

namespace {
constexpr const char* kCrlf = "\r\n";
}

void write_eps_validation_csv(const std::vector<EpsValidationRow>& rows,
                              const std::string& path) {
  std::ofstream f = open_csv(path);
  f << "B,p,ratio,stderr" << kCrlf;
  for (const EpsValidationRow& r : rows) {
    f << r.B << ',' << r.p.str() << ',' << fmt(r.ratio) << ','
      << fmt(r.stderr_) << kCrlf;
  }
}

void write_trials_csv(const std::vector<TrialRecord>& rows,
                      const std::string& path) {
  std::ofstream f = open_csv(path);
  f << "trial_index,seed,M,p,B,snr_db,iterations,fidelity_residual,qc_rate,"
       "wallclock_ms"
    << kCrlf;
  for (const TrialRecord& r : rows) {
    f << r.trial_index << ',' << r.seed << ',' << r.M << ',' << r.p.str()
      << ',' << r.B << ',' << fmt(r.snr_db) << ',' << r.iterations << ','
      << fmt(r.fidelity_residual) << ',' << fmt(r.qc_rate) << ','
      << fmt(r.wallclock_ms) << kCrlf;
  }
}

void write_aggregate_csv(const std::vector<SweepCell>& rows,
                         const std::string& path) {
  std::ofstream f = open_csv(path);
  f << "M_over_K,M,p,B,mean_snr_db,stderr_snr_db,failures" << kCrlf;
  for (const SweepCell& r : rows) {
    f << fmt(r.m_over_k) << ',' << r.M << ',' << r.p.str() << ',' << r.B
      << ',' << fmt(r.mean_snr_db) << ',' << fmt(r.stderr_snr_db) << ','
      << r.failures << kCrlf;
  }
}

void write_ggd_stab_csv(const std::vector<GgdStabRow>& rows,
                        const std::string& path) {
  std::ofstream f = open_csv(path);
  f << "M_over_K,M,mean_snr_stabilized_db,mean_snr_unstabilized_db,gain_db,"
       "predicted_gain_db"
    << kCrlf;
  for (const GgdStabRow& r : rows) {
    f << fmt(r.m_over_k) << ',' << r.M << ','
      << fmt(r.mean_snr_stabilized_db) << ','
      << fmt(r.mean_snr_unstabilized_db) << ',' << fmt(r.gain_db) << ','
      << fmt(r.predicted_gain_db) << kCrlf;
  }
}

void write_qc_histogram_csv(const std::vector<QcHistogram>& rows,
                            const std::string& path) {
  std::ofstream f = open_csv(path);
  f << "M_over_K,M,p,cell_lo,cell_hi,count,total,violation_fraction" << kCrlf;
  const double width = 2.0 * kQcHistogramHalfRange / kQcHistogramCells;
  for (const QcHistogram& r : rows) {
    for (int c = 0; c < kQcHistogramCells; ++c) {
      const double lo = -kQcHistogramHalfRange + c * width;
      f << fmt(r.m_over_k) << ',' << r.M << ',' << r.p.str() << ','
        << fmt(lo) << ',' << fmt(lo + width) << ',' << r.counts[c] << ','
        << r.total << ',' << fmt(r.violation_fraction) << kCrlf;
    }
  }
}

void write_uniform_compare_csv(const std::vector<UniformCompareRow>& rows,
                               const std::string& path) {
  std::ofstream f = open_csv(path);
  f << "M_over_K,M,p,mean_snr_nonuniform_db,mean_snr_uniform_db,gain_db,"
       "failures"
    << kCrlf;
  for (const UniformCompareRow& r : rows) {
    f << fmt(r.m_over_k) << ',' << r.M << ',' << r.p.str() << ','
      << fmt(r.mean_snr_nonuniform_db) << ',' << fmt(r.mean_snr_uniform_db)
      << ',' << fmt(r.gain_db) << ',' << r.failures << kCrlf;
  }
}

namespace {

nlohmann::json exponent_to_json(const Exponent& p) {
  if (p.is_inf()) return nlohmann::json("inf");
  return nlohmann::json(p.value());
}

Exponent exponent_from_json(const nlohmann::json& j) {
  if (j.is_string()) return Exponent::parse(j.get<std::string>());
  return Exponent(j.get<int>());
}

nlohmann::json solver_to_json(const SolverConfig& s) {
  return nlohmann::json{{"max_iters", s.max_iters},
                        {"rel_change_tol", s.rel_change_tol},
                        {"theta", s.theta},
                        {"step_sigma", s.step_sigma},
                        {"step_tau", s.step_tau},
                        {"projection_tol", s.projection_tol},
                        {"projection_max_newton", s.projection_max_newton},
                        {"feasibility_slack_rel", s.feasibility_slack_rel}};
}

SolverConfig solver_from_json(const nlohmann::json& j) {
  SolverConfig s;
  for (const auto& [key, value] : j.items()) {
    if (key == "max_iters") {
      s.max_iters = value.get<int>();
    } else if (key == "rel_change_tol") {
      s.rel_change_tol = value.get<double>();
    } else if (key == "theta") {
      s.theta = value.get<double>();
    } else if (key == "step_sigma") {
      s.step_sigma = value.get<double>();
    } else if (key == "step_tau") {
      s.step_tau = value.get<double>();
    } else if (key == "projection_tol") {
      s.projection_tol = value.get<double>();
    } else if (key == "projection_max_newton") {
      s.projection_max_newton = value.get<int>();
    } else if (key == "feasibility_slack_rel") {
      s.feasibility_slack_rel = value.get<double>();
    } else {
      throw std::invalid_argument("unknown solver config key: " + key);
    }
  }
  return s;
}

nlohmann::json spec_to_json_object(const ExperimentSpec& spec) {
  nlohmann::json p_list = nlohmann::json::array();
  for (const Exponent& p : spec.p_list) p_list.push_back(exponent_to_json(p));
  return nlohmann::json{{"kind", to_string(spec.kind)},
                        {"N", spec.N},
                        {"K", spec.K},
                        {"B", spec.B},
                        {"oversampling_list", spec.oversampling_list},
                        {"p_list", p_list},
                        {"trials", spec.trials},
                        {"master_seed", spec.master_seed},
                        {"radius_mode", to_string(spec.radius_mode)},
                        {"solver", solver_to_json(spec.solver)},
                        {"output_path", spec.output_path},
                        {"b_list", spec.b_list},
                        {"direct_m", spec.direct_m},
                        {"sigma0", spec.sigma0},
                        {"noise_sigma0", spec.noise_sigma0},
                        {"noise_delta0", spec.noise_delta0},
                        {"threads", spec.threads}};
}

}  // namespace

std::string spec_to_json(const ExperimentSpec& spec) {
  return spec_to_json_object(spec).dump(2) + "\n";
}

ExperimentSpec spec_from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  if (j.contains("spec")) j = j.at("spec");  // accept a full run manifest
  ExperimentSpec spec;
  for (const auto& [key, value] : j.items()) {
    if (key == "kind") {
      spec.kind = parse_experiment_kind(value.get<std::string>());
    } else if (key == "N") {
      spec.N = value.get<int>();
    } else if (key == "K") {
      spec.K = value.get<int>();
    } else if (key == "B") {
      spec.B = value.get<int>();
    } else if (key == "oversampling_list") {
      spec.oversampling_list = value.get<std::vector<double>>();
    } else if (key == "p_list") {
      spec.p_list.clear();
      for (const auto& e : value) spec.p_list.push_back(exponent_from_json(e));
    } else if (key == "trials") {
      spec.trials = value.get<int>();
    } else if (key == "master_seed") {
      spec.master_seed = value.get<std::uint64_t>();
    } else if (key == "radius_mode") {
      spec.radius_mode = parse_radius_mode(value.get<std::string>());
    } else if (key == "solver") {
      spec.solver = solver_from_json(value);
    } else if (key == "output_path") {
      spec.output_path = value.get<std::string>();
    } else if (key == "b_list") {
      spec.b_list = value.get<std::vector<int>>();
    } else if (key == "direct_m") {
      spec.direct_m = value.get<int>();
    } else if (key == "sigma0") {
      spec.sigma0 = value.get<double>();
    } else if (key == "noise_sigma0") {
      spec.noise_sigma0 = value.get<double>();
    } else if (key == "noise_delta0") {
      spec.noise_delta0 = value.get<double>();
    } else if (key == "threads") {
      spec.threads = value.get<int>();
    } else {
      throw std::invalid_argument("unknown spec key: " + key);
    }
  }
  return spec;
}

void write_manifest(const ExperimentSpec& spec, const std::string& path) {
  nlohmann::json manifest{{"spec", spec_to_json_object(spec)},
                          {"git_describe", kGitDescribe},
                          {"master_seed", spec.master_seed}};
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  f << manifest.dump(2) << "\n";
}

std::vector<std::string> run_experiment(const ExperimentSpec& spec) {
  namespace fs = std::filesystem;
  const fs::path dir(spec.output_path);
  if (!dir.empty()) fs::create_directories(dir);
  std::vector<std::string> written;
  auto out = [&](const char* name) {
    written.push_back((dir / name).string());
    return written.back();
  };
  switch (spec.kind) {
    case ExperimentKind::kEpsValidate:
      write_eps_validation_csv(run_eps_validation(spec),
                               out("eps_validate.csv"));
      break;
    case ExperimentKind::kGgdStab:
      write_ggd_stab_csv(run_ggd_stabilization(spec), out("ggd_stab.csv"));
      break;
    case ExperimentKind::kQcsSweep: {
      const SweepResult result = run_qcs_sweep(spec);
      write_trials_csv(result.trials, out("trials.csv"));
      write_aggregate_csv(result.aggregate, out("aggregate.csv"));
      break;
    }
    case ExperimentKind::kQcHist:
      write_qc_histogram_csv(run_qc_histogram(spec), out("qc_hist.csv"));
      break;
    case ExperimentKind::kUniformCompare:
      write_uniform_compare_csv(run_uniform_compare(spec),
                                out("uniform_compare.csv"));
      break;
  }
  write_manifest(spec, out("manifest.json"));
  return written;
}

}  // namespace qcs
