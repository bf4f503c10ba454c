// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "doamix/array.hpp"
#include "doamix/common.hpp"
#include "doamix/covariance.hpp"
#include "doamix/crlb.hpp"
#include "doamix/energy.hpp"
#include "doamix/estimators.hpp"
#include "doamix/quantizer.hpp"

namespace doamix {

enum class ExperimentId { Fig2PerfLoss, Fig3Spectrum, Fig4Ee, RmseVsCrlb };
enum class QuantizationPath { Aqnm, TrueQuantizer };

inline ExperimentId experiment_from_string(const std::string& name) {
  if (name == "fig2" || name == "fig2-perf-loss") return ExperimentId::Fig2PerfLoss;
  if (name == "fig3" || name == "fig3-spectrum") return ExperimentId::Fig3Spectrum;
  if (name == "fig4" || name == "fig4-ee") return ExperimentId::Fig4Ee;
  if (name == "rmse" || name == "rmse-vs-crlb") return ExperimentId::RmseVsCrlb;
  throw std::invalid_argument("unknown experiment id '" + name + "'");
}

inline std::string to_string(ExperimentId id) {
  switch (id) {
    case ExperimentId::Fig2PerfLoss: return "fig2-perf-loss";
    case ExperimentId::Fig3Spectrum: return "fig3-spectrum";
    case ExperimentId::Fig4Ee: return "fig4-ee";
    case ExperimentId::RmseVsCrlb: return "rmse-vs-crlb";
  }
  return "unknown";
}

/// Parameter grid, trial budget and seeding for one experiment.
struct ExperimentSpec {
  ExperimentId id = ExperimentId::RmseVsCrlb;
  std::vector<double> kappas{0.25};
  std::vector<int> bits{2};
  std::vector<double> gammas_db{0.0};
  int elements = 128;
  int snapshots = 32;
  std::vector<double> thetas_deg{30.0};
  double spacing = 0.5;
  int trials = 500;
  std::uint64_t base_seed = 20260809ull;
  QuantizationPath path = QuantizationPath::Aqnm;
  int threads = 0;  // 0 = all hardware threads
  double grid_step_deg = 0.05;
  PowerModel power = PowerModel::reference();

  static ExperimentSpec defaults(ExperimentId id) {
    ExperimentSpec s;
    s.id = id;
    switch (id) {
      case ExperimentId::Fig2PerfLoss:
        s.kappas.clear();
        for (int i = 0; i <= 32; ++i) s.kappas.push_back(i / 32.0);
        s.bits = {1, 2, 3, 4};
        s.gammas_db = {0.0, 10.0};
        s.elements = 128;
        s.trials = 0;
        break;
      case ExperimentId::Fig3Spectrum:
        s.kappas = {0.25};
        s.bits = {1, 2, 12};
        s.gammas_db = {10.0};
        s.elements = 32;  // the companion text also quotes 128; both run
        s.thetas_deg = {-45.0, 30.0};
        s.trials = 500;
        break;
      case ExperimentId::Fig4Ee:
        s.kappas = {0.125, 0.25, 0.5};
        s.bits = {1, 2, 3, 4, 5, 6, 7, 8};
        s.gammas_db = {0.0};
        s.elements = 128;
        s.trials = 0;
        break;
      case ExperimentId::RmseVsCrlb:
        s.kappas = {1.0, 0.25};
        s.bits = {2};
        s.gammas_db = {0.0, 5.0, 10.0, 15.0, 20.0};
        s.elements = 32;
        s.snapshots = 32;
        s.trials = 1000;
        break;
    }
    return s;
  }

  void validate() const {
    if (kappas.empty() || bits.empty() || gammas_db.empty() || thetas_deg.empty())
      throw std::invalid_argument("experiment spec: parameter grid must be non-empty");
    const bool needs_trials = id == ExperimentId::Fig3Spectrum || id == ExperimentId::RmseVsCrlb;
    if (needs_trials && trials < 1) throw std::invalid_argument("experiment spec: trials must be >= 1");
    if (id == ExperimentId::Fig3Spectrum && thetas_deg.size() < 2)
      throw std::invalid_argument("experiment spec: the spectrum experiment needs at least 2 sources");
  }
};

/// One Monte Carlo draw: reproducible from (spec, seed).
struct TrialRecord {
  std::uint64_t seed = 0;
  std::vector<double> estimated_deg;
  double sq_err_deg2 = std::numeric_limits<double>::quiet_NaN();
  double signed_err_deg = std::numeric_limits<double>::quiet_NaN();
  bool failed = false;
  std::string failure;
  double wall_ms = 0.0;
};

struct GridPointResult {
  double kappa = 1.0;
  int bits = 0;  // 0 denotes "no low-resolution chains"
  double gamma_db = 0.0;
  int elements = 0;
  int snapshots = 0;
  std::vector<double> thetas_deg;
  int trials = 0;
  int failures = 0;
  double rmse_deg = std::numeric_limits<double>::quiet_NaN();
  double bias_deg = std::numeric_limits<double>::quiet_NaN();
  double crlb_deg2 = std::numeric_limits<double>::quiet_NaN();
  double eta_pl_db = std::numeric_limits<double>::quiet_NaN();
  double p_total_w = std::numeric_limits<double>::quiet_NaN();
  double ee_per_deg_w = std::numeric_limits<double>::quiet_NaN();
  double peak_success_rate = std::numeric_limits<double>::quiet_NaN();
  std::vector<TrialRecord> records;
};

/// Trial-averaged spectrum for one bit depth (fig3).
struct SpectrumCurve {
  int bits = 0;
  std::vector<double> grid_deg;
  std::vector<double> s_db;                 // averaged, normalized to the high-res reference
  std::vector<double> peak_angles_deg;      // peaks of the averaged curve
  std::vector<double> median_window_peaks;  // per true angle, median of raw per-trial peaks
};

struct RunResult {
  ExperimentId id = ExperimentId::RmseVsCrlb;
  std::vector<GridPointResult> table;
  std::vector<SpectrumCurve> spectra;
};

namespace detail {

inline constexpr std::uint64_t kQuantizationNoiseStream = 0x6a09e667f3bcc908ull;

inline int resolve_threads(int requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

/// Runs fn(begin, end) over fixed-size chunks of the trial range on a small
/// thread pool. Chunk boundaries do not depend on the thread count, and the
/// caller combines chunk results in index order, so every aggregate is
/// schedule-invariant.
template <typename ChunkResult, typename Fn>
std::vector<ChunkResult> run_in_chunks(int total, int chunk_size, int threads, Fn&& fn) {
  const int chunk_count = (total + chunk_size - 1) / chunk_size;
  std::vector<ChunkResult> results(static_cast<std::size_t>(chunk_count));
  if (chunk_count == 0) return results;
  std::atomic<int> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;

  auto worker = [&] {
    for (;;) {
      const int c = next.fetch_add(1);
      if (c >= chunk_count) return;
      try {
        results[static_cast<std::size_t>(c)] = fn(c * chunk_size, std::min(total, (c + 1) * chunk_size));
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };

  const int pool = std::min(resolve_threads(threads), chunk_count);
  std::vector<std::thread> workers;
  workers.reserve(static_cast<std::size_t>(pool));
  for (int i = 0; i < pool; ++i) workers.emplace_back(worker);
  for (std::thread& w : workers) w.join();
  if (first_error) std::rethrow_exception(first_error);
  return results;
}

/// Best assignment of estimates to true angles (all in degrees). Returns
/// {mean squared error, mean signed error}; exhaustive over permutations for
/// small source counts, order-matched beyond that.
inline std::pair<double, double> matched_error_deg(std::vector<double> estimates,
                                                   std::vector<double> truths) {
  std::sort(estimates.begin(), estimates.end());
  std::sort(truths.begin(), truths.end());
  const std::size_t k = truths.size();
  std::vector<std::size_t> perm(k);
  std::iota(perm.begin(), perm.end(), std::size_t{0});

  auto cost = [&](const std::vector<std::size_t>& p) {
    double total = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      const double e = estimates[p[i]] - truths[i];
      total += e * e;
    }
    return total;
  };

  std::vector<std::size_t> best = perm;
  if (k <= 4) {
    double best_cost = cost(perm);
    while (std::next_permutation(perm.begin(), perm.end())) {
      const double c = cost(perm);
      if (c < best_cost) {
        best_cost = c;
        best = perm;
      }
    }
  }
  double sq = 0.0, signed_err = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const double e = estimates[best[i]] - truths[i];
    sq += e * e;
    signed_err += e;
  }
  return {sq / static_cast<double>(k), signed_err / static_cast<double>(k)};
}

inline SnapshotMatrix observe(const SnapshotMatrix& x, const ArrayGeometry& geometry,
                              const SourceScene& scene, const MixedAdcConfig& config,
                              QuantizationPath path, std::uint64_t seed) {
  if (path == QuantizationPath::Aqnm)
    return aqnm_observe(x, geometry, scene, config, seed ^ kQuantizationNoiseStream);
  return observe_true_quantized(x, geometry, scene, config);
}

inline void write_double(std::ostream& os, double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  os << buf;
}

}  // namespace detail

/// One DOA trial: synthesize, quantize, estimate with root form of the
/// subspace search, and score against the scene.
inline TrialRecord run_doa_trial(const ArrayGeometry& geometry, const SourceScene& scene,
                                 const MixedAdcConfig& config, QuantizationPath path,
                                 std::uint64_t seed) {
  TrialRecord rec;
  rec.seed = seed;
  const auto start = std::chrono::steady_clock::now();
  try {
    const SnapshotMatrix x = synthesize_snapshots(geometry, scene, seed);
    const SnapshotMatrix y = detail::observe(x, geometry, scene, config, path, seed);
    const SubspaceDecomposition dec = decompose(sample_covariance(y), scene.sources());
    const DoaEstimate est = root_music(dec, geometry, scene.sources());
    rec.estimated_deg.reserve(est.angles.size());
    for (double a : est.angles) rec.estimated_deg.push_back(rad_to_deg(a));
    std::vector<double> truths_deg;
    for (double t : scene.angles) truths_deg.push_back(rad_to_deg(t));
    const auto [sq, se] = detail::matched_error_deg(rec.estimated_deg, truths_deg);
    rec.sq_err_deg2 = sq;
    rec.signed_err_deg = se;
  } catch (const std::exception& e) {
    rec.failed = true;
    rec.failure = e.what();
  }
  rec.wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return rec;
}

/// Monte Carlo RMSE at a single grid point. Trial t runs with seed
/// base_seed ^ t; failed trials are counted and excluded from the
/// aggregates, never silently dropped.
inline GridPointResult rmse_point(const ArrayGeometry& geometry, const SourceScene& scene,
                                  const MixedAdcConfig& config, QuantizationPath path, int trials,
                                  std::uint64_t base_seed, int threads) {
  GridPointResult point;
  point.kappa = config.kappa();
  point.bits = config.low_res > 0 ? config.low_bits : 0;
  point.gamma_db = linear_to_db(scene.snr);
  point.elements = geometry.elements;
  point.snapshots = scene.snapshots;
  for (double t : scene.angles) point.thetas_deg.push_back(rad_to_deg(t));
  point.trials = trials;
  point.records.resize(static_cast<std::size_t>(trials));

  auto& records = point.records;
  detail::run_in_chunks<int>(trials, 16, threads, [&](int begin, int end) {
    for (int t = begin; t < end; ++t)
      records[static_cast<std::size_t>(t)] =
          run_doa_trial(geometry, scene, config, path, base_seed ^ static_cast<std::uint64_t>(t));
    return 0;
  });

  double sq_sum = 0.0, signed_sum = 0.0;
  int ok = 0;
  for (const TrialRecord& rec : records) {
    if (rec.failed) {
      ++point.failures;
      continue;
    }
    sq_sum += rec.sq_err_deg2;
    signed_sum += rec.signed_err_deg;
    ++ok;
  }
  if (ok > 0) {
    point.rmse_deg = std::sqrt(sq_sum / ok);
    point.bias_deg = signed_sum / ok;
  }
  if (scene.sources() == 1) {
    point.crlb_deg2 = crlb_appendix(geometry, scene, config).crlb_deg2;
    point.eta_pl_db = perf_loss(geometry, scene, config).db;
  }
  return point;
}

namespace detail {

inline RunResult run_fig2(const ExperimentSpec& spec) {
  RunResult out;
  out.id = spec.id;
  const ArrayGeometry geometry(spec.elements, spec.spacing);
  for (double gamma_db : spec.gammas_db) {
    for (int b : spec.bits) {
      for (double kappa : spec.kappas) {
        const SourceScene scene = SourceScene::single(deg_to_rad(spec.thetas_deg.front()),
                                                      db_to_linear(gamma_db), spec.snapshots);
        const MixedAdcConfig cfg = MixedAdcConfig::from_kappa(spec.elements, kappa, b);
        GridPointResult p;
        p.kappa = cfg.kappa();
        p.bits = b;
        p.gamma_db = gamma_db;
        p.elements = spec.elements;
        p.snapshots = spec.snapshots;
        p.thetas_deg = {spec.thetas_deg.front()};
        p.crlb_deg2 = crlb_appendix(geometry, scene, cfg).crlb_deg2;
        p.eta_pl_db = perf_loss(geometry, scene, cfg).db;
        out.table.push_back(std::move(p));
      }
    }
  }
  return out;
}

inline RunResult run_fig4(const ExperimentSpec& spec) {
  RunResult out;
  out.id = spec.id;
  const ArrayGeometry geometry(spec.elements, spec.spacing);
  const SourceScene scene = SourceScene::single(deg_to_rad(spec.thetas_deg.front()),
                                                db_to_linear(spec.gammas_db.front()), spec.snapshots);
  for (double kappa : spec.kappas) {
    for (int b : spec.bits) {
      const MixedAdcConfig cfg = MixedAdcConfig::from_kappa(spec.elements, kappa, b);
      const EnergyReport report = energy_efficiency(geometry, scene, cfg, spec.power);
      GridPointResult p;
      p.kappa = cfg.kappa();
      p.bits = b;
      p.gamma_db = spec.gammas_db.front();
      p.elements = spec.elements;
      p.snapshots = spec.snapshots;
      p.thetas_deg = {spec.thetas_deg.front()};
      p.crlb_deg2 = report.crlb_deg2;
      p.p_total_w = report.p_total_w;
      p.ee_per_deg_w = report.ee_per_deg_w;
      p.eta_pl_db = perf_loss(geometry, scene, cfg).db;
      out.table.push_back(std::move(p));
    }
  }
  return out;
}

struct Fig3Chunk {
  std::vector<double> spectrum_sum;
  std::vector<std::vector<double>> window_peaks;  // per true angle
  int successes = 0;
  int failures = 0;
};

inline RunResult run_fig3(const ExperimentSpec& spec) {
  RunResult out;
  out.id = spec.id;
  const ArrayGeometry geometry(spec.elements, spec.spacing);
  std::vector<double> thetas_rad;
  for (double t : spec.thetas_deg) thetas_rad.push_back(deg_to_rad(t));
  const SourceScene scene(thetas_rad, db_to_linear(spec.gammas_db.front()), spec.snapshots);
  const std::vector<double> grid = default_angle_grid(spec.grid_step_deg);
  const double kappa = spec.kappas.front();
  const int sources = scene.sources();
  const double window_rad = deg_to_rad(1.0);

  for (int b : spec.bits) {
    const MixedAdcConfig cfg = MixedAdcConfig::from_kappa(spec.elements, kappa, b);
    auto chunks = run_in_chunks<Fig3Chunk>(spec.trials, 32, spec.threads, [&](int begin, int end) {
      Fig3Chunk chunk;
      chunk.spectrum_sum.assign(grid.size(), 0.0);
      chunk.window_peaks.assign(scene.angles.size(), {});
      for (int t = begin; t < end; ++t) {
        const std::uint64_t seed = spec.base_seed ^ static_cast<std::uint64_t>(t);
        const SnapshotMatrix x = synthesize_snapshots(geometry, scene, seed);
        const SnapshotMatrix y = observe(x, geometry, scene, cfg, spec.path, seed);
        const SubspaceDecomposition dec = decompose(sample_covariance(y), sources);
        const std::vector<double> s = music_spectrum(dec, geometry, grid);
        for (std::size_t i = 0; i < grid.size(); ++i) chunk.spectrum_sum[i] += s[i];
        for (std::size_t k = 0; k < scene.angles.size(); ++k) {
          double peak = 0.0;
          for (std::size_t i = 0; i < grid.size(); ++i)
            if (std::abs(grid[i] - scene.angles[k]) <= window_rad) peak = std::max(peak, s[i]);
          chunk.window_peaks[k].push_back(peak);
        }
        try {
          const DoaEstimate est = find_peaks(grid, s, sources);
          bool all_close = true;
          for (std::size_t k = 0; k < scene.angles.size(); ++k) {
            double best = std::numeric_limits<double>::infinity();
            for (double a : est.angles) best = std::min(best, std::abs(a - scene.angles[k]));
            if (best > window_rad) all_close = false;
          }
          if (all_close) ++chunk.successes;
        } catch (const std::exception&) {
          ++chunk.failures;
        }
      }
      return chunk;
    });

    SpectrumCurve curve;
    curve.bits = b;
    curve.grid_deg.reserve(grid.size());
    for (double g : grid) curve.grid_deg.push_back(rad_to_deg(g));
    std::vector<double> avg(grid.size(), 0.0);
    std::vector<std::vector<double>> peaks(scene.angles.size());
    int successes = 0, failures = 0;
    for (const Fig3Chunk& chunk : chunks) {
      for (std::size_t i = 0; i < grid.size(); ++i) avg[i] += chunk.spectrum_sum[i];
      for (std::size_t k = 0; k < peaks.size(); ++k)
        peaks[k].insert(peaks[k].end(), chunk.window_peaks[k].begin(), chunk.window_peaks[k].end());
      successes += chunk.successes;
      failures += chunk.failures;
    }
    for (double& v : avg) v /= spec.trials;
    curve.s_db = std::move(avg);  // converted to dB after the common reference is known
    for (std::vector<double>& p : peaks) {
      std::sort(p.begin(), p.end());
      curve.median_window_peaks.push_back(p.empty() ? 0.0 : p[p.size() / 2]);
    }
    const DoaEstimate avg_peaks = find_peaks(grid, curve.s_db, sources);
    for (double a : avg_peaks.angles) curve.peak_angles_deg.push_back(rad_to_deg(a));

    GridPointResult p;
    p.kappa = cfg.kappa();
    p.bits = b;
    p.gamma_db = spec.gammas_db.front();
    p.elements = spec.elements;
    p.snapshots = spec.snapshots;
    p.thetas_deg = spec.thetas_deg;
    p.trials = spec.trials;
    p.failures = failures;
    p.peak_success_rate = static_cast<double>(successes) / spec.trials;
    out.table.push_back(std::move(p));
    out.spectra.push_back(std::move(curve));
  }

  // Normalize every averaged curve against the highest-resolution one so the
  // relative peak heights stay visible.
  double reference = 0.0;
  int reference_bits = 0;
  for (const SpectrumCurve& c : out.spectra) reference_bits = std::max(reference_bits, c.bits);
  for (const SpectrumCurve& c : out.spectra)
    if (c.bits == reference_bits)
      for (double v : c.s_db) reference = std::max(reference, v);
  if (reference <= 0.0) reference = 1.0;
  for (SpectrumCurve& c : out.spectra)
    for (double& v : c.s_db) v = 10.0 * std::log10(std::max(v / reference, 1e-300));
  return out;
}

inline RunResult run_rmse(const ExperimentSpec& spec) {
  RunResult out;
  out.id = spec.id;
  const ArrayGeometry geometry(spec.elements, spec.spacing);
  for (double kappa : spec.kappas) {
    for (int b : spec.bits) {
      const MixedAdcConfig cfg = MixedAdcConfig::from_kappa(spec.elements, kappa, b);
      for (double gamma_db : spec.gammas_db) {
        const SourceScene scene = SourceScene::single(deg_to_rad(spec.thetas_deg.front()),
                                                      db_to_linear(gamma_db), spec.snapshots);
        out.table.push_back(rmse_point(geometry, scene, cfg, spec.path, spec.trials, spec.base_seed,
                                       spec.threads));
      }
    }
  }
  return out;
}

}  // namespace detail

inline RunResult run(const ExperimentSpec& spec) {
  spec.validate();
  switch (spec.id) {
    case ExperimentId::Fig2PerfLoss: return detail::run_fig2(spec);
    case ExperimentId::Fig3Spectrum: return detail::run_fig3(spec);
    case ExperimentId::Fig4Ee: return detail::run_fig4(spec);
    case ExperimentId::RmseVsCrlb: return detail::run_rmse(spec);
  }
  throw std::invalid_argument("run: unknown experiment id");
}

inline void write_perf_loss_table_csv(std::ostream& os, const RunResult& result) {
  write_crlb_csv_header(os);
  for (const GridPointResult& p : result.table) {
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%.10g,%d,%.10g,%d,%d,%.10g,%.10g,%.10g\n", p.kappa, p.bits,
                  p.gamma_db, p.elements, p.snapshots, p.thetas_deg.front(), p.crlb_deg2, p.eta_pl_db);
    os << buf;
  }
}

inline void write_ee_table_csv(std::ostream& os, const RunResult& result) {
  write_ee_csv_header(os);
  for (const GridPointResult& p : result.table) {
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%.10g,%d,%.10g,%.10g,%.10g\n", p.kappa, p.bits, p.p_total_w,
                  p.crlb_deg2, p.ee_per_deg_w);
    os << buf;
  }
}

inline void write_rmse_table_csv(std::ostream& os, const RunResult& result) {
  os << "kappa,b,gamma_dB,M,N,theta_deg,trials,failures,rmse_deg,bias_deg,crlb_deg2,sqrt_crlb_deg,"
        "eta_pl_dB\n";
  for (const GridPointResult& p : result.table) {
    char buf[384];
    std::snprintf(buf, sizeof(buf), "%.10g,%d,%.10g,%d,%d,%.10g,%d,%d,%.10g,%.10g,%.10g,%.10g,%.10g\n",
                  p.kappa, p.bits, p.gamma_db, p.elements, p.snapshots, p.thetas_deg.front(), p.trials,
                  p.failures, p.rmse_deg, p.bias_deg, p.crlb_deg2, std::sqrt(p.crlb_deg2), p.eta_pl_db);
    os << buf;
  }
}

inline void write_fig3_spectrum_csv(std::ostream& os, const SpectrumCurve& curve) {
  os << "angle_deg,S_dB\n";
  for (std::size_t i = 0; i < curve.grid_deg.size(); ++i) {
    detail::write_double(os, curve.grid_deg[i]);
    os << ',';
    detail::write_double(os, curve.s_db[i]);
    os << '\n';
  }
}

inline void write_fig3_summary_csv(std::ostream& os, const RunResult& result) {
  os << "b,trials,failures,peak_success_rate,peak1_deg,peak2_deg,median_window_peak1,"
        "median_window_peak2\n";
  for (std::size_t i = 0; i < result.table.size(); ++i) {
    const GridPointResult& p = result.table[i];
    const SpectrumCurve& c = result.spectra[i];
    char buf[320];
    std::snprintf(buf, sizeof(buf), "%d,%d,%d,%.10g,%.10g,%.10g,%.10g,%.10g\n", p.bits, p.trials,
                  p.failures, p.peak_success_rate, c.peak_angles_deg.size() > 0 ? c.peak_angles_deg[0] : 0.0,
                  c.peak_angles_deg.size() > 1 ? c.peak_angles_deg[1] : 0.0,
                  c.median_window_peaks.size() > 0 ? c.median_window_peaks[0] : 0.0,
                  c.median_window_peaks.size() > 1 ? c.median_window_peaks[1] : 0.0);
    os << buf;
  }
}

namespace detail {

inline void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  os << content;
}

inline std::string fig2_plot_script() {
  return R"PY(#!/usr/bin/env python3
"""Performance-loss curves over kappa, one line per (bits, SNR)."""
import csv
import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

rows = list(csv.DictReader(open("fig2_perf_loss.csv")))
gammas = sorted({float(r["gamma_dB"]) for r in rows})
bits = sorted({int(r["b"]) for r in rows})
fig, axes = plt.subplots(1, len(gammas), figsize=(6 * len(gammas), 4.5), squeeze=False)
for ax, gamma in zip(axes[0], gammas):
    for b in bits:
        pts = [(float(r["kappa"]), float(r["eta_pl_dB"])) for r in rows
               if int(r["b"]) == b and float(r["gamma_dB"]) == gamma]
        pts.sort()
        ax.plot([p[0] for p in pts], [p[1] for p in pts], marker="o", ms=3, label=f"{b}-bit")
    ax.set_xlabel("kappa (fraction of high-resolution chains)")
    ax.set_ylabel("performance loss (dB)")
    ax.set_title(f"SNR = {gamma:g} dB")
    ax.grid(True, alpha=0.3)
    ax.legend()
fig.tight_layout()
fig.savefig("fig2_perf_loss.png", dpi=150)
print("wrote fig2_perf_loss.png")
)PY";
}

inline std::string fig3_plot_script(const std::vector<int>& bits) {
  std::string files = "[";
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (i) files += ", ";
    files += "(\"fig3_spectrum_b" + std::to_string(bits[i]) + ".csv\", \"" + std::to_string(bits[i]) +
             "-bit\")";
  }
  files += "]";
  return std::string(R"PY(#!/usr/bin/env python3
"""Trial-averaged spatial spectra for the two-source scene."""
import csv
import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

curves = )PY") +
         files + R"PY(

plt.figure(figsize=(7, 4.5))
for path, label in curves:
    rows = list(csv.DictReader(open(path)))
    plt.plot([float(r["angle_deg"]) for r in rows], [float(r["S_dB"]) for r in rows], label=label)
plt.xlabel("angle (deg)")
plt.ylabel("spatial spectrum (dB)")
plt.grid(True, alpha=0.3)
plt.legend()
plt.tight_layout()
plt.savefig("fig3_spectrum.png", dpi=150)
print("wrote fig3_spectrum.png")
)PY";
}

inline std::string fig4_plot_script() {
  return R"PY(#!/usr/bin/env python3
"""Energy efficiency against the low-resolution bit depth."""
import csv
import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

rows = list(csv.DictReader(open("fig4_ee.csv")))
kappas = sorted({float(r["kappa"]) for r in rows})
plt.figure(figsize=(7, 4.5))
for kappa in kappas:
    pts = [(int(r["b"]), float(r["ee_per_deg_per_W"])) for r in rows if float(r["kappa"]) == kappa]
    pts.sort()
    plt.plot([p[0] for p in pts], [p[1] for p in pts], marker="o", label=f"kappa = {kappa:g}")
plt.xlabel("low-resolution ADC bits")
plt.ylabel("energy efficiency (1/degree/W)")
plt.grid(True, alpha=0.3)
plt.legend()
plt.tight_layout()
plt.savefig("fig4_ee.png", dpi=150)
print("wrote fig4_ee.png")
)PY";
}

inline std::string rmse_plot_script() {
  return R"PY(#!/usr/bin/env python3
"""Root-form subspace estimator RMSE against the square-root bound."""
import csv
import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

rows = list(csv.DictReader(open("rmse_vs_crlb.csv")))
configs = sorted({(float(r["kappa"]), int(r["b"])) for r in rows})
plt.figure(figsize=(7, 4.5))
for kappa, b in configs:
    pts = [(float(r["gamma_dB"]), float(r["rmse_deg"]), float(r["sqrt_crlb_deg"])) for r in rows
           if float(r["kappa"]) == kappa and int(r["b"]) == b]
    pts.sort()
    label = f"kappa = {kappa:g}" + (f", {b}-bit" if b else ", high-res")
    plt.semilogy([p[0] for p in pts], [p[1] for p in pts], marker="o", label="RMSE " + label)
    plt.semilogy([p[0] for p in pts], [p[2] for p in pts], linestyle="--", label="sqrt(CRLB) " + label)
plt.xlabel("SNR (dB)")
plt.ylabel("degrees")
plt.grid(True, alpha=0.3)
plt.legend(fontsize=8)
plt.tight_layout()
plt.savefig("rmse_vs_crlb.png", dpi=150)
print("wrote rmse_vs_crlb.png")
)PY";
}

}  // namespace detail

/// Runs the experiment and drops its CSV files plus a plot script into
/// `output_dir`. Returns the list of files written.
inline std::vector<std::filesystem::path> reproduce_figure(const ExperimentSpec& spec,
                                                           const std::filesystem::path& output_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(output_dir);
  const RunResult result = run(spec);
  std::vector<fs::path> written;

  auto emit = [&](const fs::path& name, auto&& writer) {
    const fs::path full = output_dir / name;
    std::ofstream os(full, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open '" + full.string() + "' for writing");
    writer(os);
    written.push_back(full);
  };

  switch (spec.id) {
    case ExperimentId::Fig2PerfLoss:
      emit("fig2_perf_loss.csv", [&](std::ostream& os) { write_perf_loss_table_csv(os, result); });
      detail::write_text_file(output_dir / "fig2_plot.py", detail::fig2_plot_script());
      written.push_back(output_dir / "fig2_plot.py");
      break;
    case ExperimentId::Fig3Spectrum: {
      for (const SpectrumCurve& curve : result.spectra)
        emit("fig3_spectrum_b" + std::to_string(curve.bits) + ".csv",
             [&](std::ostream& os) { write_fig3_spectrum_csv(os, curve); });
      emit("fig3_summary.csv", [&](std::ostream& os) { write_fig3_summary_csv(os, result); });
      detail::write_text_file(output_dir / "fig3_plot.py", detail::fig3_plot_script(spec.bits));
      written.push_back(output_dir / "fig3_plot.py");
      break;
    }
    case ExperimentId::Fig4Ee:
      emit("fig4_ee.csv", [&](std::ostream& os) { write_ee_table_csv(os, result); });
      detail::write_text_file(output_dir / "fig4_plot.py", detail::fig4_plot_script());
      written.push_back(output_dir / "fig4_plot.py");
      break;
    case ExperimentId::RmseVsCrlb:
      emit("rmse_vs_crlb.csv", [&](std::ostream& os) { write_rmse_table_csv(os, result); });
      detail::write_text_file(output_dir / "rmse_plot.py", detail::rmse_plot_script());
      written.push_back(output_dir / "rmse_plot.py");
      break;
  }
  return written;
}

}  // namespace doamix
