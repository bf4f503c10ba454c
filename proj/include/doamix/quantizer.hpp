// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "doamix/array.hpp"
#include "doamix/common.hpp"

namespace doamix {

/// Sentinel bit depth for an ideal (distortion-free) converter.
inline constexpr int kInfiniteBits = std::numeric_limits<int>::max();

/// Normalized mean-square distortion of a b-bit MSE-optimal scalar
/// quantizer driven by Gaussian input. Tabulated for b <= 5, closed-form
/// approximation (sqrt(3) pi / 2) 4^-b beyond that.
inline double distortion_factor(int bits) {
  if (bits == kInfiniteBits) return 0.0;
  if (bits <= 0) throw std::invalid_argument("distortion_factor: bits must be >= 1");
  static constexpr std::array<double, 5> table{0.3634, 0.1175, 0.03454, 0.009497, 0.002499};
  if (bits <= 5) return table[static_cast<std::size_t>(bits - 1)];
  return std::ldexp(0.5 * std::sqrt(3.0) * std::numbers::pi, -2 * bits);
}

/// Receive chain split: the first `high_res` elements see ideal converters,
/// the remaining `low_res` elements see b-bit ones. kappa = high_res / M.
struct MixedAdcConfig {
  int high_res;  // M0
  int low_res;   // M1
  int low_bits;  // b of the low-resolution chains (kInfiniteBits when unused)
  double beta;   // distortion factor of the low-resolution chains
  double alpha;  // 1 - beta, linear quantization gain

  int elements() const { return high_res + low_res; }
  double kappa() const { return static_cast<double>(high_res) / static_cast<double>(elements()); }

  static MixedAdcConfig split(int high_res, int low_res, int low_bits) {
    if (high_res < 0 || low_res < 0) throw std::invalid_argument("adc config: negative chain count");
    if (high_res + low_res < 2) throw std::invalid_argument("adc config: needs at least 2 chains");
    MixedAdcConfig cfg;
    cfg.high_res = high_res;
    cfg.low_res = low_res;
    if (low_res == 0) {
      // Pure high-resolution path: the low-res bit depth never enters.
      cfg.low_bits = kInfiniteBits;
      cfg.beta = 0.0;
    } else {
      cfg.low_bits = low_bits;
      cfg.beta = distortion_factor(low_bits);
    }
    cfg.alpha = 1.0 - cfg.beta;
    return cfg;
  }

  static MixedAdcConfig from_kappa(int elements, double kappa, int low_bits) {
    if (!(kappa >= 0.0 && kappa <= 1.0)) throw std::invalid_argument("adc config: kappa must lie in [0, 1]");
    const int high = static_cast<int>(std::llround(kappa * elements));
    return split(high, elements - high, low_bits);
  }

  static MixedAdcConfig all_high(int elements) { return split(elements, 0, kInfiniteBits); }
};

/// MSE-optimal scalar quantizer for a unit-variance Gaussian source.
struct LloydMaxCodebook {
  int bits = 0;
  std::vector<double> levels;      // 2^bits reconstruction points, ascending
  std::vector<double> thresholds;  // 2^bits - 1 decision boundaries
  double mse = 0.0;                // converged distortion for N(0, 1) input

  double quantize(double x) const {
    const auto it = std::upper_bound(thresholds.begin(), thresholds.end(), x);
    return levels[static_cast<std::size_t>(it - thresholds.begin())];
  }
};

namespace detail {
inline double normal_pdf(double x) {
  constexpr double inv_sqrt_two_pi = 0.39894228040143267794;
  return std::exp(-0.5 * x * x) * inv_sqrt_two_pi;
}
inline double normal_cdf(double x) {
  constexpr double inv_sqrt2 = 0.70710678118654752440;
  return 0.5 * std::erfc(-x * inv_sqrt2);
}
}  // namespace detail

/// Lloyd fixed-point iteration on the standard Gaussian, run until the
/// relative MSE change drops below 1e-12.
inline LloydMaxCodebook lloydmax_codebook(int bits) {
  if (bits < 1 || bits > 5) throw std::invalid_argument("lloydmax_codebook: bits must lie in 1..5");
  const int levels = 1 << bits;
  LloydMaxCodebook cb;
  cb.bits = bits;
  cb.levels.resize(static_cast<std::size_t>(levels));
  cb.thresholds.resize(static_cast<std::size_t>(levels - 1));

  for (int i = 0; i < levels; ++i)
    cb.levels[static_cast<std::size_t>(i)] = -4.0 + 8.0 * (i + 0.5) / static_cast<double>(levels);

  const double inf = std::numeric_limits<double>::infinity();
  double prev_mse = inf;
  for (int iter = 0; iter < 20000; ++iter) {
    for (int i = 0; i + 1 < levels; ++i)
      cb.thresholds[static_cast<std::size_t>(i)] =
          0.5 * (cb.levels[static_cast<std::size_t>(i)] + cb.levels[static_cast<std::size_t>(i + 1)]);

    double second_moment = 0.0;
    for (int i = 0; i < levels; ++i) {
      const double lo = (i == 0) ? -inf : cb.thresholds[static_cast<std::size_t>(i - 1)];
      const double hi = (i + 1 == levels) ? inf : cb.thresholds[static_cast<std::size_t>(i)];
      const double mass = detail::normal_cdf(hi) - detail::normal_cdf(lo);
      const double mean = detail::normal_pdf(lo) - detail::normal_pdf(hi);
      if (mass > 1e-300) cb.levels[static_cast<std::size_t>(i)] = mean / mass;
      const double l = cb.levels[static_cast<std::size_t>(i)];
      second_moment += mass * l * l;
    }
    // At the centroid condition E[X Q(X)] = E[Q(X)^2], so the distortion
    // reduces to 1 - sum_i p_i l_i^2.
    cb.mse = 1.0 - second_moment;
    if (std::abs(prev_mse - cb.mse) <= 1e-12 * cb.mse) break;
    prev_mse = cb.mse;
  }
  return cb;
}

/// Shared read-only codebooks, built on first use.
inline const LloydMaxCodebook& gaussian_codebook(int bits) {
  static const std::array<LloydMaxCodebook, 5> books = [] {
    std::array<LloydMaxCodebook, 5> all;
    for (int b = 1; b <= 5; ++b) all[static_cast<std::size_t>(b - 1)] = lloydmax_codebook(b);
    return all;
  }();
  if (bits < 1 || bits > 5) throw std::invalid_argument("gaussian_codebook: bits must lie in 1..5");
  return books[static_cast<std::size_t>(bits - 1)];
}

/// Variance of the additive quantization-noise term for a per-element
/// signal power `signal_power` riding on unit noise: alpha beta (P + 1).
inline double quantization_noise_cov(double signal_power, const MixedAdcConfig& config) {
  if (!(signal_power >= 0.0)) throw std::invalid_argument("quantization_noise_cov: signal power must be >= 0");
  return config.alpha * config.beta * (signal_power + 1.0);
}

inline double quantization_noise_cov(const SourceScene& scene, const MixedAdcConfig& config) {
  return quantization_noise_cov(scene.signal_power(), config);
}

/// Runs the low-resolution partition (`low_res` rows) through the true
/// Lloyd-Max quantizer, independently on real and imaginary parts. An ideal
/// AGC scales each component to unit variance before the quantizer and back
/// afterwards; the component variance comes from the scene.
inline SnapshotMatrix quantize_true(const SnapshotMatrix& low_partition, const SourceScene& scene,
                                    const MixedAdcConfig& config) {
  if (low_partition.stage != SnapshotStage::Unquantized)
    throw std::invalid_argument("quantize_true: input must be unquantized");
  if (low_partition.data.rows() != config.low_res)
    throw std::invalid_argument("quantize_true: row count must equal the low-resolution chain count");
  if (config.low_res > 0 && (config.low_bits < 1 || config.low_bits > 5))
    throw std::invalid_argument("quantize_true: codebook table covers 1..5 bits; use the AQNM path beyond");

  CxMatrix out(low_partition.data.rows(), low_partition.data.cols());
  if (config.low_res > 0) {
    const LloydMaxCodebook& cb = gaussian_codebook(config.low_bits);
    const double sigma = std::sqrt(0.5 * (scene.signal_power() + 1.0));
    for (Eigen::Index n = 0; n < low_partition.data.cols(); ++n) {
      for (Eigen::Index m = 0; m < low_partition.data.rows(); ++m) {
        const Complex v = low_partition.data(m, n);
        out(m, n) = Complex(sigma * cb.quantize(v.real() / sigma), sigma * cb.quantize(v.imag() / sigma));
      }
    }
  }
  return SnapshotMatrix{std::move(out), SnapshotStage::TrueQuantized};
}

/// Full mixed-chain observation through the true quantizer: high-resolution
/// rows pass through, the rest are quantized.
inline SnapshotMatrix observe_true_quantized(const SnapshotMatrix& x, const ArrayGeometry& geometry,
                                             const SourceScene& scene, const MixedAdcConfig& config) {
  if (x.stage != SnapshotStage::Unquantized)
    throw std::invalid_argument("observe_true_quantized: input must be unquantized");
  if (x.data.rows() != geometry.elements || config.elements() != geometry.elements)
    throw std::invalid_argument("observe_true_quantized: geometry / config / data sizes disagree");

  CxMatrix y(x.data.rows(), x.data.cols());
  y.topRows(config.high_res) = x.data.topRows(config.high_res);
  if (config.low_res > 0) {
    SnapshotMatrix low{x.data.bottomRows(config.low_res), SnapshotStage::Unquantized};
    y.bottomRows(config.low_res) = quantize_true(low, scene, config).data;
  }
  return SnapshotMatrix{std::move(y), SnapshotStage::TrueQuantized};
}

/// Linear surrogate of the quantizer: the low-resolution rows are scaled by
/// alpha and perturbed with white complex Gaussian noise of variance
/// quantization_noise_cov(scene, config). Deterministic in the seed.
inline SnapshotMatrix aqnm_observe(const SnapshotMatrix& x, const ArrayGeometry& geometry,
                                   const SourceScene& scene, const MixedAdcConfig& config,
                                   std::uint64_t seed) {
  if (x.stage != SnapshotStage::Unquantized) throw std::invalid_argument("aqnm_observe: input must be unquantized");
  if (x.data.rows() != geometry.elements || config.elements() != geometry.elements)
    throw std::invalid_argument("aqnm_observe: geometry / config / data sizes disagree");

  CxMatrix y = x.data;
  if (config.low_res > 0) {
    const double noise_var = quantization_noise_cov(scene, config);
    y.bottomRows(config.low_res) *= config.alpha;
    if (noise_var > 0.0) {
      const double sigma = std::sqrt(noise_var);
      GaussianRng rng(seed);
      for (Eigen::Index n = 0; n < y.cols(); ++n)
        for (Eigen::Index m = y.rows() - config.low_res; m < y.rows(); ++m)
          y(m, n) += sigma * rng.complex_normal();
    }
  }
  return SnapshotMatrix{std::move(y), SnapshotStage::Aqnm};
}

}  // namespace doamix
