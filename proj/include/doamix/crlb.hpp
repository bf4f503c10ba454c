// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <ostream>
#include <stdexcept>

#include "doamix/array.hpp"
#include "doamix/common.hpp"
#include "doamix/covariance.hpp"
#include "doamix/quantizer.hpp"

namespace doamix {

/// Scalar reductions of the Fisher-information derivation for the mixed
/// receive chain. With the gain matrix T = diag(I, alpha I) and the noise
/// covariance Q = diag(I, (alpha^2 + alpha beta (snr+1)) I), every quadratic
/// form collapses onto weighted position sums: low-resolution elements are
/// weighted by alpha / (beta snr + 1).
struct FimIntermediates {
  RealVector gain_diag;   // diagonal of T
  RealVector noise_diag;  // diagonal of Q
  double xi = 0.0;        // a^H T^H Q^-1 T a
  double mu = 0.0;        // weighted sum of positions
  double nu = 0.0;        // weighted sum of squared positions
};

inline FimIntermediates fim_intermediates(const ArrayGeometry& geometry, const SourceScene& scene,
                                          const MixedAdcConfig& config, bool self_check = false) {
  if (scene.sources() != 1) throw std::invalid_argument("fim_intermediates: defined for a single source");
  if (config.elements() != geometry.elements)
    throw std::invalid_argument("fim_intermediates: config does not match geometry");
  require_visible_angle(scene.angles.front());

  const int m0 = config.high_res;
  const int m = geometry.elements;
  const double snr = scene.snr;
  const double alpha = config.alpha;
  const double beta = config.beta;
  const double low_weight = alpha / (beta * snr + 1.0);
  const double low_noise = alpha * alpha + quantization_noise_cov(scene, config);

  FimIntermediates out;
  out.gain_diag = RealVector::Ones(m);
  out.noise_diag = RealVector::Ones(m);
  double high_pos = 0.0, low_pos = 0.0, high_pos2 = 0.0, low_pos2 = 0.0;
  for (int i = 0; i < m; ++i) {
    const double d = geometry.position(i);
    if (i < m0) {
      high_pos += d;
      high_pos2 += d * d;
    } else {
      low_pos += d;
      low_pos2 += d * d;
      out.gain_diag(i) = alpha;
      out.noise_diag(i) = low_noise;
    }
  }
  out.xi = m0 + low_weight * (m - m0);
  out.mu = high_pos + low_weight * low_pos;
  out.nu = high_pos2 + low_weight * low_pos2;

  if (self_check) {
    const CxVector a = steering_vector(geometry, scene.angles.front());
    const CxMatrix t = out.gain_diag.cast<Complex>().asDiagonal();
    const CxMatrix q_inv = out.noise_diag.cwiseInverse().cast<Complex>().asDiagonal();
    const double xi_matrix = (a.adjoint() * t.adjoint() * q_inv * t * a).value().real();
    if (std::abs(xi_matrix - out.xi) > 1e-10 * std::max(out.xi, 1.0))
      throw std::logic_error("fim_intermediates: scalar and matrix forms of xi disagree");
  }
  return out;
}

/// The three quadratic-form pieces of the per-snapshot Fisher information
/// and their assembled closed form. `f_a` and `f_c` are squares of a purely
/// imaginary scalar and therefore negative.
struct FimComponents {
  double f_a = 0.0;
  double f_b = 0.0;
  double f_c = 0.0;
  double assembled = 0.0;  // 8 pi^2 snr^2 cos^2(theta) (xi nu - mu^2) / (snr xi + 1)

  double component_total(double snr) const { return snr * snr * (f_a + 2.0 * f_b + f_c); }
};

inline FimComponents fim_components(const ArrayGeometry& geometry, const SourceScene& scene,
                                    const MixedAdcConfig& config) {
  const FimIntermediates im = fim_intermediates(geometry, scene, config);
  const double snr = scene.snr;
  const double theta = scene.angles.front();
  const double cos2 = std::cos(theta) * std::cos(theta);
  const double denom = snr * im.xi + 1.0;
  const double pi2 = std::numbers::pi * std::numbers::pi;

  const double gram = im.xi * im.nu - im.mu * im.mu;
  if (!(gram > 0.0))
    throw std::runtime_error("fim: xi nu - mu^2 must be positive (degenerate geometry)");

  FimComponents out;
  out.f_a = -4.0 * pi2 * cos2 * im.mu * im.mu / (denom * denom);
  out.f_b = 4.0 * pi2 * (im.xi / denom) * cos2 * (im.nu - snr * im.mu * im.mu / denom);
  {
    // Same quadratic form with the factors swapped; the scalar is the
    // conjugate, so the square is identical.
    const double swapped = -(2.0 * std::numbers::pi * std::cos(theta) * im.mu / denom);
    out.f_c = -(swapped * swapped);
  }
  out.assembled = 8.0 * pi2 * snr * snr * cos2 * gram / denom;
  return out;
}

/// Per-snapshot Fisher information. The component route and the assembled
/// closed form are evaluated independently and must agree to 1e-9 relative.
inline double fim(const ArrayGeometry& geometry, const SourceScene& scene, const MixedAdcConfig& config) {
  const FimComponents c = fim_components(geometry, scene, config);
  const double via_components = c.component_total(scene.snr);
  if (std::abs(via_components - c.assembled) > 1e-9 * std::abs(c.assembled))
    throw std::logic_error("fim: component and assembled evaluations disagree");
  return c.assembled;
}

struct CrlbReport {
  double crlb_rad2 = 0.0;
  double crlb_deg2 = 0.0;
  double fim_per_snapshot = 0.0;
  FimIntermediates intermediates;
  // configuration echo
  int elements = 0;
  int high_res = 0;
  int low_bits = 0;
  int snapshots = 0;
  double snr = 0.0;
  double theta = 0.0;
  double spacing = 0.0;
};

namespace detail {
inline CrlbReport make_report(double crlb_rad2, double fisher, FimIntermediates im,
                              const ArrayGeometry& geometry, const SourceScene& scene,
                              const MixedAdcConfig& config) {
  CrlbReport r;
  r.crlb_rad2 = crlb_rad2;
  const double scale = 180.0 / std::numbers::pi;
  r.crlb_deg2 = crlb_rad2 * scale * scale;
  r.fim_per_snapshot = fisher;
  r.intermediates = std::move(im);
  r.elements = geometry.elements;
  r.high_res = config.high_res;
  r.low_bits = config.low_bits;
  r.snapshots = scene.snapshots;
  r.snr = scene.snr;
  r.theta = scene.angles.front();
  r.spacing = geometry.spacing;
  return r;
}
}  // namespace detail

/// Reference bound: CRLB = 1 / (N F) with F from the derivation chain.
inline CrlbReport crlb_appendix(const ArrayGeometry& geometry, const SourceScene& scene,
                                const MixedAdcConfig& config) {
  const double f = fim(geometry, scene, config);
  const double crlb = 1.0 / (static_cast<double>(scene.snapshots) * f);
  return detail::make_report(crlb, f, fim_intermediates(geometry, scene, config), geometry, scene, config);
}

/// Closed form specialized to the arithmetic-progression positions
/// d_m = (m-1) d. Substituting the progression sums into xi, mu, nu gives
///
///          3 (beta snr + 1) [ snr S + beta snr + 1 ]
///   ---------------------------------------------------------
///   2 N pi^2 snr^2 cos^2(theta) d^2 [ 2 S K - 3 (J0 + J)^2 ]
///
/// with S  = beta M0 (snr+1) + alpha M,
///      J0 = beta M0 (M0-1) (snr+1),  J = alpha M (M-1),
///      K  = J0 (2 M0 - 1) + J (2 M - 1).
/// This is algebraically identical to crlb_appendix.
inline CrlbReport crlb_closed_form(const ArrayGeometry& geometry, const SourceScene& scene,
                                   const MixedAdcConfig& config) {
  FimIntermediates im = fim_intermediates(geometry, scene, config);  // validates inputs
  const double snr = scene.snr;
  const double alpha = config.alpha;
  const double beta = config.beta;
  const double m = geometry.elements;
  const double m0 = config.high_res;
  const double d = geometry.spacing;
  const double theta = scene.angles.front();
  const double n = scene.snapshots;
  const double pi2 = std::numbers::pi * std::numbers::pi;

  const double s = beta * m0 * (snr + 1.0) + alpha * m;
  const double j0 = beta * m0 * (m0 - 1.0) * (snr + 1.0);
  const double j = alpha * m * (m - 1.0);
  const double k = j0 * (2.0 * m0 - 1.0) + j * (2.0 * m - 1.0);
  const double bracket = 2.0 * s * k - 3.0 * (j0 + j) * (j0 + j);
  if (!(bracket > 0.0)) throw std::runtime_error("crlb_closed_form: degenerate position sums");

  const double cos2 = std::cos(theta) * std::cos(theta);
  const double num = 3.0 * (beta * snr + 1.0) * (snr * s + beta * snr + 1.0);
  const double den = 2.0 * n * pi2 * snr * snr * cos2 * d * d * bracket;
  const double crlb = num / den;
  return detail::make_report(crlb, 1.0 / (n * crlb), std::move(im), geometry, scene, config);
}

/// The closed form exactly as printed in its source, with the ambiguous
/// bracket scope taken literally:
///   [3 l^2 (bg+1) S + (bg+1)^2] /
///   [4 N pi^2 g cos^2(theta) d^2 S K - 3 (J0+J)^2],   l = 1.
/// Kept verbatim for reconciliation against crlb_closed_form; the two do
/// not agree (the literal reading is not even dimensionally consistent),
/// which the tests document.
inline double crlb_printed_form(const ArrayGeometry& geometry, const SourceScene& scene,
                                const MixedAdcConfig& config) {
  fim_intermediates(geometry, scene, config);  // validates inputs
  const double snr = scene.snr;
  const double alpha = config.alpha;
  const double beta = config.beta;
  const double m = geometry.elements;
  const double m0 = config.high_res;
  const double d = geometry.spacing;
  const double theta = scene.angles.front();
  const double n = scene.snapshots;
  const double pi2 = std::numbers::pi * std::numbers::pi;

  const double s = beta * m0 * (snr + 1.0) + alpha * m;
  const double j0 = beta * m0 * (m0 - 1.0) * (snr + 1.0);
  const double j = alpha * m * (m - 1.0);
  const double k = j0 * (2.0 * m0 - 1.0) + j * (2.0 * m - 1.0);
  const double bg1 = beta * snr + 1.0;

  const double num = 3.0 * bg1 * s + bg1 * bg1;
  const double den = 4.0 * n * pi2 * snr * std::cos(theta) * std::cos(theta) * d * d * s * k -
                     3.0 * (j0 + j) * (j0 + j);
  return num / den;
}

/// Trace-form Fisher information evaluated numerically: the covariance
/// derivative is replaced by a central difference with step h, everything
/// else is direct matrix algebra. Independent of the scalar derivation.
inline double fim_numeric(const ArrayGeometry& geometry, const SourceScene& scene,
                          const MixedAdcConfig& config, double h) {
  if (!(h >= 1e-7 && h <= 1e-4)) throw std::invalid_argument("fim_numeric: h must lie in [1e-7, 1e-4]");
  const double theta = scene.angles.front();
  const SourceScene plus(std::vector<double>{theta + h}, scene.snr, scene.snapshots);
  const SourceScene minus(std::vector<double>{theta - h}, scene.snr, scene.snapshots);

  const CxMatrix r = theoretical_covariance(geometry, scene, config).data;
  const CxMatrix dr = (theoretical_covariance(geometry, plus, config).data -
                       theoretical_covariance(geometry, minus, config).data) /
                      (2.0 * h);
  const Eigen::LLT<CxMatrix> llt(r);
  if (llt.info() != Eigen::Success) throw std::runtime_error("fim_numeric: covariance not positive definite");
  const CxMatrix b = llt.solve(dr);
  return (b * b).trace().real();
}

/// Ratio of the mixed-chain bound to the all-high-resolution bound,
/// evaluated both as a literal CRLB quotient and through its closed-form
/// expression in kappa, g = beta (snr + 1) and alpha.
struct PerfLoss {
  double ratio = 1.0;          // CRLB quotient
  double ratio_formula = 1.0;  // closed-form expression
  double db = 0.0;             // 10 log10(ratio)
};

/// Closed-form loss expression for finite M.
inline double perf_loss_formula(double kappa, double beta, double snr, double elements) {
  const double alpha = 1.0 - beta;
  const double g = beta * (snr + 1.0);
  const double inv_m = 1.0 / elements;
  const double bg1 = beta * snr + 1.0;

  const double first = (snr * (g + alpha) * (g * kappa + alpha) + bg1 * bg1 * inv_m) / (snr + inv_m);
  const double ref = 2.0 * (1.0 - inv_m) * (2.0 - inv_m) - 3.0 * (1.0 - inv_m) * (1.0 - inv_m);
  const double lead = g * kappa * (kappa - inv_m);
  const double trail = alpha * (1.0 - inv_m);
  const double den = 2.0 * (g * kappa + alpha) *
                         (g * kappa * (kappa - inv_m) * (2.0 * kappa - inv_m) +
                          alpha * (1.0 - inv_m) * (2.0 - inv_m)) -
                     3.0 * (lead + trail) * (lead + trail);
  return first * ref / den;
}

inline PerfLoss perf_loss(const ArrayGeometry& geometry, const SourceScene& scene,
                          const MixedAdcConfig& config) {
  const double mixed = crlb_appendix(geometry, scene, config).crlb_rad2;
  const double ideal = crlb_appendix(geometry, scene, MixedAdcConfig::all_high(geometry.elements)).crlb_rad2;
  PerfLoss out;
  out.ratio = mixed / ideal;
  out.ratio_formula = perf_loss_formula(config.kappa(), config.beta, scene.snr, geometry.elements);
  out.db = 10.0 * std::log10(out.ratio);
  return out;
}

/// Large-array limit of the loss factor:
///   (g + alpha)(g k + alpha) / (4 (g k + alpha)(g k^3 + alpha)
///                               - 3 (g k^2 + alpha)^2).
inline double perf_loss_asymptotic(double kappa, double beta, double snr) {
  const double alpha = 1.0 - beta;
  const double g = beta * (snr + 1.0);
  const double k1 = g * kappa + alpha;
  const double k2 = g * kappa * kappa + alpha;
  const double k3 = g * kappa * kappa * kappa + alpha;
  return (g + alpha) * k1 / (4.0 * k1 * k3 - 3.0 * k2 * k2);
}

inline double perf_loss_asymptotic(const MixedAdcConfig& config, const SourceScene& scene) {
  return perf_loss_asymptotic(config.kappa(), config.beta, scene.snr);
}

inline void write_crlb_csv_header(std::ostream& os) {
  os << "kappa,b,gamma_dB,M,N,theta_deg,crlb_deg2,eta_pl_dB\n";
}

inline void write_crlb_csv_row(std::ostream& os, const CrlbReport& report, double eta_pl_db) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%.10g,%d,%.10g,%d,%d,%.10g,%.10g,%.10g\n",
                static_cast<double>(report.high_res) / report.elements,
                report.low_bits == kInfiniteBits ? 0 : report.low_bits, linear_to_db(report.snr),
                report.elements, report.snapshots, rad_to_deg(report.theta), report.crlb_deg2, eta_pl_db);
  os << buf;
}

}  // namespace doamix
