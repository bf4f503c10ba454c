// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "doamix/common.hpp"
#include "doamix/rng.hpp"

namespace doamix {

/// Uniform linear array. Element pitch is given in carrier wavelengths, so
/// the wavelength never appears explicitly anywhere downstream. Element m
/// (0-based) sits at d_m = m * spacing; the first element is the phase
/// reference.
struct ArrayGeometry {
  int elements;    // M
  double spacing;  // inter-element distance / wavelength

  ArrayGeometry(int element_count, double spacing_wavelengths)
      : elements(element_count), spacing(spacing_wavelengths) {
    if (elements < 2) throw std::invalid_argument("array geometry: elements must be >= 2");
    if (!(spacing > 0.0)) throw std::invalid_argument("array geometry: spacing must be > 0");
  }

  double position(int m) const { return static_cast<double>(m) * spacing; }

  RealVector positions() const {
    RealVector p(elements);
    for (int m = 0; m < elements; ++m) p(m) = position(m);
    return p;
  }
};

/// Narrowband far-field scene: source directions, per-source SNR and the
/// snapshot count. Noise power is normalized to 1, so `snr` equals the
/// per-source signal power.
struct SourceScene {
  std::vector<double> angles;  // radians, each strictly inside (-pi/2, pi/2)
  double snr;                  // linear SNR per source
  int snapshots;               // N

  SourceScene(std::vector<double> angles_rad, double snr_linear, int num_snapshots)
      : angles(std::move(angles_rad)), snr(snr_linear), snapshots(num_snapshots) {
    if (angles.empty()) throw std::invalid_argument("scene: needs at least one source");
    for (double a : angles) {
      if (!(std::abs(a) < std::numbers::pi / 2.0))
        throw std::invalid_argument("scene: angles must lie strictly inside (-pi/2, pi/2)");
    }
    for (std::size_t i = 0; i < angles.size(); ++i)
      for (std::size_t j = i + 1; j < angles.size(); ++j)
        if (angles[i] == angles[j]) throw std::invalid_argument("scene: source angles must be distinct");
    if (!(snr > 0.0)) throw std::invalid_argument("scene: snr must be > 0");
    if (snapshots < 1) throw std::invalid_argument("scene: snapshots must be >= 1");
  }

  static SourceScene single(double theta_rad, double snr_linear, int num_snapshots) {
    return SourceScene(std::vector<double>{theta_rad}, snr_linear, num_snapshots);
  }

  int sources() const { return static_cast<int>(angles.size()); }

  /// Total signal power per array element (sources are independent and
  /// equal-power).
  double signal_power() const { return snr * static_cast<double>(sources()); }
};

enum class SnapshotStage { Unquantized, Aqnm, TrueQuantized };

/// M x N block of complex array samples, tagged with the processing stage
/// it came from.
struct SnapshotMatrix {
  CxMatrix data;
  SnapshotStage stage = SnapshotStage::Unquantized;
};

inline void require_visible_angle(double theta) {
  if (!(std::abs(theta) < std::numbers::pi / 2.0))
    throw std::invalid_argument("steering: theta must lie strictly inside (-pi/2, pi/2)");
}

/// a(theta): entry m is exp(j 2 pi d_m sin(theta)), unit modulus.
inline CxVector steering_vector(const ArrayGeometry& geometry, double theta) {
  require_visible_angle(theta);
  const double s = std::sin(theta);
  CxVector a(geometry.elements);
  for (int m = 0; m < geometry.elements; ++m) a(m) = std::polar(1.0, two_pi * geometry.position(m) * s);
  return a;
}

/// da/dtheta: entry m is j 2 pi cos(theta) d_m a_m(theta); the reference
/// element contributes exactly zero.
inline CxVector steering_derivative(const ArrayGeometry& geometry, double theta) {
  require_visible_angle(theta);
  const CxVector a = steering_vector(geometry, theta);
  const double c = two_pi * std::cos(theta);
  CxVector da(geometry.elements);
  for (int m = 0; m < geometry.elements; ++m) da(m) = Complex(0.0, c * geometry.position(m)) * a(m);
  return da;
}

/// Unquantized snapshots x(n) = sum_k a(theta_k) s_k(n) + w(n), with
/// s_k i.i.d. CN(0, snr) and w i.i.d. CN(0, I). Deterministic in the seed:
/// per snapshot, source symbols are drawn first, then the noise vector.
inline SnapshotMatrix synthesize_snapshots(const ArrayGeometry& geometry, const SourceScene& scene,
                                           std::uint64_t seed) {
  const int m_count = geometry.elements;
  const int n_count = scene.snapshots;
  const int k_count = scene.sources();

  std::vector<CxVector> steering;
  steering.reserve(k_count);
  for (double theta : scene.angles) steering.push_back(steering_vector(geometry, theta));

  const double amplitude = std::sqrt(scene.snr);
  GaussianRng rng(seed);
  CxMatrix x(m_count, n_count);
  for (int n = 0; n < n_count; ++n) {
    x.col(n).setZero();
    for (int k = 0; k < k_count; ++k) {
      const Complex s = amplitude * rng.complex_normal();
      x.col(n) += steering[static_cast<std::size_t>(k)] * s;
    }
    for (int m = 0; m < m_count; ++m) x(m, n) += rng.complex_normal();
  }
  return SnapshotMatrix{std::move(x), SnapshotStage::Unquantized};
}

}  // namespace doamix
