// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <ostream>
#include <stdexcept>

#include "doamix/array.hpp"
#include "doamix/common.hpp"
#include "doamix/quantizer.hpp"

namespace doamix {

enum class CovarianceKind { Sample, TheoreticalMixed, TheoreticalIdeal, ErrorTerm };

struct CovarianceMatrix {
  CxMatrix data;
  CovarianceKind kind = CovarianceKind::Sample;
};

/// (1/N) Y Y^H. Hermitian positive semidefinite by construction.
inline CovarianceMatrix sample_covariance(const SnapshotMatrix& y) {
  if (y.data.cols() < 1) throw std::invalid_argument("sample_covariance: needs at least one snapshot");
  CxMatrix r = (y.data * y.data.adjoint()) / static_cast<double>(y.data.cols());
  return CovarianceMatrix{std::move(r), CovarianceKind::Sample};
}

/// Distortion-free covariance sum_k snr a_k a_k^H + I.
inline CovarianceMatrix ideal_covariance(const ArrayGeometry& geometry, const SourceScene& scene) {
  CxMatrix r = CxMatrix::Identity(geometry.elements, geometry.elements);
  for (double theta : scene.angles) {
    const CxVector a = steering_vector(geometry, theta);
    r += scene.snr * (a * a.adjoint());
  }
  return CovarianceMatrix{std::move(r), CovarianceKind::TheoreticalIdeal};
}

/// Exact covariance of the mixed-chain linearized observation, assembled
/// block by block as the direct expectation:
///   [ g a0 a0^H + I        alpha g a0 a1^H                          ]
///   [ alpha g a1 a0^H      alpha^2 g a1 a1^H + (alpha^2 + q) I      ]
/// with g the SNR and q the quantization-noise variance. Single source.
inline CovarianceMatrix theoretical_covariance(const ArrayGeometry& geometry, const SourceScene& scene,
                                               const MixedAdcConfig& config) {
  if (scene.sources() != 1)
    throw std::invalid_argument("theoretical_covariance: defined for a single source");
  if (config.elements() != geometry.elements)
    throw std::invalid_argument("theoretical_covariance: config does not match geometry");

  const int m0 = config.high_res;
  const int m1 = config.low_res;
  const double g = scene.snr;
  const double alpha = config.alpha;
  const double qn = quantization_noise_cov(scene, config);

  const CxVector a = steering_vector(geometry, scene.angles.front());
  const CxVector a0 = a.head(m0);
  const CxVector a1 = a.tail(m1);

  CxMatrix r(geometry.elements, geometry.elements);
  r.topLeftCorner(m0, m0) = g * (a0 * a0.adjoint()) + CxMatrix::Identity(m0, m0);
  if (m1 > 0) {
    r.topRightCorner(m0, m1) = (alpha * g) * (a0 * a1.adjoint());
    r.bottomLeftCorner(m1, m0) = (alpha * g) * (a1 * a0.adjoint());
    r.bottomRightCorner(m1, m1) =
        (alpha * alpha * g) * (a1 * a1.adjoint()) + (alpha * alpha + qn) * CxMatrix::Identity(m1, m1);
  }
  return CovarianceMatrix{std::move(r), CovarianceKind::TheoreticalMixed};
}

/// Deviation of the mixed covariance from the ideal one, built from its own
/// closed form (zero high-resolution auto block, (alpha-1) g cross blocks,
/// (alpha^2-1) g a1 a1^H + (g alpha - 1)(1 - alpha) I low block). Adding it
/// to ideal_covariance must reproduce theoretical_covariance.
inline CovarianceMatrix error_term(const ArrayGeometry& geometry, const SourceScene& scene,
                                   const MixedAdcConfig& config) {
  if (scene.sources() != 1) throw std::invalid_argument("error_term: defined for a single source");
  if (config.elements() != geometry.elements)
    throw std::invalid_argument("error_term: config does not match geometry");

  const int m0 = config.high_res;
  const int m1 = config.low_res;
  const double g = scene.snr;
  const double alpha = config.alpha;

  const CxVector a = steering_vector(geometry, scene.angles.front());
  const CxVector a0 = a.head(m0);
  const CxVector a1 = a.tail(m1);

  CxMatrix r = CxMatrix::Zero(geometry.elements, geometry.elements);
  if (m1 > 0) {
    r.topRightCorner(m0, m1) = ((alpha - 1.0) * g) * (a0 * a1.adjoint());
    r.bottomLeftCorner(m1, m0) = ((alpha - 1.0) * g) * (a1 * a0.adjoint());
    r.bottomRightCorner(m1, m1) = ((alpha * alpha - 1.0) * g) * (a1 * a1.adjoint()) +
                                  ((g * alpha - 1.0) * (1.0 - alpha)) * CxMatrix::Identity(m1, m1);
  }
  return CovarianceMatrix{std::move(r), CovarianceKind::ErrorTerm};
}

/// Eigenvalue ratio of the ideal covariance, as actually computed by the
/// solver. For snr a a^H + I with a^H a = M the exact value is snr*M + 1;
/// with a unit-norm manifold normalization it would read snr + 1.
inline double condition_number_ideal(const ArrayGeometry& geometry, const SourceScene& scene) {
  if (scene.sources() != 1)
    throw std::invalid_argument("condition_number_ideal: defined for a single source");
  const CovarianceMatrix r = ideal_covariance(geometry, scene);
  Eigen::SelfAdjointEigenSolver<CxMatrix> solver(r.data, Eigen::EigenvaluesOnly);
  const RealVector ev = solver.eigenvalues();
  return ev(ev.size() - 1) / ev(0);
}

/// Rank-one analytic value of the ratio above; valid for any M >= 1.
inline double ideal_condition_number_analytic(double snr, int elements) {
  return snr * static_cast<double>(elements) + 1.0;
}

/// Text dump, one "re,im" pair per entry, row-major.
inline void write_complex_matrix(std::ostream& os, const CxMatrix& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c > 0) os << ' ';
      char buf[64];
      std::snprintf(buf, sizeof(buf), "%.17g,%.17g", m(r, c).real(), m(r, c).imag());
      os << buf;
    }
    os << '\n';
  }
}

}  // namespace doamix
