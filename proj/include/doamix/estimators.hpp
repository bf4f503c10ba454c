// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "doamix/array.hpp"
#include "doamix/common.hpp"
#include "doamix/covariance.hpp"

namespace doamix {

/// Eigenstructure of a Hermitian covariance: top-K eigenvectors span the
/// signal subspace, the rest the noise subspace. `degenerate` flags a
/// signal/noise eigenvalue gap below 1e-9 of the largest eigenvalue.
struct SubspaceDecomposition {
  CxMatrix signal_basis;        // M x K
  CxMatrix noise_basis;         // M x (M - K)
  RealVector eigenvalues;       // descending
  bool degenerate = false;
};

inline SubspaceDecomposition decompose(const CovarianceMatrix& covariance, int num_sources) {
  const Eigen::Index m = covariance.data.rows();
  if (num_sources < 1 || num_sources >= m)
    throw std::invalid_argument("decompose: need 1 <= num_sources < M");

  Eigen::SelfAdjointEigenSolver<CxMatrix> solver(covariance.data);
  if (solver.info() != Eigen::Success) throw std::runtime_error("decompose: eigensolver failed");

  SubspaceDecomposition dec;
  dec.eigenvalues = solver.eigenvalues().reverse();
  CxMatrix vectors(m, m);
  for (Eigen::Index i = 0; i < m; ++i) vectors.col(i) = solver.eigenvectors().col(m - 1 - i);
  dec.signal_basis = vectors.leftCols(num_sources);
  dec.noise_basis = vectors.rightCols(m - num_sources);

  const double gap = dec.eigenvalues(num_sources - 1) - dec.eigenvalues(num_sources);
  const double scale = std::max(std::abs(dec.eigenvalues(0)), 1e-300);
  dec.degenerate = gap < 1e-9 * scale;
  return dec;
}

/// S(theta) = 1 / ||E_W^H a(theta)||^2 sampled over the grid.
inline std::vector<double> music_spectrum(const SubspaceDecomposition& dec, const ArrayGeometry& geometry,
                                          std::span<const double> grid_rad) {
  if (grid_rad.empty()) throw std::invalid_argument("music_spectrum: empty grid");
  std::vector<double> spectrum(grid_rad.size());
  for (std::size_t i = 0; i < grid_rad.size(); ++i) {
    const CxVector a = steering_vector(geometry, grid_rad[i]);
    const double denom = (dec.noise_basis.adjoint() * a).squaredNorm();
    spectrum[i] = 1.0 / denom;
  }
  return spectrum;
}

enum class DoaMethod { MusicGrid, RootMusic };

struct DoaEstimate {
  std::vector<double> angles;    // radians, ascending
  std::vector<double> spectrum;  // sampled S(theta) when grid search was used
  DoaMethod method = DoaMethod::MusicGrid;
  bool weak_root = false;        // a selected root had magnitude < 0.5
};

inline std::vector<double> make_angle_grid(double start_rad, double stop_rad, double step_rad) {
  if (!(step_rad > 0.0) || !(stop_rad > start_rad)) throw std::invalid_argument("angle grid: bad bounds");
  std::vector<double> grid;
  const int count = static_cast<int>(std::floor((stop_rad - start_rad) / step_rad + 0.5)) + 1;
  grid.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) grid.push_back(start_rad + i * step_rad);
  while (!grid.empty() && grid.back() > stop_rad + 1e-12) grid.pop_back();
  return grid;
}

/// Default search grid: 0.05 degree steps, staying 0.5 degrees away from
/// the +-90 degree endfire limits.
inline std::vector<double> default_angle_grid(double step_deg = 0.05) {
  return make_angle_grid(deg_to_rad(-89.5), deg_to_rad(89.5), deg_to_rad(step_deg));
}

/// K largest local maxima of the sampled spectrum, each refined with a
/// 3-point parabola on the log spectrum. Grid endpoints count as peaks but
/// are not refined past the grid.
inline DoaEstimate find_peaks(std::span<const double> grid_rad, std::span<const double> spectrum,
                              int num_sources) {
  if (grid_rad.size() != spectrum.size() || grid_rad.size() < 2)
    throw std::invalid_argument("find_peaks: grid and spectrum sizes disagree");
  if (num_sources < 1) throw std::invalid_argument("find_peaks: num_sources must be >= 1");
  const double step = grid_rad[1] - grid_rad[0];
  if (step > deg_to_rad(0.1) + 1e-15)
    throw std::invalid_argument("find_peaks: grid step must be <= 0.1 degrees");

  struct Peak {
    std::size_t index;
    double value;
  };
  std::vector<Peak> peaks;
  const std::size_t n = spectrum.size();
  if (spectrum[0] > spectrum[1]) peaks.push_back({0, spectrum[0]});
  for (std::size_t i = 1; i + 1 < n; ++i)
    if (spectrum[i] >= spectrum[i - 1] && spectrum[i] > spectrum[i + 1]) peaks.push_back({i, spectrum[i]});
  if (spectrum[n - 1] > spectrum[n - 2]) peaks.push_back({n - 1, spectrum[n - 1]});

  if (static_cast<int>(peaks.size()) < num_sources)
    throw std::runtime_error("find_peaks: found " + std::to_string(peaks.size()) + " local maxima, need " +
                             std::to_string(num_sources));

  std::sort(peaks.begin(), peaks.end(), [](const Peak& a, const Peak& b) { return a.value > b.value; });
  peaks.resize(static_cast<std::size_t>(num_sources));

  DoaEstimate est;
  est.method = DoaMethod::MusicGrid;
  est.spectrum.assign(spectrum.begin(), spectrum.end());
  for (const Peak& p : peaks) {
    double angle = grid_rad[p.index];
    if (p.index > 0 && p.index + 1 < n) {
      const auto log_floor = [](double v) { return std::log10(std::max(v, 1e-300)); };
      const double lo = log_floor(spectrum[p.index - 1]);
      const double mid = log_floor(spectrum[p.index]);
      const double hi = log_floor(spectrum[p.index + 1]);
      const double denom = lo - 2.0 * mid + hi;
      if (denom < 0.0) {
        double offset = 0.5 * (lo - hi) / denom;
        offset = std::clamp(offset, -0.5, 0.5);
        angle += offset * step;
      }
    }
    est.angles.push_back(angle);
  }
  std::sort(est.angles.begin(), est.angles.end());
  return est;
}

namespace detail {

/// Coefficients of the conjugate-symmetric polynomial
/// sum_l c_l z^(l+M-1) with c_l the l-th diagonal sum of the noise
/// projector E_W E_W^H.
inline std::vector<Complex> noise_polynomial(const CxMatrix& projector) {
  const Eigen::Index m = projector.rows();
  std::vector<Complex> coeff(static_cast<std::size_t>(2 * m - 1));
  for (Eigen::Index l = 0; l < m; ++l) {
    Complex sum = 0.0;
    for (Eigen::Index r = 0; r + l < m; ++r) sum += projector(r, r + l);
    coeff[static_cast<std::size_t>(m - 1 + l)] = sum;
    coeff[static_cast<std::size_t>(m - 1 - l)] = std::conj(sum);
  }
  return coeff;
}

/// Roots via the companion-matrix eigenvalues; tiny leading coefficients
/// are trimmed first so the companion matrix stays well scaled.
inline std::vector<Complex> polynomial_roots(std::vector<Complex> coeff) {
  double scale = 0.0;
  for (const Complex& c : coeff) scale = std::max(scale, std::abs(c));
  if (scale == 0.0) throw std::runtime_error("polynomial_roots: zero polynomial");
  while (coeff.size() > 1 && std::abs(coeff.back()) <= 1e-14 * scale) coeff.pop_back();
  const std::size_t degree = coeff.size() - 1;
  if (degree == 0) throw std::runtime_error("polynomial_roots: degenerate polynomial");

  CxMatrix companion = CxMatrix::Zero(static_cast<Eigen::Index>(degree), static_cast<Eigen::Index>(degree));
  for (std::size_t i = 1; i < degree; ++i)
    companion(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i - 1)) = 1.0;
  for (std::size_t i = 0; i < degree; ++i)
    companion(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(degree - 1)) = -coeff[i] / coeff[degree];

  Eigen::ComplexEigenSolver<CxMatrix> solver(companion, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success) throw std::runtime_error("polynomial_roots: eigensolver failed");
  std::vector<Complex> roots(static_cast<std::size_t>(degree));
  for (std::size_t i = 0; i < degree; ++i) roots[i] = solver.eigenvalues()(static_cast<Eigen::Index>(i));
  return roots;
}

}  // namespace detail

/// Root form of the grid search: roots of the noise-projector polynomial
/// inside the unit disk that sit closest to the unit circle map to arrival
/// angles through asin(arg z / (2 pi d)). Needs spacing <= lambda/2, which
/// keeps the inversion unambiguous.
inline DoaEstimate root_music(const SubspaceDecomposition& dec, const ArrayGeometry& geometry,
                              int num_sources) {
  if (geometry.spacing > 0.5 + 1e-12)
    throw std::invalid_argument("root_music: spacing must be <= 0.5 wavelengths");
  const Eigen::Index m = dec.noise_basis.rows();
  if (num_sources < 1 || num_sources >= m)
    throw std::invalid_argument("root_music: need 1 <= num_sources < M");
  if (geometry.elements != m) throw std::invalid_argument("root_music: geometry does not match decomposition");

  const CxMatrix projector = dec.noise_basis * dec.noise_basis.adjoint();
  const std::vector<Complex> roots = detail::polynomial_roots(detail::noise_polynomial(projector));

  struct Candidate {
    Complex z;
    double circle_distance;
  };
  std::vector<Candidate> candidates;
  const double arg_scale = two_pi * geometry.spacing;
  for (const Complex& z : roots) {
    const double mag = std::abs(z);
    if (mag > 1.0 + 1e-9) continue;
    const double u = std::arg(z) / arg_scale;
    if (std::abs(u) > 1.0 + 1e-9) continue;  // outside the visible region
    candidates.push_back({z, std::abs(1.0 - mag)});
  }
  std::sort(candidates.begin(), candidates.end(),
            [](const Candidate& a, const Candidate& b) { return a.circle_distance < b.circle_distance; });

  // A root pair (z, 1/conj(z)) from one circle crossing shares its argument;
  // keep only one of them.
  std::vector<Complex> selected;
  for (const Candidate& c : candidates) {
    if (static_cast<int>(selected.size()) == num_sources) break;
    bool duplicate = false;
    for (const Complex& s : selected)
      if (std::abs(std::arg(c.z * std::conj(s))) < 1e-5) duplicate = true;
    if (!duplicate) selected.push_back(c.z);
  }
  if (static_cast<int>(selected.size()) < num_sources)
    throw std::runtime_error("root_music: only " + std::to_string(selected.size()) +
                             " usable roots, need " + std::to_string(num_sources));

  DoaEstimate est;
  est.method = DoaMethod::RootMusic;
  for (const Complex& z : selected) {
    if (std::abs(z) < 0.5) est.weak_root = true;
    const double u = std::clamp(std::arg(z) / arg_scale, -1.0, 1.0);
    est.angles.push_back(std::asin(u));
  }
  std::sort(est.angles.begin(), est.angles.end());
  return est;
}

/// Two-column CSV (angle_deg, S_dB), normalized so the strongest point sits
/// at 0 dB.
inline void write_spectrum_csv(std::ostream& os, std::span<const double> grid_rad,
                               std::span<const double> spectrum) {
  if (grid_rad.size() != spectrum.size()) throw std::invalid_argument("spectrum csv: size mismatch");
  double peak = 0.0;
  for (double s : spectrum) peak = std::max(peak, s);
  if (peak <= 0.0) peak = 1.0;
  os << "angle_deg,S_dB\n";
  char buf[96];
  for (std::size_t i = 0; i < grid_rad.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.10g,%.10g\n", rad_to_deg(grid_rad[i]),
                  10.0 * std::log10(std::max(spectrum[i] / peak, 1e-300)));
    os << buf;
  }
}

}  // namespace doamix
