// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <ostream>
#include <span>
#include <stdexcept>
#include <vector>

#include "doamix/array.hpp"
#include "doamix/common.hpp"
#include "doamix/crlb.hpp"
#include "doamix/quantizer.hpp"

namespace doamix {

/// Receiver power model. All powers in watts, lengths in meters,
/// frequencies in hertz.
struct PowerModel {
  double p_syc_w;       // frequency synthesizer
  double p_lna_w;       // low-noise amplifier, per chain
  double p_mix_w;       // mixer, per chain
  double p_fil_w;       // active filters, per chain
  double p_ifa_w;       // intermediate-frequency amplifier, per chain
  double p_agc_w;       // automatic gain control, per gated chain
  double v_dd_v;        // converter supply voltage
  double l_min_m;       // minimum CMOS channel length
  double f_cor_hz;      // 1/f corner frequency
  double bandwidth_hz;  // signal bandwidth
  int high_bits;        // bit depth of the high-resolution converters

  void validate() const {
    const double vals[] = {p_syc_w, p_lna_w, p_mix_w, p_fil_w, p_ifa_w, p_agc_w,
                           v_dd_v,  l_min_m, f_cor_hz, bandwidth_hz};
    for (double v : vals)
      if (!(v > 0.0)) throw std::invalid_argument("power model: all quantities must be > 0");
    if (high_bits < 6) throw std::invalid_argument("power model: high_bits must be >= 6");
  }

  /// Classic massive-MIMO receiver constants (50.0 / 20 / 30.3 / 2.5 / 3 /
  /// 2 mW, 3 V, 0.5 um, 1 MHz corner, 20 MHz bandwidth, 12-bit high side).
  static PowerModel reference() {
    return PowerModel{50.0e-3, 20.0e-3, 30.3e-3, 2.5e-3, 3.0e-3, 2.0e-3, 3.0, 0.5e-6, 1.0e6, 20.0e6, 12};
  }
};

/// Nyquist-rate CMOS ADC power: 3 Vdd^2 Lmin (2B + f_cor) / 10^(-0.1525 b + 4.838).
inline double adc_power(const PowerModel& model, int bits) {
  if (bits < 1) throw std::invalid_argument("adc_power: bits must be >= 1");
  return 3.0 * model.v_dd_v * model.v_dd_v * model.l_min_m * (2.0 * model.bandwidth_hz + model.f_cor_hz) /
         std::pow(10.0, -0.1525 * bits + 4.838);
}

struct PowerBreakdown {
  double synthesizer = 0.0;
  double lna = 0.0;
  double mixer = 0.0;
  double filters = 0.0;
  double if_amplifier = 0.0;
  double agc = 0.0;
  double adc_high = 0.0;
  double adc_low = 0.0;

  double sum() const {
    return synthesizer + lna + mixer + filters + if_amplifier + agc + adc_high + adc_low;
  }
};

struct EnergyReport {
  double p_total_w = 0.0;
  PowerBreakdown breakdown;
  double crlb_deg2 = 0.0;       // filled by energy_efficiency
  double ee_per_deg_w = 0.0;    // filled by energy_efficiency
  bool pure_low_res = false;    // no high-resolution chains at all
};

/// Receiver power: per-chain RF stages for all M elements, AGC for the
/// high-resolution chains always and for the low-resolution chains only
/// above 1 bit (a 1-bit converter keeps no amplitude information to gain-
/// control), plus the two ADC banks.
inline EnergyReport total_power(const PowerModel& model, const MixedAdcConfig& config,
                                const ArrayGeometry& geometry) {
  model.validate();
  if (config.elements() != geometry.elements)
    throw std::invalid_argument("total_power: config does not match geometry");

  const double m = geometry.elements;
  const double m0 = config.high_res;
  const double m1 = config.low_res;
  const double agc_flag = (config.low_res > 0 && config.low_bits == 1) ? 0.0 : 1.0;

  EnergyReport r;
  r.breakdown.synthesizer = model.p_syc_w;
  r.breakdown.lna = m * model.p_lna_w;
  r.breakdown.mixer = m * model.p_mix_w;
  r.breakdown.filters = m * model.p_fil_w;
  r.breakdown.if_amplifier = m * model.p_ifa_w;
  r.breakdown.agc = m0 * model.p_agc_w + agc_flag * m1 * model.p_agc_w;
  r.breakdown.adc_high = m0 * adc_power(model, model.high_bits);
  r.breakdown.adc_low = config.low_res > 0 ? m1 * adc_power(model, config.low_bits) : 0.0;
  r.p_total_w = r.breakdown.sum();
  r.pure_low_res = config.high_res == 0;
  return r;
}

/// Accuracy per watt: CRLB^(-1/2) / P_total with the bound in degrees^2,
/// giving 1/degree/W.
inline EnergyReport energy_efficiency(const ArrayGeometry& geometry, const SourceScene& scene,
                                      const MixedAdcConfig& config, const PowerModel& model) {
  EnergyReport r = total_power(model, config, geometry);
  r.crlb_deg2 = crlb_appendix(geometry, scene, config).crlb_deg2;
  r.ee_per_deg_w = 1.0 / (std::sqrt(r.crlb_deg2) * r.p_total_w);
  return r;
}

/// Bit depth maximizing the efficiency factor over the candidate range;
/// ties break toward fewer bits.
inline int optimal_bits(const ArrayGeometry& geometry, const SourceScene& scene, const PowerModel& model,
                        double kappa, std::span<const int> bit_range) {
  if (bit_range.empty()) throw std::invalid_argument("optimal_bits: empty bit range");
  int best_bits = 0;
  double best_ee = -1.0;
  std::vector<int> sorted(bit_range.begin(), bit_range.end());
  std::sort(sorted.begin(), sorted.end());
  for (int b : sorted) {
    const MixedAdcConfig cfg = MixedAdcConfig::from_kappa(geometry.elements, kappa, b);
    const double ee = energy_efficiency(geometry, scene, cfg, model).ee_per_deg_w;
    if (ee > best_ee) {
      best_ee = ee;
      best_bits = b;
    }
  }
  return best_bits;
}

inline void write_ee_csv_header(std::ostream& os) {
  os << "kappa,b,p_total_W,crlb_deg2,ee_per_deg_per_W\n";
}

inline void write_ee_csv_row(std::ostream& os, double kappa, int bits, const EnergyReport& report) {
  char buf[192];
  std::snprintf(buf, sizeof(buf), "%.10g,%d,%.10g,%.10g,%.10g\n", kappa, bits, report.p_total_w,
                report.crlb_deg2, report.ee_per_deg_w);
  os << buf;
}

}  // namespace doamix
