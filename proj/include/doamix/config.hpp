// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cctype>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "doamix/array.hpp"
#include "doamix/common.hpp"
#include "doamix/energy.hpp"
#include "doamix/harness.hpp"
#include "doamix/quantizer.hpp"

namespace doamix {

/// Power-model keys as they appear in config files. Component powers are
/// milliwatts and the channel length is micrometers; both are converted to
/// SI at parse time.
struct PowerConfig {
  double p_syc_mw = 50.0;
  double p_lna_mw = 20.0;
  double p_mix_mw = 30.3;
  double p_fil_mw = 2.5;
  double p_ifa_mw = 3.0;
  double p_agc_mw = 2.0;
  double v_dd_v = 3.0;
  double l_min_um = 0.5;
  double f_cor_hz = 1.0e6;
  double bandwidth_hz = 20.0e6;
  int high_bits = 12;

  PowerModel to_model() const {
    return PowerModel{p_syc_mw * 1e-3, p_lna_mw * 1e-3, p_mix_mw * 1e-3, p_fil_mw * 1e-3,
                      p_ifa_mw * 1e-3, p_agc_mw * 1e-3, v_dd_v,          l_min_um * 1e-6,
                      f_cor_hz,        bandwidth_hz,    high_bits};
  }
};

/// Whole-run configuration with physical units spelled out in the key
/// names. Angles are degrees and SNR is dB at this boundary; conversion to
/// radians / linear happens exactly once, in the accessors.
struct RunConfig {
  int elements = 128;                   // M
  int snapshots = 32;                   // N
  double spacing_wavelengths = 0.5;     // d
  std::vector<double> theta_deg{30.0};  // source directions
  double gamma_db = 0.0;                // per-source SNR
  double kappa = 0.25;                  // fraction of high-resolution chains
  int low_bits = 2;                     // b of the low-resolution chains
  int trials = 500;                     // Monte Carlo trials
  std::uint64_t seed = 20260809ull;     // base seed; trial t uses seed ^ t
  std::string path = "aqnm";            // "aqnm" or "true"
  int threads = 0;                      // 0 = all hardware threads
  double grid_step_deg = 0.05;          // spectrum search grid step
  PowerConfig power;

  void validate() const {
    if (elements < 2) throw std::invalid_argument("config: elements must be >= 2");
    if (snapshots < 1) throw std::invalid_argument("config: snapshots must be >= 1");
    if (!(spacing_wavelengths > 0.0)) throw std::invalid_argument("config: spacing_wavelengths must be > 0");
    if (theta_deg.empty()) throw std::invalid_argument("config: theta_deg must name at least one source");
    for (double t : theta_deg)
      if (!(std::abs(t) < 90.0)) {
        std::ostringstream msg;
        msg << "config: theta_deg must lie strictly inside (-90, 90) (got " << t << ")";
        throw std::invalid_argument(msg.str());
      }
    if (!(kappa >= 0.0 && kappa <= 1.0)) {
      std::ostringstream msg;
      msg << "config: kappa must lie in [0, 1] (got " << kappa << ")";
      throw std::invalid_argument(msg.str());
    }
    if (low_bits < 1) throw std::invalid_argument("config: low_bits must be >= 1");
    if (trials < 1) throw std::invalid_argument("config: trials must be >= 1");
    if (threads < 0) throw std::invalid_argument("config: threads must be >= 0");
    if (!(grid_step_deg > 0.0 && grid_step_deg <= 0.1))
      throw std::invalid_argument("config: grid_step_deg must lie in (0, 0.1]");
    if (path != "aqnm" && path != "true")
      throw std::invalid_argument("config: path must be \"aqnm\" or \"true\"");
    power.to_model().validate();
  }

  ArrayGeometry geometry() const { return ArrayGeometry(elements, spacing_wavelengths); }

  SourceScene scene() const {
    std::vector<double> rad;
    rad.reserve(theta_deg.size());
    for (double t : theta_deg) rad.push_back(deg_to_rad(t));
    return SourceScene(rad, db_to_linear(gamma_db), snapshots);
  }

  MixedAdcConfig adc() const { return MixedAdcConfig::from_kappa(elements, kappa, low_bits); }

  QuantizationPath quantization_path() const {
    return path == "aqnm" ? QuantizationPath::Aqnm : QuantizationPath::TrueQuantizer;
  }
};

namespace detail {

inline double expect_number(const nlohmann::json& v, const std::string& key_path) {
  if (!v.is_number()) throw std::invalid_argument("config: key '" + key_path + "': expected a number");
  return v.get<double>();
}

inline int expect_int(const nlohmann::json& v, const std::string& key_path) {
  if (!v.is_number_integer()) throw std::invalid_argument("config: key '" + key_path + "': expected an integer");
  return v.get<int>();
}

inline std::uint64_t expect_uint64(const nlohmann::json& v, const std::string& key_path) {
  if (!v.is_number_unsigned() && !v.is_number_integer())
    throw std::invalid_argument("config: key '" + key_path + "': expected an unsigned integer");
  return v.get<std::uint64_t>();
}

inline std::string expect_string(const nlohmann::json& v, const std::string& key_path) {
  if (!v.is_string()) throw std::invalid_argument("config: key '" + key_path + "': expected a string");
  return v.get<std::string>();
}

inline std::vector<double> expect_angle_list(const nlohmann::json& v, const std::string& key_path) {
  if (v.is_number()) return {v.get<double>()};
  if (v.is_array()) {
    std::vector<double> out;
    for (const auto& e : v) {
      if (!e.is_number())
        throw std::invalid_argument("config: key '" + key_path + "': expected numbers in the list");
      out.push_back(e.get<double>());
    }
    return out;
  }
  throw std::invalid_argument("config: key '" + key_path + "': expected a number or a list of numbers");
}

inline void apply_power_key(PowerConfig& power, const std::string& key, const nlohmann::json& v) {
  const std::string path = "power." + key;
  if (key == "p_syc_mw") power.p_syc_mw = expect_number(v, path);
  else if (key == "p_lna_mw") power.p_lna_mw = expect_number(v, path);
  else if (key == "p_mix_mw") power.p_mix_mw = expect_number(v, path);
  else if (key == "p_fil_mw") power.p_fil_mw = expect_number(v, path);
  else if (key == "p_ifa_mw") power.p_ifa_mw = expect_number(v, path);
  else if (key == "p_agc_mw") power.p_agc_mw = expect_number(v, path);
  else if (key == "v_dd_v") power.v_dd_v = expect_number(v, path);
  else if (key == "l_min_um") power.l_min_um = expect_number(v, path);
  else if (key == "f_cor_hz") power.f_cor_hz = expect_number(v, path);
  else if (key == "bandwidth_hz") power.bandwidth_hz = expect_number(v, path);
  else if (key == "high_bits") power.high_bits = expect_int(v, path);
  else throw std::invalid_argument("config: unknown key '" + path + "'");
}

}  // namespace detail

/// Parses a JSON config. A blank document yields the full default
/// configuration; unknown keys are rejected with their path.
inline RunConfig parse_config_text(const std::string& text) {
  RunConfig cfg;
  bool blank = true;
  for (char c : text)
    if (!std::isspace(static_cast<unsigned char>(c))) blank = false;
  if (blank) {
    cfg.validate();
    return cfg;
  }

  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(std::string("config: not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw std::invalid_argument("config: top level must be a JSON object");

  for (const auto& [key, value] : doc.items()) {
    if (key == "elements") cfg.elements = detail::expect_int(value, key);
    else if (key == "snapshots") cfg.snapshots = detail::expect_int(value, key);
    else if (key == "spacing_wavelengths") cfg.spacing_wavelengths = detail::expect_number(value, key);
    else if (key == "theta_deg") cfg.theta_deg = detail::expect_angle_list(value, key);
    else if (key == "gamma_db") cfg.gamma_db = detail::expect_number(value, key);
    else if (key == "kappa") cfg.kappa = detail::expect_number(value, key);
    else if (key == "low_bits") cfg.low_bits = detail::expect_int(value, key);
    else if (key == "trials") cfg.trials = detail::expect_int(value, key);
    else if (key == "seed") cfg.seed = detail::expect_uint64(value, key);
    else if (key == "path") cfg.path = detail::expect_string(value, key);
    else if (key == "threads") cfg.threads = detail::expect_int(value, key);
    else if (key == "grid_step_deg") cfg.grid_step_deg = detail::expect_number(value, key);
    else if (key == "power") {
      if (!value.is_object()) throw std::invalid_argument("config: key 'power': expected an object");
      for (const auto& [pkey, pvalue] : value.items()) detail::apply_power_key(cfg.power, pkey, pvalue);
    } else {
      throw std::invalid_argument("config: unknown key '" + key + "'");
    }
  }
  cfg.validate();
  return cfg;
}

inline RunConfig load_config_file(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::invalid_argument("config: cannot open '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << is.rdbuf();
  return parse_config_text(buffer.str());
}

}  // namespace doamix
