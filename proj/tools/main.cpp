// SPDX-License-Identifier: Apache-2.0
//
// doamix command-line front end: closed-form bounds, spectrum and Monte
// Carlo runs for the mixed-ADC uniform linear array.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "doamix/doamix.hpp"

namespace {

namespace fs = std::filesystem;
using namespace doamix;

constexpr int kExitOk = 0;
constexpr int kExitConfigError = 2;
constexpr int kExitNumericError = 3;

struct CliState {
  std::string config_path;
  std::string out_dir;
  RunConfig cfg;

  // raw flag storage; applied over the file config only when the flag was
  // actually given
  int elements = 0;
  int snapshots = 0;
  double spacing = 0.0;
  std::vector<double> theta_deg;
  double gamma_db = 0.0;
  double kappa = 0.0;
  int low_bits = 0;
  int trials = 0;
  std::uint64_t seed = 0;
  std::string path;
  int threads = 0;
  double grid_step_deg = 0.0;
  int high_bits = 0;
};

void add_config_flags(CLI::App& app, CliState& st) {
  app.add_option("--config", st.config_path, "JSON config file; flags override file values");
  app.add_option("--out-dir", st.out_dir,
                 "output directory (default: $DOAMIX_OUT_DIR or ./doamix_out)");
  app.add_option("--elements", st.elements, "array elements M");
  app.add_option("--snapshots", st.snapshots, "snapshot count N");
  app.add_option("--spacing", st.spacing, "element spacing in wavelengths");
  app.add_option("--theta-deg", st.theta_deg, "source direction(s) in degrees, inside (-90, 90)");
  app.add_option("--gamma-db", st.gamma_db, "per-source SNR in dB");
  app.add_option("--kappa", st.kappa, "fraction of high-resolution chains, in [0, 1]");
  app.add_option("--low-bits", st.low_bits, "bit depth of the low-resolution chains");
  app.add_option("--trials", st.trials, "Monte Carlo trials");
  app.add_option("--seed", st.seed, "base seed; trial t uses seed ^ t");
  app.add_option("--path", st.path, "quantization path: aqnm | true");
  app.add_option("--threads", st.threads, "worker threads (0 = all hardware threads)");
  app.add_option("--grid-step-deg", st.grid_step_deg, "spectrum grid step in degrees, <= 0.1");
  app.add_option("--high-bits", st.high_bits, "bit depth of the high-resolution ADCs (power model)");
}

void finalize_config(const CLI::App& app, CliState& st) {
  st.cfg = st.config_path.empty() ? RunConfig{} : load_config_file(st.config_path);
  auto given = [&](const std::string& name) { return app.count(name) > 0; };
  if (given("--elements")) st.cfg.elements = st.elements;
  if (given("--snapshots")) st.cfg.snapshots = st.snapshots;
  if (given("--spacing")) st.cfg.spacing_wavelengths = st.spacing;
  if (given("--theta-deg")) st.cfg.theta_deg = st.theta_deg;
  if (given("--gamma-db")) st.cfg.gamma_db = st.gamma_db;
  if (given("--kappa")) st.cfg.kappa = st.kappa;
  if (given("--low-bits")) st.cfg.low_bits = st.low_bits;
  if (given("--trials")) st.cfg.trials = st.trials;
  if (given("--seed")) st.cfg.seed = st.seed;
  if (given("--path")) st.cfg.path = st.path;
  if (given("--threads")) st.cfg.threads = st.threads;
  if (given("--grid-step-deg")) st.cfg.grid_step_deg = st.grid_step_deg;
  if (given("--high-bits")) st.cfg.power.high_bits = st.high_bits;
  st.cfg.validate();
  if (st.out_dir.empty()) {
    const char* env = std::getenv("DOAMIX_OUT_DIR");
    st.out_dir = env != nullptr ? env : "doamix_out";
  }
}

std::unique_ptr<std::ofstream> open_output(const std::string& path) {
  auto os = std::make_unique<std::ofstream>(path, std::ios::binary);
  if (!*os) throw std::runtime_error("cannot open '" + path + "' for writing");
  return os;
}

void require_single_source(const RunConfig& cfg, const std::string& what) {
  if (cfg.theta_deg.size() != 1)
    throw std::invalid_argument("config: " + what + " needs exactly one theta_deg entry");
}

int cmd_crlb(const CliState& st, const std::string& csv_path) {
  require_single_source(st.cfg, "crlb");
  const ArrayGeometry geometry = st.cfg.geometry();
  const SourceScene scene = st.cfg.scene();
  const MixedAdcConfig adc = st.cfg.adc();

  const CrlbReport report = crlb_appendix(geometry, scene, adc);
  const PerfLoss loss = perf_loss(geometry, scene, adc);
  const double cond = ideal_condition_number_analytic(scene.snr, geometry.elements);

  std::printf("elements (M)        : %d\n", report.elements);
  std::printf("high_res (M0)       : %d  (kappa = %.6g)\n", report.high_res, adc.kappa());
  std::printf("low_bits (b)        : %s\n",
              adc.low_res == 0 ? "n/a (no low-resolution chains)" : std::to_string(adc.low_bits).c_str());
  std::printf("beta / alpha        : %.6g / %.6g\n", adc.beta, adc.alpha);
  std::printf("snapshots (N)       : %d\n", report.snapshots);
  std::printf("gamma               : %.6g dB (linear %.6g)\n", linear_to_db(scene.snr), scene.snr);
  std::printf("theta               : %.6g deg\n", rad_to_deg(report.theta));
  std::printf("spacing             : %.6g wavelengths\n", report.spacing);
  std::printf("xi / mu / nu        : %.10g / %.10g / %.10g\n", report.intermediates.xi,
              report.intermediates.mu, report.intermediates.nu);
  std::printf("fisher per snapshot : %.10g\n", report.fim_per_snapshot);
  std::printf("crlb_rad2           : %.10g\n", report.crlb_rad2);
  std::printf("crlb_deg2           : %.10g\n", report.crlb_deg2);
  std::printf("sqrt(crlb) [deg]    : %.10g\n", std::sqrt(report.crlb_deg2));
  std::printf("perf_loss           : %.10g (%.6g dB)\n", loss.ratio, loss.db);
  std::printf("cond(ideal cov)     : %.10g  (snr*M + 1; reads snr + 1 with a unit-norm manifold)\n",
              cond);

  if (!csv_path.empty()) {
    auto os = open_output(csv_path);
    write_crlb_csv_header(*os);
    write_crlb_csv_row(*os, report, loss.db);
    std::printf("wrote %s\n", csv_path.c_str());
  }
  return kExitOk;
}

int cmd_perf_loss(const CliState& st, std::vector<double> kappas, std::vector<int> bits,
                  const std::string& out_path) {
  require_single_source(st.cfg, "perf-loss");
  if (kappas.empty()) kappas = {0.0, 0.125, 0.25, 0.375, 0.5, 0.625, 0.75, 0.875, 1.0};
  if (bits.empty()) bits = {1, 2, 3, 4};

  ExperimentSpec spec = ExperimentSpec::defaults(ExperimentId::Fig2PerfLoss);
  spec.kappas = kappas;
  spec.bits = bits;
  spec.gammas_db = {st.cfg.gamma_db};
  spec.elements = st.cfg.elements;
  spec.snapshots = st.cfg.snapshots;
  spec.thetas_deg = {st.cfg.theta_deg.front()};
  spec.spacing = st.cfg.spacing_wavelengths;

  const RunResult result = run(spec);
  if (out_path.empty()) {
    write_perf_loss_table_csv(std::cout, result);
  } else {
    auto os = open_output(out_path);
    write_perf_loss_table_csv(*os, result);
    std::printf("wrote %s\n", out_path.c_str());
  }
  return kExitOk;
}

int cmd_energy(const CliState& st, std::vector<int> bits, const std::string& out_path) {
  require_single_source(st.cfg, "energy");
  if (bits.empty()) bits = {1, 2, 3, 4, 5, 6, 7, 8};

  const ArrayGeometry geometry = st.cfg.geometry();
  const SourceScene scene = st.cfg.scene();
  const PowerModel model = st.cfg.power.to_model();

  std::ostringstream body;
  write_ee_csv_header(body);
  for (int b : bits) {
    const MixedAdcConfig cfg = MixedAdcConfig::from_kappa(st.cfg.elements, st.cfg.kappa, b);
    const EnergyReport report = energy_efficiency(geometry, scene, cfg, model);
    write_ee_csv_row(body, cfg.kappa(), b, report);
  }
  const int best = optimal_bits(geometry, scene, model, st.cfg.kappa, bits);

  if (out_path.empty()) {
    std::cout << body.str();
  } else {
    auto os = open_output(out_path);
    *os << body.str();
    std::printf("wrote %s\n", out_path.c_str());
  }
  std::printf("optimal_bits (kappa = %.6g): %d\n", st.cfg.kappa, best);
  if (st.cfg.kappa == 0.0)
    std::printf("note: pure low-resolution array; efficient but estimation quality is poor\n");
  return kExitOk;
}

int cmd_spectrum(const CliState& st, const std::string& out_path) {
  const ArrayGeometry geometry = st.cfg.geometry();
  const SourceScene scene = st.cfg.scene();
  const MixedAdcConfig adc = st.cfg.adc();

  const SnapshotMatrix x = synthesize_snapshots(geometry, scene, st.cfg.seed);
  const SnapshotMatrix y = st.cfg.quantization_path() == QuantizationPath::Aqnm
                               ? aqnm_observe(x, geometry, scene, adc, st.cfg.seed ^ 0x6a09e667f3bcc908ull)
                               : observe_true_quantized(x, geometry, scene, adc);
  const SubspaceDecomposition dec = decompose(sample_covariance(y), scene.sources());
  const std::vector<double> grid = default_angle_grid(st.cfg.grid_step_deg);
  const std::vector<double> spectrum = music_spectrum(dec, geometry, grid);

  if (out_path.empty()) {
    write_spectrum_csv(std::cout, grid, spectrum);
  } else {
    auto os = open_output(out_path);
    write_spectrum_csv(*os, grid, spectrum);
    std::printf("wrote %s\n", out_path.c_str());
  }

  const DoaEstimate est = find_peaks(grid, spectrum, scene.sources());
  std::printf("# peaks:");
  for (double a : est.angles) std::printf(" %.4f", rad_to_deg(a));
  std::printf(" deg\n");
  return kExitOk;
}

int cmd_simulate(const CliState& st, const std::string& csv_path) {
  const ArrayGeometry geometry = st.cfg.geometry();
  const SourceScene scene = st.cfg.scene();
  const MixedAdcConfig adc = st.cfg.adc();

  const GridPointResult point = rmse_point(geometry, scene, adc, st.cfg.quantization_path(),
                                           st.cfg.trials, st.cfg.seed, st.cfg.threads);
  std::printf("trials              : %d (failures %d)\n", point.trials, point.failures);
  std::printf("rmse                : %.6g deg\n", point.rmse_deg);
  std::printf("bias                : %.6g deg\n", point.bias_deg);
  if (scene.sources() == 1) {
    std::printf("sqrt(crlb)          : %.6g deg\n", std::sqrt(point.crlb_deg2));
    std::printf("perf_loss           : %.6g dB\n", point.eta_pl_db);
  }
  if (!csv_path.empty()) {
    RunResult result;
    result.id = ExperimentId::RmseVsCrlb;
    result.table.push_back(point);
    auto os = open_output(csv_path);
    write_rmse_table_csv(*os, result);
    std::printf("wrote %s\n", csv_path.c_str());
  }
  return kExitOk;
}

int cmd_reproduce(const CliState& st, const CLI::App& app, const std::string& figure) {
  ExperimentSpec spec = ExperimentSpec::defaults(experiment_from_string(figure));
  auto given = [&](const std::string& name) { return app.count(name) > 0; };
  if (given("--elements")) spec.elements = st.cfg.elements;
  if (given("--snapshots")) spec.snapshots = st.cfg.snapshots;
  if (given("--spacing")) spec.spacing = st.cfg.spacing_wavelengths;
  if (given("--trials")) spec.trials = st.cfg.trials;
  if (given("--seed")) spec.base_seed = st.cfg.seed;
  if (given("--threads")) spec.threads = st.cfg.threads;
  if (given("--grid-step-deg")) spec.grid_step_deg = st.cfg.grid_step_deg;
  if (given("--gamma-db")) spec.gammas_db = {st.cfg.gamma_db};
  if (given("--theta-deg")) spec.thetas_deg = st.cfg.theta_deg;
  if (given("--kappa")) spec.kappas = {st.cfg.kappa};
  if (given("--path")) spec.path = st.cfg.quantization_path();
  if (given("--high-bits")) spec.power.high_bits = st.cfg.power.high_bits;

  const auto written = reproduce_figure(spec, st.out_dir);
  for (const fs::path& p : written) std::printf("wrote %s\n", p.string().c_str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"doamix: DOA estimation toolkit for mixed-ADC uniform linear arrays"};
  app.require_subcommand(1);
  app.fallthrough();

  CliState st;
  add_config_flags(app, st);

  std::string crlb_csv;
  CLI::App* crlb_cmd = app.add_subcommand("crlb", "print the closed-form bound for one configuration");
  crlb_cmd->add_option("--csv", crlb_csv, "also append the report as a CSV row to this file");

  std::vector<double> pl_kappas;
  std::vector<int> pl_bits;
  std::string pl_out;
  CLI::App* pl_cmd = app.add_subcommand("perf-loss", "sweep the performance-loss factor over kappa x bits");
  pl_cmd->add_option("--kappas", pl_kappas, "kappa grid (default 0, 0.125, ..., 1)");
  pl_cmd->add_option("--bits", pl_bits, "bit depths to sweep (default 1 2 3 4)");
  pl_cmd->add_option("--out", pl_out, "CSV output file (default: stdout)");

  std::vector<int> ee_bits;
  std::string ee_out;
  CLI::App* ee_cmd = app.add_subcommand("energy", "sweep the energy-efficiency factor over bits");
  ee_cmd->add_option("--bits", ee_bits, "bit depths to sweep (default 1..8)");
  ee_cmd->add_option("--out", ee_out, "CSV output file (default: stdout)");

  std::string sp_out;
  CLI::App* sp_cmd = app.add_subcommand("spectrum", "one simulated spatial spectrum as CSV");
  sp_cmd->add_option("--out", sp_out, "CSV output file (default: stdout)");

  std::string sim_csv;
  CLI::App* sim_cmd = app.add_subcommand("simulate", "Monte Carlo RMSE at the configured point");
  sim_cmd->add_option("--csv", sim_csv, "write the summary row as CSV to this file");

  std::string figure;
  CLI::App* rep_cmd = app.add_subcommand("reproduce", "write figure data CSVs and a plot script");
  rep_cmd->add_option("figure", figure, "fig2 | fig3 | fig4 | rmse (long ids accepted)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help / --version
    app.exit(e);
    return kExitConfigError;
  }

  try {
    finalize_config(app, st);
    if (crlb_cmd->parsed()) return cmd_crlb(st, crlb_csv);
    if (pl_cmd->parsed()) return cmd_perf_loss(st, pl_kappas, pl_bits, pl_out);
    if (ee_cmd->parsed()) return cmd_energy(st, ee_bits, ee_out);
    if (sp_cmd->parsed()) return cmd_spectrum(st, sp_out);
    if (sim_cmd->parsed()) return cmd_simulate(st, sim_csv);
    if (rep_cmd->parsed()) return cmd_reproduce(st, app, figure);
    std::fprintf(stderr, "error: config: no subcommand given\n");
    return kExitConfigError;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: config: %s\n", e.what());
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: numeric: %s\n", e.what());
    return kExitNumericError;
  }
}
