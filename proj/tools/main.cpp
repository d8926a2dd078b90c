#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>

#include "neuromod/errors.hpp"
#include "neuromod/report_io.hpp"
#include "neuromod/run_config.hpp"

using namespace neuromod;

namespace {

enum ExitCode { kOk = 0, kOther = 1, kConfig = 2, kDivergence = 3, kDegradation = 4, kIo = 5, kData = 6, kInternal = 7 };

struct Options {
  std::string config;
  std::optional<double> dt, t_end;
  std::optional<std::size_t> record_stride;
  std::optional<std::string> out;
  bool check_dt = false;
  double check_horizon = 2000.0;
};

RunConfig load(const Options& o) {
  auto cfg = parse_config(o.config);
  if (o.dt) cfg.sim().dt = *o.dt;
  if (o.t_end) cfg.sim().t_end = *o.t_end;
  if (o.record_stride) cfg.sim().record_stride = *o.record_stride;
  if (o.out) cfg.output = *o.out;
  cfg.validate();
  return cfg;
}

int run_command(const Options& o) {
  const auto cfg = load(o);
  const auto text = write_config(cfg);
  const std::filesystem::path dir(cfg.output);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError(dir.string() + ": " + ec.message());
  const auto name = run_kind_name(cfg.kind);

  std::fprintf(stderr, "running %s: t = [%g, %g], dt = %g\n", name.c_str(), cfg.sim().t_start, cfg.sim().t_end,
               cfg.sim().dt);
  const auto report = run(cfg);
  std::optional<ConvergenceReport> check;
  if (o.check_dt) {
    std::fprintf(stderr, "step-size check at dt/2\n");
    auto sys = make_system(cfg);
    HalvedStepOptions opts;
    opts.horizon = o.check_horizon;
    if (opts.horizon > 0.0)
      for (const auto& p : report.phases) opts.restarts.push_back(p.t0);
    check = halvedstep_check(*sys, cfg.sim(), opts);
  }
  write_text(dir / (name + ".cfg"), text);
  write_trajectory_csv(report.trajectory, dir / (name + ".csv"));
  write_text(dir / (name + "_metrics.json"), metrics_json(report, text, check ? &*check : nullptr));
  for (const auto& [k, v] : report.metrics) std::printf("%s = %s\n", k.c_str(), format_fixed(v, 9).c_str());
  if (check)
    std::printf("dt_check.max_deviation_away_from_upstrokes = %s\n",
                format_fixed(check->max_deviation_away_from_upstrokes, 9).c_str());
  std::fprintf(stderr, "wrote %s\n", dir.string().c_str());
  return kOk;
}

int fail(const char* kind, const std::exception& e, int code) {
  std::fprintf(stderr, "neuromod: %s: %s\n", kind, e.what());
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Conductance-based neuron simulations with adaptive observers and controllers"};
  app.require_subcommand(1);
  Options o;

  auto* run_cmd = app.add_subcommand("run", "Run the experiment described by a config file");
  run_cmd->add_option("config", o.config, "Config file (YAML)")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("--dt", o.dt, "Override the integration step (ms)");
  run_cmd->add_option("--t-end", o.t_end, "Override the end time (ms)");
  run_cmd->add_option("--record-stride", o.record_stride, "Override the number of steps between samples");
  run_cmd->add_option("--out", o.out, "Output directory (default: the config's output entry)");
  run_cmd->add_flag("--check-dt", o.check_dt, "Also rerun at dt/2 and report the voltage deviation");
  run_cmd->add_option("--check-horizon", o.check_horizon,
                      "Length (ms) of the dt/2 reruns started at each phase onset; 0 reruns the whole run")
      ->check(CLI::NonNegativeNumber);

  std::string print_path;
  auto* print_cmd = app.add_subcommand("print-config", "Print a config file with every default filled in");
  print_cmd->add_option("config", print_path, "Config file (YAML)")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfig;
  }

  try {
    if (*print_cmd) {
      std::cout << write_config(parse_config(print_path));
      return kOk;
    }
    return run_command(o);
  } catch (const ConfigError& e) {
    return fail("ConfigError", e, kConfig);
  } catch (const DivergenceError& e) {
    return fail("DivergenceError", e, kDivergence);
  } catch (const NumericalDegradation& e) {
    return fail("NumericalDegradation", e, kDegradation);
  } catch (const IoError& e) {
    return fail("IoError", e, kIo);
  } catch (const InsufficientData& e) {
    return fail("InsufficientData", e, kData);
  } catch (const ContractViolation& e) {
    return fail("ContractViolation", e, kInternal);
  } catch (const std::exception& e) {
    return fail("error", e, kOther);
  }
}
