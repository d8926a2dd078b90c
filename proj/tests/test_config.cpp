#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <sys/wait.h>

#include "neuromod/errors.hpp"
#include "neuromod/report_io.hpp"
#include "neuromod/run_config.hpp"

using namespace neuromod;
namespace fs = std::filesystem;

namespace {

const fs::path kConfigDir = NEUROMOD_CONFIG_DIR;
const std::string kCli = NEUROMOD_CLI;

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::string config_error(const std::string& text) {
  try {
    parse_config_text(text, "test.cfg");
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

fs::path scratch_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("neuromod_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

int run_cli(const std::string& args) {
  const int status = std::system((kCli + " " + args + " > /dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Config, BundledTrackingIsModuleDefault) {
  const auto cfg = parse_config(kConfigDir / "tracking.cfg");
  RunConfig expected;
  expected.kind = RunKind::Tracking;
  expected.output = "out/tracking";
  EXPECT_EQ(cfg, expected);
  EXPECT_EQ(cfg.tracking.u_r, -2.0);
  EXPECT_EQ(cfg.tracking.kappa, 0.04);
  EXPECT_EQ(cfg.tracking.observer.gamma, 2.0);
  EXPECT_EQ(cfg.tracking.observer.alpha, 0.0008);
  EXPECT_EQ(cfg.tracking.mu_reference, reference_params::kTracking);
}

TEST(Config, BundledRejectionAndNetworkAreModuleDefaults) {
  RunConfig rej;
  rej.kind = RunKind::Rejection;
  rej.output = "out/rejection";
  EXPECT_EQ(parse_config(kConfigDir / "rejection.cfg"), rej);
  RunConfig net;
  net.kind = RunKind::Network;
  net.output = "out/network";
  EXPECT_EQ(parse_config(kConfigDir / "network.cfg"), net);
}

TEST(Config, RoundTripBundled) {
  for (const char* name : {"tracking.cfg", "rejection.cfg", "network.cfg", "hco.cfg"}) {
    const auto cfg = parse_config(kConfigDir / name);
    const auto text = write_config(cfg);
    EXPECT_EQ(parse_config_text(text), cfg) << name;
    EXPECT_EQ(write_config(parse_config_text(text)), text) << name;
  }
}

TEST(Config, RoundTripNonDefaultFields) {
  RunConfig cfg;
  cfg.kind = RunKind::Tracking;
  cfg.tracking.observer.P0 = Eigen::MatrixXd::Identity(3, 3) * 0.3;
  cfg.tracking.observer.P0(0, 1) = cfg.tracking.observer.P0(1, 0) = 0.01;
  cfg.tracking.observer.parametrisation = {"Na", "K", "leak"};
  cfg.tracking.mu_plant[0] = 1.0 / 3.0;
  cfg.tracking.v0_plant = -61.123456789012345;
  cfg.tracking.preset_estimates = true;
  EXPECT_EQ(parse_config_text(write_config(cfg)), cfg);

  RunConfig sim;
  sim.kind = RunKind::Simulate;
  sim.simulate.sim = {100.0, 600.0, 0.01, 7};
  sim.simulate.neurons = {{reference_params::kTracking, PiecewiseInput({{100.0, -2.0}, {300.0, 1e-3}}), -70.0},
                          {reference_params::kNetworkHub, PiecewiseInput({{100.0, 0.0}}), -60.0}};
  sim.simulate.synapses = {{0, 1, 0.25}};
  sim.simulate.gaps = {{1, 0, 0.004}};
  EXPECT_EQ(parse_config_text(write_config(sim)), sim);
}

TEST(Config, EmptyOverridesGiveModuleDefaults) {
  RunConfig expected;
  EXPECT_EQ(parse_config_text("experiment: tracking\n"), expected);
  expected.kind = RunKind::Network;
  EXPECT_EQ(parse_config_text("experiment: network\n"), expected);
}

TEST(Config, UnknownKeysFailWithLocation) {
  const auto msg = config_error("experiment: tracking\nsim:\n  t_end: 100\n  dtt: 0.01\n");
  EXPECT_NE(msg.find("test.cfg:4:"), std::string::npos) << msg;
  EXPECT_NE(msg.find("sim.dtt"), std::string::npos) << msg;
  EXPECT_NE(config_error("experiment: tracking\nkappa: 1\n").find("unknown key"), std::string::npos);
  // keys of another experiment are rejected too
  EXPECT_FALSE(config_error("experiment: tracking\nphases: {t_disturb: 1}\n").empty());
  EXPECT_FALSE(config_error("experiment: rejection\nobserver: {parametrisation: [Na]}\n").empty());
}

TEST(Config, NegativeConductanceNamesField) {
  const auto msg = config_error(
      "experiment: tracking\ntracking:\n  mu_reference: {Na: -1, H: 0.1, T: 2, A: 0, K: 80, L: 0.4, KCa: 2, KIR: 0, "
      "leak: 0.1}\n");
  EXPECT_NE(msg.find("mu_Na"), std::string::npos) << msg;
  EXPECT_NE(msg.find("tracking.mu_reference.Na"), std::string::npos) << msg;
  EXPECT_NE(msg.find("test.cfg:3:"), std::string::npos) << msg;
}

TEST(Config, TypeAndValueErrors) {
  EXPECT_NE(config_error("experiment: tracking\nsim: {dt: abc}\n").find("expected a finite number"), std::string::npos);
  EXPECT_NE(config_error("experiment: tracking\nsim: {record_stride: 2.5}\n").find("integer"), std::string::npos);
  EXPECT_NE(config_error("experiment: tracking\nrecord_internal: yes\n").find("true or false"), std::string::npos);
  EXPECT_NE(config_error("experiment: dance\n").find("unknown experiment"), std::string::npos);
  EXPECT_NE(config_error("sim: {dt: 1}\n").find("experiment"), std::string::npos);
  EXPECT_NE(config_error("experiment: tracking\nsim: {dt: -1}\n").find("dt"), std::string::npos);
  EXPECT_FALSE(config_error("experiment: tracking\ntracking: {mu_plant: {Na: 1}}\n").empty());  // incomplete map
  EXPECT_FALSE(config_error("experiment: rejection\nphases: {t_disturb: 9000, t_control: 8000}\n").empty());
  EXPECT_FALSE(config_error("experiment: rejection\nrejection: {u_pre: [[0, 1], [0, 2]]}\n").empty());
  EXPECT_FALSE(config_error("experiment: network\nnetwork: {v0: [1, 2]}\n").empty());
  EXPECT_NE(config_error("experiment: network\nnetwork: {gap_topology: ring}\n").find("hub or within_hco"), std::string::npos);
  EXPECT_FALSE(config_error("experiment: simulate\nneurons: [{v0: -60}]\nsynapses: [{pre: 1, post: 1, mu: 1}]\n").empty());
  EXPECT_FALSE(config_error("experiment: simulate\nneurons: [{v0: -60}]\nsynapses: [{pre: 1, post: 3, mu: 1}]\n").empty());
  EXPECT_FALSE(config_error("experiment: simulate\nneurons: []\n").empty());
  EXPECT_NE(config_error("experiment: simulate\nneurons: [{input: [[-5, 1]]}]\n").find("sim.t_start"), std::string::npos);
}

TEST(Config, ParseErrorHasLine) {
  const auto msg = config_error("experiment: tracking\nsim: {dt: [1, 2\n");
  EXPECT_NE(msg.find("parse error"), std::string::npos) << msg;
  EXPECT_NE(msg.find("test.cfg:"), std::string::npos) << msg;
  EXPECT_THROW(parse_config("/nonexistent/file.cfg"), ConfigError);
}

TEST(Config, ScalarInputIsConstantFromStart) {
  const auto cfg = parse_config_text("experiment: simulate\nsim: {t_start: 50, t_end: 60}\nneurons: [{input: -2}]\n");
  ASSERT_EQ(cfg.simulate.neurons.size(), 1u);
  EXPECT_EQ(cfg.simulate.neurons[0].input, PiecewiseInput({{50.0, -2.0}}));
  EXPECT_EQ(cfg.simulate.neurons[0].mu, ConductanceVector{});
}

TEST(ReportIo, FixedFormatting) {
  EXPECT_EQ(format_fixed(1.5, 3), "1.500");
  EXPECT_EQ(format_fixed(-65.0), "-65.000000000");
  EXPECT_EQ(format_fixed(-1e-12), "0.000000000");
  EXPECT_EQ(format_fixed(-0.0, 2), "0.00");
  EXPECT_EQ(format_fixed(1e-12, 2), "0.00");
  EXPECT_EQ(format_fixed(std::nan(""), 2), "nan");
}

TEST(ReportIo, ZeroLengthTrajectoryCsv) {
  RunConfig cfg = parse_config(kConfigDir / "hco.cfg");
  cfg.simulate.sim.t_end = 0.0;
  const auto rep = run(cfg);
  const auto dir = scratch_dir("zero");
  write_trajectory_csv(rep.trajectory, dir / "t.csv");
  const auto text = read_file(dir / "t.csv");
  EXPECT_EQ(text, "time,v_1,v_2\n0.000000000,-65.000000000,-65.000000000\n");
}

TEST(ReportIo, MetricsJsonFields) {
  ExperimentReport rep;
  rep.experiment = "tracking";
  rep.phases = {{"open_loop", -10.0, 0.0}, {"controlled", 0.0, 10.0}};
  rep.metrics = {{"controlled.trailing_rms_error", 0.25}, {"theta_effective_relative_error", 1e-3},
                 {"undefined", std::nan("")}};
  rep.vectors = {{"theta_hat", {1.0, 2.0}}};
  rep.assumptions = {{"dt", "0.005"}};
  ConvergenceReport check{0.005, 0.1, 0.01, 10, 2};
  const auto j = nlohmann::json::parse(metrics_json(rep, "experiment: tracking\n", &check));
  EXPECT_EQ(j["experiment"], "tracking");
  EXPECT_EQ(j["metrics"]["controlled.trailing_rms_error"], 0.25);
  EXPECT_TRUE(j["metrics"]["undefined"].is_null());
  EXPECT_EQ(j["phases"][1]["name"], "controlled");
  EXPECT_EQ(j["assumptions"]["dt"], "0.005");
  EXPECT_EQ(j["config"], "experiment: tracking\n");
  EXPECT_EQ(j["dt_check"]["max_deviation_away_from_upstrokes"], 0.01);
  EXPECT_EQ(j["vectors"]["theta_hat"][1], 2.0);
}

TEST(Cli, RunWritesDeterministicOutputs) {
  const auto a = scratch_dir("cli_a");
  const auto cmd = "run " + (kConfigDir / "hco.cfg").string() + " --t-end 1500 --out " + a.string();
  const std::vector<std::string> files = {"simulate.csv", "simulate_metrics.json", "simulate.cfg"};
  ASSERT_EQ(run_cli(cmd), 0);
  std::vector<std::string> first;
  for (const auto& f : files) {
    ASSERT_TRUE(fs::exists(a / f)) << f;
    first.push_back(read_file(a / f));
  }
  ASSERT_EQ(run_cli(cmd), 0);
  for (std::size_t k = 0; k < files.size(); ++k) EXPECT_EQ(read_file(a / files[k]), first[k]) << files[k];
  const auto csv = read_file(a / "simulate.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "time,v_1,v_2");
  // 1500 ms, 100 steps of 0.005 per sample: 3001 rows plus header
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 3002);
  // the echoed config reproduces the run
  EXPECT_EQ(parse_config(a / "simulate.cfg").simulate.sim.t_end, 1500.0);
}

TEST(Cli, CheckDtReportsDeviation) {
  const auto dir = scratch_dir("cli_check");
  ASSERT_EQ(run_cli("run " + (kConfigDir / "hco.cfg").string() + " --t-end 800 --check-dt --out " + dir.string()), 0);
  const auto j = nlohmann::json::parse(read_file(dir / "simulate_metrics.json"));
  EXPECT_LT(j["dt_check"]["max_deviation_away_from_upstrokes"].get<double>(), 0.5);
  EXPECT_EQ(j["dt_check"]["dt"].get<double>(), 0.005);
}

TEST(Cli, ExitCodes) {
  const auto dir = scratch_dir("cli_err");
  std::ofstream(dir / "bad.cfg") << "experiment: tracking\nsim: {dtt: 1}\n";
  EXPECT_EQ(run_cli("run " + (dir / "bad.cfg").string()), 2);
  EXPECT_EQ(run_cli("run " + (kConfigDir / "hco.cfg").string() + " --dt 0.003 --out " + dir.string()), 2);  // off-grid
  EXPECT_EQ(run_cli("run " + (kConfigDir / "hco.cfg").string() + " --dt 0.05 --t-end 1000 --out " + dir.string()), 3);
  EXPECT_EQ(run_cli("run"), 2);
  EXPECT_EQ(run_cli("--help"), 0);
  EXPECT_EQ(run_cli("print-config " + (kConfigDir / "network.cfg").string()), 0);
}
