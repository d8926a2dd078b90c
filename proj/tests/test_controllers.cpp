#include <gtest/gtest.h>

#include <cmath>
#include <memory>
#include <random>

#include "neuromod/channel_library.hpp"
#include "neuromod/controllers.hpp"
#include "neuromod/errors.hpp"
#include "neuromod/regressor.hpp"

using namespace neuromod;

namespace {

std::vector<double> random_gates(const NetworkModel& m, std::mt19937& rng) {
  std::uniform_real_distribution<double> gate(0.01, 0.99), ca(0.0, 200.0);
  std::vector<double> w(m.n_w());
  for (auto& x : w) x = gate(rng);
  if (auto c = m.layout(0).calcium) w[m.layout(0).offset + *c] = ca(rng);
  return w;
}

}  // namespace

TEST(Saturations, Examples) {
  EXPECT_EQ(rectify(-3.0), 0.0);
  EXPECT_EQ(rectify(0.0), 0.0);
  EXPECT_EQ(rectify(2.5), 2.5);
  EXPECT_EQ(saturate(150.0, 100.0), 100.0);
  EXPECT_EQ(saturate(-4.0, 100.0), -4.0);
  EXPECT_EQ(saturate(100.0, 100.0), 100.0);
  Eigen::VectorXd x(4);
  x << -1.0, 0.5, 120.0, 99.0;
  EXPECT_EQ(rectify(x), (Eigen::VectorXd(4) << 0.0, 0.5, 120.0, 99.0).finished());
  EXPECT_EQ(saturate(x, 100.0), (Eigen::VectorXd(4) << -1.0, 0.5, 100.0, 99.0).finished());
}

TEST(Saturations, OffsetRange) {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> d(-500.0, 500.0);
  const double beta = 150.0;
  for (int k = 0; k < 1000; ++k) {
    const std::vector<double> r = {d(rng), d(rng), d(rng)}, h = {d(rng), d(rng), d(rng)};
    std::vector<double> out(3);
    tracking_offsets(r, h, beta, out);
    for (int j = 0; j < 3; ++j) {
      EXPECT_GE(out[j], -beta);
      EXPECT_LE(saturate(h[j], beta), beta);
      EXPECT_EQ(out[j], rectify(r[j]) - saturate(h[j], beta));
    }
  }
}

TEST(ControlConfig, Validation) {
  ControlConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.beta = 0.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.kappa = -0.1;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  EXPECT_DOUBLE_EQ(cfg.activation(2.0), 0.5);
  EXPECT_DOUBLE_EQ(cfg.activation(7.0), 1.0 / (1.0 + std::exp(-1.0)));
}

TEST(TrackingControl, CancelsWhenEstimatesAgree) {
  const std::vector<double> phi = {0.3, -1.2, 4.0};
  const std::vector<double> theta = {1.0, 2.0, 3.0};
  EXPECT_EQ(tracking_control(phi, theta, theta, 0.1, 0.0, -50.0, -60.0, 0.0, 150.0), 0.0);
  EXPECT_DOUBLE_EQ(tracking_control(phi, theta, theta, 0.1, 0.0, -50.0, -60.0, -2.0, 150.0), -2.0);
}

TEST(TrackingControl, GapFeedback) {
  const std::vector<double> phi = {0.3}, theta = {1.0};
  EXPECT_DOUBLE_EQ(tracking_control(phi, theta, theta, 0.1, 0.04, -50.0, -60.0, 0.0, 150.0), 0.4);
}

TEST(TrackingControl, InjectsConductanceDifference) {
  const std::vector<double> phi = {2.0, -1.0};
  const std::vector<double> r = {5.0, -3.0}, h = {1.0, 200.0};
  // offsets: (5 - 1, 0 - 150)
  EXPECT_DOUBLE_EQ(tracking_control(phi, r, h, 0.1, 0.0, 0.0, 0.0, 0.0, 150.0), 0.1 * (2.0 * 4.0 + 150.0));
}

TEST(TrackingControl, ControlledVectorFieldEqualsReference) {
  // kappa = 0, plant observer converged to the plant (theta = 0), reference
  // observer converged to mu_r.
  const auto mu_r = reference_params::kTracking;
  auto reference = std::make_shared<NetworkModel>(NetworkSpec{{build_bursting_neuron(mu_r)}, {}, {}});
  auto plant = std::make_shared<NetworkModel>(NetworkSpec{{build_bursting_neuron({})}, {}, {}});
  const NeuronRegressor reg(plant, 0, neuron_parametrisation(*plant, 0));
  const std::vector<double> theta_r(mu_r.begin(), mu_r.end()), theta_hat(mu_r.size(), 0.0);
  std::mt19937 rng(17);
  std::uniform_real_distribution<double> volt(-100.0, 40.0), input(-5.0, 5.0);
  std::vector<double> phi(reg.n_theta());
  for (int k = 0; k < 500; ++k) {
    const std::vector<double> v = {volt(rng)};
    const auto w = random_gates(*plant, rng);
    const double u_r = input(rng);
    reg.evaluate(v, w, 0.0, phi);
    const double u = tracking_control(phi, theta_r, theta_hat, 0.1, 0.0, v[0], v[0], u_r, 150.0);
    const double plant_dv = plant->neuron_voltage_derivative(0, v, w, u);
    const double ref_dv = reference->neuron_voltage_derivative(0, v, w, u_r);
    EXPECT_NEAR(plant_dv, ref_dv, 1e-10 * std::max(1.0, std::abs(ref_dv)));
  }
}

TEST(RejectionControl, ZeroAtReversal) {
  const ControlConfig cfg;
  EXPECT_EQ(rejection_control(3.0, 0.4, cfg.e_syn, -20.0, cfg).current, 0.0);
  EXPECT_EQ(synaptic_disturbance(3.0, 0.4, cfg.e_syn, cfg.e_syn), 0.0);
}

TEST(RejectionControl, CancelsExactly) {
  const ControlConfig cfg;
  std::mt19937 rng(23);
  std::uniform_real_distribution<double> mu(0.0, cfg.beta), s(0.0, 1.0), v(-120.0, 60.0);
  for (int k = 0; k < 10000; ++k) {
    const double m = mu(rng), g = s(rng), x = v(rng);
    const double i_d = synaptic_disturbance(m, g, x, cfg.e_syn);
    EXPECT_EQ(rejection_control(m, g, x, 0.0, cfg).current + i_d, 0.0);
  }
}

TEST(RejectionControl, SaturatesConductance) {
  const ControlConfig cfg;  // beta = 100
  EXPECT_DOUBLE_EQ(estimated_disturbance(150.0, 0.5, -40.0, cfg), -100.0 * 0.5 * 50.0);
  EXPECT_DOUBLE_EQ(rejection_control(150.0, 0.5, -40.0, 0.0, cfg).current, 100.0 * 0.5 * 50.0);
}

TEST(RejectionControl, GateEstimateDynamics) {
  const ControlConfig cfg;
  const auto out = rejection_control(1.0, 0.25, -60.0, 2.0, cfg);
  EXPECT_DOUBLE_EQ(out.ds_hat, 0.53 * 0.5 * 0.75 - 0.18 * 0.25);
  // fixed point a1 sigma / (a1 sigma + a2)
  const double sig = cfg.activation(30.0);
  EXPECT_NEAR(rejection_control(1.0, 0.53 * sig / (0.53 * sig + 0.18), -60.0, 30.0, cfg).ds_hat, 0.0, 1e-15);
}
