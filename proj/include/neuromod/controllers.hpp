#pragma once

#include <Eigen/Dense>
#include <span>

namespace neuromod {

struct ControlConfig {
  double beta = 100.0;
  double kappa = 0.0;
  // synaptic disturbance model (rejection only)
  double e_syn = -90.0;
  double a1 = 0.53;
  double a2 = 0.18;
  double activation_offset = 2.0;
  double activation_slope = 5.0;

  // ConfigError unless beta > 0 and kappa >= 0.
  void validate() const;
  double activation(double v_pre) const;

  bool operator==(const ControlConfig&) const = default;
};

// max(0, x)
inline double rectify(double x) { return x > 0.0 ? x : 0.0; }
// min(x, beta)
inline double saturate(double x, double beta) { return x < beta ? x : beta; }

Eigen::VectorXd rectify(const Eigen::VectorXd& x);
Eigen::VectorXd saturate(const Eigen::VectorXd& x, double beta);

// Offset added to the plant's conductances by the tracking law:
// rectify(theta_r) - saturate(theta_hat, beta).
void tracking_offsets(std::span<const double> theta_r, std::span<const double> theta_hat, double beta,
                      std::span<double> out);

// Reference-tracking law for one neuron:
//   u = c * phi . (rectify(theta_r) - saturate(theta_hat)) + kappa (v_r - v) + u_r
// phi is the regressor row at the plant's measured voltage and observer state,
// scaled by 1/c as in the voltage equation, so the factor c turns it back into
// a current.
double tracking_control(std::span<const double> phi, std::span<const double> theta_r,
                        std::span<const double> theta_hat, double capacitance, double kappa, double v_r, double v,
                        double u_r, double beta);

struct RejectionOutput {
  double current = 0.0;  // I_control = -I_d_hat
  double ds_hat = 0.0;
};

// Estimated disturbance I_d_hat = -saturate(mu_hat) * s_hat * (v - E_syn).
double estimated_disturbance(double mu_hat, double s_hat, double v, const ControlConfig& cfg);
// Disturbance injected by a synapse of conductance mu and gate s.
double synaptic_disturbance(double mu, double s, double v, double e_syn);

// Cancelling current plus the synaptic gate estimate's derivative,
// ds_hat = a1 sigma(v_d) (1 - s_hat) - a2 s_hat.
RejectionOutput rejection_control(double mu_hat, double s_hat, double v, double v_d, const ControlConfig& cfg);

}  // namespace neuromod
