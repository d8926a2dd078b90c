#include "neuromod/controllers.hpp"

#include <cmath>

#include "neuromod/errors.hpp"
#include "neuromod/rate_functions.hpp"

namespace neuromod {

void ControlConfig::validate() const {
  if (!(beta > 0.0) || !std::isfinite(beta)) throw ConfigError("control.beta must be > 0");
  if (!(kappa >= 0.0) || !std::isfinite(kappa)) throw ConfigError("control.kappa must be >= 0");
  if (!(a1 > 0.0) || !(a2 > 0.0)) throw ConfigError("control synapse rates a1, a2 must be > 0");
  if (!(activation_slope > 0.0)) throw ConfigError("control synapse activation slope must be > 0");
}

double ControlConfig::activation(double v_pre) const { return sigmoid(v_pre, activation_offset, activation_slope); }

Eigen::VectorXd rectify(const Eigen::VectorXd& x) { return x.cwiseMax(0.0); }

Eigen::VectorXd saturate(const Eigen::VectorXd& x, double beta) { return x.cwiseMin(beta); }

void tracking_offsets(std::span<const double> theta_r, std::span<const double> theta_hat, double beta,
                      std::span<double> out) {
  if (theta_r.size() != theta_hat.size() || out.size() != theta_r.size())
    throw ContractViolation("tracking law: parameter vectors differ in length");
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = rectify(theta_r[j]) - saturate(theta_hat[j], beta);
}

double tracking_control(std::span<const double> phi, std::span<const double> theta_r,
                        std::span<const double> theta_hat, double capacitance, double kappa, double v_r, double v,
                        double u_r, double beta) {
  if (phi.size() != theta_r.size() || phi.size() != theta_hat.size())
    throw ContractViolation("tracking law: regressor and parameter vectors differ in length");
  double adapt = 0.0;
  for (std::size_t j = 0; j < phi.size(); ++j) adapt += phi[j] * (rectify(theta_r[j]) - saturate(theta_hat[j], beta));
  return capacitance * adapt + kappa * (v_r - v) + u_r;
}

double synaptic_disturbance(double mu, double s, double v, double e_syn) { return -(mu * s) * (v - e_syn); }

double estimated_disturbance(double mu_hat, double s_hat, double v, const ControlConfig& cfg) {
  return synaptic_disturbance(saturate(mu_hat, cfg.beta), s_hat, v, cfg.e_syn);
}

RejectionOutput rejection_control(double mu_hat, double s_hat, double v, double v_d, const ControlConfig& cfg) {
  RejectionOutput out;
  out.current = -estimated_disturbance(mu_hat, s_hat, v, cfg);
  out.ds_hat = cfg.a1 * cfg.activation(v_d) * (1.0 - s_hat) - cfg.a2 * s_hat;
  return out;
}

}  // namespace neuromod
