#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "neuromod/model.hpp"
#include "neuromod/regressor.hpp"

namespace neuromod {

// What the adaptive observer needs to know about the plant: a regressor
// evaluated at measured voltages and estimated internal states, and the
// internal dynamics driven by the measured voltages.
class RegressionModel {
 public:
  virtual ~RegressionModel() = default;

  virtual std::size_t n_measured() const = 0;  // length of the measured voltage vector
  virtual std::size_t n_inputs() const = 0;    // length of the input vector
  virtual std::size_t n_v() const = 0;         // estimated voltages
  virtual std::size_t n_w() const = 0;
  virtual std::size_t n_theta() const = 0;

  // Index into the measured vector of each estimated voltage.
  virtual std::size_t output_index(std::size_t k) const = 0;

  // phi is row-major n_v x n_theta.
  virtual void regressor(std::span<const double> v_meas, std::span<const double> w_hat, std::span<const double> u,
                         std::span<double> phi, std::span<double> b) = 0;
  virtual void internal_derivative(std::span<const double> v_meas, std::span<const double> w_hat,
                                   std::span<double> dw) = 0;
  virtual std::vector<double> initial_internal_state(std::span<const double> v_meas) const = 0;

  virtual std::vector<std::string> parameter_names() const;
  virtual std::vector<std::string> internal_state_names() const;
};

struct ObserverConfig {
  double gamma = 2.0;
  double alpha = 0.0008;
  // Initial covariance; empty means identity scaled by p0.
  Eigen::MatrixXd P0;
  double p0 = 1.0;
  // Estimated conductance identifiers (see conductance_id); empty means the
  // full decentralised parametrisation.
  std::vector<std::string> parametrisation;

  // ConfigError unless gamma > 0, alpha > 0 and P0 symmetric positive definite.
  void validate(std::size_t n_theta) const;
  Eigen::MatrixXd initial_covariance(std::size_t n_theta) const;

  bool operator==(const ObserverConfig& o) const {
    return gamma == o.gamma && alpha == o.alpha && p0 == o.p0 && parametrisation == o.parametrisation &&
           P0.rows() == o.P0.rows() && P0.cols() == o.P0.cols() && P0 == o.P0;
  }
};

// Observer state packed into one vector: [v_hat | w_hat | theta_hat | Psi (row-major) | P (column-major)].
struct ObserverLayout {
  std::size_t n_v = 0, n_w = 0, n_theta = 0;

  std::size_t v_hat() const { return 0; }
  std::size_t w_hat() const { return n_v; }
  std::size_t theta() const { return n_v + n_w; }
  std::size_t psi() const { return theta() + n_theta; }
  std::size_t p() const { return psi() + n_v * n_theta; }
  std::size_t size() const { return p() + n_theta * n_theta; }
};

using RowMajorMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct ObserverStateView {
  Eigen::Map<const Eigen::VectorXd> v_hat;
  Eigen::Map<const Eigen::VectorXd> w_hat;
  Eigen::Map<const Eigen::VectorXd> theta;
  Eigen::Map<const RowMajorMatrix> psi;
  Eigen::Map<const Eigen::MatrixXd> p;
};

ObserverStateView view_observer_state(const ObserverLayout& layout, std::span<const double> state);

// Adaptive observer with recursive least squares and exponential forgetting:
//   dv_hat  = Phi theta_hat + b + gamma (I + Psi P Psi^T)(v - v_hat)
//   dw_hat  = g(v, w_hat)
//   dtheta  = gamma P Psi^T (v - v_hat)
//   dPsi    = -gamma Psi + Phi
//   dP      = alpha P - P Psi^T Psi P
// Phi and b are evaluated at the measured voltage and the estimated internal state.
class AdaptiveObserver {
 public:
  AdaptiveObserver(std::shared_ptr<RegressionModel> model, ObserverConfig cfg);

  const ObserverLayout& layout() const { return layout_; }
  std::size_t state_size() const { return layout_.size(); }
  const ObserverConfig& config() const { return cfg_; }
  RegressionModel& model() { return *model_; }
  const RegressionModel& model() const { return *model_; }

  // v_hat = measured outputs, w_hat from the model, theta_hat = theta0 (zero
  // when empty), Psi = 0, P = P0.
  std::vector<double> initial_state(std::span<const double> v_meas, std::span<const double> theta0 = {}) const;

  // `gain` scales the whole derivative; 0 freezes the observer.
  void derivative(std::span<const double> state, std::span<const double> v_meas, std::span<const double> u,
                  std::span<double> dstate, double gain = 1.0);

  // P <- (P + P^T) / 2.
  void symmetrize(std::span<double> state) const;
  // NumericalDegradation if any entry is non-finite, P is asymmetric beyond
  // 1e-10, or P is not positive definite.
  void check(std::span<const double> state) const;

  ObserverStateView view(std::span<const double> state) const { return view_observer_state(layout_, state); }
  std::span<const double> theta(std::span<const double> state) const {
    return state.subspan(layout_.theta(), layout_.n_theta);
  }
  std::span<const double> w_hat(std::span<const double> state) const {
    return state.subspan(layout_.w_hat(), layout_.n_w);
  }

 private:
  std::shared_ptr<RegressionModel> model_;
  ObserverConfig cfg_;
  ObserverLayout layout_;
  Eigen::MatrixXd p0_;
  // scratch
  RowMajorMatrix phi_;
  Eigen::VectorXd b_, err_;
  Eigen::MatrixXd p_psi_t_;
};

// Free-function form of the observer vector field.
void observer_derivative(const ObserverConfig& cfg, const ObserverLayout& layout, std::span<const double> state,
                         std::span<const double> v_meas, std::span<const double> u, RegressionModel& model,
                         std::span<double> dstate);

// Regression model over a subset of a network's neurons. The measured vector
// and input vector cover the whole network; w_hat holds the internal blocks
// of the observed neurons only.
class NetworkRegressionModel : public RegressionModel {
 public:
  NetworkRegressionModel(std::shared_ptr<const NetworkModel> model, std::vector<std::size_t> observed,
                         Parametrisation params);

  std::size_t n_measured() const override { return model_->n_v(); }
  std::size_t n_inputs() const override { return model_->n_v(); }
  std::size_t n_v() const override { return observed_.size(); }
  std::size_t n_w() const override { return n_w_; }
  std::size_t n_theta() const override { return params_.size(); }
  std::size_t output_index(std::size_t k) const override { return observed_[k]; }

  void regressor(std::span<const double> v_meas, std::span<const double> w_hat, std::span<const double> u,
                 std::span<double> phi, std::span<double> b) override;
  void internal_derivative(std::span<const double> v_meas, std::span<const double> w_hat,
                           std::span<double> dw) override;
  std::vector<double> initial_internal_state(std::span<const double> v_meas) const override;
  std::vector<std::string> parameter_names() const override;
  std::vector<std::string> internal_state_names() const override;

  const Parametrisation& parametrisation() const { return params_; }
  const NetworkModel& network() const { return *model_; }
  const std::vector<std::size_t>& observed() const { return observed_; }
  // Offset of an observed neuron's block inside w_hat.
  std::size_t block_offset(std::size_t k) const { return offsets_[k]; }

 private:
  std::shared_ptr<const NetworkModel> model_;
  std::vector<std::size_t> observed_;
  Parametrisation params_;
  std::vector<NeuronRegressor> regressors_;
  std::vector<std::vector<std::size_t>> columns_;
  std::vector<std::size_t> offsets_;
  std::size_t n_w_ = 0;
  std::vector<double> row_;
};

// Decentralised observer of one neuron: its own voltage and internal block,
// with the conductances listed in cfg.parametrisation (default: all).
AdaptiveObserver make_neuron_observer(std::shared_ptr<const NetworkModel> model, std::size_t neuron,
                                      const ObserverConfig& cfg);

// One observer over all neurons with the block-diagonal parametrisation.
AdaptiveObserver make_network_observer(std::shared_ptr<const NetworkModel> model, const ObserverConfig& cfg);

// Scalar observer of the maximal conductance of synapse pre -> post. `model`
// must contain that synapse; every other conductance of `post` is treated as
// known. cfg.parametrisation is ignored.
AdaptiveObserver make_synapse_observer(std::shared_ptr<const NetworkModel> model, std::size_t pre, std::size_t post,
                                       const ObserverConfig& cfg);

}  // namespace neuromod
