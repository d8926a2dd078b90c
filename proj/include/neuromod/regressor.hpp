#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "neuromod/model.hpp"

namespace neuromod {

enum class ConductanceKind { Channel, Synapse, Gap, Leak };

// One maximal conductance of the network, seen from the neuron whose voltage
// equation it enters. `index` is the channel index within the neuron, or the
// synapse / gap-junction index within the NetworkSpec; unused for Leak.
struct ConductanceRef {
  std::size_t neuron = 0;
  ConductanceKind kind = ConductanceKind::Leak;
  std::size_t index = 0;

  bool operator==(const ConductanceRef&) const = default;
};

using Parametrisation = std::vector<ConductanceRef>;

// Neuron-local identifier: "Na", ..., "KIR", "leak", "syn:<pre>", "gap:<other>"
// (neuron numbers 1-based).
std::string conductance_id(const NetworkModel& model, const ConductanceRef& ref);
// ConfigError when the neuron has no such conductance.
ConductanceRef parse_conductance_id(const NetworkModel& model, std::size_t neuron, std::string_view id);

// Decentralised default: every channel in declaration order, then each
// incoming synapse by presynaptic index, then leak.
Parametrisation neuron_parametrisation(const NetworkModel& model, std::size_t neuron);
Parametrisation neuron_parametrisation(const NetworkModel& model, std::size_t neuron,
                                       std::span<const std::string> ids);
// Block-diagonal network parametrisation: per-neuron defaults concatenated.
Parametrisation network_parametrisation(const NetworkModel& model);

std::vector<double> true_parameters(const NetworkModel& model, const Parametrisation& params);

// Linear-in-parameters form of one neuron's voltage equation:
//   dv_i/dt = phi(v, w_i) . theta + b(v, w_i, u_i)
// Each phi entry is -(gating)(v_i - E)/c_i for an estimated conductance; b
// carries u_i/c_i minus every non-estimated current over c_i.
class NeuronRegressor {
 public:
  NeuronRegressor(std::shared_ptr<const NetworkModel> model, std::size_t neuron, Parametrisation params);

  std::size_t neuron() const { return neuron_; }
  std::size_t n_theta() const { return params_.size(); }
  const Parametrisation& parametrisation() const { return params_; }
  const NetworkModel& model() const { return *model_; }

  // Fills phi (size n_theta) and returns b.
  double evaluate(std::span<const double> v, std::span<const double> w_i, double u_i,
                  std::span<double> phi) const;

 private:
  std::shared_ptr<const NetworkModel> model_;
  std::size_t neuron_;
  Parametrisation params_;
  // column of each channel / incoming synapse / gap junction, npos if known
  std::vector<std::size_t> channel_col_;
  std::vector<std::size_t> synapse_col_;
  std::vector<std::size_t> gap_col_;
  std::size_t leak_col_ = NetworkModel::npos;
};

struct Regressor {
  Eigen::MatrixXd phi;  // n_v x n_theta
  Eigen::VectorXd b;    // n_v
};

// Network regressor for a parametrisation whose entries may span several
// neurons; the result is block-diagonal when entries are grouped by neuron.
Regressor regressor(const NetworkModel& model, const Parametrisation& params, std::span<const double> v,
                    std::span<const double> w, std::span<const double> u);

}  // namespace neuromod
