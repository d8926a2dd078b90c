#include "neuromod/plant.hpp"

#include <algorithm>

#include "neuromod/errors.hpp"

namespace neuromod {

std::vector<double> resting_state(const NetworkModel& model, std::span<const double> v0) {
  std::vector<double> x(v0.begin(), v0.end());
  const auto w = model.steady_state(v0);
  x.insert(x.end(), w.begin(), w.end());
  return x;
}

NetworkSystem::NetworkSystem(std::shared_ptr<const NetworkModel> model, std::vector<PiecewiseInput> inputs,
                             std::vector<double> v0, bool record_internal)
    : model_(std::move(model)),
      inputs_(std::move(inputs)),
      v0_(std::move(v0)),
      record_internal_(record_internal),
      u_(model_->n_v(), 0.0) {
  if (inputs_.size() != model_->n_v() || v0_.size() != model_->n_v()) {
    throw ConfigError("NetworkSystem: need one input and one initial voltage per neuron");
  }
}

std::vector<double> NetworkSystem::initial_state() const { return resting_state(*model_, v0_); }

void NetworkSystem::prepare(const SimConfig& cfg) {
  for (auto& in : inputs_) in.bind(cfg);
}

void NetworkSystem::begin_step(const StepInfo& info) {
  for (std::size_t i = 0; i < inputs_.size(); ++i) u_[i] = inputs_[i].value_at_step(info.step);
}

void NetworkSystem::derivative(double /*t*/, std::span<const double> x, std::span<double> dx) {
  const std::size_t nv = model_->n_v();
  const auto v = x.first(nv);
  const auto w = x.subspan(nv);
  model_->voltage_derivative(v, w, u_, dx.first(nv));
  model_->internal_derivative(v, w, dx.subspan(nv));
}

std::vector<std::string> NetworkSystem::signal_names() const {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < model_->n_v(); ++i) names.push_back("v_" + std::to_string(i + 1));
  if (record_internal_) {
    const auto w = model_->internal_state_names();
    names.insert(names.end(), w.begin(), w.end());
  }
  return names;
}

void NetworkSystem::record(const StepInfo& /*info*/, std::span<const double> x, std::span<double> row) {
  const std::size_t n = record_internal_ ? x.size() : model_->n_v();
  std::copy_n(x.begin(), n, row.begin());
}

}  // namespace neuromod
