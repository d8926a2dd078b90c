#include "neuromod/errors.hpp"
#include "neuromod/experiments.hpp"
#include "neuromod/plant.hpp"

namespace neuromod {

ObservedNetworkSystem::ObservedNetworkSystem(std::shared_ptr<const NetworkModel> plant,
                                             std::vector<PiecewiseInput> inputs, std::vector<double> v0,
                                             std::vector<AdaptiveObserver> observers,
                                             std::vector<std::vector<double>> theta0)
    : plant_(std::move(plant)),
      inputs_(std::move(inputs)),
      v0_(std::move(v0)),
      observers_(std::move(observers)),
      theta0_(std::move(theta0)) {
  const std::size_t n = plant_->n_v();
  if (inputs_.size() != n || v0_.size() != n) throw ConfigError("need one input and one v0 per neuron");
  if (!theta0_.empty() && theta0_.size() != observers_.size())
    throw ContractViolation("need one initial estimate per observer");
  dim_ = n + plant_->n_w();
  for (const auto& o : observers_) {
    if (o.model().n_measured() != n || o.model().n_inputs() != n)
      throw ContractViolation("observer does not match the plant's measurement vector");
    offsets_.push_back(dim_);
    dim_ += o.state_size();
  }
  u_.resize(n);
}

std::vector<double> ObservedNetworkSystem::initial_state() const {
  auto x = resting_state(*plant_, v0_);
  for (std::size_t k = 0; k < observers_.size(); ++k) {
    const auto s = observers_[k].initial_state(v0_, theta0_.empty() ? std::span<const double>{}
                                                                    : std::span<const double>(theta0_[k]));
    x.insert(x.end(), s.begin(), s.end());
  }
  return x;
}

void ObservedNetworkSystem::prepare(const SimConfig& cfg) {
  for (auto& in : inputs_) in.bind(cfg);
}

void ObservedNetworkSystem::begin_step(const StepInfo& info) {
  for (std::size_t i = 0; i < u_.size(); ++i) u_[i] = inputs_[i].value_at_step(info.step);
}

void ObservedNetworkSystem::derivative(double /*t*/, std::span<const double> x, std::span<double> dx) {
  const std::size_t n = plant_->n_v(), nw = plant_->n_w();
  const auto v = x.first(n);
  plant_->voltage_derivative(v, x.subspan(n, nw), u_, dx.first(n));
  plant_->internal_derivative(v, x.subspan(n, nw), dx.subspan(n, nw));
  for (std::size_t k = 0; k < observers_.size(); ++k) {
    const std::size_t m = observers_[k].state_size();
    observers_[k].derivative(x.subspan(offsets_[k], m), v, u_, dx.subspan(offsets_[k], m));
  }
}

void ObservedNetworkSystem::end_step(const StepInfo& /*info*/, std::span<double> x) {
  for (std::size_t k = 0; k < observers_.size(); ++k)
    observers_[k].symmetrize(x.subspan(offsets_[k], observers_[k].state_size()));
}

std::vector<std::string> ObservedNetworkSystem::signal_names() const {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < plant_->n_v(); ++i) names.push_back("v_" + std::to_string(i + 1));
  for (std::size_t k = 0; k < observers_.size(); ++k) {
    const std::string pre = "obs" + std::to_string(k + 1) + ".";
    for (const auto& p : observers_[k].model().parameter_names()) names.push_back(pre + "theta." + p);
    for (std::size_t j = 0; j < observers_[k].layout().n_v; ++j)
      names.push_back(pre + "innovation." + std::to_string(observers_[k].model().output_index(j) + 1));
  }
  return names;
}

void ObservedNetworkSystem::record(const StepInfo& /*info*/, std::span<const double> x, std::span<double> row) {
  std::size_t r = 0;
  for (std::size_t i = 0; i < plant_->n_v(); ++i) row[r++] = x[i];
  for (std::size_t k = 0; k < observers_.size(); ++k) {
    const auto s = x.subspan(offsets_[k], observers_[k].state_size());
    observers_[k].check(s);
    for (double th : observers_[k].theta(s)) row[r++] = th;
    const auto& lay = observers_[k].layout();
    for (std::size_t j = 0; j < lay.n_v; ++j) row[r++] = x[observers_[k].model().output_index(j)] - s[lay.v_hat() + j];
  }
}

}  // namespace neuromod
