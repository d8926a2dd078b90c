#pragma once

#include <memory>
#include <vector>

#include "neuromod/model.hpp"
#include "neuromod/sim.hpp"

namespace neuromod {

// Open-loop network driven by piecewise-constant input currents.
// State layout: [v (n_v), w (n_w)].
class NetworkSystem : public OdeSystem {
 public:
  NetworkSystem(std::shared_ptr<const NetworkModel> model, std::vector<PiecewiseInput> inputs,
                std::vector<double> v0, bool record_internal = false);

  std::size_t dimension() const override { return model_->n_v() + model_->n_w(); }
  std::vector<double> initial_state() const override;
  void prepare(const SimConfig& cfg) override;
  void begin_step(const StepInfo& info) override;
  void derivative(double t, std::span<const double> x, std::span<double> dx) override;
  std::vector<std::string> signal_names() const override;
  void record(const StepInfo& info, std::span<const double> x, std::span<double> row) override;

  const NetworkModel& model() const { return *model_; }

 private:
  std::shared_ptr<const NetworkModel> model_;
  std::vector<PiecewiseInput> inputs_;
  std::vector<double> v0_;
  bool record_internal_;
  std::vector<double> u_;
};

// v(0) everywhere, internal states at their steady state for v(0).
std::vector<double> resting_state(const NetworkModel& model, std::span<const double> v0);

}  // namespace neuromod
