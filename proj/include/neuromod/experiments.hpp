#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "neuromod/channel_library.hpp"
#include "neuromod/controllers.hpp"
#include "neuromod/observer.hpp"
#include "neuromod/sim.hpp"

namespace neuromod {

struct BurstOptions {
  double threshold = 0.0;  // mV
  double max_gap = 300.0;  // ms; longer inter-spike intervals end a burst

  bool operator==(const BurstOptions&) const = default;
};

struct Burst {
  double first_spike = 0.0;
  double last_spike = 0.0;
  std::size_t spikes = 0;
  // False when the burst may be cut by the start or end of the trace.
  bool complete = true;

  double length() const { return last_spike - first_spike; }
};

struct BurstMetrics {
  std::vector<double> spike_times;
  std::vector<Burst> bursts;
  double t_first = 0.0;
  double t_last = 0.0;

  std::vector<Burst> complete_bursts() const;
  // Intervals between successive complete-burst starts.
  std::vector<double> periods() const;
  // InsufficientData with fewer than two complete bursts.
  double period() const;
  double mean_spikes_per_burst() const;
  double duty_cycle() const;
  double burst_length_cv() const;
  // (max - min) / mean over the last n periods.
  double period_spread(std::size_t n) const;
};

// Upward threshold crossings, linearly interpolated between samples.
std::vector<double> spike_times(std::span<const double> t, std::span<const double> v, double threshold);

// Groups spikes into bursts. Bursts whose first spike lies within max_gap of
// the trace start, or whose last spike lies within max_gap of its end, are
// marked incomplete.
BurstMetrics detect_bursts(std::span<const double> t, std::span<const double> v, const BurstOptions& opts = {});
BurstMetrics detect_bursts(const Trajectory& traj, const std::string& signal, double t0, double t1,
                           const BurstOptions& opts = {});

// Fraction of the shorter total burst time during which both traces burst.
double burst_overlap(const BurstMetrics& a, const BurstMetrics& b);

struct Phase {
  std::string name;
  double t0 = 0.0;
  double t1 = 0.0;
  // Start of the trailing window used for steady-state metrics.
  double trailing_start(double fraction) const { return t1 - fraction * (t1 - t0); }
};

struct ExperimentReport {
  std::string experiment;
  Trajectory trajectory;
  std::vector<Phase> phases;
  std::map<std::string, double> metrics;
  std::map<std::string, std::vector<double>> vectors;
  std::map<std::string, std::string> assumptions;
  std::vector<std::string> parameter_names;
};

// Root-mean-square of a - b over samples with t0 <= t < t1.
double windowed_rms(const Trajectory& traj, const std::string& a, const std::string& b, double t0, double t1);
double windowed_max_abs(const Trajectory& traj, const std::string& signal, double t0, double t1);

struct TrackingConfig {
  SimConfig sim{-8000.0, 30000.0, 0.005, 100};
  double t_on = 0.0;
  ConductanceVector mu_reference = reference_params::kTracking;
  ConductanceVector mu_plant{};
  double u_r = -2.0;
  double kappa = 0.04;
  double beta = 150.0;
  ObserverConfig observer{2.0, 0.0008, {}, 1.0, {}};
  double v0_reference = -65.0;
  double v0_plant = -65.0;
  // Start both observers on the true parameters instead of zero.
  bool preset_estimates = false;
  BurstOptions bursts;
  double trailing_fraction = 0.2;
  bool record_internal = false;

  void validate() const;
  bool operator==(const TrackingConfig&) const = default;
};

struct DisturbanceConfig {
  SimConfig sim{0.0, 40000.0, 0.005, 100};
  // Disturbance switched on at t_disturb; observer and controller at t_control.
  double t_disturb = 8000.0;
  double t_control = 16000.0;
  double mu_syn = reference_params::kRejectionSynapse;
  ControlConfig control;
  ObserverConfig observer{5.0, 0.001, {}, 1.0, {}};
  BurstOptions bursts;
  double trailing_fraction = 0.2;
  // Trailing fraction of each phase used for burst statistics.
  double burst_fraction = 0.5;
  bool record_internal = false;

  void validate() const;
  bool operator==(const DisturbanceConfig&) const = default;
};

struct RejectionConfig : DisturbanceConfig {
  // The presynaptic neuron's rebound burst after release from -7.5 is
  // unstable under RK4 at dt = 0.005.
  RejectionConfig() { sim = {0.0, 40000.0, 0.0025, 200}; }

  ConductanceVector mu_post = reference_params::kRejectionPost;
  ConductanceVector mu_pre = reference_params::kRejectionPre;
  PiecewiseInput u_post = PiecewiseInput({{0.0, -2.0}});
  PiecewiseInput u_pre = PiecewiseInput({{0.0, -7.5}, {400.0, -1.0}});
  double v0_post = -65.0;
  double v0_pre = -65.0;

  void validate() const;
  bool operator==(const RejectionConfig&) const = default;
};

struct NetworkConfig : DisturbanceConfig {
  FiveNeuronParams network = default_five_neuron_params();
  std::array<PiecewiseInput, 5> inputs{
      PiecewiseInput({{0.0, -8.0}, {600.0, -3.5}}), PiecewiseInput({{0.0, -3.5}}), PiecewiseInput({{0.0, 38.0}}),
      PiecewiseInput({{0.0, -7.0}, {600.0, -3.2}}), PiecewiseInput({{0.0, -3.2}})};
  std::array<double, 5> v0{-65.0, -65.0, -65.0, -65.0, -65.0};

  NetworkConfig();
  void validate() const;
  bool operator==(const NetworkConfig&) const = default;
};

// Adaptive tracking: reference neuron and passive plant run open loop until
// t_on, then both observers, the control law and the output feedback switch on.
ExperimentReport run_tracking(const TrackingConfig& cfg);
// Bursting neuron disturbed by an inhibitory synapse from a second neuron;
// phases: undisturbed, disturbed, controlled.
ExperimentReport run_rejection(const RejectionConfig& cfg);
// Five-neuron network; the synapse from neuron 5 onto the hub is the
// disturbance rejected at the hub.
ExperimentReport run_network(const NetworkConfig& cfg);

// Open-loop network observed by any number of adaptive observers, each fed the
// full measured voltage and input vectors. Signals: v_i, then per observer k
// (1-based) "obs<k>.theta.<name>" and "obs<k>.innovation.<i>".
class ObservedNetworkSystem : public OdeSystem {
 public:
  ObservedNetworkSystem(std::shared_ptr<const NetworkModel> plant, std::vector<PiecewiseInput> inputs,
                        std::vector<double> v0, std::vector<AdaptiveObserver> observers,
                        std::vector<std::vector<double>> theta0 = {});

  std::size_t dimension() const override { return dim_; }
  std::vector<double> initial_state() const override;
  void prepare(const SimConfig& cfg) override;
  void begin_step(const StepInfo& info) override;
  void derivative(double t, std::span<const double> x, std::span<double> dx) override;
  void end_step(const StepInfo& info, std::span<double> x) override;
  std::vector<std::string> signal_names() const override;
  void record(const StepInfo& info, std::span<const double> x, std::span<double> row) override;

  const AdaptiveObserver& observer(std::size_t k) const { return observers_[k]; }
  std::size_t observer_offset(std::size_t k) const { return offsets_[k]; }

 private:
  std::shared_ptr<const NetworkModel> plant_;
  std::vector<PiecewiseInput> inputs_;
  std::vector<double> v0_;
  std::vector<AdaptiveObserver> observers_;
  std::vector<std::vector<double>> theta0_;
  std::vector<std::size_t> offsets_;
  std::size_t dim_ = 0;
  std::vector<double> u_;
};

// Closed-loop systems behind the experiments, exposed for step-size checks.
std::unique_ptr<OdeSystem> make_tracking_system(const TrackingConfig& cfg);
std::unique_ptr<OdeSystem> make_rejection_system(const RejectionConfig& cfg);
std::unique_ptr<OdeSystem> make_network_system(const NetworkConfig& cfg);

}  // namespace neuromod
