#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "neuromod/rate_functions.hpp"

namespace neuromod {

enum class GateKind { ActivationDynamic, InactivationDynamic, StaticVoltage, CalciumDriven };

struct GateSpec {
  GateKind kind = GateKind::ActivationDynamic;
  int exponent = 1;
  // Absent only for calcium-driven gates.
  std::optional<RateFn> steady_state;
  // Present only for the two dynamic kinds.
  std::optional<RateFn> time_constant;
  // Calcium-driven gates open as [Ca] / (K + [Ca]).
  double calcium_half_activation = 0.0;

  bool is_dynamic() const {
    return kind == GateKind::ActivationDynamic || kind == GateKind::InactivationDynamic;
  }
  bool operator==(const GateSpec&) const = default;
};

double gate_steady_state(const GateSpec& gate, double v);
// ContractViolation for static-voltage and calcium-driven gates.
double gate_time_constant(const GateSpec& gate, double v);

enum class ChannelLabel { Na, H, T, A, K, L, KCa, KIR };

std::string_view channel_label_name(ChannelLabel label);
std::optional<ChannelLabel> find_channel_label(std::string_view name);

struct ChannelSpec {
  ChannelLabel label = ChannelLabel::Na;
  double reversal = 0.0;
  std::vector<GateSpec> gates;

  bool operator==(const ChannelSpec&) const = default;
};

struct Channel {
  ChannelSpec spec;
  double conductance = 0.0;

  bool operator==(const Channel&) const = default;
};

struct NeuronSpec {
  double capacitance = 0.1;
  std::vector<Channel> channels;
  double leak_conductance = 0.0;
  double leak_reversal = 0.0;

  bool operator==(const NeuronSpec&) const = default;
};

struct SynapseSpec {
  std::size_t pre = 0;
  std::size_t post = 0;
  double conductance = 0.0;
  double a1 = 0.53;
  double a2 = 0.18;
  double activation_offset = 2.0;
  double activation_slope = 5.0;
  double reversal = -90.0;

  double activation(double v_pre) const { return sigmoid(v_pre, activation_offset, activation_slope); }
  bool operator==(const SynapseSpec&) const = default;
};

struct GapJunctionSpec {
  std::size_t first = 0;
  std::size_t second = 0;
  double conductance = 0.0;

  bool operator==(const GapJunctionSpec&) const = default;
};

struct NetworkSpec {
  std::vector<NeuronSpec> neurons;
  std::vector<SynapseSpec> synapses;
  std::vector<GapJunctionSpec> gap_junctions;

  // Throws ConfigError naming the offending field.
  void validate() const;
  bool operator==(const NetworkSpec&) const = default;
};

// Calcium balance: d[Ca]/dt = kCalciumInflux * m_L * (v - E_Ca) - kCalciumDecay * [Ca].
inline constexpr double kCalciumInflux = -0.01;
inline constexpr double kCalciumDecay = 0.0025;

// Compiled view of a NetworkSpec: fixes the canonical ordering of the
// internal state vector and evaluates currents and derivatives.
//
// Per neuron, w holds the dynamic gates in channel declaration order, then
// one synaptic gate per incoming synapse ordered by presynaptic index, then
// [Ca] if the neuron has an L or KCa channel.
class NetworkModel {
 public:
  struct GateSlot {
    std::size_t channel;
    std::size_t gate;
  };

  struct NeuronLayout {
    std::size_t offset = 0;
    std::size_t size = 0;
    std::vector<GateSlot> dynamic_gates;
    std::vector<std::size_t> incoming;  // synapse indices, sorted by pre
    std::optional<std::size_t> calcium;  // local index within the block
    std::optional<std::size_t> calcium_source;  // local index of the L-channel m gate
    double calcium_reversal = 0.0;
    std::vector<std::size_t> gap_junctions;  // gap indices touching this neuron
    // local state index of each channel's gate, or npos for non-dynamic gates
    std::vector<std::vector<std::size_t>> gate_state;
  };

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  explicit NetworkModel(NetworkSpec spec);

  const NetworkSpec& spec() const { return spec_; }
  std::size_t n_v() const { return spec_.neurons.size(); }
  std::size_t n_w() const { return n_w_; }
  const NeuronLayout& layout(std::size_t neuron) const { return layouts_[neuron]; }

  std::vector<std::string> internal_state_names() const;

  // Open fraction of channel k of a neuron (product of its gate factors).
  double channel_gating(std::size_t neuron, std::size_t channel, double v_i,
                        std::span<const double> w_i) const;
  double channel_current(std::size_t neuron, std::size_t channel, double v_i,
                         std::span<const double> w_i) const;
  double leak_current(std::size_t neuron, double v_i) const;
  // Current through synapse `syn` into its postsynaptic neuron.
  double synapse_current(std::size_t syn, double v_post, std::span<const double> w_post) const;
  // Gap current leaving `neuron` through gap junction `gap`.
  double gap_current(std::size_t gap, std::size_t neuron, std::span<const double> v) const;

  // Blockwise evaluation used by decentralised observers. `v` is the full
  // voltage vector (presynaptic voltages are read from it); `w_i` is the block
  // of neuron i only.
  void neuron_internal_derivative(std::size_t neuron, std::span<const double> v,
                                  std::span<const double> w_i, std::span<double> dw_i) const;
  double neuron_voltage_derivative(std::size_t neuron, std::span<const double> v,
                                   std::span<const double> w_i, double u_i) const;

  void internal_derivative(std::span<const double> v, std::span<const double> w,
                           std::span<double> dw) const;
  void voltage_derivative(std::span<const double> v, std::span<const double> w,
                          std::span<const double> u, std::span<double> dv) const;

  // Internal state at equilibrium for a frozen voltage vector: gates at
  // their steady state, [Ca] at its fixed point, synaptic gates at
  // a1*sigma / (a1*sigma + a2).
  std::vector<double> steady_state(std::span<const double> v) const;
  void neuron_steady_state(std::size_t neuron, std::span<const double> v, std::span<double> w_i) const;

  std::span<const double> block(std::size_t neuron, std::span<const double> w) const {
    return w.subspan(layouts_[neuron].offset, layouts_[neuron].size);
  }

 private:
  NetworkSpec spec_;
  std::vector<NeuronLayout> layouts_;
  std::size_t n_w_ = 0;
};

}  // namespace neuromod
