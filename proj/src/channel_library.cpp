#include "neuromod/channel_library.hpp"

#include <string>

#include "neuromod/errors.hpp"

namespace neuromod {

namespace {

GateSpec activation(int exponent, RateFn inf, RateFn tau) {
  return {GateKind::ActivationDynamic, exponent, inf, tau, 0.0};
}

GateSpec inactivation(int exponent, RateFn inf, RateFn tau) {
  return {GateKind::InactivationDynamic, exponent, inf, tau, 0.0};
}

void check_nonnegative(const ConductanceVector& mu) {
  for (std::size_t k = 0; k < mu.size(); ++k) {
    if (!(mu[k] >= 0.0)) {
      throw ConfigError("conductance mu_" + std::string(kConductanceNames[k]) + " must be >= 0");
    }
  }
}

}  // namespace

ChannelSpec sodium_channel() {
  return {ChannelLabel::Na, kConstants.e_na,
          {activation(3, RateFn::SigmaMNa, RateFn::TauMNa), inactivation(1, RateFn::SigmaHNa, RateFn::TauHNa)}};
}

ChannelSpec h_channel() {
  return {ChannelLabel::H, kConstants.e_h, {activation(1, RateFn::SigmaMH, RateFn::TauMH)}};
}

ChannelSpec t_channel() {
  return {ChannelLabel::T, kConstants.e_ca,
          {activation(2, RateFn::SigmaMT, RateFn::TauMT), inactivation(1, RateFn::SigmaHT, RateFn::TauHT)}};
}

ChannelSpec a_channel() {
  return {ChannelLabel::A, kConstants.e_k,
          {activation(4, RateFn::SigmaMA, RateFn::TauMA), inactivation(1, RateFn::SigmaHA, RateFn::TauHA)}};
}

ChannelSpec potassium_channel() {
  return {ChannelLabel::K, kConstants.e_k, {activation(4, RateFn::SigmaMK, RateFn::TauMK)}};
}

ChannelSpec l_channel() {
  return {ChannelLabel::L, kConstants.e_ca, {activation(1, RateFn::SigmaML, RateFn::TauML)}};
}

ChannelSpec kca_channel() {
  return {ChannelLabel::KCa,
          kConstants.e_k,
          {GateSpec{GateKind::CalciumDriven, 4, std::nullopt, std::nullopt, kKCaHalfActivation}}};
}

ChannelSpec kir_channel() {
  return {ChannelLabel::KIR,
          kConstants.e_k,
          {GateSpec{GateKind::StaticVoltage, 1, RateFn::SigmaMKIR, std::nullopt, 0.0}}};
}

NeuronSpec build_bursting_neuron(const ConductanceVector& mu) {
  check_nonnegative(mu);
  NeuronSpec n;
  n.capacitance = kConstants.capacitance;
  n.channels = {
      {sodium_channel(), mu[0]}, {h_channel(), mu[1]}, {t_channel(), mu[2]},   {a_channel(), mu[3]},
      {potassium_channel(), mu[4]}, {l_channel(), mu[5]}, {kca_channel(), mu[6]}, {kir_channel(), mu[7]},
  };
  n.leak_conductance = mu[8];
  n.leak_reversal = kConstants.e_leak;
  return n;
}

NeuronSpec build_hh_neuron(double mu_na, double mu_k, double mu_leak) {
  check_nonnegative({mu_na, 0, 0, 0, mu_k, 0, 0, 0, mu_leak});
  NeuronSpec n;
  n.capacitance = kConstants.capacitance;
  n.channels = {{sodium_channel(), mu_na}, {potassium_channel(), mu_k}};
  n.leak_conductance = mu_leak;
  n.leak_reversal = kConstants.e_leak;
  return n;
}

SynapseSpec build_gaba_synapse(std::size_t pre, std::size_t post, double mu_syn) {
  if (pre == post) throw ConfigError("GABA synapse pre and post must differ");
  if (!(mu_syn >= 0.0)) throw ConfigError("synaptic conductance must be >= 0");
  return {pre, post, mu_syn, gaba::kA1, gaba::kA2, gaba::kOffset, gaba::kSlope, kConstants.e_syn};
}

NetworkSpec build_hco(const ConductanceVector& mu1, const ConductanceVector& mu2, double mu_syn_2_to_1,
                      double mu_syn_1_to_2) {
  NetworkSpec net;
  net.neurons = {build_bursting_neuron(mu1), build_bursting_neuron(mu2)};
  net.synapses = {build_gaba_synapse(1, 0, mu_syn_2_to_1), build_gaba_synapse(0, 1, mu_syn_1_to_2)};
  net.validate();
  return net;
}

FiveNeuronParams default_five_neuron_params() {
  FiveNeuronParams p;
  p.mu = {reference_params::kNetworkFast, reference_params::kNetworkFast, reference_params::kNetworkHub,
          reference_params::kRejectionPre, reference_params::kRejectionPre};
  return p;
}

NetworkSpec build_five_neuron_network(const FiveNeuronParams& p) {
  NetworkSpec net;
  for (const auto& mu : p.mu) net.neurons.push_back(build_bursting_neuron(mu));
  net.synapses = {
      build_gaba_synapse(1, 0, p.syn_2_to_1),
      build_gaba_synapse(0, 1, p.syn_1_to_2),
      build_gaba_synapse(0, 2, p.syn_1_to_3),
      build_gaba_synapse(4, 3, p.syn_5_to_4),
      build_gaba_synapse(3, 4, p.syn_4_to_5),
  };
  if (p.include_syn_5_to_3) net.synapses.push_back(build_gaba_synapse(4, 2, p.syn_5_to_3));
  if (p.gap_topology == GapTopology::Hub)
    net.gap_junctions = {{1, 2, p.gap}, {2, 3, p.gap}};
  else
    net.gap_junctions = {{0, 1, p.gap}, {3, 4, p.gap}};
  net.validate();
  return net;
}

}  // namespace neuromod
