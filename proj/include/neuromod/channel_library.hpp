#pragma once

#include <array>
#include <cstddef>
#include <string_view>

#include "neuromod/model.hpp"

namespace neuromod {

// Reversal potentials (mV) and membrane capacitance shared by every neuron.
struct ConstantsTable {
  double e_na = 45.0;
  double e_h = -43.0;
  double e_ca = 120.0;
  double e_k = -90.0;
  double e_syn = -90.0;
  double e_leak = -55.0;
  double capacitance = 0.1;
};

inline constexpr ConstantsTable kConstants{};

// Maximal conductances of the bursting neuron, ordered
// (Na, H, T, A, K, L, KCa, KIR, leak).
using ConductanceVector = std::array<double, 9>;

inline constexpr std::array<std::string_view, 9> kConductanceNames{"Na", "H", "T", "A", "K",
                                                                    "L", "KCa", "KIR", "leak"};

namespace gaba {
inline constexpr double kA1 = 0.53;
inline constexpr double kA2 = 0.18;
inline constexpr double kOffset = 2.0;
inline constexpr double kSlope = 5.0;
}  // namespace gaba

inline constexpr double kKCaHalfActivation = 15.0;

// Channel templates with the standard bursting-neuron kinetics.
ChannelSpec sodium_channel();
ChannelSpec h_channel();
ChannelSpec t_channel();
ChannelSpec a_channel();
ChannelSpec potassium_channel();
ChannelSpec l_channel();
ChannelSpec kca_channel();
ChannelSpec kir_channel();

// Eight-current bursting neuron. ConfigError on a negative conductance.
NeuronSpec build_bursting_neuron(const ConductanceVector& mu);

// Hodgkin-Huxley style neuron: Na (m^3 h), K (m^4), leak.
NeuronSpec build_hh_neuron(double mu_na, double mu_k, double mu_leak);

// Inhibitory GABA synapse from `pre` onto `post`.
SynapseSpec build_gaba_synapse(std::size_t pre, std::size_t post, double mu_syn);

// Half-centre oscillator: two bursting neurons with mutual inhibition.
NetworkSpec build_hco(const ConductanceVector& mu1, const ConductanceVector& mu2, double mu_syn_2_to_1,
                      double mu_syn_1_to_2);

// Which neurons the gap junctions couple.
enum class GapTopology {
  Hub,        // hub 3 with neurons 2 and 4
  WithinHco,  // 1 with 2, 4 with 5
};

struct FiveNeuronParams {
  std::array<ConductanceVector, 5> mu{};
  double syn_2_to_1 = 0.8;
  double syn_1_to_2 = 0.8;
  double syn_5_to_4 = 0.6;
  double syn_4_to_5 = 0.6;
  double syn_1_to_3 = 8.0;
  double syn_5_to_3 = 8.0;
  double gap = 0.004;
  GapTopology gap_topology = GapTopology::Hub;
  bool include_syn_5_to_3 = true;

  bool operator==(const FiveNeuronParams&) const = default;
};

// Default parameter set: fast HCO (1,2), hub 3, slow HCO (4,5).
FiveNeuronParams default_five_neuron_params();

// Neurons are indexed 0..4 for neurons 1..5.
NetworkSpec build_five_neuron_network(const FiveNeuronParams& params);

namespace reference_params {
inline constexpr ConductanceVector kTracking{120, 0.1, 2, 0, 80, 0.4, 2, 0, 0.1};
inline constexpr ConductanceVector kRejectionPost{60, 0.1, 2, 0, 80, 0.4, 2, 0, 0.12};
inline constexpr ConductanceVector kRejectionPre{130, 0.1, 3.2, 0, 80, 1, 2, 0, 0.1};
inline constexpr ConductanceVector kNetworkFast{120, 0.1, 1.6, 0, 80, 0.8, 2, 0, 0.1};
inline constexpr ConductanceVector kNetworkHub{60, 0.1, 2, 0, 30, 0, 1, 0, 0.1};
inline constexpr double kRejectionSynapse = 2.5;
}  // namespace reference_params

}  // namespace neuromod
