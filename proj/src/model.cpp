#include "neuromod/model.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <set>
#include <sstream>
#include <utility>

#include "neuromod/errors.hpp"

namespace neuromod {

namespace {

double ipow(double x, int n) {
  double r = 1.0;
  for (int k = 0; k < n; ++k) r *= x;
  return r;
}

constexpr std::array<std::pair<ChannelLabel, std::string_view>, 8> kChannelNames{{
    {ChannelLabel::Na, "Na"},
    {ChannelLabel::H, "H"},
    {ChannelLabel::T, "T"},
    {ChannelLabel::A, "A"},
    {ChannelLabel::K, "K"},
    {ChannelLabel::L, "L"},
    {ChannelLabel::KCa, "KCa"},
    {ChannelLabel::KIR, "KIR"},
}};

std::string field(std::size_t neuron, std::string_view rest) {
  std::ostringstream os;
  os << "neurons[" << neuron << "]." << rest;
  return os.str();
}

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

void validate_gate(const GateSpec& g, const std::string& where) {
  require(g.exponent >= 0, where + ".exponent must be >= 0");
  switch (g.kind) {
    case GateKind::ActivationDynamic:
    case GateKind::InactivationDynamic:
      require(g.steady_state && rate_function_family(*g.steady_state) == RateFnFamily::SteadyState,
              where + ".steady_state must name a steady-state function");
      require(g.time_constant && rate_function_family(*g.time_constant) == RateFnFamily::TimeConstant,
              where + ".time_constant must name a time-constant function");
      break;
    case GateKind::StaticVoltage:
      require(g.steady_state && rate_function_family(*g.steady_state) == RateFnFamily::SteadyState,
              where + ".steady_state must name a steady-state function");
      require(!g.time_constant, where + ".time_constant not allowed on a static gate");
      break;
    case GateKind::CalciumDriven:
      require(!g.steady_state && !g.time_constant, where + " calcium gate takes no rate functions");
      require(g.calcium_half_activation > 0.0, where + ".calcium_half_activation must be > 0");
      break;
  }
}

}  // namespace

double gate_steady_state(const GateSpec& gate, double v) {
  if (!gate.steady_state) throw ContractViolation("gate_steady_state: gate has no voltage steady state");
  return rate_function(*gate.steady_state, v);
}

double gate_time_constant(const GateSpec& gate, double v) {
  if (!gate.is_dynamic() || !gate.time_constant) {
    throw ContractViolation("gate_time_constant: gate has no voltage dynamics");
  }
  return rate_function(*gate.time_constant, v);
}

std::string_view channel_label_name(ChannelLabel label) {
  for (const auto& [l, n] : kChannelNames) {
    if (l == label) return n;
  }
  return "?";
}

std::optional<ChannelLabel> find_channel_label(std::string_view name) {
  for (const auto& [l, n] : kChannelNames) {
    if (n == name) return l;
  }
  return std::nullopt;
}

void NetworkSpec::validate() const {
  require(!neurons.empty(), "network must contain at least one neuron");
  for (std::size_t i = 0; i < neurons.size(); ++i) {
    const auto& n = neurons[i];
    require(std::isfinite(n.capacitance) && n.capacitance > 0.0, field(i, "capacitance must be > 0"));
    require(std::isfinite(n.leak_conductance) && n.leak_conductance >= 0.0,
            field(i, "leak conductance must be >= 0"));
    std::set<ChannelLabel> seen;
    for (const auto& ch : n.channels) {
      const std::string name(channel_label_name(ch.spec.label));
      const std::string where = field(i, "channels[" + name + "]");
      require(seen.insert(ch.spec.label).second, where + " declared twice");
      require(std::isfinite(ch.conductance) && ch.conductance >= 0.0,
              where + ".conductance (mu_" + name + ") must be >= 0");
      for (std::size_t g = 0; g < ch.spec.gates.size(); ++g) {
        validate_gate(ch.spec.gates[g], where + ".gates[" + std::to_string(g) + "]");
      }
      if (ch.spec.label == ChannelLabel::KCa) {
        require(ch.spec.gates.size() == 1 && ch.spec.gates[0].kind == GateKind::CalciumDriven &&
                    ch.spec.gates[0].exponent == 4,
                where + " must have exactly one calcium-driven gate with exponent 4");
      }
      if (ch.spec.label == ChannelLabel::KIR) {
        require(ch.spec.gates.size() == 1 && ch.spec.gates[0].kind == GateKind::StaticVoltage,
                where + " must have exactly one static-voltage gate");
      }
      if (ch.spec.label == ChannelLabel::L) {
        require(!ch.spec.gates.empty() && ch.spec.gates[0].is_dynamic(),
                where + " must start with a dynamic activation gate");
      }
    }
  }
  for (std::size_t s = 0; s < synapses.size(); ++s) {
    const auto& syn = synapses[s];
    const std::string where = "synapses[" + std::to_string(s) + "]";
    require(syn.pre < neurons.size() && syn.post < neurons.size(), where + " neuron index out of range");
    require(syn.pre != syn.post, where + " pre and post must differ");
    require(std::isfinite(syn.conductance) && syn.conductance >= 0.0, where + ".conductance must be >= 0");
    require(syn.a1 > 0.0 && syn.a2 > 0.0, where + ".a1 and a2 must be > 0");
    require(syn.activation_slope > 0.0, where + ".activation_slope must be > 0");
    for (std::size_t t = 0; t < s; ++t) {
      require(!(synapses[t].pre == syn.pre && synapses[t].post == syn.post), where + " duplicates an earlier synapse");
    }
  }
  std::set<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t k = 0; k < gap_junctions.size(); ++k) {
    const auto& gap = gap_junctions[k];
    const std::string where = "gap_junctions[" + std::to_string(k) + "]";
    require(gap.first < neurons.size() && gap.second < neurons.size(), where + " neuron index out of range");
    require(gap.first != gap.second, where + " endpoints must differ");
    require(std::isfinite(gap.conductance) && gap.conductance >= 0.0, where + ".conductance must be >= 0");
    require(pairs.insert(std::minmax(gap.first, gap.second)).second, where + " duplicates an earlier pair");
  }
}

NetworkModel::NetworkModel(NetworkSpec spec) : spec_(std::move(spec)) {
  spec_.validate();
  layouts_.resize(spec_.neurons.size());
  std::size_t offset = 0;
  for (std::size_t i = 0; i < spec_.neurons.size(); ++i) {
    const auto& neuron = spec_.neurons[i];
    auto& lay = layouts_[i];
    lay.offset = offset;
    std::size_t local = 0;
    bool needs_calcium = false;
    lay.gate_state.resize(neuron.channels.size());
    for (std::size_t c = 0; c < neuron.channels.size(); ++c) {
      const auto& ch = neuron.channels[c];
      lay.gate_state[c].assign(ch.spec.gates.size(), npos);
      if (ch.spec.label == ChannelLabel::L || ch.spec.label == ChannelLabel::KCa) needs_calcium = true;
      for (std::size_t g = 0; g < ch.spec.gates.size(); ++g) {
        if (!ch.spec.gates[g].is_dynamic()) continue;
        if (ch.spec.label == ChannelLabel::L && !lay.calcium_source) {
          lay.calcium_source = local;
          lay.calcium_reversal = ch.spec.reversal;
        }
        lay.dynamic_gates.push_back({c, g});
        lay.gate_state[c][g] = local++;
      }
    }
    for (std::size_t s = 0; s < spec_.synapses.size(); ++s) {
      if (spec_.synapses[s].post == i) lay.incoming.push_back(s);
    }
    std::stable_sort(lay.incoming.begin(), lay.incoming.end(), [this](std::size_t a, std::size_t b) {
      return spec_.synapses[a].pre < spec_.synapses[b].pre;
    });
    local += lay.incoming.size();
    if (needs_calcium) lay.calcium = local++;
    for (std::size_t k = 0; k < spec_.gap_junctions.size(); ++k) {
      const auto& gap = spec_.gap_junctions[k];
      if (gap.first == i || gap.second == i) lay.gap_junctions.push_back(k);
    }
    lay.size = local;
    offset += local;
  }
  n_w_ = offset;
}

std::vector<std::string> NetworkModel::internal_state_names() const {
  std::vector<std::string> names;
  names.reserve(n_w_);
  for (std::size_t i = 0; i < layouts_.size(); ++i) {
    const auto& lay = layouts_[i];
    const std::string suffix = "_" + std::to_string(i + 1);
    for (const auto& slot : lay.dynamic_gates) {
      const auto& ch = spec_.neurons[i].channels[slot.channel];
      const char sym = ch.spec.gates[slot.gate].kind == GateKind::InactivationDynamic ? 'h' : 'm';
      names.push_back(std::string(1, sym) + "_" + std::string(channel_label_name(ch.spec.label)) + suffix);
    }
    for (std::size_t s : lay.incoming) {
      names.push_back("s_" + std::to_string(spec_.synapses[s].pre + 1) + "_" + std::to_string(i + 1));
    }
    if (lay.calcium) names.push_back("Ca" + suffix);
  }
  return names;
}

double NetworkModel::channel_gating(std::size_t neuron, std::size_t channel, double v_i,
                                    std::span<const double> w_i) const {
  const auto& lay = layouts_[neuron];
  const auto& ch = spec_.neurons[neuron].channels[channel];
  double open = 1.0;
  for (std::size_t g = 0; g < ch.spec.gates.size(); ++g) {
    const auto& gate = ch.spec.gates[g];
    if (gate.exponent == 0) continue;
    double x = 0.0;
    switch (gate.kind) {
      case GateKind::ActivationDynamic:
      case GateKind::InactivationDynamic: x = w_i[lay.gate_state[channel][g]]; break;
      case GateKind::StaticVoltage: x = rate_function(*gate.steady_state, v_i); break;
      case GateKind::CalciumDriven: {
        const double ca = lay.calcium ? w_i[*lay.calcium] : 0.0;
        x = ca / (gate.calcium_half_activation + ca);
        break;
      }
    }
    open *= ipow(x, gate.exponent);
  }
  return open;
}

double NetworkModel::channel_current(std::size_t neuron, std::size_t channel, double v_i,
                                     std::span<const double> w_i) const {
  const auto& ch = spec_.neurons[neuron].channels[channel];
  return ch.conductance * channel_gating(neuron, channel, v_i, w_i) * (v_i - ch.spec.reversal);
}

double NetworkModel::leak_current(std::size_t neuron, double v_i) const {
  const auto& n = spec_.neurons[neuron];
  return n.leak_conductance * (v_i - n.leak_reversal);
}

double NetworkModel::synapse_current(std::size_t syn, double v_post, std::span<const double> w_post) const {
  const auto& s = spec_.synapses[syn];
  const auto& lay = layouts_[s.post];
  const auto it = std::find(lay.incoming.begin(), lay.incoming.end(), syn);
  const std::size_t local = lay.dynamic_gates.size() + static_cast<std::size_t>(it - lay.incoming.begin());
  return s.conductance * w_post[local] * (v_post - s.reversal);
}

double NetworkModel::gap_current(std::size_t gap, std::size_t neuron, std::span<const double> v) const {
  const auto& g = spec_.gap_junctions[gap];
  const std::size_t other = g.first == neuron ? g.second : g.first;
  return g.conductance * (v[neuron] - v[other]);
}

void NetworkModel::neuron_internal_derivative(std::size_t neuron, std::span<const double> v,
                                              std::span<const double> w_i, std::span<double> dw_i) const {
  const auto& lay = layouts_[neuron];
  const double vi = v[neuron];
  const auto& channels = spec_.neurons[neuron].channels;
  std::size_t k = 0;
  for (const auto& slot : lay.dynamic_gates) {
    const auto& gate = channels[slot.channel].spec.gates[slot.gate];
    const double inf = rate_function(*gate.steady_state, vi);
    const double tau = rate_function(*gate.time_constant, vi);
    dw_i[k] = (inf - w_i[k]) / tau;
    ++k;
  }
  for (std::size_t s : lay.incoming) {
    const auto& syn = spec_.synapses[s];
    dw_i[k] = syn.a1 * syn.activation(v[syn.pre]) * (1.0 - w_i[k]) - syn.a2 * w_i[k];
    ++k;
  }
  if (lay.calcium) {
    const double m_l = lay.calcium_source ? w_i[*lay.calcium_source] : 0.0;
    dw_i[*lay.calcium] =
        kCalciumInflux * m_l * (vi - lay.calcium_reversal) - kCalciumDecay * w_i[*lay.calcium];
  }
}

double NetworkModel::neuron_voltage_derivative(std::size_t neuron, std::span<const double> v,
                                               std::span<const double> w_i, double u_i) const {
  const auto& n = spec_.neurons[neuron];
  const auto& lay = layouts_[neuron];
  const double vi = v[neuron];
  double total = leak_current(neuron, vi);
  for (std::size_t c = 0; c < n.channels.size(); ++c) total += channel_current(neuron, c, vi, w_i);
  for (std::size_t j = 0; j < lay.incoming.size(); ++j) {
    const auto& syn = spec_.synapses[lay.incoming[j]];
    total += syn.conductance * w_i[lay.dynamic_gates.size() + j] * (vi - syn.reversal);
  }
  for (std::size_t gap : lay.gap_junctions) total += gap_current(gap, neuron, v);
  return (u_i - total) / n.capacitance;
}

void NetworkModel::internal_derivative(std::span<const double> v, std::span<const double> w,
                                       std::span<double> dw) const {
  if (v.size() != n_v() || w.size() != n_w_ || dw.size() != n_w_) {
    throw ContractViolation("internal_derivative: dimension mismatch");
  }
  for (std::size_t i = 0; i < layouts_.size(); ++i) {
    const auto& lay = layouts_[i];
    neuron_internal_derivative(i, v, w.subspan(lay.offset, lay.size), dw.subspan(lay.offset, lay.size));
  }
}

void NetworkModel::voltage_derivative(std::span<const double> v, std::span<const double> w,
                                      std::span<const double> u, std::span<double> dv) const {
  if (v.size() != n_v() || w.size() != n_w_ || u.size() != n_v() || dv.size() != n_v()) {
    throw ContractViolation("voltage_derivative: dimension mismatch");
  }
  for (std::size_t i = 0; i < layouts_.size(); ++i) {
    const auto& lay = layouts_[i];
    dv[i] = neuron_voltage_derivative(i, v, w.subspan(lay.offset, lay.size), u[i]);
  }
}

void NetworkModel::neuron_steady_state(std::size_t neuron, std::span<const double> v,
                                       std::span<double> w_i) const {
  const auto& lay = layouts_[neuron];
  const auto& channels = spec_.neurons[neuron].channels;
  const double vi = v[neuron];
  std::size_t k = 0;
  for (const auto& slot : lay.dynamic_gates) {
    w_i[k++] = rate_function(*channels[slot.channel].spec.gates[slot.gate].steady_state, vi);
  }
  for (std::size_t s : lay.incoming) {
    const auto& syn = spec_.synapses[s];
    const double drive = syn.a1 * syn.activation(v[syn.pre]);
    w_i[k++] = drive / (drive + syn.a2);
  }
  if (lay.calcium) {
    const double m_l = lay.calcium_source ? w_i[*lay.calcium_source] : 0.0;
    w_i[*lay.calcium] = kCalciumInflux * m_l * (vi - lay.calcium_reversal) / kCalciumDecay;
  }
}

std::vector<double> NetworkModel::steady_state(std::span<const double> v) const {
  if (v.size() != n_v()) throw ContractViolation("steady_state: dimension mismatch");
  std::vector<double> w(n_w_);
  for (std::size_t i = 0; i < layouts_.size(); ++i) {
    const auto& lay = layouts_[i];
    neuron_steady_state(i, v, std::span<double>(w).subspan(lay.offset, lay.size));
  }
  return w;
}

}  // namespace neuromod
