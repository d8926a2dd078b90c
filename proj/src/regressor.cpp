#include "neuromod/regressor.hpp"

#include <algorithm>
#include <charconv>

#include "neuromod/errors.hpp"

namespace neuromod {

namespace {

std::size_t parse_neuron_number(std::string_view text, std::string_view id) {
  std::size_t n = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, n);
  if (ec != std::errc() || ptr != end || n == 0) {
    throw ConfigError("malformed conductance identifier '" + std::string(id) + "'");
  }
  return n - 1;
}

}  // namespace

std::string conductance_id(const NetworkModel& model, const ConductanceRef& ref) {
  const auto& spec = model.spec();
  switch (ref.kind) {
    case ConductanceKind::Channel:
      return std::string(channel_label_name(spec.neurons[ref.neuron].channels[ref.index].spec.label));
    case ConductanceKind::Synapse: return "syn:" + std::to_string(spec.synapses[ref.index].pre + 1);
    case ConductanceKind::Gap: {
      const auto& g = spec.gap_junctions[ref.index];
      return "gap:" + std::to_string((g.first == ref.neuron ? g.second : g.first) + 1);
    }
    case ConductanceKind::Leak: return "leak";
  }
  return {};
}

ConductanceRef parse_conductance_id(const NetworkModel& model, std::size_t neuron, std::string_view id) {
  const auto& spec = model.spec();
  if (neuron >= spec.neurons.size()) throw ConfigError("neuron index out of range");
  if (id == "leak") return {neuron, ConductanceKind::Leak, 0};
  if (auto label = find_channel_label(id)) {
    const auto& chans = spec.neurons[neuron].channels;
    for (std::size_t c = 0; c < chans.size(); ++c) {
      if (chans[c].spec.label == *label) return {neuron, ConductanceKind::Channel, c};
    }
    throw ConfigError("neuron " + std::to_string(neuron + 1) + " has no channel '" + std::string(id) + "'");
  }
  if (id.starts_with("syn:")) {
    const std::size_t pre = parse_neuron_number(id.substr(4), id);
    for (std::size_t s : model.layout(neuron).incoming) {
      if (spec.synapses[s].pre == pre) return {neuron, ConductanceKind::Synapse, s};
    }
    throw ConfigError("neuron " + std::to_string(neuron + 1) + " has no synapse '" + std::string(id) + "'");
  }
  if (id.starts_with("gap:")) {
    const std::size_t other = parse_neuron_number(id.substr(4), id);
    for (std::size_t k : model.layout(neuron).gap_junctions) {
      const auto& g = spec.gap_junctions[k];
      if (g.first == other || g.second == other) return {neuron, ConductanceKind::Gap, k};
    }
    throw ConfigError("neuron " + std::to_string(neuron + 1) + " has no gap junction '" + std::string(id) + "'");
  }
  throw ConfigError("unknown conductance identifier '" + std::string(id) + "'");
}

Parametrisation neuron_parametrisation(const NetworkModel& model, std::size_t neuron) {
  Parametrisation p;
  const auto& chans = model.spec().neurons.at(neuron).channels;
  for (std::size_t c = 0; c < chans.size(); ++c) p.push_back({neuron, ConductanceKind::Channel, c});
  for (std::size_t s : model.layout(neuron).incoming) p.push_back({neuron, ConductanceKind::Synapse, s});
  p.push_back({neuron, ConductanceKind::Leak, 0});
  return p;
}

Parametrisation neuron_parametrisation(const NetworkModel& model, std::size_t neuron,
                                       std::span<const std::string> ids) {
  Parametrisation p;
  for (const auto& id : ids) {
    const auto ref = parse_conductance_id(model, neuron, id);
    if (std::find(p.begin(), p.end(), ref) != p.end()) throw ConfigError("conductance '" + id + "' listed twice");
    p.push_back(ref);
  }
  return p;
}

Parametrisation network_parametrisation(const NetworkModel& model) {
  Parametrisation p;
  for (std::size_t i = 0; i < model.n_v(); ++i) {
    const auto block = neuron_parametrisation(model, i);
    p.insert(p.end(), block.begin(), block.end());
  }
  return p;
}

std::vector<double> true_parameters(const NetworkModel& model, const Parametrisation& params) {
  const auto& spec = model.spec();
  std::vector<double> theta;
  theta.reserve(params.size());
  for (const auto& ref : params) {
    switch (ref.kind) {
      case ConductanceKind::Channel: theta.push_back(spec.neurons[ref.neuron].channels[ref.index].conductance); break;
      case ConductanceKind::Synapse: theta.push_back(spec.synapses[ref.index].conductance); break;
      case ConductanceKind::Gap: theta.push_back(spec.gap_junctions[ref.index].conductance); break;
      case ConductanceKind::Leak: theta.push_back(spec.neurons[ref.neuron].leak_conductance); break;
    }
  }
  return theta;
}

NeuronRegressor::NeuronRegressor(std::shared_ptr<const NetworkModel> model, std::size_t neuron,
                                 Parametrisation params)
    : model_(std::move(model)), neuron_(neuron), params_(std::move(params)) {
  const auto& spec = model_->spec();
  if (neuron_ >= spec.neurons.size()) throw ConfigError("regressor neuron index out of range");
  const auto& lay = model_->layout(neuron_);
  channel_col_.assign(spec.neurons[neuron_].channels.size(), NetworkModel::npos);
  synapse_col_.assign(lay.incoming.size(), NetworkModel::npos);
  gap_col_.assign(lay.gap_junctions.size(), NetworkModel::npos);
  for (std::size_t col = 0; col < params_.size(); ++col) {
    const auto& ref = params_[col];
    if (ref.neuron != neuron_) throw ConfigError("parametrisation entry belongs to another neuron");
    auto claim = [&](std::size_t& slot) {
      if (slot != NetworkModel::npos) throw ConfigError("conductance estimated twice");
      slot = col;
    };
    switch (ref.kind) {
      case ConductanceKind::Channel:
        if (ref.index >= channel_col_.size()) throw ConfigError("parametrisation references a missing channel");
        claim(channel_col_[ref.index]);
        break;
      case ConductanceKind::Synapse: {
        const auto it = std::find(lay.incoming.begin(), lay.incoming.end(), ref.index);
        if (it == lay.incoming.end()) throw ConfigError("parametrisation references a missing synapse");
        claim(synapse_col_[static_cast<std::size_t>(it - lay.incoming.begin())]);
        break;
      }
      case ConductanceKind::Gap: {
        const auto it = std::find(lay.gap_junctions.begin(), lay.gap_junctions.end(), ref.index);
        if (it == lay.gap_junctions.end()) throw ConfigError("parametrisation references a missing gap junction");
        claim(gap_col_[static_cast<std::size_t>(it - lay.gap_junctions.begin())]);
        break;
      }
      case ConductanceKind::Leak: claim(leak_col_); break;
    }
  }
}

double NeuronRegressor::evaluate(std::span<const double> v, std::span<const double> w_i, double u_i,
                                 std::span<double> phi) const {
  if (phi.size() != params_.size()) throw ContractViolation("NeuronRegressor: phi has wrong size");
  const auto& spec = model_->spec();
  const auto& neuron = spec.neurons[neuron_];
  const auto& lay = model_->layout(neuron_);
  const double vi = v[neuron_];
  const double inv_c = 1.0 / neuron.capacitance;
  double known = 0.0;

  for (std::size_t c = 0; c < neuron.channels.size(); ++c) {
    const auto& ch = neuron.channels[c];
    const double templ = model_->channel_gating(neuron_, c, vi, w_i) * (vi - ch.spec.reversal);
    if (channel_col_[c] != NetworkModel::npos) {
      phi[channel_col_[c]] = -templ * inv_c;
    } else {
      known += ch.conductance * templ;
    }
  }
  for (std::size_t j = 0; j < lay.incoming.size(); ++j) {
    const auto& syn = spec.synapses[lay.incoming[j]];
    const double templ = w_i[lay.dynamic_gates.size() + j] * (vi - syn.reversal);
    if (synapse_col_[j] != NetworkModel::npos) {
      phi[synapse_col_[j]] = -templ * inv_c;
    } else {
      known += syn.conductance * templ;
    }
  }
  for (std::size_t j = 0; j < lay.gap_junctions.size(); ++j) {
    const auto& g = spec.gap_junctions[lay.gap_junctions[j]];
    const double other = v[g.first == neuron_ ? g.second : g.first];
    const double templ = vi - other;
    if (gap_col_[j] != NetworkModel::npos) {
      phi[gap_col_[j]] = -templ * inv_c;
    } else {
      known += g.conductance * templ;
    }
  }
  const double leak_templ = vi - neuron.leak_reversal;
  if (leak_col_ != NetworkModel::npos) {
    phi[leak_col_] = -leak_templ * inv_c;
  } else {
    known += neuron.leak_conductance * leak_templ;
  }
  return (u_i - known) * inv_c;
}

Regressor regressor(const NetworkModel& model, const Parametrisation& params, std::span<const double> v,
                    std::span<const double> w, std::span<const double> u) {
  if (v.size() != model.n_v() || w.size() != model.n_w() || u.size() != model.n_v()) {
    throw ContractViolation("regressor: dimension mismatch");
  }
  // Non-owning alias: the model outlives this call.
  std::shared_ptr<const NetworkModel> alias(std::shared_ptr<const NetworkModel>{}, &model);
  Regressor out{Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(model.n_v()), static_cast<Eigen::Index>(params.size())),
                Eigen::VectorXd::Zero(static_cast<Eigen::Index>(model.n_v()))};
  std::vector<double> row;
  for (std::size_t i = 0; i < model.n_v(); ++i) {
    Parametrisation local;
    std::vector<std::size_t> cols;
    for (std::size_t k = 0; k < params.size(); ++k) {
      if (params[k].neuron == i) {
        local.push_back(params[k]);
        cols.push_back(k);
      }
    }
    NeuronRegressor nr(alias, i, std::move(local));
    row.assign(nr.n_theta(), 0.0);
    out.b(static_cast<Eigen::Index>(i)) = nr.evaluate(v, model.block(i, w), u[i], row);
    for (std::size_t k = 0; k < cols.size(); ++k) {
      out.phi(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(cols[k])) = row[k];
    }
  }
  return out;
}

}  // namespace neuromod
