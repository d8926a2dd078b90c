#include "neuromod/observer.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "neuromod/errors.hpp"

namespace neuromod {

std::vector<std::string> RegressionModel::parameter_names() const {
  std::vector<std::string> out;
  for (std::size_t j = 0; j < n_theta(); ++j) out.push_back("theta_" + std::to_string(j + 1));
  return out;
}

std::vector<std::string> RegressionModel::internal_state_names() const {
  std::vector<std::string> out;
  for (std::size_t j = 0; j < n_w(); ++j) out.push_back("w_" + std::to_string(j + 1));
  return out;
}

void ObserverConfig::validate(std::size_t n_theta) const {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw ConfigError("observer.gamma must be > 0");
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw ConfigError("observer.alpha must be > 0");
  if (P0.size() == 0) {
    if (!(p0 > 0.0) || !std::isfinite(p0)) throw ConfigError("observer.P0 must be > 0");
    return;
  }
  if (static_cast<std::size_t>(P0.rows()) != n_theta || static_cast<std::size_t>(P0.cols()) != n_theta) {
    std::ostringstream os;
    os << "observer.P0 must be " << n_theta << "x" << n_theta << ", got " << P0.rows() << "x" << P0.cols();
    throw ConfigError(os.str());
  }
  if (!P0.allFinite() || (P0 - P0.transpose()).cwiseAbs().maxCoeff() > 1e-12)
    throw ConfigError("observer.P0 must be symmetric");
  Eigen::LLT<Eigen::MatrixXd> llt(P0);
  if (llt.info() != Eigen::Success) throw ConfigError("observer.P0 must be positive definite");
}

Eigen::MatrixXd ObserverConfig::initial_covariance(std::size_t n_theta) const {
  if (P0.size() != 0) return P0;
  const auto n = static_cast<Eigen::Index>(n_theta);
  return p0 * Eigen::MatrixXd::Identity(n, n);
}

ObserverStateView view_observer_state(const ObserverLayout& l, std::span<const double> s) {
  if (s.size() != l.size()) throw ContractViolation("observer state has wrong size");
  const auto nv = static_cast<Eigen::Index>(l.n_v);
  const auto nw = static_cast<Eigen::Index>(l.n_w);
  const auto nt = static_cast<Eigen::Index>(l.n_theta);
  return ObserverStateView{
      Eigen::Map<const Eigen::VectorXd>(s.data() + l.v_hat(), nv),
      Eigen::Map<const Eigen::VectorXd>(s.data() + l.w_hat(), nw),
      Eigen::Map<const Eigen::VectorXd>(s.data() + l.theta(), nt),
      Eigen::Map<const RowMajorMatrix>(s.data() + l.psi(), nv, nt),
      Eigen::Map<const Eigen::MatrixXd>(s.data() + l.p(), nt, nt),
  };
}

namespace {

void field(const ObserverConfig& cfg, const ObserverLayout& l, std::span<const double> state,
           std::span<const double> v_meas, std::span<const double> u, RegressionModel& model,
           std::span<double> dstate, double gain, RowMajorMatrix& phi, Eigen::VectorXd& b, Eigen::VectorXd& err,
           Eigen::MatrixXd& p_psi_t) {
  if (state.size() != l.size() || dstate.size() != l.size())
    throw ContractViolation("observer state has wrong size");
  if (v_meas.size() != model.n_measured()) throw ContractViolation("measured voltage vector has wrong size");
  if (u.size() != model.n_inputs()) throw ContractViolation("input vector has wrong size");

  if (gain == 0.0) {
    std::fill(dstate.begin(), dstate.end(), 0.0);
    return;
  }

  const auto x = view_observer_state(l, state);
  const auto nv = static_cast<Eigen::Index>(l.n_v);
  const auto nt = static_cast<Eigen::Index>(l.n_theta);

  model.regressor(v_meas, state.subspan(l.w_hat(), l.n_w), u, std::span<double>(phi.data(), l.n_v * l.n_theta),
                  std::span<double>(b.data(), l.n_v));
  model.internal_derivative(v_meas, state.subspan(l.w_hat(), l.n_w), dstate.subspan(l.w_hat(), l.n_w));

  for (Eigen::Index k = 0; k < nv; ++k) err[k] = v_meas[model.output_index(static_cast<std::size_t>(k))] - x.v_hat[k];

  const double g = cfg.gamma;
  p_psi_t.noalias() = x.p * x.psi.transpose();  // n_theta x n_v

  Eigen::Map<Eigen::VectorXd> dv(dstate.data() + l.v_hat(), nv);
  Eigen::Map<Eigen::VectorXd> dtheta(dstate.data() + l.theta(), nt);
  Eigen::Map<RowMajorMatrix> dpsi(dstate.data() + l.psi(), nv, nt);
  Eigen::Map<Eigen::MatrixXd> dp(dstate.data() + l.p(), nt, nt);

  dv.noalias() = phi * x.theta + b + g * err;
  dv.noalias() += g * (x.psi * (p_psi_t * err));
  dtheta.noalias() = g * (p_psi_t * err);
  dpsi = phi - g * x.psi;
  dp.noalias() = cfg.alpha * x.p;
  dp.noalias() -= p_psi_t * p_psi_t.transpose();

  if (gain != 1.0)
    for (double& d : dstate) d *= gain;
}

}  // namespace

AdaptiveObserver::AdaptiveObserver(std::shared_ptr<RegressionModel> model, ObserverConfig cfg)
    : model_(std::move(model)), cfg_(std::move(cfg)) {
  if (!model_) throw ContractViolation("observer needs a regression model");
  layout_ = ObserverLayout{model_->n_v(), model_->n_w(), model_->n_theta()};
  cfg_.validate(layout_.n_theta);
  p0_ = cfg_.initial_covariance(layout_.n_theta);
  const auto nv = static_cast<Eigen::Index>(layout_.n_v);
  const auto nt = static_cast<Eigen::Index>(layout_.n_theta);
  phi_.resize(nv, nt);
  b_.resize(nv);
  err_.resize(nv);
  p_psi_t_.resize(nt, nv);
}

std::vector<double> AdaptiveObserver::initial_state(std::span<const double> v_meas,
                                                    std::span<const double> theta0) const {
  if (v_meas.size() != model_->n_measured()) throw ContractViolation("measured voltage vector has wrong size");
  if (!theta0.empty() && theta0.size() != layout_.n_theta)
    throw ContractViolation("initial parameter estimate has wrong size");
  std::vector<double> s(layout_.size(), 0.0);
  for (std::size_t k = 0; k < layout_.n_v; ++k) s[layout_.v_hat() + k] = v_meas[model_->output_index(k)];
  const auto w = model_->initial_internal_state(v_meas);
  std::copy(w.begin(), w.end(), s.begin() + static_cast<std::ptrdiff_t>(layout_.w_hat()));
  if (!theta0.empty()) std::copy(theta0.begin(), theta0.end(), s.begin() + static_cast<std::ptrdiff_t>(layout_.theta()));
  std::copy(p0_.data(), p0_.data() + p0_.size(), s.begin() + static_cast<std::ptrdiff_t>(layout_.p()));
  return s;
}

void AdaptiveObserver::derivative(std::span<const double> state, std::span<const double> v_meas,
                                  std::span<const double> u, std::span<double> dstate, double gain) {
  field(cfg_, layout_, state, v_meas, u, *model_, dstate, gain, phi_, b_, err_, p_psi_t_);
}

void observer_derivative(const ObserverConfig& cfg, const ObserverLayout& layout, std::span<const double> state,
                         std::span<const double> v_meas, std::span<const double> u, RegressionModel& model,
                         std::span<double> dstate) {
  const auto nv = static_cast<Eigen::Index>(layout.n_v);
  const auto nt = static_cast<Eigen::Index>(layout.n_theta);
  RowMajorMatrix phi(nv, nt);
  Eigen::VectorXd b(nv), err(nv);
  Eigen::MatrixXd p_psi_t(nt, nv);
  field(cfg, layout, state, v_meas, u, model, dstate, 1.0, phi, b, err, p_psi_t);
}

void AdaptiveObserver::symmetrize(std::span<double> state) const {
  const auto nt = static_cast<Eigen::Index>(layout_.n_theta);
  Eigen::Map<Eigen::MatrixXd> p(state.data() + layout_.p(), nt, nt);
  for (Eigen::Index i = 0; i < nt; ++i)
    for (Eigen::Index j = i + 1; j < nt; ++j) {
      const double m = 0.5 * (p(i, j) + p(j, i));
      p(i, j) = m;
      p(j, i) = m;
    }
}

void AdaptiveObserver::check(std::span<const double> state) const {
  for (double x : state)
    if (!std::isfinite(x)) throw NumericalDegradation("observer state is not finite");
  const auto x = view(state);
  if (layout_.n_theta == 0) return;
  const double asym = (x.p - x.p.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-10) throw NumericalDegradation("observer covariance P lost symmetry");
  Eigen::LLT<Eigen::MatrixXd> llt(x.p);
  if (llt.info() != Eigen::Success) throw NumericalDegradation("observer covariance P is not positive definite");
}

NetworkRegressionModel::NetworkRegressionModel(std::shared_ptr<const NetworkModel> model,
                                               std::vector<std::size_t> observed, Parametrisation params)
    : model_(std::move(model)), observed_(std::move(observed)), params_(std::move(params)) {
  if (!model_) throw ContractViolation("regression model needs a network");
  columns_.resize(observed_.size());
  for (std::size_t k = 0; k < observed_.size(); ++k) {
    const std::size_t i = observed_[k];
    if (i >= model_->n_v()) throw ContractViolation("observed neuron index out of range");
    for (std::size_t m = 0; m < k; ++m)
      if (observed_[m] == i) throw ContractViolation("neuron observed twice");
    offsets_.push_back(n_w_);
    n_w_ += model_->layout(i).size;
  }
  std::vector<Parametrisation> local(observed_.size());
  for (std::size_t j = 0; j < params_.size(); ++j) {
    bool placed = false;
    for (std::size_t k = 0; k < observed_.size(); ++k)
      if (observed_[k] == params_[j].neuron) {
        local[k].push_back(params_[j]);
        columns_[k].push_back(j);
        placed = true;
      }
    if (!placed) throw ContractViolation("parameter belongs to an unobserved neuron");
  }
  for (std::size_t k = 0; k < observed_.size(); ++k) regressors_.emplace_back(model_, observed_[k], local[k]);
  std::size_t widest = 0;
  for (const auto& c : columns_) widest = std::max(widest, c.size());
  row_.resize(widest);
}

void NetworkRegressionModel::regressor(std::span<const double> v_meas, std::span<const double> w_hat,
                                       std::span<const double> u, std::span<double> phi, std::span<double> b) {
  const std::size_t nt = params_.size();
  std::fill(phi.begin(), phi.end(), 0.0);
  for (std::size_t k = 0; k < observed_.size(); ++k) {
    const std::size_t i = observed_[k];
    const auto w_i = w_hat.subspan(offsets_[k], model_->layout(i).size);
    const auto& cols = columns_[k];
    std::span<double> row(row_.data(), cols.size());
    b[k] = regressors_[k].evaluate(v_meas, w_i, u[i], row);
    for (std::size_t c = 0; c < cols.size(); ++c) phi[k * nt + cols[c]] = row[c];
  }
}

void NetworkRegressionModel::internal_derivative(std::span<const double> v_meas, std::span<const double> w_hat,
                                                 std::span<double> dw) {
  for (std::size_t k = 0; k < observed_.size(); ++k) {
    const std::size_t i = observed_[k];
    const std::size_t n = model_->layout(i).size;
    model_->neuron_internal_derivative(i, v_meas, w_hat.subspan(offsets_[k], n), dw.subspan(offsets_[k], n));
  }
}

std::vector<double> NetworkRegressionModel::initial_internal_state(std::span<const double> v_meas) const {
  std::vector<double> w(n_w_);
  for (std::size_t k = 0; k < observed_.size(); ++k) {
    const std::size_t i = observed_[k];
    model_->neuron_steady_state(i, v_meas, std::span<double>(w).subspan(offsets_[k], model_->layout(i).size));
  }
  return w;
}

std::vector<std::string> NetworkRegressionModel::parameter_names() const {
  std::vector<std::string> out;
  for (const auto& p : params_) out.push_back(conductance_id(*model_, p) + "_" + std::to_string(p.neuron + 1));
  return out;
}

std::vector<std::string> NetworkRegressionModel::internal_state_names() const {
  const auto all = model_->internal_state_names();
  std::vector<std::string> out;
  for (std::size_t k = 0; k < observed_.size(); ++k) {
    const auto& lay = model_->layout(observed_[k]);
    for (std::size_t j = 0; j < lay.size; ++j) out.push_back(all[lay.offset + j]);
  }
  return out;
}

AdaptiveObserver make_neuron_observer(std::shared_ptr<const NetworkModel> model, std::size_t neuron,
                                      const ObserverConfig& cfg) {
  if (!model || neuron >= model->n_v()) throw ContractViolation("neuron index out of range");
  Parametrisation params = cfg.parametrisation.empty()
                               ? neuron_parametrisation(*model, neuron)
                               : neuron_parametrisation(*model, neuron, cfg.parametrisation);
  auto rm = std::make_shared<NetworkRegressionModel>(model, std::vector<std::size_t>{neuron}, std::move(params));
  return AdaptiveObserver(std::move(rm), cfg);
}

AdaptiveObserver make_network_observer(std::shared_ptr<const NetworkModel> model, const ObserverConfig& cfg) {
  if (!model) throw ContractViolation("observer needs a network");
  std::vector<std::size_t> all(model->n_v());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  auto rm = std::make_shared<NetworkRegressionModel>(model, std::move(all), network_parametrisation(*model));
  return AdaptiveObserver(std::move(rm), cfg);
}

AdaptiveObserver make_synapse_observer(std::shared_ptr<const NetworkModel> model, std::size_t pre, std::size_t post,
                                       const ObserverConfig& cfg) {
  if (!model || pre >= model->n_v() || post >= model->n_v()) throw ContractViolation("neuron index out of range");
  const std::string id = "syn:" + std::to_string(pre + 1);
  Parametrisation params{parse_conductance_id(*model, post, id)};
  auto rm = std::make_shared<NetworkRegressionModel>(model, std::vector<std::size_t>{post}, std::move(params));
  ObserverConfig c = cfg;
  c.parametrisation.clear();
  return AdaptiveObserver(std::move(rm), c);
}

}  // namespace neuromod
