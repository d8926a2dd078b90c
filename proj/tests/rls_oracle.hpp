#pragma once

// Random sinusoidal regression with a closed-form filtered regressor, and the
// batch least-squares solution the observer must reproduce for gamma = 1.

#include <Eigen/Dense>
#include <cmath>
#include <memory>
#include <numbers>
#include <random>
#include <span>
#include <vector>

#include "neuromod/observer.hpp"
#include "neuromod/sim.hpp"

namespace rls_oracle {

using namespace neuromod;

// Phi(t)_ij = a_ij + b_ij sin(w_ij t + p_ij), b(v) = -v. The input vector carries t.
class SineRegression : public RegressionModel {
 public:
  SineRegression(std::size_t n_v, std::size_t n_theta, std::mt19937& rng) : n_v_(n_v), n_theta_(n_theta) {
    std::uniform_real_distribution<double> a(-1.0, 1.0), b(0.5, 1.5), w(0.2, 2.0), p(0.0, 2 * std::numbers::pi);
    const std::size_t n = n_v * n_theta;
    for (std::size_t k = 0; k < n; ++k) {
      a_.push_back(a(rng));
      b_.push_back(b(rng));
      w_.push_back(w(rng));
      p_.push_back(p(rng));
    }
  }

  std::size_t n_measured() const override { return n_v_; }
  std::size_t n_inputs() const override { return 1; }
  std::size_t n_v() const override { return n_v_; }
  std::size_t n_w() const override { return 0; }
  std::size_t n_theta() const override { return n_theta_; }
  std::size_t output_index(std::size_t k) const override { return k; }

  void regressor(std::span<const double> v, std::span<const double>, std::span<const double> u, std::span<double> phi,
                 std::span<double> b) override {
    for (std::size_t k = 0; k < phi.size(); ++k) phi[k] = a_[k] + b_[k] * std::sin(w_[k] * u[0] + p_[k]);
    for (std::size_t i = 0; i < n_v_; ++i) b[i] = -v[i];
  }
  void internal_derivative(std::span<const double>, std::span<const double>, std::span<double>) override {}
  std::vector<double> initial_internal_state(std::span<const double>) const override { return {}; }

  // Closed-form filtered regressor: solution of dPsi = -gamma Psi + Phi, Psi(0) = 0.
  Eigen::MatrixXd psi(double t, double gamma) const {
    Eigen::MatrixXd out(n_v_, n_theta_);
    const double decay = std::exp(-gamma * t);
    for (std::size_t i = 0; i < n_v_; ++i)
      for (std::size_t j = 0; j < n_theta_; ++j) {
        const std::size_t k = i * n_theta_ + j;
        const double d = gamma * gamma + w_[k] * w_[k];
        auto xp = [&](double s) { return (gamma * std::sin(w_[k] * s + p_[k]) - w_[k] * std::cos(w_[k] * s + p_[k])) / d; };
        out(i, j) = a_[k] / gamma * (1 - decay) + b_[k] * (xp(t) - xp(0.0) * decay);
      }
    return out;
  }

 private:
  std::size_t n_v_, n_theta_;
  std::vector<double> a_, b_, w_, p_;
};

// Plant dv = Phi(t) theta - v observed by one adaptive observer.
class SineSystem : public OdeSystem {
 public:
  SineSystem(std::shared_ptr<SineRegression> model, ObserverConfig cfg, Eigen::VectorXd theta, std::vector<double> v0)
      : model_(model), obs_(model, std::move(cfg)), theta_(std::move(theta)), v0_(std::move(v0)) {
    phi_.resize(model->n_v() * model->n_theta());
    b_.resize(model->n_v());
  }

  const AdaptiveObserver& observer() const { return obs_; }
  std::size_t dimension() const override { return v0_.size() + obs_.state_size(); }
  std::vector<double> initial_state() const override {
    auto x = v0_;
    const auto s = obs_.initial_state(v0_);
    x.insert(x.end(), s.begin(), s.end());
    return x;
  }
  void derivative(double t, std::span<const double> x, std::span<double> dx) override {
    const std::size_t n = v0_.size();
    const double u[1] = {t};
    model_->regressor(x.first(n), {}, u, phi_, b_);
    for (std::size_t i = 0; i < n; ++i) {
      dx[i] = b_[i];
      for (Eigen::Index j = 0; j < theta_.size(); ++j) dx[i] += phi_[i * theta_.size() + j] * theta_[j];
    }
    obs_.derivative(x.subspan(n), x.first(n), u, dx.subspan(n));
  }
  void end_step(const StepInfo&, std::span<double> x) override { obs_.symmetrize(x.subspan(v0_.size())); }
  std::vector<std::string> signal_names() const override { return {}; }
  void record(const StepInfo&, std::span<const double>, std::span<double>) override {}

 private:
  std::shared_ptr<SineRegression> model_;
  AdaptiveObserver obs_;
  Eigen::VectorXd theta_;
  std::vector<double> v0_;
  std::vector<double> phi_, b_;
};

// Runs the system with fixed-step RK4 and returns the final state.
inline std::vector<double> integrate(OdeSystem& sys, double t_end, double dt) {
  auto x = sys.initial_state();
  Rk4Workspace ws(x.size());
  const auto steps = static_cast<std::int64_t>(std::llround(t_end / dt));
  auto f = [&](double t, std::span<const double> y, std::span<double> dy) { sys.derivative(t, y, dy); };
  for (std::int64_t k = 0; k < steps; ++k) {
    ws.step(f, x, k * dt, dt);
    sys.end_step({k + 1, (k + 1) * dt}, x);
  }
  return x;
}

// Batch exponentially weighted least squares on the filtered regression
// y = Psi theta with prior weight exp(-alpha t) P0^-1 around theta0:
//   R(t) = exp(-alpha t) P0^-1 + int_0^t exp(-alpha (t - s)) Psi^T Psi ds
//   theta_ls = R^-1 (exp(-alpha t) P0^-1 theta0 + (R - exp(-alpha t) P0^-1) theta)
inline Eigen::VectorXd batch_least_squares(const SineRegression& m, double gamma, double alpha, double p0, double t,
                                    const Eigen::VectorXd& theta, const Eigen::VectorXd& theta0) {
  const std::size_t n = 20000;  // Simpson panels
  const double h = t / n;
  const auto nt = theta.size();
  Eigen::MatrixXd integral = Eigen::MatrixXd::Zero(nt, nt);
  for (std::size_t k = 0; k <= n; ++k) {
    const double s = k * h;
    const double w = (k == 0 || k == n) ? 1.0 : (k % 2 ? 4.0 : 2.0);
    const Eigen::MatrixXd ps = m.psi(s, gamma);
    integral += w * std::exp(-alpha * (t - s)) * ps.transpose() * ps;
  }
  integral *= h / 3.0;
  const Eigen::MatrixXd prior = std::exp(-alpha * t) / p0 * Eigen::MatrixXd::Identity(nt, nt);
  const Eigen::MatrixXd r = prior + integral;
  return r.ldlt().solve(prior * theta0 + integral * theta);
}

}  // namespace rls_oracle
