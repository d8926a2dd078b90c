#pragma once

#include <cmath>

#include "neuromod/errors.hpp"

namespace neuromod {

namespace detail {
inline void check_finite(std::span<const double> d, double t) {
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (!std::isfinite(d[i])) throw DivergenceError(t, i, "non-finite derivative");
  }
}
}  // namespace detail

template <class F>
void Rk4Workspace::step(F&& f, std::span<double> x, double t, double dt) {
  const std::size_t n = x.size();
  if (k1_.size() != n) resize(n);
  const double half = 0.5 * dt;

  f(t, std::span<const double>(x), std::span<double>(k1_));
  detail::check_finite(k1_, t);
  for (std::size_t i = 0; i < n; ++i) tmp_[i] = x[i] + half * k1_[i];
  f(t + half, std::span<const double>(tmp_), std::span<double>(k2_));
  detail::check_finite(k2_, t);
  for (std::size_t i = 0; i < n; ++i) tmp_[i] = x[i] + half * k2_[i];
  f(t + half, std::span<const double>(tmp_), std::span<double>(k3_));
  detail::check_finite(k3_, t);
  for (std::size_t i = 0; i < n; ++i) tmp_[i] = x[i] + dt * k3_[i];
  f(t + dt, std::span<const double>(tmp_), std::span<double>(k4_));
  detail::check_finite(k4_, t);

  for (std::size_t i = 0; i < n; ++i) {
    x[i] += dt * ((k1_[i] + 2.0 * k2_[i] + 2.0 * k3_[i] + k4_[i]) / 6.0);
  }
}

}  // namespace neuromod
