#include "neuromod/rate_functions.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <string>

#include "neuromod/errors.hpp"

namespace neuromod {

namespace {

// x / (exp(-x/10) - 1), continuous through x = 0 where the limit is -10.
double ratio_expm1_neg(double x) {
  if (std::abs(x) < kSingularityGuard) return -10.0;
  return x / std::expm1(-x / 10.0);
}

// x / (1 - exp(-x/10)), limit 10 at x = 0.
double ratio_one_minus_exp(double x) {
  if (std::abs(x) < kSingularityGuard) return 10.0;
  return x / -std::expm1(-x / 10.0);
}

double alpha_m_na(double v) { return -0.025 * ratio_expm1_neg(v + 40.0); }
double beta_m_na(double v) { return std::exp(-(v + 65.0) / 18.0); }
double alpha_h_na(double v) { return 0.0175 * std::exp(-(v + 65.0) / 20.0); }
double beta_h_na(double v) { return 0.25 / (1.0 + std::exp(-(v + 35.0) / 10.0)); }
double alpha_m_k(double v) { return 0.0025 * ratio_one_minus_exp(v + 55.0); }
double beta_m_k(double v) { return 0.03125 * std::exp(-(v + 65.0) / 80.0); }
double alpha_m_h(double v) { return std::exp(-14.59 - 0.086 * v); }
double beta_m_h(double v) { return std::exp(-1.87 + 0.0701 * v); }

double logistic(double z) { return 1.0 / (1.0 + std::exp(z)); }

// Rate multiplier of the sodium and delayed-rectifier gates: tau = 1 / (k (alpha + beta)).
constexpr double kFastGateRate = 5.0;

constexpr std::array<RateFnInfo, kRateFnCount> kRegistry{{
    {RateFn::AlphaMNa, "alpha_m_Na", RateFnFamily::Rate},
    {RateFn::BetaMNa, "beta_m_Na", RateFnFamily::Rate},
    {RateFn::AlphaHNa, "alpha_h_Na", RateFnFamily::Rate},
    {RateFn::BetaHNa, "beta_h_Na", RateFnFamily::Rate},
    {RateFn::AlphaMK, "alpha_m_K", RateFnFamily::Rate},
    {RateFn::BetaMK, "beta_m_K", RateFnFamily::Rate},
    {RateFn::AlphaMH, "alpha_m_H", RateFnFamily::Rate},
    {RateFn::BetaMH, "beta_m_H", RateFnFamily::Rate},
    {RateFn::SigmaMNa, "sigma_m_Na", RateFnFamily::SteadyState},
    {RateFn::SigmaHNa, "sigma_h_Na", RateFnFamily::SteadyState},
    {RateFn::SigmaMK, "sigma_m_K", RateFnFamily::SteadyState},
    {RateFn::SigmaMH, "sigma_m_H", RateFnFamily::SteadyState},
    {RateFn::SigmaMA, "sigma_m_A", RateFnFamily::SteadyState},
    {RateFn::SigmaHA, "sigma_h_A", RateFnFamily::SteadyState},
    {RateFn::SigmaMT, "sigma_m_T", RateFnFamily::SteadyState},
    {RateFn::SigmaHT, "sigma_h_T", RateFnFamily::SteadyState},
    {RateFn::SigmaML, "sigma_m_L", RateFnFamily::SteadyState},
    {RateFn::SigmaMKIR, "sigma_m_KIR", RateFnFamily::SteadyState},
    {RateFn::TauMNa, "tau_m_Na", RateFnFamily::TimeConstant},
    {RateFn::TauHNa, "tau_h_Na", RateFnFamily::TimeConstant},
    {RateFn::TauMK, "tau_m_K", RateFnFamily::TimeConstant},
    {RateFn::TauMH, "tau_m_H", RateFnFamily::TimeConstant},
    {RateFn::TauML, "tau_m_L", RateFnFamily::TimeConstant},
    {RateFn::TauMT, "tau_m_T", RateFnFamily::TimeConstant},
    {RateFn::TauMA, "tau_m_A", RateFnFamily::TimeConstant},
    {RateFn::TauHA, "tau_h_A", RateFnFamily::TimeConstant},
    {RateFn::TauHT, "tau_h_T", RateFnFamily::TimeConstant},
}};

}  // namespace

const std::array<RateFnInfo, kRateFnCount>& rate_function_registry() { return kRegistry; }

std::string_view rate_function_name(RateFn id) { return kRegistry[static_cast<std::size_t>(id)].name; }

RateFnFamily rate_function_family(RateFn id) { return kRegistry[static_cast<std::size_t>(id)].family; }

std::optional<RateFn> find_rate_function(std::string_view name) {
  for (const auto& info : kRegistry) {
    if (info.name == name) return info.id;
  }
  return std::nullopt;
}

RateFn rate_function_from_name(std::string_view name) {
  if (auto id = find_rate_function(name)) return *id;
  throw ConfigError("unknown rate function '" + std::string(name) + "'");
}

double sigmoid(double v, double offset, double slope) { return logistic(-(v - offset) / slope); }

double tau_h_a_lower_branch(double v) {
  return 1.0 / (0.2 * (std::exp((v + 46.05) / 5.0) + std::exp((v + 238.4) / -37.45)));
}
double tau_h_a_upper_branch(double /*v*/) { return 19.0; }
double tau_h_t_lower_branch(double v) { return std::exp((v + 467.0) / 66.6); }
double tau_h_t_upper_branch(double v) { return std::exp(-(v + 21.88) / 10.2) + 28.0; }

namespace {

double evaluate(RateFn id, double v) {
  switch (id) {
    case RateFn::AlphaMNa: return alpha_m_na(v);
    case RateFn::BetaMNa: return beta_m_na(v);
    case RateFn::AlphaHNa: return alpha_h_na(v);
    case RateFn::BetaHNa: return beta_h_na(v);
    case RateFn::AlphaMK: return alpha_m_k(v);
    case RateFn::BetaMK: return beta_m_k(v);
    case RateFn::AlphaMH: return alpha_m_h(v);
    case RateFn::BetaMH: return beta_m_h(v);

    case RateFn::SigmaMNa: {
      const double a = alpha_m_na(v);
      return a / (a + beta_m_na(v));
    }
    case RateFn::SigmaHNa: {
      const double a = alpha_h_na(v);
      return a / (a + beta_h_na(v));
    }
    case RateFn::SigmaMK: {
      const double a = alpha_m_k(v - 10.0);
      return a / (a + beta_m_k(v - 10.0));
    }
    case RateFn::SigmaMH: {
      const double a = alpha_m_h(v);
      return a / (a + beta_m_h(v));
    }
    case RateFn::SigmaMA: return logistic(-(v + 90.0) / 8.5);
    case RateFn::SigmaHA: return logistic((v + 78.0) / 6.0);
    case RateFn::SigmaMT: return logistic(-(v + 57.0) / 6.2);
    case RateFn::SigmaHT: return logistic((v + 81.0) / 4.03);
    case RateFn::SigmaML: return logistic(-(v + 55.0) / 3.0);
    case RateFn::SigmaMKIR: return logistic((v + 107.9) / 9.7);

    case RateFn::TauMNa: return 1.0 / (kFastGateRate * (alpha_m_na(v) + beta_m_na(v)));
    case RateFn::TauHNa: return 1.0 / (kFastGateRate * (alpha_h_na(v) + beta_h_na(v)));
    case RateFn::TauMK: return 1.0 / (kFastGateRate * (alpha_m_k(v - 10.0) + beta_m_k(v - 10.0)));
    case RateFn::TauMH: return 1.0 / (alpha_m_h(v) + beta_m_h(v));
    case RateFn::TauML: {
      const double d = v + 45.0;
      return 72.0 * std::exp(-d * d / 400.0) + 6.0;
    }
    case RateFn::TauMT:
      return 0.612 + 1.0 / (std::exp(-(v + 131.6) / 16.7) + std::exp((v + 16.8) / 18.2));
    case RateFn::TauMA:
      return 0.37 + 1.0 / (0.2 * (std::exp((v + 35.82) / 19.697) + std::exp((v + 79.69) / -12.7)));
    case RateFn::TauHA: return v < kTauHABreak ? tau_h_a_lower_branch(v) : tau_h_a_upper_branch(v);
    case RateFn::TauHT: return v < kTauHTBreak ? tau_h_t_lower_branch(v) : tau_h_t_upper_branch(v);
  }
  throw ContractViolation("rate_function: invalid identifier");
}

// Plants and their observers evaluate the same kinetics at the same measured
// voltages within one derivative call; remember the last few evaluations.
constexpr std::size_t kMemoSlots = 8;

struct Memo {
  std::array<double, kMemoSlots> v;
  std::array<double, kMemoSlots> value{};
  std::size_t next = 0;
  Memo() { v.fill(std::numeric_limits<double>::quiet_NaN()); }
};

thread_local std::array<Memo, kRateFnCount> memo;

}  // namespace

double rate_function(RateFn id, double v) {
  const auto k = static_cast<std::size_t>(id);
  if (k >= kRateFnCount) throw ContractViolation("rate_function: invalid identifier");
  Memo& m = memo[k];
  for (std::size_t j = 0; j < kMemoSlots; ++j)
    if (m.v[j] == v) return m.value[j];
  const double out = evaluate(id, v);
  m.v[m.next] = v;
  m.value[m.next] = out;
  m.next = (m.next + 1) % kMemoSlots;
  return out;
}

}  // namespace neuromod
