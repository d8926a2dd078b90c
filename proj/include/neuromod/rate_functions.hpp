#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>

namespace neuromod {

// Closed registry of voltage-dependent rate functions used by the channel
// library. Every gate refers to its kinetics by one of these identifiers.
enum class RateFn : std::uint8_t {
  // alpha/beta transition rates
  AlphaMNa,
  BetaMNa,
  AlphaHNa,
  BetaHNa,
  AlphaMK,
  BetaMK,
  AlphaMH,
  BetaMH,
  // steady-state activation functions
  SigmaMNa,
  SigmaHNa,
  SigmaMK,
  SigmaMH,
  SigmaMA,
  SigmaHA,
  SigmaMT,
  SigmaHT,
  SigmaML,
  SigmaMKIR,
  // time constants
  TauMNa,
  TauHNa,
  TauMK,
  TauMH,
  TauML,
  TauMT,
  TauMA,
  TauHA,
  TauHT,
};

inline constexpr std::size_t kRateFnCount = static_cast<std::size_t>(RateFn::TauHT) + 1;

enum class RateFnFamily : std::uint8_t { Rate, SteadyState, TimeConstant };

struct RateFnInfo {
  RateFn id;
  std::string_view name;
  RateFnFamily family;
};

const std::array<RateFnInfo, kRateFnCount>& rate_function_registry();

std::string_view rate_function_name(RateFn id);

// Throws ConfigError for names not in the registry.
RateFn rate_function_from_name(std::string_view name);
std::optional<RateFn> find_rate_function(std::string_view name);

RateFnFamily rate_function_family(RateFn id);

double rate_function(RateFn id, double v);

// Removable singularities of the alpha forms sit at these voltages.
inline constexpr double kAlphaMNaSingularity = -40.0;
inline constexpr double kAlphaMKSingularity = -55.0;
// Distance from a singular voltage below which the analytic limit is returned.
inline constexpr double kSingularityGuard = 1e-6;

// Voltage at which the piecewise time constants switch branch.
inline constexpr double kTauHABreak = -63.0;
inline constexpr double kTauHTBreak = -80.0;

// Individual branches of the piecewise time constants, exposed so the
// discontinuity at the break can be measured.
double tau_h_a_lower_branch(double v);
double tau_h_a_upper_branch(double v);
double tau_h_t_lower_branch(double v);
double tau_h_t_upper_branch(double v);

// Logistic sigmoid 1 / (1 + exp(-(v - offset) / slope)).
double sigmoid(double v, double offset, double slope);

}  // namespace neuromod
