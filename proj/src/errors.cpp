#include "neuromod/errors.hpp"

#include <sstream>

namespace neuromod {

namespace {
std::string divergence_message(double t, std::size_t component, const std::string& context) {
  std::ostringstream os;
  os << "divergence at t=" << t << " in state component " << component;
  if (!context.empty()) os << " (" << context << ")";
  return os.str();
}
}  // namespace

DivergenceError::DivergenceError(double t, std::size_t component, const std::string& context)
    : std::runtime_error(divergence_message(t, component, context)), t_(t), component_(component) {}

}  // namespace neuromod
