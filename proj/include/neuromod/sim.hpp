#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace neuromod {

struct SimConfig {
  double t_start = 0.0;
  double t_end = 0.0;
  double dt = 0.005;
  std::int64_t record_stride = 100;

  // ConfigError unless dt > 0, t_end >= t_start on the step grid, stride >= 1.
  void validate() const;
  std::int64_t steps() const;
  // Exact grid time t_start + k*dt.
  double time_at(std::int64_t step) const { return t_start + static_cast<double>(step) * dt; }
  // Step index of a grid time; ConfigError if `t` is off the grid.
  std::int64_t step_of(double t) const;

  bool operator==(const SimConfig&) const = default;
};

struct Breakpoint {
  double t = 0.0;
  double value = 0.0;

  bool operator==(const Breakpoint&) const = default;
};

// Signal held constant between strictly increasing breakpoints.
class PiecewiseInput {
 public:
  PiecewiseInput() = default;
  explicit PiecewiseInput(std::vector<Breakpoint> breakpoints);
  static PiecewiseInput constant(double t_start, double value) { return PiecewiseInput({{t_start, value}}); }

  const std::vector<Breakpoint>& breakpoints() const { return points_; }
  double value_at(double t) const;

  // Snaps breakpoints to step indices. ConfigError if a breakpoint is off the
  // grid or the first breakpoint is after t_start.
  void bind(const SimConfig& cfg);
  double value_at_step(std::int64_t step) const;

  bool operator==(const PiecewiseInput& o) const { return points_ == o.points_; }

 private:
  std::vector<Breakpoint> points_;
  std::vector<std::int64_t> steps_;
};

struct StepInfo {
  std::int64_t step = 0;
  double t = 0.0;
};

// A concatenated ODE (plant, observers, controller states) integrated as one
// vector. Implementations keep inputs and scratch space; integration state
// lives entirely in the vector passed to the callbacks.
class OdeSystem {
 public:
  virtual ~OdeSystem() = default;

  virtual std::size_t dimension() const = 0;
  virtual std::vector<double> initial_state() const = 0;

  virtual void prepare(const SimConfig& /*cfg*/) {}
  // Latches step-constant signals (inputs, gains) for the step starting at `info`.
  virtual void begin_step(const StepInfo& /*info*/) {}
  virtual void derivative(double t, std::span<const double> x, std::span<double> dx) = 0;
  // Post-step projection, e.g. covariance symmetrisation.
  virtual void end_step(const StepInfo& /*info*/, std::span<double> /*x*/) {}

  virtual std::vector<std::string> signal_names() const = 0;
  // Fills one trajectory row. May throw NumericalDegradation.
  virtual void record(const StepInfo& info, std::span<const double> x, std::span<double> row) = 0;
};

class Trajectory {
 public:
  Trajectory() = default;
  explicit Trajectory(std::vector<std::string> names);

  void append(double t, std::span<const double> row);

  std::size_t size() const { return time_.size(); }
  const std::vector<double>& time() const { return time_; }
  const std::vector<std::string>& names() const { return names_; }
  const std::vector<double>& column(std::size_t k) const { return columns_[k]; }
  // ContractViolation if absent.
  const std::vector<double>& column(const std::string& name) const;
  bool has(const std::string& name) const;
  std::size_t index_of(const std::string& name) const;

  // Sample index range [first, last) with first_time <= t < last_time.
  std::pair<std::size_t, std::size_t> window(double first_time, double last_time) const;

 private:
  std::vector<double> time_;
  std::vector<std::string> names_;
  std::vector<std::vector<double>> columns_;
};

using DerivativeFn = std::function<void(double, std::span<const double>, std::span<double>)>;

// Scratch buffers for in-place RK4 stepping.
class Rk4Workspace {
 public:
  explicit Rk4Workspace(std::size_t n = 0) { resize(n); }
  void resize(std::size_t n);

  // Classical RK4 update of `x` in place. Throws DivergenceError naming the
  // first non-finite derivative component.
  template <class F>
  void step(F&& f, std::span<double> x, double t, double dt);

 private:
  std::vector<double> k1_, k2_, k3_, k4_, tmp_;
};

std::vector<double> rk4_step(const DerivativeFn& f, std::span<const double> x, double t, double dt);

// Integrates from cfg.t_start to cfg.t_end, recording every record_stride steps
// (including the initial sample). Throws DivergenceError on non-finite values.
Trajectory simulate(OdeSystem& system, const SimConfig& cfg);
Trajectory simulate(OdeSystem& system, const SimConfig& cfg, std::vector<double> x0);
// Integrates from x0 at cfg.t_start without recording and returns the state at cfg.t_end.
std::vector<double> advance(OdeSystem& system, const SimConfig& cfg, std::vector<double> x0);

struct ConvergenceReport {
  double dt = 0.0;
  double max_deviation = 0.0;
  // Excludes samples within `upstroke_window` of an upward threshold crossing
  // in either run.
  double max_deviation_away_from_upstrokes = 0.0;
  std::size_t samples_compared = 0;
  std::size_t samples_excluded = 0;
};

struct HalvedStepOptions {
  std::vector<std::string> voltage_signals;  // empty: every signal starting with "v_"
  double spike_threshold = 0.0;
  double upstroke_window = 5.0;
  // Rerun segments of this length starting at each restart time, from the
  // coarse state there. 0 compares the whole run.
  double horizon = 0.0;
  std::vector<double> restarts;  // empty: t_start only
};

// Voltage deviation between two runs recorded on the same grid; `dt` is the
// coarse step reported back.
ConvergenceReport compare_trajectories(const Trajectory& a, const Trajectory& b, double dt,
                                       const HalvedStepOptions& opts = {});
// cfg with step dt_fine and the record stride scaled to keep the same grid.
SimConfig refined(const SimConfig& cfg, double dt_fine);

// Re-runs the system at dt/2 on the same record grid and compares voltages,
// over the whole run or over the short segments set in `opts`.
ConvergenceReport halvedstep_check(OdeSystem& system, const SimConfig& cfg, const HalvedStepOptions& opts = {});
// Same comparison between two explicit step sizes (dt_fine must divide dt).
ConvergenceReport step_comparison(OdeSystem& system, const SimConfig& cfg, double dt_fine,
                                  const HalvedStepOptions& opts = {});

}  // namespace neuromod

#include "neuromod/detail/rk4_impl.hpp"
