#include "neuromod/sim.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "neuromod/errors.hpp"

namespace neuromod {

namespace {

// Relative tolerance for deciding that a time lies on the step grid.
constexpr double kGridTolerance = 1e-9;

std::int64_t snap(double t, double t0, double dt, const char* what) {
  const double k = (t - t0) / dt;
  const double r = std::round(k);
  if (std::abs(k - r) > kGridTolerance * std::max(1.0, std::abs(k))) {
    throw ConfigError(std::string(what) + " at t=" + std::to_string(t) + " is not on the step grid");
  }
  return static_cast<std::int64_t>(r);
}

}  // namespace

void SimConfig::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("dt must be > 0");
  if (!(t_end >= t_start)) throw ConfigError("t_end must be >= t_start");
  if (record_stride < 1) throw ConfigError("record_stride must be >= 1");
  snap(t_end, t_start, dt, "t_end");
}

std::int64_t SimConfig::steps() const { return snap(t_end, t_start, dt, "t_end"); }

std::int64_t SimConfig::step_of(double t) const { return snap(t, t_start, dt, "time"); }

PiecewiseInput::PiecewiseInput(std::vector<Breakpoint> breakpoints) : points_(std::move(breakpoints)) {
  if (points_.empty()) throw ConfigError("piecewise input needs at least one breakpoint");
  for (std::size_t k = 1; k < points_.size(); ++k) {
    if (!(points_[k].t > points_[k - 1].t)) throw ConfigError("input breakpoints must be strictly increasing");
  }
  for (const auto& p : points_) {
    if (!std::isfinite(p.t) || !std::isfinite(p.value)) throw ConfigError("input breakpoints must be finite");
  }
}

double PiecewiseInput::value_at(double t) const {
  double v = points_.front().value;
  for (const auto& p : points_) {
    if (p.t <= t) v = p.value;
    else break;
  }
  return v;
}

void PiecewiseInput::bind(const SimConfig& cfg) {
  steps_.clear();
  if (points_.empty()) throw ConfigError("piecewise input needs at least one breakpoint");
  if (snap(points_.front().t, cfg.t_start, cfg.dt, "first input breakpoint") > 0) {
    throw ConfigError("first input breakpoint must not be after the simulation start");
  }
  for (const auto& p : points_) steps_.push_back(snap(p.t, cfg.t_start, cfg.dt, "input breakpoint"));
}

double PiecewiseInput::value_at_step(std::int64_t step) const {
  if (steps_.size() != points_.size()) throw ContractViolation("PiecewiseInput used before bind()");
  double v = points_.front().value;
  for (std::size_t k = 0; k < steps_.size() && steps_[k] <= step; ++k) v = points_[k].value;
  return v;
}

Trajectory::Trajectory(std::vector<std::string> names) : names_(std::move(names)), columns_(names_.size()) {}

void Trajectory::append(double t, std::span<const double> row) {
  if (row.size() != columns_.size()) throw ContractViolation("Trajectory::append: row width mismatch");
  time_.push_back(t);
  for (std::size_t k = 0; k < row.size(); ++k) columns_[k].push_back(row[k]);
}

bool Trajectory::has(const std::string& name) const {
  return std::find(names_.begin(), names_.end(), name) != names_.end();
}

std::size_t Trajectory::index_of(const std::string& name) const {
  const auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) throw ContractViolation("trajectory has no signal '" + name + "'");
  return static_cast<std::size_t>(it - names_.begin());
}

const std::vector<double>& Trajectory::column(const std::string& name) const { return columns_[index_of(name)]; }

std::pair<std::size_t, std::size_t> Trajectory::window(double first_time, double last_time) const {
  const auto lo = std::lower_bound(time_.begin(), time_.end(), first_time);
  const auto hi = std::lower_bound(time_.begin(), time_.end(), last_time);
  return {static_cast<std::size_t>(lo - time_.begin()), static_cast<std::size_t>(hi - time_.begin())};
}

void Rk4Workspace::resize(std::size_t n) {
  k1_.assign(n, 0.0);
  k2_.assign(n, 0.0);
  k3_.assign(n, 0.0);
  k4_.assign(n, 0.0);
  tmp_.assign(n, 0.0);
}

std::vector<double> rk4_step(const DerivativeFn& f, std::span<const double> x, double t, double dt) {
  std::vector<double> out(x.begin(), x.end());
  Rk4Workspace ws(out.size());
  ws.step(f, std::span<double>(out), t, dt);
  return out;
}

namespace {

// Integrates x in place over cfg; `traj` receives every record_stride-th sample when given.
void integrate(OdeSystem& system, const SimConfig& cfg, std::vector<double>& x, Trajectory* traj) {
  cfg.validate();
  if (x.size() != system.dimension()) throw ContractViolation("simulate: initial state has wrong dimension");
  system.prepare(cfg);
  const std::int64_t n_steps = cfg.steps();

  std::vector<double> row(traj ? traj->names().size() : 0);
  Rk4Workspace ws(x.size());
  auto rhs = [&system](double t, std::span<const double> s, std::span<double> d) { system.derivative(t, s, d); };

  auto record = [&](const StepInfo& info) {
    system.record(info, x, row);
    for (std::size_t k = 0; k < row.size(); ++k) {
      if (!std::isfinite(row[k])) throw DivergenceError(info.t, k, "non-finite recorded signal " + traj->names()[k]);
    }
    traj->append(info.t, row);
  };

  StepInfo info{0, cfg.time_at(0)};
  system.begin_step(info);
  if (traj) record(info);
  for (std::int64_t k = 0; k < n_steps; ++k) {
    info = {k, cfg.time_at(k)};
    system.begin_step(info);
    ws.step(rhs, std::span<double>(x), info.t, cfg.dt);
    const StepInfo next{k + 1, cfg.time_at(k + 1)};
    system.end_step(next, x);
    if (traj && (k + 1) % cfg.record_stride == 0) {
      system.begin_step(next);
      record(next);
    }
  }
}

}  // namespace

Trajectory simulate(OdeSystem& system, const SimConfig& cfg) { return simulate(system, cfg, system.initial_state()); }

Trajectory simulate(OdeSystem& system, const SimConfig& cfg, std::vector<double> x) {
  Trajectory traj(system.signal_names());
  integrate(system, cfg, x, &traj);
  return traj;
}

std::vector<double> advance(OdeSystem& system, const SimConfig& cfg, std::vector<double> x) {
  integrate(system, cfg, x, nullptr);
  return x;
}

ConvergenceReport compare_trajectories(const Trajectory& a, const Trajectory& b, double dt,
                                       const HalvedStepOptions& opts) {
  std::vector<std::string> names = opts.voltage_signals;
  if (names.empty()) {
    for (const auto& n : a.names()) {
      if (n.starts_with("v_")) names.push_back(n);
    }
  }
  const std::size_t n = std::min(a.size(), b.size());
  const auto& t = a.time();

  // Mark samples near an upward threshold crossing in either run.
  std::vector<bool> excluded(n, false);
  auto mark = [&](const std::vector<double>& trace) {
    for (std::size_t k = 1; k < n; ++k) {
      if (trace[k - 1] < opts.spike_threshold && trace[k] >= opts.spike_threshold) {
        const auto first = std::lower_bound(t.begin(), t.begin() + static_cast<std::ptrdiff_t>(n), t[k] - opts.upstroke_window);
        const auto last = std::upper_bound(first, t.begin() + static_cast<std::ptrdiff_t>(n), t[k] + opts.upstroke_window);
        for (auto it = first; it != last; ++it) excluded[static_cast<std::size_t>(it - t.begin())] = true;
      }
    }
  };
  for (const auto& name : names) {
    mark(a.column(name));
    mark(b.column(name));
  }

  ConvergenceReport rep;
  rep.dt = dt;
  for (const auto& name : names) {
    const auto& ca = a.column(name);
    const auto& cb = b.column(name);
    for (std::size_t k = 0; k < n; ++k) {
      const double d = std::abs(ca[k] - cb[k]);
      rep.max_deviation = std::max(rep.max_deviation, d);
      if (!excluded[k]) rep.max_deviation_away_from_upstrokes = std::max(rep.max_deviation_away_from_upstrokes, d);
    }
  }
  for (std::size_t k = 0; k < n; ++k) {
    if (excluded[k]) ++rep.samples_excluded;
    else ++rep.samples_compared;
  }
  return rep;
}

SimConfig refined(const SimConfig& cfg, double dt_fine) {
  cfg.validate();
  const double ratio_d = cfg.dt / dt_fine;
  const auto ratio = static_cast<std::int64_t>(std::llround(ratio_d));
  if (ratio < 1 || std::abs(ratio_d - static_cast<double>(ratio)) > 1e-9) {
    throw ConfigError("fine step must divide the coarse step");
  }
  SimConfig fine = cfg;
  fine.dt = dt_fine;
  fine.record_stride = cfg.record_stride * static_cast<std::size_t>(ratio);
  return fine;
}

ConvergenceReport step_comparison(OdeSystem& system, const SimConfig& cfg, double dt_fine,
                                  const HalvedStepOptions& opts) {
  const SimConfig fine = refined(cfg, dt_fine);
  const Trajectory a = simulate(system, cfg);
  const Trajectory b = simulate(system, fine);
  return compare_trajectories(a, b, cfg.dt, opts);
}

ConvergenceReport halvedstep_check(OdeSystem& system, const SimConfig& cfg, const HalvedStepOptions& opts) {
  if (opts.horizon == 0.0 && opts.restarts.empty()) return step_comparison(system, cfg, cfg.dt / 2.0, opts);
  if (!(opts.horizon > 0.0)) throw ConfigError("halved-step horizon must be > 0");
  cfg.validate();
  std::vector<double> starts = opts.restarts;
  if (starts.empty()) starts.push_back(cfg.t_start);
  std::sort(starts.begin(), starts.end());
  starts.erase(std::unique(starts.begin(), starts.end()), starts.end());

  ConvergenceReport total;
  total.dt = cfg.dt;
  std::vector<double> x = system.initial_state();
  double t = cfg.t_start;
  for (double start : starts) {
    if (start < cfg.t_start || start >= cfg.t_end) throw ConfigError("halved-step restart outside the run");
    cfg.step_of(start);
    if (start > t) x = advance(system, SimConfig{t, start, cfg.dt, cfg.record_stride}, x);
    t = start;
    // Segment end on the record grid, clipped to the run.
    const double record_dt = cfg.dt * static_cast<double>(cfg.record_stride);
    const double end = std::min(cfg.t_end, start + std::ceil(opts.horizon / record_dt - 1e-9) * record_dt);
    const SimConfig seg{start, end, cfg.dt, cfg.record_stride};
    const Trajectory a = simulate(system, seg, x);
    const Trajectory b = simulate(system, refined(seg, cfg.dt / 2.0), x);
    const auto rep = compare_trajectories(a, b, cfg.dt, opts);
    total.max_deviation = std::max(total.max_deviation, rep.max_deviation);
    total.max_deviation_away_from_upstrokes =
        std::max(total.max_deviation_away_from_upstrokes, rep.max_deviation_away_from_upstrokes);
    total.samples_compared += rep.samples_compared;
    total.samples_excluded += rep.samples_excluded;
  }
  return total;
}

}  // namespace neuromod
