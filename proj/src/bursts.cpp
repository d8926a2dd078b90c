#include <algorithm>
#include <cmath>
#include <numeric>

#include "neuromod/errors.hpp"
#include "neuromod/experiments.hpp"

namespace neuromod {

std::vector<double> spike_times(std::span<const double> t, std::span<const double> v, double threshold) {
  if (t.size() != v.size()) throw ContractViolation("spike_times: time and trace lengths differ");
  std::vector<double> out;
  for (std::size_t k = 1; k < v.size(); ++k) {
    if (v[k - 1] < threshold && v[k] >= threshold) {
      const double f = (threshold - v[k - 1]) / (v[k] - v[k - 1]);
      out.push_back(t[k - 1] + f * (t[k] - t[k - 1]));
    }
  }
  return out;
}

BurstMetrics detect_bursts(std::span<const double> t, std::span<const double> v, const BurstOptions& opts) {
  if (!(opts.max_gap > 0.0)) throw ConfigError("burst max_gap must be > 0");
  BurstMetrics m;
  if (t.empty()) return m;
  m.t_first = t.front();
  m.t_last = t.back();
  m.spike_times = spike_times(t, v, opts.threshold);
  for (std::size_t k = 0; k < m.spike_times.size(); ++k) {
    const double s = m.spike_times[k];
    if (m.bursts.empty() || s - m.bursts.back().last_spike > opts.max_gap) {
      m.bursts.push_back({s, s, 1, true});
    } else {
      m.bursts.back().last_spike = s;
      ++m.bursts.back().spikes;
    }
  }
  if (!m.bursts.empty()) {
    if (m.bursts.front().first_spike - m.t_first <= opts.max_gap) m.bursts.front().complete = false;
    if (m.t_last - m.bursts.back().last_spike <= opts.max_gap) m.bursts.back().complete = false;
  }
  return m;
}

BurstMetrics detect_bursts(const Trajectory& traj, const std::string& signal, double t0, double t1,
                           const BurstOptions& opts) {
  const auto [lo, hi] = traj.window(t0, t1);
  const auto& col = traj.column(signal);
  return detect_bursts(std::span<const double>(traj.time()).subspan(lo, hi - lo),
                       std::span<const double>(col).subspan(lo, hi - lo), opts);
}

std::vector<Burst> BurstMetrics::complete_bursts() const {
  std::vector<Burst> out;
  std::copy_if(bursts.begin(), bursts.end(), std::back_inserter(out), [](const Burst& b) { return b.complete; });
  return out;
}

std::vector<double> BurstMetrics::periods() const {
  const auto c = complete_bursts();
  std::vector<double> out;
  for (std::size_t k = 1; k < c.size(); ++k) out.push_back(c[k].first_spike - c[k - 1].first_spike);
  return out;
}

namespace {

double mean(const std::vector<double>& x) { return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size()); }

}  // namespace

double BurstMetrics::period() const {
  const auto p = periods();
  if (p.empty()) throw InsufficientData("burst period needs at least two complete bursts");
  return mean(p);
}

double BurstMetrics::mean_spikes_per_burst() const {
  const auto c = complete_bursts();
  if (c.empty()) throw InsufficientData("no complete burst");
  double n = 0.0;
  for (const auto& b : c) n += static_cast<double>(b.spikes);
  return n / static_cast<double>(c.size());
}

double BurstMetrics::duty_cycle() const {
  const auto c = complete_bursts();
  const double p = period();
  std::vector<double> len;
  for (const auto& b : c) len.push_back(b.length());
  return mean(len) / p;
}

double BurstMetrics::burst_length_cv() const {
  const auto c = complete_bursts();
  if (c.size() < 2) throw InsufficientData("burst length variation needs at least two complete bursts");
  std::vector<double> len;
  for (const auto& b : c) len.push_back(b.length());
  const double mu = mean(len);
  if (mu == 0.0) return 0.0;
  double ss = 0.0;
  for (double l : len) ss += (l - mu) * (l - mu);
  return std::sqrt(ss / static_cast<double>(len.size())) / mu;
}

double BurstMetrics::period_spread(std::size_t n) const {
  const auto p = periods();
  if (n == 0 || p.size() < n) throw InsufficientData("not enough burst periods");
  const std::vector<double> last(p.end() - static_cast<std::ptrdiff_t>(n), p.end());
  const auto [lo, hi] = std::minmax_element(last.begin(), last.end());
  return (*hi - *lo) / mean(last);
}

double burst_overlap(const BurstMetrics& a, const BurstMetrics& b) {
  double la = 0.0, lb = 0.0, both = 0.0;
  for (const auto& x : a.bursts) la += x.length();
  for (const auto& y : b.bursts) lb += y.length();
  for (const auto& x : a.bursts)
    for (const auto& y : b.bursts)
      both += std::max(0.0, std::min(x.last_spike, y.last_spike) - std::max(x.first_spike, y.first_spike));
  const double denom = std::min(la, lb);
  if (!(denom > 0.0)) throw InsufficientData("burst overlap needs bursts with nonzero length in both traces");
  return both / denom;
}

double windowed_rms(const Trajectory& traj, const std::string& a, const std::string& b, double t0, double t1) {
  const auto [lo, hi] = traj.window(t0, t1);
  if (hi <= lo) throw InsufficientData("empty window");
  const auto& ca = traj.column(a);
  const auto& cb = traj.column(b);
  double ss = 0.0;
  for (std::size_t k = lo; k < hi; ++k) ss += (ca[k] - cb[k]) * (ca[k] - cb[k]);
  return std::sqrt(ss / static_cast<double>(hi - lo));
}

double windowed_max_abs(const Trajectory& traj, const std::string& signal, double t0, double t1) {
  const auto [lo, hi] = traj.window(t0, t1);
  if (hi <= lo) throw InsufficientData("empty window");
  const auto& c = traj.column(signal);
  double m = 0.0;
  for (std::size_t k = lo; k < hi; ++k) m = std::max(m, std::abs(c[k]));
  return m;
}

}  // namespace neuromod
