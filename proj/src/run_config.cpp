#include "neuromod/run_config.hpp"

#include <yaml-cpp/yaml.h>

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "neuromod/errors.hpp"
#include "neuromod/plant.hpp"

namespace neuromod {

std::string run_kind_name(RunKind kind) {
  switch (kind) {
    case RunKind::Tracking: return "tracking";
    case RunKind::Rejection: return "rejection";
    case RunKind::Network: return "network";
    case RunKind::Simulate: return "simulate";
  }
  return "?";
}

// ------------------------------------------------------------ SimulateConfig

NetworkSpec SimulateConfig::network_spec() const {
  NetworkSpec spec;
  for (const auto& n : neurons) spec.neurons.push_back(build_bursting_neuron(n.mu));
  for (const auto& s : synapses) spec.synapses.push_back(build_gaba_synapse(s.pre, s.post, s.mu));
  for (const auto& g : gaps) spec.gap_junctions.push_back(GapJunctionSpec{g.a, g.b, g.mu});
  return spec;
}

void SimulateConfig::validate() const {
  sim.validate();
  if (neurons.empty()) throw ConfigError("neurons: at least one neuron is required");
  network_spec().validate();
}

// ------------------------------------------------------------ RunConfig

SimConfig& RunConfig::sim() {
  return const_cast<SimConfig&>(static_cast<const RunConfig&>(*this).sim());
}

const SimConfig& RunConfig::sim() const {
  switch (kind) {
    case RunKind::Tracking: return tracking.sim;
    case RunKind::Rejection: return rejection.sim;
    case RunKind::Network: return network.sim;
    case RunKind::Simulate: return simulate.sim;
  }
  throw ContractViolation("invalid run kind");
}

void RunConfig::validate() const {
  switch (kind) {
    case RunKind::Tracking: tracking.validate(); break;
    case RunKind::Rejection: rejection.validate(); break;
    case RunKind::Network: network.validate(); break;
    case RunKind::Simulate: simulate.validate(); break;
  }
}

bool RunConfig::operator==(const RunConfig& o) const {
  if (kind != o.kind || output != o.output) return false;
  switch (kind) {
    case RunKind::Tracking: return tracking == o.tracking;
    case RunKind::Rejection: return rejection == o.rejection;
    case RunKind::Network: return network == o.network;
    case RunKind::Simulate: return simulate == o.simulate;
  }
  return false;
}

// ------------------------------------------------------------ parsing

namespace {

class Reader {
 public:
  explicit Reader(std::string source) : source_(std::move(source)) {}

  [[noreturn]] void fail(const YAML::Node& n, const std::string& path, const std::string& msg) const {
    const auto m = n.Mark();
    std::ostringstream os;
    os << source_;
    if (!m.is_null()) os << ":" << m.line + 1 << ":" << m.column + 1;
    os << ": " << path << ": " << msg;
    throw ConfigError(os.str());
  }

  void expect_map(const YAML::Node& n, const std::string& path) const {
    if (!n.IsMap()) fail(n, path, "expected a mapping");
  }

  void check_keys(const YAML::Node& n, const std::string& path, const std::set<std::string>& allowed) const {
    expect_map(n, path);
    for (const auto& kv : n) {
      const auto key = kv.first.as<std::string>();
      if (!allowed.count(key)) {
        std::string list;
        for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
        fail(kv.first, join(path, key), "unknown key (allowed: " + list + ")");
      }
    }
  }

  static std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
  }

  double number(const YAML::Node& n, const std::string& path) const {
    if (!n.IsScalar()) fail(n, path, "expected a number");
    const auto text = n.Scalar();
    double x = 0.0;
    const char* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, x);
    if (ec != std::errc() || ptr != end || !std::isfinite(x)) fail(n, path, "expected a finite number, got '" + text + "'");
    return x;
  }

  std::int64_t integer(const YAML::Node& n, const std::string& path) const {
    if (!n.IsScalar()) fail(n, path, "expected an integer");
    const auto text = n.Scalar();
    std::int64_t x = 0;
    const char* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, x);
    if (ec != std::errc() || ptr != end) fail(n, path, "expected an integer, got '" + text + "'");
    return x;
  }

  bool boolean(const YAML::Node& n, const std::string& path) const {
    if (!n.IsScalar()) fail(n, path, "expected true or false");
    const auto text = n.Scalar();
    if (text == "true") return true;
    if (text == "false") return false;
    fail(n, path, "expected true or false, got '" + text + "'");
  }

  std::string string(const YAML::Node& n, const std::string& path) const {
    if (!n.IsScalar()) fail(n, path, "expected a string");
    return n.Scalar();
  }

  void expect_sequence(const YAML::Node& n, const std::string& path) const {
    if (!n.IsSequence()) fail(n, path, "expected a list");
  }

  // Calls f(child, child_path) when the key is present.
  template <class F>
  void opt(const YAML::Node& map, const std::string& path, const char* key, F&& f) const {
    const auto child = map[key];
    if (child) f(child, join(path, key));
  }

  void num(const YAML::Node& map, const std::string& path, const char* key, double& out) const {
    opt(map, path, key, [&](const YAML::Node& n, const std::string& p) { out = number(n, p); });
  }
  void flag(const YAML::Node& map, const std::string& path, const char* key, bool& out) const {
    opt(map, path, key, [&](const YAML::Node& n, const std::string& p) { out = boolean(n, p); });
  }

  double nonneg(const YAML::Node& n, const std::string& path) const {
    const double x = number(n, path);
    if (x < 0.0) fail(n, path, "must be >= 0");
    return x;
  }

  ConductanceVector conductances(const YAML::Node& n, const std::string& path) const {
    const std::set<std::string> names(kConductanceNames.begin(), kConductanceNames.end());
    check_keys(n, path, names);
    ConductanceVector mu{};
    for (std::size_t k = 0; k < kConductanceNames.size(); ++k) {
      const std::string key(kConductanceNames[k]);
      const auto child = n[key];
      if (!child) fail(n, path, "missing conductance '" + key + "'");
      const double x = number(child, join(path, key));
      if (x < 0.0) fail(child, join(path, key), "(mu_" + key + ") must be >= 0");
      mu[k] = x;
    }
    return mu;
  }

  // Either a constant or a list of [time, value] breakpoints.
  PiecewiseInput input(const YAML::Node& n, const std::string& path, double t_start) const {
    if (n.IsScalar()) return PiecewiseInput({{t_start, number(n, path)}});
    expect_sequence(n, path);
    std::vector<Breakpoint> pts;
    for (std::size_t k = 0; k < n.size(); ++k) {
      const auto item = n[k];
      const auto p = path + "[" + std::to_string(k) + "]";
      if (!item.IsSequence() || item.size() != 2) fail(item, p, "expected [time, value]");
      pts.push_back({number(item[0], p + "[0]"), number(item[1], p + "[1]")});
    }
    if (pts.empty()) fail(n, path, "needs at least one breakpoint");
    if (pts.front().t != t_start) fail(n, path, "first breakpoint must be at sim.t_start");
    try {
      return PiecewiseInput(std::move(pts));
    } catch (const ConfigError& e) {
      fail(n, path, e.what());
    }
  }

  SimConfig sim(const YAML::Node& n, const std::string& path, SimConfig s) const {
    check_keys(n, path, {"t_start", "t_end", "dt", "record_stride"});
    num(n, path, "t_start", s.t_start);
    num(n, path, "t_end", s.t_end);
    num(n, path, "dt", s.dt);
    opt(n, path, "record_stride", [&](const YAML::Node& c, const std::string& p) {
      const auto k = integer(c, p);
      if (k <= 0) fail(c, p, "must be a positive integer");
      s.record_stride = static_cast<std::size_t>(k);
    });
    return s;
  }

  ObserverConfig observer(const YAML::Node& n, const std::string& path, ObserverConfig o, bool allow_params) const {
    std::set<std::string> keys = {"gamma", "alpha", "p0", "P0"};
    if (allow_params) keys.insert("parametrisation");
    check_keys(n, path, keys);
    num(n, path, "gamma", o.gamma);
    num(n, path, "alpha", o.alpha);
    num(n, path, "p0", o.p0);
    opt(n, path, "P0", [&](const YAML::Node& c, const std::string& p) {
      expect_sequence(c, p);
      const auto rows = c.size();
      o.P0.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(rows));
      for (std::size_t i = 0; i < rows; ++i) {
        const auto row = c[i];
        const auto rp = p + "[" + std::to_string(i) + "]";
        expect_sequence(row, rp);
        if (row.size() != rows) fail(row, rp, "P0 must be square");
        for (std::size_t j = 0; j < rows; ++j)
          o.P0(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
              number(row[j], rp + "[" + std::to_string(j) + "]");
      }
    });
    opt(n, path, "parametrisation", [&](const YAML::Node& c, const std::string& p) {
      expect_sequence(c, p);
      o.parametrisation.clear();
      for (std::size_t k = 0; k < c.size(); ++k) o.parametrisation.push_back(string(c[k], p + "[" + std::to_string(k) + "]"));
    });
    return o;
  }

  BurstOptions bursts(const YAML::Node& n, const std::string& path, BurstOptions b) const {
    check_keys(n, path, {"threshold", "max_gap"});
    num(n, path, "threshold", b.threshold);
    num(n, path, "max_gap", b.max_gap);
    return b;
  }

  ControlConfig control(const YAML::Node& n, const std::string& path, ControlConfig c) const {
    check_keys(n, path, {"beta", "kappa", "e_syn", "a1", "a2", "activation_offset", "activation_slope"});
    num(n, path, "beta", c.beta);
    num(n, path, "kappa", c.kappa);
    num(n, path, "e_syn", c.e_syn);
    num(n, path, "a1", c.a1);
    num(n, path, "a2", c.a2);
    num(n, path, "activation_offset", c.activation_offset);
    num(n, path, "activation_slope", c.activation_slope);
    return c;
  }

  std::size_t neuron_index(const YAML::Node& n, const std::string& path, std::size_t count) const {
    const auto k = integer(n, path);
    if (k < 1 || static_cast<std::size_t>(k) > count)
      fail(n, path, "neuron numbers run from 1 to " + std::to_string(count));
    return static_cast<std::size_t>(k - 1);
  }

 private:
  std::string source_;
};

const std::set<std::string> kCommonKeys = {"experiment", "output", "sim", "bursts", "record_internal"};

std::set<std::string> with_common(std::set<std::string> keys) {
  keys.insert(kCommonKeys.begin(), kCommonKeys.end());
  return keys;
}

// Keys shared by the disturbance experiments.
void read_disturbance(const Reader& r, const YAML::Node& root, DisturbanceConfig& d) {
  r.opt(root, "", "observer", [&](const YAML::Node& n, const std::string& p) { d.observer = r.observer(n, p, d.observer, false); });
  r.num(root, "", "trailing_fraction", d.trailing_fraction);
  r.num(root, "", "burst_fraction", d.burst_fraction);
  r.opt(root, "", "phases", [&](const YAML::Node& n, const std::string& p) {
    r.check_keys(n, p, {"t_disturb", "t_control"});
    r.num(n, p, "t_disturb", d.t_disturb);
    r.num(n, p, "t_control", d.t_control);
  });
  r.opt(root, "", "control", [&](const YAML::Node& n, const std::string& p) { d.control = r.control(n, p, d.control); });
  r.opt(root, "", "disturbance", [&](const YAML::Node& n, const std::string& p) {
    r.check_keys(n, p, {"mu_syn"});
    r.opt(n, p, "mu_syn", [&](const YAML::Node& c, const std::string& cp) { d.mu_syn = r.nonneg(c, cp); });
  });
}

const std::set<std::string> kDisturbanceKeys = {"observer", "trailing_fraction", "burst_fraction", "phases", "control", "disturbance"};

RunConfig parse_root(const YAML::Node& root, const Reader& r) {
  r.expect_map(root, "<root>");
  RunConfig cfg;
  const auto exp = root["experiment"];
  if (!exp) r.fail(root, "experiment", "missing (one of tracking, rejection, network, simulate)");
  const auto name = r.string(exp, "experiment");
  if (name == "tracking") cfg.kind = RunKind::Tracking;
  else if (name == "rejection") cfg.kind = RunKind::Rejection;
  else if (name == "network") cfg.kind = RunKind::Network;
  else if (name == "simulate") cfg.kind = RunKind::Simulate;
  else r.fail(exp, "experiment", "unknown experiment '" + name + "' (tracking, rejection, network, simulate)");

  r.opt(root, "", "output", [&](const YAML::Node& n, const std::string& p) { cfg.output = r.string(n, p); });
  const auto read_sim = [&](SimConfig& s) {
    r.opt(root, "", "sim", [&](const YAML::Node& n, const std::string& p) { s = r.sim(n, p, s); });
  };
  const auto read_bursts = [&](BurstOptions& b) {
    r.opt(root, "", "bursts", [&](const YAML::Node& n, const std::string& p) { b = r.bursts(n, p, b); });
  };

  switch (cfg.kind) {
    case RunKind::Tracking: {
      auto& t = cfg.tracking;
      r.check_keys(root, "", with_common({"observer", "trailing_fraction", "tracking"}));
      read_sim(t.sim);
      read_bursts(t.bursts);
      r.flag(root, "", "record_internal", t.record_internal);
      r.num(root, "", "trailing_fraction", t.trailing_fraction);
      r.opt(root, "", "observer", [&](const YAML::Node& n, const std::string& p) { t.observer = r.observer(n, p, t.observer, true); });
      r.opt(root, "", "tracking", [&](const YAML::Node& n, const std::string& p) {
        r.check_keys(n, p, {"t_on", "mu_reference", "mu_plant", "u_r", "kappa", "beta", "v0_reference", "v0_plant",
                            "preset_estimates"});
        r.num(n, p, "t_on", t.t_on);
        r.opt(n, p, "mu_reference", [&](const YAML::Node& c, const std::string& cp) { t.mu_reference = r.conductances(c, cp); });
        r.opt(n, p, "mu_plant", [&](const YAML::Node& c, const std::string& cp) { t.mu_plant = r.conductances(c, cp); });
        r.num(n, p, "u_r", t.u_r);
        r.num(n, p, "kappa", t.kappa);
        r.num(n, p, "beta", t.beta);
        r.num(n, p, "v0_reference", t.v0_reference);
        r.num(n, p, "v0_plant", t.v0_plant);
        r.flag(n, p, "preset_estimates", t.preset_estimates);
      });
      break;
    }
    case RunKind::Rejection: {
      auto& c = cfg.rejection;
      auto keys = with_common(kDisturbanceKeys);
      keys.insert("rejection");
      r.check_keys(root, "", keys);
      read_sim(c.sim);
      read_bursts(c.bursts);
      r.flag(root, "", "record_internal", c.record_internal);
      read_disturbance(r, root, c);
      r.opt(root, "", "rejection", [&](const YAML::Node& n, const std::string& p) {
        r.check_keys(n, p, {"mu_post", "mu_pre", "u_post", "u_pre", "v0_post", "v0_pre"});
        r.opt(n, p, "mu_post", [&](const YAML::Node& x, const std::string& xp) { c.mu_post = r.conductances(x, xp); });
        r.opt(n, p, "mu_pre", [&](const YAML::Node& x, const std::string& xp) { c.mu_pre = r.conductances(x, xp); });
        r.opt(n, p, "u_post", [&](const YAML::Node& x, const std::string& xp) { c.u_post = r.input(x, xp, c.sim.t_start); });
        r.opt(n, p, "u_pre", [&](const YAML::Node& x, const std::string& xp) { c.u_pre = r.input(x, xp, c.sim.t_start); });
        r.num(n, p, "v0_post", c.v0_post);
        r.num(n, p, "v0_pre", c.v0_pre);
      });
      break;
    }
    case RunKind::Network: {
      auto& c = cfg.network;
      auto keys = with_common(kDisturbanceKeys);
      keys.insert("network");
      r.check_keys(root, "", keys);
      read_sim(c.sim);
      read_bursts(c.bursts);
      r.flag(root, "", "record_internal", c.record_internal);
      read_disturbance(r, root, c);
      r.opt(root, "", "network", [&](const YAML::Node& n, const std::string& p) {
        r.check_keys(n, p, {"mu", "syn_2_to_1", "syn_1_to_2", "syn_5_to_4", "syn_4_to_5", "syn_1_to_3", "gap", "gap_topology", "inputs", "v0"});
        auto& net = c.network;
        const auto five = [&](const YAML::Node& x, const std::string& xp) {
          r.expect_sequence(x, xp);
          if (x.size() != 5) r.fail(x, xp, "expected 5 entries, one per neuron");
        };
        r.opt(n, p, "mu", [&](const YAML::Node& x, const std::string& xp) {
          five(x, xp);
          for (std::size_t k = 0; k < 5; ++k) net.mu[k] = r.conductances(x[k], xp + "[" + std::to_string(k) + "]");
        });
        for (auto [key, field] : {std::pair{"syn_2_to_1", &net.syn_2_to_1}, std::pair{"syn_1_to_2", &net.syn_1_to_2},
                                  std::pair{"syn_5_to_4", &net.syn_5_to_4}, std::pair{"syn_4_to_5", &net.syn_4_to_5},
                                  std::pair{"syn_1_to_3", &net.syn_1_to_3}, std::pair{"gap", &net.gap}})
          r.opt(n, p, key, [&, field = field](const YAML::Node& x, const std::string& xp) { *field = r.nonneg(x, xp); });
        r.opt(n, p, "gap_topology", [&](const YAML::Node& x, const std::string& xp) {
          const auto t = r.string(x, xp);
          if (t == "hub") net.gap_topology = GapTopology::Hub;
          else if (t == "within_hco") net.gap_topology = GapTopology::WithinHco;
          else r.fail(x, xp, "expected hub or within_hco");
        });
        r.opt(n, p, "inputs", [&](const YAML::Node& x, const std::string& xp) {
          five(x, xp);
          for (std::size_t k = 0; k < 5; ++k) c.inputs[k] = r.input(x[k], xp + "[" + std::to_string(k) + "]", c.sim.t_start);
        });
        r.opt(n, p, "v0", [&](const YAML::Node& x, const std::string& xp) {
          five(x, xp);
          for (std::size_t k = 0; k < 5; ++k) c.v0[k] = r.number(x[k], xp + "[" + std::to_string(k) + "]");
        });
      });
      break;
    }
    case RunKind::Simulate: {
      auto& s = cfg.simulate;
      r.check_keys(root, "", with_common({"neurons", "synapses", "gap_junctions"}));
      read_sim(s.sim);
      read_bursts(s.bursts);
      r.flag(root, "", "record_internal", s.record_internal);
      const auto ns = root["neurons"];
      if (!ns) r.fail(root, "neurons", "missing");
      r.expect_sequence(ns, "neurons");
      for (std::size_t k = 0; k < ns.size(); ++k) {
        const auto p = "neurons[" + std::to_string(k) + "]";
        r.check_keys(ns[k], p, {"mu", "input", "v0"});
        SimulateConfig::Neuron neuron;
        neuron.input = PiecewiseInput({{s.sim.t_start, 0.0}});
        r.opt(ns[k], p, "mu", [&](const YAML::Node& x, const std::string& xp) { neuron.mu = r.conductances(x, xp); });
        r.opt(ns[k], p, "input", [&](const YAML::Node& x, const std::string& xp) { neuron.input = r.input(x, xp, s.sim.t_start); });
        r.num(ns[k], p, "v0", neuron.v0);
        s.neurons.push_back(neuron);
      }
      r.opt(root, "", "synapses", [&](const YAML::Node& x, const std::string& xp) {
        r.expect_sequence(x, xp);
        for (std::size_t k = 0; k < x.size(); ++k) {
          const auto p = xp + "[" + std::to_string(k) + "]";
          r.check_keys(x[k], p, {"pre", "post", "mu"});
          for (const char* key : {"pre", "post", "mu"})
            if (!x[k][key]) r.fail(x[k], p + "." + key, "missing");
          SimulateConfig::Synapse syn{r.neuron_index(x[k]["pre"], p + ".pre", s.neurons.size()),
                                      r.neuron_index(x[k]["post"], p + ".post", s.neurons.size()),
                                      r.nonneg(x[k]["mu"], p + ".mu")};
          if (syn.pre == syn.post) r.fail(x[k], p, "a synapse needs distinct pre and post neurons");
          s.synapses.push_back(syn);
        }
      });
      r.opt(root, "", "gap_junctions", [&](const YAML::Node& x, const std::string& xp) {
        r.expect_sequence(x, xp);
        for (std::size_t k = 0; k < x.size(); ++k) {
          const auto p = xp + "[" + std::to_string(k) + "]";
          r.check_keys(x[k], p, {"a", "b", "mu"});
          for (const char* key : {"a", "b", "mu"})
            if (!x[k][key]) r.fail(x[k], p + "." + key, "missing");
          SimulateConfig::Gap gap{r.neuron_index(x[k]["a"], p + ".a", s.neurons.size()),
                                  r.neuron_index(x[k]["b"], p + ".b", s.neurons.size()), r.nonneg(x[k]["mu"], p + ".mu")};
          if (gap.a == gap.b) r.fail(x[k], p, "a gap junction needs two distinct neurons");
          s.gaps.push_back(gap);
        }
      });
      break;
    }
  }
  try {
    cfg.validate();
  } catch (const ConfigError& e) {
    r.fail(YAML::Node(), "validation", e.what());
  }
  return cfg;
}

// ------------------------------------------------------------ writing

std::string num(double x) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  (void)ec;
  return std::string(buf, ptr);
}

std::string conductance_map(const ConductanceVector& mu) {
  std::string s = "{";
  for (std::size_t k = 0; k < mu.size(); ++k) s += (k ? ", " : "") + std::string(kConductanceNames[k]) + ": " + num(mu[k]);
  return s + "}";
}

std::string breakpoints(const PiecewiseInput& in) {
  std::string s = "[";
  for (std::size_t k = 0; k < in.breakpoints().size(); ++k) {
    const auto& b = in.breakpoints()[k];
    s += (k ? ", " : "") + std::string("[") + num(b.t) + ", " + num(b.value) + "]";
  }
  return s + "]";
}

class Writer {
 public:
  void line(int indent, const std::string& text) { os_ << std::string(static_cast<std::size_t>(indent) * 2, ' ') << text << "\n"; }
  void kv(int indent, const std::string& key, const std::string& value) { line(indent, key + ": " + value); }
  std::string str() const { return os_.str(); }

 private:
  std::ostringstream os_;
};

void write_common(Writer& w, const RunConfig& cfg, const SimConfig& sim, const BurstOptions& b, bool record_internal) {
  w.kv(0, "experiment", run_kind_name(cfg.kind));
  w.kv(0, "output", "\"" + cfg.output + "\"");
  w.line(0, "sim:");
  w.kv(1, "t_start", num(sim.t_start));
  w.kv(1, "t_end", num(sim.t_end));
  w.kv(1, "dt", num(sim.dt));
  w.kv(1, "record_stride", std::to_string(sim.record_stride));
  w.line(0, "bursts:");
  w.kv(1, "threshold", num(b.threshold));
  w.kv(1, "max_gap", num(b.max_gap));
  w.kv(0, "record_internal", record_internal ? "true" : "false");
}

void write_observer(Writer& w, const ObserverConfig& o, bool params) {
  w.line(0, "observer:");
  w.kv(1, "gamma", num(o.gamma));
  w.kv(1, "alpha", num(o.alpha));
  w.kv(1, "p0", num(o.p0));
  if (o.P0.size() > 0) {
    w.line(1, "P0:");
    for (Eigen::Index i = 0; i < o.P0.rows(); ++i) {
      std::string row = "- [";
      for (Eigen::Index j = 0; j < o.P0.cols(); ++j) row += (j ? ", " : "") + num(o.P0(i, j));
      w.line(2, row + "]");
    }
  }
  if (params && !o.parametrisation.empty()) {
    std::string list = "[";
    for (std::size_t k = 0; k < o.parametrisation.size(); ++k) list += (k ? ", " : "") + std::string("\"") + o.parametrisation[k] + "\"";
    w.kv(1, "parametrisation", list + "]");
  }
}

void write_disturbance(Writer& w, const DisturbanceConfig& d) {
  write_observer(w, d.observer, false);
  w.kv(0, "trailing_fraction", num(d.trailing_fraction));
  w.kv(0, "burst_fraction", num(d.burst_fraction));
  w.line(0, "phases:");
  w.kv(1, "t_disturb", num(d.t_disturb));
  w.kv(1, "t_control", num(d.t_control));
  w.line(0, "control:");
  w.kv(1, "beta", num(d.control.beta));
  w.kv(1, "kappa", num(d.control.kappa));
  w.kv(1, "e_syn", num(d.control.e_syn));
  w.kv(1, "a1", num(d.control.a1));
  w.kv(1, "a2", num(d.control.a2));
  w.kv(1, "activation_offset", num(d.control.activation_offset));
  w.kv(1, "activation_slope", num(d.control.activation_slope));
  w.line(0, "disturbance:");
  w.kv(1, "mu_syn", num(d.mu_syn));
}

}  // namespace

RunConfig parse_config_text(const std::string& text, const std::string& source) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(source + ":" + std::to_string(e.mark.line + 1) + ":" + std::to_string(e.mark.column + 1) +
                      ": parse error: " + e.msg);
  }
  return parse_root(root, Reader(source));
}

RunConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open config file");
  std::ostringstream os;
  os << in.rdbuf();
  return parse_config_text(os.str(), path);
}

std::string write_config(const RunConfig& cfg) {
  Writer w;
  switch (cfg.kind) {
    case RunKind::Tracking: {
      const auto& t = cfg.tracking;
      write_common(w, cfg, t.sim, t.bursts, t.record_internal);
      write_observer(w, t.observer, true);
      w.kv(0, "trailing_fraction", num(t.trailing_fraction));
      w.line(0, "tracking:");
      w.kv(1, "t_on", num(t.t_on));
      w.kv(1, "mu_reference", conductance_map(t.mu_reference));
      w.kv(1, "mu_plant", conductance_map(t.mu_plant));
      w.kv(1, "u_r", num(t.u_r));
      w.kv(1, "kappa", num(t.kappa));
      w.kv(1, "beta", num(t.beta));
      w.kv(1, "v0_reference", num(t.v0_reference));
      w.kv(1, "v0_plant", num(t.v0_plant));
      w.kv(1, "preset_estimates", t.preset_estimates ? "true" : "false");
      break;
    }
    case RunKind::Rejection: {
      const auto& c = cfg.rejection;
      write_common(w, cfg, c.sim, c.bursts, c.record_internal);
      write_disturbance(w, c);
      w.line(0, "rejection:");
      w.kv(1, "mu_post", conductance_map(c.mu_post));
      w.kv(1, "mu_pre", conductance_map(c.mu_pre));
      w.kv(1, "u_post", breakpoints(c.u_post));
      w.kv(1, "u_pre", breakpoints(c.u_pre));
      w.kv(1, "v0_post", num(c.v0_post));
      w.kv(1, "v0_pre", num(c.v0_pre));
      break;
    }
    case RunKind::Network: {
      const auto& c = cfg.network;
      write_common(w, cfg, c.sim, c.bursts, c.record_internal);
      write_disturbance(w, c);
      w.line(0, "network:");
      w.line(1, "mu:");
      for (const auto& mu : c.network.mu) w.line(2, "- " + conductance_map(mu));
      w.kv(1, "syn_2_to_1", num(c.network.syn_2_to_1));
      w.kv(1, "syn_1_to_2", num(c.network.syn_1_to_2));
      w.kv(1, "syn_5_to_4", num(c.network.syn_5_to_4));
      w.kv(1, "syn_4_to_5", num(c.network.syn_4_to_5));
      w.kv(1, "syn_1_to_3", num(c.network.syn_1_to_3));
      w.kv(1, "gap", num(c.network.gap));
      w.kv(1, "gap_topology", c.network.gap_topology == GapTopology::Hub ? "hub" : "within_hco");
      w.line(1, "inputs:");
      for (const auto& in : c.inputs) w.line(2, "- " + breakpoints(in));
      std::string v0 = "[";
      for (std::size_t k = 0; k < 5; ++k) v0 += (k ? ", " : "") + num(c.v0[k]);
      w.kv(1, "v0", v0 + "]");
      break;
    }
    case RunKind::Simulate: {
      const auto& s = cfg.simulate;
      write_common(w, cfg, s.sim, s.bursts, s.record_internal);
      w.line(0, "neurons:");
      for (const auto& n : s.neurons) {
        w.line(1, "- mu: " + conductance_map(n.mu));
        w.kv(2, "input", breakpoints(n.input));
        w.kv(2, "v0", num(n.v0));
      }
      w.line(0, s.synapses.empty() ? "synapses: []" : "synapses:");
      for (const auto& x : s.synapses)
        w.line(1, "- {pre: " + std::to_string(x.pre + 1) + ", post: " + std::to_string(x.post + 1) + ", mu: " + num(x.mu) + "}");
      w.line(0, s.gaps.empty() ? "gap_junctions: []" : "gap_junctions:");
      for (const auto& g : s.gaps)
        w.line(1, "- {a: " + std::to_string(g.a + 1) + ", b: " + std::to_string(g.b + 1) + ", mu: " + num(g.mu) + "}");
      break;
    }
  }
  return w.str();
}

// ------------------------------------------------------------ dispatch

namespace {

std::vector<PiecewiseInput> simulate_inputs(const SimulateConfig& s) {
  std::vector<PiecewiseInput> u;
  for (const auto& n : s.neurons) u.push_back(n.input);
  return u;
}

std::vector<double> simulate_v0(const SimulateConfig& s) {
  std::vector<double> v;
  for (const auto& n : s.neurons) v.push_back(n.v0);
  return v;
}

ExperimentReport run_simulate(const SimulateConfig& s) {
  s.validate();
  NetworkSystem sys(std::make_shared<NetworkModel>(s.network_spec()), simulate_inputs(s), simulate_v0(s), s.record_internal);
  ExperimentReport rep;
  rep.experiment = "simulate";
  rep.trajectory = simulate(sys, s.sim);
  rep.phases = {{"all", s.sim.t_start, s.sim.t_end}};
  for (std::size_t i = 0; i < s.neurons.size(); ++i) {
    const auto name = "v_" + std::to_string(i + 1);
    const auto m = detect_bursts(rep.trajectory, name, s.sim.t_start, s.sim.t_end + s.sim.dt, s.bursts);
    rep.metrics["all." + name + ".spikes"] = static_cast<double>(m.spike_times.size());
    rep.metrics["all." + name + ".bursts"] = static_cast<double>(m.complete_bursts().size());
    try {
      rep.metrics["all." + name + ".period"] = m.period();
    } catch (const InsufficientData&) {
    }
    try {
      rep.metrics["all." + name + ".spikes_per_burst"] = m.mean_spikes_per_burst();
    } catch (const InsufficientData&) {
    }
  }
  rep.assumptions["dt"] = num(s.sim.dt);
  rep.assumptions["t_start"] = num(s.sim.t_start);
  rep.assumptions["t_end"] = num(s.sim.t_end);
  rep.assumptions["record_stride"] = std::to_string(s.sim.record_stride);
  rep.assumptions["bursts.threshold"] = num(s.bursts.threshold);
  rep.assumptions["bursts.max_gap"] = num(s.bursts.max_gap);
  return rep;
}

}  // namespace

ExperimentReport run(const RunConfig& cfg) {
  switch (cfg.kind) {
    case RunKind::Tracking: return run_tracking(cfg.tracking);
    case RunKind::Rejection: return run_rejection(cfg.rejection);
    case RunKind::Network: return run_network(cfg.network);
    case RunKind::Simulate: return run_simulate(cfg.simulate);
  }
  throw ContractViolation("invalid run kind");
}

std::unique_ptr<OdeSystem> make_system(const RunConfig& cfg) {
  switch (cfg.kind) {
    case RunKind::Tracking: return make_tracking_system(cfg.tracking);
    case RunKind::Rejection: return make_rejection_system(cfg.rejection);
    case RunKind::Network: return make_network_system(cfg.network);
    case RunKind::Simulate:
      cfg.simulate.validate();
      return std::make_unique<NetworkSystem>(std::make_shared<NetworkModel>(cfg.simulate.network_spec()),
                                             simulate_inputs(cfg.simulate), simulate_v0(cfg.simulate),
                                             cfg.simulate.record_internal);
  }
  throw ContractViolation("invalid run kind");
}

}  // namespace neuromod
