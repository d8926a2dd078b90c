#pragma once

#include <memory>
#include <string>
#include <vector>

#include "neuromod/experiments.hpp"

namespace neuromod {

enum class RunKind { Tracking, Rejection, Network, Simulate };

std::string run_kind_name(RunKind kind);

// Ad-hoc open-loop simulation of a network of bursting neurons.
struct SimulateConfig {
  struct Neuron {
    ConductanceVector mu{};
    PiecewiseInput input = PiecewiseInput({{0.0, 0.0}});
    double v0 = -65.0;
    bool operator==(const Neuron&) const = default;
  };
  struct Synapse {
    std::size_t pre = 0;  // 0-based
    std::size_t post = 0;
    double mu = 0.0;
    bool operator==(const Synapse&) const = default;
  };
  struct Gap {
    std::size_t a = 0;
    std::size_t b = 0;
    double mu = 0.0;
    bool operator==(const Gap&) const = default;
  };

  SimConfig sim{0.0, 10000.0, 0.005, 100};
  std::vector<Neuron> neurons;
  std::vector<Synapse> synapses;
  std::vector<Gap> gaps;
  BurstOptions bursts;
  bool record_internal = false;

  NetworkSpec network_spec() const;
  void validate() const;
  bool operator==(const SimulateConfig&) const = default;
};

struct RunConfig {
  RunKind kind = RunKind::Tracking;
  std::string output = "out";
  TrackingConfig tracking;
  RejectionConfig rejection;
  NetworkConfig network;
  SimulateConfig simulate;

  SimConfig& sim();
  const SimConfig& sim() const;
  void validate() const;
  // Only the section selected by `kind` takes part in the comparison.
  bool operator==(const RunConfig& o) const;
};

// Strict YAML parsing: unknown keys, wrong types and invalid values raise
// ConfigError carrying the source name, line and column.
RunConfig parse_config(const std::string& path);
RunConfig parse_config_text(const std::string& text, const std::string& source = "<string>");

// Complete YAML description (every field explicit) of the selected section.
std::string write_config(const RunConfig& cfg);

ExperimentReport run(const RunConfig& cfg);
std::unique_ptr<OdeSystem> make_system(const RunConfig& cfg);

}  // namespace neuromod
