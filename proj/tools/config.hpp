#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cavnoise/cavnoise.hpp"

namespace cavnoise::cli {

/// Noise spectrum as written in a config: a bare number is a constant level.
struct SpectrumSpec {
  std::string model = "constant";  // constant | rational | tabulated
  double value = 1.0;
  double floor = 1.0;
  double scale = 0.0;
  std::vector<cplx> zeros, poles;
  std::vector<double> omega, values;

  bool operator==(const SpectrumSpec&) const = default;
  SpectralModel build() const;
};

struct CavitySection {
  double kappa_in = 0.0;
  double kappa_out = 0.0;
  double kappa_loss = 0.0;
  bool operator==(const CavitySection&) const = default;
};

struct DriveSection {
  double amplitude = 1.0;
  SpectrumSpec amp_noise;
  SpectrumSpec phase_noise;
  bool operator==(const DriveSection&) const = default;
};

struct DetectorSection {
  double eta = 1.0;
  bool operator==(const DetectorSection&) const = default;
};

struct FilterSection {
  double gain = 0.0;
  std::vector<cplx> zeros, poles;
  double delay = 0.0;
  bool operator==(const FilterSection&) const = default;
};

struct MechanicalSection {
  std::string variant = "constant";  // constant | oscillator | tabulated
  double coupling = 0.0;
  double thermal = 0.0;
  double omega_m = 1.0;
  double q_factor = 1.0;
  std::vector<double> omega, transfer, thermal_table;
  bool operator==(const MechanicalSection&) const = default;
};

struct GridSection {
  double min = 0.0;
  double max = 0.0;
  int points = 400;
  std::string spacing = "log";  // log | linear
  bool operator==(const GridSection&) const = default;
};

struct SimulationSection {
  double dt = 0.0;
  double duration = 0.0;
  std::uint64_t seed = 1;
  double burn_in = 0.0;
  std::size_t welch_segment = 4096;
  double welch_overlap = 0.5;
  bool break_output_vacuum_correlation = false;
  bool record_phase = true;
  bool operator==(const SimulationSection&) const = default;
};

struct ScenarioConfig {
  CavitySection cavity;
  DriveSection drive;
  DetectorSection detector;
  std::optional<FilterSection> filter;
  std::optional<MechanicalSection> mechanical;
  std::optional<GridSection> grid;
  std::optional<SimulationSection> simulation;
  bool operator==(const ScenarioConfig&) const = default;
};

/// Validated module objects for one scenario.
struct Scenario {
  CavityParams cavity;
  DriveField drive;
  DetectorParams detector;
  std::optional<LoopFilter> filter;
  std::optional<MechanicalResponse> mechanical;
  FrequencyGrid grid;
  std::optional<SimulationConfig> simulation;
  SteadyState steady;
};

/// Parses and validates; errors carry the offending key and its line.
ScenarioConfig parse_config(const std::string& text);
ScenarioConfig load_config(const std::string& path);

/// Canonical text form; parse_config(dump_config(c)) == c.
std::string dump_config(const ScenarioConfig& config);

Scenario build(const ScenarioConfig& config);

/// 10^-3 kappa to 10 kappa, 400 logarithmic points.
GridSection default_grid(double kappa);

}  // namespace cavnoise::cli
