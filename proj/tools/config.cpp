#include "config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

namespace cavnoise::cli {

namespace {

std::string where(const YAML::Node& n) {
  const auto m = n.Mark();
  if (m.is_null()) return "";
  return " (line " + std::to_string(m.line + 1) + ")";
}

[[noreturn]] void fail(ErrorCode code, const std::string& msg, const YAML::Node& n) { throw Error(code, msg + where(n)); }

// Runs `f`, appending the node's line to any validation error it raises.
template <class F>
auto at_line(const YAML::Node& n, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    std::string msg = e.what();
    const std::string prefix = std::string(to_string(e.code())) + ": ";
    if (msg.rfind(prefix, 0) == 0) msg = msg.substr(prefix.size());
    throw Error(e.code(), msg + where(n));
  } catch (const YAML::Exception& e) {
    throw Error(ErrorCode::InvalidConfig, e.msg + where(n));
  }
}

void check_keys(const YAML::Node& map, const std::string& section, const std::set<std::string>& allowed) {
  if (!map.IsMap()) fail(ErrorCode::InvalidConfig, "section '" + section + "' must be a mapping", map);
  for (const auto& kv : map) {
    const auto key = kv.first.as<std::string>();
    if (!allowed.count(key)) fail(ErrorCode::InvalidConfig, "unknown key '" + key + "' in section '" + section + "'", kv.first);
  }
}

template <class T>
T get(const YAML::Node& map, const std::string& key, T fallback) {
  const YAML::Node n = map[key];
  if (!n) return fallback;
  return at_line(n, [&] { return n.as<T>(); });
}

template <class T>
T require(const YAML::Node& map, const std::string& section, const std::string& key) {
  const YAML::Node n = map[key];
  if (!n) fail(ErrorCode::InvalidConfig, "missing key '" + key + "' in section '" + section + "'", map);
  return at_line(n, [&] { return n.as<T>(); });
}

cplx as_complex(const YAML::Node& n) {
  if (n.IsScalar()) return {n.as<double>(), 0.0};
  if (n.IsSequence() && n.size() == 2) return {n[0].as<double>(), n[1].as<double>()};
  fail(ErrorCode::InvalidConfig, "expected a number or a [re, im] pair", n);
}

std::vector<cplx> complex_list(const YAML::Node& map, const std::string& key) {
  const YAML::Node n = map[key];
  if (!n) return {};
  if (!n.IsSequence()) fail(ErrorCode::InvalidConfig, "'" + key + "' must be a list", n);
  std::vector<cplx> out;
  for (const auto& item : n) out.push_back(at_line(item, [&] { return as_complex(item); }));
  return out;
}

std::vector<double> real_list(const YAML::Node& map, const std::string& key) {
  const YAML::Node n = map[key];
  if (!n) return {};
  return at_line(n, [&] { return n.as<std::vector<double>>(); });
}

SpectrumSpec parse_spectrum(const YAML::Node& n, const std::string& name) {
  SpectrumSpec s;
  if (!n) return s;
  if (n.IsScalar()) {
    s.value = at_line(n, [&] { return n.as<double>(); });
    return s;
  }
  check_keys(n, name, {"model", "value", "floor", "scale", "zeros", "poles", "omega", "values"});
  s.model = get<std::string>(n, "model", "constant");
  if (s.model == "constant") {
    s.value = require<double>(n, name, "value");
  } else if (s.model == "rational") {
    s.floor = get<double>(n, "floor", 1.0);
    s.scale = require<double>(n, name, "scale");
    s.zeros = complex_list(n, "zeros");
    s.poles = complex_list(n, "poles");
  } else if (s.model == "tabulated") {
    s.omega = real_list(n, "omega");
    s.values = real_list(n, "values");
  } else {
    fail(ErrorCode::InvalidConfig, "unknown spectrum model '" + s.model + "' in '" + name + "'", n["model"]);
  }
  at_line(n, [&] { return s.build(); });
  return s;
}

SimulationConfig to_simulation(const SimulationSection& s) {
  SimulationConfig c;
  c.dt = s.dt;
  c.duration = s.duration;
  c.seed = s.seed;
  c.burn_in = s.burn_in;
  c.welch_segment = s.welch_segment;
  c.welch_overlap = s.welch_overlap;
  c.break_output_vacuum_correlation = s.break_output_vacuum_correlation;
  c.record_phase = s.record_phase;
  return c;
}

CavityParams build_cavity(const CavitySection& c) { return validate_cavity(c.kappa_in, c.kappa_out, c.kappa_loss); }

DriveField build_drive(const DriveSection& d) {
  return DriveField(d.amplitude, d.amp_noise.build(), d.phase_noise.build());
}

LoopFilter build_filter(const FilterSection& f) { return LoopFilter(f.gain, f.zeros, f.poles, f.delay); }

MechanicalResponse build_mechanical(const MechanicalSection& m) {
  if (m.variant == "constant") return MechanicalResponse(ConstantResponse{m.coupling, m.thermal});
  if (m.variant == "oscillator") return MechanicalResponse(OscillatorResponse{m.coupling, m.omega_m, m.q_factor, m.thermal});
  if (m.variant == "tabulated")
    return MechanicalResponse(TabulatedResponse{TabulatedSpectrum{m.omega, m.transfer}, TabulatedSpectrum{m.omega, m.thermal_table}});
  throw Error(ErrorCode::InvalidConfig, "unknown mechanical variant '" + m.variant + "'");
}

FrequencyGrid build_grid(const GridSection& g) {
  if (g.points < 1) throw Error(ErrorCode::InvalidGrid, "grid needs at least one point");
  if (g.spacing == "log") return FrequencyGrid::logarithmic(g.min, g.max, static_cast<std::size_t>(g.points));
  if (g.spacing == "linear") return FrequencyGrid::linear(g.min, g.max, static_cast<std::size_t>(g.points));
  throw Error(ErrorCode::InvalidGrid, "grid spacing must be 'log' or 'linear'");
}

// Shortest text that reads back to the same double.
std::string num(double x) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

void emit_complex_list(YAML::Emitter& out, const std::vector<cplx>& xs) {
  out << YAML::Flow << YAML::BeginSeq;
  for (const cplx& z : xs) {
    if (z.imag() == 0.0) {
      out << num(z.real());
    } else {
      out << YAML::Flow << YAML::BeginSeq << num(z.real()) << num(z.imag()) << YAML::EndSeq;
    }
  }
  out << YAML::EndSeq;
}

void emit_list(YAML::Emitter& out, const std::vector<double>& xs) {
  out << YAML::Flow << YAML::BeginSeq;
  for (double x : xs) out << num(x);
  out << YAML::EndSeq;
}

void emit_spectrum(YAML::Emitter& out, const std::string& key, const SpectrumSpec& s) {
  out << YAML::Key << key << YAML::Value;
  if (s.model == "constant") {
    out << num(s.value);
    return;
  }
  out << YAML::BeginMap << YAML::Key << "model" << YAML::Value << s.model;
  if (s.model == "rational") {
    out << YAML::Key << "floor" << YAML::Value << num(s.floor);
    out << YAML::Key << "scale" << YAML::Value << num(s.scale);
    out << YAML::Key << "zeros" << YAML::Value;
    emit_complex_list(out, s.zeros);
    out << YAML::Key << "poles" << YAML::Value;
    emit_complex_list(out, s.poles);
  } else {
    out << YAML::Key << "omega" << YAML::Value;
    emit_list(out, s.omega);
    out << YAML::Key << "values" << YAML::Value;
    emit_list(out, s.values);
  }
  out << YAML::EndMap;
}

}  // namespace

SpectralModel SpectrumSpec::build() const {
  if (model == "constant") return SpectralModel::constant(value);
  if (model == "rational") return SpectralModel(RationalSpectrum{floor, scale, zeros, poles});
  if (model == "tabulated") return SpectralModel(TabulatedSpectrum{omega, values});
  throw Error(ErrorCode::InvalidConfig, "unknown spectrum model '" + model + "'");
}

GridSection default_grid(double kappa) { return GridSection{1e-3 * kappa, 10.0 * kappa, 400, "log"}; }

ScenarioConfig parse_config(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw Error(ErrorCode::InvalidConfig, "malformed config: " + e.msg + " (line " + std::to_string(e.mark.line + 1) + ")");
  }
  if (!root.IsMap()) throw Error(ErrorCode::InvalidConfig, "config must be a mapping of sections");
  check_keys(root, "top level", {"cavity", "drive", "detector", "filter", "mechanical", "grid", "simulation"});

  ScenarioConfig cfg;
  const YAML::Node cav = root["cavity"];
  if (!cav) throw Error(ErrorCode::MissingSection, "config has no 'cavity' section");
  check_keys(cav, "cavity", {"kappa_in", "kappa_out", "kappa_loss"});
  cfg.cavity.kappa_in = require<double>(cav, "cavity", "kappa_in");
  cfg.cavity.kappa_out = require<double>(cav, "cavity", "kappa_out");
  cfg.cavity.kappa_loss = get<double>(cav, "kappa_loss", 0.0);
  const CavityParams cavity = at_line(cav, [&] { return build_cavity(cfg.cavity); });

  if (const YAML::Node d = root["drive"]) {
    check_keys(d, "drive", {"amplitude", "amp_noise", "phase_noise"});
    cfg.drive.amplitude = get<double>(d, "amplitude", 1.0);
    cfg.drive.amp_noise = parse_spectrum(d["amp_noise"], "amp_noise");
    cfg.drive.phase_noise = parse_spectrum(d["phase_noise"], "phase_noise");
    at_line(d, [&] { return build_drive(cfg.drive); });
  }

  if (const YAML::Node d = root["detector"]) {
    check_keys(d, "detector", {"eta"});
    cfg.detector.eta = get<double>(d, "eta", 1.0);
    at_line(d["eta"] ? d["eta"] : d, [&] { return DetectorParams::make(cfg.detector.eta); });
  }

  if (const YAML::Node f = root["filter"]) {
    check_keys(f, "filter", {"gain", "zeros", "poles", "delay"});
    FilterSection fs;
    fs.gain = require<double>(f, "filter", "gain");
    fs.zeros = complex_list(f, "zeros");
    fs.poles = complex_list(f, "poles");
    fs.delay = get<double>(f, "delay", 0.0);
    at_line(f, [&] { return build_filter(fs); });
    cfg.filter = fs;
  }

  if (const YAML::Node m = root["mechanical"]) {
    check_keys(m, "mechanical", {"variant", "coupling", "thermal", "omega_m", "q_factor", "omega", "transfer"});
    MechanicalSection ms;
    ms.variant = get<std::string>(m, "variant", "constant");
    if (ms.variant == "tabulated") {
      for (const char* k : {"coupling", "omega_m", "q_factor"})
        if (m[k]) fail(ErrorCode::InvalidConfig, std::string("key '") + k + "' does not apply to a tabulated response", m[k]);
      ms.omega = real_list(m, "omega");
      ms.transfer = real_list(m, "transfer");
      ms.thermal_table = real_list(m, "thermal");
    } else {
      for (const char* k : {"omega", "transfer"})
        if (m[k]) fail(ErrorCode::InvalidConfig, std::string("key '") + k + "' applies only to a tabulated response", m[k]);
      ms.coupling = get<double>(m, "coupling", 0.0);
      ms.thermal = get<double>(m, "thermal", 0.0);
      if (ms.variant == "oscillator") {
        ms.omega_m = require<double>(m, "mechanical", "omega_m");
        ms.q_factor = require<double>(m, "mechanical", "q_factor");
      } else if (m["omega_m"] || m["q_factor"]) {
        fail(ErrorCode::InvalidConfig, "omega_m/q_factor apply only to an oscillator response", m);
      }
    }
    at_line(m, [&] { return build_mechanical(ms); });
    cfg.mechanical = ms;
  }

  if (const YAML::Node g = root["grid"]) {
    check_keys(g, "grid", {"min", "max", "points", "spacing"});
    GridSection gs = default_grid(cavity.kappa());
    gs.min = get<double>(g, "min", gs.min);
    gs.max = get<double>(g, "max", gs.max);
    gs.points = get<int>(g, "points", gs.points);
    gs.spacing = get<std::string>(g, "spacing", gs.spacing);
    const FrequencyGrid grid = at_line(g, [&] { return build_grid(gs); });
    if (const YAML::Node d = root["drive"]) at_line(d, [&] {
        build_drive(cfg.drive).validate_on(grid);
        return 0;
      });
    cfg.grid = gs;
  }

  if (const YAML::Node s = root["simulation"]) {
    check_keys(s, "simulation", {"dt", "duration", "seed", "burn_in", "welch_segment", "welch_overlap",
                                 "break_output_vacuum_correlation", "record_phase"});
    SimulationSection ss;
    ss.dt = get<double>(s, "dt", 0.01 / cavity.kappa());
    ss.burn_in = get<double>(s, "burn_in", 20.0 / cavity.kappa());
    ss.welch_segment = get<std::size_t>(s, "welch_segment", 4096);
    ss.welch_overlap = get<double>(s, "welch_overlap", 0.5);
    ss.duration = get<double>(s, "duration", SimulationConfig::duration_for_segments(ss.dt, ss.burn_in, ss.welch_segment,
                                                                                     ss.welch_overlap, 1500));
    ss.seed = get<std::uint64_t>(s, "seed", 1);
    ss.break_output_vacuum_correlation = get<bool>(s, "break_output_vacuum_correlation", false);
    ss.record_phase = get<bool>(s, "record_phase", true);
    at_line(s, [&] {
      to_simulation(ss).validate(cavity);
      return 0;
    });
    cfg.simulation = ss;
  }
  return cfg;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InvalidConfig, "cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_config(ss.str());
  } catch (const Error& e) {
    std::string msg = e.what();
    const std::string prefix = std::string(to_string(e.code())) + ": ";
    if (msg.rfind(prefix, 0) == 0) msg = msg.substr(prefix.size());
    throw Error(e.code(), path + ": " + msg);
  }
}

std::string dump_config(const ScenarioConfig& c) {
  YAML::Emitter out;
  out << YAML::BeginMap;

  out << YAML::Key << "cavity" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "kappa_in" << YAML::Value << num(c.cavity.kappa_in);
  out << YAML::Key << "kappa_out" << YAML::Value << num(c.cavity.kappa_out);
  out << YAML::Key << "kappa_loss" << YAML::Value << num(c.cavity.kappa_loss);
  out << YAML::EndMap;

  out << YAML::Key << "drive" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "amplitude" << YAML::Value << num(c.drive.amplitude);
  emit_spectrum(out, "amp_noise", c.drive.amp_noise);
  emit_spectrum(out, "phase_noise", c.drive.phase_noise);
  out << YAML::EndMap;

  out << YAML::Key << "detector" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "eta" << YAML::Value << num(c.detector.eta) << YAML::EndMap;

  if (c.filter) {
    out << YAML::Key << "filter" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "gain" << YAML::Value << num(c.filter->gain);
    out << YAML::Key << "zeros" << YAML::Value;
    emit_complex_list(out, c.filter->zeros);
    out << YAML::Key << "poles" << YAML::Value;
    emit_complex_list(out, c.filter->poles);
    out << YAML::Key << "delay" << YAML::Value << num(c.filter->delay);
    out << YAML::EndMap;
  }

  if (c.mechanical) {
    const auto& m = *c.mechanical;
    out << YAML::Key << "mechanical" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "variant" << YAML::Value << m.variant;
    if (m.variant == "tabulated") {
      out << YAML::Key << "omega" << YAML::Value;
      emit_list(out, m.omega);
      out << YAML::Key << "transfer" << YAML::Value;
      emit_list(out, m.transfer);
      out << YAML::Key << "thermal" << YAML::Value;
      emit_list(out, m.thermal_table);
    } else {
      out << YAML::Key << "coupling" << YAML::Value << num(m.coupling);
      out << YAML::Key << "thermal" << YAML::Value << num(m.thermal);
      if (m.variant == "oscillator") {
        out << YAML::Key << "omega_m" << YAML::Value << num(m.omega_m);
        out << YAML::Key << "q_factor" << YAML::Value << num(m.q_factor);
      }
    }
    out << YAML::EndMap;
  }

  if (c.grid) {
    out << YAML::Key << "grid" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "min" << YAML::Value << num(c.grid->min);
    out << YAML::Key << "max" << YAML::Value << num(c.grid->max);
    out << YAML::Key << "points" << YAML::Value << c.grid->points;
    out << YAML::Key << "spacing" << YAML::Value << c.grid->spacing;
    out << YAML::EndMap;
  }

  if (c.simulation) {
    const auto& s = *c.simulation;
    out << YAML::Key << "simulation" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "dt" << YAML::Value << num(s.dt);
    out << YAML::Key << "duration" << YAML::Value << num(s.duration);
    out << YAML::Key << "seed" << YAML::Value << s.seed;
    out << YAML::Key << "burn_in" << YAML::Value << num(s.burn_in);
    out << YAML::Key << "welch_segment" << YAML::Value << s.welch_segment;
    out << YAML::Key << "welch_overlap" << YAML::Value << num(s.welch_overlap);
    out << YAML::Key << "break_output_vacuum_correlation" << YAML::Value << s.break_output_vacuum_correlation;
    out << YAML::Key << "record_phase" << YAML::Value << s.record_phase;
    out << YAML::EndMap;
  }

  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

Scenario build(const ScenarioConfig& c) {
  const CavityParams cavity = build_cavity(c.cavity);
  const DriveField drive = build_drive(c.drive);
  const FrequencyGrid grid = build_grid(c.grid.value_or(default_grid(cavity.kappa())));
  drive.validate_on(grid);
  Scenario s{cavity,
             drive,
             DetectorParams::make(c.detector.eta),
             c.filter ? std::optional<LoopFilter>(build_filter(*c.filter)) : std::nullopt,
             c.mechanical ? std::optional<MechanicalResponse>(build_mechanical(*c.mechanical)) : std::nullopt,
             grid,
             c.simulation ? std::optional<SimulationConfig>(to_simulation(*c.simulation)) : std::nullopt,
             steady_state(cavity, drive)};
  return s;
}

}  // namespace cavnoise::cli
