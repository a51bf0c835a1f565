#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>

#include <CLI11.hpp>

#include "config.hpp"

namespace cavnoise::cli {

namespace fs = std::filesystem;

std::string format_number(double x) {
  if (x == 0.0) return "0";
  char buf[64];
  const double a = std::abs(x);
  if (std::isfinite(x) && a >= 1e-3 && a < 1e4) {
    std::snprintf(buf, sizeof buf, "%.12g", x);
  } else {
    std::snprintf(buf, sizeof buf, "%.12e", x);
  }
  return buf;
}

void write_csv(std::ostream& os, const std::vector<std::string>& header, const std::vector<std::vector<double>>& columns) {
  for (std::size_t j = 0; j < header.size(); ++j) os << (j ? "," : "") << header[j];
  os << "\n";
  const std::size_t rows = columns.empty() ? 0 : columns.front().size();
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < columns.size(); ++j) os << (j ? "," : "") << format_number(columns[j][i]);
    os << "\n";
  }
}

std::string resolve_output(const std::string& requested, const std::string& fallback) {
  fs::path p = requested.empty() ? fs::path(fallback) : fs::path(requested);
  if (p.is_relative()) {
    if (const char* dir = std::getenv("CAVNOISE_OUTPUT_DIR"); dir && *dir) p = fs::path(dir) / p;
  }
  return p.string();
}

namespace {

struct Common {
  std::string config;
  std::string output;
  bool kappa_normalized = false;
  bool dump_config = false;
};

std::ofstream open_output(const std::string& path) {
  const fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream os(p);
  if (!os) throw Error(ErrorCode::InvalidConfig, "cannot write output file '" + path + "'");
  return os;
}

std::string fixed(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

// Unit conventions for reported numbers: SI angular frequency by default,
// kappa = 1 units with --kappa-normalized (omega / kappa, V_a * kappa).
struct Units {
  double kappa = 1.0;
  bool normalized = false;
  double omega(double w) const { return normalized ? w / kappa : w; }
  double intensity(double v) const { return normalized ? v * kappa : v; }
  std::string omega_header() const { return normalized ? "omega_over_kappa" : "omega_rad_s"; }
};

std::vector<std::vector<double>> budget_columns(const NoiseBudget& b, const Units& u, bool intensity,
                                                std::vector<std::string>& header) {
  header = {u.omega_header(), "total"};
  std::vector<std::vector<double>> cols;
  auto scale = [&](std::vector<double> v) {
    if (intensity)
      for (double& x : v) x = u.intensity(x);
    return v;
  };
  std::vector<double> w;
  for (double x : b.grid) w.push_back(u.omega(x));
  cols.push_back(std::move(w));
  cols.push_back(scale(b.total));
  for (const auto& c : b.contributions) {
    header.emplace_back(to_string(c.source));
    cols.push_back(scale(c.values));
  }
  return cols;
}

NoiseBudget intensity_budget(const Scenario& s, bool feedback, const FrequencyGrid& grid) {
  if (feedback) return intracavity_amplitude_spectrum_fb(s.cavity, s.drive, s.detector, *s.filter, grid);
  return intracavity_amplitude_spectrum(s.cavity, s.drive, grid);
}

NoiseBudget phase_budget(const Scenario& s, bool feedback, const FrequencyGrid& grid) {
  std::optional<FeedbackPath> path;
  if (feedback) path = FeedbackPath{s.detector, *s.filter};
  return reflected_phase_spectrum(s.cavity, s.drive, s.steady, s.mechanical.value_or(MechanicalResponse()), grid, path);
}

void require_filter(const Scenario& s, const char* what) {
  if (!s.filter) throw Error(ErrorCode::MissingFilter, std::string(what) + " needs a 'filter' section in the config");
}

int cmd_spectrum(const Common& c, const std::string& feedback_flag, const std::string& quantity, std::ostream& out) {
  const Scenario s = build(load_config(c.config));
  const bool feedback = feedback_flag == "on";
  if (feedback) require_filter(s, "--feedback on");
  const bool intensity = quantity == "intensity";
  const Units u{s.cavity.kappa(), c.kappa_normalized};

  const NoiseBudget b = intensity ? intensity_budget(s, feedback, s.grid) : phase_budget(s, feedback, s.grid);
  const std::string path = resolve_output(c.output, intensity ? "spectrum.csv" : "phase_spectrum.csv");
  {
    auto os = open_output(path);
    std::vector<std::string> header;
    const auto cols = budget_columns(b, u, intensity, header);
    write_csv(os, header, cols);
  }

  const FrequencyGrid dc({0.0});
  const double dc_total = intensity ? u.intensity(intensity_budget(s, feedback, dc).total[0])
                                    : phase_budget(s, feedback, dc).total[0];
  out << "quantity: " << (intensity ? "intra-cavity amplitude" : "reflected phase") << " (feedback "
      << (feedback ? "on" : "off") << ")\n";
  out << "dc_total: " << format_number(dc_total) << "\n";
  out << "coherent_limit: " << format_number(u.intensity(coherent_limit(s.cavity))) << "\n";
  if (s.cavity.kappa_out() > 0.0) {
    out << "highgain_limit: " << format_number(u.intensity(highgain_limit(s.cavity, s.detector))) << "\n";
    const auto r = suppression_ratio(s.cavity, s.detector);
    out << "suppression: " << fixed("%.4f", r.linear) << " (" << fixed("%.2f", r.db) << " dB)\n";
  } else {
    out << "highgain_limit: n/a (kappa_out = 0)\nsuppression: n/a\n";
  }
  out << "output: " << path << "\n";
  return ok;
}

int cmd_sweep(const Common& c, const std::string& param, double from, double to, int points, const std::string& spacing,
              std::ostream& out) {
  const ScenarioConfig base = load_config(c.config);
  static const std::vector<std::string> known = {"eta", "kappa_out", "kappa_loss", "filter.gain"};
  if (std::find(known.begin(), known.end(), param) == known.end())
    throw Error(ErrorCode::UnknownParameter, "cannot sweep '" + param + "' (choose eta, kappa_out, kappa_loss, filter.gain)");
  if (param == "filter.gain" && !base.filter)
    throw Error(ErrorCode::MissingFilter, "sweeping filter.gain needs a 'filter' section in the config");
  if (points < 1) throw Error(ErrorCode::InvalidGrid, "--points must be >= 1");
  if (spacing != "linear" && spacing != "log") throw Error(ErrorCode::InvalidGrid, "--spacing must be 'log' or 'linear'");
  if (spacing == "log" && !(from > 0.0 && to > 0.0)) throw Error(ErrorCode::InvalidGrid, "log sweep needs positive bounds");

  std::vector<double> values, dc, supp;
  for (int i = 0; i < points; ++i) {
    const double f = points == 1 ? 0.0 : static_cast<double>(i) / (points - 1);
    const double v = spacing == "log" ? from * std::pow(to / from, f) : from + f * (to - from);
    ScenarioConfig cfg = base;
    if (param == "eta") cfg.detector.eta = v;
    if (param == "kappa_out") cfg.cavity.kappa_out = v;
    if (param == "kappa_loss") cfg.cavity.kappa_loss = v;
    if (param == "filter.gain") cfg.filter->gain = v;
    const Scenario s = build(cfg);
    const Units u{s.cavity.kappa(), c.kappa_normalized};
    values.push_back(v);
    dc.push_back(u.intensity(intensity_budget(s, s.filter.has_value(), FrequencyGrid({0.0})).total[0]));
    supp.push_back(suppression_ratio(s.cavity, s.detector).db);
  }
  const std::string path = resolve_output(c.output, "sweep.csv");
  {
    auto os = open_output(path);
    write_csv(os, {param, "dc_total", "suppression_db"}, {values, dc, supp});
  }
  out << "swept " << param << " over " << points << " points\noutput: " << path << "\n";
  return ok;
}

std::string opt_number(const std::optional<double>& x) { return x ? format_number(*x) : "none"; }

int cmd_stability(const Common& c, std::ostream& out) {
  const Scenario s = build(load_config(c.config));
  require_filter(s, "stability analysis");
  const StabilityReport r = is_stable(s.cavity, s.detector, *s.filter);
  const Units u{s.cavity.kappa(), c.kappa_normalized};
  const std::string gm = std::isinf(r.gain_margin_db) ? "inf" : fixed("%.2f dB", r.gain_margin_db);
  out << "stable: " << (r.stable ? "true" : "false") << ", gain_margin: " << gm << "\n";
  out << "method: " << to_string(r.method) << "\n";
  out << "unstable_pole_count: " << r.unstable_pole_count << "\n";
  out << "phase_margin_deg: " << opt_number(r.phase_margin_deg) << "\n";
  auto omega = [&](const std::optional<double>& w) { return w ? std::optional<double>(u.omega(*w)) : std::nullopt; };
  out << "gain_crossover_omega: " << opt_number(omega(r.gain_crossover_omega)) << "\n";
  out << "phase_crossover_omega: " << opt_number(omega(r.phase_crossover_omega)) << "\n";
  if (!r.closed_loop_poles.empty()) {
    out << "closed_loop_poles:";
    for (const cplx& p : r.closed_loop_poles)
      out << " " << format_number(u.omega(p.real())) << (p.imag() < 0 ? "-" : "+") << format_number(std::abs(u.omega(p.imag()))) << "i";
    out << "\n";
  }
  return r.stable ? ok : numerical_error;
}

int cmd_oracle(const Common& c, double tolerance, const std::string& analytic_config, bool break_correlation,
               std::optional<double> band_min, std::optional<double> band_max, std::ostream& out) {
  const ScenarioConfig cfg = load_config(c.config);
  if (!cfg.simulation) throw Error(ErrorCode::MissingSection, "oracle runs need a 'simulation' section in the config");
  const Scenario sim = build(cfg);
  const Scenario model = analytic_config.empty() ? sim : build(load_config(analytic_config));
  SimulationConfig sc = *sim.simulation;
  sc.break_output_vacuum_correlation = sc.break_output_vacuum_correlation || break_correlation;

  std::vector<std::string> channels = {"amplitude"};
  const bool phase = sim.mechanical && sc.record_phase;
  if (phase) channels.emplace_back("reflected_phase");
  if (!phase) sc.record_phase = false;

  const auto psd = simulate_psd(sim.cavity, sim.drive, sim.steady, sim.mechanical, sim.detector, sim.filter, sc, channels);
  const double lo = band_min.value_or(sim.grid.front());
  const double hi = band_max.value_or(sim.grid.back());
  const bool feedback = model.filter.has_value();
  const Units u{sim.cavity.kappa(), c.kappa_normalized};

  std::vector<std::string> header;
  std::vector<std::vector<double>> cols;
  bool all_pass = true;
  for (const auto& ch : channels) {
    const PsdEstimate est = continuous_frequencies(psd.at(ch), sc.dt);
    const bool intensity = ch == "amplitude";
    const NoiseBudget budget = intensity ? intensity_budget(model, feedback, est.grid) : phase_budget(model, feedback, est.grid);
    const ComparisonReport r = compare_to_analytic(est, budget, tolerance, std::pair{lo, hi});
    all_pass = all_pass && r.passed;
    out << ch << ": rms deviation " << fixed("%.2f%%", 100.0 * r.rms_deviation) << ", max "
        << fixed("%.2f%%", 100.0 * r.max_relative_deviation) << ", mean ratio " << fixed("%.4f", r.mean_ratio) << " +- "
        << fixed("%.4f", r.mean_ratio_error) << " over " << r.bins << " bins [" << format_number(u.omega(r.band_lo)) << ", "
        << format_number(u.omega(r.band_hi)) << "], " << est.segments << " segments, tolerance "
        << fixed("%.2f%%", 100.0 * tolerance) << ": " << (r.passed ? "PASS" : "FAIL") << "\n";
    if (cols.empty()) {
      header.push_back(u.omega_header());
      std::vector<double> w;
      for (double x : est.grid) w.push_back(u.omega(x));
      cols.push_back(std::move(w));
    }
    header.push_back(ch + "_estimate");
    header.push_back(ch + "_analytic");
    std::vector<double> e = est.values, a = budget.total;
    if (intensity)
      for (auto* v : {&e, &a})
        for (double& x : *v) x = u.intensity(x);
    cols.push_back(std::move(e));
    cols.push_back(std::move(a));
  }
  const std::string path = resolve_output(c.output, "oracle.csv");
  {
    auto os = open_output(path);
    write_csv(os, header, cols);
  }
  out << "oracle: " << (all_pass ? "PASS" : "FAIL") << "\noutput: " << path << "\n";
  return all_pass ? ok : oracle_failure;
}

int cmd_compare(const Common& c, double squeeze, std::ostream& out) {
  const Scenario s = build(load_config(c.config));
  require_filter(s, "the squeezing comparison");
  const MechanicalResponse mech = s.mechanical.value_or(MechanicalResponse());
  const auto cmp = compare_squeezing_vs_feedback(s.cavity, s.drive, s.steady, mech, s.grid, s.detector, *s.filter, squeeze);
  const Units u{s.cavity.kappa(), c.kappa_normalized};

  std::string stem = resolve_output(c.output, "compare");
  if (stem.size() > 4 && stem.compare(stem.size() - 4, 4, ".csv") == 0) stem.resize(stem.size() - 4);
  for (const auto& [name, budget] : {std::pair{"feedback", &cmp.feedback}, std::pair{"squeezed", &cmp.squeezed}}) {
    auto os = open_output(stem + "." + name + ".csv");
    std::vector<std::string> header;
    const auto cols = budget_columns(*budget, u, false, header);
    write_csv(os, header, cols);
  }

  const double kappa = s.cavity.kappa();
  const auto at = compare_squeezing_vs_feedback(s.cavity, s.drive, s.steady, mech, FrequencyGrid({0.0, kappa}), s.detector,
                                                *s.filter, squeeze);
  out << "reflected phase noise, squeezed input (squeeze " << format_number(squeeze) << ") vs feedback:\n";
  const char* labels[] = {"omega = 0", "omega = kappa"};
  for (std::size_t i = 0; i < 2; ++i) {
    out << "  " << labels[i] << ": squeezed " << format_number(at.squeezed.total[i]) << ", feedback "
        << format_number(at.feedback.total[i]) << ", delta " << format_number(at.squeezed.total[i] - at.feedback.total[i])
        << " (input_phase " << format_number(at.squeezed.at(NoiseSource::input_phase)[i]) << " vs "
        << format_number(at.feedback.at(NoiseSource::input_phase)[i]) << ")\n";
  }
  out << "output: " << stem << ".feedback.csv, " << stem << ".squeezed.csv\n";
  return ok;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Quantum-noise budgets, feedback stability and stochastic cross-checks for an optical cavity"};
  app.require_subcommand(1);
  Common common;
  app.add_flag("--kappa-normalized", common.kappa_normalized, "Report frequencies in units of kappa and V_a * kappa");
  app.add_flag("--dump-config", common.dump_config, "Print the parsed config in canonical form and exit");

  auto add_common = [&](CLI::App* sub, const std::string& output_help) {
    sub->add_option("config", common.config, "Scenario config file")->required();
    sub->add_option("-o,--output", common.output, output_help);
    sub->fallthrough();
  };

  std::string feedback = "off", quantity = "intensity";
  auto* spectrum = app.add_subcommand("spectrum", "Noise budget on the config grid");
  add_common(spectrum, "CSV output path");
  spectrum->add_option("--feedback", feedback, "Close the intensity loop")->check(CLI::IsMember({"on", "off"}));
  spectrum->add_option("--quantity", quantity, "Spectrum to emit")->check(CLI::IsMember({"intensity", "phase"}));

  std::string param, spacing = "linear";
  double from = 0.0, to = 0.0;
  int points = 11;
  auto* sweep = app.add_subcommand("sweep", "DC intensity noise and suppression across a parameter range");
  add_common(sweep, "CSV output path");
  sweep->add_option("--param", param, "eta, kappa_out, kappa_loss or filter.gain")->required();
  sweep->add_option("--from", from)->required();
  sweep->add_option("--to", to)->required();
  sweep->add_option("--points", points);
  sweep->add_option("--spacing", spacing)->check(CLI::IsMember({"linear", "log"}));

  auto* stability = app.add_subcommand("stability", "Closed-loop stability and margins of the feedback filter");
  stability->add_option("config", common.config, "Scenario config file")->required();
  stability->fallthrough();

  double tolerance = 0.05;
  std::string analytic_config;
  bool break_correlation = false;
  std::optional<double> band_min, band_max;
  auto* oracle = app.add_subcommand("oracle", "Simulate the Langevin equations and compare Welch spectra to the closed forms");
  add_common(oracle, "CSV output path");
  oracle->add_option("--tolerance", tolerance, "Allowed RMS relative deviation");
  oracle->add_option("--analytic-config", analytic_config,
                     "Compare against the closed forms of a different config (negative control)");
  oracle->add_flag("--break-correlation", break_correlation,
                   "Feed the loop detector an independent copy of the output-mirror vacuum (negative control)");
  oracle->add_option("--band-min", band_min, "Lower edge of the comparison band [rad/s]");
  oracle->add_option("--band-max", band_max, "Upper edge of the comparison band [rad/s]");

  double squeeze = 0.0;
  auto* compare = app.add_subcommand("compare", "Phase readout with squeezed input versus intensity feedback");
  add_common(compare, "Output stem; writes <stem>.feedback.csv and <stem>.squeezed.csv");
  compare->add_option("--squeeze", squeeze, "Amplitude-noise level of the squeezed input, 0 < s <= 1")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return ok;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return ok;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return validation_error;
  }

  try {
    if (common.dump_config) {
      out << dump_config(load_config(common.config));
      return ok;
    }
    if (spectrum->parsed()) return cmd_spectrum(common, feedback, quantity, out);
    if (sweep->parsed()) return cmd_sweep(common, param, from, to, points, spacing, out);
    if (stability->parsed()) return cmd_stability(common, out);
    if (oracle->parsed()) return cmd_oracle(common, tolerance, analytic_config, break_correlation, band_min, band_max, out);
    if (compare->parsed()) return cmd_compare(common, squeeze, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return is_numerical(e.code()) ? numerical_error : validation_error;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return validation_error;
  }
  return validation_error;
}

}  // namespace cavnoise::cli
