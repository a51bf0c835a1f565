// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "cavnoise/cavnoise.hpp"
#include "reference.hpp"

using namespace cavnoise;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

char buf[512];

template <class... A>
std::string fmt(const char* f, A... a) {
  std::snprintf(buf, sizeof buf, f, a...);
  return buf;
}

std::vector<CavityParams> random_cavities(std::uint64_t seed, int n) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<CavityParams> out;
  for (int i = 0; i < n; ++i) {
    const double scale = std::pow(10.0, 6.0 * u(rng) - 3.0);
    out.push_back(validate_cavity(scale * (1e-3 + u(rng)), scale * u(rng), i % 4 == 0 ? 0.0 : scale * u(rng)));
  }
  return out;
}

const CavityParams kMatched = validate_cavity(0.5, 0.5, 0.0);

Outcome sample_calculation() {
  const auto s = suppression_ratio(validate_cavity(4.9, 4.9, 1.0), DetectorParams::make(0.91));
  const bool pass = std::abs(s.linear - 0.60552) < 5e-6 && std::abs(s.db - (-2.2)) <= 0.05;
  return {pass, fmt("suppression %.5f (%.3f dB)", s.linear, s.db)};
}

Outcome impedance_matched_limit() {
  const auto s = suppression_ratio(kMatched, DetectorParams::make(1.0));
  return {std::abs(s.linear - 0.5) <= 1e-12, fmt("suppression %.15f", s.linear)};
}

Outcome coherent_dc() {
  double worst = 0.0;
  for (const auto& c : random_cavities(101, 20)) {
    const double v = intracavity_amplitude_spectrum(c, DriveField::coherent(1.0), FrequencyGrid({0.0})).total[0];
    worst = std::max(worst, std::abs(v - 2.0 / c.kappa()) / (2.0 / c.kappa()));
  }
  return {worst <= 1e-12, fmt("max relative error %.2e over 20 cavities", worst)};
}

Outcome vacuum_unitarity() {
  double worst = 0.0;
  for (const auto& c : random_cavities(202, 20)) {
    const auto grid = FrequencyGrid::logarithmic(1e-3 * c.kappa(), 10.0 * c.kappa(), 400);
    const auto drive = DriveField::coherent(1.0);
    const auto b = reflected_phase_spectrum(c, drive, steady_state(c, drive), MechanicalResponse(), grid);
    for (double v : b.total) worst = std::max(worst, std::abs(v - 1.0));
  }
  return {worst <= 1e-12, fmt("max |V - 1| = %.2e over 20 x 400 points", worst)};
}

Outcome high_gain_convergence() {
  const DriveField drive(1.0, SpectralModel::constant(1e6), SpectralModel::constant(1.0));
  const double v = intracavity_amplitude_spectrum_fb(kMatched, drive, DetectorParams::make(1.0), LoopFilter::flat(1e4),
                                                     FrequencyGrid({0.0}))
                       .total[0];
  const double residual = v - highgain_limit(kMatched, DetectorParams::make(1.0));
  return {std::abs(v - 1.009998) <= 1e-5, fmt("V_a(0) = %.7f, classical residual %.2f%% of the floor", v, 100.0 * residual)};
}

SimulationConfig oracle_config(std::size_t segment, std::size_t segments, std::uint64_t seed) {
  SimulationConfig cfg;
  cfg.dt = 0.01;
  cfg.burn_in = 20.0;
  cfg.welch_segment = segment;
  cfg.welch_overlap = 0.5;
  cfg.duration = SimulationConfig::duration_for_segments(cfg.dt, cfg.burn_in, segment, 0.5, segments);
  cfg.seed = seed;
  cfg.record_phase = false;
  return cfg;
}

Outcome oracle_equivalence() {
  struct Scenario {
    const char* name;
    double v_in;
    std::optional<LoopFilter> filter;
    double eta;
  };
  const Scenario scenarios[] = {
      {"open-loop coherent", 1.0, std::nullopt, 1.0},
      {"open-loop V_in=1e4", 1e4, std::nullopt, 1.0},
      {"closed-loop g=1e3 eta=0.9", 1e4, LoopFilter::flat(1e3), 0.9},
  };
  const auto start = std::chrono::steady_clock::now();
  bool pass = true;
  std::string detail;
  std::uint64_t seed = 6001;
  for (const auto& s : scenarios) {
    const auto cfg = oracle_config(131072, 1000, seed++);
    const DriveField drive(1.0, SpectralModel::constant(s.v_in), SpectralModel::constant(1.0));
    const auto det = DetectorParams::make(s.eta);
    const auto psd = simulate_psd(kMatched, drive, steady_state(kMatched, drive), std::nullopt, det, s.filter, cfg,
                                  {"amplitude"});
    const auto& est = psd.at("amplitude");
    const auto budget = s.filter ? intracavity_amplitude_spectrum_fb(kMatched, drive, det, *s.filter, est.grid)
                                 : intracavity_amplitude_spectrum(kMatched, drive, est.grid);
    const auto r = compare_to_analytic(est, budget, 0.05, std::pair{0.02, 0.5});
    pass = pass && r.passed && est.segments >= 200 && est.grid.front() <= 0.02 && r.bins > 50;
    detail += fmt("%s: rms %.2f%% (%zu bins, %zu segments); ", s.name, 100.0 * r.rms_deviation, r.bins, est.segments);
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  pass = pass && seconds <= 300.0;
  return {pass, detail + fmt("%.0f s", seconds)};
}

Outcome cross_term_negative_control() {
  const DriveField drive = DriveField::coherent(1.0);
  const auto det = DetectorParams::make(0.9);
  const auto filter = LoopFilter::flat(1e3);
  struct Run {
    double z, ratio, sigma;
  };
  auto run = [&](bool broken) {
    auto cfg = oracle_config(4096, 16000, broken ? 7002 : 7001);
    cfg.break_output_vacuum_correlation = broken;
    const auto psd = simulate_psd(kMatched, drive, steady_state(kMatched, drive), std::nullopt, det, filter, cfg,
                                  {"amplitude"});
    const auto est = continuous_frequencies(psd.at("amplitude"), cfg.dt);
    const auto r =
        compare_to_analytic(est, intracavity_amplitude_spectrum_fb(kMatched, drive, det, filter, est.grid), 0.05);
    return Run{(r.mean_ratio - 1.0) / r.mean_ratio_error, r.mean_ratio, r.mean_ratio_error};
  };
  const Run intact = run(false);
  const Run broken = run(true);
  // expected relative shift: the cross term over the closed-loop numerator
  const double kin = kMatched.kappa_in(), kout = kMatched.kappa_out(), K = 1e3;
  const double cross = 2.0 * std::sqrt(2.0 * det.eta * kin * 2.0 * kout) * K;
  const double numerator = 2.0 * kin + 2.0 * kin * (1.0 - det.eta) * K * K +
                           std::pow(std::sqrt(2.0 * det.eta * kin) * K + std::sqrt(2.0 * kout), 2);
  const bool pass = std::abs(broken.z) > 3.0 && std::abs(intact.z) < 3.0;
  return {pass, fmt("broken ratio %.5f (%.1f sigma, expected %.5f), intact ratio %.5f (%.1f sigma), sigma %.1e", broken.ratio,
                    broken.z, 1.0 - cross / numerator, intact.ratio, intact.z, broken.sigma)};
}

Outcome stability_contract() {
  const auto det = DetectorParams::make(1.0);
  bool flat_ok = true;
  for (double e = -3.0; e <= 9.0; e += 0.25) {
    const double g = std::pow(10.0, e);
    flat_ok = flat_ok && is_stable(kMatched, det, LoopFilter::flat(g)).stable &&
              is_stable(kMatched, det, LoopFilter::flat(g), StabilityMethod::nyquist_sampling).stable;
  }
  const double tau = 1.0 / kMatched.kappa();
  // threshold implied by the Nyquist gain margin at unit gain
  const auto report = is_stable(kMatched, det, LoopFilter::flat(1.0, tau));
  const double nyquist = std::pow(10.0, report.gain_margin_db / 20.0);
  // fine-grained bisection on the stable/unstable verdict
  double lo = 0.1, hi = 100.0;
  while (hi / lo > 1.0 + 1e-6) {
    const double mid = std::sqrt(lo * hi);
    (is_stable(kMatched, det, LoopFilter::flat(mid, tau)).stable ? lo : hi) = mid;
  }
  const double bisected = std::sqrt(lo * hi);
  const double analytic = reference::delayed_first_order_threshold(kMatched.kappa(), tau, loop_coupling(kMatched, det));
  const bool pass = flat_ok && report.method == StabilityMethod::nyquist_sampling &&
                    std::abs(nyquist / bisected - 1.0) <= 0.01 && std::abs(bisected / analytic - 1.0) <= 0.01;
  return {pass, fmt("delay-free flat gains stable: %s; threshold Nyquist %.5f, bisection %.5f, phase-condition %.5f",
                    flat_ok ? "yes" : "no", nyquist, bisected, analytic)};
}

Outcome phase_penalty() {
  const auto drive = DriveField::coherent(1.0);
  const auto steady = steady_state(kMatched, drive);
  const auto cmp = compare_squeezing_vs_feedback(kMatched, drive, steady, MechanicalResponse(), FrequencyGrid({1.0}),
                                                 DetectorParams::make(1.0), LoopFilter::flat(1e3), 0.5);
  const double sq = cmp.squeezed.at(NoiseSource::input_phase)[0];
  const double fb = cmp.feedback.at(NoiseSource::input_phase)[0];
  return {std::abs(sq - 0.5) <= 1e-10 && std::abs(fb) <= 1e-10,
          fmt("input-phase term at w = kappa: squeezed %.12f, feedback %.12f", sq, fb)};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
  };
  const Criterion criteria[] = {
      {"sample calculation", sample_calculation},
      {"impedance-matched limit", impedance_matched_limit},
      {"coherent open-loop DC", coherent_dc},
      {"vacuum unitarity", vacuum_unitarity},
      {"high-gain convergence", high_gain_convergence},
      {"oracle equivalence", oracle_equivalence},
      {"cross-term negative control", cross_term_negative_control},
      {"stability contract", stability_contract},
      {"phase-penalty comparison", phase_penalty},
  };
  int failures = 0;
  int index = 1;
  for (const auto& c : criteria) {
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::printf("AC%d %s: %s (%s)\n", index++, o.pass ? "PASS" : "FAIL", c.name, o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
