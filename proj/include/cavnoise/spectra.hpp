#pragma once

// Closed-form quadrature noise spectra of the driven cavity, with and without
// electro-optic intensity feedback. All spectra are in shot-noise units
// (vacuum = 1) as functions of angular frequency.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cavnoise/error.hpp"
#include "cavnoise/grid.hpp"
#include "cavnoise/loop_filter.hpp"
#include "cavnoise/model.hpp"

namespace cavnoise {

enum class NoiseSource {
  input_amplitude,
  input_phase,
  input_vacuum,
  output_vacuum,
  loss_vacuum,
  detector_vacuum,
  thermal,
  radiation_pressure,
};

constexpr std::string_view to_string(NoiseSource s) {
  switch (s) {
    case NoiseSource::input_amplitude: return "input_amplitude";
    case NoiseSource::input_phase: return "input_phase";
    case NoiseSource::input_vacuum: return "input_vacuum";
    case NoiseSource::output_vacuum: return "output_vacuum";
    case NoiseSource::loss_vacuum: return "loss_vacuum";
    case NoiseSource::detector_vacuum: return "detector_vacuum";
    case NoiseSource::thermal: return "thermal";
    case NoiseSource::radiation_pressure: return "radiation_pressure";
  }
  return "unknown";
}

struct Contribution {
  NoiseSource source;
  std::vector<double> values;
};

/// Per-source spectral contributions on a grid and their sum.
struct NoiseBudget {
  FrequencyGrid grid;
  std::vector<Contribution> contributions;
  std::vector<double> total;

  bool has(NoiseSource s) const {
    return std::any_of(contributions.begin(), contributions.end(), [s](const Contribution& c) { return c.source == s; });
  }

  const std::vector<double>& at(NoiseSource s) const {
    for (const auto& c : contributions)
      if (c.source == s) return c.values;
    throw Error(ErrorCode::OutOfRange, "budget has no contribution '" + std::string(to_string(s)) + "'");
  }
};

inline double to_db(double ratio) { return 10.0 * std::log10(ratio); }

// --- intra-cavity amplitude quadrature ---------------------------------------

/// Open-loop intra-cavity intensity noise V_a = (2k_in V_in + 2k_out + 2k_L)/(k^2 + w^2).
inline NoiseBudget intracavity_amplitude_spectrum(const CavityParams& cavity, const DriveField& drive,
                                                  const FrequencyGrid& grid) {
  drive.validate_on(grid);
  const double kin = cavity.kappa_in(), kout = cavity.kappa_out(), kl = cavity.kappa_loss(), k = cavity.kappa();
  const std::size_t n = grid.size();
  NoiseBudget b{grid, {}, std::vector<double>(n)};
  std::vector<double> in(n), out(n), loss(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double w = grid[i];
    const double den = k * k + w * w;
    const double n_in = 2.0 * kin * drive.amp_noise()(w);
    const double n_out = 2.0 * kout;
    const double n_loss = 2.0 * kl;
    in[i] = n_in / den;
    out[i] = n_out / den;
    loss[i] = n_loss / den;
    b.total[i] = (n_in + n_out + n_loss) / den;
  }
  b.contributions = {{NoiseSource::input_amplitude, std::move(in)},
                     {NoiseSource::output_vacuum, std::move(out)},
                     {NoiseSource::loss_vacuum, std::move(loss)}};
  return b;
}

/// Best open-loop intensity noise well inside the linewidth with coherent light: 2/k.
inline double coherent_limit(const CavityParams& cavity) { return 2.0 / cavity.kappa(); }

/// Denominator of the closed-loop spectrum, k + i w + 2 sqrt(k_in k_out eta) K(w).
inline cplx closed_loop_denominator(const CavityParams& cavity, const DetectorParams& det, cplx k_of_w, double omega) {
  const double coupling = 2.0 * std::sqrt(cavity.kappa_in() * cavity.kappa_out() * det.eta);
  return cplx{cavity.kappa(), omega} + coupling * k_of_w;
}

/// Closed-loop intra-cavity intensity noise with the transmitted beam detected
/// (efficiency eta) and fed back through K onto the input amplitude.
///
/// The output-mirror vacuum enters both the cavity and the feedback detector;
/// its correlated contribution |sqrt(2 eta k_in) K + sqrt(2 k_out)|^2 is kept
/// as a single output_vacuum entry.
inline NoiseBudget intracavity_amplitude_spectrum_fb(const CavityParams& cavity, const DriveField& drive,
                                                     const DetectorParams& det, const LoopFilter& filter,
                                                     const FrequencyGrid& grid) {
  drive.validate_on(grid);
  const double kin = cavity.kappa_in(), kout = cavity.kappa_out(), kl = cavity.kappa_loss(), k = cavity.kappa();
  const double eta = det.eta;
  const double a_sq = 2.0 * eta * kin;
  const double a = std::sqrt(a_sq);
  const double b = std::sqrt(2.0 * kout);
  const std::size_t n = grid.size();
  NoiseBudget out{grid, {}, std::vector<double>(n)};
  std::vector<double> c_in(n), c_det(n), c_out(n), c_loss(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double w = grid[i];
    const cplx kw = filter(w);
    const cplx d = closed_loop_denominator(cavity, det, kw, w);
    if (std::abs(d) < 1e-12 * k) {
      throw Error(ErrorCode::DegenerateDenominator,
                  "closed-loop denominator vanishes at omega=" + std::to_string(w) + " (marginal or unstable loop)");
    }
    const double den = std::norm(d);
    const double k_sq = std::norm(kw);
    const double n_in = 2.0 * kin * drive.amp_noise()(w);
    const double n_det = 2.0 * kin * (1.0 - eta) * k_sq;
    const double n_out = std::max(0.0, a_sq * k_sq + 2.0 * a * b * kw.real() + 2.0 * kout);
    const double n_loss = 2.0 * kl;
    c_in[i] = n_in / den;
    c_det[i] = n_det / den;
    c_out[i] = n_out / den;
    c_loss[i] = n_loss / den;
    out.total[i] = (n_in + n_det + n_out + n_loss) / den;
  }
  out.contributions = {{NoiseSource::input_amplitude, std::move(c_in)},
                       {NoiseSource::detector_vacuum, std::move(c_det)},
                       {NoiseSource::output_vacuum, std::move(c_out)},
                       {NoiseSource::loss_vacuum, std::move(c_loss)}};
  return out;
}

/// Low-frequency, infinite-gain limit of the closed-loop spectrum: 1/(2 eta k_out).
inline double highgain_limit(const CavityParams& cavity, const DetectorParams& det) {
  if (!(cavity.kappa_out() > 0.0))
    throw Error(ErrorCode::ZeroOutputCoupling, "kappa_out = 0 leaves no transmitted beam to feed back");
  return 1.0 / (2.0 * det.eta * cavity.kappa_out());
}

struct SuppressionRatio {
  double linear = 0.0;
  double db = 0.0;
};

/// High-gain feedback intensity noise relative to the coherent open-loop level,
/// k / (4 eta k_out); exactly 1/(2 eta) for an impedance-matched cavity.
inline SuppressionRatio suppression_ratio(const CavityParams& cavity, const DetectorParams& det) {
  if (!(cavity.kappa_out() > 0.0))
    throw Error(ErrorCode::ZeroOutputCoupling, "kappa_out = 0 leaves no transmitted beam to feed back");
  const double r = cavity.is_impedance_matched() ? 1.0 / (2.0 * det.eta)
                                                 : cavity.kappa() / (4.0 * det.eta * cavity.kappa_out());
  return {r, to_db(r)};
}

// --- radiation pressure and reflected phase ----------------------------------

/// Detuning noise driven by intensity fluctuations: F(w) * V_a(w).
inline std::vector<double> radiation_pressure_spectrum(const MechanicalResponse& mech, const NoiseBudget& intensity,
                                                       const FrequencyGrid& grid) {
  if (!(intensity.grid == grid))
    throw Error(ErrorCode::GridMismatch, "intensity spectrum was evaluated on a different grid");
  std::vector<double> out(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) out[i] = mech.transfer(grid[i]) * intensity.total[i];
  return out;
}

struct FeedbackPath {
  DetectorParams detector;
  LoopFilter filter;
};

/// Phase-quadrature noise of the reflected beam (the reflection-locking
/// readout). With feedback the radiation-pressure term uses the closed-loop
/// intensity spectrum; the modulator adds nothing to the phase channel.
///
/// Contributions: thermal and radiation_pressure (8 k_in a^2 V / (w^2+k^2)),
/// input_phase (excess input phase noise ((2k_in-k)^2+w^2)(V_in^- - 1)/(w^2+k^2),
/// negative for phase-squeezed input), and the unit vacuum floor split into
/// input_vacuum, output_vacuum and loss_vacuum.
inline NoiseBudget reflected_phase_spectrum(const CavityParams& cavity, const DriveField& drive,
                                            const SteadyState& steady, const MechanicalResponse& mech,
                                            const FrequencyGrid& grid,
                                            const std::optional<FeedbackPath>& feedback = std::nullopt) {
  const NoiseBudget intensity =
      feedback ? intracavity_amplitude_spectrum_fb(cavity, drive, feedback->detector, feedback->filter, grid)
               : intracavity_amplitude_spectrum(cavity, drive, grid);
  const std::vector<double> v_rp = radiation_pressure_spectrum(mech, intensity, grid);

  const double kin = cavity.kappa_in(), kout = cavity.kappa_out(), kl = cavity.kappa_loss(), k = cavity.kappa();
  const double gain = 8.0 * kin * steady.alpha * steady.alpha;
  const double mismatch = (2.0 * kin - k) * (2.0 * kin - k);
  const std::size_t n = grid.size();
  NoiseBudget out{grid, {}, std::vector<double>(n)};
  std::vector<double> c_th(n), c_rp(n), c_ph(n), c_vin(n), c_vout(n), c_vloss(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double w = grid[i];
    const double den = w * w + k * k;
    const double v_th = mech.thermal(w);
    const double port = mismatch + w * w;
    const double excess_phase = drive.phase_noise()(w) - 1.0;
    c_th[i] = gain * v_th / den;
    c_rp[i] = gain * v_rp[i] / den;
    c_ph[i] = port * excess_phase / den;
    c_vin[i] = port / den;
    c_vout[i] = 4.0 * kin * kout / den;
    c_vloss[i] = 4.0 * kin * kl / den;
    out.total[i] = 1.0 + (gain * (v_rp[i] + v_th) + port * excess_phase) / den;
  }
  out.contributions = {{NoiseSource::thermal, std::move(c_th)},
                       {NoiseSource::radiation_pressure, std::move(c_rp)},
                       {NoiseSource::input_phase, std::move(c_ph)},
                       {NoiseSource::input_vacuum, std::move(c_vin)},
                       {NoiseSource::output_vacuum, std::move(c_vout)},
                       {NoiseSource::loss_vacuum, std::move(c_vloss)}};
  return out;
}

struct SqueezingComparison {
  NoiseBudget feedback;  // classical-noise drive, coherent phase, loop closed
  NoiseBudget squeezed;  // amplitude-squeezed minimum-uncertainty drive, loop open
};

/// Reflected-phase readout with intensity feedback versus with an
/// amplitude-squeezed input (V_in = squeeze, V_in^- = 1/squeeze, no loop).
inline SqueezingComparison compare_squeezing_vs_feedback(const CavityParams& cavity, const DriveField& drive_base,
                                                         const SteadyState& steady, const MechanicalResponse& mech,
                                                         const FrequencyGrid& grid, const DetectorParams& det,
                                                         const LoopFilter& filter, double squeeze) {
  if (!std::isfinite(squeeze) || !(squeeze > 0.0) || squeeze > 1.0)
    throw Error(ErrorCode::InvalidSqueezeFactor, "squeeze factor must lie in (0, 1]");
  const DriveField fb_drive(drive_base.amplitude(), drive_base.amp_noise(), SpectralModel::constant(1.0));
  const DriveField sq_drive(drive_base.amplitude(), SpectralModel::constant(squeeze),
                            SpectralModel::constant(1.0 / squeeze));
  return {reflected_phase_spectrum(cavity, fb_drive, steady, mech, grid, FeedbackPath{det, filter}),
          reflected_phase_spectrum(cavity, sq_drive, steady, mech, grid)};
}

}  // namespace cavnoise
