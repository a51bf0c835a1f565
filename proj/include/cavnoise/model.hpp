#pragma once

// Cavity, drive, detector and mirror-response parameters, plus the
// zero-detuning steady state every spectrum is linearized around.

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "cavnoise/error.hpp"
#include "cavnoise/grid.hpp"
#include "cavnoise/spectral_model.hpp"

namespace cavnoise {

/// Loss rates of the cavity mode [rad/s]. The total rate is always derived.
class CavityParams {
 public:
  double kappa_in() const { return kappa_in_; }
  double kappa_out() const { return kappa_out_; }
  double kappa_loss() const { return kappa_loss_; }
  double kappa() const { return kappa_in_ + kappa_out_ + kappa_loss_; }

  bool is_impedance_matched() const { return kappa_in_ == kappa_out_ && kappa_loss_ == 0.0; }

  /// Same cavity with every rate multiplied by s > 0.
  CavityParams scaled(double s) const { return CavityParams(s * kappa_in_, s * kappa_out_, s * kappa_loss_); }

  friend bool operator==(const CavityParams&, const CavityParams&) = default;

 private:
  friend CavityParams validate_cavity(double, double, double);
  CavityParams(double in, double out, double loss) : kappa_in_(in), kappa_out_(out), kappa_loss_(loss) {}

  double kappa_in_;
  double kappa_out_;
  double kappa_loss_;
};

inline CavityParams validate_cavity(double kappa_in, double kappa_out, double kappa_loss) {
  if (!std::isfinite(kappa_in) || !std::isfinite(kappa_out) || !std::isfinite(kappa_loss))
    throw Error(ErrorCode::NonFiniteValue, "cavity loss rates must be finite");
  if (!(kappa_in > 0.0)) throw Error(ErrorCode::NonPositiveInputCoupling, "kappa_in must be > 0 to drive the cavity");
  if (kappa_out < 0.0) throw Error(ErrorCode::NegativeRate, "kappa_out must be >= 0");
  if (kappa_loss < 0.0) throw Error(ErrorCode::NegativeRate, "kappa_loss must be >= 0");
  return CavityParams(kappa_in, kappa_out, kappa_loss);
}

/// Laser input: carrier amplitude [sqrt(photons/s)] and its amplitude (V_in)
/// and phase (V_in^-) quadrature noise spectra in shot-noise units.
class DriveField {
 public:
  DriveField(double amplitude, SpectralModel amp_noise, SpectralModel phase_noise)
      : amplitude_(amplitude), amp_noise_(std::move(amp_noise)), phase_noise_(std::move(phase_noise)) {
    if (!std::isfinite(amplitude_) || amplitude_ < 0.0)
      throw Error(ErrorCode::InvalidSpectrum, "drive amplitude must be finite and >= 0");
    check_uncertainty(construction_points());
  }

  static DriveField coherent(double amplitude) {
    return DriveField(amplitude, SpectralModel::constant(1.0), SpectralModel::constant(1.0));
  }

  double amplitude() const { return amplitude_; }
  const SpectralModel& amp_noise() const { return amp_noise_; }
  const SpectralModel& phase_noise() const { return phase_noise_; }

  /// Re-checks V_in >= 0, V_in^- >= 0 and V_in * V_in^- >= 1 on a grid.
  void validate_on(const FrequencyGrid& grid) const { check_uncertainty(grid.omegas()); }

 private:
  std::vector<double> construction_points() const {
    std::set<double> pts;
    for (double w : amp_noise_.nodes()) pts.insert(w);
    for (double w : phase_noise_.nodes()) pts.insert(w);
    pts.insert(0.0);
    for (int e = -6; e <= 6; ++e) pts.insert(std::pow(10.0, e));
    // keep only points inside both supports
    std::vector<double> out;
    for (double w : pts) {
      if (in_support(amp_noise_, w) && in_support(phase_noise_, w)) out.push_back(w);
    }
    return out;
  }

  static bool in_support(const SpectralModel& m, double w) {
    const auto nodes = m.nodes();
    return nodes.empty() || (w >= nodes.front() && w <= nodes.back());
  }

  void check_uncertainty(const std::vector<double>& omegas) const {
    for (double w : omegas) {
      const double va = amp_noise_(w);
      const double vp = phase_noise_(w);
      if (va < 0.0 || vp < 0.0)
        throw Error(ErrorCode::InvalidSpectrum, "drive noise spectrum negative at omega=" + std::to_string(w));
      if (va * vp < 1.0 - 1e-12) {
        throw Error(ErrorCode::UncertaintyViolation,
                    "V_in * V_in^- = " + std::to_string(va * vp) + " < 1 at omega=" + std::to_string(w));
      }
    }
  }

  double amplitude_;
  SpectralModel amp_noise_;
  SpectralModel phase_noise_;
};

struct DetectorParams {
  double eta = 1.0;

  static DetectorParams make(double eta) {
    if (!std::isfinite(eta) || !(eta > 0.0) || eta > 1.0)
      throw Error(ErrorCode::InvalidEfficiency, "detector efficiency must satisfy 0 < eta <= 1");
    return DetectorParams{eta};
  }
};

struct SteadyState {
  double alpha = 0.0;  // intra-cavity carrier amplitude [sqrt(photons)]
};

inline SteadyState steady_state(const CavityParams& cavity, const DriveField& drive) {
  return SteadyState{std::sqrt(2.0 * cavity.kappa_in()) * drive.amplitude() / cavity.kappa()};
}

// --- mirror response -------------------------------------------------------

/// Flat radiation-pressure transfer and white thermal detuning noise.
struct ConstantResponse {
  double c = 0.0;
  double thermal = 0.0;
};

/// Single mechanical resonance. Both radiation pressure and the thermal force
/// act through the same susceptibility |chi|^2 = 1/((wm^2-w^2)^2 + (w wm/Q)^2).
struct OscillatorResponse {
  double coupling = 0.0;
  double omega_m = 1.0;
  double q_factor = 1.0;
  double thermal = 0.0;

  double susceptibility_sq(double omega) const {
    const double d = omega_m * omega_m - omega * omega;
    const double g = omega * omega_m / q_factor;
    return 1.0 / (d * d + g * g);
  }
};

struct TabulatedResponse {
  TabulatedSpectrum transfer;
  TabulatedSpectrum thermal;
};

/// Radiation-pressure transfer F(w) from intra-cavity intensity noise to
/// detuning noise, and the thermal detuning spectrum V_dT(w).
class MechanicalResponse {
 public:
  using Variant = std::variant<ConstantResponse, OscillatorResponse, TabulatedResponse>;

  MechanicalResponse() : model_(ConstantResponse{}) {}
  MechanicalResponse(ConstantResponse c) : model_(c) { validate(); }
  MechanicalResponse(OscillatorResponse h) : model_(h) { validate(); }
  MechanicalResponse(TabulatedResponse t)
      : model_(t), transfer_table_(t.transfer), thermal_table_(t.thermal) {
    validate();
  }

  double transfer(double omega) const {
    if (const auto* c = std::get_if<ConstantResponse>(&model_)) return c->c;
    if (const auto* h = std::get_if<OscillatorResponse>(&model_)) return h->coupling * h->susceptibility_sq(omega);
    return transfer_table_(omega);
  }

  double thermal(double omega) const {
    if (const auto* c = std::get_if<ConstantResponse>(&model_)) return c->thermal;
    if (const auto* h = std::get_if<OscillatorResponse>(&model_)) return h->thermal * h->susceptibility_sq(omega);
    return thermal_table_(omega);
  }

  const Variant& variant() const { return model_; }

 private:
  void validate() const {
    auto finite_nonneg = [](double v) { return std::isfinite(v) && v >= 0.0; };
    if (const auto* c = std::get_if<ConstantResponse>(&model_)) {
      if (!finite_nonneg(c->c) || !finite_nonneg(c->thermal))
        throw Error(ErrorCode::InvalidMechanics, "constant response needs finite c >= 0 and thermal >= 0");
    } else if (const auto* h = std::get_if<OscillatorResponse>(&model_)) {
      if (!finite_nonneg(h->coupling) || !finite_nonneg(h->thermal))
        throw Error(ErrorCode::InvalidMechanics, "oscillator coupling and thermal level must be finite and >= 0");
      if (!(h->omega_m > 0.0) || !std::isfinite(h->omega_m))
        throw Error(ErrorCode::InvalidMechanics, "oscillator resonance omega_m must be > 0");
      if (!(h->q_factor > 0.0) || !std::isfinite(h->q_factor))
        throw Error(ErrorCode::InvalidMechanics, "oscillator q_factor must be > 0");
    }
  }

  Variant model_;
  SpectralModel transfer_table_;
  SpectralModel thermal_table_;
};

}  // namespace cavnoise
