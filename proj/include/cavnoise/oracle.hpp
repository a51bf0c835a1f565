#pragma once

// Time-domain check of the closed-form spectra: the linearized quadrature
// equations of motion (amplitude channel with the feedback loop, phase channel
// with thermal and radiation-pressure detuning) are driven by independent
// unit-spectrum white noises and integrated with the trapezoidal rule. Spectra
// are then estimated with Welch's method and compared against a NoiseBudget.
//
// The trapezoidal update maps s -> (2/dt)(z-1)/(z+1), so the sampled spectrum
// equals the continuous one at the warped frequency (2/dt) tan(w dt/2); below
// w ~ 0.1/dt the warp is far below the statistical error.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cavnoise/control.hpp"
#include "cavnoise/error.hpp"
#include "cavnoise/loop_filter.hpp"
#include "cavnoise/model.hpp"
#include "cavnoise/spectra.hpp"
#include "cavnoise/welch.hpp"

namespace cavnoise {

struct SimulationConfig {
  double dt = 0.01;
  double duration = 0.0;
  std::uint64_t seed = 1;
  double burn_in = 20.0;
  std::size_t welch_segment = 4096;
  double welch_overlap = 0.5;

  // Negative control: the feedback detector sees an independent copy of the
  // output-mirror vacuum instead of the realization entering the cavity.
  bool break_output_vacuum_correlation = false;
  bool record_phase = true;
  bool noise_off = false;            // deterministic run (all drives off)
  double initial_amplitude = 0.0;    // dX_a(0)

  std::size_t total_steps() const { return static_cast<std::size_t>(std::llround(duration / dt)); }
  std::size_t burn_in_steps() const { return static_cast<std::size_t>(std::llround(burn_in / dt)); }

  WelchConfig welch() const { return WelchConfig{dt, welch_segment, welch_overlap}; }

  void validate(const CavityParams& cavity) const {
    const double k = cavity.kappa();
    if (!(dt > 0.0) || !std::isfinite(dt)) throw Error(ErrorCode::InvalidConfig, "simulation dt must be > 0");
    if (dt > 0.01 / k * (1.0 + 1e-12))
      throw Error(ErrorCode::InvalidConfig, "simulation dt must resolve the cavity pole (dt <= 0.01/kappa)");
    if (burn_in < 10.0 / k * (1.0 - 1e-12))
      throw Error(ErrorCode::InvalidConfig, "burn-in must cover at least 10 cavity decay times (burn_in >= 10/kappa)");
    if (welch_segment < 16) throw Error(ErrorCode::InvalidConfig, "welch_segment must be >= 16 samples");
    if (!(welch_overlap >= 0.0) || welch_overlap > 0.9)
      throw Error(ErrorCode::InvalidConfig, "welch_overlap must lie in [0, 0.9]");
    if (duration < 50.0 * static_cast<double>(welch_segment) * dt * (1.0 - 1e-12))
      throw Error(ErrorCode::InvalidConfig, "duration must span at least 50 Welch segments");
  }

  /// Smallest duration holding `segments` Welch segments after the burn-in.
  static double duration_for_segments(double dt, double burn_in, std::size_t segment, double overlap,
                                      std::size_t segments) {
    const WelchConfig w{dt, segment, overlap};
    const double samples = static_cast<double>(segment + (segments - 1) * w.hop());
    return burn_in + samples * dt + dt;
  }
};

/// Sampled channels of one simulation; samples before `burn_in_samples` are
/// the transient.
struct TimeSeries {
  double dt = 0.0;
  std::size_t burn_in_samples = 0;
  std::vector<std::string> names;
  std::vector<std::vector<double>> channels;

  const std::vector<double>& channel(const std::string& name) const {
    for (std::size_t i = 0; i < names.size(); ++i)
      if (names[i] == name) return channels[i];
    throw Error(ErrorCode::OutOfRange, "time series has no channel '" + name + "'");
  }

  std::size_t size() const { return channels.empty() ? 0 : channels.front().size(); }
};

/// Delimited-text dump: header line `t,<channel>...`, one row per sample.
inline void write_timeseries(std::ostream& os, const TimeSeries& ts) {
  os << "t";
  for (const auto& n : ts.names) os << "," << n;
  os << "\n";
  os.precision(12);
  for (std::size_t i = 0; i < ts.size(); ++i) {
    os << static_cast<double>(i) * ts.dt;
    for (const auto& c : ts.channels) os << "," << c[i];
    os << "\n";
  }
}

namespace detail {

/// Linear stochastic system x' = A x + B v + E e(t - delay),
/// outputs y = C x + D v, fed-back signal u = Cu x + Du v.
struct OracleModel {
  Eigen::MatrixXd A, B;
  Eigen::VectorXd E;
  Eigen::MatrixXd C, D;
  Eigen::RowVectorXd Cu, Du;
  std::vector<std::string> names;
  double delay = 0.0;
  bool has_delay_line = false;
  Eigen::Index amplitude_state = 0;
};

struct Linear {
  Eigen::RowVectorXd x, v;
  Linear(Eigen::Index ns, Eigen::Index nv) : x(Eigen::RowVectorXd::Zero(ns)), v(Eigen::RowVectorXd::Zero(nv)) {}
  Linear& operator+=(const Linear& o) {
    x += o.x;
    v += o.v;
    return *this;
  }
  friend Linear operator*(double k, Linear l) {
    l.x *= k;
    l.v *= k;
    return l;
  }
};

/// Input-noise realization for a drive spectrum: white floor plus an optional
/// shaping filter driven by its own white noise.
struct NoiseShape {
  double white = 1.0;  // sqrt of the flat level
  std::optional<StateSpace> shaping;
};

inline NoiseShape noise_shape(const SpectralModel& m, const char* what) {
  NoiseShape s;
  if (const auto* c = std::get_if<ConstantSpectrum>(&m.variant())) {
    s.white = std::sqrt(c->value);
  } else if (const auto* r = std::get_if<RationalSpectrum>(&m.variant())) {
    if (r->poles.empty()) {
      s.white = std::sqrt(r->floor + r->scale);
    } else {
      s.white = std::sqrt(r->floor);
      if (r->scale > 0.0)
        s.shaping = realize(std::sqrt(r->scale) * Polynomial::from_roots(r->zeros), Polynomial::from_roots(r->poles));
    }
  } else {
    throw Error(ErrorCode::UnsupportedModel, std::string("tabulated ") + what + " spectrum cannot be simulated");
  }
  return s;
}

inline OracleModel build_model(const CavityParams& cavity, const DriveField& drive, const SteadyState& steady,
                               const std::optional<MechanicalResponse>& mech, const DetectorParams& det,
                               const std::optional<LoopFilter>& filter, const SimulationConfig& cfg) {
  const double kin = cavity.kappa_in(), kout = cavity.kappa_out(), kl = cavity.kappa_loss(), k = cavity.kappa();
  const double eta = det.eta;
  const bool loop = filter && !filter->is_zero();
  const bool phase = cfg.record_phase;

  const NoiseShape amp = noise_shape(drive.amp_noise(), "amplitude-noise");
  const NoiseShape ph = phase ? noise_shape(drive.phase_noise(), "phase-noise") : NoiseShape{};
  const std::optional<StateSpace> fss = loop ? std::optional<StateSpace>(filter->state_space()) : std::nullopt;

  const OscillatorResponse* osc = nullptr;
  const ConstantResponse* flat = nullptr;
  if (phase && mech) {
    if (std::holds_alternative<TabulatedResponse>(mech->variant()))
      throw Error(ErrorCode::UnsupportedModel, "tabulated mechanical response cannot be simulated");
    osc = std::get_if<OscillatorResponse>(&mech->variant());
    flat = std::get_if<ConstantResponse>(&mech->variant());
  }

  // state layout
  Eigen::Index ns = 0;
  const Eigen::Index iXa = ns++;
  const Eigen::Index iAS = ns;
  ns += amp.shaping ? amp.shaping->order() : 0;
  const Eigen::Index iF = ns;
  ns += fss ? fss->order() : 0;
  const Eigen::Index iMR = ns;
  ns += (osc && osc->coupling > 0.0) ? 2 : 0;
  const Eigen::Index iMT = ns;
  ns += (osc && osc->thermal > 0.0) ? 2 : 0;
  const Eigen::Index iXp = phase ? ns++ : -1;
  const Eigen::Index iPS = ns;
  ns += (phase && ph.shaping) ? ph.shaping->order() : 0;

  // noise layout
  Eigen::Index nv = 0;
  const Eigen::Index vAmp = nv++, vAmpShape = nv++, vNu = nv++, vLoss = nv++, vDet = nv++, vNuDet = nv++;
  const Eigen::Index vPh = nv++, vPhShape = nv++, vNuPh = nv++, vLossPh = nv++, vTh = nv++;

  OracleModel m;
  m.A = Eigen::MatrixXd::Zero(ns, ns);
  m.B = Eigen::MatrixXd::Zero(ns, nv);
  m.E = Eigen::VectorXd::Zero(ns);
  m.amplitude_state = iXa;
  auto add_row = [&](Eigen::Index row, const Linear& l) {
    m.A.row(row) += l.x;
    m.B.row(row) += l.v;
  };
  auto state = [&](Eigen::Index i, double c = 1.0) {
    Linear l(ns, nv);
    l.x(i) = c;
    return l;
  };
  auto noise = [&](Eigen::Index j, double c = 1.0) {
    Linear l(ns, nv);
    l.v(j) = c;
    return l;
  };
  auto shaping_block = [&](const StateSpace& ss, Eigen::Index first, Eigen::Index drive_noise) {
    const Eigen::Index n = ss.order();
    m.A.block(first, first, n, n) += ss.A;
    m.B.block(first, drive_noise, n, 1) += ss.B;
    Linear out(ns, nv);
    out.x.segment(first, n) = ss.C;
    out.v(drive_noise) = ss.D;
    return out;
  };

  // input amplitude quadrature (vacuum + classical)
  Linear in_amp = noise(vAmp, amp.white);
  if (amp.shaping) in_amp += shaping_block(*amp.shaping, iAS, vAmpShape);

  // feedback detector and electronics
  Linear u(ns, nv);
  if (loop) {
    Linear y = state(iXa, std::sqrt(2.0 * kout * eta));
    y += noise(cfg.break_output_vacuum_correlation ? vNuDet : vNu, -std::sqrt(eta));
    y += noise(vDet, -std::sqrt(1.0 - eta));
    const Eigen::Index nf = fss->order();
    if (nf > 0) {
      m.A.block(iF, iF, nf, nf) += fss->A;
      for (Eigen::Index r = 0; r < nf; ++r) add_row(iF + r, fss->B(r) * y);
      u.x.segment(iF, nf) = fss->C;
    }
    u += fss->D * y;
  }

  // cavity amplitude quadrature
  add_row(iXa, state(iXa, -k));
  add_row(iXa, std::sqrt(2.0 * kin) * in_amp);
  add_row(iXa, noise(vNu, std::sqrt(2.0 * kout)));
  add_row(iXa, noise(vLoss, std::sqrt(2.0 * kl)));
  if (loop) {
    if (filter->delay() > 0.0) {
      m.E(iXa) = -std::sqrt(2.0 * kin);
      m.has_delay_line = true;
      m.delay = filter->delay();
    } else {
      add_row(iXa, -std::sqrt(2.0 * kin) * u);
    }
  }
  m.Cu = u.x;
  m.Du = u.v;

  // phase channel
  Linear in_ph(ns, nv);
  if (phase) {
    in_ph = noise(vPh, ph.white);
    if (ph.shaping) in_ph += shaping_block(*ph.shaping, iPS, vPhShape);

    Linear detuning(ns, nv);
    if (flat) {
      detuning += state(iXa, std::sqrt(flat->c));
      detuning += noise(vTh, std::sqrt(flat->thermal));
    } else if (osc) {
      auto oscillator = [&](Eigen::Index q, const Linear& force) {
        add_row(q, state(q + 1));
        add_row(q + 1, state(q, -osc->omega_m * osc->omega_m));
        add_row(q + 1, state(q + 1, -osc->omega_m / osc->q_factor));
        add_row(q + 1, force);
      };
      if (osc->coupling > 0.0) {
        oscillator(iMR, state(iXa));
        detuning += state(iMR, std::sqrt(osc->coupling));
      }
      if (osc->thermal > 0.0) {
        oscillator(iMT, noise(vTh));
        detuning += state(iMT, std::sqrt(osc->thermal));
      }
    }
    add_row(iXp, state(iXp, -k));
    add_row(iXp, -2.0 * steady.alpha * detuning);
    add_row(iXp, std::sqrt(2.0 * kin) * in_ph);
    add_row(iXp, noise(vNuPh, std::sqrt(2.0 * kout)));
    add_row(iXp, noise(vLossPh, std::sqrt(2.0 * kl)));
  }

  // recorded outputs
  std::vector<Linear> outs;
  m.names.push_back("amplitude");
  outs.push_back(state(iXa));
  if (phase) {
    m.names.push_back("phase");
    outs.push_back(state(iXp));
    m.names.push_back("reflected_phase");
    Linear r = state(iXp, std::sqrt(2.0 * kin));
    r += -1.0 * in_ph;
    outs.push_back(r);
  }
  if (loop) {
    m.names.push_back("feedback");
    outs.push_back(u);
  }
  m.C = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(outs.size()), ns);
  m.D = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(outs.size()), nv);
  for (std::size_t i = 0; i < outs.size(); ++i) {
    m.C.row(static_cast<Eigen::Index>(i)) = outs[i].x;
    m.D.row(static_cast<Eigen::Index>(i)) = outs[i].v;
  }
  return m;
}

/// Trapezoidal integrator for an OracleModel; produces one output vector per step.
class Integrator {
 public:
  Integrator(const OracleModel& model, const SimulationConfig& cfg) : m_(model), h_(cfg.dt), rng_(cfg.seed) {
    const Eigen::Index ns = m_.A.rows();
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(ns, ns);
    const Eigen::MatrixXd lhs = I - 0.5 * h_ * m_.A;
    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(lhs);
    M1_ = lu.solve(I + 0.5 * h_ * m_.A);
    M2_ = lu.solve(0.5 * h_ * m_.B);
    M3_ = lu.solve(0.5 * h_ * m_.E);

    // draw only the noises that reach a state or an output
    for (Eigen::Index j = 0; j < m_.B.cols(); ++j) {
      const bool used = m_.B.col(j).cwiseAbs().maxCoeff() > 0.0 || m_.D.col(j).cwiseAbs().maxCoeff() > 0.0 ||
                        std::abs(m_.Du(j)) > 0.0;
      if (used && !cfg.noise_off) active_.push_back(j);
    }
    noise_sigma_ = 1.0 / std::sqrt(h_);

    x_ = Eigen::VectorXd::Zero(ns);
    x_(m_.amplitude_state) = cfg.initial_amplitude;
    v_ = Eigen::VectorXd::Zero(m_.B.cols());
    v_next_ = v_;
    draw(v_);
    if (m_.has_delay_line) {
      delay_steps_ = m_.delay / h_;
      if (delay_steps_ < 1.0 - 1e-9)
        throw Error(ErrorCode::InvalidConfig, "feedback delay must be at least one simulation step");
      history_.assign(static_cast<std::size_t>(std::ceil(delay_steps_)) + 4, 0.0);
    }
    record_feedback();
    y_ = m_.C * x_ + m_.D * v_;
  }

  /// Outputs at the current sample.
  const Eigen::VectorXd& outputs() const { return y_; }
  std::size_t step_index() const { return n_; }

  void step() {
    draw(v_next_);
    const double e0 = delayed(n_), e1 = delayed(n_ + 1);
    x_ = M1_ * x_ + M2_ * (v_next_ + v_) + M3_ * (e0 + e1);
    v_.swap(v_next_);
    ++n_;
    record_feedback();
    y_.noalias() = m_.C * x_ + m_.D * v_;
    for (Eigen::Index i = 0; i < y_.size(); ++i) {
      if (!std::isfinite(y_(i)) || std::abs(y_(i)) > 1e12)
        throw Error(ErrorCode::DivergenceDetected, "simulation diverged at step " + std::to_string(n_) + " (channel " +
                                                       m_.names[static_cast<std::size_t>(i)] + ")");
    }
  }

 private:
  void draw(Eigen::VectorXd& v) {
    for (Eigen::Index j : active_) v(j) = noise_sigma_ * normal_(rng_);
  }

  void record_feedback() {
    if (!m_.has_delay_line) return;
    const double u = m_.Cu.dot(x_) + m_.Du.dot(v_);
    history_[n_ % history_.size()] = u;
  }

  // u(t_n - delay), linearly interpolated; zero before the loop was closed
  double delayed(std::size_t n) const {
    if (!m_.has_delay_line) return 0.0;
    const double t = static_cast<double>(n) - delay_steps_;
    if (t < 0.0) return 0.0;
    const auto lo = static_cast<std::size_t>(std::floor(t));
    const double f = t - static_cast<double>(lo);
    const double a = history_[lo % history_.size()];
    if (f <= 1e-12) return a;
    const double b = history_[(lo + 1) % history_.size()];
    return a + f * (b - a);
  }

  const OracleModel& m_;
  double h_;
  Eigen::MatrixXd M1_, M2_;
  Eigen::VectorXd M3_;
  std::vector<Eigen::Index> active_;
  double noise_sigma_ = 1.0;
  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_;
  Eigen::VectorXd x_, v_, v_next_, y_;
  std::vector<double> history_;
  double delay_steps_ = 0.0;
  std::size_t n_ = 0;
};

inline void require_stable_loop(const CavityParams& cavity, const DetectorParams& det,
                                const std::optional<LoopFilter>& filter) {
  if (!filter || filter->is_zero()) return;
  const StabilityReport r = is_stable(cavity, det, *filter);
  if (!r.stable)
    throw Error(ErrorCode::UnstableLoop,
                "feedback loop has " + std::to_string(r.unstable_pole_count) + " unstable closed-loop pole(s)");
}

}  // namespace detail

/// Calls `sink(outputs)` for every sample (including the burn-in) of one
/// realization. Output order is given by the returned channel names.
inline std::vector<std::string> simulate_stream(const CavityParams& cavity, const DriveField& drive,
                                                const SteadyState& steady,
                                                const std::optional<MechanicalResponse>& mech,
                                                const DetectorParams& det, const std::optional<LoopFilter>& filter,
                                                const SimulationConfig& cfg,
                                                const std::function<void(const Eigen::VectorXd&)>& sink) {
  cfg.validate(cavity);
  detail::require_stable_loop(cavity, det, filter);
  const detail::OracleModel model = detail::build_model(cavity, drive, steady, mech, det, filter, cfg);
  detail::Integrator integ(model, cfg);
  const std::size_t steps = cfg.total_steps();
  sink(integ.outputs());
  for (std::size_t n = 1; n < steps; ++n) {
    integ.step();
    sink(integ.outputs());
  }
  return model.names;
}

inline TimeSeries simulate(const CavityParams& cavity, const DriveField& drive, const SteadyState& steady,
                           const std::optional<MechanicalResponse>& mech, const DetectorParams& det,
                           const std::optional<LoopFilter>& filter, const SimulationConfig& cfg) {
  TimeSeries ts;
  ts.dt = cfg.dt;
  ts.burn_in_samples = std::min(cfg.burn_in_steps(), cfg.total_steps());
  std::vector<std::vector<double>> data;
  ts.names = simulate_stream(cavity, drive, steady, mech, det, filter, cfg, [&](const Eigen::VectorXd& y) {
    if (data.empty()) {
      data.resize(static_cast<std::size_t>(y.size()));
      for (auto& c : data) c.reserve(cfg.total_steps());
    }
    for (Eigen::Index i = 0; i < y.size(); ++i) data[static_cast<std::size_t>(i)].push_back(y(i));
  });
  ts.channels = std::move(data);
  return ts;
}

/// Welch PSD of one channel, skipping the burn-in.
inline PsdEstimate estimate_psd(const TimeSeries& ts, const std::string& channel, const SimulationConfig& cfg) {
  const auto& x = ts.channel(channel);
  const std::size_t skip = std::min(ts.burn_in_samples, x.size());
  WelchConfig w = cfg.welch();
  w.dt = ts.dt;
  return welch_psd(std::span<const double>(x).subspan(skip), w);
}

/// Simulates and estimates PSDs of the requested channels without keeping the
/// time series in memory.
inline std::map<std::string, PsdEstimate> simulate_psd(const CavityParams& cavity, const DriveField& drive,
                                                       const SteadyState& steady,
                                                       const std::optional<MechanicalResponse>& mech,
                                                       const DetectorParams& det,
                                                       const std::optional<LoopFilter>& filter,
                                                       const SimulationConfig& cfg,
                                                       const std::vector<std::string>& channels) {
  cfg.validate(cavity);
  const detail::OracleModel model = detail::build_model(cavity, drive, steady, mech, det, filter, cfg);
  std::vector<std::pair<Eigen::Index, WelchAccumulator>> acc;
  for (const auto& name : channels) {
    auto it = std::find(model.names.begin(), model.names.end(), name);
    if (it == model.names.end()) throw Error(ErrorCode::OutOfRange, "simulation has no channel '" + name + "'");
    acc.emplace_back(static_cast<Eigen::Index>(it - model.names.begin()), WelchAccumulator(cfg.welch()));
  }
  const std::size_t burn = cfg.burn_in_steps();
  std::size_t n = 0;
  simulate_stream(cavity, drive, steady, mech, det, filter, cfg, [&](const Eigen::VectorXd& y) {
    if (n++ < burn) return;
    for (auto& [idx, a] : acc) a.push(y(idx));
  });
  std::map<std::string, PsdEstimate> out;
  for (std::size_t i = 0; i < channels.size(); ++i) out.emplace(channels[i], acc[i].second.finish());
  return out;
}

/// The trapezoidal integrator maps the continuous spectrum at (2/dt) tan(w dt/2)
/// onto the sampled frequency w exactly (delay-free models). Relabels the
/// estimator bins with those continuous-time frequencies.
inline PsdEstimate continuous_frequencies(const PsdEstimate& est, double dt) {
  std::vector<double> w;
  w.reserve(est.grid.size());
  for (double x : est.grid) w.push_back(2.0 / dt * std::tan(0.5 * x * dt));
  PsdEstimate out = est;
  out.grid = FrequencyGrid(std::move(w));
  return out;
}

struct ComparisonReport {
  double band_lo = 0.0;
  double band_hi = 0.0;
  std::size_t bins = 0;
  double max_relative_deviation = 0.0;
  double rms_deviation = 0.0;
  double mean_ratio = 1.0;        // mean of estimate / analytic over the band
  double mean_ratio_error = 0.0;  // 1-sigma statistical error of mean_ratio
  double tolerance = 0.0;
  bool passed = false;
  std::vector<double> omegas, estimate, analytic;
};

/// Interpolates the analytic total onto the estimator grid (linear in w,
/// inside the budget grid only) and reports deviations over the band.
/// Passes iff the RMS relative deviation is <= `tolerance`.
inline ComparisonReport compare_to_analytic(const PsdEstimate& est, const NoiseBudget& budget, double tolerance,
                                            std::optional<std::pair<double, double>> band = std::nullopt) {
  ComparisonReport r;
  r.tolerance = tolerance;
  const auto& bw = budget.grid.omegas();
  double lo = std::max(est.grid.front(), bw.front());
  double hi = std::min(est.grid.back(), bw.back());
  if (band) {
    lo = std::max(lo, band->first);
    hi = std::min(hi, band->second);
  }
  double sq = 0.0, ratio_sum = 0.0;
  for (std::size_t i = 0; i < est.grid.size(); ++i) {
    const double w = est.grid[i];
    if (w < lo || w > hi) continue;
    double a;
    auto it = std::lower_bound(bw.begin(), bw.end(), w);
    const auto j = static_cast<std::size_t>(it - bw.begin());
    if (it != bw.end() && *it == w) {
      a = budget.total[j];
    } else {
      const double f = (w - bw[j - 1]) / (bw[j] - bw[j - 1]);
      a = budget.total[j - 1] + f * (budget.total[j] - budget.total[j - 1]);
    }
    const double dev = (est.values[i] - a) / a;
    r.max_relative_deviation = std::max(r.max_relative_deviation, std::abs(dev));
    sq += dev * dev;
    ratio_sum += est.values[i] / a;
    r.omegas.push_back(w);
    r.estimate.push_back(est.values[i]);
    r.analytic.push_back(a);
  }
  r.bins = r.omegas.size();
  if (r.bins == 0) throw Error(ErrorCode::NoBandOverlap, "estimator grid and analytic budget do not overlap in the band");
  r.band_lo = r.omegas.front();
  r.band_hi = r.omegas.back();
  r.rms_deviation = std::sqrt(sq / static_cast<double>(r.bins));
  r.mean_ratio = ratio_sum / static_cast<double>(r.bins);
  r.mean_ratio_error = est.mean_relative_error(r.bins);
  r.passed = r.rms_deviation <= tolerance;
  return r;
}

inline ComparisonReport compare_to_analytic(const TimeSeries& ts, const std::string& channel, const NoiseBudget& budget,
                                            const SimulationConfig& cfg, double tolerance,
                                            std::optional<std::pair<double, double>> band = std::nullopt) {
  return compare_to_analytic(estimate_psd(ts, channel, cfg), budget, tolerance, band);
}

}  // namespace cavnoise
