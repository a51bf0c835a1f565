#pragma once

// Analysis of the intensity-feedback loop: open-loop gain, closed-loop
// stability (characteristic polynomial or Nyquist winding), margins, and the
// in-band gain needed to bury classical laser noise below the quantum floor.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "cavnoise/error.hpp"
#include "cavnoise/loop_filter.hpp"
#include "cavnoise/model.hpp"
#include "cavnoise/polynomial.hpp"

namespace cavnoise {

/// 2 sqrt(k_in k_out eta): converts K into the closed-loop rate.
inline double loop_coupling(const CavityParams& cavity, const DetectorParams& det) {
  return 2.0 * std::sqrt(cavity.kappa_in() * cavity.kappa_out() * det.eta);
}

/// L(w) with k + i w + 2 sqrt(k_in k_out eta) K(w) = (k + i w)(1 + L(w)).
inline cplx open_loop_gain(const CavityParams& cavity, const DetectorParams& det, const LoopFilter& filter,
                           double omega) {
  return loop_coupling(cavity, det) * filter(omega) / cplx{cavity.kappa(), omega};
}

enum class StabilityMethod { polynomial_roots, nyquist_sampling };

inline std::string_view to_string(StabilityMethod m) {
  return m == StabilityMethod::polynomial_roots ? "polynomial_roots" : "nyquist_sampling";
}

struct StabilityReport {
  bool stable = false;
  double gain_margin_db = std::numeric_limits<double>::infinity();
  std::optional<double> phase_margin_deg;
  int unstable_pole_count = 0;
  StabilityMethod method = StabilityMethod::polynomial_roots;
  std::optional<double> phase_crossover_omega;  // where L crosses the negative real axis
  std::optional<double> gain_crossover_omega;   // where |L| = 1
  std::vector<cplx> closed_loop_poles;          // polynomial method only
};

namespace detail {

struct LocusPoint {
  double omega;
  cplx loop;  // L(i omega)
};

inline double wrapped(double a) {
  while (a > std::numbers::pi) a -= 2.0 * std::numbers::pi;
  while (a <= -std::numbers::pi) a += 2.0 * std::numbers::pi;
  return a;
}

/// Frequency range that contains all loop dynamics: from well below the
/// slowest pole/zero/cavity corner to where |L| has dropped below 1/2.
inline std::pair<double, double> locus_range(const CavityParams& cavity, const DetectorParams& det,
                                             const LoopFilter& filter) {
  const double k = cavity.kappa();
  double lo = 1e-3 * k, hi = 1e3 * k;
  for (const auto* set : {&filter.zeros(), &filter.poles()}) {
    for (const cplx& r : *set) {
      const double m = std::abs(r);
      if (m > 0.0) {
        lo = std::min(lo, 1e-3 * m);
        hi = std::max(hi, 1e3 * m);
      }
    }
  }
  int guard = 0;
  while (std::abs(open_loop_gain(cavity, det, filter, hi)) >= 0.5) {
    hi *= 10.0;
    if (++guard > 40)
      throw Error(ErrorCode::NumericalRootFailure, "open-loop gain does not roll off (method: nyquist_sampling)");
  }
  return {lo, hi};
}

/// Samples 1 + L along the positive imaginary axis with refinement wherever
/// the phase of 1 + L moves by more than `max_step` radians between samples.
inline std::vector<LocusPoint> sample_locus(const CavityParams& cavity, const DetectorParams& det,
                                            const LoopFilter& filter, std::size_t base_points = 4096,
                                            double max_step = 0.2) {
  const auto [lo, hi] = locus_range(cavity, det, filter);
  const std::size_t n = std::max<std::size_t>(base_points, 4096);
  std::vector<double> base(n + 1);
  base[0] = 0.0;
  const double a = std::log(lo), b = std::log(hi);
  for (std::size_t i = 0; i < n; ++i)
    base[i + 1] = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1));

  auto eval = [&](double w) { return LocusPoint{w, open_loop_gain(cavity, det, filter, w)}; };
  std::vector<LocusPoint> out;
  out.reserve(2 * n);
  out.push_back(eval(base[0]));

  struct Pending {
    LocusPoint a, b;
    int depth;
  };
  std::vector<Pending> stack;
  for (std::size_t i = 1; i < base.size(); ++i) {
    stack.push_back({out.back(), eval(base[i]), 0});
    while (!stack.empty()) {
      Pending p = stack.back();
      stack.pop_back();
      const double dphi = wrapped(std::arg(1.0 + p.b.loop) - std::arg(1.0 + p.a.loop));
      const bool near_unity = (std::abs(p.a.loop) - 1.0) * (std::abs(p.b.loop) - 1.0) <= 0.0;
      const double limit = near_unity ? 0.5 * max_step : max_step;
      if (std::abs(dphi) > limit && p.depth < 50 && p.b.omega - p.a.omega > 1e-14 * p.b.omega) {
        const double mid = 0.5 * (p.a.omega + p.b.omega);
        const LocusPoint m = eval(mid);
        // process the left half first
        stack.push_back({m, p.b, p.depth + 1});
        stack.push_back({p.a, m, p.depth + 1});
      } else {
        out.push_back(p.b);
      }
    }
  }
  return out;
}

template <typename F>
double bisect(F f, double lo, double hi, int iterations = 100) {
  double flo = f(lo);
  for (int i = 0; i < iterations; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if ((fm <= 0.0) == (flo <= 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

inline void fill_margins(const CavityParams& cavity, const DetectorParams& det, const LoopFilter& filter,
                         const std::vector<LocusPoint>& locus, StabilityReport& report) {
  auto loop_at = [&](double w) { return open_loop_gain(cavity, det, filter, w); };
  double worst_gm = std::numeric_limits<double>::infinity();
  std::optional<double> worst_pm;
  for (std::size_t i = 1; i < locus.size(); ++i) {
    const LocusPoint& p = locus[i - 1];
    const LocusPoint& q = locus[i];
    const double mp = std::abs(p.loop) - 1.0, mq = std::abs(q.loop) - 1.0;
    if (mp * mq < 0.0 || (mq == 0.0 && mp != 0.0)) {
      const double wc = bisect([&](double w) { return std::abs(loop_at(w)) - 1.0; }, p.omega, q.omega);
      const double pm = 180.0 + std::arg(loop_at(wc)) * 180.0 / std::numbers::pi;
      const double pm_wrapped = pm > 180.0 ? pm - 360.0 : pm;
      if (!worst_pm || pm_wrapped < *worst_pm) {
        worst_pm = pm_wrapped;
        report.gain_crossover_omega = wc;
      }
    }
    const double ip = p.loop.imag(), iq = q.loop.imag();
    if (ip * iq < 0.0 || (iq == 0.0 && ip != 0.0)) {
      const double wp = bisect([&](double w) { return loop_at(w).imag(); }, p.omega, q.omega);
      const cplx l = loop_at(wp);
      if (l.real() < 0.0 && std::abs(l) > 0.0) {
        const double gm = -20.0 * std::log10(std::abs(l));
        if (gm < worst_gm) {
          worst_gm = gm;
          report.phase_crossover_omega = wp;
        }
      }
    }
  }
  report.gain_margin_db = worst_gm;
  report.phase_margin_deg = worst_pm;
}

}  // namespace detail

/// Closed-loop characteristic polynomial (k + s) den(s) + 2 sqrt(k_in k_out eta) num(s)
/// of a delay-free loop.
inline Polynomial characteristic_polynomial(const CavityParams& cavity, const DetectorParams& det,
                                            const LoopFilter& filter) {
  const Polynomial cavity_pole(std::vector<double>{cavity.kappa(), 1.0});
  return cavity_pole * filter.denominator() + loop_coupling(cavity, det) * filter.numerator();
}

/// Counts unstable closed-loop poles from the winding of 1 + L(i w) around
/// the origin; the open loop has no right-half-plane poles.
inline int nyquist_unstable_count(const std::vector<detail::LocusPoint>& locus) {
  double phase = 0.0;
  for (std::size_t i = 1; i < locus.size(); ++i) {
    phase += detail::wrapped(std::arg(1.0 + locus[i].loop) - std::arg(1.0 + locus[i - 1].loop));
  }
  // tail to w = inf: |L| < 1/2 there, so 1 + L returns to 1 without winding
  phase += detail::wrapped(0.0 - std::arg(1.0 + locus.back().loop));
  // the negative-frequency half mirrors the positive one
  const double total = 2.0 * phase;
  return static_cast<int>(std::lround(-total / (2.0 * std::numbers::pi)));
}

/// Closed-loop stability of the intensity servo. Delay-free loops default to
/// polynomial roots; loops with a pure delay use Nyquist sampling. Margins
/// always come from the sampled L(i w) locus.
inline StabilityReport is_stable(const CavityParams& cavity, const DetectorParams& det, const LoopFilter& filter,
                                 std::optional<StabilityMethod> force_method = std::nullopt) {
  StabilityReport report;
  const StabilityMethod method =
      force_method.value_or(filter.delay() > 0.0 ? StabilityMethod::nyquist_sampling : StabilityMethod::polynomial_roots);
  if (method == StabilityMethod::polynomial_roots && filter.delay() > 0.0)
    throw Error(ErrorCode::InvalidFilter, "polynomial stability test cannot handle a pure delay");
  report.method = method;

  const auto locus = detail::sample_locus(cavity, det, filter);
  double min_distance = std::numeric_limits<double>::infinity();
  for (const auto& p : locus) min_distance = std::min(min_distance, std::abs(1.0 + p.loop));

  if (method == StabilityMethod::polynomial_roots) {
    const Polynomial chi = characteristic_polynomial(cavity, det, filter);
    const RootResult roots = polynomial_roots(chi);
    const double scale = std::max(1.0, cavity.kappa());
    for (const cplx& r : roots.roots)
      if (r.real() >= -1e-12 * scale) ++report.unstable_pole_count;
    report.closed_loop_poles = roots.roots;
  } else {
    // a locus passing through -1 is marginal; count it as unstable
    report.unstable_pole_count = min_distance < 1e-12 ? std::max(1, nyquist_unstable_count(locus))
                                                      : std::max(0, nyquist_unstable_count(locus));
  }
  report.stable = report.unstable_pole_count == 0;
  detail::fill_margins(cavity, det, filter, locus, report);
  return report;
}

/// Flat in-band loop gain needed so classical input noise contributes at most
/// `residual_fraction` of the feedback-limited floor 1/(2 eta k_out) at DC.
struct LoopGainRequirement {
  double suppression = 0.0;         // |1 + L(0)|
  double loop_gain = 0.0;           // |L(0)| = suppression - 1
  double gain_db = 0.0;             // 10 log10 |1 + L|^2: power-spectrum suppression
  double loop_gain_db = 0.0;        // 20 log10 |L|: amplitude convention
  double loop_gain_db_power = 0.0;  // 10 log10 |L|
};

/// `classical_noise_db` is the excess of V_in over the vacuum level,
/// 10 log10(V_in - 1). The cavity/detector fix the coupling 4 k_in k_out eta / k^2.
inline LoopGainRequirement required_loop_gain(double classical_noise_db, double residual_fraction,
                                              const CavityParams& cavity, const DetectorParams& det) {
  if (!std::isfinite(residual_fraction) || !(residual_fraction > 0.0) || residual_fraction > 1.0)
    throw Error(ErrorCode::InvalidResidual, "residual fraction must lie in (0, 1]");
  if (!std::isfinite(classical_noise_db) || classical_noise_db < 0.0)
    throw Error(ErrorCode::OutOfRange, "classical noise level must be >= 0 dB");
  if (!(cavity.kappa_out() > 0.0))
    throw Error(ErrorCode::ZeroOutputCoupling, "kappa_out = 0 leaves no transmitted beam to feed back");
  const double excess = std::pow(10.0, classical_noise_db / 10.0);
  const double k = cavity.kappa();
  const double coupling = 4.0 * cavity.kappa_in() * cavity.kappa_out() * det.eta / (k * k);
  // 2 k_in excess / (k^2 |1+L|^2) <= r / (2 eta k_out)
  const double suppression_sq = std::max(1.0, coupling * excess / residual_fraction);
  LoopGainRequirement req;
  req.suppression = std::sqrt(suppression_sq);
  req.loop_gain = req.suppression - 1.0;
  req.gain_db = 10.0 * std::log10(suppression_sq);
  req.loop_gain_db = 20.0 * std::log10(req.loop_gain);
  req.loop_gain_db_power = 10.0 * std::log10(req.loop_gain);
  return req;
}

/// Impedance-matched cavity with ideal detection.
inline LoopGainRequirement required_loop_gain(double classical_noise_db, double residual_fraction) {
  return required_loop_gain(classical_noise_db, residual_fraction, validate_cavity(0.5, 0.5, 0.0),
                            DetectorParams::make(1.0));
}

}  // namespace cavnoise
