#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>
#include <variant>
#include <vector>

#include "cavnoise/error.hpp"
#include "cavnoise/polynomial.hpp"

namespace cavnoise {

struct ConstantSpectrum {
  double value = 1.0;
};

/// Linear interpolation on a strictly increasing grid; no extrapolation.
struct TabulatedSpectrum {
  std::vector<double> omega;
  std::vector<double> value;
};

/// floor + scale * |N(i w)|^2 / |D(i w)|^2, N and D monic with the given roots.
struct RationalSpectrum {
  double floor = 1.0;
  double scale = 0.0;
  std::vector<cplx> zeros;
  std::vector<cplx> poles;
};

/// A non-negative noise spectrum in shot-noise units, evaluable at any
/// angular frequency inside its support.
class SpectralModel {
 public:
  using Variant = std::variant<ConstantSpectrum, TabulatedSpectrum, RationalSpectrum>;

  SpectralModel() : model_(ConstantSpectrum{1.0}) {}
  SpectralModel(ConstantSpectrum c) : model_(c) { validate(); }
  SpectralModel(TabulatedSpectrum t) : model_(std::move(t)) { validate(); }
  SpectralModel(RationalSpectrum r) : model_(std::move(r)) { validate(); }

  static SpectralModel constant(double v) { return SpectralModel(ConstantSpectrum{v}); }

  double operator()(double omega) const {
    return std::visit([omega](const auto& m) { return evaluate(m, omega); }, model_);
  }

  const Variant& variant() const { return model_; }
  bool is_constant() const { return std::holds_alternative<ConstantSpectrum>(model_); }

  /// Frequencies at which the model is pinned down by data (tabulated nodes);
  /// empty for analytic models.
  std::vector<double> nodes() const {
    if (const auto* t = std::get_if<TabulatedSpectrum>(&model_)) return t->omega;
    return {};
  }

 private:
  static double evaluate(const ConstantSpectrum& c, double) { return c.value; }

  static double evaluate(const TabulatedSpectrum& t, double omega) {
    if (omega < t.omega.front() || omega > t.omega.back()) {
      throw Error(ErrorCode::OutOfRange, "tabulated spectrum evaluated at omega=" + std::to_string(omega) +
                                             " outside [" + std::to_string(t.omega.front()) + ", " +
                                             std::to_string(t.omega.back()) + "]");
    }
    auto it = std::upper_bound(t.omega.begin(), t.omega.end(), omega);
    if (it == t.omega.end()) return t.value.back();
    const auto hi = static_cast<std::size_t>(it - t.omega.begin());
    const std::size_t lo = hi - 1;
    const double f = (omega - t.omega[lo]) / (t.omega[hi] - t.omega[lo]);
    return t.value[lo] + f * (t.value[hi] - t.value[lo]);
  }

  static double evaluate(const RationalSpectrum& r, double omega) {
    const cplx s{0.0, omega};
    cplx num{1.0, 0.0}, den{1.0, 0.0};
    for (const cplx& z : r.zeros) num *= (s - z);
    for (const cplx& p : r.poles) den *= (s - p);
    return r.floor + r.scale * std::norm(num) / std::norm(den);
  }

  void validate() const {
    std::visit([](const auto& m) { check(m); }, model_);
  }

  static void check(const ConstantSpectrum& c) {
    if (!std::isfinite(c.value)) throw Error(ErrorCode::InvalidSpectrum, "constant spectrum value is not finite");
    if (c.value < 0.0) throw Error(ErrorCode::InvalidSpectrum, "constant spectrum value is negative");
  }

  static void check(const TabulatedSpectrum& t) {
    if (t.omega.size() < 2 || t.omega.size() != t.value.size())
      throw Error(ErrorCode::InvalidSpectrum, "tabulated spectrum needs >= 2 (omega, value) pairs of equal length");
    for (std::size_t i = 0; i < t.omega.size(); ++i) {
      if (!std::isfinite(t.omega[i]) || !std::isfinite(t.value[i]))
        throw Error(ErrorCode::InvalidSpectrum, "tabulated spectrum has a non-finite entry");
      if (t.value[i] < 0.0) throw Error(ErrorCode::InvalidSpectrum, "tabulated spectrum value is negative");
      if (i > 0 && !(t.omega[i] > t.omega[i - 1]))
        throw Error(ErrorCode::InvalidSpectrum, "tabulated spectrum grid must be strictly increasing");
    }
  }

  static void check(const RationalSpectrum& r) {
    if (!std::isfinite(r.floor) || !std::isfinite(r.scale) || r.floor < 0.0 || r.scale < 0.0)
      throw Error(ErrorCode::InvalidSpectrum, "rational spectrum floor and scale must be finite and >= 0");
    if (!is_conjugate_closed(r.zeros) || !is_conjugate_closed(r.poles))
      throw Error(ErrorCode::InvalidSpectrum, "rational spectrum zeros/poles must be closed under conjugation");
    if (r.zeros.size() > r.poles.size())
      throw Error(ErrorCode::InvalidSpectrum, "rational spectrum must not have more zeros than poles");
    for (const cplx& p : r.poles)
      if (!(p.real() < 0.0)) throw Error(ErrorCode::InvalidSpectrum, "rational spectrum poles must lie in the left half-plane");
  }

  Variant model_;
};

}  // namespace cavnoise
