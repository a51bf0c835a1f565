#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "cavnoise/error.hpp"

namespace cavnoise {

/// Strictly increasing, non-negative angular frequencies [rad/s].
class FrequencyGrid {
 public:
  explicit FrequencyGrid(std::vector<double> omegas) : omegas_(std::move(omegas)) {
    if (omegas_.empty()) throw Error(ErrorCode::InvalidGrid, "frequency grid is empty");
    for (std::size_t i = 0; i < omegas_.size(); ++i) {
      if (!std::isfinite(omegas_[i])) throw Error(ErrorCode::InvalidGrid, "non-finite frequency at index " + std::to_string(i));
      if (omegas_[i] < 0.0) throw Error(ErrorCode::InvalidGrid, "negative frequency at index " + std::to_string(i));
      if (i > 0 && !(omegas_[i] > omegas_[i - 1]))
        throw Error(ErrorCode::InvalidGrid, "frequencies not strictly increasing at index " + std::to_string(i));
    }
  }

  static FrequencyGrid linear(double lo, double hi, std::size_t points) {
    check_range(lo, hi, points);
    std::vector<double> w(points);
    if (points == 1) return FrequencyGrid({lo});
    for (std::size_t i = 0; i < points; ++i)
      w[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1);
    w.back() = hi;
    return FrequencyGrid(std::move(w));
  }

  static FrequencyGrid logarithmic(double lo, double hi, std::size_t points) {
    check_range(lo, hi, points);
    if (!(lo > 0.0)) throw Error(ErrorCode::InvalidGrid, "logarithmic grid needs a positive lower bound");
    if (points == 1) return FrequencyGrid({lo});
    std::vector<double> w(points);
    const double a = std::log(lo), b = std::log(hi);
    for (std::size_t i = 0; i < points; ++i)
      w[i] = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(points - 1));
    w.front() = lo;
    w.back() = hi;
    return FrequencyGrid(std::move(w));
  }

  std::size_t size() const { return omegas_.size(); }
  double operator[](std::size_t i) const { return omegas_[i]; }
  const std::vector<double>& omegas() const { return omegas_; }
  double front() const { return omegas_.front(); }
  double back() const { return omegas_.back(); }
  auto begin() const { return omegas_.begin(); }
  auto end() const { return omegas_.end(); }

  friend bool operator==(const FrequencyGrid&, const FrequencyGrid&) = default;

 private:
  static void check_range(double lo, double hi, std::size_t points) {
    if (points == 0) throw Error(ErrorCode::InvalidGrid, "grid needs at least one point");
    if (!std::isfinite(lo) || !std::isfinite(hi) || lo < 0.0 || (points > 1 && !(hi > lo)))
      throw Error(ErrorCode::InvalidGrid, "grid bounds must satisfy 0 <= min < max");
  }

  std::vector<double> omegas_;
};

}  // namespace cavnoise
