#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "cavnoise/error.hpp"
#include "cavnoise/grid.hpp"

namespace cavnoise {

struct WelchConfig {
  double dt = 0.01;
  std::size_t segment = 4096;
  double overlap = 0.5;  // fraction of a segment shared with its neighbour

  std::size_t hop() const {
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(static_cast<double>(segment) * (1.0 - overlap))));
  }
};

/// Welch PSD estimate on the reliable part of the DFT grid.
struct PsdEstimate {
  FrequencyGrid grid{std::vector<double>{0.0}};
  std::vector<double> values;
  std::size_t segments = 0;
  double bin_relative_error = 0.0;  // 1-sigma relative scatter of one bin
  double bin_correlation = 1.0;     // variance inflation when averaging adjacent bins

  /// Relative 1-sigma error of the mean over `bins` consecutive bins.
  double mean_relative_error(std::size_t bins) const {
    if (bins == 0) return 0.0;
    return bin_relative_error * std::sqrt(std::min(bin_correlation, static_cast<double>(bins)) / static_cast<double>(bins));
  }
};

/// Streaming Welch estimator with a periodic Hann window. Normalized so that
/// white samples of variance 1/dt have unit spectral density, matching the
/// S(w) = integral <x(t) x(0)> exp(-i w t) dt convention of the analytic spectra.
class WelchAccumulator {
 public:
  explicit WelchAccumulator(WelchConfig cfg) : cfg_(cfg) {
    if (cfg_.segment < 16) throw Error(ErrorCode::InsufficientData, "Welch segment must have at least 16 samples");
    if (!(cfg_.overlap >= 0.0) || cfg_.overlap > 0.9) throw Error(ErrorCode::OutOfRange, "Welch overlap must lie in [0, 0.9]");
    if (!(cfg_.dt > 0.0)) throw Error(ErrorCode::OutOfRange, "sample interval must be > 0");
    window_.resize(cfg_.segment);
    for (std::size_t n = 0; n < cfg_.segment; ++n)
      window_[n] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(n) / static_cast<double>(cfg_.segment));
    for (double w : window_) window_power_ += w * w;
    sum_.assign(cfg_.segment / 2 + 1, 0.0);
    fft_.SetFlag(Eigen::FFT<double>::HalfSpectrum);
    pending_.reserve(2 * cfg_.segment);
  }

  void push(double x) {
    pending_.push_back(x);
    if (pending_.size() == cfg_.segment) {
      process(pending_);
      const std::size_t hop = std::min(cfg_.hop(), cfg_.segment);
      pending_.erase(pending_.begin(), pending_.begin() + static_cast<std::ptrdiff_t>(hop));
    }
  }

  void push(std::span<const double> xs) {
    for (double x : xs) push(x);
  }

  std::size_t segments() const { return segments_; }

  /// Lowest and highest reported frequencies.
  double omega_min() const { return 4.0 * bin_width(); }
  double omega_max() const { return 0.8 * std::numbers::pi / cfg_.dt; }

  PsdEstimate finish() const {
    if (segments_ == 0) throw Error(ErrorCode::InsufficientData, "no complete Welch segment in the data");
    const double scale = cfg_.dt / (window_power_ * static_cast<double>(segments_));
    std::vector<double> omegas, values;
    for (std::size_t k = 0; k < sum_.size(); ++k) {
      const double w = static_cast<double>(k) * bin_width();
      if (w < omega_min() || w > omega_max()) continue;
      omegas.push_back(w);
      values.push_back(sum_[k] * scale);
    }
    if (omegas.empty()) throw Error(ErrorCode::InsufficientData, "Welch segment too short for any reportable bin");
    PsdEstimate out;
    out.grid = FrequencyGrid(std::move(omegas));
    out.values = std::move(values);
    out.segments = segments_;
    out.bin_relative_error = bin_error();
    out.bin_correlation = bin_correlation();
    return out;
  }

 private:
  double bin_width() const { return 2.0 * std::numbers::pi / (static_cast<double>(cfg_.segment) * cfg_.dt); }

  void process(const std::vector<double>& seg) {
    buffer_.resize(cfg_.segment);
    for (std::size_t n = 0; n < cfg_.segment; ++n) buffer_[n] = seg[n] * window_[n];
    fft_.fwd(spectrum_, buffer_);
    for (std::size_t k = 0; k < sum_.size(); ++k) sum_[k] += std::norm(spectrum_[k]);
    ++segments_;
  }

  // Relative standard deviation of one averaged bin, including the correlation
  // between overlapping segments.
  double bin_error() const {
    const std::size_t hop = cfg_.hop();
    const double K = static_cast<double>(segments_);
    double inflation = 1.0;
    for (std::size_t j = 1; j * hop < cfg_.segment && j < segments_; ++j) {
      double acc = 0.0;
      for (std::size_t n = 0; n + j * hop < cfg_.segment; ++n) acc += window_[n] * window_[n + j * hop];
      const double rho = acc / window_power_;
      inflation += 2.0 * (1.0 - static_cast<double>(j) / K) * rho * rho;
    }
    return std::sqrt(inflation / K);
  }

  // Sum of squared correlations between a bin and its neighbours.
  double bin_correlation() const {
    const double N = static_cast<double>(cfg_.segment);
    double factor = 1.0;
    for (int m = 1; m <= 8; ++m) {
      std::complex<double> acc{0.0, 0.0};
      for (std::size_t n = 0; n < cfg_.segment; ++n)
        acc += window_[n] * window_[n] * std::polar(1.0, -2.0 * std::numbers::pi * m * static_cast<double>(n) / N);
      factor += 2.0 * std::norm(acc) / (window_power_ * window_power_);
    }
    return factor;
  }

  WelchConfig cfg_;
  std::vector<double> window_;
  double window_power_ = 0.0;
  std::vector<double> sum_;
  std::vector<double> pending_;
  std::vector<double> buffer_;
  std::vector<std::complex<double>> spectrum_;
  std::size_t segments_ = 0;
  Eigen::FFT<double> fft_;
};

inline PsdEstimate welch_psd(std::span<const double> samples, const WelchConfig& cfg) {
  if (samples.size() < cfg.segment)
    throw Error(ErrorCode::InsufficientData, "time series shorter than one Welch segment (" +
                                                 std::to_string(samples.size()) + " < " + std::to_string(cfg.segment) + ")");
  WelchAccumulator acc(cfg);
  acc.push(samples);
  return acc.finish();
}

}  // namespace cavnoise
